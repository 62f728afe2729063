"""ransim: a deterministic, steerable RAN simulator.

Topology (gNodeBs > cells > sectors > UEs), per-class traffic generation,
weighted load metrics, threshold-triggered handover with rollback, a
time-series KPI store with line-protocol export, an HTTP control surface,
and an interactive console — all driven by a seeded, reproducible tick loop.
"""

from .engine import (Command, CommandKind, Engine, RunRecord, Scenario,
                     load_scenario, run, rush_hour_scenario)
from .errors import (CapacityError, EmptySectorError, NetworkFullError,
                     ParseError, SimError, UnknownEntityError, ValidationError)
from .handover import (HandoverEvent, HandoverKind, HandoverPolicy,
                       HandoverStats, HandoverStrategy, Outcome, Softness,
                       balance_step, check_congestion, classify,
                       execute_handover, register_strategy, select_target,
                       select_ue_to_move, stats)
from .loadmetrics import (LoadReport, LoadWeights, cell_load, gnb_load,
                          load_report, sector_load, throughput_load,
                          ue_count_load)
from .metrics import (MetricPoint, MetricSeries, MetricStore,
                      parse_line_protocol)
from .placement import PlacementCursor, place_all, place_ue
from .rng import SeededRng, seeded_rng
from .topology import (Cell, Gnb, Network, NetworkConfig, Sector, ServiceClass,
                       Ue, UeQos, build_network, default_config, load_config,
                       merge_documents)
from .traffic import (DEFAULT_PROFILES, TrafficProfile, TrafficSample,
                      generate, set_profile, set_throughput)

__version__ = "0.1.0"
