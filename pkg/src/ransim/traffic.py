"""Per-UE traffic generation and QoS sampling.

Each service class carries a default profile (packet size, inter-packet
interval, loss rate); a tick aggregates one second of packets into a single
sample. Rates are deterministic for a fixed profile; loss and the delay and
jitter draws come from the seeded stream handed in by the engine, so the same
seed reproduces the same sample series.

A UE whose throughput has been pinned via :func:`set_throughput` bypasses
generation entirely until generation is re-enabled; the pinned value is what
the sector throughput sums see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .errors import ValidationError
from .rng import SeededRng

if TYPE_CHECKING:
    from .topology import Ue

# Centers of the uniform delay/jitter draws, spread by the profile's
# jitter_spread and clamped at zero.
DELAY_MEAN_S = 0.01
JITTER_MEAN_S = 0.0001


@dataclass(frozen=True)
class TrafficProfile:
    """Rate parameters for one service class.

    ``bitrate`` is redundant with packet_size/interval and must agree with
    their ratio within 1%; passing 0 derives it.
    """

    kind: str
    packet_size: int
    interval: float
    bitrate: float = 0.0
    jitter_spread: float = 0.0005
    loss_rate: float = 0.0

    def __post_init__(self):
        if self.packet_size <= 0:
            raise ValidationError(
                f"profile {self.kind!r}: packet_size must be positive")
        if self.interval <= 0:
            raise ValidationError(
                f"profile {self.kind!r}: interval must be positive")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise ValidationError(
                f"profile {self.kind!r}: loss_rate must be within [0, 1]")
        if self.jitter_spread < 0:
            raise ValidationError(
                f"profile {self.kind!r}: jitter_spread must be non-negative")
        nominal = self.packet_size / self.interval
        if self.bitrate == 0.0:
            object.__setattr__(self, "bitrate", nominal)
        elif abs(self.bitrate - nominal) > 0.01 * nominal:
            raise ValidationError(
                f"profile {self.kind!r}: bitrate {self.bitrate} disagrees with "
                f"packet_size/interval = {nominal}")

    def scaled(self, factor: float) -> "TrafficProfile":
        """Same profile at ``factor`` times the packet rate."""
        if factor <= 0:
            raise ValidationError("scale factor must be positive")
        return TrafficProfile(kind=self.kind, packet_size=self.packet_size,
                              interval=self.interval / factor,
                              jitter_spread=self.jitter_spread,
                              loss_rate=self.loss_rate)


@dataclass(frozen=True)
class TrafficSample:
    """One second of aggregated traffic for one UE."""

    ue_id: str
    tick: int
    bytes_sent: int
    packets: int
    delay: float
    jitter: float
    packet_loss: float


DEFAULT_PROFILES: dict[str, TrafficProfile] = {
    "voice": TrafficProfile("voice", packet_size=160, interval=0.02,
                            jitter_spread=0.0002, loss_rate=0.002),
    "video": TrafficProfile("video", packet_size=1200, interval=0.0003,
                            jitter_spread=0.0005, loss_rate=0.002),
    "gaming": TrafficProfile("gaming", packet_size=512, interval=0.001024,
                             jitter_spread=0.0002, loss_rate=0.002),
    "iot": TrafficProfile("iot", packet_size=64, interval=1.0,
                          jitter_spread=0.001, loss_rate=0.002),
    "data": TrafficProfile("data", packet_size=1500, interval=0.0001875,
                           jitter_spread=0.0005, loss_rate=0.002),
}


def generate(ue: "Ue", tick: int, rng: SeededRng,
             qos_rng: Optional[SeededRng] = None) -> TrafficSample:
    """Produce one tick of traffic and update the UE's live metrics.

    packets = floor(1s / interval); losses are binomial over the packets, so
    bytes_sent = packets * packet_size * (1 - realized loss) exactly. The
    delay/jitter draws come from ``qos_rng`` when given, so QoS sampling has
    its own stream.
    """
    profile = ue.profile
    packets = math.floor(1.0 / profile.interval)
    lost = rng.binomial(packets, profile.loss_rate)
    delivered = packets - lost
    bytes_sent = delivered * profile.packet_size
    realized_loss = lost / packets if packets else 0.0

    qrng = qos_rng if qos_rng is not None else rng
    delay = max(0.0, qrng.uniform(DELAY_MEAN_S - profile.jitter_spread,
                                  DELAY_MEAN_S + profile.jitter_spread))
    jitter = max(0.0, qrng.uniform(JITTER_MEAN_S - profile.jitter_spread,
                                   JITTER_MEAN_S + profile.jitter_spread))

    ue.current_throughput = float(bytes_sent)
    ue.qos.delay = delay
    ue.qos.jitter = jitter
    ue.qos.packet_loss = realized_loss

    return TrafficSample(ue_id=ue.id, tick=tick, bytes_sent=bytes_sent,
                         packets=packets, delay=delay, jitter=jitter,
                         packet_loss=realized_loss)


def advance(ue: "Ue", tick: int, rng: SeededRng,
            qos_rng: Optional[SeededRng] = None) -> Optional[TrafficSample]:
    """One tick of the traffic state machine for a single UE.

    A pinned throughput overrides generation; an inactive, unpinned UE decays
    to zero. Returns the generated sample, if any.
    """
    if ue.pinned_throughput is not None:
        ue.current_throughput = ue.pinned_throughput
        return None
    if not ue.traffic_active:
        ue.current_throughput = 0.0
        return None
    return generate(ue, tick, rng, qos_rng)


def set_profile(ue: "Ue", profile: TrafficProfile) -> None:
    """Swap the UE's profile; takes effect on the next generated tick."""
    if not isinstance(profile, TrafficProfile):
        raise ValidationError("profile must be a TrafficProfile")
    ue.profile = profile


def set_throughput(ue: "Ue", value: float) -> None:
    """Pin the UE's throughput (bytes/second) until generation is re-enabled."""
    if value < 0:
        raise ValidationError(f"throughput must be non-negative, got {value}")
    ue.pinned_throughput = float(value)
    ue.current_throughput = float(value)


def clear_pin(ue: "Ue") -> None:
    """Re-enable generated traffic for a pinned UE."""
    ue.pinned_throughput = None


def profile_from_dict(entry: dict) -> TrafficProfile:
    """Build a profile from a configuration object, defaulting by kind."""
    if not isinstance(entry, dict):
        raise ValidationError("profile must be an object")
    kind = entry.get("kind", "data")
    base = DEFAULT_PROFILES.get(kind)
    if base is None and ("packet_size" not in entry or "interval" not in entry):
        raise ValidationError(f"unknown profile kind {kind!r} needs explicit "
                              "packet_size and interval")
    defaults = base or DEFAULT_PROFILES["data"]
    try:
        return TrafficProfile(
            kind=kind,
            packet_size=int(entry.get("packet_size", defaults.packet_size)),
            interval=float(entry.get("interval", defaults.interval)),
            bitrate=float(entry.get("bitrate", 0.0)),
            jitter_spread=float(entry.get("jitter_spread", defaults.jitter_spread)),
            loss_rate=float(entry.get("loss_rate", defaults.loss_rate)),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid profile: {exc}") from exc
