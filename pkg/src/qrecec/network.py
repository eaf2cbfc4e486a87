"""Linear-chain topology, configuration loading, heralding and classical latency."""
from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .kernel import Event, Timeline, seconds_to_ps
from .noise import FIDELITY_FIELDS, HardwareProfile, NoiseParameterError
from .steane import CEC_MODES, CODES, FT_MODES

PAIRS_PER_LINK = 7
T2_CAP = 199.99
T_LINK_DEFAULT = 0.0151


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    left: str
    right: str
    length_km: float


@dataclass(frozen=True)
class ProtocolSettings:
    code: str = "steane713"
    ft_mode: str = "minimal"
    cec_mode: str = "cec"
    episode_timeout_s: float = 60.0
    prep_retry_cap: int = 100

    def __post_init__(self) -> None:
        if self.code not in CODES:
            raise ConfigError(f"unknown code {self.code!r}")
        if self.ft_mode not in FT_MODES:
            raise ConfigError(f"ft_mode must be one of {FT_MODES}, got {self.ft_mode!r}")
        if self.cec_mode not in CEC_MODES:
            raise ConfigError(f"cec_mode must be one of {CEC_MODES}, got {self.cec_mode!r}")
        if not self.episode_timeout_s > 0:
            raise ConfigError("episode_timeout_s must be positive")
        if self.prep_retry_cap < 1:
            raise ConfigError("prep_retry_cap must be at least 1")


@dataclass(frozen=True)
class Topology:
    """Linear chain ``nodes[0] - nodes[1] - ... - nodes[-1]``."""

    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    _pos: dict = field(default=None, repr=False, compare=False)  # type: ignore[assignment]
    _dist: tuple = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        links = tuple(self.links)
        if len(nodes) < 2:
            raise ConfigError("need at least two nodes")
        if len(set(nodes)) != len(nodes):
            raise ConfigError("node names must be unique")
        if len(links) != len(nodes) - 1:
            raise ConfigError(f"a chain of {len(nodes)} nodes needs {len(nodes) - 1} links, "
                              f"got {len(links)}")
        for i, ln in enumerate(links):
            if (ln.left, ln.right) != (nodes[i], nodes[i + 1]):
                raise ConfigError(f"link {i} ({ln.left}-{ln.right}) does not join consecutive "
                                  f"nodes {nodes[i]}-{nodes[i + 1]}; only linear chains are supported")
            if not ln.length_km >= 0:
                raise ConfigError(f"link {i} has invalid length {ln.length_km}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "_pos", {n: i for i, n in enumerate(nodes)})
        cum = [0.0]
        for ln in links:
            cum.append(cum[-1] + ln.length_km)
        object.__setattr__(self, "_dist", tuple(cum))

    @classmethod
    def chain(cls, n_links: int, link_km: float, prefix: str = "r") -> "Topology":
        if n_links < 1:
            raise ConfigError("need at least one link")
        nodes = tuple(f"{prefix}{i}" for i in range(n_links + 1))
        links = tuple(Link(nodes[i], nodes[i + 1], float(link_km)) for i in range(n_links))
        return cls(nodes, links)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def index(self, node: str) -> int:
        try:
            return self._pos[node]
        except KeyError:
            raise ConfigError(f"unknown node {node!r}") from None

    def distance_km(self, u: str, v: str) -> float:
        return abs(self._dist[self.index(u)] - self._dist[self.index(v)])

    def hops(self, u: str, v: str) -> int:
        return abs(self.index(u) - self.index(v))

    @property
    def total_km(self) -> float:
        return self._dist[-1]

    def memory_keys(self, node: str) -> dict[str, list]:
        """Communication, data and ancilla keys of ``node`` (one set per adjacent link)."""
        i = self.index(node)
        sides = []
        if i > 0:
            sides.append("L")
        if i < len(self.nodes) - 1:
            sides.append("R")
        out: dict[str, list] = {"comm": [], "data": [], "anc": []}
        for s in sides:
            out["comm"] += [(node, s, "c", q) for q in range(PAIRS_PER_LINK)]
            out["data"] += [(node, s, "d", q) for q in range(PAIRS_PER_LINK)]
            out["anc"].append((node, s, "a", 0))
        return out

    def total_qubits(self) -> int:
        return sum(sum(len(v) for v in self.memory_keys(n).values()) for n in self.nodes)


def classical_latency(topology: Topology, u: str, v: str, profile: HardwareProfile) -> float:
    """One-way classical message delay in seconds between nodes ``u`` and ``v``."""
    if u == v:
        raise ConfigError("latency needs two distinct nodes")
    d_m = topology.distance_km(u, v) * 1e3
    return d_m / profile.c_star + topology.hops(u, v) * profile.D_fwd + profile.D_end


def herald_success_prob(profile: HardwareProfile, length_km: float) -> float:
    """Two-photon coincidence probability for one Barrett-Kok attempt."""
    eta_fiber = 10.0 ** (-profile.alpha * (length_km / 2.0) / 10.0)
    return 0.5 * (profile.eta_m * profile.eta_d * eta_fiber) ** 2


def attempt_period(profile: HardwareProfile, length_km: float) -> float:
    return 2.0 * length_km * 1e3 / profile.c_star + profile.t_prep


def start_heralding(timeline: Timeline, link: Link, profile: HardwareProfile, rng,
                    on_success: Callable[[int, int], None],
                    slots: int = PAIRS_PER_LINK) -> list[Event]:
    """Run ``slots`` independent attempt loops in parallel on ``link``.

    Each slot succeeds after a geometric number of attempts and then calls
    ``on_success(slot, attempts)`` at ``attempts * period``. With zero
    success probability nothing is scheduled.
    """
    p = herald_success_prob(profile, link.length_km)
    if p <= 0.0:
        return []
    period = seconds_to_ps(attempt_period(profile, link.length_km))
    events = []
    for slot in range(slots):
        k = rng.geometric(p)
        events.append(timeline.schedule(k * period, on_success, slot, k,
                                        label=f"herald {link.left}-{link.right}#{slot}"))
    return events


def z_profile(z: float, baseline: HardwareProfile | None = None,
              t_link: float = T_LINK_DEFAULT) -> HardwareProfile:
    """Interpolate every noise parameter between the baseline (z=0) and ideal (z=1)."""
    if not 0.0 <= z <= 1.0:
        raise ConfigError(f"z={z} outside [0, 1]")
    base = baseline or HardwareProfile()
    changes = {f: getattr(base, f) + (1.0 - getattr(base, f)) * z for f in FIDELITY_FIELDS}
    p_z0 = -math.expm1(-t_link / base.T2) / 2.0
    p_z = p_z0 * (1.0 - z)
    if p_z <= 0.0:
        t2 = T2_CAP
    else:
        t2 = min(-t_link / math.log1p(-2.0 * p_z), T2_CAP)
    changes["T2"] = t2
    return base.with_(**changes)


# configuration documents

_HW_KEYS = {
    "F_1q": "F_1q", "F_2q": "F_2q", "F_m": "F_m", "F_init": "F_init", "F_phys": "F_phys",
    "T1_s": "T1", "T2_s": "T2", "eta_m": "eta_m", "eta_d": "eta_d",
    "alpha_db_per_km": "alpha", "c_star_m_per_s": "c_star", "D_fwd_s": "D_fwd",
    "D_end_s": "D_end", "t_prep_s": "t_prep", "bias_1q": "bias_1q", "bias_2q": "bias_2q",
}
_PROTO_KEYS = {"code", "ft_mode", "cec_mode", "episode_timeout_s", "prep_retry_cap"}
_EXP_KEYS = {"runs", "seed", "z"}
_TOP_KEYS = {"nodes", "links", "hardware", "protocol", "experiment"}


@dataclass(frozen=True)
class ExperimentSettings:
    runs: int = 100
    seed: int = 0
    z: float | None = None


@dataclass(frozen=True)
class SimConfig:
    topology: Topology
    profile: HardwareProfile
    protocol: ProtocolSettings
    experiment: ExperimentSettings


def _reject_unknown(section: str, got: Mapping, allowed) -> None:
    extra = sorted(set(got) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(extra)}")


def _number(section: str, key: str, v, *, integer: bool = False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {v!r}")
    if integer and not float(v).is_integer():
        raise ConfigError(f"{section}.{key} must be an integer, got {v!r}")
    return int(v) if integer else float(v)


def load_config(document: Mapping | str | Path) -> SimConfig:
    """Validate a configuration (mapping, JSON text or path) and fill defaults."""
    if isinstance(document, Path) or (isinstance(document, str)
                                      and not document.lstrip().startswith("{")):
        try:
            document = json.loads(Path(document).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {document}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    elif isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ConfigError("config must be a JSON object")
    _reject_unknown("config", document, _TOP_KEYS)
    for req in ("nodes", "links"):
        if req not in document:
            raise ConfigError(f"missing required key {req!r}")

    nodes = document["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise ConfigError("nodes must be an array of names")
    raw_links = document["links"]
    if not isinstance(raw_links, list):
        raise ConfigError("links must be an array")
    links = []
    for i, ln in enumerate(raw_links):
        if not isinstance(ln, Mapping):
            raise ConfigError(f"links[{i}] must be an object")
        _reject_unknown(f"links[{i}]", ln, {"left", "right", "length_km"})
        missing = {"left", "right", "length_km"} - set(ln)
        if missing:
            raise ConfigError(f"links[{i}] missing {sorted(missing)}")
        links.append(Link(str(ln["left"]), str(ln["right"]),
                          _number(f"links[{i}]", "length_km", ln["length_km"])))
    topology = Topology(tuple(nodes), tuple(links))

    hw = document.get("hardware", {}) or {}
    if not isinstance(hw, Mapping):
        raise ConfigError("hardware must be an object")
    _reject_unknown("hardware", hw, _HW_KEYS)
    kwargs = {}
    for key, v in hw.items():
        attr = _HW_KEYS[key]
        if attr.startswith("bias"):
            if v is not None:
                if not isinstance(v, list):
                    raise ConfigError(f"hardware.{key} must be an array or null")
                v = tuple(_number("hardware", key, x) for x in v)
            kwargs[attr] = v
        elif attr in ("T1", "T2") and v is None:
            kwargs[attr] = math.inf
        else:
            kwargs[attr] = _number("hardware", key, v)
    try:
        profile = HardwareProfile(**kwargs)
    except NoiseParameterError as exc:
        raise ConfigError(f"hardware: {exc}") from exc

    proto = document.get("protocol", {}) or {}
    if not isinstance(proto, Mapping):
        raise ConfigError("protocol must be an object")
    _reject_unknown("protocol", proto, _PROTO_KEYS)
    pk = dict(proto)
    if "episode_timeout_s" in pk:
        pk["episode_timeout_s"] = _number("protocol", "episode_timeout_s", pk["episode_timeout_s"])
    if "prep_retry_cap" in pk:
        pk["prep_retry_cap"] = _number("protocol", "prep_retry_cap", pk["prep_retry_cap"],
                                       integer=True)
    settings = ProtocolSettings(**pk)

    exp = document.get("experiment", {}) or {}
    if not isinstance(exp, Mapping):
        raise ConfigError("experiment must be an object")
    _reject_unknown("experiment", exp, _EXP_KEYS)
    ek = {}
    if "runs" in exp:
        ek["runs"] = _number("experiment", "runs", exp["runs"], integer=True)
        if ek["runs"] < 1:
            raise ConfigError("experiment.runs must be at least 1")
    if "seed" in exp:
        ek["seed"] = _number("experiment", "seed", exp["seed"], integer=True)
    if exp.get("z") is not None:
        ek["z"] = _number("experiment", "z", exp["z"])
        profile = z_profile(ek["z"], profile)
    return SimConfig(topology, profile, settings, ExperimentSettings(**ek))


def config_document(topology: Topology, profile: HardwareProfile,
                    settings: ProtocolSettings | None = None,
                    experiment: ExperimentSettings | None = None) -> dict:
    """Inverse of :func:`load_config` (z is baked into the hardware block)."""
    settings = settings or ProtocolSettings()
    experiment = experiment or ExperimentSettings()
    hw = {}
    for key, attr in _HW_KEYS.items():
        v = getattr(profile, attr)
        if attr in ("T1", "T2") and math.isinf(v):
            v = None
        elif isinstance(v, tuple):
            v = list(v)
        hw[key] = v
    return {
        "nodes": list(topology.nodes),
        "links": [{"left": ln.left, "right": ln.right, "length_km": ln.length_km}
                  for ln in topology.links],
        "hardware": hw,
        "protocol": {"code": settings.code, "ft_mode": settings.ft_mode,
                     "cec_mode": settings.cec_mode,
                     "episode_timeout_s": settings.episode_timeout_s,
                     "prep_retry_cap": settings.prep_retry_cap},
        "experiment": {"runs": experiment.runs, "seed": experiment.seed},
    }
