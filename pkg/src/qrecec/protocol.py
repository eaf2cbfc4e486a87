"""Event-driven encoded repeater protocol with classical error correction.

Phases per episode:

1. heralded physical Bell pairs, 7 per link, generated in parallel;
2. both endpoint blocks of a link are encoded into logical ``|0>`` (with
   verification); the left block is turned into ``|+>`` by transversal H;
3. a teleported logical CNOT consumes the 7 pairs, leaving a logical Bell
   pair across the link;
4. every middle node performs an encoded Bell measurement (transversal
   CNOT, X readout of the left block, Z readout of the right block) and
   decodes both strings classically;
5. the leftmost node (the initiator) XORs all frame bits, applies the
   logical Pauli correction, and the fidelity is read out after an ideal
   recovery on both endpoint blocks.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import asdict, dataclass, field

from .kernel import (EventFailure, ProtocolError, Timeline, ps_to_seconds, schedule,
                     seconds_to_ps)
from .network import PAIRS_PER_LINK, ProtocolSettings, Topology, classical_latency, start_heralding
from .noise import HardwareProfile, NoisyDevice
from .stabilizer.manager import QuantumManager
from .steane import (PreparationFailure, correct_and_extract, encode_zero, get_code,
                     ideal_recovery, transversal_cnot)

TCNOT_ALICE_RESULT = "TCNOT_ALICE_RESULT"
TCNOT_BOB_RESULT = "TCNOT_BOB_RESULT"
TCNOT_DONE = "TCNOT_DONE"
QRE_FRAME = "QRE_FRAME"


@dataclass(frozen=True)
class ProtocolMessage:
    kind: str
    sender: str
    receiver: str
    payload: tuple
    send_time: int
    arrival_time: int
    link: int = -1


@dataclass(frozen=True)
class FrameContribution:
    b_x: int
    b_z: int
    origin: str


@dataclass
class RunRecord:
    success: bool
    fidelity: float = float("nan")
    latency: float = float("nan")
    failure: str = ""
    counters: dict = field(default_factory=dict)
    swap_syndromes: list = field(default_factory=list)  # (node, s_x, s_z)
    frame: tuple = (0, 0)
    correlators: tuple = ()  # (XX, YY, ZZ) after recovery
    seed: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def aggregate_frame(contributions: list[FrameContribution]) -> tuple[int, int]:
    """XOR of all frame bits; a node contributing twice is a protocol error."""
    seen = set()
    bx = bz = 0
    for c in contributions:
        if c.origin in seen:
            raise ProtocolError(f"duplicate frame contribution from {c.origin}")
        seen.add(c.origin)
        bx ^= c.b_x
        bz ^= c.b_z
    return bx, bz


def logical_fidelity(xx: int, yy: int, zz: int) -> float:
    """Overlap with the logical ``|Phi+>`` from the three logical correlators."""
    return (1 + xx - yy + zz) / 4.0


def extract_fidelity(manager: QuantumManager, left: list, right: list, rng,
                     code=None) -> tuple[float, tuple[int, int, int]]:
    """Ideal recovery on each block, then the logical Bell-state overlap."""
    code = code or get_code("steane713")
    ideal_recovery(manager, left, rng, code)
    ideal_recovery(manager, right, rng, code)
    keys = list(left) + list(right)
    xx = manager.peek({k: "X" for k in keys})
    yy = manager.peek({k: "Y" for k in keys})
    zz = manager.peek({k: "Z" for k in keys})
    return logical_fidelity(xx, yy, zz), (xx, yy, zz)


class _Link:
    __slots__ = ("index", "alice", "bob", "ready", "accepted", "done")

    def __init__(self, index: int, alice: "_Node", bob: "_Node"):
        self.index = index
        self.alice = alice
        self.bob = bob
        self.ready = 0
        self.accepted = 0
        self.done = 0


class _Node:
    """Per-repeater state machine. ``L``/``R`` name the blocks facing each link."""

    def __init__(self, ep: "Episode", name: str, index: int):
        self.ep = ep
        self.name = name
        self.index = index
        self.links: dict[str, _Link] = {}
        self.inbox: dict[tuple, ProtocolMessage] = {}
        self.measured: dict[str, tuple] = {}
        self.side_done: set[str] = set()
        self.corrected: set[str] = set()
        self.frames: list[FrameContribution] = []

    def comm(self, side: str) -> list:
        return [(self.name, side, "c", i) for i in range(PAIRS_PER_LINK)]

    def data(self, side: str) -> list:
        return [(self.name, side, "d", i) for i in range(PAIRS_PER_LINK)]

    def anc(self, side: str):
        return (self.name, side, "a", 0)

    # phase 2: encoding
    def encode(self, side: str) -> None:
        ep = self.ep
        link = self.links[side]
        tag = f"{self.name}.{side}:"
        ep.prep_attempts += encode_zero(ep.device, self.data(side), self.anc(side),
                                        ep.settings.ft_mode, ep.settings.prep_retry_cap,
                                        ep.code, tag=tag)
        ep.device.checkpoint(tag + "accepted", self.data(side))
        if side == "R":
            for k in self.data(side):
                ep.device.h(k)
            ep.device.checkpoint(tag + "plus_prepared", self.data(side))
        link.accepted += 1
        if link.accepted == 2:
            schedule(ep.tl, 0, link.alice.tcnot_local, "R", label=f"tcnot link{link.index} A")
            schedule(ep.tl, 0, link.bob.tcnot_local, "L", label=f"tcnot link{link.index} B")

    # phase 3: teleported CNOT (Alice holds the control block on side R)
    def tcnot_local(self, side: str) -> None:
        ep = self.ep
        dev = ep.device
        data, comm = self.data(side), self.comm(side)
        tag = f"{self.name}.{side}:"
        if side == "R":
            for d, c in zip(data, comm):
                dev.cnot(d, c)
            dev.checkpoint(tag + "tcnot_local", data + comm)
            bits = tuple(dev.measure(c, "Z") for c in comm)
            kind, peer = TCNOT_ALICE_RESULT, self.links[side].bob
        else:
            for d, c in zip(data, comm):
                dev.cnot(c, d)
            dev.checkpoint(tag + "tcnot_local", data + comm)
            bits = tuple(dev.measure(c, "X") for c in comm)
            kind, peer = TCNOT_BOB_RESULT, self.links[side].alice
        self.measured[side] = bits
        ep.send(kind, self, peer, bits, self.links[side].index)
        pending = self.inbox.pop((side, "result"), None)
        if pending is not None:
            self._apply_correction(side, pending)

    def receive(self, msg: ProtocolMessage) -> None:
        side = "R" if self.index == self.ep.topology.index(msg.sender) - 1 else "L"
        if msg.kind in (TCNOT_ALICE_RESULT, TCNOT_BOB_RESULT):
            if side not in self.measured:
                self.inbox[(side, "result")] = msg  # local measurements not done yet
            else:
                self._apply_correction(side, msg)
        elif msg.kind == TCNOT_DONE:
            if side not in self.corrected:
                self.inbox[(side, "done")] = msg
            else:
                self._side_complete(side)
        elif msg.kind == QRE_FRAME:
            if self.index != 0:
                raise ProtocolError(f"frame sent to non-initiator {self.name}")
            self.frames.append(FrameContribution(msg.payload[0], msg.payload[1], msg.sender))
            if len(self.frames) > self.ep.topology.n_nodes - 2:
                raise ProtocolError("more frame contributions than middle nodes")
            self.ep.try_finalize()
        else:
            raise ProtocolError(f"unknown message kind {msg.kind!r}")

    def _apply_correction(self, side: str, msg: ProtocolMessage) -> None:
        dev = self.ep.device
        kind = "X" if side == "L" else "Z"  # Bob fixes bit flips, Alice phases
        for d, bit in zip(self.data(side), msg.payload):
            if bit:
                dev.correct(d, kind)
        dev.checkpoint(f"{self.name}.{side}:tcnot_corrected", self.data(side))
        self.corrected.add(side)
        link = self.links[side]
        peer = link.bob if side == "R" else link.alice
        self.ep.send(TCNOT_DONE, self, peer, (), link.index)
        if self.inbox.pop((side, "done"), None) is not None:
            self._side_complete(side)

    def _side_complete(self, side: str) -> None:
        self.side_done.add(side)
        self.links[side].done += 1
        if self.index == 0:
            self.ep.try_finalize()
        elif len(self.links) == 2 and len(self.side_done) == 2:
            self.swap()

    # phase 4: encoded swap
    def swap(self) -> None:
        ep = self.ep
        dev = ep.device
        left, right = self.data("L"), self.data("R")
        tag = f"{self.name}:"
        dev.checkpoint(tag + "swap_ready", left + right)
        transversal_cnot(dev, left, right)
        dev.checkpoint(tag + "swap_cnot", left + right)
        for k in left:
            dev.h(k)
        dev.checkpoint(tag + "swap_pre_measure", left + right)
        mx = [dev.measure(k, "Z") for k in left]
        mz = [dev.measure(k, "Z") for k in right]
        bx = correct_and_extract(mx, ep.settings.cec_mode, ep.code)
        bz = correct_and_extract(mz, ep.settings.cec_mode, ep.code)
        ep.swap_syndromes.append((self.name, bx.s, bz.s))
        ep.send(QRE_FRAME, self, ep.nodes[0], (bx.logical_bit, bz.logical_bit), -1)


class Episode:
    """One trajectory: builds nodes and links, runs the timeline, returns a record."""

    def __init__(self, topology: Topology, profile: HardwareProfile,
                 settings: ProtocolSettings | None = None, seed: int = 0,
                 hook: Callable | None = None, trace: bool = False):
        self.topology = topology
        self.profile = profile
        self.settings = settings or ProtocolSettings()
        self.seed = seed
        self.code = get_code(self.settings.code)
        self.tl = Timeline(seed, trace=trace)
        self.qm = QuantumManager()
        self.device = NoisyDevice(self.qm, profile, self.tl, self.tl.stream("noise"))
        self.device.hook = hook
        self.nodes = [_Node(self, name, i) for i, name in enumerate(topology.nodes)]
        self.links = []
        for j in range(len(topology.links)):
            ln = _Link(j, self.nodes[j], self.nodes[j + 1])
            self.nodes[j].links["R"] = ln
            self.nodes[j + 1].links["L"] = ln
            self.links.append(ln)
        for node in self.nodes:
            for keys in topology.memory_keys(node.name).values():
                self.qm.new(keys)
        self._latency = {}
        self.prep_attempts = 0
        self.herald_attempts = 0
        self.swap_syndromes: list = []
        self.messages: list[ProtocolMessage] = []
        self.record: RunRecord | None = None

    def latency_ps(self, a: _Node, b: _Node) -> int:
        key = (a.index, b.index)
        v = self._latency.get(key)
        if v is None:
            v = seconds_to_ps(classical_latency(self.topology, a.name, b.name, self.profile))
            self._latency[key] = v
        return v

    def send(self, kind: str, src: _Node, dst: _Node, payload: tuple, link: int) -> None:
        delay = self.latency_ps(src, dst)
        msg = ProtocolMessage(kind, src.name, dst.name, tuple(payload), self.tl.now,
                              self.tl.now + delay, link)
        self.messages.append(msg)
        schedule(self.tl, delay, dst.receive, msg, label=f"{kind} {src.name}->{dst.name}")

    # phase 1
    def _pair_ready(self, link: _Link, slot: int, attempts: int) -> None:
        a = link.alice.comm("R")[slot]
        b = link.bob.comm("L")[slot]
        self.device.bell_pair(a, b)
        self.herald_attempts += attempts
        link.ready += 1
        if link.ready == PAIRS_PER_LINK:
            self.device.checkpoint(f"link{link.index}:pairs_ready",
                                   link.alice.comm("R") + link.bob.comm("L"))
            schedule(self.tl, 0, link.alice.encode, "R", label=f"encode link{link.index} A")
            schedule(self.tl, 0, link.bob.encode, "L", label=f"encode link{link.index} B")

    # phase 5
    def try_finalize(self) -> None:
        init = self.nodes[0]
        if "R" not in init.side_done or len(init.frames) < self.topology.n_nodes - 2:
            return
        bx, bz = aggregate_frame(init.frames)
        left = init.data("R")
        right = self.nodes[-1].data("L")
        if bx:
            for k in left:
                self.device.correct(k, "Z")
        if bz:
            for k in left:
                self.device.correct(k, "X")
        for k in left + right:
            self.device.touch(k)
        fid, corr = extract_fidelity(self.qm, left, right, self.tl.stream("recovery"), self.code)
        self.record = RunRecord(True, fid, ps_to_seconds(self.tl.now), frame=(bx, bz),
                                correlators=corr)
        self.tl.stop()

    def _counters(self) -> dict:
        c = self.device.counters
        return {"one_qubit_gates": c.one_qubit_gates, "two_qubit_gates": c.two_qubit_gates,
                "measurements": c.measurements, "prep_attempts": self.prep_attempts,
                "heralding_attempts": self.herald_attempts,
                "qubits": self.topology.total_qubits()}

    def run(self) -> RunRecord:
        for ln in self.links:
            rng = self.tl.stream(f"herald/{ln.index}")
            start_heralding(self.tl, self.topology.links[ln.index], self.profile, rng,
                            lambda slot, k, ln=ln: self._pair_ready(ln, slot, k))
        try:
            self.tl.run(until=seconds_to_ps(self.settings.episode_timeout_s))
        except EventFailure as exc:
            if isinstance(exc.cause, PreparationFailure):
                self.record = RunRecord(False, failure="prep_cap")
            else:
                raise
        if self.record is None:
            self.record = RunRecord(False, failure="timeout")
        rec = self.record
        rec.counters = self._counters()
        rec.swap_syndromes = list(self.swap_syndromes)
        rec.seed = self.seed
        return rec


def run_episode(topology: Topology, profile: HardwareProfile,
                settings: ProtocolSettings | None = None, seed: int = 0,
                hook: Callable | None = None) -> RunRecord:
    return Episode(topology, profile, settings, seed, hook).run()
