"""Cycle-accurate simulator of the 2-parallel feed-forward multiplier pipeline.

Structure simulated (one modulus channel):

    [PE - DSD - PE - ... - PE]  ->  [PE]  ->  [PE - DSD - ... - PE]
      forward, m PEs, m-1 DSDs   pointwise     inverse, m PEs, m-1 DSDs

There is deliberately *no* storage element between the last forward PE, the
pointwise PE and the first inverse PE: the folding schedules are chosen so
the product pairs stream straight through.  Every register in the model is
explicit, so if the schedules were wrong the data would simply not be at the
switch when a PE needs it, and the simulator aborts with a diagnostic naming
the cycle and element (ScheduleViolation).

Scheduling conventions (fixed by the folding tables in foldsched):

* One global clock; cycle 0 carries the first input pair.  A node's folding
  order is its execution cycle mod n/2 on that clock.  Forward PE_s starts at
  2^(m-1) - 2^(m-1-s); the pointwise and first inverse PEs align with the
  last forward PE; inverse PE_s adds 2^s - 1.  Pipeline registers delay data
  and schedule together (retiming), so folding orders are always looked up on
  the unretimed clock.
* Forward stage-s node u * 2^(m-1-s) + w is the butterfly over positions
  (u * 2^(m-s) + w, + 2^(m-1-s)); inverse stage-s node rho * 2^(m-1-s) + j
  joins pair (j, j + 2^(m-1-s)) of sub-block rho (sub-blocks split sum=even /
  difference=odd, most significant first).
* Butterflies emit their sum output on lane 1, difference on lane 0.
* A DSD is two r-register sets around a 2x2 switch: lane 0 is delayed r
  cycles before the switch, the switch's second leg r cycles after it.  The
  switch follows a fixed period-n/2 pattern derived at build time from the
  folding orders; deriving it fails loudly if the orders demand more
  buffering than the r registers provide.

Every in-flight value carries a tag naming the dataflow-graph edge it is
travelling, so each PE verifies, cycle by cycle, that it received exactly the
operands its folding order demands.
"""

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .foldsched import FoldingSchedule, bitrev, intt_schedule, ntt_schedule
from .modint import mod_add, mod_half, mod_mul, mod_sub
from .nttref import NttParams, ResiduePoly, ntt_forward


class ScheduleViolation(Exception):
    """An element was asked to hold or produce data its registers cannot."""


@dataclass(frozen=True)
class StreamSample:
    """One clock edge of a two-lane stream; None payloads are bubbles."""

    cycle: int
    lane0: Optional[int]
    lane1: Optional[int]

    @property
    def valid(self) -> bool:
        return self.lane0 is not None and self.lane1 is not None


@dataclass(frozen=True)
class PipeConfig:
    """Pipeline registers appended to each PE's outputs, in chain order.

    T_pipe, the latency added to the cascade, is the sum over the data path.
    """

    per_pe: Tuple[int, ...] = ()

    @classmethod
    def uniform(cls, t_pipe: int, num_pes: int) -> "PipeConfig":
        """Spread t_pipe registers round-robin across num_pes PEs."""
        regs = [t_pipe // num_pes] * num_pes
        for i in range(t_pipe % num_pes):
            regs[i] += 1
        return cls(per_pe=tuple(regs))

    @property
    def t_pipe(self) -> int:
        return sum(self.per_pe)


@dataclass
class CycleReport:
    """Measured timing summary of one simulation run."""

    n: int
    t_pipe: int
    latency_cycles: int
    bpp_cycles: int
    blocks: int
    utilization: Dict[str, float]

    def total_cycles(self, blocks: Optional[int] = None) -> int:
        if blocks is None:
            blocks = self.blocks
        return self.latency_cycles + self.bpp_cycles * blocks

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "t_pipe": self.t_pipe,
            "latency": self.latency_cycles,
            "bpp": self.bpp_cycles,
            "blocks": self.blocks,
            "total": self.total_cycles(),
            "utilization": dict(self.utilization),
        }


# ---------------------------------------------------------------------------
# Elements.  Wire values are (tag, residue) tuples or None.
# ---------------------------------------------------------------------------

class _Pe:
    """One butterfly (or pointwise multiplier) time-shared over n/2 nodes.

    `phase` is the actual cycle of slot 0; `sched_base` is the unretimed
    phase used to index the folding-order row, so added pipeline registers
    shift execution without changing which node runs in which slot.
    """

    def __init__(self, name: str, kind: str, stage: int, params: NttParams,
                 row: Sequence[int], phase: int, sched_base: int,
                 pipe_regs: int, m: int):
        self.name = name
        self.kind = kind            # "dit" | "dif" | "pointwise"
        self.stage = stage
        self.p = params
        self.row = row
        self.phase = phase
        self.sched_base = sched_base
        self.n2 = 1 << (m - 1)
        self.m = m
        self.pipe = [None] * pipe_regs
        self.executed = 0
        self.busy_cycles = 0
        self.first_busy = None

    def _label(self, slot: int) -> int:
        return self.row[(self.sched_base + slot) % self.n2]

    def _operand_tags(self, block: int, slot: int) -> Tuple[tuple, tuple]:
        label = self._label(slot)
        if self.kind == "dit":
            span = 1 << (self.m - 1 - self.stage)
            u, w = divmod(label, span)
            x = u * (span << 1) + w
            return (("f", self.stage, x, block),
                    ("f", self.stage, x + span, block))
        if self.kind == "dif":
            span = 1 << (self.m - 1 - self.stage)
            rho, j = divmod(label, span)
            return (("i", self.stage, rho, j, block),
                    ("i", self.stage, rho, j + span, block))
        k = label
        return (("p", k, block), ("p", k + self.n2, block))

    def step(self, cycle: int, in0, in1, aux=None):
        out = self._step_core(cycle, in0, in1, aux)
        if self.pipe:
            self.pipe.append(out)
            out = self.pipe.pop(0) or (None, None)
        return out

    def _step_core(self, cycle, in0, in1, aux):
        due = self.phase + self.executed
        if cycle != due:
            if in0 is not None or in1 is not None:
                raise ScheduleViolation(
                    f"{self.name}: data arrived at cycle {cycle} but the "
                    f"schedule is idle until {due}")
            return (None, None)
        if in0 is None and in1 is None:
            return (None, None)   # pipeline still filling / stream over
        if in0 is None or in1 is None:
            raise ScheduleViolation(
                f"{self.name}: half-valid input pair at cycle {cycle}")
        block, slot = divmod(self.executed, self.n2)
        want = self._operand_tags(block, slot)
        got = {in0[0]: in0[1], in1[0]: in1[1]}
        if set(got) != set(want):
            raise ScheduleViolation(
                f"{self.name}: cycle {cycle} needs operands {want}, "
                f"registers hold {tuple(got)}")
        self.executed += 1
        self.busy_cycles += 1
        if self.first_busy is None:
            self.first_busy = cycle
        label = self._label(slot)
        q, bar = self.p.q, self.p.barrett

        if self.kind == "pointwise":
            if aux is None or aux[0] is None or aux[1] is None:
                raise ScheduleViolation(
                    f"{self.name}: transformed second operand missing at "
                    f"cycle {cycle}")
            k = label
            b0, b1 = aux
            if isinstance(b0, tuple):   # tagged pair from a simulated chain
                if b0[0] != want[1] or b1[0] != want[0]:
                    raise ScheduleViolation(
                        f"{self.name}: second-operand chain out of step at "
                        f"cycle {cycle}: {b0[0]}, {b1[0]} vs {want}")
                b0, b1 = b0[1], b1[1]
            prod_k = mod_mul(got[want[0]], b1, q, bar)
            prod_k2 = mod_mul(got[want[1]], b0, q, bar)
            return ((("i", 0, 0, k + self.n2, block), prod_k2),
                    (("i", 0, 0, k, block), prod_k))

        a, b = got[want[0]], got[want[1]]
        span = 1 << (self.m - 1 - self.stage)
        if self.kind == "dit":
            u, w = divmod(label, span)
            tb = mod_mul(b, self.p.psi_pows[self.stage][u], q, bar)
            s_val = mod_add(a, tb, q)
            d_val = mod_sub(a, tb, q)
            x = u * (span << 1) + w
            if self.stage < self.m - 1:
                return ((("f", self.stage + 1, x + span, block), d_val),
                        (("f", self.stage + 1, x, block), s_val))
            k = bitrev(u, self.m - 1)
            return ((("p", k + self.n2, block), d_val),
                    (("p", k, block), s_val))
        # dif
        rho, j = divmod(label, span)
        s_val = mod_half(mod_add(a, b, q), q)
        d_val = mod_mul(mod_half(mod_sub(a, b, q), q),
                        self.p.inv_psi_pows[self.stage][j], q, bar)
        if self.stage < self.m - 1:
            return ((("i", self.stage + 1, 2 * rho + 1, j, block), d_val),
                    (("i", self.stage + 1, 2 * rho, j, block), s_val))
        i = bitrev(rho, self.m - 1)
        return ((("o", i + self.n2, block), d_val), (("o", i, block), s_val))


class _Dsd:
    """Delay-switch-delay: two r-register sets around a two-by-two switch."""

    def __init__(self, name: str, r: int, pattern: Sequence[Optional[bool]],
                 n2: int):
        self.name = name
        self.r = r
        self.pattern = pattern    # True = pass, False = cross per cycle mod n/2
        self.n2 = n2
        self.ra = [None] * r
        self.rb = [None] * r

    @property
    def capacity(self) -> int:
        return 2 * self.r

    def step(self, cycle: int, in0, in1):
        self.ra.append(in0)
        u0 = self.ra.pop(0)
        sw = self.pattern[cycle % self.n2]
        if sw is None or sw:
            w0, w1 = u0, in1
        else:
            w0, w1 = in1, u0
        self.rb.append(w1)
        return (w0, self.rb.pop(0))


class _Delay:
    """Plain two-lane shift register: the baseline's reorder buffer."""

    def __init__(self, name: str, r: int):
        self.name = name
        self.r = r
        self.ra = [None] * r
        self.rb = [None] * r

    @property
    def capacity(self) -> int:
        return 2 * self.r

    def step(self, cycle: int, in0, in1):
        self.ra.append(in0)
        self.rb.append(in1)
        return (self.ra.pop(0), self.rb.pop(0))


# ---------------------------------------------------------------------------
# Switch-pattern derivation: the streaming feasibility proof, run at build.
# ---------------------------------------------------------------------------

def _derive_switch_pattern(name, r, produced, consumers, n2):
    """Fixed period-n/2 switch pattern routing `produced` to `consumers`.

    produced: value key -> (cycle, lane) at the DSD input (block 0).
    consumers: list of (cycle, (keyA, keyB)) at its output.
    The element offers exactly three delays: 0 (lane1 through the switch),
    r (either register set) and 2r (both); a folding-order pair that needs
    anything else is a schedule violation, i.e. would require extra buffering.
    """
    pattern: List[Optional[bool]] = [None] * n2

    def leg_options(key, tau):
        cp, lane = produced[key]
        opts = []
        if lane == 0 and cp + r == tau:
            opts.append(("out0", True))
        if lane == 1 and cp == tau:
            opts.append(("out0", False))
        if lane == 1 and cp + r == tau:
            opts.append(("out1", True))
        if lane == 0 and cp + 2 * r == tau:
            opts.append(("out1", False))
        if not opts:
            raise ScheduleViolation(
                f"{name}: value {key} produced at cycle {cp} lane {lane} "
                f"cannot reach its consumer at cycle {tau} through "
                f"{r}-register sets (capacity {2 * r} values)")
        return opts

    for tau, (ka, kb) in consumers:
        placed = False
        for oa in leg_options(ka, tau):
            for ob in leg_options(kb, tau):
                if {oa[0], ob[0]} != {"out0", "out1"}:
                    continue
                cells = {}
                for port, sw in (oa, ob):
                    idx = tau % n2 if port == "out0" else (tau - r) % n2
                    if idx in cells and cells[idx] != sw:
                        break
                    cells[idx] = sw
                else:
                    if all(pattern[i] is None or pattern[i] == v
                           for i, v in cells.items()):
                        for i, v in cells.items():
                            pattern[i] = v
                        placed = True
                if placed:
                    break
            if placed:
                break
        if not placed:
            raise ScheduleViolation(
                f"{name}: no switch setting delivers operand pair "
                f"({ka}, {kb}) at cycle {tau}")
    return pattern


def _ntt_emissions(stage, orders, actual_phase, sched_base, m):
    n2 = 1 << (m - 1)
    span = 1 << (m - 1 - stage)
    out = {}
    for k in range(n2):
        label = orders[stage][(sched_base + k) % n2]
        u, w = divmod(label, span)
        x = u * (span << 1) + w
        out[("f", stage + 1, x + span)] = (actual_phase + k, 0)
        out[("f", stage + 1, x)] = (actual_phase + k, 1)
    return out


def _ntt_consumers(stage, orders, actual_phase, sched_base, m):
    n2 = 1 << (m - 1)
    span = 1 << (m - 1 - stage)
    rows = []
    for k in range(n2):
        label = orders[stage][(sched_base + k) % n2]
        u, w = divmod(label, span)
        x = u * (span << 1) + w
        rows.append((actual_phase + k,
                     (("f", stage, x), ("f", stage, x + span))))
    return rows


def _intt_emissions(stage, orders, actual_phase, sched_base, m):
    n2 = 1 << (m - 1)
    span = 1 << (m - 1 - stage)
    out = {}
    for k in range(n2):
        label = orders[stage][(sched_base + k) % n2]
        rho, j = divmod(label, span)
        out[("i", stage + 1, 2 * rho + 1, j)] = (actual_phase + k, 0)
        out[("i", stage + 1, 2 * rho, j)] = (actual_phase + k, 1)
    return out


def _intt_consumers(stage, orders, actual_phase, sched_base, m):
    n2 = 1 << (m - 1)
    span = 1 << (m - 1 - stage)
    rows = []
    for k in range(n2):
        label = orders[stage][(sched_base + k) % n2]
        rho, j = divmod(label, span)
        rows.append((actual_phase + k,
                     (("i", stage, rho, j), ("i", stage, rho, j + span))))
    return rows


# ---------------------------------------------------------------------------
# Model.
# ---------------------------------------------------------------------------

@dataclass
class PipelineModel:
    params: NttParams
    pipe: PipeConfig
    dual_chain: bool
    baseline: bool
    ntt_sched: FoldingSchedule
    intt_sched: FoldingSchedule
    a_chain: list = field(default_factory=list)
    b_chain: list = field(default_factory=list)
    tail: list = field(default_factory=list)       # pointwise PE + inverse part
    baseline_delay: int = 0
    pw_phase: int = 0          # cycle the pointwise PE consumes its first pair
    out_phase: int = 0         # cycle the first output pair appears
    input_perm: dict = field(default_factory=dict)
    output_perm: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def elements(self) -> list:
        return self.a_chain + self.b_chain + self.tail

    @property
    def num_pes(self) -> int:
        return sum(1 for e in self.elements if isinstance(e, _Pe))

    @property
    def num_dsds(self) -> int:
        return sum(1 for e in self.elements if isinstance(e, _Dsd))

    @property
    def t_pipe(self) -> int:
        return self.pipe.t_pipe

    def element_names(self) -> List[str]:
        return [e.name for e in self.elements]

    def reset(self) -> None:
        """Clear all registers and counters for a fresh run."""
        for e in self.elements:
            if isinstance(e, _Pe):
                e.pipe = [None] * len(e.pipe)
                e.executed = 0
                e.busy_cycles = 0
                e.first_busy = None
            else:
                e.ra = [None] * e.r
                e.rb = [None] * e.r


def _phases(m: int, regs: Sequence[int]):
    """(actual phase, unretimed schedule base) per PE in chain order."""
    actual, sched = [], []
    base = 0
    acc = 0
    for s in range(m):
        actual.append(base + acc)
        sched.append(base)
        acc += regs[s]
        if s < m - 1:
            base += 1 << (m - s - 2)
    actual.append(base + acc)      # pointwise
    sched.append(base)
    acc += regs[m]
    for s in range(m):
        actual.append(base + acc)
        sched.append(base)
        acc += regs[m + 1 + s]
        if s < m - 1:
            base += 1 << s
    return actual, sched


def build_cascade(p: NttParams, pipe: PipeConfig = PipeConfig(),
                  dual_chain: bool = False,
                  baseline: bool = False) -> PipelineModel:
    """Assemble the element pipeline and derive every DSD switch pattern.

    baseline=True inserts the n/4-deep reorder buffer that a design reusing
    the forward folding set for the inverse transform would need between the
    product and the inverse part, adding exactly n/4 cycles of latency.
    """
    m, n2 = p.m, p.n // 2
    num_pes = 2 * m + 1
    regs = pipe.per_pe if pipe.per_pe else (0,) * num_pes
    if len(regs) != num_pes:
        raise ValueError(f"pipe config must cover {num_pes} PEs, got "
                         f"{len(regs)}")
    pipe = PipeConfig(per_pe=tuple(regs))
    fs = ntt_schedule(m)
    gs = intt_schedule(m)
    actual, sched = _phases(m, regs)
    delay = n2 // 2 if baseline else 0
    for i in range(m + 1, 2 * m + 1):
        actual[i] += delay

    model = PipelineModel(params=p, pipe=pipe, dual_chain=dual_chain,
                          baseline=baseline, ntt_sched=fs, intt_sched=gs,
                          baseline_delay=delay)

    def forward_chain(prefix: str) -> list:
        chain = []
        for s in range(m):
            chain.append(_Pe(f"{prefix}ntt_pe{s}", "dit", s, p, fs.orders[s],
                             actual[s], sched[s], regs[s], m))
            if s < m - 1:
                produced = _ntt_emissions(s, fs.orders, actual[s] + regs[s],
                                          sched[s], m)
                consumers = _ntt_consumers(s + 1, fs.orders, actual[s + 1],
                                           sched[s + 1], m)
                patt = _derive_switch_pattern(f"{prefix}dsd_ntt{s}",
                                              fs.dsd_sizes[s], produced,
                                              consumers, n2)
                chain.append(_Dsd(f"{prefix}dsd_ntt{s}", fs.dsd_sizes[s],
                                  patt, n2))
        return chain

    model.a_chain = forward_chain("")
    if dual_chain:
        model.b_chain = forward_chain("b_")

    pw_row = tuple(bitrev(fs.orders[m - 1][l], m - 1) for l in range(n2))
    model.tail.append(_Pe("pw", "pointwise", 0, p, pw_row,
                          actual[m], sched[m], regs[m], m))
    if baseline:
        model.tail.append(_Delay("reorder", delay))

    for s in range(m):
        idx = m + 1 + s
        model.tail.append(_Pe(f"intt_pe{s}", "dif", s, p, gs.orders[s],
                              actual[idx], sched[idx], regs[idx], m))
        if s < m - 1:
            produced = _intt_emissions(s, gs.orders, actual[idx] + regs[idx],
                                       sched[idx], m)
            consumers = _intt_consumers(s + 1, gs.orders, actual[idx + 1],
                                        sched[idx + 1], m)
            patt = _derive_switch_pattern(f"dsd_intt{s}", gs.dsd_sizes[s],
                                          produced, consumers, n2)
            model.tail.append(_Dsd(f"dsd_intt{s}", gs.dsd_sizes[s], patt, n2))

    model.pw_phase = actual[m]
    model.out_phase = actual[2 * m] + regs[2 * m]
    model.input_perm = input_permutation(fs)
    model.output_perm = output_permutation(gs)
    return model


# ---------------------------------------------------------------------------
# Stream permutations, derived from the schedules (never transcribed).
# ---------------------------------------------------------------------------

def input_permutation(schedule: FoldingSchedule) -> Dict[int, Tuple[int, int]]:
    """coefficient index -> (cycle offset, lane) for the forward input stream.

    The first-stage folding order consumes butterfly w at its slot; that
    butterfly reads a_w (lane 1, the sum leg) and a_{w + n/2} (lane 0).
    """
    if schedule.kind != "ntt":
        raise ValueError("input permutation is defined by the forward schedule")
    n2 = 1 << (schedule.m - 1)
    perm = {}
    for l in range(n2):
        w = schedule.orders[0][l]
        perm[w] = (l, 1)
        perm[w + n2] = (l, 0)
    return perm


def output_permutation(schedule: FoldingSchedule) -> Dict[int, Tuple[int, int]]:
    """coefficient index -> (cycle offset, lane) of the inverse output stream.

    Offsets are relative to the first output cycle of a block; the last
    inverse stage's node rho emits p_{bitrev(rho)} on lane 1 and
    p_{bitrev(rho) + n/2} on lane 0.
    """
    if schedule.kind != "intt":
        raise ValueError("output permutation is defined by the inverse schedule")
    m = schedule.m
    n2 = 1 << (m - 1)
    base = 2 * n2 - 2  # unretimed phase of the last inverse PE
    perm = {}
    for l in range(n2):
        rho = schedule.orders[m - 1][(base + l) % n2]
        i = bitrev(rho, m - 1)
        perm[i] = (l, 1)
        perm[i + n2] = (l, 0)
    return perm


def make_input_stream(model: PipelineModel, blocks: Sequence[Sequence[int]]
                      ) -> List[StreamSample]:
    """Pack natural-order coefficient blocks into the demanded stream order."""
    n, n2 = model.n, model.n // 2
    samples = []
    for b, coeffs in enumerate(blocks):
        if len(coeffs) != n:
            raise ValueError(f"block {b} has {len(coeffs)} coefficients")
        lanes = [[None] * n2, [None] * n2]
        for j, c in enumerate(coeffs):
            off, lane = model.input_perm[j]
            lanes[lane][off] = c
        for l in range(n2):
            samples.append(StreamSample(cycle=b * n2 + l,
                                        lane0=lanes[0][l], lane1=lanes[1][l]))
    return samples


def make_b_ntt_stream(model: PipelineModel, blocks: Sequence[Sequence[int]]
                      ) -> List[StreamSample]:
    """Transform each b block (reference path) and emit it in product order.

    The stream is aligned so sample index b*n/2 + l is consumed by the
    pointwise PE at cycle pw_phase + b*n/2 + l; lane 1 carries B_k, lane 0
    carries B_{k + n/2}, with k following the forward chain's output order.
    """
    p = model.params
    m, n2 = model.m, model.n // 2
    fs = model.ntt_sched
    sched_base = (1 << (m - 1)) - 1
    samples = []
    for b, coeffs in enumerate(blocks):
        B = ntt_forward(ResiduePoly(list(coeffs), "time"), p).coeffs
        for l in range(n2):
            k = bitrev(fs.orders[m - 1][(sched_base + l) % n2], m - 1)
            samples.append(StreamSample(cycle=b * n2 + l,
                                        lane0=B[k + n2], lane1=B[k]))
    return samples


# ---------------------------------------------------------------------------
# Simulation.
# ---------------------------------------------------------------------------

def _stream_value(stream, idx):
    if 0 <= idx < len(stream):
        s = stream[idx]
        return s.lane0, s.lane1
    return None, None


def simulate(model: PipelineModel, a_stream: Sequence[StreamSample],
             b_ntt_stream: Sequence[StreamSample],
             collect_trace: bool = False):
    """Clock the cascade until it drains; returns (out_stream, CycleReport).

    a_stream holds the first operand in forward input order.  b_ntt_stream
    holds the second operand: already-transformed pairs in product order
    (reference-fed mode), or time-domain forward input order (dual-chain
    models).  Streams must be gapless within and between blocks.
    """
    model.reset()
    n, n2, m = model.n, model.n // 2, model.m
    if len(a_stream) % n2:
        raise ValueError("stream length must be a whole number of blocks")
    blocks = len(a_stream) // n2
    span = len(a_stream)
    total_cycles = model.out_phase + span + 2  # drain margin
    trace = [] if collect_trace else None

    out_samples: List[StreamSample] = []
    first_in = next((s.cycle for s in a_stream if s.valid), 0)
    first_out = None
    last_out = None

    for g in range(total_cycles):
        v0, v1 = _stream_value(a_stream, g)
        if v0 is None and v1 is None:
            pair = (None, None)
        else:
            blk, slot = divmod(g, n2)
            w = model.ntt_sched.orders[0][slot]
            pair = ((("f", 0, w + n2, blk), v0), (("f", 0, w, blk), v1))
        for el in model.a_chain:
            pair = el.step(g, pair[0], pair[1])
            if trace is not None:
                trace.append((g, el.name,
                              None if pair[0] is None else pair[0][1],
                              None if pair[1] is None else pair[1][1]))

        if model.dual_chain:
            bv0, bv1 = _stream_value(b_ntt_stream, g)
            if bv0 is None and bv1 is None:
                bpair = (None, None)
            else:
                blk, slot = divmod(g, n2)
                w = model.ntt_sched.orders[0][slot]
                bpair = ((("f", 0, w + n2, blk), bv0), (("f", 0, w, blk), bv1))
            for el in model.b_chain:
                bpair = el.step(g, bpair[0], bpair[1])
                if trace is not None:
                    trace.append((g, el.name,
                                  None if bpair[0] is None else bpair[0][1],
                                  None if bpair[1] is None else bpair[1][1]))
            aux = bpair
        else:
            aux = _stream_value(b_ntt_stream, g - model.pw_phase)

        for el in model.tail:
            if isinstance(el, _Pe) and el.kind == "pointwise":
                pair = el.step(g, pair[0], pair[1], aux)
            else:
                pair = el.step(g, pair[0], pair[1])
            if trace is not None:
                trace.append((g, el.name,
                              None if pair[0] is None else pair[0][1],
                              None if pair[1] is None else pair[1][1]))

        o0 = None if pair[0] is None else pair[0][1]
        o1 = None if pair[1] is None else pair[1][1]
        out_samples.append(StreamSample(cycle=g, lane0=o0, lane1=o1))
        if o0 is not None and o1 is not None:
            last_out = g
            if first_out is None:
                first_out = g

    if first_out is None:
        raise ScheduleViolation("no output produced; input stream too short?")
    valid_blocks = sum(1 for s in a_stream if s.valid) // n2
    latency = first_out - first_in
    bpp = (last_out - first_out + 1) // valid_blocks if valid_blocks else n2
    util = utilization_report(model, window=span)
    report = CycleReport(n=n, t_pipe=model.t_pipe,
                         latency_cycles=latency, bpp_cycles=bpp,
                         blocks=valid_blocks, utilization=util)
    if collect_trace:
        return out_samples, report, trace
    return out_samples, report


def simulate_shuffled_baseline(model: PipelineModel,
                               a_stream: Sequence[StreamSample],
                               b_ntt_stream: Sequence[StreamSample],
                               collect_trace: bool = False):
    """Same functional pipeline with the conventional reorder buffer.

    Models the design whose inverse transform reuses the forward folding set:
    the product stream then has to pass a DSD of n/4 registers per set, which
    costs exactly n/4 cycles of extra latency and nothing else.
    """
    base = build_cascade(model.params, model.pipe,
                         dual_chain=model.dual_chain, baseline=True)
    return simulate(base, a_stream, b_ntt_stream, collect_trace)


def utilization_report(model: PipelineModel,
                       window: Optional[int] = None,
                       trace=None) -> Dict[str, float]:
    """Per-PE busy fraction over the post-warm-up window.

    Each PE's window opens at its first busy cycle and spans the input
    streaming interval (`window` cycles; taken from the trace's input span
    when a trace is given).  Back-to-back blocks therefore score exactly 1.0;
    trailing idle input lowers the figure honestly.
    """
    if window is None:
        if trace:
            window = max(t[0] for t in trace) + 1 - min(t[0] for t in trace)
        else:
            raise ValueError("need an input window or a trace")
    util = {}
    for el in model.elements:
        if isinstance(el, _Pe):
            util[el.name] = el.busy_cycles / window if window else 0.0
    return util


def gather_output(model: PipelineModel, out_stream: Sequence[StreamSample],
                  blocks: int) -> List[List[int]]:
    """Invert the output permutation: (cycle, lane) stream -> coefficients."""
    n, n2 = model.n, model.n // 2
    first = next(i for i, s in enumerate(out_stream) if s.valid)
    polys = []
    for b in range(blocks):
        coeffs = [None] * n
        for i in range(n):
            off, lane = model.output_perm[i]
            s = out_stream[first + b * n2 + off]
            coeffs[i] = s.lane0 if lane == 0 else s.lane1
        if any(c is None for c in coeffs):
            raise ScheduleViolation(f"block {b}: output stream has holes")
        polys.append(coeffs)
    return polys


def trace_to_csv(trace) -> str:
    """Render a collected trace as CSV (cycle, element, lane0, lane1, valid)."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["cycle", "element", "lane0", "lane1", "valid"])
    for cycle, name, l0, l1 in trace:
        w.writerow([cycle, name, "" if l0 is None else l0,
                    "" if l1 is None else l1,
                    int(l0 is not None and l1 is not None)])
    return buf.getvalue()
