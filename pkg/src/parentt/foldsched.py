"""Folding schedules for the 2-parallel streaming transform pipeline.

A length-n transform (m = log2 n stages) is folded onto m processing
elements, each executing its stage's n/2 butterflies over n/2 consecutive
cycles.  The folding order of a node is the cycle it executes, taken modulo
n/2 on the single global clock that drives the whole cascade (cycle 0 = the
cycle the first input pair enters the forward transform).

Closed forms, with <x> denoting bit-reversal over m-1 bits:

    forward  PE_s, order l:  node (2^(m-s-1) + l) mod n/2
    inverse  PE_s, order l:  node <(2 - 2^s + l) mod n/2>

Node indices refer to the dataflow graphs in natural positional order (see
pipesim for the exact node <-> butterfly coordinates).  The forward and
inverse schedules differ precisely so that the last forward stage's output
order equals the first inverse stage's consumption order, which removes the
reorder buffer between them: node i of the inverse first stage runs at order
<i> - 1 while node i of the forward last stage runs at order i - 1.

Register sizing for the delay-switch-delay (DSD) element after stage s:
2^(m-s-2) registers per set in the forward transform, 2^s in the inverse.
"""

import json
from dataclasses import dataclass
from typing import Optional


def bitrev(x: int, bits: int) -> int:
    """Reverse the low `bits` bits of x (0 <= x < 2^bits)."""
    if not 0 <= x < (1 << bits):
        raise ValueError(f"{x} out of range for {bits} bits")
    r = 0
    for _ in range(bits):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@dataclass(frozen=True)
class FoldingSchedule:
    """Per-stage folding orders plus DSD register-set sizes."""

    kind: str               # "ntt" | "intt"
    m: int
    orders: tuple           # orders[s][l] = node executed by PE_s at order l
    dsd_sizes: tuple        # dsd_sizes[s] = registers per set after PE_s

    def __post_init__(self):
        n2 = 1 << (self.m - 1)
        if self.kind not in ("ntt", "intt"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if len(self.orders) != self.m or len(self.dsd_sizes) != self.m - 1:
            raise ValueError("stage count mismatch")
        for s, row in enumerate(self.orders):
            if sorted(row) != list(range(n2)):
                raise ValueError(f"stage {s} orders are not a permutation")

    @property
    def n(self) -> int:
        return 1 << self.m

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "orders": [list(row) for row in self.orders],
            "dsd_sizes": list(self.dsd_sizes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def _check_m(m: int) -> None:
    if not 2 <= m <= 16:
        raise ValueError("m must be between 2 and 16")


def ntt_schedule(m: int) -> FoldingSchedule:
    """Forward-transform folding orders and DSD sizes."""
    _check_m(m)
    n2 = 1 << (m - 1)
    orders = tuple(
        tuple((2 ** (m - s - 1) + l) % n2 for l in range(n2))
        for s in range(m))
    sizes = tuple(2 ** (m - s - 2) for s in range(m - 1))
    return FoldingSchedule(kind="ntt", m=m, orders=orders, dsd_sizes=sizes)


def intt_schedule(m: int) -> FoldingSchedule:
    """Inverse-transform folding orders and DSD sizes.

    The general-stage expression <(2 - 2^s + l) mod n/2> subsumes the
    first-stage (<l+1>) and last-stage (<l+2>) rows once the modulus is taken
    with floor semantics for the negative 2 - 2^s offsets.
    """
    _check_m(m)
    n2 = 1 << (m - 1)
    orders = tuple(
        tuple(bitrev((2 - 2 ** s + l) % n2, m - 1) for l in range(n2))
        for s in range(m))
    sizes = tuple(2 ** s for s in range(m - 1))
    return FoldingSchedule(kind="intt", m=m, orders=orders, dsd_sizes=sizes)


def verify_cascade(m: int, ntt: Optional[FoldingSchedule] = None,
                   intt: Optional[FoldingSchedule] = None) -> bool:
    """Check the zero-buffer relation between the two schedules.

    The inverse first stage must consume exactly in the forward last stage's
    production order: node i of the inverse transform runs at the order where
    the forward stage runs node with value bitrev(i), i.e.

        intt.orders[0][l] == bitrev(ntt.orders[m-1][l])  for all l.

    Passing a mismatched pair (e.g. the forward schedule for both) returns
    False: that is the configuration that would need an n/4 reorder buffer.
    """
    _check_m(m)
    if ntt is None:
        ntt = ntt_schedule(m)
    if intt is None:
        intt = intt_schedule(m)
    last = ntt.orders[m - 1]
    first = intt.orders[0]
    return all(first[l] == bitrev(last[l], m - 1) for l in range(1 << (m - 1)))
