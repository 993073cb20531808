"""Greedy packing of subspaces into complete sets of M independent vectors.

Subspaces are collected in list order. When the next subspace would
overflow the current set, it is split into the part inside the set's span
(the intersection) and the remainder orthogonal to that part; the remainder
completes the set and the intersection opens the next one. The number of
complete sets, L_Sigma, is what the entropy ledger may claim: each complete
set of projections determines the whole signal vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import subspace as sp
from .subspace import Subspace

__all__ = ["MultilookResult", "build_full_sets", "l_sigma_generic", "example_subspaces", "EXAMPLE_SUBSPACES"]


@dataclass
class MultilookResult:
    l_sigma: int
    sets: list[list[tuple[int, Subspace]]] = field(default_factory=list)
    discarded: list[tuple[int, Subspace]] = field(default_factory=list)

    def to_json(self) -> dict:
        def part(p):
            return {"source": p[0], "dim": p[1].dim, "subspace": p[1].to_json()}

        return {
            "l_sigma": self.l_sigma,
            "sets": [[part(p) for p in s] for s in self.sets],
            "discarded": [part(p) for p in self.discarded],
        }


def build_full_sets(subspaces: Sequence[Subspace], M: int) -> MultilookResult:
    """Pack ``subspaces`` (in order) into complete sets of dimension ``M``.

    Returns the number of complete sets, the sets as lists of
    ``(source index, part)`` and every part left over at the end.
    """
    for s in subspaces:
        if s.ambient_dim != M:
            raise ValueError(f"subspace in R^{s.ambient_dim}, expected R^{M}")

    queue: list[tuple[int, Subspace]] = [(i, s) for i, s in enumerate(subspaces) if s.dim > 0]
    sets: list[list[tuple[int, Subspace]]] = []
    current: list[tuple[int, Subspace]] = []
    span = sp.zero_space(M, subspaces[0].backend if subspaces else "rational")
    # parts that add nothing to the current span wait for the next set
    carry: list[tuple[int, Subspace]] = []

    while queue:
        idx, s = queue.pop(0)
        room = M - span.dim
        if s.dim <= room:
            new_span = sp.union_span(span, s)
            if new_span.dim == span.dim:
                carry.append((idx, s))
                continue
            if new_span.dim < span.dim + s.dim:
                # non-generic overlap: keep only the fresh part here
                inter = sp.intersect(s, span)
                current.append((idx, sp.subtract(s, inter)))
                carry.append((idx, inter))
            else:
                current.append((idx, s))
            span = new_span
        else:
            inter = sp.intersect(s, span)
            rem = sp.subtract(s, inter)
            if rem.dim == 0:
                carry.append((idx, s))
                continue
            current.append((idx, rem))
            span = sp.union_span(span, rem)
            if inter.dim > 0:
                queue.insert(0, (idx, inter))
        if span.dim == M:
            sets.append(current)
            current = []
            span = sp.zero_space(M, span.backend)
            queue[0:0] = carry
            carry = []

    discarded = current + carry
    return MultilookResult(l_sigma=len(sets), sets=sets, discarded=discarded)


def l_sigma_generic(dims: Sequence[int], M: int) -> int:
    """floor(sum(dims) / M), the set count for generic subspaces."""
    for d in dims:
        if d < 0 or d > M:
            raise ValueError(f"dimension {d} outside [0, {M}]")
    return sum(dims) // M


# six subspaces of R^3 with dimensions (1, 2, 1, 1, 3, 2); they pack into three sets
EXAMPLE_AMBIENT = 3
EXAMPLE_SUBSPACES = [
    [[1, 1, 1]],
    [[0, 2, 3], [0, 1, -1]],
    [[1, -1, 0]],
    [[1, 0, 1]],
    [[1, -1, 3], [1, 0, 0], [0, 1, 0]],
    [[0, 0, 1], [1, 2, -4]],
]


def example_subspaces() -> list[Subspace]:
    """The six-subspace example as exact subspaces (vectors given as rows)."""
    return [sp.from_columns(EXAMPLE_AMBIENT, vecs) for vecs in EXAMPLE_SUBSPACES]
