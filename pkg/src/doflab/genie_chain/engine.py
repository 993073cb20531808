"""Exposed subspaces, genie acceptability and the step runner.

At receiver j the unknown interference variables are the stacked transmit
vectors of the interferers (ascending index), ``len(txs) * M_T`` of them.
The receiver's own M_R observation rows and any genie rows are linear
equations in those variables. Two linear-algebra questions drive a chain:

* exposed subspace: which combinations of the target's variables survive
  once every other interferer is zero-forced. Take the left null space Y of
  the non-target columns; the exposed subspace is the row space of Y times
  the target columns.
* acceptability: can the receiver resolve all interference from its
  observations plus the genie, i.e. does the stack have full column rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .. import exact_linalg as xl
from .. import subspace as sp
from .._rng import make_rng
from ..network import Network
from ..subspace import Subspace
from .ledger import ChainError, ChainLedger, Inequality, RegistryEntry

__all__ = [
    "GenieRow",
    "GenieSpec",
    "GenieTooSmall",
    "ChainRunner",
    "interference_matrix",
    "resolve_exposed",
    "exposed_subspace",
    "genie_acceptable",
    "generic_exposed_dim",
]


class GenieTooSmall(ChainError):
    """Fewer equations than interference variables; nothing can be resolved."""


@dataclass(frozen=True)
class GenieRow:
    """One genie equation over a receiver's stacked interference variables."""

    coefficients: np.ndarray
    provenance: str = "generic"
    tx: int | None = None


@dataclass
class GenieSpec:
    """What a genie hands to a receiver in one chain step.

    generic:  (tx, m) pairs, m fresh generic combinations of tx's symbols
    priors:   ids of subspaces created by earlier steps
    full:     transmitters whose whole vector is provided (charged 1R each)
    messages: message labels provided outright (charged 1R each)
    reveals:  transmitters the receiver can rebuild from decoded plus
              provided messages, removed from the unknowns at no charge
    """

    generic: list[tuple[int, int]] = field(default_factory=list)
    priors: list[str] = field(default_factory=list)
    full: list[int] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)
    reveals: list[int] = field(default_factory=list)

    @classmethod
    def of(cls, spec) -> "GenieSpec":
        if spec is None:
            return cls()
        if isinstance(spec, GenieSpec):
            return spec
        return cls(
            generic=[tuple(x) for x in spec.get("generic", [])],
            priors=list(spec.get("priors", [])),
            full=list(spec.get("full", [])),
            messages=list(spec.get("messages", [])),
            reveals=list(spec.get("reveals", [])),
        )

    def to_json(self) -> dict:
        return {
            "generic": [list(x) for x in self.generic],
            "priors": list(self.priors),
            "full": list(self.full),
            "messages": list(self.messages),
            "reveals": list(self.reveals),
        }


# ---------------------------------------------------------------- linear algebra


def interference_matrix(net: Network, j: int, txs: Sequence[int] | None = None) -> np.ndarray:
    """[H^[j u] for u in txs], the receiver's equations in the unknowns."""
    txs = net.unknown_txs(j) if txs is None else list(txs)
    if not txs:
        return xl.zeros(net.M_R, 0, net.backend)
    return np.hstack([np.asarray(net.H(j, u)) for u in txs])


def _exposed(stack: np.ndarray, txs: Sequence[int], target: int, M_T: int) -> Subspace:
    k = list(txs).index(target)
    tcols = list(range(k * M_T, (k + 1) * M_T))
    ocols = [c for c in range(stack.shape[1]) if c not in set(tcols)]
    backend = xl.backend_of(stack)
    a_t = stack[:, tcols]
    if ocols:
        y = xl.null_space(stack[:, ocols].T).T
        proj = y @ a_t
    else:
        proj = a_t
    return sp.from_matrix(M_T, proj.T, backend)


def _split_rows(genie: Iterable[GenieRow], txs, target, M_T) -> list[np.ndarray]:
    """Genie rows that do not touch the target's variables."""
    k = list(txs).index(target)
    keep = []
    for g in genie:
        c = np.asarray(g.coefficients)
        block = c[k * M_T : (k + 1) * M_T]
        if all(x == 0 for x in block):
            keep.append(c)
    return keep


def _genie_matrix(net: Network, j: int, genie: Sequence[GenieRow]) -> np.ndarray:
    ncols = len(net.unknown_txs(j)) * net.M_T
    rows = [np.asarray(g.coefficients) for g in genie]
    for r in rows:
        if r.shape != (ncols,):
            raise ValueError(f"genie row of length {r.shape[0]} at rx {j}, expected {ncols}")
    if not rows:
        return xl.zeros(0, ncols, net.backend)
    m = np.vstack(rows)
    return xl.as_backend(m, net.backend) if xl.backend_of(m) != net.backend and net.backend == xl.FLOAT else m


def resolve_exposed(net: Network, j: int, i: int, genie: Sequence[GenieRow] = ()) -> Subspace:
    """Subspace of tx i's symbols left at rx j after zero-forcing the others.

    Genie rows touching tx i's variables are left out of the elimination.
    """
    txs = net.unknown_txs(j)
    if i not in txs:
        raise KeyError(f"tx {i} is not an interferer at rx {j}")
    a = interference_matrix(net, j, txs)
    kept = _split_rows(genie, txs, i, net.M_T)
    stack = a if not kept else _vstack([a, np.vstack(kept)])
    return _exposed(stack, txs, i, net.M_T)


def exposed_subspace(net: Network, j: int, i: int) -> Subspace:
    return resolve_exposed(net, j, i, ())


def genie_acceptable(net: Network, j: int, genie: Sequence[GenieRow]) -> bool:
    """True iff channel rows plus genie rows resolve every interferer."""
    a = interference_matrix(net, j)
    g = _genie_matrix(net, j, genie)
    if a.shape[0] + g.shape[0] < a.shape[1]:
        raise GenieTooSmall(
            f"genie too small at rx {j}: {a.shape[0]} + {g.shape[0]} equations for {a.shape[1]} unknowns"
        )
    return xl.rank(_vstack([a, g])) == a.shape[1]


def generic_exposed_dim(M_T: int, M_R: int, n_unknown: int, g_nontarget: int) -> int:
    """min(M_T, max(0, M_R + g' - (n_unknown - 1) M_T))."""
    return min(M_T, max(0, M_R + g_nontarget - (n_unknown - 1) * M_T))


def _vstack(mats: Sequence[np.ndarray]) -> np.ndarray:
    backends = {xl.backend_of(m) for m in mats if m.size}
    if len(backends) > 1:
        mats = [xl.to_float(m) for m in mats]
    return np.vstack(mats)


# ---------------------------------------------------------------- step runner


class _Halt(Exception):
    pass


def _unit(n: int, k: int, backend: str) -> np.ndarray:
    row = xl.zeros(1, n, backend)[0]
    row[k] = Fraction(1) if backend == xl.RATIONAL else 1.0
    return row


def _round_rows(a: np.ndarray) -> np.ndarray:
    scale = 1 << 16
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = Fraction(int(round(float(x) * scale)), scale)
    return out


@dataclass
class _Item:
    tx: int
    rows: np.ndarray  # k x M_T, in the transmitter's own coordinates
    kind: str  # generic | prior | full
    label: str
    indices: list[int] | None = None


class ChainRunner:
    """Executes chain steps on one network and records them in a ledger.

    ``genie_mode`` is "random" (seeded generic genie rows) or "coordinate"
    (unit rows picked greedily by index so that each raises the rank of the
    receiver's equation stack, which makes every genie an index set).
    """

    def __init__(self, net: Network, *, genie_mode: str = "random", seed: int = 0, name: str = ""):
        if genie_mode not in ("random", "coordinate"):
            raise ValueError(f"unknown genie mode {genie_mode!r}")
        self.net = net
        self.genie_mode = genie_mode
        self.seed = seed
        self.ledger = ChainLedger(ambient=net.M_T, per_tx_rate=net.per_tx_rate, name=name)
        self._step = 0
        self.halted = False

    # -- helpers

    @property
    def lhs(self) -> int:
        return self.net.message_count

    def subspace(self, tid: str) -> Subspace:
        try:
            return self.ledger.registry[tid].subspace
        except KeyError:
            raise ChainError(f"unregistered subspace id {tid!r}") from None

    def _as_net_backend(self, rows: np.ndarray) -> np.ndarray:
        if self.net.backend == xl.FLOAT:
            return xl.to_float(rows)
        if xl.backend_of(rows) == xl.FLOAT:
            raise ChainError("float genie rows on an exact network")
        return rows

    def _embed(self, item: _Item, txs: list[int]) -> np.ndarray:
        M_T, backend = self.net.M_T, self.net.backend
        out = xl.zeros(item.rows.shape[0], len(txs) * M_T, backend)
        k = txs.index(item.tx)
        out[:, k * M_T : (k + 1) * M_T] = item.rows
        return out

    def _build(self, rx: int, genie: GenieSpec):
        net, M_T, backend = self.net, self.net.M_T, self.net.backend
        txs = [u for u in net.unknown_txs(rx) if u not in set(genie.reveals)]
        for u in genie.reveals:
            if u not in net.unknown_txs(rx):
                raise ChainError(f"rx {rx} has no unknown tx {u} to reveal")
        a = interference_matrix(net, rx, txs)
        items: list[_Item] = []
        for u in genie.full:
            self._need(u, txs, rx)
            items.append(_Item(u, xl.identity(M_T, backend), "full", f"X{u}"))
        for tid in genie.priors:
            e = self.ledger.registry.get(tid)
            if e is None or e.subspace is None:
                raise ChainError(f"unregistered subspace id {tid!r}")
            self._need(e.tx, txs, rx)
            items.append(_Item(e.tx, self._as_net_backend(e.subspace.rows()), "prior", tid))
        for n_item, (u, m) in enumerate(genie.generic):
            self._need(u, txs, rx)
            stack = _vstack([a] + [self._embed(it, txs) for it in items])
            rows, idx = self._generic_rows(u, m, txs, stack, n_item)
            items.append(_Item(u, rows, "generic", f"X{u}_({m})@{self._step}", idx))
        g = (
            _vstack([self._embed(it, txs) for it in items])
            if items
            else xl.zeros(0, len(txs) * M_T, backend)
        )
        if a.shape[0] + g.shape[0] < a.shape[1]:
            raise GenieTooSmall(
                f"step {self._step}: genie too small at rx {rx}: "
                f"{a.shape[0]} + {g.shape[0]} equations for {a.shape[1]} unknowns"
            )
        stack_rank = xl.rank(_vstack([a, g]))
        return txs, a, items, stack_rank

    def _need(self, u, txs, rx):
        if u not in txs:
            raise ChainError(f"step {self._step}: tx {u} is not an unknown interferer at rx {rx}")

    def _generic_rows(self, u, m, txs, stack, n_item):
        M_T, backend = self.net.M_T, self.net.backend
        if m > M_T or m < 0:
            raise ChainError(f"cannot draw {m} generic combinations of a {M_T}-vector")
        if self.genie_mode == "random":
            g = make_rng(self.seed, "genie", self._step, n_item, u).standard_normal((m, M_T))
            rows = _round_rows(g) if backend == xl.RATIONAL else g
            return rows, None
        k = txs.index(u)
        chosen: list[int] = []
        # e_c raises the stack rank iff some null vector has a nonzero entry c;
        # after taking c, restrict the null space to vectors with entry c = 0
        z = xl.null_space(stack) if stack.shape[0] else xl.identity(stack.shape[1], backend)
        exact = backend == xl.RATIONAL
        for idx in range(M_T):
            if len(chosen) == m or z.shape[1] == 0:
                break
            c = k * M_T + idx
            row = z[c]
            if exact:
                nz = [p for p, x in enumerate(row) if x != 0]
            else:
                nz = [p for p, x in enumerate(row) if abs(x) > 1e-9 * max(1.0, float(np.abs(z).max()))]
            if not nz:
                continue
            p = nz[0] if exact else max(nz, key=lambda q: abs(row[q]))
            z = z - np.outer(z[:, p], row) / row[p]
            z = np.delete(z, p, axis=1)
            chosen.append(idx)
        for idx in range(M_T):
            if len(chosen) == m:
                break
            if idx not in chosen:
                chosen.append(idx)
        chosen.sort()
        rows = xl.zeros(m, M_T, backend)
        for n, idx in enumerate(chosen):
            rows[n, idx] = Fraction(1) if backend == xl.RATIONAL else 1.0
        return rows, chosen

    def _positive_generics(self, items, skip_tx=None) -> list[tuple[str, int]]:
        terms = []
        for it in items:
            if it.kind == "generic" and it.tx != skip_tx and it.rows.shape[0] > 0:
                self.ledger.register(
                    it.label,
                    RegistryEntry(it.rows.shape[0], "generic", it.tx, sp.from_matrix(self.net.M_T, it.rows.T)),
                )
                terms.append((it.label, +1))
        return terms

    def _exposed_for(self, a, items, txs, target) -> Subspace:
        kept = [self._embed(it, txs) for it in items if it.tx != target]
        stack = _vstack([a] + kept) if kept else a
        return _exposed(stack, txs, target, self.net.M_T)

    def _combined_rank(self, exposed: Subspace, items, target) -> int:
        rows = [exposed.rows()] + [it.rows for it in items if it.tx == target]
        rows = [r for r in rows if r.shape[0]]
        if not rows:
            return 0
        return xl.rank(_vstack([self._as_net_backend(r) for r in rows]))

    def _record(self, rec: dict, items) -> dict:
        rec["genie"] = [
            {"tx": it.tx, "kind": it.kind, "label": it.label, "dim": int(it.rows.shape[0])}
            | ({"indices": it.indices} if it.indices is not None else {})
            for it in items
        ]
        self.ledger.trace.append(rec)
        return rec

    def _pivots(self, s: Subspace) -> list[int] | None:
        if s.backend != xl.RATIONAL or s.dim == 0:
            return [] if s.dim == 0 else None
        _, piv = xl.rref(s.rows())
        return piv

    def _degrade(self, rx: int, reason: str) -> None:
        net = self.net
        self.ledger.degraded = True
        cap = Inequality(self.lhs, Fraction(net.K * min(net.M_T, net.M_R)), Fraction(0), [], step=self._step)
        self.ledger.add(cap)
        self.ledger.trace.append({"step": self._step, "action": "cap", "rx": rx, "reason": reason})
        self.halted = True
        raise _Halt(reason)

    def _begin(self):
        if self.halted:
            raise _Halt("chain already halted")
        self._step += 1

    # -- actions

    def expose(self, rx: int, target: int, genie=None, produces: str | None = None, target_rate: int = 1) -> Subspace:
        """Resolve the interference, keep the exposed part of ``target`` as a new term."""
        self._begin()
        genie = GenieSpec.of(genie)
        txs, a, items, stack_rank = self._build(rx, genie)
        self._need(target, txs, rx)
        e = self._exposed_for(a, items, txs, target)
        ok = stack_rank == a.shape[1]
        comb = self._combined_rank(e, items, target)
        produces = produces or f"E{self._step}"
        self._record(
            {
                "step": self._step,
                "action": "expose",
                "rx": rx,
                "target": target,
                "unknown_txs": txs,
                "equations": int(a.shape[0] + sum(it.rows.shape[0] for it in items)),
                "unknowns": int(a.shape[1]),
                "stack_rank": stack_rank,
                "acceptable": ok,
                "exposed_dim": e.dim,
                "exposed_pivots": self._pivots(e),
                "combined_rank": comb,
                "produces": produces,
            },
            items,
        )
        if not ok:
            self._degrade(rx, f"genie not acceptable at rx {rx}")
        self.ledger.register(produces, RegistryEntry(e.dim, f"exposed(rx={rx},tx={target})", target, e))
        terms = [(tid, +1) for tid in genie.priors] + self._positive_generics(items, skip_tx=target)
        terms.append((produces, -1))
        rate = len(genie.full) + len(genie.messages) + target_rate
        self.ledger.add(Inequality(self.lhs, Fraction(self.net.M_R), Fraction(rate), terms, step=self._step))
        return e

    def intersect(self, rx: int, target: int, genie=None, against: str = "", produces: str | None = None) -> Subspace:
        """Intermediate bound: intersect an earlier term with this receiver's exposed part."""
        self._begin()
        genie = GenieSpec.of(genie)
        prior = self.ledger.registry.get(against)
        if prior is None or prior.subspace is None:
            raise ChainError(f"unregistered subspace id {against!r}")
        if prior.tx != target:
            raise ChainError(f"{against!r} belongs to tx {prior.tx}, not {target}")
        txs, a, items, stack_rank = self._build(rx, genie)
        self._need(target, txs, rx)
        e = self._exposed_for(a, items, txs, target)
        o = prior.subspace.as_backend(e.backend) if prior.subspace.backend != e.backend else prior.subspace
        joint = sp.union_span(o, e)
        inter = sp.intersect(o, e)
        ok = stack_rank == a.shape[1]
        spans = joint.dim == self.net.M_T
        produces = produces or f"I{self._step}"
        self._record(
            {
                "step": self._step,
                "action": "intersect",
                "rx": rx,
                "target": target,
                "against": against,
                "unknown_txs": txs,
                "equations": int(a.shape[0] + sum(it.rows.shape[0] for it in items)),
                "unknowns": int(a.shape[1]),
                "stack_rank": stack_rank,
                "acceptable": ok,
                "exposed_dim": e.dim,
                "exposed_pivots": self._pivots(e),
                "combined_rank": self._combined_rank(e, items, target),
                "joint_dim": joint.dim,
                "intersection_dim": inter.dim,
                "produces": produces,
            },
            items,
        )
        if not ok:
            self._degrade(rx, f"genie not acceptable at rx {rx}")
        if not spans:
            self._degrade(rx, f"{against} and the exposed part at rx {rx} do not span the transmit space")
        self.ledger.register(produces, RegistryEntry(inter.dim, f"intersection({against},rx={rx})", target, inter))
        terms = [(tid, +1) for tid in genie.priors] + self._positive_generics(items, skip_tx=target)
        terms += [(against, +1), (produces, -1)]
        rate = len(genie.full) + len(genie.messages)
        self.ledger.add(Inequality(self.lhs, Fraction(self.net.M_R), Fraction(rate), terms, step=self._step))
        return inter

    def close(self, rx: int, genie=None) -> None:
        """A step that resolves everything and leaves no negative term."""
        self._begin()
        genie = GenieSpec.of(genie)
        txs, a, items, stack_rank = self._build(rx, genie)
        ok = stack_rank == a.shape[1]
        per_tx = {}
        for u in txs:
            e = self._exposed_for(a, items, txs, u)
            per_tx[str(u)] = self._combined_rank(e, items, u)
        self._record(
            {
                "step": self._step,
                "action": "close" if items or genie.messages else "direct",
                "rx": rx,
                "unknown_txs": txs,
                "equations": int(a.shape[0] + sum(it.rows.shape[0] for it in items)),
                "unknowns": int(a.shape[1]),
                "stack_rank": stack_rank,
                "acceptable": ok,
                "combined_rank": per_tx,
            },
            items,
        )
        if not ok:
            self._degrade(rx, f"genie not acceptable at rx {rx}")
        terms = [(tid, +1) for tid in genie.priors] + self._positive_generics(items)
        rate = len(genie.full) + len(genie.messages)
        self.ledger.add(Inequality(self.lhs, Fraction(self.net.M_R), Fraction(rate), terms, step=self._step))

    def run(self, fn) -> ChainLedger:
        """Call ``fn(self)``; a failed check ends the chain with a capped step."""
        try:
            fn(self)
        except _Halt:
            pass
        return self.ledger
