"""Symbolic entropy ledger.

Every chain step contributes one sum-rate inequality of the form

    lhs * nR  <=  log * n log(rho)  +  rate * nR  +  sum_k sign_k * h(T_k)

where each ``T_k`` is a registered subspace term with a known dimension.
Summing the steps lets matched +/- terms cancel. What survives is weakened
into a closed form: positive terms by their dimension, negative terms of one
transmitter by the multilook credit (a complete set of projections of X is
worth a whole transmit vector), anything else dropped.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from ..multilook import build_full_sets
from ..subspace import Subspace

__all__ = ["ChainError", "Inequality", "RegistryEntry", "ChainLedger", "ledger_bound", "ledger_summary"]


class ChainError(ValueError):
    """A chain that is malformed or does not close."""


@dataclass
class Inequality:
    lhs: int
    log: Fraction
    rate: Fraction
    terms: list[tuple[str, int]] = field(default_factory=list)
    step: int | None = None

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs,
            "log": str(self.log),
            "rate": str(self.rate),
            "terms": [{"id": tid, "sign": sign} for tid, sign in self.terms],
        }

    def __str__(self) -> str:
        parts = [f"{self.log} log(rho)"]
        if self.rate:
            parts.append(f"{self.rate}R")
        for tid, sign in self.terms:
            parts.append(f"{'+' if sign > 0 else '-'} h({tid})")
        return f"{self.lhs}R <= " + " + ".join(parts[:2]) + "".join(" " + p for p in parts[2:])


@dataclass
class RegistryEntry:
    dim: int
    provenance: str
    tx: int | None = None
    subspace: Subspace | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"dim": self.dim, "provenance": self.provenance, "tx": self.tx}
        if self.subspace is not None:
            out["subspace"] = self.subspace.to_json()
        return out


@dataclass
class ChainLedger:
    inequalities: list[Inequality] = field(default_factory=list)
    registry: dict[str, RegistryEntry] = field(default_factory=dict)
    degraded: bool = False
    trace: list[dict] = field(default_factory=list)
    ambient: int = 0
    per_tx_rate: int = 1
    name: str = ""

    def register(self, tid: str, entry: RegistryEntry) -> None:
        if tid in self.registry:
            raise ChainError(f"subspace id {tid!r} registered twice")
        self.registry[tid] = entry

    def add(self, ineq: Inequality) -> None:
        for tid, _ in ineq.terms:
            if tid not in self.registry:
                raise ChainError(f"unregistered subspace id {tid!r}")
        self.inequalities.append(ineq)

    def bound(self) -> Fraction:
        return ledger_bound(self)

    def to_json(self) -> dict:
        try:
            bound = str(self.bound())
        except ChainError:
            bound = None
        return {
            "name": self.name,
            "inequalities": [q.to_json() for q in self.inequalities],
            "bound": bound,
            "degraded": self.degraded,
            "registry": {k: v.to_json() for k, v in self.registry.items()},
            "trace": self.trace,
        }


def ledger_summary(ledger: ChainLedger) -> dict:
    """Sum the inequalities and weaken the residual terms.

    Returns the totals and how each residual term was disposed of.
    """
    if not ledger.inequalities:
        raise ChainError("empty ledger")
    lhs = sum(q.lhs for q in ledger.inequalities)
    log = sum((q.log for q in ledger.inequalities), Fraction(0))
    rate = sum((q.rate for q in ledger.inequalities), Fraction(0))
    net: dict[str, int] = defaultdict(int)
    order: list[str] = []
    for q in ledger.inequalities:
        for tid, sign in q.terms:
            if tid not in net:
                order.append(tid)
            net[tid] += sign

    positives = [(t, net[t]) for t in order if net[t] > 0]
    negatives = [(t, -net[t]) for t in order if net[t] < 0]

    # h(T) <= dim(T) log(rho) for every surviving positive term
    for tid, coef in positives:
        log += coef * ledger.registry[tid].dim

    # multilook credit on the surviving negative terms, one transmitter at a time
    credit = 0
    by_tx: dict[int, list[Subspace]] = defaultdict(list)
    for tid, coef in negatives:
        e = ledger.registry[tid]
        if e.tx is not None and e.subspace is not None:
            by_tx[e.tx].extend([e.subspace] * coef)
    sets_per_tx = {}
    for tx in sorted(by_tx):
        res = build_full_sets(by_tx[tx], by_tx[tx][0].ambient_dim)
        sets_per_tx[tx] = res.l_sigma
        credit += res.l_sigma
    rate -= credit * ledger.per_tx_rate

    return {
        "lhs": lhs,
        "log": log,
        "rate": rate,
        "residual_positive": [t for t, _ in positives],
        "residual_negative": [t for t, _ in negatives],
        "multilook_sets": sets_per_tx,
    }


def ledger_bound(ledger: ChainLedger) -> Fraction:
    """DoF bound sum(log) / (sum(lhs) - sum(rate)) after cancellation."""
    s = ledger_summary(ledger)
    den = s["lhs"] - s["rate"]
    if den <= 0:
        raise ChainError("chain does not close: nonpositive rate denominator")
    return Fraction(s["log"]) / den
