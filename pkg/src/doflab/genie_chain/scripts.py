"""Chain scripts as data, plus the builtin chains.

A script is an ordered list of steps. Each step names a receiver, an action
and a genie (see :class:`GenieSpec`):

    {"action": "expose", "rx": 2, "target": 1,
     "genie": {"generic": [[1, 1]]}, "produces": "O"}

Actions:

* ``expose``: resolve everything and keep the target's exposed part as a
  new negative term.
* ``intersect``: intersect an earlier term (``against``) with the target's
  exposed part here; an intermediate bound.
* ``close`` / ``direct``: resolve everything and leave no negative term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..network import FULL_IC, MANY_TO_ONE, X_CHANNEL, Network, generate_generic, reciprocal
from .engine import ChainRunner, GenieSpec
from .ledger import ChainError, ChainLedger

__all__ = [
    "ChainScript",
    "run_script",
    "builtin_script",
    "builtin_names",
    "script_network",
    "ALGORITHM_NAMES",
]

ACTIONS = ("expose", "intersect", "close", "direct")


@dataclass
class ChainScript:
    name: str
    topology: str
    K: int
    M_T: int
    M_R: int
    steps: list[dict] = field(default_factory=list)
    expected: Fraction | None = None
    note: str = ""

    def validate(self) -> None:
        made: set[str] = set()
        for n, st in enumerate(self.steps, 1):
            act = st.get("action")
            if act not in ACTIONS:
                raise ChainError(f"step {n}: unknown action {act!r}")
            if "rx" not in st:
                raise ChainError(f"step {n}: missing rx")
            if act in ("expose", "intersect") and "target" not in st:
                raise ChainError(f"step {n}: {act} needs a target")
            g = GenieSpec.of(st.get("genie"))
            refs = list(g.priors) + ([st["against"]] if act == "intersect" else [])
            for tid in refs:
                if tid not in made:
                    raise ChainError(f"step {n}: reference to {tid!r} before it is created")
            if act in ("expose", "intersect"):
                made.add(st.get("produces") or f"{'E' if act == 'expose' else 'I'}{n}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "topology": self.topology,
            "K": self.K,
            "M_T": self.M_T,
            "M_R": self.M_R,
            "steps": self.steps,
            "expected": None if self.expected is None else str(self.expected),
            "note": self.note,
        }

    @classmethod
    def from_json(cls, d: dict | str) -> "ChainScript":
        if isinstance(d, str):
            d = json.loads(d)
        exp = d.get("expected")
        return cls(
            d["name"], d["topology"], d["K"], d["M_T"], d["M_R"], list(d["steps"]),
            None if exp is None else Fraction(exp), d.get("note", ""),
        )


def run_script(net: Network, script: ChainScript, *, genie_mode: str = "random", seed: int = 0) -> ChainLedger:
    """Execute ``script`` on ``net`` and return the ledger."""
    script.validate()
    shape = (net.topology, net.K, net.M_T, net.M_R)
    if shape != (script.topology, script.K, script.M_T, script.M_R):
        raise ChainError(f"script {script.name!r} expects {(script.topology, script.K, script.M_T, script.M_R)}, got {shape}")

    def body(r: ChainRunner):
        for st in script.steps:
            act, genie = st["action"], st.get("genie")
            if act == "expose":
                r.expose(st["rx"], st["target"], genie, st.get("produces"), st.get("target_rate", 1))
            elif act == "intersect":
                r.intersect(st["rx"], st["target"], genie, st["against"], st.get("produces"))
            else:
                r.close(st["rx"], genie)

    return ChainRunner(net, genie_mode=genie_mode, seed=seed, name=script.name).run(body)


# ---------------------------------------------------------------- builtins


def _ex(rx, target, produces, generic=(), priors=(), full=(), messages=(), reveals=(), target_rate=1):
    st = {"action": "expose", "rx": rx, "target": target, "produces": produces,
          "genie": _g(generic, priors, full, messages, reveals)}
    if target_rate != 1:
        st["target_rate"] = target_rate
    return st


def _int(rx, target, against, produces, generic=()):
    return {"action": "intersect", "rx": rx, "target": target, "against": against,
            "produces": produces, "genie": _g(generic)}


def _close(rx, generic=(), priors=(), full=(), messages=(), reveals=()):
    return {"action": "close", "rx": rx, "genie": _g(generic, priors, full, messages, reveals)}


def _g(generic=(), priors=(), full=(), messages=(), reveals=()):
    out = {}
    gen = [[t, m] for t, m in generic if m > 0]
    if gen:
        out["generic"] = gen
    for key, val in (("priors", priors), ("full", full), ("messages", messages), ("reveals", reveals)):
        if val:
            out[key] = list(val)
    return out


def _ex1(M_T=2, M_R=5):
    return ChainScript("ex1_2x5", FULL_IC, 4, 2, 5, [
        _ex(2, 1, "O", generic=[(1, 1)]),
        _close(3, priors=["O"]),
    ], Fraction(10, 7), "one exposed dimension passed on as the next genie")


def _ex2():
    return ChainScript("ex2_3x7", FULL_IC, 4, 3, 7, [
        _ex(2, 1, "X12", generic=[(1, 2)]),
        _ex(3, 2, "X23", generic=[(2, 1)], priors=["X12"]),
        _close(4, priors=["X23"]),
    ], Fraction(21, 10), "a genie term exposes one more dimension of the next transmitter")


def _ex2alt():
    return ChainScript("ex2alt_3x7", FULL_IC, 4, 3, 7, [
        _ex(2, 1, "X12", generic=[(1, 2)]),
        _ex(3, 1, "X13", generic=[(1, 2)]),
        _close(4, priors=["X12", "X13"]),
    ], Fraction(21, 10), "exposed parts of one transmitter at two receivers combined")


def _ex3():
    return ChainScript("ex3_3x8", FULL_IC, 4, 3, 8, [
        _ex(2, 1, "O", generic=[(1, 1)]),
        _int(3, 1, "O", "I", generic=[(1, 1)]),
        _close(4, priors=["I"]),
    ], Fraction(24, 11), "intermediate bound through an intersection")


def _chain_8_21(a: int = 1):
    M, N = 8 * a, 21 * a
    return ChainScript("chain_8_21", FULL_IC, 4, M, N, [
        _ex(2, 1, "O1", generic=[(1, 3 * a)]),
        _int(3, 1, "O1", "I1", generic=[(1, 3 * a)]),
        _ex(4, 3, "O3", generic=[(3, a)], priors=["I1"]),
        _int(1, 3, "O3", "I2", generic=[(3, 3 * a)]),
        _int(2, 3, "I2", "I3", generic=[(3, 3 * a)]),
        _ex(4, 2, "O6", generic=[(2, 2 * a)], priors=["I3"]),
        _int(1, 2, "O6", "I4", generic=[(2, 3 * a)]),
        _close(3, priors=["I4"]),
    ], Fraction(8 * N, 29), "two successive intermediate bounds, twice")


def _recip_8x3():
    # Steps 6-8 expose transmitter 3 at receivers 1 and 2 and hand both terms
    # to receiver 4. The last tx-2 term then lies in the row space of H^[42]
    # next to X24, so the four leftover tx-2 terms span all 8 dimensions.
    return ChainScript("recip_8x3", FULL_IC, 4, 8, 3, [
        _ex(2, 1, "X12", generic=[(1, 5)], full=[3, 4]),
        _ex(3, 1, "X13", generic=[(1, 5)], full=[2, 4]),
        _ex(4, 2, "X24", generic=[(2, 7)], priors=["X12", "X13"], full=[3]),
        _ex(1, 2, "X21", generic=[(2, 5)], full=[3, 4]),
        _ex(3, 2, "X23", generic=[(2, 5)], full=[1, 4]),
        _ex(1, 3, "X31", generic=[(3, 5)], full=[2, 4]),
        _ex(2, 3, "X32", generic=[(3, 5)], full=[1, 4]),
        _ex(4, 2, "X2~4", generic=[(2, 7)], priors=["X31", "X32"], full=[1]),
    ], Fraction(24, 11), "M_T > M_R; the leftover terms of transmitter 2 form one complete set")


def _recip_8x3_literal():
    # Last step at receiver 1: its tx-2 term sits inside the row space of
    # H^[12], already covered by X21, so the leftover terms span only 7
    # dimensions and no multilook credit is earned.
    return ChainScript("recip_8x3_literal", FULL_IC, 4, 8, 3, [
        _ex(2, 1, "X12", generic=[(1, 5)], full=[3, 4]),
        _ex(3, 1, "X13", generic=[(1, 5)], full=[2, 4]),
        _ex(4, 2, "X24", generic=[(2, 7)], priors=["X12", "X13"], full=[3]),
        _ex(1, 2, "X21", generic=[(2, 5)], full=[3, 4]),
        _ex(3, 2, "X23", generic=[(2, 5)], full=[1, 4]),
        _ex(2, 4, "X42", generic=[(4, 5)], full=[1, 3]),
        _ex(3, 4, "X43", generic=[(4, 5)], full=[1, 2]),
        _ex(1, 2, "X2~1", generic=[(2, 7)], priors=["X42", "X43"], full=[3]),
    ], Fraction(12, 5), "receiver-1 variant of the last step; no complete set survives")


def _kuser():
    return ChainScript("kuser_5_4_15", FULL_IC, 5, 4, 15, [
        _ex(2, 1, "O2", generic=[(1, 1)]),
        _int(3, 1, "O2", "I3", generic=[(1, 1)]),
        _int(4, 1, "I3", "I4", generic=[(1, 1)]),
        _close(5, priors=["I4"]),
    ], Fraction(60, 19), "five users, two successive intersections")


def _five_to_one():
    return ChainScript("five_to_one_2x5", MANY_TO_ONE, 5, 2, 5, [
        _ex(1, 2, "O", generic=[(2, 1)], full=[3]),
        _close(1, priors=["O"], full=[4]),
    ], Fraction(10, 7), "both steps at the one receiver that hears interference")


def _xch():
    return ChainScript("xch_2x3", X_CHANNEL, 3, 2, 3, [
        _ex(1, 2, "O|W21", generic=[(2, 1)], messages=["W32", "W33"], reveals=[3], target_rate=2),
        _close(1, priors=["O|W21"], messages=["W12", "W13"], reveals=[1]),
    ], Fraction(1, 2), "X channel, nine messages of rate R")


# four-to-one outer bounds, one script per linear piece with gamma > 1/3

def _f2o_3m4(M=2, N=5):
    return ChainScript("four_to_one_3m4", MANY_TO_ONE, 4, M, N, [
        _close(1, generic=[(2, 3 * M - N)]),
    ], Fraction(3 * M, 4), "1/3 <= M/N <= 4/9")


def _f2o_n3(M=5, N=11):
    return ChainScript("four_to_one_n3", MANY_TO_ONE, 4, M, N, [
        _close(1, full=[2]),
    ], Fraction(N, 3), "4/9 <= M/N <= 1/2")


def _f2o_2m3(M=5, N=9):
    return ChainScript("four_to_one_2m3", MANY_TO_ONE, 4, M, N, [
        _close(1, full=[2], generic=[(3, 2 * M - N)]),
    ], Fraction(2 * M, 3), "1/2 <= M/N <= 3/5")


def _f2o_2n5(M=5, N=8):
    return ChainScript("four_to_one_2n5", MANY_TO_ONE, 4, M, N, [
        _ex(1, 3, "X31", full=[2], generic=[(3, 2 * M - N)]),
        _close(1, full=[4], priors=["X31"]),
    ], Fraction(2 * N, 5), "3/5 <= M/N <= 2/3")


def _f2o_3m5(M=3, N=4):
    return ChainScript("four_to_one_3m5", MANY_TO_ONE, 4, M, N, [
        _ex(1, 3, "X31", full=[2], generic=[(3, 2 * M - N)]),
        _close(1, full=[4], priors=["X31"], generic=[(3, 3 * M - 2 * N)]),
    ], Fraction(3 * M, 5), "2/3 <= M/N <= 5/6")


def _f2o_n2(M=6, N=7):
    return ChainScript("four_to_one_n2", MANY_TO_ONE, 4, M, N, [
        _close(1, full=[2, 3]),
    ], Fraction(N, 2), "5/6 <= M/N <= 1")


_BUILDERS: dict[str, Callable[..., ChainScript]] = {
    "ex1_2x5": lambda: _ex1(),
    "ex2_3x7": _ex2,
    "ex2alt_3x7": _ex2alt,
    "ex3_3x8": _ex3,
    "chain_8_21": _chain_8_21,
    "recip_8x3": _recip_8x3,
    "recip_8x3_literal": _recip_8x3_literal,
    "kuser_5_4_15": _kuser,
    "five_to_one_2x5": _five_to_one,
    "xch_2x3": _xch,
    "four_to_one_3m4": _f2o_3m4,
    "four_to_one_n3": _f2o_n3,
    "four_to_one_2m3": _f2o_2m3,
    "four_to_one_2n5": _f2o_2n5,
    "four_to_one_3m5": _f2o_3m5,
    "four_to_one_n2": _f2o_n2,
}

# chains generated on the fly by a state machine rather than fixed steps
ALGORITHM_NAMES = {"alg1": (FULL_IC, 4, 3, 5), "alg2": (FULL_IC, 4, 2, 5)}


def builtin_names() -> list[str]:
    return list(_BUILDERS) + list(ALGORITHM_NAMES)


def builtin_script(name: str, **params) -> ChainScript:
    """A builtin script; scalable ones take parameters (``a`` or ``M``, ``N``)."""
    try:
        return _BUILDERS[name](**params)
    except KeyError:
        raise ChainError(f"unknown builtin script {name!r}") from None


def script_network(script: ChainScript, seed: int, backend: str = "float") -> Network:
    """The generic network a builtin script is meant to run on.

    The reciprocal chain runs on the transpose of a generic M_T < M_R network.
    """
    if script.name.startswith("recip_8x3"):
        return reciprocal(generate_generic(FULL_IC, script.K, script.M_R, script.M_T, seed, backend))
    return generate_generic(script.topology, script.K, script.M_T, script.M_R, seed, backend)
