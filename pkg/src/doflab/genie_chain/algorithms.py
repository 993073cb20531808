"""State-machine chains for the four-user channel with M_T < M_R.

Both algorithms keep a current observation term O (a subspace of one
transmitter's symbols) and pick the next step from |O|:

* equal to the genie budget: hand O to the next receiver and close;
* smaller: hand O over with a top-up of generic combinations and expose a
  larger term of the next transmitter;
* larger (second algorithm: |O| + clean > M): intersect O with the clean
  observations at another receiver, an intermediate bound.

The realized steps are stored in the ledger trace, and can be replayed as a
:class:`ChainScript` through :func:`realized_script`.
"""

from __future__ import annotations

from fractions import Fraction

from ..network import FULL_IC, Network
from .engine import ChainRunner
from .ledger import ChainError, ChainLedger
from .scripts import ChainScript

__all__ = ["run_algorithm1", "run_algorithm2", "in_p2", "in_p3", "realized_script", "successive_intersections"]


def _cyc(x: int, K: int = 4) -> int:
    return (x - 1) % K + 1


def _check_k4(net: Network) -> tuple[int, int]:
    if net.topology != FULL_IC or net.K != 4:
        raise ChainError("the chain algorithms need a four-user full interference channel")
    if not net.M_T < net.M_R:
        raise ChainError(f"the chain algorithms need M_T < M_R, got ({net.M_T}, {net.M_R})")
    return net.M_T, net.M_R


def in_p2(M: int, N: int) -> bool:
    return Fraction(2, 5) <= Fraction(M, N) < Fraction(1, 2)


def in_p3(M: int, N: int) -> bool:
    from ..network import is_p3_ratio

    return Fraction(M, N) == Fraction(8, 21) or is_p3_ratio(M, N) is not None


def run_algorithm1(net: Network, *, genie_mode: str = "random", seed: int = 0) -> ChainLedger:
    """Chain for M/N in [1/2, 1): full genie of one interferer plus generic top-ups."""
    M, N = _check_k4(net)
    if not Fraction(1, 2) <= Fraction(M, N) < 1:
        raise ChainError(f"M/N = {Fraction(M, N)} is outside [1/2, 1)")
    M0, g = N - M, 2 * M - N

    def body(r: ChainRunner):
        k = 2
        o_id = "O1"
        o = r.expose(k, _cyc(k - 1), {"full": [_cyc(k + 1)], "generic": _gen(_cyc(k - 1), g)}, o_id)
        for n in range(2, 4 * M + 8):
            d = o.dim
            if d == M:
                # the term is already a whole transmit vector; the ledger's
                # multilook credit turns it into -R directly
                return
            nxt = _cyc(k + 1)
            if d == g:
                r.close(nxt, {"full": [_cyc(k + 2)], "priors": [o_id]})
                return
            new_id = f"O{n}"
            if d < g:
                genie = {"full": [_cyc(k + 2)], "priors": [o_id], "generic": _gen(_cyc(k), g - d)}
                o = r.expose(nxt, _cyc(k), genie, new_id)
            else:
                genie = {"priors": [o_id], "generic": _gen(_cyc(k), 3 * M - N - d)}
                o = r.expose(nxt, _cyc(k), genie, new_id)
            o_id, k = new_id, nxt
        raise ChainError("first chain algorithm did not terminate")

    return ChainRunner(net, genie_mode=genie_mode, seed=seed, name="alg1").run(body)


def _gen(tx: int, m: int) -> list:
    return [(tx, m)] if m > 0 else []


def _next_rx(last: int, skip: set[int]) -> int:
    for s in range(1, 5):
        r = _cyc(last + s)
        if r not in skip:
            return r
    raise ChainError("no admissible receiver left for the next step")


def run_algorithm2(net: Network, *, genie_mode: str = "random", seed: int = 0, strict: bool = True) -> ChainLedger:
    """Chain for M/N in [2/5, 1/2) and the special points below 2/5.

    With ``strict`` the ratio must lie in [2/5, 1/2), equal 8/21 or have the
    form (2c-1)/(5c-2); otherwise any ratio in [3/8, 1/2) is attempted.
    Receiver rules: the next receiver follows the previous one cyclically,
    skipping the term's own transmitter and every receiver the term was
    already intersected at (and, for intersections, the receiver the term
    was exposed at). Expose steps target the transmitter just before the
    receiver, or the one before that if it owns the term.
    """
    M, N = _check_k4(net)
    gamma = Fraction(M, N)
    if strict and not (in_p2(M, N) or in_p3(M, N)):
        raise ChainError(f"M/N = {gamma} is not in [2/5, 1/2), 8/21 or (2c-1)/(5c-2)")
    if not Fraction(3, 8) <= gamma < Fraction(1, 2):
        raise ChainError(f"M/N = {gamma} is outside [3/8, 1/2)")
    M0, g = N - 2 * M, 3 * M - N

    def body(r: ChainRunner):
        o_id, t, built_at, last = "O1", 1, 2, 2
        o = r.expose(2, 1, {"generic": _gen(1, g)}, o_id)
        met: list[int] = []
        run = 0
        for n in range(2, 4 * M + 8):
            d = o.dim
            if d + M0 > M:
                run += 1
                if run > 2:
                    raise ChainError("a third successive intermediate bound would be needed")
                rx = _next_rx(last, {t, built_at, *met})
                new_id = f"I{n}"
                o = r.intersect(rx, t, {"generic": _gen(t, g)}, o_id, new_id)
                met.append(rx)
                o_id, last = new_id, rx
                continue
            rx = _next_rx(last, {t, *met})
            if d == g:
                r.close(rx, {"priors": [o_id]})
                return
            target = _cyc(rx - 1) if _cyc(rx - 1) != t else _cyc(rx - 2)
            new_id = f"O{n}"
            o = r.expose(rx, target, {"priors": [o_id], "generic": _gen(target, g - d)}, new_id)
            o_id, t, built_at, last, met, run = new_id, target, rx, rx, [], 0
        raise ChainError("second chain algorithm did not terminate")

    return ChainRunner(net, genie_mode=genie_mode, seed=seed, name="alg2").run(body)


def successive_intersections(ledger: ChainLedger) -> int:
    """Longest run of consecutive intersect steps in a ledger trace."""
    best = cur = 0
    for rec in ledger.trace:
        cur = cur + 1 if rec.get("action") == "intersect" else 0
        best = max(best, cur)
    return best


def realized_script(ledger: ChainLedger, net: Network) -> ChainScript:
    """Replayable script of the steps an algorithm actually took."""
    steps = []
    for rec in ledger.trace:
        act = rec["action"]
        if act == "cap":
            break
        genie: dict = {}
        for it in rec["genie"]:
            if it["kind"] == "generic":
                genie.setdefault("generic", []).append([it["tx"], it["dim"]])
            elif it["kind"] == "prior":
                genie.setdefault("priors", []).append(it["label"])
            else:
                genie.setdefault("full", []).append(it["tx"])
        st = {"action": act, "rx": rec["rx"], "genie": genie}
        if act in ("expose", "intersect"):
            st["target"] = rec["target"]
            st["produces"] = rec["produces"]
        if act == "intersect":
            st["against"] = rec["against"]
        steps.append(st)
    return ChainScript(ledger.name, net.topology, net.K, net.M_T, net.M_R, steps)
