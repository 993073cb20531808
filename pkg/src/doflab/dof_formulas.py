"""Closed-form DoF values and proof-status classification.

All ratios are exact :class:`fractions.Fraction` values, so interval and
set memberships never depend on a float epsilon. Points are normalized to
M = min(M_T, M_R), N = max(M_T, M_R) and gamma = M/N.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .network import RegimePoint, is_p3_ratio

__all__ = [
    "counting_bound",
    "decomposition_bound",
    "k3_gap_identity",
    "dstar",
    "dstar_boundary",
    "conjecture_threshold",
    "four_to_one_dof",
    "many_to_one_counting",
    "in_p1",
    "in_p2",
    "in_p3",
    "verify_p1",
    "classify",
    "DoFReport",
    "STATUSES",
    "P1_MAX_N",
]

STATUSES = ("proven_dstar", "proven_decomposition", "conjectured", "open")
P1_MAX_N = 20


def _pos(*xs: int) -> None:
    for x in xs:
        if x < 1:
            raise ValueError(f"antenna counts must be positive, got {x}")


def counting_bound(K: int, M: int, N: int) -> Fraction:
    """(M + N) / (K + 1), the proper-system bound."""
    if K < 2:
        raise ValueError("K must be at least 2")
    return Fraction(M + N, K + 1)


def decomposition_bound(M: int, N: int) -> Fraction:
    """MN / (M + N), achievable by antenna decomposition."""
    _pos(M, N)
    return Fraction(M * N, M + N)


def k3_gap_identity(M: int, N: int) -> Fraction:
    """(M + N)/4 - MN/(M + N), which equals (N - M)^2 / (4 (M + N))."""
    _pos(M, N)
    gap = Fraction(M + N, 4) - Fraction(M * N, M + N)
    assert gap == Fraction((N - M) ** 2, 4 * (M + N))
    return gap


def dstar_boundary(K: int) -> Fraction:
    """Upper end (K-1)/(K(K-2)) of the range where d* is the DoF."""
    return Fraction(K - 1, K * (K - 2))


def conjecture_threshold(K: int) -> Fraction:
    """(K-2)/(K^2-3K+1); above it the decomposition value is conjectured."""
    return Fraction(K - 2, K * K - 3 * K + 1)


def dstar(K: int, M: int, N: int) -> Fraction:
    """Four-piece DoF value for gamma up to (K-1)/(K(K-2))."""
    if K < 4:
        raise ValueError("d* is defined here for K >= 4")
    _pos(M, N)
    M, N = min(M, N), max(M, N)
    g = Fraction(M, N)
    if g > dstar_boundary(K):
        raise ValueError(f"M/N = {g} exceeds (K-1)/(K(K-2)) = {dstar_boundary(K)}")
    if g <= Fraction(1, K):
        return Fraction(M)
    if g <= Fraction(1, K - 1):
        return Fraction(N, K)
    if g <= Fraction(K, K * K - K - 1):
        return Fraction((K - 1) * M, K)
    return Fraction((K - 1) * N, K * K - K - 1)


# (upper end of the gamma interval, coefficient, uses M)
_FOUR_TO_ONE = [
    (Fraction(1, 4), Fraction(1), True),
    (Fraction(1, 3), Fraction(1, 4), False),
    (Fraction(4, 9), Fraction(3, 4), True),
    (Fraction(1, 2), Fraction(1, 3), False),
    (Fraction(3, 5), Fraction(2, 3), True),
    (Fraction(2, 3), Fraction(2, 5), False),
    (Fraction(5, 6), Fraction(3, 5), True),
    (Fraction(1), Fraction(1, 2), False),
]


def four_to_one_dof(M: int, N: int) -> Fraction:
    """Eight-piece per-user DoF of the four-to-one channel, M <= N."""
    _pos(M, N)
    if M > N:
        raise ValueError(f"the four-to-one formula needs M <= N, got ({M}, {N})")
    g = Fraction(M, N)
    for hi, coef, uses_m in _FOUR_TO_ONE:
        if g <= hi:
            return coef * (M if uses_m else N)
    raise AssertionError("unreachable")


def many_to_one_counting(K: int, M: int, N: int) -> Fraction:
    """((K-1)M + N) / (2K - 1)."""
    if K < 2:
        raise ValueError("K must be at least 2")
    return Fraction((K - 1) * M + N, 2 * K - 1)


# ---------------------------------------------------------------- proven sets (K = 4)


def in_p1(M: int, N: int, max_n: int = P1_MAX_N) -> bool:
    return Fraction(1, 2) <= Fraction(M, N) < 1 and N <= max_n


def in_p2(M: int, N: int) -> bool:
    return Fraction(2, 5) <= Fraction(M, N) < Fraction(1, 2)


def in_p3(M: int, N: int) -> bool:
    return Fraction(M, N) == Fraction(8, 21) or is_p3_ratio(M, N) is not None


def verify_p1(M: int, N: int, trials: int = 20, seed: int = 0) -> bool:
    """Seeded check of the first chain algorithm on generic networks.

    Passes when every trial closes without degrading and reaches MN/(M+N).
    """
    from ._rng import sub_seed
    from .genie_chain import ChainError, run_algorithm1
    from .network import FULL_IC, generate_generic

    target = decomposition_bound(M, N)
    for t in range(trials):
        net = generate_generic(FULL_IC, 4, M, N, sub_seed(seed, t))
        try:
            led = run_algorithm1(net, seed=sub_seed(seed, t))
            if led.degraded or led.bound() != target:
                return False
        except ChainError:
            return False
    return True


@dataclass
class DoFReport:
    point: RegimePoint
    counting: Fraction
    decomposition: Fraction
    dstar: Fraction | None
    four_to_one: Fraction | None
    many_to_one_counting: Fraction | None
    best_known: Fraction
    status: str
    regime: int
    verified: bool | None = None

    def to_json(self) -> dict:
        def r(x):
            return None if x is None else str(x)

        return {
            "K": self.point.K,
            "M": self.point.M,
            "N": self.point.N,
            "gamma": str(self.point.gamma),
            "counting": r(self.counting),
            "decomposition": r(self.decomposition),
            "dstar": r(self.dstar),
            "four_to_one": r(self.four_to_one),
            "many_to_one_counting": r(self.many_to_one_counting),
            "best_known": r(self.best_known),
            "status": self.status,
            "regime": self.regime,
            "verified": self.verified,
        }


def _proven_k4(M: int, N: int, p1_max_n: int) -> bool:
    return in_p1(M, N, p1_max_n) or in_p2(M, N) or in_p3(M, N)


def classify(
    K: int,
    M_T: int,
    M_R: int,
    *,
    p1_max_n: int = P1_MAX_N,
    verify_trials: int = 0,
) -> DoFReport:
    """Proof status and best known per-user DoF of a symmetric K-user point.

    ``verify_trials`` > 0 also runs :func:`verify_p1` on P1-shaped points
    (1/2 <= gamma < 1) and stores the result in ``verified``; it never
    changes the status.
    """
    if K <= 3:
        raise ValueError("classify covers K >= 4")
    _pos(M_T, M_R)
    pt = RegimePoint.of(K, M_T, M_R)
    M, N, g = pt.M, pt.N, pt.gamma
    count = counting_bound(K, M, N)
    dec = decomposition_bound(M, N)
    ds = dstar(K, M, N) if g <= dstar_boundary(K) else None
    if ds is not None:
        status, best = "proven_dstar", ds
    elif _proven_k4(M, N, p1_max_n):
        # a proven four-user point stays proven for more users
        status, best = "proven_decomposition", dec
    elif g >= conjecture_threshold(K):
        status, best = "conjectured", dec
    else:
        status, best = "open", dec
    verified = None
    if verify_trials > 0 and Fraction(1, 2) <= g < 1:
        verified = verify_p1(M, N, verify_trials)
    return DoFReport(
        point=pt,
        counting=count,
        decomposition=dec,
        dstar=ds,
        four_to_one=four_to_one_dof(M, N) if K == 4 else None,
        many_to_one_counting=many_to_one_counting(K, M, N),
        best_known=best,
        status=status,
        regime=1 if count >= dec else 2,
        verified=verified,
    )
