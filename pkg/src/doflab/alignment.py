"""Linear interference-alignment precoders and their verification.

Precoders come from null spaces of stacked channel matrices: every column
of a null-space basis is one joint choice of beamformers that makes the
listed interference terms cancel at a receiver. Verification recomputes all
dimensions from scratch, so nothing is assumed to hold almost surely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact_linalg as xl
from . import subspace as sp
from ._rng import make_rng
from .dof_formulas import counting_bound, many_to_one_counting
from .network import FULL_IC, MANY_TO_ONE, Network

__all__ = [
    "AlignmentError",
    "PrecoderSet",
    "AlignmentReport",
    "design_k_user",
    "design_four_to_one",
    "FOUR_TO_ONE_CASES",
    "verify_alignment",
    "receive_filters",
    "reciprocal_precoders",
    "proper_test",
]


class AlignmentError(ValueError):
    """Shape mismatch or a rank-deficient alignment system."""


@dataclass
class PrecoderSet:
    V: dict[int, np.ndarray]
    d: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.V.items():
            if v.ndim != 2 or v.shape[1] != self.d:
                raise AlignmentError(f"V[{k}] has shape {v.shape}, expected (*, {self.d})")

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "V": {str(k): xl.matrix_to_json(v) for k, v in sorted(self.V.items())},
            "meta": self.meta,
        }


@dataclass
class AlignmentReport:
    passed: bool
    d: int
    receivers: dict[int, dict]

    def to_json(self) -> dict:
        return {"pass": self.passed, "d": self.d, "receivers": {str(k): v for k, v in self.receivers.items()}}


def _null_block(h: np.ndarray, want: int, what: str) -> np.ndarray:
    z = xl.null_space(h)
    if z.shape[1] < want:
        raise AlignmentError(f"{what}: null space has dimension {z.shape[1]} < {want}")
    # any basis of the null space works; keep the first ``want`` columns
    return z[:, :want]


def design_k_user(net: Network, beta: int) -> PrecoderSet:
    """Precoders for (M_T, M_R) = (beta K, beta (K^2-K-1)), d = beta (K-1).

    Receiver k aligns beta dimensions: the interference channels are stacked
    into a beta(K^2-K-1) x beta K(K-1) matrix whose beta-dimensional null space
    gives one beamforming block for each interferer. Receiver 1 fills block 1
    of every transmitter; receiver k >= 2 fills block k-1 of transmitters
    j < k and block k of transmitters j > k.
    """
    K = net.K
    if net.topology != FULL_IC:
        raise AlignmentError("design_k_user needs a full interference channel")
    if (net.M_T, net.M_R) != (beta * K, beta * (K * K - K - 1)):
        raise AlignmentError(
            f"expected (M_T, M_R) = ({beta * K}, {beta * (K * K - K - 1)}), got ({net.M_T}, {net.M_R})"
        )
    M = net.M_T
    blocks: dict[int, list] = {j: [None] * (K - 1) for j in range(1, K + 1)}
    null_dims = {}
    for k in range(1, K + 1):
        others = [j for j in range(1, K + 1) if j != k]
        hbar = np.hstack([np.asarray(net.H(k, j)) for j in others])
        null_dims[k] = int(hbar.shape[1] - xl.rank(hbar))
        vbar = _null_block(hbar, beta, f"rx {k}")
        for n, j in enumerate(others):
            b = 0 if k == 1 else (k - 2 if j < k else k - 1)
            blocks[j][b] = vbar[n * M : (n + 1) * M, :]
    V = {j: np.hstack(bl) for j, bl in blocks.items()}
    return PrecoderSet(V, beta * (K - 1), {"design": "k_user", "beta": beta, "null_dims": null_dims})


FOUR_TO_ONE_CASES = {"4/9": (4, 9, 3), "3/5": (3, 5, 2), "5/6": (5, 6, 3)}


def design_four_to_one(net: Network, case: str, seed: int | None = None) -> PrecoderSet:
    """Precoders for the four-to-one channel at M/N = 4/9, 3/5 or 5/6.

    4/9: one 9b x 12b system aligns all of TX 4 into the span of TX 2 and 3.
    3/5: three 5b x 6b systems align b dimensions for each pair of interferers.
    5/6: one 12b x 15b system aligns TX 3 and TX 4 onto TX 2's subspace.
    V^[1] is a seeded random matrix.
    """
    if net.topology != MANY_TO_ONE or net.K != 4:
        raise AlignmentError("design_four_to_one needs a four-user many-to-one channel")
    if case not in FOUR_TO_ONE_CASES:
        raise AlignmentError(f"unknown case {case!r}; expected one of {list(FOUR_TO_ONE_CASES)}")
    m, n, dd = FOUR_TO_ONE_CASES[case]
    M, N = net.M_T, net.M_R
    if M % m or N % n or M // m != N // n:
        raise AlignmentError(f"case {case} needs (M, N) = ({m}b, {n}b), got ({M}, {N})")
    b = M // m
    d = dd * b
    H = {j: np.asarray(net.H(1, j)) for j in (2, 3, 4)}
    null_dims = {}
    if case == "4/9":
        hbar = np.hstack([H[2], H[3], H[4]])
        z = _null_block(hbar, d, "[H12 H13 H14]")
        null_dims["H12 H13 H14"] = int(hbar.shape[1] - xl.rank(hbar))
        V = {j: z[i * M : (i + 1) * M, :] for i, j in enumerate((2, 3, 4))}
    elif case == "3/5":
        parts: dict[int, list] = {2: [], 3: [], 4: []}
        for a, c in ((2, 3), (2, 4), (3, 4)):
            hbar = np.hstack([H[a], H[c]])
            null_dims[f"H1{a} H1{c}"] = int(hbar.shape[1] - xl.rank(hbar))
            z = _null_block(hbar, b, f"[H1{a} H1{c}]")
            parts[a].append(z[:M])
            parts[c].append(z[M:])
        V = {j: np.hstack(p) for j, p in parts.items()}
    else:
        zero = xl.zeros(N, M, xl.backend_of(H[2]))
        hbar = np.vstack([np.hstack([H[2], H[3], zero]), np.hstack([H[2], zero, H[4]])])
        null_dims["two-block"] = int(hbar.shape[1] - xl.rank(hbar))
        z = _null_block(hbar, d, "two-block system")
        V = {j: z[i * M : (i + 1) * M, :] for i, j in enumerate((2, 3, 4))}
    s = net.seed if seed is None else seed
    v1 = make_rng(s, "alignment", "four_to_one", case).standard_normal((M, d))
    V[1] = xl.as_backend(v1, xl.FLOAT) if xl.backend_of(V[2]) == xl.FLOAT else xl.to_rational(v1)
    return PrecoderSet(V, d, {"design": "four_to_one", "case": case, "beta": b, "null_dims": null_dims})


def _span(ambient: int, mats: list[np.ndarray]) -> sp.Subspace:
    mats = [m for m in mats if m.shape[1]]
    if not mats:
        return sp.zero_space(ambient)
    if len({xl.backend_of(m) for m in mats}) > 1:
        mats = [xl.to_float(m) for m in mats]
    return sp.from_matrix(ambient, np.hstack(mats))


def verify_alignment(net: Network, pre: PrecoderSet, d: int | None = None) -> AlignmentReport:
    """Check interference dimensions and desired-signal separability.

    At every receiver that hears interference: dim I_k <= M_R - d and
    rank [H^[kk] V^[k] | basis(I_k)] = d + dim I_k. Every V^[k] must have
    full column rank d.
    """
    d = pre.d if d is None else d
    for k in range(1, net.K + 1):
        v = pre.V.get(k)
        if v is None or v.shape != (net.M_T, d):
            raise AlignmentError(f"V[{k}] missing or not {net.M_T} x {d}")
    out: dict[int, dict] = {}
    ok = True
    for k in range(1, net.K + 1):
        v = pre.V[k]
        full = xl.rank(v) == d if d else True
        interferers = [j for j in range(1, net.K + 1) if j != k and net.has_link(k, j)]
        rec = {"precoder_rank_ok": bool(full)}
        if interferers:
            ik = _span(net.M_R, [np.asarray(net.H(k, j)) @ pre.V[j] for j in interferers])
            desired = np.asarray(net.H(k, k)) @ v
            joint = _span(net.M_R, [desired, ik.basis])
            rec.update(
                interference_dim=ik.dim,
                room=net.M_R - d,
                dim_ok=ik.dim <= net.M_R - d,
                separable=joint.dim == d + ik.dim,
            )
            good = full and rec["dim_ok"] and rec["separable"]
        else:
            good = full
        rec["pass"] = bool(good)
        ok &= good
        out[k] = rec
    return AlignmentReport(bool(ok), d, out)


def receive_filters(net: Network, pre: PrecoderSet) -> dict[int, np.ndarray]:
    """Zero-forcing filters U^[k]: U^T kills interference and keeps rank d.

    U^[k] spans d directions of the complement of the interference span;
    raises if the desired signal does not survive zero forcing.
    """
    U = {}
    for k in range(1, net.K + 1):
        interferers = [j for j in range(1, net.K + 1) if j != k and net.has_link(k, j)]
        ik = _span(net.M_R, [np.asarray(net.H(k, j)) @ pre.V[j] for j in interferers])
        c = sp.complement(ik).basis
        desired = np.asarray(net.H(k, k)) @ pre.V[k]
        if c.shape[1] < pre.d:
            raise AlignmentError(f"rx {k}: only {c.shape[1]} interference-free dimensions for d = {pre.d}")
        proj = c.T @ desired
        if xl.rank(proj) != pre.d:
            raise AlignmentError(f"rx {k}: desired signal collapses after zero forcing")
        # c @ proj stays in the complement and U^T desired = proj^T proj has rank d
        if c.shape[1] > pre.d:
            c = c @ proj
        U[k] = c
    return U


def reciprocal_precoders(net: Network, pre: PrecoderSet) -> PrecoderSet:
    """Receive filters reused as precoders on the reciprocal network."""
    return PrecoderSet(receive_filters(net, pre), pre.d, {"design": "reciprocal", "of": pre.meta.get("design")})


def proper_test(K: int, M: int, N: int, d, topology: str = FULL_IC) -> bool:
    """d within the variable-counting bound of the topology (exact)."""
    d = Fraction(d)
    if topology == FULL_IC:
        return d <= counting_bound(K, M, N)
    if topology == MANY_TO_ONE:
        return d <= many_to_one_counting(K, M, N)
    raise ValueError(f"no counting test for topology {topology!r}")
