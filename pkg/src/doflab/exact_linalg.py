"""Dense linear algebra over exact rationals and over floats.

A matrix is a 2-D numpy array. The backend is read off the dtype: object
arrays hold :class:`fractions.Fraction` entries (``"rational"``), float64
arrays are ``"float"``.

Rational rank and null spaces come from sparse elimination on Fraction
rows, so they are exact and cheap on mostly-zero structured matrices.
Float rank counts singular values above

    tau = max(rows, cols) * EPS_SCALE * max|a_ij|,    EPS_SCALE = 2**-40.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "RATIONAL",
    "FLOAT",
    "EPS_SCALE",
    "backend_of",
    "to_rational",
    "to_float",
    "as_backend",
    "zeros",
    "identity",
    "tolerance",
    "rref",
    "rank",
    "null_space",
    "is_zero",
    "fmt_entry",
    "matrix_to_json",
    "matrix_from_json",
]

RATIONAL = "rational"
FLOAT = "float"
EPS_SCALE = 2.0**-40


def backend_of(a) -> str:
    return RATIONAL if np.asarray(a).dtype == object else FLOAT


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    # floats convert exactly (binary expansion), never by rounding
    return Fraction(float(x))


def to_rational(a) -> np.ndarray:
    """Exact object-array copy of ``a`` with Fraction entries."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    flat_in, flat_out = arr.reshape(-1), out.reshape(-1)
    for k in range(flat_in.size):
        flat_out[k] = _to_fraction(flat_in[k])
    return out


def to_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float)


def as_backend(a, backend: str) -> np.ndarray:
    if backend == RATIONAL:
        return a if backend_of(a) == RATIONAL else to_rational(a)
    if backend == FLOAT:
        return to_float(a)
    raise ValueError(f"unknown backend {backend!r}")


def zeros(rows: int, cols: int, backend: str = FLOAT) -> np.ndarray:
    if backend == RATIONAL:
        out = np.empty((rows, cols), dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros((rows, cols))


def identity(n: int, backend: str = FLOAT) -> np.ndarray:
    out = zeros(n, n, backend)
    for i in range(n):
        out[i, i] = Fraction(1) if backend == RATIONAL else 1.0
    return out


def tolerance(a) -> float:
    """The float rank threshold tau for ``a``."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return max(a.shape) * EPS_SCALE * float(np.max(np.abs(a)))


# ---------------------------------------------------------------- rational core


def _sparse_rows(a) -> list[dict[int, Fraction]]:
    rows = []
    for row in np.asarray(a, dtype=object):
        rows.append({c: f for c, x in enumerate(row) if (f := _to_fraction(x)) != 0})
    return rows


def _echelon(rows: list[dict[int, Fraction]]) -> dict[int, dict[int, Fraction]]:
    """Sparse exact forward elimination.

    Returns the pivot rows keyed by pivot column, each scaled to a leading 1.
    Rows are dicts col -> Fraction, so mostly-zero matrices stay cheap.
    """
    piv: dict[int, dict[int, Fraction]] = {}
    for r in rows:
        r = dict(r)
        while r:
            c = min(r)
            p = piv.get(c)
            if p is None:
                inv = 1 / r[c]
                piv[c] = {k: v * inv for k, v in r.items()}
                break
            f = r[c]
            for k, v in p.items():
                nv = r.get(k, 0) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    return piv


def rref(a) -> tuple[np.ndarray, list[int]]:
    """Exact reduced row echelon form and pivot columns of ``a``."""
    a = np.asarray(a, dtype=object)
    nrows, ncols = a.shape
    piv = _echelon(_sparse_rows(a))
    pivots = sorted(piv)
    # back substitution, last pivot first
    for c in reversed(pivots):
        p = piv[c]
        for c2 in pivots:
            if c2 >= c:
                break
            r = piv[c2]
            f = r.get(c)
            if f:
                for k, v in p.items():
                    nv = r.get(k, 0) - f * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
    out = zeros(nrows, ncols, RATIONAL)
    for i, c in enumerate(pivots):
        for k, v in piv[c].items():
            out[i, k] = v
    return out, pivots


# ---------------------------------------------------------------- public ops


def _svd(a: np.ndarray):
    return np.linalg.svd(a, full_matrices=True)


def rank(m) -> int:
    """Rank of ``m``; exact on the rational backend."""
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("rank expects a 2-D matrix")
    if 0 in m.shape:
        return 0
    if backend_of(m) == RATIONAL:
        return len(_echelon(_sparse_rows(m)))
    s = np.linalg.svd(m.astype(float), compute_uv=False)
    return int(np.sum(s > tolerance(m)))


def null_space(m) -> np.ndarray:
    """Columns spanning {x : m x = 0}.

    Rational: the RREF free-variable basis (one column per free variable,
    with a 1 in that variable's slot). Float: orthonormal columns.
    """
    m = np.asarray(m)
    nrows, ncols = m.shape
    if backend_of(m) == RATIONAL:
        if nrows == 0:
            return identity(ncols, RATIONAL)
        red, pivots = rref(m)
        free = [c for c in range(ncols) if c not in set(pivots)]
        out = zeros(ncols, len(free), RATIONAL)
        for j, f in enumerate(free):
            out[f, j] = Fraction(1)
            for i, pc in enumerate(pivots):
                out[pc, j] = -red[i, f]
        return out
    m = m.astype(float)
    if nrows == 0 or ncols == 0:
        return np.eye(ncols)
    _, s, vt = _svd(m)
    r = int(np.sum(s > tolerance(m)))
    return vt[r:].T.copy()


def is_zero(m, tol: float | None = None) -> bool:
    """All entries exactly zero (rational) or at most ``tol`` in magnitude."""
    m = np.asarray(m)
    if m.size == 0:
        return True
    if backend_of(m) == RATIONAL:
        return all(x == 0 for x in m.reshape(-1))
    return float(np.max(np.abs(m))) <= (0.0 if tol is None else tol)


# ---------------------------------------------------------------- serialization


def fmt_entry(x) -> str | float:
    """Rationals as "p/q" strings, floats rounded to 12 significant digits."""
    if isinstance(x, Fraction):
        return str(x)
    return float(f"{float(x):.12g}")


def matrix_to_json(m) -> dict:
    m = np.asarray(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "backend": backend_of(m),
        "entries": [[fmt_entry(x) for x in row] for row in m],
    }


def matrix_from_json(d: dict) -> np.ndarray:
    rows, cols = d["rows"], d["cols"]
    if d["backend"] == RATIONAL:
        out = zeros(rows, cols, RATIONAL)
        for i, row in enumerate(d["entries"]):
            for j, x in enumerate(row):
                out[i, j] = Fraction(x)
        return out
    return np.array(d["entries"], dtype=float).reshape(rows, cols)
