"""Subspace calculus: span, complement, intersection, set-minus and friends.

Subspaces live in R^m (the complex case of the underlying model is handled
over the reals, which is enough for every generic rank statement used here).
A :class:`Subspace` stores a canonical basis: the transposed nonzero rows of
the RREF on the rational backend, orthonormal columns on the float backend.
Equality is span equality, so the chosen basis never matters.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import exact_linalg as xl
from ._rng import make_rng

__all__ = [
    "Subspace",
    "from_columns",
    "from_matrix",
    "complement",
    "intersect",
    "subtract",
    "union_span",
    "contains",
    "map_through",
    "random_generic",
    "full_space",
    "zero_space",
    "collinear",
]


def _canonical(ambient: int, cols: np.ndarray, backend: str) -> np.ndarray:
    """Canonical basis (ambient x dim) of the column span of ``cols``."""
    if cols.shape[1] == 0:
        return xl.zeros(ambient, 0, backend)
    if backend == xl.RATIONAL:
        red, pivots = xl.rref(cols.T)
        return red[: len(pivots)].T.copy()
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    r = int(np.sum(s > xl.tolerance(cols)))
    return u[:, :r].copy()


class Subspace:
    """A subspace of R^ambient_dim held by a canonical basis matrix."""

    __slots__ = ("ambient_dim", "basis", "backend")

    def __init__(self, ambient_dim: int, basis: np.ndarray, backend: str):
        object.__setattr__(self, "ambient_dim", int(ambient_dim))
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "backend", backend)
        basis.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"Subspace(ambient={self.ambient_dim}, dim={self.dim}, backend={self.backend})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return contains(self, other)

    __hash__ = None  # span equality is not hashable

    def as_backend(self, backend: str) -> "Subspace":
        if backend == self.backend:
            return self
        return from_matrix(self.ambient_dim, xl.as_backend(self.basis, backend), backend)

    def rows(self) -> np.ndarray:
        """Basis vectors as rows (dim x ambient), handy for stacking genies."""
        return self.basis.T

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient_dim,
            "basis": [[xl.fmt_entry(x) for x in row] for row in self.basis],
            "backend": self.backend,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Subspace":
        m, backend = int(d["ambient"]), d["backend"]
        rows = d["basis"]
        k = len(rows[0]) if rows else 0
        arr = xl.zeros(m, k, backend)
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                arr[i, j] = Fraction(x) if backend == xl.RATIONAL else float(x)
        return from_matrix(m, arr, backend)


# ---------------------------------------------------------------- constructors


def _infer_backend(arr: np.ndarray) -> str:
    if arr.dtype == object:
        return xl.RATIONAL
    if np.issubdtype(arr.dtype, np.integer) or np.issubdtype(arr.dtype, np.bool_):
        return xl.RATIONAL
    return xl.FLOAT


def from_matrix(ambient_dim: int, basis, backend: str | None = None) -> Subspace:
    """Column span of an ``ambient_dim x k`` matrix."""
    arr = np.asarray(basis)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.size == 0:
        arr = arr.reshape(ambient_dim, 0)
    if arr.shape[0] != ambient_dim:
        raise ValueError(f"basis has {arr.shape[0]} rows, ambient dimension is {ambient_dim}")
    backend = backend or _infer_backend(arr)
    arr = xl.as_backend(arr, backend)
    return Subspace(ambient_dim, _canonical(ambient_dim, arr, backend), backend)


def from_columns(ambient_dim: int, vectors: Iterable[Sequence], backend: str | None = None) -> Subspace:
    """Span of the given vectors, each of length ``ambient_dim``.

    Integer or Fraction entries default to the rational backend, floats to
    the float backend.
    """
    vecs = [np.asarray(v) for v in vectors]
    for v in vecs:
        if v.shape != (ambient_dim,):
            raise ValueError(f"vector of shape {v.shape} in ambient dimension {ambient_dim}")
    if not vecs:
        return zero_space(ambient_dim, backend or xl.RATIONAL)
    if backend is None:
        backend = xl.FLOAT if any(_infer_backend(v) == xl.FLOAT for v in vecs) else xl.RATIONAL
    cols = np.column_stack([xl.as_backend(v.reshape(-1, 1), backend) for v in vecs])
    return from_matrix(ambient_dim, cols, backend)


def full_space(ambient_dim: int, backend: str = xl.RATIONAL) -> Subspace:
    return Subspace(ambient_dim, xl.identity(ambient_dim, backend), backend)


def zero_space(ambient_dim: int, backend: str = xl.RATIONAL) -> Subspace:
    return Subspace(ambient_dim, xl.zeros(ambient_dim, 0, backend), backend)


def random_generic(ambient_dim: int, dim: int, seed: int, backend: str = xl.FLOAT) -> Subspace:
    """Span of ``dim`` i.i.d. standard-normal vectors from the seeded PCG64 stream.

    On the rational backend the draws are rounded to multiples of 2**-16.
    """
    if dim > ambient_dim or dim < 0:
        raise ValueError(f"cannot draw a {dim}-dim subspace of R^{ambient_dim}")
    g = make_rng(seed, "subspace.random_generic", ambient_dim, dim).standard_normal((ambient_dim, dim))
    if backend == xl.RATIONAL:
        g = _round_rational(g)
    return from_matrix(ambient_dim, g, backend)


def _round_rational(a: np.ndarray, bits: int = 16) -> np.ndarray:
    scale = 1 << bits
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = Fraction(int(round(float(x) * scale)), scale)
    return out


# ---------------------------------------------------------------- operations


def _common(a: Subspace, b: Subspace) -> tuple[Subspace, Subspace, str]:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(f"ambient mismatch: {a.ambient_dim} vs {b.ambient_dim}")
    backend = a.backend if a.backend == b.backend else xl.FLOAT
    return a.as_backend(backend), b.as_backend(backend), backend


def complement(s: Subspace) -> Subspace:
    """Orthogonal complement of ``s``."""
    if s.dim == 0:
        return full_space(s.ambient_dim, s.backend)
    return from_matrix(s.ambient_dim, xl.null_space(s.basis.T), s.backend)


def union_span(a: Subspace, b: Subspace) -> Subspace:
    a, b, backend = _common(a, b)
    return from_matrix(a.ambient_dim, np.hstack([a.basis, b.basis]), backend)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """a ∩ b.

    Rational: the complement of the span of both complements. Float: the
    null space of [A | -B] mapped back through A.
    """
    a, b, backend = _common(a, b)
    if a.dim == 0 or b.dim == 0:
        return zero_space(a.ambient_dim, backend)
    if backend == xl.RATIONAL:
        return complement(union_span(complement(a), complement(b)))
    ns = xl.null_space(np.hstack([a.basis, -b.basis]))
    return from_matrix(a.ambient_dim, a.basis @ ns[: a.dim], backend)


def subtract(a: Subspace, b: Subspace) -> Subspace:
    """a \\ b: the part of ``a`` orthogonal to a ∩ b."""
    a, b, _ = _common(a, b)
    return intersect(a, complement(intersect(a, b)))


def contains(a: Subspace, b: Subspace) -> bool:
    """True iff ``b`` is a subspace of ``a``."""
    a, b, _ = _common(a, b)
    if b.dim == 0:
        return True
    return xl.rank(np.hstack([a.basis, b.basis])) == a.dim


def map_through(s: Subspace, m) -> Subspace:
    """span(m · basis(s)) in R^rows(m)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[1] != s.ambient_dim:
        raise ValueError(f"cannot map R^{s.ambient_dim} through a {m.shape} matrix")
    backend = s.backend if xl.backend_of(m) == s.backend else xl.FLOAT
    m = xl.as_backend(m, backend)
    return from_matrix(m.shape[0], m @ xl.as_backend(s.basis, backend), backend)


def collinear(u, v, tol: float = 1e-9) -> bool:
    """Unit-normalized u and v agree up to sign within ``tol``."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return nu == nv
    u, v = u / nu, v / nv
    return min(np.linalg.norm(u - v), np.linalg.norm(u + v)) <= tol
