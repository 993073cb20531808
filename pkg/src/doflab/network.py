"""Network topologies and channel realizations.

Users are numbered 1..K. ``channels[(j, i)]`` is the M_R x M_T matrix from
transmitter i to receiver j. Three topologies are supported:

* ``full_ic``: every receiver hears every transmitter.
* ``many_to_one``: only receiver 1 hears interference (from 2..K).
* ``x_channel``: every transmitter has a message for every receiver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import exact_linalg as xl
from ._rng import make_rng

__all__ = [
    "FULL_IC",
    "MANY_TO_ONE",
    "X_CHANNEL",
    "TOPOLOGIES",
    "Network",
    "RegimePoint",
    "links",
    "generate_generic",
    "structured_channels_half",
    "structured_channels_p3",
    "reciprocal",
    "half_block_sizes",
    "p3_block_sizes",
    "is_p3_ratio",
]

FULL_IC = "full_ic"
MANY_TO_ONE = "many_to_one"
X_CHANNEL = "x_channel"
TOPOLOGIES = (FULL_IC, MANY_TO_ONE, X_CHANNEL)

# rational draws are rounded to this many fractional bits
RATIONAL_BITS = 16


def links(topology: str, K: int) -> list[tuple[int, int]]:
    """Present (rx, tx) pairs, sorted."""
    users = range(1, K + 1)
    if topology in (FULL_IC, X_CHANNEL):
        return [(j, i) for j in users for i in users]
    if topology == MANY_TO_ONE:
        return sorted({(1, i) for i in users} | {(j, j) for j in users})
    raise ValueError(f"unknown topology {topology!r}")


@dataclass(frozen=True)
class Network:
    topology: str
    K: int
    M_T: int
    M_R: int
    channels: Mapping[tuple[int, int], np.ndarray]
    seed: int | None = None
    label: str = "generic"
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        expected = set(links(self.topology, self.K))
        if set(self.channels) != expected:
            raise ValueError("channel map does not match the topology's link set")
        for key, h in self.channels.items():
            if h.shape != (self.M_R, self.M_T):
                raise ValueError(f"link {key} has shape {h.shape}, expected {(self.M_R, self.M_T)}")
            h.setflags(write=False)
        object.__setattr__(self, "channels", MappingProxyType(dict(self.channels)))

    @property
    def backend(self) -> str:
        return xl.backend_of(next(iter(self.channels.values())))

    def H(self, j: int, i: int) -> np.ndarray:
        try:
            return self.channels[(j, i)]
        except KeyError:
            raise KeyError(f"no link from tx {i} to rx {j} in {self.topology}") from None

    def has_link(self, j: int, i: int) -> bool:
        return (j, i) in self.channels

    def unknown_txs(self, j: int) -> list[int]:
        """Transmitters whose signals a receiver must resolve beyond its own.

        For interference channels this is the interferer set; in the X channel
        a receiver decodes one message from every transmitter, so all of them
        count.
        """
        if self.topology == X_CHANNEL:
            return list(range(1, self.K + 1))
        return [i for i in range(1, self.K + 1) if i != j and self.has_link(j, i)]

    @property
    def message_count(self) -> int:
        return self.K * self.K if self.topology == X_CHANNEL else self.K

    @property
    def per_tx_rate(self) -> int:
        """Messages carried by one transmit vector (each of rate R)."""
        return self.K if self.topology == X_CHANNEL else 1

    def to_json(self) -> dict:
        return {
            "topology": self.topology,
            "K": self.K,
            "M_T": self.M_T,
            "M_R": self.M_R,
            "seed": self.seed,
            "label": self.label,
            "links": [
                {"rx": j, "tx": i, "matrix": xl.matrix_to_json(self.channels[(j, i)])}
                for (j, i) in sorted(self.channels)
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Network":
        ch = {(l["rx"], l["tx"]): xl.matrix_from_json(l["matrix"]) for l in d["links"]}
        return cls(d["topology"], d["K"], d["M_T"], d["M_R"], ch, d.get("seed"), d.get("label", "generic"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        if (self.topology, self.K, self.M_T, self.M_R) != (other.topology, other.K, other.M_T, other.M_R):
            return False
        return all(
            np.array_equal(np.asarray(self.channels[k]), np.asarray(other.channels[k])) for k in self.channels
        )

    __hash__ = None


@dataclass(frozen=True)
class RegimePoint:
    K: int
    M: int
    N: int

    @classmethod
    def of(cls, K: int, M_T: int, M_R: int) -> "RegimePoint":
        return cls(K, min(M_T, M_R), max(M_T, M_R))

    @property
    def gamma(self) -> Fraction:
        return Fraction(self.M, self.N)


# ---------------------------------------------------------------- generic draws


def _round(a: np.ndarray) -> np.ndarray:
    scale = 1 << RATIONAL_BITS
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = Fraction(int(round(float(x) * scale)), scale)
    return out


def _draw(seed: int, shape, *path, backend: str = xl.FLOAT) -> np.ndarray:
    g = make_rng(seed, *path).standard_normal(shape)
    return _round(g) if backend == xl.RATIONAL else g


def _check_sizes(K: int, M_T: int, M_R: int):
    if K < 2:
        raise ValueError(f"need K >= 2 users, got {K}")
    if M_T < 1 or M_R < 1:
        raise ValueError(f"antenna counts must be positive, got ({M_T}, {M_R})")


def generate_generic(topology: str, K: int, M_T: int, M_R: int, seed: int, backend: str = xl.FLOAT) -> Network:
    """Fill every present link with i.i.d. standard normals from ``seed``.

    Each link has its own stream, keyed by (rx, tx), so adding or removing
    links never changes the others.
    """
    _check_sizes(K, M_T, M_R)
    ch = {
        (j, i): _draw(seed, (M_R, M_T), "network", topology, j, i, backend=backend)
        for (j, i) in links(topology, K)
    }
    return Network(topology, K, M_T, M_R, ch, seed=seed, label="generic")


# ---------------------------------------------------------------- structured 0/1 families


def _ratio_in_half(M: int, N: int) -> bool:
    return Fraction(2, 5) <= Fraction(M, N) < Fraction(1, 2)


def is_p3_ratio(M: int, N: int) -> int | None:
    """Return c if M/N = (2c-1)/(5c-2) for an integer c >= 2, else None."""
    g = gcd(M, N)
    m, n = M // g, N // g
    # (2c-1)/(5c-2) is already reduced: gcd(2c-1, 5c-2) divides 5(2c-1)-2(5c-2) = -1
    if (m + 1) % 2:
        return None
    c = (m + 1) // 2
    return c if c >= 2 and n == 5 * c - 2 else None


def half_block_sizes(M: int, N: int) -> dict:
    """Block sizes of the cyclic-shift channel for M/N in [2/5, 1/2)."""
    a = gcd(M, N)
    sizes = {
        "a": a,
        "clean": N - 2 * M,
        "mid": N - 2 * M - a,
        "tail": 5 * M - 2 * N + a,
        "genie": 3 * M - N,
    }
    bad = {k: v for k, v in sizes.items() if v < 0}
    if bad:
        raise ValueError(f"negative block size(s) {bad} for (M, N) = ({M}, {N})")
    return sizes


def p3_block_sizes(M: int, N: int) -> dict:
    a = gcd(M, N)
    if a != 2 * N - 5 * M:
        raise ValueError(f"gcd({M}, {N}) = {a} differs from 2N - 5M = {2 * N - 5 * M}")
    sizes = {"a": a, "clean": N - 2 * M, "mid": N - 2 * M - a, "genie": 3 * M - N}
    bad = {k: v for k, v in sizes.items() if v < 0}
    if bad:
        raise ValueError(f"negative block size(s) {bad} for (M, N) = ({M}, {N})")
    return sizes


def _stack(blocks: list[tuple[int, list[tuple[int, str]]]], col_widths: list[int]) -> np.ndarray:
    """Build a 0/1 matrix from row blocks.

    Each block is ``(height, cells)`` where ``cells`` lists, per column group,
    either "I" (identity, height must equal the group width) or "0".
    """
    ncols = sum(col_widths)
    offs = np.cumsum([0] + col_widths[:-1])
    rows = []
    for height, cells in blocks:
        blk = np.zeros((height, ncols), dtype=int)
        for g, kind in enumerate(cells):
            if kind == "I" and height:
                if height != col_widths[g]:
                    raise ValueError("identity block of mismatched size")
                blk[:, offs[g] : offs[g] + height] = np.eye(height, dtype=int)
        rows.append(blk)
    return np.vstack(rows) if rows else np.zeros((0, ncols), dtype=int)


def _cyclic_network(M: int, N: int, back: np.ndarray, seed: int, label: str, meta: dict) -> Network:
    K = 4
    fwd1 = np.vstack([np.eye(M, dtype=int), np.zeros((N - M, M), dtype=int)])
    fwd2 = np.vstack([np.zeros((M, M), dtype=int), np.eye(M, dtype=int), np.zeros((N - 2 * M, M), dtype=int)])
    ch = {}
    for k in range(1, K + 1):
        nxt, nxt2, prv = k % K + 1, (k + 1) % K + 1, (k - 2) % K + 1
        ch[(k, nxt)] = xl.to_rational(fwd1)
        ch[(k, nxt2)] = xl.to_rational(fwd2)
        ch[(k, prv)] = xl.to_rational(back)
        ch[(k, k)] = _draw(seed, (N, M), "network", label, k, k, backend=xl.RATIONAL)
    return Network(FULL_IC, K, M, N, ch, seed=seed, label=label, meta=meta)


def structured_channels_half(M: int, N: int, seed: int = 0) -> Network:
    """0/1 channels for M/N in [2/5, 1/2) with K = 4.

    H[k,k+1] = [I; 0; 0], H[k,k+2] = [0; I; 0] and H[k,k-1] is the block
    matrix below, with column groups of widths (N-2M, N-2M-a, 5M-2N+a) and
    a = gcd(M, N). Desired links are generic rationals drawn from ``seed``.
    """
    if not _ratio_in_half(M, N):
        raise ValueError(f"M/N = {Fraction(M, N)} is outside [2/5, 1/2)")
    s = half_block_sizes(M, N)
    widths = [s["clean"], s["mid"], s["tail"]]
    back = _stack(
        [
            (s["mid"], ["0", "0", "0"]),
            (s["tail"], ["0", "0", "I"]),
            (s["mid"], ["0", "I", "0"]),
            (s["a"], ["0", "0", "0"]),
            (s["mid"], ["0", "I", "0"]),
            (s["tail"], ["0", "0", "I"]),
            (s["clean"], ["0", "0", "0"]),
            (s["clean"], ["I", "0", "0"]),
        ],
        widths,
    )
    assert back.shape == (N, M)
    return _cyclic_network(M, N, back, seed, "structured_half", s)


def structured_channels_p3(M: int, N: int, seed: int = 0) -> Network:
    """0/1 channels for M/N = (2c-1)/(5c-2), c >= 2, with K = 4.

    H[k,k-1] has column groups of widths (N-2M, N-2M-a), a = gcd(M, N) = 2N-5M.
    """
    c = is_p3_ratio(M, N)
    if c is None:
        raise ValueError(f"M/N = {Fraction(M, N)} is not of the form (2c-1)/(5c-2) with c >= 2")
    s = p3_block_sizes(M, N)
    widths = [s["clean"], s["mid"]]
    back = _stack(
        [
            (s["genie"], ["0", "0"]),
            (s["mid"], ["0", "I"]),
            (s["a"], ["0", "0"]),
            (s["mid"], ["0", "I"]),
            (s["clean"], ["0", "0"]),
            (s["clean"], ["I", "0"]),
        ],
        widths,
    )
    assert back.shape == (N, M)
    return _cyclic_network(M, N, back, seed, "structured_p3", dict(s, c=c))


def reciprocal(net: Network) -> Network:
    """Swap the roles of transmitters and receivers: H'[j,i] = H[i,j]^T."""
    if net.topology != FULL_IC:
        raise ValueError(f"reciprocal is defined for full_ic networks, not {net.topology}")
    ch = {(j, i): np.asarray(net.H(i, j)).T.copy() for (j, i) in net.channels}
    return Network(net.topology, net.K, net.M_R, net.M_T, ch, seed=net.seed, label=net.label, meta=net.meta)
