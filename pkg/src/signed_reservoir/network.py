"""Signed adjacency matrices: construction, edge flipping, spectral
normalization, input-coupling vectors, file I/O.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import CapacityError, ConstructionError, NormalizationError, SpecError
from .seeding import rng

CONNECTIVITY_RETRIES = 1000


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SignedNetwork:
    """Square adjacency matrix with zero diagonal.

    Integer networks have entries in {-1, 0, +1}. ``continuous`` networks
    (random uniform weights) carry real entries and skip that check.
    ``n_flipped`` and ``n_base`` record the edge-flip history so the flip
    fraction can be reported.
    """

    entries: np.ndarray
    continuous: bool = False
    n_flipped: int = 0
    n_base: int | None = None

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise SpecError("adjacency must be a non-empty square matrix")
        if np.any(np.diag(a) != 0):
            raise SpecError("adjacency diagonal must be zero")
        if self.continuous:
            a = a.astype(float)
        else:
            if not np.all(np.isin(a, (-1, 0, 1))):
                raise SpecError("integer adjacency entries must lie in {-1, 0, +1}")
            a = a.astype(np.int8)
        object.__setattr__(self, "entries", _frozen(a))
        if self.n_base is None:
            object.__setattr__(self, "n_base", self.n_nonzero)

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def n_positive(self) -> int:
        return int(np.count_nonzero(self.entries > 0))

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.entries < 0))

    @property
    def n_nonzero(self) -> int:
        return int(np.count_nonzero(self.entries))

    @property
    def n_zero(self) -> int:
        return self.M * (self.M - 1) - self.n_nonzero

    @property
    def epsilon_f(self) -> float:
        """Fraction of the base network's nonzero edges flipped to -1."""
        return self.n_flipped / self.n_base if self.n_base else 0.0

    def __eq__(self, other):
        if not isinstance(other, SignedNetwork):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash(self.entries.tobytes())

    def save(self, path: str | Path) -> None:
        """Write ``M n_pos n_neg`` then M rows of integers."""
        if self.continuous:
            raise SpecError("continuous networks are exported as CSV, not the integer format")
        lines = [f"{self.M} {self.n_positive} {self.n_negative}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.entries]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SignedNetwork":
        rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
        if not rows:
            raise SpecError(f"{path}: empty network file")
        M, n_pos, n_neg = (int(v) for v in rows[0])
        body = np.array([[int(v) for v in r] for r in rows[1:]], dtype=np.int64)
        if body.shape != (M, M):
            raise SpecError(f"{path}: expected {M}x{M} entries, got {body.shape}")
        net = cls(body)
        if net.n_positive != n_pos or net.n_negative != n_neg:
            raise SpecError(f"{path}: header counts do not match entries")
        return net


def weakly_connected(entries: np.ndarray) -> bool:
    """BFS on the undirected support graph."""
    support = (entries != 0) | (entries.T != 0)
    M = support.shape[0]
    seen = np.zeros(M, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for u in np.flatnonzero(support[v] & ~seen):
            seen[u] = True
            queue.append(int(u))
    return bool(seen.all())


def _offdiag_index(M: int) -> np.ndarray:
    flat = np.arange(M * M)
    return flat[flat // M != flat % M]


def make_base_network(M: int, n_edges: int, seed: int, *, core: int | None = None) -> SignedNetwork:
    """Random connected network with exactly ``n_edges`` entries equal to +1.

    With ``core`` set, the missing edges (zeros) are confined to a random
    subset of ``core`` nodes. The remaining nodes then see identical
    surroundings, which is how highly symmetric dense bases are produced.
    """
    if M <= 0 or n_edges <= 0:
        raise SpecError("M and n_edges must be positive")
    slots = M * (M - 1)
    if n_edges > slots:
        raise CapacityError(f"n_edges={n_edges} exceeds M(M-1)={slots}")
    g = rng(seed)
    offdiag = _offdiag_index(M)
    n_zero = slots - n_edges
    for _ in range(CONNECTIVITY_RETRIES):
        a = np.zeros(M * M, dtype=np.int8)
        if core is None:
            chosen = g.choice(offdiag, size=n_edges, replace=False)
            a[chosen] = 1
        else:
            if not 2 <= core <= M or core * (core - 1) < n_zero:
                raise SpecError(f"core={core} cannot hold {n_zero} zero entries")
            nodes = np.sort(g.choice(M, size=core, replace=False))
            ii, jj = np.meshgrid(nodes, nodes, indexing="ij")
            core_slots = (ii * M + jj)[ii != jj]
            a[offdiag] = 1
            a[g.choice(core_slots, size=n_zero, replace=False)] = 0
        a = a.reshape(M, M)
        if M == 1 or weakly_connected(a):
            return SignedNetwork(a)
    raise ConstructionError(
        f"no connected network with M={M}, n_edges={n_edges} after {CONNECTIVITY_RETRIES} attempts")


def flip_edges(net: SignedNetwork, n_flip: int, seed: int) -> SignedNetwork:
    """Flip ``n_flip`` randomly chosen +1 entries to -1 (new network returned)."""
    if net.continuous:
        raise SpecError("cannot flip edges of a continuous-valued network")
    if n_flip < 0:
        raise SpecError("n_flip must be non-negative")
    positive = np.flatnonzero(net.entries.ravel() > 0)
    if n_flip > positive.size:
        raise CapacityError(f"cannot flip {n_flip} edges, only {positive.size} are +1")
    a = net.entries.ravel().copy()
    if n_flip:
        a[rng(seed).choice(positive, size=n_flip, replace=False)] = -1
    return SignedNetwork(a.reshape(net.M, net.M), n_flipped=net.n_flipped + n_flip, n_base=net.n_base)


def flip_fraction_to_count(net: SignedNetwork, epsilon_f: float) -> int:
    if not 0.0 <= epsilon_f <= 1.0:
        raise SpecError(f"flip fraction {epsilon_f} outside [0, 1]")
    return int(round(epsilon_f * net.n_nonzero))


def make_random_network(M: int, density: float, seed: int) -> SignedNetwork:
    """Off-diagonal entries nonzero with probability ``density``, weights U[-1, 1]."""
    if not 0.0 < density <= 1.0:
        raise SpecError("density must lie in (0, 1]")
    g = rng(seed)
    mask = g.random((M, M)) < density
    np.fill_diagonal(mask, False)
    weights = g.uniform(-1.0, 1.0, (M, M))
    return SignedNetwork(np.where(mask, weights, 0.0), continuous=True)


def sparsity(net: SignedNetwork) -> float:
    """Fraction of off-diagonal entries that are nonzero."""
    M = net.M
    return net.n_nonzero / (M * (M - 1)) if M > 1 else 0.0


@dataclass(frozen=True, eq=False)
class NormalizedAdjacency:
    entries: np.ndarray
    scale: float
    target: float
    mode: str = "real_part"

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(np.asarray(self.entries, dtype=float)))

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    def to_csv(self, path: str | Path) -> None:
        lines = (",".join(repr(float(v)) for v in row) for row in self.entries)
        Path(path).write_text("\n".join(lines) + "\n")


def spectral_measure(entries: np.ndarray, mode: str = "real_part") -> float:
    """max |Re(lambda)| (``real_part``) or max |lambda| (``modulus``)."""
    eig = np.linalg.eigvals(np.asarray(entries, dtype=float))
    if mode == "real_part":
        return float(np.max(np.abs(eig.real)))
    if mode == "modulus":
        return float(np.max(np.abs(eig)))
    raise SpecError(f"unknown normalization mode {mode!r}")


def normalize_spectral(net: SignedNetwork | np.ndarray, target: float = 0.5,
                       mode: str = "real_part") -> NormalizedAdjacency:
    """Rescale so the largest |Re(eigenvalue)| equals ``target``.

    ``mode="modulus"`` normalizes the spectral radius instead.
    """
    a = np.asarray(net.entries if isinstance(net, SignedNetwork) else net, dtype=float)
    if not target > 0:
        raise SpecError("normalization target must be positive")
    rho = spectral_measure(a, mode)
    if rho < 1e-12:
        raise NormalizationError("all eigenvalue real parts vanish; normalization undefined")
    scale = target / rho
    return NormalizedAdjacency(a * scale, scale, target, mode)


class InputKind(str, Enum):
    ALTERNATING = "alternating"
    ALL_ONES = "all-ones"
    UNIFORM_RANDOM = "uniform-random"


@dataclass(frozen=True, eq=False)
class InputVector:
    entries: np.ndarray
    kind: InputKind

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(np.asarray(self.entries, dtype=float)))

    @property
    def M(self) -> int:
        return self.entries.size


def make_input_vector(M: int, kind: InputKind | str = InputKind.ALTERNATING, seed: int = 0) -> InputVector:
    """Input coupling vector: (+1, -1, +1, ...), all +1, or i.i.d. U[-1, 1]."""
    kind = InputKind(kind)
    if M <= 0:
        raise SpecError("M must be positive")
    if kind is InputKind.ALTERNATING:
        w = np.where(np.arange(M) % 2 == 0, 1.0, -1.0)
    elif kind is InputKind.ALL_ONES:
        w = np.ones(M)
    else:
        w = rng(seed).uniform(-1.0, 1.0, M)
    return InputVector(w, kind)
