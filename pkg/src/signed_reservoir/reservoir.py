"""Reservoir dynamics and the state matrix.

Two node families:

* ODE nodes (``polynomial`` and ``linear``)::

      dr_i/dt = lam * (p1 r_i + p2 r_i^2 + p3 r_i^3 + sum_j A_ij r_j + w_i s)

  integrated with classical RK4, the input held constant across each step.
* ``leaky_tanh`` map nodes::

      r_i(n+1) = alpha r_i(n) + (1 - alpha) tanh(sum_j A_ij r_j(n) + w_i s(n) + 1)

Row ``n`` of the state matrix is the node state after input sample ``n`` has
been consumed; the first ``transient`` rows are dropped and a bias column of
ones is appended.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numba
import numpy as np

from .errors import InputLengthError, ReservoirInstabilityError, SpecError
from .network import InputVector, NormalizedAdjacency
from .seeding import rng
from .signals import TimeSeries, standardize


class NodeKind(str, Enum):
    POLYNOMIAL = "polynomial"
    LINEAR = "linear"
    LEAKY_TANH = "leaky_tanh"


@dataclass(frozen=True)
class ReservoirConfig:
    node_kind: NodeKind = NodeKind.POLYNOMIAL
    M: int = 100
    lam: float = 1.0
    p1: float = -3.0
    p2: float = 1.0
    p3: float = -1.0
    alpha: float = 0.35
    dt: float = 0.1
    # RK4 steps per input sample; the sample is held across all of them
    substeps: int = 1
    transient: int = 2000
    n_record: int = 10000

    def __post_init__(self):
        kind = NodeKind(self.node_kind)
        object.__setattr__(self, "node_kind", kind)
        if kind is NodeKind.LINEAR:
            object.__setattr__(self, "p2", 0.0)
            object.__setattr__(self, "p3", 0.0)
        if self.M <= 0 or self.n_record <= 0 or self.transient < 0 or self.substeps < 1:
            raise SpecError("M, n_record, substeps must be positive and transient non-negative")
        if not 0.0 <= self.alpha <= 1.0:
            raise SpecError("alpha must lie in [0, 1]")
        if not self.dt > 0:
            raise SpecError("dt must be positive")

    @property
    def n_total(self) -> int:
        return self.transient + self.n_record

    def with_(self, **changes) -> "ReservoirConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class StateMatrix:
    """N x (M+1) node time series with a trailing bias column of ones."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] < 2:
            raise SpecError("state matrix must be N x (M+1) with M >= 1")
        if not np.all(v[:, -1] == 1.0):
            raise SpecError("last column of the state matrix must be all ones")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_nodes(cls, nodes: np.ndarray) -> "StateMatrix":
        nodes = np.asarray(nodes, dtype=float)
        return cls(np.hstack([nodes, np.ones((nodes.shape[0], 1))]))

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def M(self) -> int:
        return self.values.shape[1] - 1

    @property
    def nodes(self) -> np.ndarray:
        return self.values[:, :-1]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(range(self.values.shape[1]))
            for row in self.values:
                w.writerow(repr(float(x)) for x in row)


@numba.njit(cache=True)
def _ode_rhs(r, A, drive, lam, p1, p2, p3):
    return lam * (p1 * r + p2 * r * r + p3 * r * r * r + A @ r + drive)


@numba.njit(cache=True)
def _run_ode(A, w, s, r0, lam, p1, p2, p3, h, substeps, transient, out):
    r = r0.copy()
    n_total = s.shape[0]
    for n in range(n_total):
        drive = w * s[n]
        for _ in range(substeps):
            k1 = _ode_rhs(r, A, drive, lam, p1, p2, p3)
            k2 = _ode_rhs(r + 0.5 * h * k1, A, drive, lam, p1, p2, p3)
            k3 = _ode_rhs(r + 0.5 * h * k2, A, drive, lam, p1, p2, p3)
            k4 = _ode_rhs(r + h * k3, A, drive, lam, p1, p2, p3)
            r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for i in range(r.shape[0]):
            if not np.isfinite(r[i]):
                return n
        if n >= transient:
            out[n - transient, :] = r
    return -1


@numba.njit(cache=True)
def _run_tanh(A, w, s, r0, alpha, transient, out):
    r = r0.copy()
    n_total = s.shape[0]
    for n in range(n_total):
        r = alpha * r + (1.0 - alpha) * np.tanh(A @ r + w * s[n] + 1.0)
        for i in range(r.shape[0]):
            if not np.isfinite(r[i]):
                return n
        if n >= transient:
            out[n - transient, :] = r
    return -1


def _integrate(adj: np.ndarray, w: np.ndarray, s: np.ndarray, cfg: ReservoirConfig,
               r0: np.ndarray, transient: int, n_record: int) -> tuple[np.ndarray, int]:
    out = np.empty((n_record, adj.shape[0]))
    A = np.ascontiguousarray(adj, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    s = np.ascontiguousarray(s[: transient + n_record], dtype=float)
    r0 = np.ascontiguousarray(r0, dtype=float)
    if cfg.node_kind is NodeKind.LEAKY_TANH:
        bad = _run_tanh(A, w, s, r0, cfg.alpha, transient, out)
    else:
        h = cfg.dt / cfg.substeps
        bad = _run_ode(A, w, s, r0, cfg.lam, cfg.p1, cfg.p2, cfg.p3, h, cfg.substeps, transient, out)
    return out, int(bad)


def _check_shapes(adj, w, cfg):
    M = adj.shape[0]
    if adj.shape != (M, M) or w.shape != (M,):
        raise SpecError(f"adjacency {adj.shape} and input vector {w.shape} disagree")
    if M != cfg.M:
        raise SpecError(f"config expects M={cfg.M}, network has {M} nodes")


def run_reservoir(adj: NormalizedAdjacency | np.ndarray, w: InputVector | np.ndarray,
                  s: TimeSeries | np.ndarray, cfg: ReservoirConfig, *,
                  standardize_input: bool = True, context: dict | None = None) -> StateMatrix:
    """Drive the reservoir from r(0) = 0 and return the state matrix.

    ``s`` is standardized first unless ``standardize_input`` is False, which
    is for drives that are already standardized or must stay raw.
    Raises ``ReservoirInstabilityError`` if any node leaves the finite range.
    """
    A = np.asarray(adj.entries if isinstance(adj, NormalizedAdjacency) else adj, dtype=float)
    wv = np.asarray(w.entries if isinstance(w, InputVector) else w, dtype=float)
    _check_shapes(A, wv, cfg)
    if len(s) < cfg.n_total:
        raise InputLengthError(f"input has {len(s)} samples, need {cfg.n_total}")
    if standardize_input:
        sv = standardize(s).samples
    else:
        sv = np.asarray(s.samples if isinstance(s, TimeSeries) else s, dtype=float)
    nodes, bad = _integrate(A, wv, sv, cfg, np.zeros(cfg.M), cfg.transient, cfg.n_record)
    if bad >= 0:
        raise ReservoirInstabilityError(f"reservoir state non-finite at step {bad}", bad, context)
    return StateMatrix.from_nodes(nodes)


def stability_probe(adj: NormalizedAdjacency | np.ndarray, w: InputVector | np.ndarray,
                    cfg: ReservoirConfig, seed: int = 0, tol: float = 1e-6) -> bool:
    """True if the undriven reservoir settles to a stable fixed point.

    Runs with ``s = 0`` for ``cfg.transient`` steps from r = 0 and from a
    small random perturbation of it; stable means the two runs end within
    ``tol`` of each other and the reference has stopped moving.
    """
    A = np.asarray(adj.entries if isinstance(adj, NormalizedAdjacency) else adj, dtype=float)
    wv = np.asarray(w.entries if isinstance(w, InputVector) else w, dtype=float)
    _check_shapes(A, wv, cfg)
    n = max(cfg.transient, 2)
    zero = np.zeros(n)
    r_pert = 1e-3 * rng(seed).standard_normal(cfg.M)
    ref, bad_ref = _integrate(A, wv, zero, cfg, np.zeros(cfg.M), n - 2, 2)
    per, bad_per = _integrate(A, wv, zero, cfg, r_pert, n - 2, 2)
    if bad_ref >= 0 or bad_per >= 0:
        return False
    settled = np.max(np.abs(ref[1] - ref[0])) < tol
    return bool(settled and np.linalg.norm(per[1] - ref[1]) < tol)
