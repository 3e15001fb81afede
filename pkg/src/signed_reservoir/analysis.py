"""Covariance rank of the state matrix and linear memory capacity."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import SpecError
from .network import InputVector, NormalizedAdjacency
from .readout import DEFAULT_RIDGE, ridge_solve, ridge_svd
from .reservoir import ReservoirConfig, StateMatrix, run_reservoir
from .signals import uniform_drive

MC_FLOOR = 1e-4
MC_FLOOR_RUN = 5


class RankPolicy(str, Enum):
    ULP_SCALED = "ulp_scaled"
    FIXED_RELATIVE = "fixed_relative_1e-6"


@dataclass
class RankReport:
    gamma: int
    tolerance_used: float
    singular_values: np.ndarray          # of Theta = X^T X, descending
    policy: RankPolicy
    omega_singular_values: np.ndarray = field(default=None)  # of X itself
    include_bias: bool = False

    def to_json(self) -> str:
        return json.dumps({
            "gamma": self.gamma,
            "tolerance_used": repr(float(self.tolerance_used)),
            "policy": self.policy.value,
            "include_bias": self.include_bias,
            "singular_values": [repr(float(v)) for v in self.singular_values],
            "omega_singular_values": [repr(float(v)) for v in self.omega_singular_values],
        })


def _rank_matrix(omega, include_bias: bool) -> np.ndarray:
    if isinstance(omega, StateMatrix):
        return omega.values if include_bias else omega.nodes
    return np.asarray(omega, dtype=float)


def _spectra(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = X.T @ X
    return np.linalg.svd(theta, compute_uv=False), np.linalg.svd(X, compute_uv=False)


def _report(policy: RankPolicy, X: np.ndarray, sv_theta: np.ndarray, sv_x: np.ndarray,
            include_bias: bool, relative_threshold: float) -> RankReport:
    if policy is RankPolicy.ULP_SCALED:
        tol = max(X.shape) * float(np.spacing(sv_x[0])) if sv_x.size else 0.0
    else:
        tol = relative_threshold * float(sv_theta[0]) if sv_theta.size else 0.0
    gamma = int(np.count_nonzero(sv_theta > tol))
    return RankReport(gamma, tol, sv_theta, policy, sv_x, include_bias)


def covariance_rank(omega: StateMatrix | np.ndarray, policy: RankPolicy | str = RankPolicy.ULP_SCALED,
                    *, include_bias: bool = False, relative_threshold: float = 1e-6) -> RankReport:
    """Rank of Theta = X^T X where X is the node block of the state matrix.

    ``ulp_scaled`` counts singular values of Theta above
    ``max(X.shape) * spacing(sigma_max(X))``; ``fixed_relative_1e-6`` counts
    those above ``relative_threshold * sigma_max(Theta)``. Pass
    ``include_bias=True`` to keep the constant column in X. Raw arrays are
    used as given.
    """
    X = _rank_matrix(omega, include_bias)
    sv_theta, sv_x = _spectra(X)
    return _report(RankPolicy(policy), X, sv_theta, sv_x, include_bias, relative_threshold)


def covariance_ranks(omega: StateMatrix | np.ndarray, *, include_bias: bool = False) -> dict[RankPolicy, RankReport]:
    """Both policies from one pair of decompositions."""
    X = _rank_matrix(omega, include_bias)
    sv_theta, sv_x = _spectra(X)
    return {p: _report(p, X, sv_theta, sv_x, include_bias, 1e-6) for p in RankPolicy}


@dataclass
class MemoryReport:
    mc_k: np.ndarray
    mc_total: float
    k_max: int
    truncation_reason: str

    def to_json(self) -> str:
        return json.dumps({"mc_k": [repr(float(v)) for v in self.mc_k],
                           "mc_total": repr(float(self.mc_total)), "k_max": self.k_max,
                           "truncation_reason": self.truncation_reason})


def squared_correlation(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    den = float(np.dot(a, a) * np.dot(b, b))
    if den == 0.0:
        return 0.0
    return float(np.dot(a, b) ** 2 / den)


def memory_curve(omega: StateMatrix | np.ndarray, drive: np.ndarray, first_row: int, k_max: int,
                 ridge_k: float = DEFAULT_RIDGE) -> MemoryReport:
    """Memory function of an already computed state matrix.

    Row ``n`` of ``omega`` must correspond to input index ``first_row + n``
    of ``drive``. For each delay k the readout is fit to s(n - k) and the
    capacity is the squared correlation between fit and target.
    """
    X = omega.values if isinstance(omega, StateMatrix) else np.asarray(omega, dtype=float)
    drive = np.asarray(drive, dtype=float)
    N = X.shape[0]
    if k_max < 1:
        raise SpecError("k_max must be at least 1")
    if k_max > first_row:
        raise SpecError(f"k_max={k_max} exceeds the {first_row} samples available before the first row")
    if first_row + N > drive.size:
        raise SpecError("drive is shorter than the state matrix")
    rows = np.arange(first_row, first_row + N)
    targets = np.stack([drive[rows - k] for k in range(1, k_max + 1)], axis=1)
    U, S, Vt = ridge_svd(X)
    fitted = X @ ridge_solve(U, S, Vt, targets, ridge_k)
    mc = []
    reason = "k_max_reached"
    run = 0
    for k in range(k_max):
        v = squared_correlation(fitted[:, k], targets[:, k])
        mc.append(v)
        run = run + 1 if v < MC_FLOOR else 0
        if run >= MC_FLOOR_RUN:
            reason = "below_floor"
            break
    mc = np.array(mc)
    return MemoryReport(mc, float(mc.sum()), k_max, reason)


def memory_capacity(adj: NormalizedAdjacency | np.ndarray, w: InputVector | np.ndarray,
                    cfg: ReservoirConfig, k_max: int = 100, seed: int = 0,
                    ridge_k: float = DEFAULT_RIDGE, context: dict | None = None) -> MemoryReport:
    """Drive with i.i.d. U[-1, 1] input and sum squared-correlation recall over delays."""
    if k_max < 1:
        raise SpecError("k_max must be at least 1")
    if k_max > cfg.transient:
        raise SpecError(f"k_max={k_max} exceeds usable history ({cfg.transient} transient samples)")
    s = uniform_drive(cfg.n_total, seed)
    omega = run_reservoir(adj, w, s, cfg, standardize_input=False, context=context)
    return memory_curve(omega, s.samples, cfg.transient, k_max, ridge_k)
