"""Linear readout trained by SVD-based ridge regression."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SpecError, ZeroVarianceError
from .reservoir import StateMatrix
from .signals import TimeSeries

DEFAULT_RIDGE = 1e-5


@dataclass(frozen=True, eq=False)
class ReadoutModel:
    coeffs: np.ndarray
    ridge_k: float = DEFAULT_RIDGE
    singular_values: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if not np.all(np.isfinite(c)):
            raise SpecError("readout coefficients must be finite")
        if not self.ridge_k > 0:
            raise SpecError("ridge_k must be positive")
        object.__setattr__(self, "coeffs", c)

    def predict(self, omega: StateMatrix | np.ndarray) -> np.ndarray:
        return _values(omega) @ self.coeffs

    def to_json(self) -> str:
        return json.dumps({"ridge_k": repr(float(self.ridge_k)),
                           "coeffs": [repr(float(c)) for c in self.coeffs]})

    @classmethod
    def from_json(cls, text: str) -> "ReadoutModel":
        d = json.loads(text)
        return cls(np.array([float(c) for c in d["coeffs"]]), float(d["ridge_k"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "ReadoutModel":
        return cls.from_json(Path(path).read_text())


def _values(omega) -> np.ndarray:
    return omega.values if isinstance(omega, StateMatrix) else np.asarray(omega, dtype=float)


def _target(g) -> np.ndarray:
    return np.asarray(g.samples if isinstance(g, TimeSeries) else g, dtype=float)


def ridge_svd(omega: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD of the state matrix."""
    try:
        return np.linalg.svd(omega, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"SVD did not converge: {exc}") from exc


def ridge_solve(U: np.ndarray, S: np.ndarray, Vt: np.ndarray, g: np.ndarray, ridge_k: float) -> np.ndarray:
    """C = V S' U^T g with S'_ii = S_ii / (S_ii^2 + k^2). ``g`` may be N x K."""
    shrink = S / (S * S + ridge_k * ridge_k)
    proj = U.T @ g
    if proj.ndim == 1:
        return Vt.T @ (shrink * proj)
    return Vt.T @ (shrink[:, None] * proj)


def fit(omega: StateMatrix | np.ndarray, g: TimeSeries | np.ndarray,
        ridge_k: float = DEFAULT_RIDGE) -> ReadoutModel:
    """Ridge-regularized least squares readout."""
    X = _values(omega)
    y = _target(g)
    if y.shape != (X.shape[0],):
        raise SpecError(f"target has {y.shape[0]} samples, state matrix has {X.shape[0]} rows")
    if not ridge_k > 0:
        raise SpecError("ridge_k must be positive")
    U, S, Vt = ridge_svd(X)
    return ReadoutModel(ridge_solve(U, S, Vt, y, ridge_k), ridge_k, S)


def _normalized_residual(omega, model: ReadoutModel, g) -> float:
    X = _values(omega)
    y = _target(g)
    if y.shape != (X.shape[0],) or model.coeffs.shape != (X.shape[1],):
        raise SpecError("state matrix, coefficients and target shapes disagree")
    sd = y.std()
    if sd == 0.0:
        raise ZeroVarianceError("target has zero standard deviation")
    return float((X @ model.coeffs - y).std() / sd)


def training_error(omega, model: ReadoutModel, g) -> float:
    """std(Omega C - g) / std(g), population convention."""
    return _normalized_residual(omega, model, g)


def testing_error(omega_test, model: ReadoutModel, g_test) -> float:
    """Same normalized residual on a fresh run with the trained coefficients."""
    return _normalized_residual(omega_test, model, g_test)
