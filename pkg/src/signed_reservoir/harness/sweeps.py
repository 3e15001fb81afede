"""Seeded sweeps over flip fraction, symmetry, sparsity, input vectors and memory."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import SpecError
from ..network import SignedNetwork, make_base_network
from ..seeding import derive_seed
from ..symmetry import AutomorphismReport, count_automorphisms
from .pipeline import TAG_BASE_NETWORK, TAG_SYMMETRIC_BASE, Job, execute, prepare_signals
from .records import ResultRecord, log10_or_none
from .spec import ExperimentSpec
from .stats import grouped_median, interval_slope, spearman

log = logging.getLogger(__name__)

INPUT_CASES = {"case1": "alternating", "case2": "all-ones", "case3": "uniform-random"}


def base_network(spec: ExperimentSpec, n_edges: int | None = None, index: int = 0) -> SignedNetwork:
    return make_base_network(spec.M, n_edges or spec.n_edges, derive_seed(spec.base_seed, TAG_BASE_NETWORK, index))


def _flip_count(base: SignedNetwork, point: tuple[str, float]) -> int:
    kind, value = point
    n = int(value) if kind == "count" else int(round(value * base.n_nonzero))
    if n > base.n_positive:
        raise SpecError(f"cannot flip {n} of {base.n_positive} edges")
    return n


def _jobs_over_grid(spec: ExperimentSpec, base: SignedNetwork, case: str, grid, *, grid_offset: int = 0,
                    key_prefix: tuple = (), input_kind: str | None = None, node_kind: str | None = None,
                    signals=None, count_symmetries: bool | None = None) -> list[Job]:
    cfg = spec.reservoir_config(node_kind)
    signals = signals if signals is not None else prepare_signals(spec, cfg)
    target = spec.target if node_kind is None else _target_for(spec, node_kind)
    jobs = []
    for gi, point in enumerate(grid):
        n_flip = _flip_count(base, point)
        g = grid_offset + gi
        for r in range(spec.realizations):
            jobs.append(Job(
                key=key_prefix + (g, r), seed=derive_seed(spec.base_seed, g, r), case=case,
                base=np.asarray(base.entries), n_flip=n_flip, cfg=cfg, target=target,
                mode=spec.normalization_mode, input_kind=input_kind or spec.input_kind, signals=signals,
                ridge_k=spec.ridge_k, k_max=spec.k_max,
                count_symmetries=spec.count_symmetries if count_symmetries is None else count_symmetries,
                memory=spec.task == "memory"))
    return jobs


def _target_for(spec: ExperimentSpec, node_kind: str) -> float:
    if spec.normalization_target is not None:
        return spec.normalization_target
    return replace(spec, node_kind=node_kind).target


def run_flip_sweep(spec: ExperimentSpec, workers: int = 1) -> list[ResultRecord]:
    """Realizations over the flip grid, all flipped from one shared base network."""
    base = base_network(spec)
    case = f"{spec.task}:{spec.node_kind}"
    return execute(_jobs_over_grid(spec, base, case, spec.flip_grid()), workers)


@dataclass
class SymmetricBase:
    network: SignedNetwork
    report: AutomorphismReport
    attempts: int
    accepted: bool


def find_symmetric_base(spec: ExperimentSpec) -> SymmetricBase:
    """Sample dense bases until one's automorphism group exceeds the threshold.

    Returns the first accepted candidate, or the best one seen when the
    search budget runs out.
    """
    best = None
    for attempt in range(spec.symmetry_search_budget):
        seed = derive_seed(spec.base_seed, TAG_SYMMETRIC_BASE, attempt)
        net = make_base_network(spec.M, spec.n_edges, seed, core=spec.symmetric_core)
        rep = count_automorphisms(net)
        log.info("symmetric base attempt %d: group order %.4e", attempt, float(rep.group_order))
        if best is None or rep.group_order > best.report.group_order:
            best = SymmetricBase(net, rep, attempt + 1, False)
        if rep.group_order > spec.symmetry_threshold:
            return SymmetricBase(net, rep, attempt + 1, True)
    log.warning("no base above %.3g after %d attempts; best %.4e", spec.symmetry_threshold,
                spec.symmetry_search_budget, float(best.report.group_order))
    best.attempts = spec.symmetry_search_budget
    return best


def run_symmetry_sweep(spec: ExperimentSpec, workers: int = 1,
                       base: SymmetricBase | None = None) -> list[ResultRecord]:
    """Small flip counts on a highly symmetric base, with exact group orders."""
    base = base or find_symmetric_base(spec)
    case = f"{spec.task}:{spec.node_kind}"
    jobs = _jobs_over_grid(spec, base.network, case, spec.flip_grid(symmetry=True), count_symmetries=True)
    return execute(jobs, workers)


@dataclass
class ContourGrid:
    phis: list[float]
    epsilons: list[float]
    median_log10_delta_tx: np.ndarray     # shape (len(phis), len(epsilons))
    mean_gamma_ulp: np.ndarray
    mean_gamma_1e6: np.ndarray
    n_ok: np.ndarray

    def rows(self) -> list[dict]:
        out = []
        for i, phi in enumerate(self.phis):
            for j, eps in enumerate(self.epsilons):
                out.append({"phi": phi, "epsilon_f": eps,
                            "median_log10_delta_tx": float(self.median_log10_delta_tx[i, j]),
                            "mean_gamma_ulp": float(self.mean_gamma_ulp[i, j]),
                            "mean_gamma_1e6": float(self.mean_gamma_1e6[i, j]),
                            "n_ok": int(self.n_ok[i, j])})
        return out

    def to_csv(self) -> str:
        cols = ["phi", "epsilon_f", "median_log10_delta_tx", "mean_gamma_ulp", "mean_gamma_1e6", "n_ok"]
        lines = [",".join(cols)]
        for row in self.rows():
            lines.append(",".join(repr(float(row[c])) if isinstance(row[c], float) else str(row[c]) for c in cols))
        return "\n".join(lines) + "\n"


def contour_grid(records: list[ResultRecord], n_phi: int, n_eps: int) -> ContourGrid:
    shape = (n_phi, n_eps)
    med = np.full(shape, np.nan)
    g_ulp = np.full(shape, np.nan)
    g_1e6 = np.full(shape, np.nan)
    n_ok = np.zeros(shape, dtype=int)
    phis = [math.nan] * n_phi
    eps = [math.nan] * n_eps
    cells: dict[tuple[int, int], list[ResultRecord]] = {}
    for r in records:
        g = r.key[0]
        cells.setdefault((g // n_eps, g % n_eps), []).append(r)
    for (i, j), rs in cells.items():
        phis[i] = rs[0].phi
        eps[j] = rs[0].epsilon_f
        ok = [r for r in rs if r.ok]
        n_ok[i, j] = len(ok)
        if ok:
            med[i, j] = float(np.median(sorted(math.log10(r.delta_tx) for r in ok)))
            g_ulp[i, j] = float(np.mean([r.gamma_ulp for r in ok]))
            g_1e6[i, j] = float(np.mean([r.gamma_1e6 for r in ok]))
    return ContourGrid(phis, eps, med, g_ulp, g_1e6, n_ok)


def run_contour(spec: ExperimentSpec, workers: int = 1) -> tuple[list[ResultRecord], ContourGrid]:
    """Sparsity x flip-fraction grid; one base network per sparsity value."""
    if not spec.sparsity_grid:
        raise SpecError("contour runs need a non-empty sparsity_grid")
    grid = spec.flip_grid()
    cfg = spec.reservoir_config()
    signals = prepare_signals(spec, cfg)
    case = f"{spec.task}:{spec.node_kind}"
    jobs = []
    slots = spec.M * (spec.M - 1)
    for si, phi in enumerate(spec.sparsity_grid):
        n_edges = max(1, int(round(phi * slots)))
        base = base_network(spec, n_edges, index=si + 1)
        jobs += _jobs_over_grid(spec, base, case, grid, grid_offset=si * len(grid), signals=signals)
    records = execute(jobs, workers)
    return records, contour_grid(records, len(spec.sparsity_grid), len(grid))


def run_input_vector_comparison(spec: ExperimentSpec, workers: int = 1) -> list[ResultRecord]:
    """Alternating, all-ones and random input vectors on the flipped base, plus a
    fully random sparse network with random inputs (flip fraction not applicable).

    Cases 1-3 reuse the same realization seeds, so they see identical networks.
    """
    base = base_network(spec)
    grid = spec.flip_grid()
    cfg = spec.reservoir_config()
    signals = prepare_signals(spec, cfg)
    jobs = []
    for ci, (case, kind) in enumerate(INPUT_CASES.items(), start=1):
        jobs += _jobs_over_grid(spec, base, case, grid, key_prefix=(ci,), input_kind=kind, signals=signals)
    g = len(grid)
    for r in range(spec.realizations):
        jobs.append(Job(key=(4, g, r), seed=derive_seed(spec.base_seed, g, r), case="case4", base=None,
                        n_flip=0, cfg=cfg, target=spec.target, mode=spec.normalization_mode,
                        input_kind="uniform-random", signals=signals, ridge_k=spec.ridge_k,
                        random_density=0.2))
    return execute(jobs, workers)


def run_memory_sweep(spec: ExperimentSpec, workers: int = 1,
                     node_kinds: list[str] | None = None) -> list[ResultRecord]:
    """Memory capacity over the flip grid for each node kind (same networks)."""
    if spec.task != "memory":
        spec = replace(spec, task="memory")
    node_kinds = node_kinds or [spec.node_kind]
    base = base_network(spec)
    grid = spec.flip_grid()
    jobs = []
    for ki, kind in enumerate(node_kinds):
        jobs += _jobs_over_grid(spec, base, kind, grid, key_prefix=(ki,), node_kind=kind)
    return execute(jobs, workers)


# --------------------------------------------------------------------------
# summaries

def _eps(r):
    return r.epsilon_f


def flip_summary(records: list[ResultRecord]) -> dict:
    """Per-case medians over the flip grid and their Spearman trends."""
    out = {}
    for case in sorted({r.case for r in records}):
        rs = [r for r in records if r.case == case and r.epsilon_f is not None]
        if not rs:
            continue
        entry = {"n_records": len(rs), "n_unstable": sum(not r.ok for r in rs)}
        for name in ("delta_tx", "delta_rc", "gamma_ulp", "gamma_1e6", "mc_total"):
            med = grouped_median(rs, _eps, lambda r, n=name: getattr(r, n))
            if len(med) >= 2:
                entry[f"median_{name}"] = {repr(float(k)): v for k, v in med.items()}
                entry[f"spearman_eps_{name}"] = spearman(list(med), list(med.values()))
        out[case] = entry
    return out


def symmetry_summary(records: list[ResultRecord]) -> dict:
    """Median log10 group order vs median log10 testing error per flip count."""
    by_flip = lambda r: r.epsilon_f
    log_sym = grouped_median(records, by_flip, lambda r: log10_or_none(r.symmetry_count))
    log_err = grouped_median(records, by_flip, lambda r: log10_or_none(r.delta_tx))
    keys = [k for k in log_sym if k in log_err]
    out = {"median_log10_symmetry": [log_sym[k] for k in keys],
           "median_log10_delta_tx": [log_err[k] for k in keys],
           "epsilon_f": keys}
    if len(keys) >= 2:
        out["spearman_logsym_logerr"] = spearman(out["median_log10_symmetry"], out["median_log10_delta_tx"])
    return out


def memory_summary(records: list[ResultRecord], early=(0.0, 0.2), late=(0.4, 0.5)) -> dict:
    out = {}
    for case in sorted({r.case for r in records}):
        med = grouped_median([r for r in records if r.case == case], _eps, lambda r: r.mc_total)
        xs, ys = list(med), list(med.values())
        entry = {"median_mc_total": {repr(float(k)): v for k, v in med.items()}}
        if len(xs) >= 2:
            entry["spearman_eps_mc"] = spearman(xs, ys)
        try:
            e = interval_slope(xs, ys, *early)
            l = interval_slope(xs, ys, *late)
            entry.update(early_slope=e, late_slope=l, plateau_ratio=l / e if e else math.inf)
        except ValueError:
            pass
        out[case] = entry
    return out
