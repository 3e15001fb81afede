"""One realization end to end: flip, normalize, drive, fit, test, rank."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..analysis import RankPolicy, covariance_ranks, memory_curve
from ..errors import NormalizationError, ReservoirInstabilityError
from ..network import (InputKind, SignedNetwork, flip_edges, make_input_vector,
                       make_random_network, normalize_spectral, sparsity)
from ..readout import fit, testing_error, training_error
from ..reservoir import ReservoirConfig, run_reservoir
from ..seeding import derive_seed
from ..signals import LorenzParams, MapParams, lorenz_generate, lorenz_init_from_seed, map_generate, \
    standardize, uniform_drive
from ..symmetry import count_automorphisms
from .records import ResultRecord
from .spec import ExperimentSpec

log = logging.getLogger(__name__)

# seed-path tags under base_seed
TAG_TEST_LORENZ = 1
TAG_MAP = 2
TAG_MEMORY_DRIVE = 3
TAG_BASE_NETWORK = 4
TAG_SYMMETRIC_BASE = 5
# seed-path tags under a realization seed
SUB_FLIP, SUB_INPUT, SUB_RANDOM_NET = 0, 1, 2


@dataclass(frozen=True)
class TaskSignals:
    """Standardized drives and the recorded-window targets for train and test."""

    train_input: np.ndarray
    train_target: np.ndarray | None
    test_input: np.ndarray | None
    test_target: np.ndarray | None
    standardized: bool = True


def prepare_signals(spec: ExperimentSpec, cfg: ReservoirConfig) -> TaskSignals:
    n, t0, N = cfg.n_total, cfg.transient, cfg.n_record
    if spec.task in ("lorenz_xz", "input_vector_comparison"):
        def lorenz(init):
            x, _, z = lorenz_generate(LorenzParams(init=init, n_steps=n * spec.stride))
            return x.samples[::spec.stride][:n], z.samples[::spec.stride][:n]
        xs, zs = lorenz((1.0, 1.0, 1.0))
        xt, zt = lorenz(lorenz_init_from_seed(derive_seed(spec.base_seed, TAG_TEST_LORENZ)))
        return TaskSignals(standardize(xs).samples, zs[t0:t0 + N],
                           standardize(xt).samples, zt[t0:t0 + N])
    if spec.task == "map_xy":
        xs, ys = map_generate(MapParams(n_steps=n, rng_seed=derive_seed(spec.base_seed, TAG_MAP, 0)))
        xt, yt = map_generate(MapParams(n_steps=n, rng_seed=derive_seed(spec.base_seed, TAG_MAP, 1)))
        return TaskSignals(standardize(xs).samples, ys.samples[t0:t0 + N],
                           standardize(xt).samples, yt.samples[t0:t0 + N])
    if spec.task == "memory":
        drive = uniform_drive(n, derive_seed(spec.base_seed, TAG_MEMORY_DRIVE))
        return TaskSignals(drive.samples, None, None, None, standardized=False)
    raise ValueError(spec.task)


@dataclass(frozen=True)
class Job:
    """Everything one worker needs; picklable."""

    key: tuple
    seed: int
    case: str
    base: np.ndarray | None          # integer base network, or None for a random network
    n_flip: int
    cfg: ReservoirConfig
    target: float
    mode: str
    input_kind: str
    signals: TaskSignals
    ridge_k: float = 1e-5
    k_max: int = 100
    count_symmetries: bool = False
    random_density: float = 0.2
    memory: bool = False


def build_network(job: Job) -> SignedNetwork:
    if job.base is None:
        return make_random_network(job.cfg.M, job.random_density, derive_seed(job.seed, SUB_RANDOM_NET))
    return flip_edges(SignedNetwork(job.base), job.n_flip, derive_seed(job.seed, SUB_FLIP))


def run_realization(job: Job) -> ResultRecord:
    net = build_network(job)
    eps = None if job.base is None else net.epsilon_f
    phi = sparsity(net)
    sym = count_automorphisms(net).group_order if job.count_symmetries else None
    ctx = {"case": job.case, "epsilon_f": eps, "seed": job.seed}
    try:
        A = normalize_spectral(net, job.target, job.mode)
        w = make_input_vector(job.cfg.M, InputKind(job.input_kind), derive_seed(job.seed, SUB_INPUT))
        sig = job.signals
        omega = run_reservoir(A, w, sig.train_input, job.cfg, standardize_input=False, context=ctx)
        ranks = covariance_ranks(omega)
        out = dict(gamma_ulp=ranks[RankPolicy.ULP_SCALED].gamma,
                   gamma_1e6=ranks[RankPolicy.FIXED_RELATIVE].gamma)
        if job.memory:
            rep = memory_curve(omega, sig.train_input, job.cfg.transient, job.k_max, job.ridge_k)
            out["mc_total"] = rep.mc_total
        else:
            model = fit(omega, sig.train_target, job.ridge_k)
            out["delta_rc"] = training_error(omega, model, sig.train_target)
            omega_t = run_reservoir(A, w, sig.test_input, job.cfg, standardize_input=False, context=ctx)
            out["delta_tx"] = testing_error(omega_t, model, sig.test_target)
    except (ReservoirInstabilityError, NormalizationError) as exc:
        log.warning("realization %s unstable: %s", job.key, exc)
        return ResultRecord(job.seed, job.case, eps, phi, sym, status="unstable", key=job.key)
    return ResultRecord(job.seed, job.case, eps, phi, sym, key=job.key, **out)


def execute(jobs: list[Job], workers: int = 1) -> list[ResultRecord]:
    """Run jobs, possibly in parallel; output ordered by job key."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_realization, jobs, chunksize=1))
    else:
        records = []
        for i, job in enumerate(jobs):
            records.append(run_realization(job))
            if (i + 1) % 20 == 0:
                log.info("%d/%d realizations done", i + 1, len(jobs))
    return sorted(records, key=lambda r: r.key)
