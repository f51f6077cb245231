"""Euler-Maruyama simulation of the Brownian motion on the symplectic group.

The state ``Y`` is the displacement from the identity, ``X = I + Y``, and
solves the Ito equation::

    dY = (I + Y) dW + 1/2 (I + Y) D dt,   Y_0 = 0

with ``W = sum_xi sqrt(Q(xi)) B^xi xi`` over the canonical sp basis.  The
exact process stays in the group, ``(Y+I)(Y#+I) = I``; the discrete one
drifts off, and that drift is what :func:`group_residual` measures.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fourier_core import ContractError, ModeWindow
from .op_algebra import norm2, sharp
from .sp_algebra import CovSpec, LambdaSeq, basis_element, drift_matrix, enumerate_labels, \
    sum_xi_residual


@dataclass(frozen=True)
class SimConfig:
    N: int
    dt: float
    T: float
    paths: int = 1
    seed: int = 0
    Q: CovSpec = field(default_factory=CovSpec)
    record_every: int = 1
    project: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ContractError("N must be positive")
        if not (0 < self.dt <= self.T):
            raise ContractError(f"need 0 < dt <= T, got dt={self.dt}, T={self.T}")
        if self.paths < 1 or self.record_every < 1:
            raise ContractError("paths and record_every must be >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class PathRecord:
    path: int
    times: np.ndarray
    residual: np.ndarray
    norm2: np.ndarray
    Y: np.ndarray
    aborted: bool = False


class IncrementSampler:
    """Draws ``dW = sum_l sqrt(Q_l dt) g_l xi_l`` with ``g_l`` standard normal.

    One normal is consumed per canonical label, in label order, for every
    step.  Labels with zero covariance still consume their draw so that the
    stream layout does not depend on Q.
    """

    def __init__(self, Q: CovSpec, window: ModeWindow):
        self.window = window
        self.labels = list(enumerate_labels(window.N))
        lam = LambdaSeq.canonical(window.N)
        self.weights = np.array([Q(l) for l in self.labels])
        self.stack = np.array([basis_element(l, lam, window).to_dense() for l in self.labels])

    def __call__(self, dt: float, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal(len(self.labels))
        return np.tensordot(np.sqrt(self.weights * dt) * g, self.stack, axes=1)


def sample_increment(Q: CovSpec, dt: float, rng: np.random.Generator,
                     window: ModeWindow) -> np.ndarray:
    """One Brownian increment on the window (see :class:`IncrementSampler`)."""
    if dt <= 0:
        raise ContractError("dt must be positive")
    return IncrementSampler(Q, window)(dt, rng)


def path_rng(seed: int, path: int) -> np.random.Generator:
    """Counter-based stream for one path, keyed on ``(seed, path)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, path])))


def em_step(Y, dW, D, dt):
    """``Y + (I+Y) dW + 1/2 (I+Y) D dt`` with D the diagonal as a vector."""
    X = Y + np.eye(Y.shape[0])
    return Y + X @ dW + 0.5 * dt * X * D[None, :]


def group_residual(Y) -> float:
    """Frobenius norm of ``(Y+I)(Y#+I) - I``."""
    Y = np.asarray(Y)
    eye = np.eye(Y.shape[0])
    return float(np.linalg.norm((Y + eye) @ (sharp(Y) + eye) - eye))


def project_step(Y):
    """One Newton-Schulz step pulling ``X = I+Y`` toward ``X X# = I``."""
    eye = np.eye(Y.shape[0])
    X = Y + eye
    X = 0.5 * (3 * eye - X @ sharp(X)) @ X
    return X - eye


def _run_path(cfg: SimConfig, path: int, sampler: IncrementSampler, D) -> PathRecord:
    rng = path_rng(cfg.seed, path)
    n = sampler.window.size
    Y = np.zeros((n, n), complex)
    times, res, nrm = [0.0], [0.0], [0.0]
    aborted = False
    for step in range(1, cfg.steps + 1):
        Y = em_step(Y, sampler(cfg.dt, rng), D, cfg.dt)
        if cfg.project:
            Y = project_step(Y)
        if step % cfg.record_every == 0 or step == cfg.steps:
            if not np.all(np.isfinite(Y)):
                aborted = True
                break
            times.append(step * cfg.dt)
            res.append(group_residual(Y))
            nrm.append(norm2(Y))
    return PathRecord(path, np.array(times), np.array(res), np.array(nrm), Y, aborted)


def simulate(cfg: SimConfig, threads: int = 1) -> list[PathRecord]:
    """Run all paths; records come back ordered by path index."""
    window = ModeWindow(cfg.N)
    D = drift_matrix(cfg.Q, window)
    # the Ito correction only keeps the group if the drift matches the noise
    r = sum_xi_residual(cfg.Q, window)
    if r > 1e-12:
        raise ContractError(f"drift does not match the covariance (residual {r:.2e})")
    sampler = IncrementSampler(cfg.Q, window)
    if threads <= 1:
        return [_run_path(cfg, p, sampler, D) for p in range(cfg.paths)]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda p: _run_path(cfg, p, sampler, D), range(cfg.paths)))


def summarize(cfg: SimConfig, records: list[PathRecord]) -> dict:
    term = [r.residual[-1] for r in records if not r.aborted]
    return {
        "mean_terminal_residual": float(np.mean(term)) if term else float("nan"),
        "max_residual": float(max(r.residual.max() for r in records)),
        "paths": cfg.paths,
        "aborted": sum(r.aborted for r in records),
        "dt": cfg.dt,
        "N": cfg.N,
        "seed": cfg.seed,
    }


def write_records_csv(records: list[PathRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "t", "residual", "norm2"])
        for r in records:
            for t, res, nn in zip(r.times, r.residual, r.norm2):
                w.writerow([r.path, format(t, ".17g"), format(res, ".17g"), format(nn, ".17g")])


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
