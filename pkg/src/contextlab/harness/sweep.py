"""Parameter sweeps comparing the quantum predictions with the KS model."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .. import __version__
from ..interferometer import ArrayConfig, calibrate_phase, closed_form_means, pipeline_means
from ..ks_model import (
    analytic_expectation,
    ks_subensemble_means,
    port_direction,
    quadrature_expectation,
)
from ..qubit import spin_theta_observable
from .config import SweepSpec

CALIBRATION_PROBE = math.pi / 5
PORT_WEIGHT = 0.5
Z_FLAG = 4.0
NONDEGENERATE = 1e-9


@dataclass(frozen=True)
class ComparisonRow:
    vartheta: float
    theta: float
    qm_closed_sg1: float
    qm_closed_sg2: float
    qm_pipeline_sg1: float
    qm_pipeline_sg2: float
    ks_analytic_sg1: float
    ks_analytic_sg2: float
    ks_quad_sg1: float
    ks_quad_sg2: float
    ks_mc_sg1: float
    ks_mc_se1: float
    ks_mc_sg2: float
    ks_mc_se2: float
    mc_zscore_max: float


COLUMNS = tuple(f.name for f in fields(ComparisonRow))


@dataclass
class RunManifest:
    spec: dict
    calibration_phase: float
    calibration_probe: float
    version: str
    total_particles: int
    row_timings: list[float] = field(default_factory=list)
    workers: int = 1

    def data_dict(self) -> dict:
        """Deterministic part, embedded in data files."""
        return {
            "spec": self.spec,
            "calibration_phase": self.calibration_phase,
            "calibration_probe": self.calibration_probe,
            "version": self.version,
            "total_particles": self.total_particles,
        }

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Summary:
    n_rows: int
    max_pipeline_dev: float
    max_analytic_dev: float
    max_quad_dev: float
    max_zscore: float
    n_z_over_4: int
    frac_z_over_4: float
    n_nondegenerate: int
    frac_nondegenerate_z_over_4: float

    def to_dict(self) -> dict:
        return asdict(self)


def row_rng(seed: int, index: int) -> np.random.Generator:
    """Independent substream for row ``index``, derived by seed hashing."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def zscore(estimate: float, se: float, expected: float) -> float:
    diff = abs(estimate - expected)
    if se > 0.0:
        return diff / se
    return 0.0 if diff == 0.0 else math.inf


def compute_row(
    index: int,
    vartheta: float,
    theta: float,
    spec: SweepSpec,
    phase: float,
    invert_response: bool = False,
) -> tuple[int, ComparisonRow, float]:
    start = time.perf_counter()
    closed = closed_form_means(vartheta, theta)
    piped = pipeline_means(ArrayConfig(vartheta, theta, calib_phase=phase))

    obs = spin_theta_observable(theta)
    n3, n4 = port_direction(vartheta, 3), port_direction(vartheta, 4)
    analytic = (
        PORT_WEIGHT * analytic_expectation(obs, n3),
        PORT_WEIGHT * analytic_expectation(obs, n4),
    )
    quad = (
        PORT_WEIGHT * quadrature_expectation(obs, n3, spec.quadrature_nodes),
        PORT_WEIGHT * quadrature_expectation(obs, n4, spec.quadrature_nodes),
    )
    mc = ks_subensemble_means(
        vartheta, theta, spec.mc_count, row_rng(spec.seed, index), invert_response=invert_response
    )
    z = max(
        zscore(mc.sg1_est, mc.sg1_se, closed.sg1),
        zscore(mc.sg2_est, mc.sg2_se, closed.sg2),
    )
    row = ComparisonRow(
        vartheta, theta,
        closed.sg1, closed.sg2,
        piped.sg1, piped.sg2,
        analytic[0], analytic[1],
        quad[0], quad[1],
        mc.sg1_est, mc.sg1_se, mc.sg2_est, mc.sg2_se,
        z,
    )  # fmt: skip
    return index, row, time.perf_counter() - start


def _compute_task(args):
    return compute_row(*args)


def run_sweep(
    spec: SweepSpec, *, workers: int = 1, invert_response: bool = False
) -> tuple[list[ComparisonRow], RunManifest]:
    """One row per (vartheta, theta), ordered vartheta-major.

    Each row draws from its own substream keyed by its index, so the output
    does not depend on ``workers``.
    """
    phase = calibrate_phase(CALIBRATION_PROBE)
    tasks = [
        (i * len(spec.theta_grid) + j, vt, th, spec, phase, invert_response)
        for i, vt in enumerate(spec.vartheta_grid)
        for j, th in enumerate(spec.theta_grid)
    ]
    if workers <= 1:
        results = [_compute_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_compute_task, tasks))
    results.sort(key=lambda r: r[0])
    rows = [r[1] for r in results]
    manifest = RunManifest(
        spec=spec.to_dict(),
        calibration_phase=phase,
        calibration_probe=CALIBRATION_PROBE,
        version=__version__,
        total_particles=spec.mc_count * len(rows),
        row_timings=[r[2] for r in results],
        workers=workers,
    )
    return rows, manifest


def summarize(rows: list[ComparisonRow]) -> Summary:
    """Aggregate deviations; z-scores are recomputed from the row values."""
    if not rows:
        raise ValueError("summarize needs at least one row")
    zs = np.array(
        [
            max(
                zscore(r.ks_mc_sg1, r.ks_mc_se1, r.qm_closed_sg1),
                zscore(r.ks_mc_sg2, r.ks_mc_se2, r.qm_closed_sg2),
            )
            for r in rows
        ]
    )
    nondeg = np.array([abs(r.qm_closed_sg1) > NONDEGENERATE for r in rows])
    flagged = zs > Z_FLAG
    n_nondeg = int(nondeg.sum())

    def worst(a: str, b: str, c: str, d: str) -> float:
        return max(max(abs(getattr(r, a) - getattr(r, b)), abs(getattr(r, c) - getattr(r, d))) for r in rows)

    return Summary(
        n_rows=len(rows),
        max_pipeline_dev=worst("qm_closed_sg1", "qm_pipeline_sg1", "qm_closed_sg2", "qm_pipeline_sg2"),
        max_analytic_dev=worst("qm_closed_sg1", "ks_analytic_sg1", "qm_closed_sg2", "ks_analytic_sg2"),
        max_quad_dev=worst("qm_closed_sg1", "ks_quad_sg1", "qm_closed_sg2", "ks_quad_sg2"),
        max_zscore=float(zs.max()),
        n_z_over_4=int(flagged.sum()),
        frac_z_over_4=float(flagged.mean()),
        n_nondegenerate=n_nondeg,
        frac_nondegenerate_z_over_4=float(flagged[nondeg].mean()) if n_nondeg else 0.0,
    )
