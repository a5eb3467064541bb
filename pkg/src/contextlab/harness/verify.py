"""Built-in invariant suite run by ``contextlab verify``.

These are desk-scale versions of the acceptance checks: same identities and
tolerances, smaller Monte Carlo and quadrature budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..interferometer import (
    adjustable_bs_observable,
    calibrate_phase,
    closed_form_means,
    output_port_states,
    pipeline_means,
    tilted_spin_states,
    ArrayConfig,
)
from ..ks_model import (
    analytic_expectation,
    density_integral,
    quadrature_expectation,
    response_values,
)
from ..qubit import (
    BlochVector,
    Observable,
    bloch_to_state,
    eigenvalues,
    expectation,
    spin_theta_observable,
)
from .config import SweepSpec
from .sweep import Summary, run_sweep, summarize

VERIFY_SEED = 20090914


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _random_unit(rng: np.random.Generator) -> BlochVector:
    v = rng.normal(size=3)
    return BlochVector.from_array(v / np.linalg.norm(v))


def check_splitter_reconstruction(rng, n: int = 100) -> CheckResult:
    worst = 0.0
    for vt in rng.uniform(0, 2 * math.pi, n):
        p3, p4 = output_port_states(vt)
        built = np.outer(p3.vector, p3.vector.conj()) - np.outer(p4.vector, p4.vector.conj())
        worst = max(worst, float(np.abs(built - adjustable_bs_observable(vt)).max()))
    return CheckResult("splitter observable reconstruction", worst < 1e-12, f"max dev {worst:.2e}")


def _grid37():
    return np.linspace(0, math.pi, 37, endpoint=False)


def check_closed_form(_rng=None) -> CheckResult:
    worst = 0.0
    for vt in _grid37():
        up, down = tilted_spin_states(vt)
        for th in _grid37():
            ref = closed_form_means(vt, th)
            obs = spin_theta_observable(th)
            worst = max(
                worst,
                abs(0.5 * expectation(obs, down) - ref.sg1),
                abs(0.5 * expectation(obs, up) - ref.sg2),
            )
    return CheckResult("closed-form means vs state algebra", worst < 1e-12, f"max dev {worst:.2e}")


def check_pipeline(_rng=None) -> CheckResult:
    phase = calibrate_phase(math.pi / 5)
    worst = 0.0
    for vt in _grid37():
        for th in _grid37():
            got = pipeline_means(ArrayConfig(vt, th, calib_phase=phase))
            ref = closed_form_means(vt, th)
            worst = max(worst, abs(got.sg1 - ref.sg1), abs(got.sg2 - ref.sg2))
    return CheckResult("calibrated pipeline vs closed form", worst < 1e-9, f"max dev {worst:.2e}")


def check_normalization(rng, n: int = 20) -> CheckResult:
    worst = max(abs(density_integral(_random_unit(rng), 128) - 1.0) for _ in range(n))
    return CheckResult("hidden-variable density normalization", worst < 1e-9, f"max dev {worst:.2e}")


def check_ks_identity(rng, n: int = 200, nodes: int = 1024) -> CheckResult:
    worst_exact = 0.0
    worst_quad = 0.0
    for k in range(n):
        A = Observable(rng.normal(), rng.normal(size=3))
        n_psi = _random_unit(rng)
        ks = analytic_expectation(A, n_psi)
        worst_exact = max(worst_exact, abs(ks - expectation(A, bloch_to_state(n_psi))))
        if k < 40:
            worst_quad = max(worst_quad, abs(quadrature_expectation(A, n_psi, nodes) - ks))
    ok = worst_exact < 1e-12 and worst_quad < 1e-3
    return CheckResult(
        "KS expectation equals quantum expectation",
        ok,
        f"analytic dev {worst_exact:.2e}, quadrature dev {worst_quad:.2e} at {nodes} nodes",
    )


def check_value_definiteness(rng, n: int = 100_000) -> CheckResult:
    bad = 0
    for _ in range(20):
        A = Observable(rng.normal(), rng.normal(size=3))
        v = rng.normal(size=(n // 20, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        vals = response_values(A, v)
        hi, lo = eigenvalues(A)
        bad += int(np.count_nonzero((vals != hi) & (vals != lo)))
    return CheckResult("response values are eigenvalues", bad == 0, f"{bad} non-eigenvalue responses")


def sweep_spec(seed: int = VERIFY_SEED, mc_count: int = 100_000) -> SweepSpec:
    grid = tuple(k * math.pi / 8 for k in range(4))
    return SweepSpec(grid, grid, mc_count=mc_count, quadrature_nodes=256, seed=seed)


def check_monte_carlo(_rng=None) -> tuple[CheckResult, Summary, CheckResult]:
    spec = sweep_spec()
    rows, _ = run_sweep(spec)
    summary = summarize(rows)
    ok = (
        summary.max_zscore < 4.0
        and summary.max_pipeline_dev < 1e-9
        and summary.max_analytic_dev < 1e-12
        # product-rule error on a unit sgn response is at most 2/n, halved by the port weight
        and summary.max_quad_dev < 1.0 / spec.quadrature_nodes
    )
    mc = CheckResult(
        "Monte Carlo sweep reproduces quantum means",
        ok,
        f"max z {summary.max_zscore:.2f} over {summary.n_rows} rows",
    )
    bad_rows, _ = run_sweep(spec, invert_response=True)
    bad = summarize(bad_rows)
    fault = CheckResult(
        "inverted response is detected",
        bad.frac_nondegenerate_z_over_4 > 0.5,
        f"{bad.frac_nondegenerate_z_over_4:.0%} of {bad.n_nondegenerate} non-degenerate rows flagged",
    )
    return mc, summary, fault


def run_all(seed: int = VERIFY_SEED) -> tuple[list[CheckResult], Summary]:
    rng = np.random.default_rng(seed)
    results = [
        check_splitter_reconstruction(rng),
        check_closed_form(),
        check_pipeline(),
        check_normalization(rng),
        check_ks_identity(rng),
        check_value_definiteness(rng),
    ]
    mc, summary, fault = check_monte_carlo()
    results += [mc, fault]
    return results, summary
