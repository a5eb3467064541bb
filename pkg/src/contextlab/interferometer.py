"""Quantum-mechanical model of the Mach-Zehnder-like spin/path array.

Path modes 1 and 2 are the two input ports of the adjustable splitter; with
``gamma = sin(vartheta)`` and ``delta = cos(vartheta)`` its output ports are

    |psi3> = -i*gamma|psi1> + delta|psi2>
    |psi4> =  delta|psi1> - i*gamma|psi2>

The element-by-element pipeline starts from ``|up>_z (x) |psi1>`` and applies
a real 50:50 mixer, a spin flipper on one arm, a phase element on arm 1 and
finally the change of path basis to ``{|psi3>, |psi4>}``.  Subensemble means
are probability-weighted: ``P(port) * <sigma_theta>_port``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .errors import CalibrationError, ZeroBranchError
from .qubit import (
    JointState,
    PathState,
    SpinState,
    expectation,
    project_path,
    spin_theta_observable,
    tensor,
)

Arm = Literal["arm1", "arm2"]

MIXER_50_50 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# |up> -> |down>, |down> -> -|up>
SPIN_FLIPPER = np.array([[0, -1], [1, 0]], dtype=complex)

PROBE_THETAS = (0.0, np.pi / 8, np.pi / 6, np.pi / 3)
CALIBRATION_TOL = 1e-9
_COARSE_PHASES = 1 << 14


@dataclass(frozen=True)
class ArrayConfig:
    vartheta: float
    theta: float = 0.0
    flip_arm: Arm = "arm2"
    calib_phase: float = 0.0

    @property
    def gamma(self) -> float:
        return float(np.sin(self.vartheta))

    @property
    def delta(self) -> float:
        return float(np.cos(self.vartheta))


@dataclass(frozen=True)
class SubensembleMeans:
    sg1: float
    sg2: float


def adjustable_bs_observable(vartheta: float) -> np.ndarray:
    """Path observable of the adjustable splitter in the ``{|psi1>, |psi2>}`` basis."""
    g, d = np.sin(vartheta), np.cos(vartheta)
    diag = g * g - d * d
    off = 2 * g * d
    return np.array([[diag, -1j * off], [1j * off, -diag]], dtype=complex)


def output_port_states(vartheta: float) -> tuple[PathState, PathState]:
    g, d = np.sin(vartheta), np.cos(vartheta)
    psi3 = PathState((complex(0, -g), complex(d, 0)), "input")
    psi4 = PathState((complex(d, 0), complex(0, -g)), "input")
    return psi3, psi4


def tilted_spin_states(vartheta: float) -> tuple[SpinState, SpinState]:
    """Return ``(|up>_vartheta, |down>_vartheta)``."""
    s, c = np.sin(vartheta), np.cos(vartheta)
    up = SpinState(complex(c), complex(s))
    down = SpinState(complex(-s), complex(c))
    return up, down


def closed_form_means(vartheta: float, theta: float) -> SubensembleMeans:
    half = 0.5 * np.cos(2 * (vartheta - theta))
    return SubensembleMeans(float(-half), float(half))


def _arm_projector(arm: Arm) -> np.ndarray:
    p = np.zeros((2, 2), dtype=complex)
    k = 0 if arm == "arm1" else 1
    p[k, k] = 1.0
    return p


def pipeline_operator(cfg: ArrayConfig) -> np.ndarray:
    """4x4 unitary of the whole array, input path basis in, output path basis out."""
    eye = np.eye(2, dtype=complex)
    mixer = np.kron(eye, MIXER_50_50)
    arm = _arm_projector(cfg.flip_arm)
    flipper = np.kron(SPIN_FLIPPER, arm) + np.kron(eye, eye - arm)
    phase = np.kron(eye, np.diag([np.exp(1j * cfg.calib_phase), 1.0]))
    psi3, psi4 = output_port_states(cfg.vartheta)
    to_output = np.kron(eye, np.vstack([psi3.vector.conj(), psi4.vector.conj()]))
    return to_output @ phase @ flipper @ mixer


def simulate_pipeline(cfg: ArrayConfig) -> JointState:
    """Spin (x) path state right after the adjustable splitter, in the output basis."""
    start = tensor(SpinState(1 + 0j, 0j), PathState((1 + 0j, 0j), "input"))
    out = pipeline_operator(cfg) @ start.vector
    return JointState.from_vector(out, "output")


def _port_state(port: int) -> PathState:
    if port == 3:
        return PathState((1 + 0j, 0j), "output")
    if port == 4:
        return PathState((0j, 1 + 0j), "output")
    raise ValueError(f"port must be 3 or 4, got {port!r}")


def subensemble_mean_from_state(J: JointState, port: int, theta: float) -> float:
    """``P(port) * <sigma_theta>`` at the given exit port; 0 for an empty port."""
    try:
        spin, prob = project_path(J, _port_state(port))
    except ZeroBranchError:
        return 0.0
    return prob * expectation(spin_theta_observable(theta), spin)


def pipeline_means(cfg: ArrayConfig) -> SubensembleMeans:
    J = simulate_pipeline(cfg)
    return SubensembleMeans(
        subensemble_mean_from_state(J, 3, cfg.theta),
        subensemble_mean_from_state(J, 4, cfg.theta),
    )


def calibration_deviation(
    vartheta: float, phase: float, flip_arm: Arm = "arm2", thetas=PROBE_THETAS
) -> float:
    """Max |pipeline - closed form| over both ports and the probe thetas."""
    J = simulate_pipeline(ArrayConfig(vartheta, 0.0, flip_arm, phase))
    worst = 0.0
    for theta in thetas:
        ref = closed_form_means(vartheta, theta)
        worst = max(
            worst,
            abs(subensemble_mean_from_state(J, 3, theta) - ref.sg1),
            abs(subensemble_mean_from_state(J, 4, theta) - ref.sg2),
        )
    return worst


def _phase_response(vartheta: float, flip_arm: Arm, thetas) -> tuple[np.ndarray, np.ndarray]:
    """Fourier coefficients of every probed weighted mean as a function of the phase.

    The phase element acts linearly, so the output state is ``u + e^{i phi} w``
    and each weighted mean is exactly ``c0 + c1 cos(phi) + c2 sin(phi)``.
    Returns ``(coeffs, targets)`` with one row per (theta, port).
    """
    j0 = simulate_pipeline(ArrayConfig(vartheta, 0.0, flip_arm, 0.0)).vector
    jpi = simulate_pipeline(ArrayConfig(vartheta, 0.0, flip_arm, np.pi)).vector
    u = ((j0 + jpi) / 2).reshape(2, 2)
    w = ((j0 - jpi) / 2).reshape(2, 2)
    coeffs, targets = [], []
    for theta in thetas:
        sig = spin_theta_observable(theta).matrix()
        ref = closed_form_means(vartheta, theta)
        for col, target in ((0, ref.sg1), (1, ref.sg2)):
            a, b = u[:, col], w[:, col]
            cross = np.vdot(a, sig @ b)
            coeffs.append(
                [
                    np.vdot(a, sig @ a).real + np.vdot(b, sig @ b).real,
                    2 * cross.real,
                    -2 * cross.imag,
                ]
            )
            targets.append(target)
    return np.array(coeffs), np.array(targets)


def calibrate_phase(vartheta_probe: float, flip_arm: Arm = "arm2", thetas=PROBE_THETAS) -> float:
    """Find the arm-1 phase at which the pipeline reproduces the closed-form means.

    A coarse scan of [0, 2pi) brackets the optimum.  Near a perfect calibration
    every probed mean touches its target at an extremum of its sinusoid, so the
    deviation is quadratic in the phase error and a direct minimizer stalls at
    ~sqrt(eps).  The optimum is instead refined to the stationary point of each
    sinusoid (amplitude-weighted), then checked against the full pipeline.
    """
    if abs(np.sin(2 * vartheta_probe)) < 1e-6:
        raise ValueError("vartheta_probe must not be a multiple of pi/2 (degenerate splitter)")

    coeffs, targets = _phase_response(vartheta_probe, flip_arm, thetas)
    grid = np.arange(_COARSE_PHASES) * (2 * np.pi / _COARSE_PHASES)
    basis = np.vstack([np.ones_like(grid), np.cos(grid), np.sin(grid)])
    dev = np.abs(coeffs @ basis - targets[:, None]).max(axis=0)
    coarse = grid[int(np.argmin(dev))]

    amp = np.hypot(coeffs[:, 1], coeffs[:, 2])
    stationary = np.arctan2(coeffs[:, 2], coeffs[:, 1])
    # each sinusoid has a max at `stationary` and a min opposite; take the one nearest the bracket
    flip = np.cos(stationary - coarse) < 0
    stationary = np.where(flip, stationary + np.pi, stationary)
    weights = amp**2
    phase = np.arctan2(weights @ np.sin(stationary), weights @ np.cos(stationary))
    phase = float(np.mod(phase, 2 * np.pi))
    if phase >= 2 * np.pi:
        phase = 0.0

    achieved = calibration_deviation(vartheta_probe, phase, flip_arm, thetas)
    if achieved >= CALIBRATION_TOL:
        raise CalibrationError(
            f"best phase {phase!r} leaves deviation {achieved:.3e} "
            f"(flip_arm={flip_arm}); element conventions are inconsistent"
        )
    return phase


def calibrated(cfg: ArrayConfig, phase: float) -> ArrayConfig:
    return replace(cfg, calib_phase=phase)
