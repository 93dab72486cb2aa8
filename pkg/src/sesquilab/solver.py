"""Projected gradient descent for the interpolating energy.

One step retracts an unconstrained descent move back onto the sphere:

    φ' = project_sphere(φ - t · tangent_project(φ, grad E_h(φ)))

with Armijo backtracking on the discretized energy, so accepted steps never
increase it. The residual monitored for convergence is half the sup-norm of
the tangential gradient, which matches the tangential Euler-Lagrange
residual to O(h²).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import Delta2Zero, NearZeroVector
from .fields import SphereField, normalize_rows
from .grid import Coupling
from .energy import (
    _raw_el_residual,
    _raw_energy_gradient,
    _raw_interpolating_energy,
)

STEP_GROWTH = 1.5
STEP_UNDERFLOW_FACTOR = 1e-14


class Termination(enum.Enum):
    RESIDUAL_MET = "ResidualMet"
    MAX_ITERS = "MaxIters"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 10000
    residual_tol: float = 1e-6
    initial_step: float | None = None  # None: 1e-2 h⁴/|δ₂| (h²/|δ₁| when δ₂=0)
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    record_every: int = 1
    harmonic_mode: bool = False  # must be set to run with δ₂ = 0

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class SolveReport:
    final_field: SphereField
    iterations: int
    energy_history: list
    residual_history: list
    stepsize_history: list
    recorded_iterations: list
    converged: bool
    termination: Termination
    noncoercive: bool
    el_residual_sup: float  # independent cross-check of the certificate

    def to_json_dict(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "termination": self.termination.value,
            "noncoercive": self.noncoercive,
            "final_energy": self.energy_history[-1],
            "final_residual": self.residual_history[-1],
            "el_residual_sup": self.el_residual_sup,
        }


def default_initial_step(domain, c: Coupling) -> float:
    """1e-2 · h⁴ / |δ₂| (explicit fourth-order stiffness ~ h⁻⁴); for the pure
    second-order flow (δ₂ = 0) the analogue 1e-2 · h² / |δ₁|."""
    h = min(domain.spacings)
    if c.delta2 != 0.0:
        return 1e-2 * h**4 / abs(c.delta2)
    return 1e-2 * h**2 / abs(c.delta1)


def _tangential_gradient(values, domain, c):
    g = _raw_energy_gradient(values, domain, c)
    g -= np.sum(g * values, axis=-1, keepdims=True) * values
    return g


def _check_coupling(c, harmonic_mode):
    if c.delta2 == 0.0 and not harmonic_mode:
        raise Delta2Zero("delta2 = 0 requires the explicit harmonic_mode flag")


def step(phi: SphereField, c: Coupling, t: float, harmonic_mode: bool = False):
    """One retracted descent step; returns (φ', E(φ')).

    Propagates NearZeroVector when the unconstrained move crosses the
    origin (step too large).
    """
    _check_coupling(c, harmonic_mode)
    domain = phi.domain
    g = _tangential_gradient(phi.values, domain, c)
    new_values = normalize_rows(phi.values - t * g)
    new_phi = SphereField(domain, new_values)
    return new_phi, _raw_interpolating_energy(new_values, domain, c)


def solve(phi0: SphereField, c: Coupling, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Run the flow until the tangential residual meets ``residual_tol``,
    the iteration budget runs out, or backtracking underflows.

    Accepted steps satisfy E(φ') <= E(φ) - armijo_c · t · ‖g_tan‖²_{L²(grid)},
    so the recorded energy history is non-increasing. The step size grows by
    1.5× after each acceptance and shrinks by ``backtrack_factor`` on
    rejection; StepUnderflow is declared below 1e-14 × initial_step.
    """
    _check_coupling(c, opts.harmonic_mode)
    domain = phi0.domain
    vol = domain.node_volume
    t0 = opts.initial_step if opts.initial_step is not None else default_initial_step(domain, c)
    if t0 <= 0:
        raise ValueError("initial step must be positive")

    values = phi0.values.copy()
    energy = _raw_interpolating_energy(values, domain, c)
    t = t0

    energies, residuals, steps, recorded = [], [], [], []
    converged = False
    termination = Termination.MAX_ITERS
    iteration = 0

    def record(it, res):
        recorded.append(it)
        energies.append(energy)
        residuals.append(res)
        steps.append(t)

    while True:
        g = _tangential_gradient(values, domain, c)
        residual = float(np.max(np.abs(g))) / 2.0
        if iteration % opts.record_every == 0:
            record(iteration, residual)
        if residual <= opts.residual_tol:
            converged = True
            termination = Termination.RESIDUAL_MET
            break
        if iteration >= opts.max_iters:
            termination = Termination.MAX_ITERS
            break

        g_norm_sq = float(np.sum(g * g)) * vol
        accepted = False
        while t >= STEP_UNDERFLOW_FACTOR * t0:
            try:
                candidate = normalize_rows(values - t * g)
            except NearZeroVector:
                t *= opts.backtrack_factor  # blow-down: retry smaller
                continue
            cand_energy = _raw_interpolating_energy(candidate, domain, c)
            if cand_energy <= energy - opts.armijo_c * t * g_norm_sq:
                values, energy = candidate, cand_energy
                t *= STEP_GROWTH
                accepted = True
                break
            t *= opts.backtrack_factor
        if not accepted:
            termination = Termination.STEP_UNDERFLOW
            break
        iteration += 1

    if not recorded or recorded[-1] != iteration:
        g = _tangential_gradient(values, domain, c)
        record(iteration, float(np.max(np.abs(g))) / 2.0)

    final = SphereField(domain, values)
    el_res = _raw_el_residual(values, domain, c)
    el_res -= np.sum(el_res * values, axis=-1, keepdims=True) * values
    return SolveReport(
        final_field=final,
        iterations=iteration,
        energy_history=energies,
        residual_history=residuals,
        stepsize_history=steps,
        recorded_iterations=recorded,
        converged=converged,
        termination=termination,
        noncoercive=c.noncoercive,
        el_residual_sup=float(np.max(np.abs(el_res))),
    )
