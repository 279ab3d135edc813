"""Direct minimisation of the stellar energy on a radial grid.

This is deliberately independent of the shooting solver: the density is
found by damped iteration of the Euler-Lagrange map

    rho <- (1 - d) rho + d phi([V_rho + lam]_+)

with ``lam`` re-solved each sweep so the update carries the target mass.
The discrete energy uses trapezoid volume weights ``w_i`` and the exact
shell kernel ``1/max(r_i, r_j)``, so ``discrete_gradient`` is the true
gradient of ``discrete_energy``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._validation import DomainError, NonConvergenceError, NumericError, check_gamma

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DiscreteDensity:
    r: np.ndarray
    rho: np.ndarray
    m: float
    lam_hat: float = 0.0
    history: list = field(default_factory=list)

    @property
    def weights(self):
        return volume_weights(self.r)

    @property
    def mass(self):
        return float(self.weights @ self.rho)


def volume_weights(r):
    """Trapezoid weights for int f d^3x = sum w_i f(r_i)."""
    r = np.asarray(r, dtype=float)
    h = np.diff(r)
    w = np.zeros_like(r)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return 4 * np.pi * r**2 * w


def discrete_potential(r, rho, w=None):
    """V_i = sum_j w_j rho_j / max(r_i, r_j)."""
    w = volume_weights(r) if w is None else w
    q = w * rho
    inner = np.cumsum(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_r = np.where(r > 0, 1.0 / r, 0.0)
    outer = np.cumsum((q * inv_r)[::-1])[::-1]
    outer = np.concatenate((outer[1:], [0.0]))
    return inner * inv_r + outer


def discrete_energy(eos, d):
    w = d.weights
    V = discrete_potential(d.r, d.rho, w)
    return float(w @ eos.internal_energy_density(d.rho) - 0.5 * (w * d.rho) @ V)


def discrete_gradient(eos, d):
    """Gradient of :func:`discrete_energy` in the samples: w_i (A'(rho_i) - V_i)."""
    w = d.weights
    V = discrete_potential(d.r, d.rho, w)
    return w * (eos.a_prime(d.rho) - V)


def discrete_el_residual(eos, d):
    """Sup-norm defect of A'(rho) = [V + lam]_+ on the grid."""
    if d.m == 0:
        return 0.0
    V = discrete_potential(d.r, d.rho)
    return float(np.max(np.abs(eos.a_prime(d.rho) - np.maximum(V + d.lam_hat, 0.0))))


def collapse_family_energy(gamma, K, m, delta):
    """Energy of the uniform polytropic ball of mass ``m`` and radius ``delta``.

    U = K/(g-1) m^g (3/(4 pi))^(g-1) delta^(3-3g) and G/2 = (3/5) m^2/delta.
    """
    gamma, K, m = float(gamma), float(K), float(m)
    delta = np.asarray(delta, dtype=float)
    if gamma <= 1 or K <= 0 or m <= 0 or np.any(delta <= 0):
        raise DomainError("need gamma > 1, K > 0, m > 0 and delta > 0")
    U = K / (gamma - 1) * m**gamma * (3 / (4 * np.pi)) ** (gamma - 1) * delta ** (3 - 3 * gamma)
    out = U - 0.6 * m**2 / delta
    return float(out) if out.ndim == 0 else out


def collapse_crossover(gamma, K, m):
    """Radius where the uniform-ball energy is stationary in ``delta``."""
    gamma, K, m = float(gamma), float(K), float(m)
    if math.isclose(gamma, 4 / 3):
        raise DomainError("no stationary radius at gamma = 4/3")
    c = K / (gamma - 1) * m**gamma * (3 / (4 * np.pi)) ** (gamma - 1)
    return ((0.6 * m**2) / ((3 * gamma - 3) * c)) ** (1.0 / (4 - 3 * gamma))


def _uniform_ball_radius(eos, m):
    if eos.is_polytropic:
        return collapse_crossover(eos.gamma, eos.K, m)

    def energy(log_delta):
        delta = math.exp(log_delta)
        vol = 4 * np.pi / 3 * delta**3
        return vol * float(eos.internal_energy_density(m / vol)) - 0.6 * m**2 / delta

    res = minimize_scalar(energy, bounds=(-20, 20), method="bounded")
    return math.exp(res.x)


def _solve_multiplier(eos, V, w, m):
    """Multiplier giving the map phi([V + lam]_+) total mass m."""
    def excess(lam):
        return float(w @ eos.phi(np.maximum(V + lam, 0.0))) - m

    lo = -float(V.max())
    hi = 0.0
    step = max(float(V.max()), 1e-300)
    while excess(hi) < 0:
        hi += step
        step *= 2
        if step > 1e300:
            raise NumericError("multiplier bracket could not be widened")
    return brentq(excess, lo, hi, xtol=1e-15 * step, rtol=4 * np.finfo(float).eps, maxiter=500)


def fixed_point_minimize(eos, m, r_box=None, damping=0.3, tol=1e-10, max_iter=20000,
                         n=2000, check_descent=True, max_expansions=6):
    """Minimise the energy at mass ``m`` over radially decreasing densities.

    ``r_box`` defaults to three times the radius of the best uniform ball.
    The box is enlarged when the density reaches its edge.  Iteration stops
    when successive iterates differ by at most ``tol`` relative to the
    central density.
    """
    if eos.is_polytropic:
        check_gamma(eos.gamma, what="energy minimisation (energy is unbounded below for gamma < 4/3)")
    m = float(m)
    if m < 0:
        raise DomainError("mass must be nonnegative")
    if not 0 < damping <= 1:
        raise DomainError("damping must lie in (0, 1]")
    if r_box is None:
        r_box = 3.0 * _uniform_ball_radius(eos, m) if m > 0 else 1.0
    if m == 0:
        r = np.linspace(0.0, r_box, n)
        return DiscreteDensity(r, np.zeros(n), 0.0, 0.0, [])

    for _ in range(max_expansions + 1):
        result = _iterate(eos, m, r_box, damping, tol, max_iter, n, check_descent)
        if result is not None:
            return result
        r_box *= 1.5
        log.info("support reached the box edge; enlarging r_box to %g", r_box)
    raise NonConvergenceError("density kept touching the box edge", r_box=r_box)


def _iterate(eos, m, r_box, damping, tol, max_iter, n, check_descent):
    r = np.linspace(0.0, r_box, n)
    w = volume_weights(r)
    delta = _uniform_ball_radius(eos, m)
    rho = np.where(r <= min(delta, 0.9 * r_box), 1.0, 0.0)
    rho *= m / (w @ rho)

    history = []
    energy_prev = math.inf
    for it in range(1, max_iter + 1):
        V = discrete_potential(r, rho, w)
        energy = float(w @ eos.internal_energy_density(rho) - 0.5 * (w * rho) @ V)
        lam = _solve_multiplier(eos, V, w, m)
        target = eos.phi(np.maximum(V + lam, 0.0))
        residual = float(np.max(np.abs(eos.a_prime(rho) - np.maximum(V + lam, 0.0))))
        history.append((it, energy, residual, lam))
        if check_descent and energy > energy_prev + 1e-12 * abs(energy_prev):
            raise NonConvergenceError(
                "energy increased along the iteration", iteration=it,
                energy=energy, previous=energy_prev, history=history,
            )
        energy_prev = energy
        new = (1 - damping) * rho + damping * target
        # phi([V + lam]_+) inherits the monotonicity of V, so iterates stay radially decreasing
        change = float(np.max(np.abs(new - rho)) / new.max())
        rho = new
        if rho[-2] > 0:
            return None
        if change <= tol:
            V = discrete_potential(r, rho, w)
            lam = _solve_multiplier(eos, V, w, m)
            return DiscreteDensity(r, rho, m, lam, history)
    raise NonConvergenceError(
        f"fixed point not reached in {max_iter} iterations", history=history,
    )
