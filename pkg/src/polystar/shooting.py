"""Outward integration of the radial potential equation and star assembly.

Inside a star the shifted potential ``Theta = V + lambda`` satisfies

    Theta'' + (2/r) Theta' = -4 pi phi(Theta),   Theta(0) = beta, Theta'(0) = 0

and the stellar surface is the first zero ``R(beta)``.  The density is
``phi(Theta)`` and the multiplier is ``-M/R``.  The mass is integrated from
the density rather than read off ``-R^2 Theta'(R)``: the dense output of the
step that straddles the surface is only accurate to ~1e-9 in ``Theta'``.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import energetics
from ._validation import (
    BracketError,
    ConsistencyError,
    DomainError,
    NumericError,
    UnboundedSupportError,
)
from .eos import lane_emden_length
from .radial_field import RadialDensity, potential_profile

log = logging.getLogger(__name__)

N_GRID = 2000
START_FRACTION = 1e-6
MAX_STEP_FRACTION = 0.05
UNBOUNDED_GAMMA = 1.2 + 1e-12


@dataclass(frozen=True, eq=False)
class ThetaProfile:
    beta: float
    r: np.ndarray
    theta: np.ndarray
    theta_prime: np.ndarray
    R_of_beta: float
    theta_fn: object = None
    theta_prime_fn: object = None
    n_steps: int = 0


@dataclass(frozen=True, eq=False)
class StellarSolution:
    eos: object
    beta: float
    R: float
    M: float
    lam: float
    theta: ThetaProfile
    density: RadialDensity
    potential: object
    lambda_check: float
    energies: object = None

    @property
    def gamma(self):
        return self.eos.gamma

    @property
    def K(self):
        return self.eos.K

    @property
    def mass_profile(self):
        return self.density.mass_samples

    @property
    def sigma(self):
        return self.density.sigma

    @property
    def r(self):
        return self.density.r


def _fast_phi(eos):
    if eos.is_polytropic:
        n = 1.0 / (eos.gamma - 1.0)
        c = (eos.gamma - 1.0) / (eos.K * eos.gamma)
        return lambda y: (c * y) ** n if y > 0 else 0.0
    return lambda y: float(eos.phi(y)) if y > 0 else 0.0


def integrate_theta(eos, beta, tol=1e-10, atol=1e-12, r_max=None, n_grid=N_GRID):
    """Integrate from the centre to the first zero of Theta.

    ``r_max`` defaults to 1e4 Lane-Emden lengths; running past it raises
    :class:`UnboundedSupportError`.
    """
    beta = float(beta)
    if not beta > 0:
        raise DomainError(f"central value beta must be positive, got {beta!r}")
    if eos.is_polytropic and eos.gamma <= UNBOUNDED_GAMMA:
        # index n = 1/(gamma - 1) >= 5: the Lane-Emden function never vanishes
        raise UnboundedSupportError(
            f"gamma={eos.gamma} <= 6/5 gives a star of infinite radius", beta=beta, gamma=eos.gamma,
        )
    phi = _fast_phi(eos)
    phi_c = phi(beta)
    length = lane_emden_length(eos, beta)
    if r_max is None:
        r_max = 1e4 * length
    r0 = START_FRACTION * length
    # two-term series about the regular singular point r = 0
    c2 = 2.0 * math.pi / 3.0 * phi_c
    y0 = [beta - c2 * r0**2, -2.0 * c2 * r0]

    def rhs(r, y):
        th, dth = y
        return [dth, -2.0 * dth / r - 4.0 * math.pi * phi(th)]

    def surface(r, y):
        return y[0]

    surface.terminal = True
    surface.direction = -1

    sol = solve_ivp(
        rhs, (r0, r_max), y0, method="DOP853", rtol=tol,
        atol=[atol * beta, atol * beta / length], events=surface, dense_output=True,
        max_step=MAX_STEP_FRACTION * length,
    )
    if sol.status == -1:
        raise NumericError(f"radial integration failed: {sol.message}", beta=beta)
    if sol.status != 1 or not len(sol.t_events[0]):
        raise UnboundedSupportError(
            f"no zero of Theta before r_max={r_max:g}; support may be unbounded",
            beta=beta, r_max=r_max, theta_end=float(sol.y[0, -1]),
        )
    R = float(sol.t_events[0][0])
    dense = sol.sol
    # polish the root on the dense output
    lo, hi = R * (1 - 1e-9), min(R * (1 + 1e-9), sol.t[-1])
    if dense(lo)[0] > 0 > dense(hi)[0]:
        R = brentq(lambda x: dense(x)[0], lo, hi, xtol=1e-16 * R, rtol=4 * np.finfo(float).eps)
    if abs(dense(R)[0]) > 1e-12 * beta:
        raise NumericError("surface location did not converge", beta=beta, R=R)

    def theta_fn(x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, r0, R)
        out = dense(xc.ravel())[0].reshape(x.shape)
        return np.where(x < r0, beta - c2 * x**2, out)

    def theta_prime_fn(x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, r0, R)
        out = dense(xc.ravel())[1].reshape(x.shape)
        return np.where(x < r0, -2.0 * c2 * x, out)

    r = np.linspace(0.0, R, n_grid)
    theta = theta_fn(r)
    theta[0], theta[-1] = beta, 0.0
    theta_prime = theta_prime_fn(r)
    theta_prime[0] = 0.0
    return ThetaProfile(beta, r, theta, theta_prime, R, theta_fn, theta_prime_fn, int(sol.t.size))


def _vacuum(eos, n_grid):
    r = np.linspace(0.0, 1.0, n_grid)
    zeros = np.zeros(n_grid)
    theta = ThetaProfile(0.0, r, zeros, zeros, 0.0, lambda x: np.zeros(np.shape(x)),
                         lambda x: np.zeros(np.shape(x)), 0)
    d = RadialDensity(r, zeros, sigma_fn=lambda x: np.zeros(np.shape(x)),
                      mass_fn=lambda x: np.zeros(np.shape(x)))
    sol = StellarSolution(eos, 0.0, 0.0, 0.0, 0.0, theta, d, potential_profile(d), 0.0)
    return replace(sol, energies=energetics.virial_report(sol))


def assemble(eos, theta, density=None, tol=1e-10, with_energies=True):
    """Build a :class:`StellarSolution` from an integrated Theta profile."""
    if density is None:
        phi = eos.phi
        tf = theta.theta_fn
        density = RadialDensity(
            theta.r,
            phi(np.maximum(theta.theta, 0.0)),
            sigma_fn=lambda x: phi(np.maximum(tf(x), 0.0)),
        )
    R = theta.R_of_beta
    M = density.M
    potential = potential_profile(density)
    lam = -M / R
    lam_check = theta.beta - potential.V_at_zero
    if abs(lam_check - lam) > 10 * tol * abs(lam):
        raise ConsistencyError(
            "multiplier determinations disagree",
            lam_surface=lam, lam_centre=lam_check, tol=tol,
        )
    sol = StellarSolution(eos, theta.beta, R, M, lam, theta, density, potential, lam_check)
    if with_energies:
        sol = replace(sol, energies=energetics.virial_report(sol))
    return sol


def solve_star(eos, beta, tol=1e-10, n_grid=N_GRID, r_max=None, with_energies=True):
    """Equilibrium star with central potential value ``beta``; ``beta = 0`` is vacuum."""
    beta = float(beta)
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    if beta == 0.0:
        return _vacuum(eos, n_grid)
    theta = integrate_theta(eos, beta, tol=tol, r_max=r_max, n_grid=n_grid)
    return assemble(eos, theta, tol=tol, with_energies=with_energies)


def el_residual(sol):
    """Sup-norm residual of the Euler-Lagrange equation for a solved star."""
    return energetics.el_residual_of(sol.eos, sol.density, sol.lam, potential=sol.potential)


def surface_mass(eos, beta, tol=1e-10):
    """Total mass of the star with central value ``beta`` (no energies, coarse grid)."""
    if beta == 0:
        return 0.0
    return solve_star(eos, beta, tol=tol, n_grid=129, with_energies=False).M


def mass_of_beta(eos, beta, tol=1e-10):
    return solve_star(eos, beta, tol=tol, n_grid=N_GRID, with_energies=False).M


def beta_of_mass(eos, m, bracket=None, tol=1e-10):
    """Invert the strictly increasing map ``beta -> M``.

    Polytropes seed the bracket with the power law ``beta ~ m^((2g-2)/(3g-4))``
    anchored at ``beta = 1``; other laws need ``bracket`` or fall back to a
    geometric search from 1.
    """
    m = float(m)
    if m < 0:
        raise DomainError("mass must be nonnegative")
    if m == 0.0:
        return 0.0

    def excess(b):
        return surface_mass(eos, b, tol=tol) - m

    if bracket is None and eos.is_polytropic:
        g = eos.gamma
        expo = (2 * g - 2) / (3 * g - 4)
        m1 = surface_mass(eos, 1.0, tol=tol)
        guess = math.exp(expo * math.log(m / m1))
        lo, hi = guess * (1 - 1e-7), guess * (1 + 1e-7)
    elif bracket is None:
        lo, hi = 0.5, 2.0
    else:
        lo, hi = (float(b) for b in bracket)
        if not 0 < lo < hi:
            raise BracketError("bracket must satisfy 0 < lo < hi")
        if excess(lo) * excess(hi) > 0:
            raise BracketError(f"no sign change of M(beta) - m on [{lo}, {hi}]")
    f_lo, f_hi = excess(lo), excess(hi)
    grow = 0
    while f_lo > 0:
        lo /= 2.0
        f_lo = excess(lo)
        grow += 1
        if grow > 200:
            raise BracketError("could not bracket the requested mass from below")
    while f_hi < 0:
        hi *= 2.0
        f_hi = excess(hi)
        grow += 1
        if grow > 200:
            raise BracketError("could not bracket the requested mass from above")
    beta = brentq(excess, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=200)
    if bracket is None and eos.is_polytropic:
        log.debug("beta_of_mass: root %.17g vs power law %.17g", beta, guess)
    return beta


def solve_star_for_mass(eos, m, tol=1e-10, n_grid=N_GRID, with_energies=True):
    return solve_star(eos, beta_of_mass(eos, m, tol=tol), tol=tol, n_grid=n_grid,
                      with_energies=with_energies)
