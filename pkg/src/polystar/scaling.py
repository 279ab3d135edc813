"""Mass scaling of polytropic equilibria.

A mass-``m`` minimizer is the dilation ``sigma_m(x) = sigma(x/B)/A`` of the
unit-mass one with ``A = m^(-2/(3g-4))`` and ``B = m^((g-2)/(3g-4))``.
Energies scale as ``m^((5g-6)/(3g-4))``; the multiplier and the variational
derivative as ``m^((2g-2)/(3g-4))``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import ConsistencyError, DomainError, check_gamma, check_positive
from .energetics import variational_derivative_field
from .radial_field import RadialDensity
from .shooting import ThetaProfile, assemble, solve_star_for_mass


@dataclass(frozen=True)
class ScaleExponents:
    a_A: object
    a_B: object
    a_E: object
    a_L: object

    def as_tuple(self):
        return (self.a_A, self.a_B, self.a_E, self.a_L)


def scale_exponents(gamma):
    """Exponents of ``A``, ``B``, the energy and the multiplier in ``m``.

    Pass a :class:`fractions.Fraction` to get exact rational exponents.
    """
    check_gamma(gamma)
    g = gamma if isinstance(gamma, Fraction) else float(gamma)
    two = Fraction(2) if isinstance(g, Fraction) else 2.0
    den = 3 * g - 4
    return ScaleExponents(-two / den, (g - 2) / den, (5 * g - 6) / den, (2 * g - 2) / den)


def mass_power(ratio, exponent):
    """``ratio ** exponent`` evaluated in log space."""
    if ratio == 0:
        return 0.0 if exponent > 0 else math.inf
    return math.exp(float(exponent) * math.log(ratio))


def _polytropic_gamma(sol):
    if not sol.eos.is_polytropic:
        raise DomainError("scaling laws hold for polytropic equations of state only")
    return check_gamma(sol.eos.gamma)


def rescale_solution(sol, m_target, rtol=1e-8):
    """Dilate a solved star to mass ``m_target``.

    Radius, multiplier and energies are recomputed from the dilated profile
    and compared with the exponent-law predictions; a mismatch beyond
    ``rtol`` raises :class:`ConsistencyError`.
    """
    gamma = _polytropic_gamma(sol)
    m_src = check_positive(sol.M, "source mass")
    m_target = check_positive(m_target, "target mass")
    ratio = m_target / m_src
    ex = scale_exponents(gamma)
    A, B = mass_power(ratio, ex.a_A), mass_power(ratio, ex.a_B)
    c_theta = mass_power(ratio, ex.a_L)

    src_sigma, src_theta = sol.density.sigma_fn, sol.theta
    r_new = sol.density.r * B
    density = RadialDensity(
        r_new,
        sol.density.sigma / A,
        sigma_fn=lambda x: src_sigma(np.asarray(x) / B) / A,
    )
    tf, tpf = src_theta.theta_fn, src_theta.theta_prime_fn
    theta = ThetaProfile(
        beta=src_theta.beta * c_theta,
        r=src_theta.r * B,
        theta=src_theta.theta * c_theta,
        theta_prime=src_theta.theta_prime * c_theta / B,
        R_of_beta=src_theta.R_of_beta * B,
        theta_fn=lambda x: c_theta * tf(np.asarray(x) / B),
        theta_prime_fn=lambda x: c_theta / B * tpf(np.asarray(x) / B),
        n_steps=src_theta.n_steps,
    )
    out = assemble(sol.eos, theta, density=density)

    predicted = {
        "R": sol.R * B,
        "M": m_target,
        "lambda": sol.lam * c_theta,
        "E0": sol.energies.E0 * mass_power(ratio, ex.a_E),
        "U": sol.energies.U * mass_power(ratio, ex.a_E),
    }
    measured = {"R": out.R, "M": out.M, "lambda": out.lam, "E0": out.energies.E0,
                "U": out.energies.U}
    for key, want in predicted.items():
        if abs(measured[key] - want) > rtol * abs(want):
            raise ConsistencyError(
                f"rescaled {key} disagrees with the scaling law",
                quantity=key, measured=measured[key], predicted=want,
            )
    return out


def predicted_multiplier(gamma, m, U_unit):
    """lambda_m = -(5g - 6) m^((2g-2)/(3g-4)) U_unit."""
    check_gamma(gamma)
    m = float(m)
    if m < 0:
        raise DomainError("mass must be nonnegative")
    if m == 0:
        return 0.0
    g = float(gamma)
    return -(5 * g - 6) * mass_power(m, (2 * g - 2) / (3 * g - 4)) * float(U_unit)


def predicted_energy(gamma, m, e_unit):
    check_gamma(gamma)
    g = float(gamma)
    return mass_power(float(m), (5 * g - 6) / (3 * g - 4)) * float(e_unit)


@dataclass(frozen=True)
class AsymptoticsReport:
    gamma: float
    central_density_exponent: float
    central_density_limit: str
    radius_exponent: float
    radius_trend: str


def asymptotics_report(gamma):
    """How central density and radius behave as the mass goes to zero."""
    check_gamma(gamma)
    ex = scale_exponents(gamma)
    rho_exp = -ex.a_A
    r_exp = ex.a_B
    if r_exp > 0:
        trend = "shrinks"
    elif r_exp < 0:
        trend = "grows"
    else:
        trend = "fixed"
    return AsymptoticsReport(float(gamma), rho_exp, "zero", r_exp, trend)


def rescaled_derivative_check(sol, m_target):
    """Relative sup-norm gap between the variational derivative of the dilated
    star and ``m^((2g-2)/(3g-4)) * E0'(sigma)(x/B)`` from the source star."""
    gamma = _polytropic_gamma(sol)
    ratio = float(m_target) / sol.M
    if ratio == 1.0:
        return 0.0
    scaled = rescale_solution(sol, m_target)
    _, field_new = variational_derivative_field(sol.eos, scaled.density, scaled.potential)
    _, field_src = variational_derivative_field(sol.eos, sol.density, sol.potential)
    # the dilated grid is the source grid times B, so x/B lands on source nodes
    pred = mass_power(ratio, scale_exponents(gamma).a_L) * field_src
    return float(np.max(np.abs(field_new - pred)) / np.max(np.abs(pred)))


def solve_vs_rescale(eos, m_src, m_target, tol=1e-11):
    """Direct solve at ``m_target`` compared with the dilated ``m_src`` star.

    Returns a dict of relative discrepancies (``sigma`` is a sup norm over
    the dilated grid, scaled by the central density).
    """
    src = solve_star_for_mass(eos, m_src, tol=tol)
    direct = solve_star_for_mass(eos, m_target, tol=tol)
    scaled = rescale_solution(src, m_target)
    sig_direct = direct.density.sigma_at(scaled.density.r)
    out = {
        "sigma": float(np.max(np.abs(sig_direct - scaled.density.sigma)) / scaled.density.sigma[0]),
    }
    for key in ("R", "M", "lam"):
        a, b = getattr(direct, key), getattr(scaled, key)
        out[key] = abs(a - b) / abs(b)
    out["E0"] = abs(direct.energies.E0 - scaled.energies.E0) / abs(scaled.energies.E0)
    ex = scale_exponents(eos.gamma)
    ratio = direct.energies.E0 / src.energies.E0
    out["energy_law"] = abs(ratio - mass_power(m_target / m_src, ex.a_E)) / abs(ratio)
    return out


def sweep(eos, masses, tol=1e-10):
    """One row per mass: (gamma, m, beta, R, M, lambda, U, G, E0)."""
    rows = []
    for m in masses:
        s = solve_star_for_mass(eos, m, tol=tol)
        e = s.energies
        rows.append((eos.gamma, float(m), s.beta, s.R, s.M, s.lam, e.U, e.G, e.E0))
    return rows
