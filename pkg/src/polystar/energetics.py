"""Energy functionals of radial densities and the identities between them."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import DomainError
from .radial_field import FOUR_PI, interaction_energy, potential_profile, radial_integral

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EnergyReport:
    U: float
    G: float
    E0: float
    E0_pohozaev: float
    virial_residuals: dict = field(default_factory=dict)
    el_residual: float = 0.0


def internal_energy(eos, d):
    """U = 4 pi int A(sigma) r^2 dr."""
    return FOUR_PI * radial_integral(d, lambda r, s: eos.internal_energy_density(s) * r * r)


def total_energy(eos, d):
    """E0 = U - G/2."""
    return internal_energy(eos, d) - 0.5 * interaction_energy(d)


def pohozaev_energy(eos, d):
    """int (4 A(sigma) - 3 sigma A'(sigma)); equals E0 only at equilibrium."""
    return FOUR_PI * radial_integral(d, lambda r, s: eos.g_profile(s) * r * r)


def variational_derivative_field(eos, d, potential=None):
    """A'(sigma(r)) - V(r) on the density grid; returns ``(r, values)``."""
    pot = potential_profile(d) if potential is None else potential
    return d.r.copy(), eos.a_prime(d.sigma) - pot.V


def el_residual_of(eos, d, lam, potential=None, n_exterior=200):
    """Sup-norm defect of ``A'(sigma) = [V + lam]_+`` inside and outside the support."""
    if d.M == 0.0:
        return 0.0
    pot = potential_profile(d) if potential is None else potential
    interior = np.abs(eos.a_prime(d.sigma) - np.maximum(pot.V + lam, 0.0))
    r_out = np.geomspace(d.R_support, 20 * d.R_support, n_exterior)
    exterior = np.maximum(d.M / r_out + lam, 0.0)
    return float(max(interior.max(), exterior.max()))


def norm_four_thirds(d):
    """int sigma^(4/3) over space."""
    return FOUR_PI * radial_integral(d, lambda r, s: s ** (4.0 / 3.0) * r * r)


def hls_ratio(d):
    """|int rho V_rho| / (||rho||_1^(2/3) ||rho||_{4/3}^{4/3}); dilation invariant."""
    M = d.M
    if M <= 0.0:
        raise DomainError("ratio undefined for the zero density")
    G = interaction_energy(d)
    return abs(G) / (M ** (2.0 / 3.0) * norm_four_thirds(d))


def virial_report(sol):
    """Energies of a solved star and relative residuals of the equilibrium identities.

    For polytropes the residuals compare ``G`` with ``(6 gamma - 6) U``,
    ``E0`` with ``(4 - 3 gamma) U`` and with the Pohozaev form, and the
    multiplier with ``(6 - 5 gamma) U / M``.  All are relative to ``|U|``
    except the multiplier, which is relative to ``|lambda|``.
    """
    eos, d = sol.eos, sol.density
    if sol.M == 0.0:
        zeros = {"G": 0.0, "E0": 0.0, "pohozaev": 0.0, "lambda": 0.0}
        return EnergyReport(0.0, 0.0, 0.0, 0.0, zeros, 0.0)
    U = internal_energy(eos, d)
    G = interaction_energy(d)
    E0 = U - 0.5 * G
    E0p = pohozaev_energy(eos, d)
    scale = max(abs(U), _EPS)
    res = {"pohozaev": abs(E0 - E0p) / scale}
    if eos.is_polytropic:
        g = eos.gamma
        res["G"] = abs(G - (6 * g - 6) * U) / scale
        res["E0"] = abs(E0 - (4 - 3 * g) * U) / scale
        lam_pred = (6 - 5 * g) * U / sol.M
        res["lambda"] = abs(sol.lam - lam_pred) / max(abs(sol.lam), _EPS)
    el = el_residual_of(eos, d, sol.lam, potential=sol.potential)
    return EnergyReport(U, G, E0, E0p, res, el)
