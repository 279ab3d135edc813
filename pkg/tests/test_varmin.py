import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polystar import DomainError, EquationOfState, NonConvergenceError, fixed_point_minimize, solve_star_for_mass
from polystar.varmin import (
    DiscreteDensity,
    collapse_crossover,
    collapse_family_energy,
    discrete_el_residual,
    discrete_energy,
    discrete_gradient,
    discrete_potential,
    volume_weights,
)


def random_profile(rng, n=200):
    r = np.linspace(0.0, rng.uniform(0.5, 3.0), n)
    # strictly positive so the finite-difference stencil stays in the domain
    rho = np.sort(rng.uniform(0.05, 2.0, n))[::-1]
    return r, rho


def fd_gradient(eos, r, rho, m, h_rel=1e-6):
    g = np.empty_like(rho)
    for i in range(rho.size):
        h = h_rel * max(abs(rho[i]), 1.0)
        up, dn = rho.copy(), rho.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (discrete_energy(eos, DiscreteDensity(r, up, m))
                - discrete_energy(eos, DiscreteDensity(r, dn, m))) / (2 * h)
    return g


@pytest.mark.parametrize("seed", range(3))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    eos = EquationOfState.polytropic(1.0, rng.uniform(1.5, 3.0))
    r, rho = random_profile(rng)
    d = DiscreteDensity(r, rho, float(volume_weights(r) @ rho))
    analytic = discrete_gradient(eos, d)
    fd = fd_gradient(eos, r, rho, d.m)
    assert np.max(np.abs(fd - analytic)) <= 1e-5 * np.max(np.abs(analytic))


def test_discrete_potential_uniform_ball_limit():
    r = np.linspace(0, 1, 4001)
    rho = np.full_like(r, 3 / (4 * np.pi))
    V = discrete_potential(r, rho)
    assert V[0] == pytest.approx(1.5, rel=1e-5)
    assert V[-1] == pytest.approx(1.0, rel=1e-5)


@pytest.mark.parametrize("gamma,m", [(5 / 3, 1.0), (2.0, 2.0), (2.5, 0.5)])
def test_fixed_point_matches_shooting(gamma, m):
    eos = EquationOfState.polytropic(1.0, gamma)
    d = fixed_point_minimize(eos, m)
    ref = solve_star_for_mass(eos, m)
    gap = np.max(np.abs(d.rho - ref.density.sigma_at(d.r))) / ref.sigma[0]
    assert gap <= 1e-3
    assert d.mass == pytest.approx(m, rel=1e-12)
    assert d.lam_hat == pytest.approx(ref.lam, rel=1e-4)
    assert discrete_el_residual(eos, d) <= 10 * 1e-10 * max(1.0, abs(d.lam_hat))
    energies = [row[1] for row in d.history]
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(energies, energies[1:]))


def test_closed_form_star_from_minimiser():
    # gamma=2, K=2 pi, m=pi is the beta=1 star: sigma = sin(r)/(4 pi r) on [0, pi]
    eos = EquationOfState.polytropic(2 * np.pi, 2.0)
    d = fixed_point_minimize(eos, np.pi, r_box=4.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = np.where(d.r < np.pi, np.sinc(d.r / np.pi) / (4 * np.pi), 0.0)
    assert np.max(np.abs(d.rho - exact)) <= 1e-3 * exact[0]
    assert d.lam_hat == pytest.approx(-1.0, rel=1e-4)


def test_fixed_point_zero_mass_and_domain():
    eos = EquationOfState.polytropic(1.0, 2.0)
    d = fixed_point_minimize(eos, 0.0)
    assert d.m == 0.0 and not d.rho.any()
    with pytest.raises(DomainError):
        fixed_point_minimize(eos, -1.0)
    with pytest.raises(DomainError):
        fixed_point_minimize(EquationOfState.polytropic(1.0, 1.2), 1.0)
    with pytest.raises(DomainError):
        fixed_point_minimize(eos, 1.0, damping=0.0)


def test_box_growth_when_support_hits_edge():
    eos = EquationOfState.polytropic(1.0, 2.0)
    ref = solve_star_for_mass(eos, 1.0)
    d = fixed_point_minimize(eos, 1.0, r_box=0.8 * ref.R, n=400)
    assert d.r[-1] > ref.R
    assert d.rho[-1] == 0.0


def test_iteration_cap_reports_history():
    eos = EquationOfState.polytropic(1.0, 2.0)
    with pytest.raises(NonConvergenceError) as info:
        fixed_point_minimize(eos, 1.0, max_iter=3)
    assert len(info.value.diagnostics["history"]) == 3


@given(k=st.integers(min_value=1, max_value=6))
@settings(max_examples=6, deadline=None)
def test_collapse_family_monotone(k):
    d = np.array([10.0 ** -k, 10.0 ** -(k + 1)])
    soft = collapse_family_energy(1.2, 1.0, 1.0, d)
    stiff = collapse_family_energy(3.0, 1.0, 1.0, d)
    assert soft[1] < soft[0]
    assert stiff[1] > stiff[0]


def test_collapse_crossover_is_stationary():
    delta = collapse_crossover(2.0, 1.0, 1.0)
    h = 1e-6 * delta
    slope = (collapse_family_energy(2.0, 1.0, 1.0, delta + h)
             - collapse_family_energy(2.0, 1.0, 1.0, delta - h)) / (2 * h)
    assert abs(slope) <= 1e-6
    with pytest.raises(DomainError):
        collapse_family_energy(2.0, 1.0, 1.0, 0.0)
