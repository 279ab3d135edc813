"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import (
    LANE_EMDEN_ZERO_N15,
    LANE_EMDEN_ZERO_N15_LITERATURE,
    gamma2_closed_form,
    lane_emden_zero,
    potential_brute_force,
)
from polystar import (
    EquationOfState,
    RadialDensity,
    fixed_point_minimize,
    hls_ratio,
    mutual_energy_quadrature,
    potential_profile,
    predicted_multiplier,
    shell_density,
    solve_star,
    solve_star_for_mass,
    two_sphere_energy,
    uniform_ball,
)
from polystar.eos import lane_emden_length
from polystar.scaling import solve_vs_rescale
from polystar.varmin import (
    DiscreteDensity,
    collapse_family_energy,
    discrete_energy,
    discrete_gradient,
    volume_weights,
)

VIRIAL_GAMMAS = (1.6, 5 / 3, 2.0, 2.5, 3.0)
SCALING_GAMMAS = (5 / 3, 2.0, 2.5)

pytestmark = pytest.mark.filterwarnings("error::RuntimeWarning")


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def poly(gamma, K=1.0):
    return EquationOfState.polytropic(K, gamma)


def test_closed_form_gamma2_star():
    eos = poly(2.0, K=2 * math.pi)
    t0 = time.perf_counter()
    sol = solve_star(eos, 1.0)
    elapsed = time.perf_counter() - t0
    want = gamma2_closed_form(1.0)
    r = sol.theta.r[1:]
    theta_err = float(np.max(np.abs(sol.theta.theta[1:] - np.sin(r) / r)))
    errs = {"R": abs(sol.R - want["R"]), "M": abs(sol.M - want["M"]),
            "lambda": abs(sol.lam - want["lam"]), "theta": theta_err}
    ok = max(errs.values()) <= 1e-6 and elapsed < 1.0
    report("closed-form gamma=2 star",
           ok, ", ".join(f"{k} err {v:.1e}" for k, v in errs.items()) + f", {elapsed:.2f} s")


def test_virial_identities():
    worst = {"G": 0.0, "E0": 0.0, "pohozaev": 0.0, "lambda": 0.0}
    for gamma in VIRIAL_GAMMAS:
        sol = solve_star(poly(gamma), 1.0)
        e = sol.energies
        U = abs(e.U)
        worst["G"] = max(worst["G"], abs(e.G - (6 * gamma - 6) * e.U) / U)
        worst["E0"] = max(worst["E0"], abs(e.E0 - (4 - 3 * gamma) * e.U) / U)
        worst["pohozaev"] = max(worst["pohozaev"], abs(e.E0 - e.E0_pohozaev) / U)
        # centre determination beta - V(0) against the surface value -M/R
        worst["lambda"] = max(worst["lambda"], abs(sol.lambda_check - (-sol.M / sol.R)) / abs(sol.lam))
    ok = max(worst.values()) <= 1e-6
    report("virial identities, gamma in {1.6, 5/3, 2, 2.5, 3}", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_scaling_law():
    worst_sigma = worst_energy = 0.0
    for gamma in SCALING_GAMMAS:
        for ratio in (0.5, 2.0, 10.0):
            gaps = solve_vs_rescale(poly(gamma), 1.0, ratio)
            worst_sigma = max(worst_sigma, gaps["sigma"])
            worst_energy = max(worst_energy, gaps["energy_law"])
    ok = worst_sigma <= 1e-6 and worst_energy <= 1e-8
    report("scaling law, 3 gammas x 3 mass ratios", ok,
           f"sigma sup gap {worst_sigma:.1e}, energy exponent gap {worst_energy:.1e}")


def test_multiplier_formula():
    masses = np.geomspace(0.2, 5.0, 10)
    worst_solver = worst_fd = 0.0
    for gamma in SCALING_GAMMAS:
        eos = poly(gamma)
        U_unit = solve_star_for_mass(eos, 1.0).energies.U
        for m in masses:
            lam_pred = predicted_multiplier(gamma, m, U_unit)
            sol = solve_star_for_mass(eos, m)
            worst_solver = max(worst_solver, abs(sol.lam - lam_pred) / abs(lam_pred))
            h = 1e-3 * m
            e_up = solve_star_for_mass(eos, m + h).energies.E0
            e_dn = solve_star_for_mass(eos, m - h).energies.E0
            fd = (e_up - e_dn) / (2 * h)
            worst_fd = max(worst_fd, abs(fd - lam_pred) / abs(lam_pred))
    ok = worst_solver <= 1e-6 and worst_fd <= 1e-4
    report("multiplier formula on 10 masses", ok,
           f"solver gap {worst_solver:.1e}, finite-difference gap {worst_fd:.1e}")


def test_mass_monotone_in_beta():
    betas = np.geomspace(0.1, 100.0, 20)
    all_increasing = all_nested = True
    for gamma in SCALING_GAMMAS:
        sols = [solve_star(poly(gamma), b, n_grid=400, with_energies=False) for b in betas]
        masses = np.array([s.M for s in sols])
        all_increasing &= bool(np.all(np.diff(masses) > 0))
        for lo, hi in zip(sols, sols[1:]):
            shared = min(lo.R, hi.R)
            r = np.linspace(0.0, shared, 202)[1:-1]
            all_nested &= bool(np.all(hi.density.mass_at(r) > lo.density.mass_at(r)))
    report("M(beta) increasing over 20 betas in 3 decades", all_increasing and all_nested,
           f"strictly increasing {all_increasing}, nested mass profiles {all_nested}")


def test_minimiser_matches_shooting():
    worst_gap = worst_time = 0.0
    for gamma in SCALING_GAMMAS:
        eos = poly(gamma)
        for m in (0.5, 1.0, 4.0):
            t0 = time.perf_counter()
            d = fixed_point_minimize(eos, m, n=2000)
            worst_time = max(worst_time, time.perf_counter() - t0)
            ref = solve_star_for_mass(eos, m)
            gap = float(np.max(np.abs(d.rho - ref.density.sigma_at(d.r)))) / ref.sigma[0]
            worst_gap = max(worst_gap, gap)
    ok = worst_gap <= 1e-3 and worst_time < 30.0
    report("energy minimiser vs shooting, 9 runs at 2000 points", ok,
           f"sup gap {worst_gap:.1e}, slowest run {worst_time:.2f} s")


def test_lane_emden_zero():
    coarse = lane_emden_zero(1.5, 1e-3)
    fine = lane_emden_zero(1.5, 1e-4)
    eos = poly(5 / 3)
    beta = 1.0
    xi = solve_star(eos, beta, with_energies=False).R / lane_emden_length(eos, beta)
    ok = (abs(fine - LANE_EMDEN_ZERO_N15_LITERATURE) <= 1e-3
          and abs(xi - LANE_EMDEN_ZERO_N15_LITERATURE) <= 1e-3
          and abs(xi - fine) <= 1e-3
          and abs(fine - LANE_EMDEN_ZERO_N15) <= 1e-8)
    report("Lane-Emden zero for gamma=5/3", ok,
           f"solver {xi:.8f}, RK4 h=1e-3 {coarse:.8f}, RK4 h=1e-4 {fine:.8f}")


def _body(kind, rng):
    if kind == "ball":
        return uniform_ball(rng.uniform(0.3, 3.0), rng.uniform(0.3, 2.0))
    gamma = float(rng.choice([5 / 3, 2.0, 2.5]))
    return solve_star(poly(gamma), rng.uniform(0.3, 3.0), n_grid=400, with_energies=False).density


def test_two_body_energy():
    rng = np.random.default_rng(20240611)
    worst_rel = worst_term = 0.0
    for kinds in (("ball", "ball"), ("ball", "star"), ("star", "ball"), ("star", "star"), ("star", "star")):
        b1, b2 = (_body(k, rng) for k in kinds)
        D = (b1.R_support + b2.R_support) * rng.uniform(1.05, 3.0)
        exact = two_sphere_energy(b1, b2, D)
        total, terms = mutual_energy_quadrature(b1, b2, D, return_terms=True)
        worst_rel = max(worst_rel, abs(total - exact) / abs(exact))
        worst_term = max(worst_term, max(abs(t) for t in terms[1:5]))
    ok = worst_rel <= 1e-6 and worst_term <= 1e-8
    report("two-body energy, 5 random configurations", ok,
           f"relative gap {worst_rel:.1e}, largest l=1..4 term {worst_term:.1e}")


def test_shell_theorem():
    worst_ext = 0.0
    for gamma in VIRIAL_GAMMAS:
        sol = solve_star(poly(gamma), 1.0)
        r = sol.R * np.array([1.0, 1.001, 1.5, 3.0, 10.0])
        point = sol.M / r
        brute = potential_brute_force(sol.density.sigma_at, sol.R, r)
        worst_ext = max(worst_ext, float(np.max(np.abs(brute - point) / point)),
                        float(np.max(np.abs(sol.potential(r) - point) / point)))
    shell = shell_density(0.5, 1.0)
    pot = potential_profile(shell)
    inner = shell.r[shell.r <= 0.5]
    variation = float(np.ptp(pot(inner)))
    probe = np.linspace(0.0, 0.49, 6)
    brute_var = float(np.ptp(potential_brute_force(shell.sigma_fn, 1.0, probe, breaks=[0.5])))
    ok = worst_ext <= 1e-8 and variation <= 1e-8 and brute_var <= 1e-8
    report("shell theorem", ok,
           f"exterior |V - M/r| {worst_ext:.1e}, annulus interior variation {variation:.1e}"
           f" (brute force {brute_var:.1e})")


def test_unbounded_energy_families():
    deltas = 10.0 ** -np.arange(1, 8)
    soft = collapse_family_energy(1.2, 1.0, 1.0, deltas)
    stiff = collapse_family_energy(3.0, 1.0, 1.0, deltas)
    soft_ok = bool(np.all(np.diff(soft) < 0) and soft[-1] < -1e5)
    stiff_ok = bool(np.all(np.diff(stiff) > 0) and stiff[-1] > 1e5)
    report("energy unbounded below for gamma=1.2 and above for gamma=3", soft_ok and stiff_ok,
           f"gamma=1.2 reaches {soft[-1]:.3e}, gamma=3 reaches {stiff[-1]:.3e}")


def test_gradient_and_hls_invariance():
    rng = np.random.default_rng(7)
    worst_grad = 0.0
    for _ in range(10):
        eos = poly(rng.uniform(1.5, 3.0))
        r = np.linspace(0.0, rng.uniform(0.5, 3.0), 200)
        rho = np.sort(rng.uniform(0.05, 2.0, r.size))[::-1]
        d = DiscreteDensity(r, rho, float(volume_weights(r) @ rho))
        analytic = discrete_gradient(eos, d)
        fd = np.empty_like(rho)
        for i in range(rho.size):
            h = 1e-6 * max(rho[i], 1.0)
            up, dn = rho.copy(), rho.copy()
            up[i] += h
            dn[i] -= h
            fd[i] = (discrete_energy(eos, DiscreteDensity(r, up, d.m))
                     - discrete_energy(eos, DiscreteDensity(r, dn, d.m))) / (2 * h)
        worst_grad = max(worst_grad, float(np.max(np.abs(fd - analytic)) / np.max(np.abs(analytic))))

    sol = solve_star(poly(2.5), 1.0, with_energies=False)
    base = hls_ratio(sol.density)
    fn = sol.density.sigma_fn
    worst_hls = 0.0
    for amp, scale in ((3.0, 0.5), (0.2, 7.0), (11.0, 1.3)):
        stretched = RadialDensity(sol.density.r * scale, amp * sol.density.sigma,
                                  sigma_fn=lambda x, a=amp, b=scale: a * fn(np.asarray(x) / b))
        worst_hls = max(worst_hls, abs(hls_ratio(stretched) - base) / base)
    ok = worst_grad <= 1e-5 and worst_hls <= 1e-10
    report("discrete gradient and dilation-invariant ratio", ok,
           f"gradient gap {worst_grad:.1e} on 10 profiles, ratio drift {worst_hls:.1e}")


def test_energy_concave_in_mass():
    masses = np.geomspace(0.1, 10.0, 12)
    worst = -math.inf
    for gamma in SCALING_GAMMAS:
        e = np.array([solve_star_for_mass(poly(gamma), m).energies.E0 for m in masses])
        # second divided differences on the nonuniform grid
        h0, h1 = np.diff(masses)[:-1], np.diff(masses)[1:]
        d2 = 2 * (h0 * e[2:] - (h0 + h1) * e[1:-1] + h1 * e[:-2]) / (h0 * h1 * (h0 + h1))
        worst = max(worst, float(d2.max()))
    report("minimal energy strictly concave in mass", worst < 0,
           f"largest second difference {worst:.3e}")


if __name__ == "__main__":
    import sys

    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
