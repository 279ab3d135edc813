"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 numeric failure, 64 bad usage.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io as sio
from ._validation import BracketError, DomainError, NumericError
from .eos import EquationOfState
from .radial_field import mutual_energy_quadrature, two_sphere_energy, uniform_ball
from .scaling import rescale_solution
from .shooting import N_GRID, el_residual, solve_star, solve_star_for_mass
from .varmin import collapse_family_energy, discrete_potential, fixed_point_minimize

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_USAGE = 64

VERIFY_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _tolerance(text):
    tol = float(text)
    if not 0 < tol <= 1e-2:
        raise argparse.ArgumentTypeError("tol must lie in (0, 1e-2]")
    return tol


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    p = _Parser(prog="polystar", description="Equilibria of self-gravitating polytropic stars.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def law(sp, K_default=None):
        sp.add_argument("--gamma", type=float, required=True)
        sp.add_argument("--K", type=float, required=K_default is None, default=K_default)
        sp.add_argument("--tol", type=_tolerance, default=1e-10)

    s = sub.add_parser("solve", help="solve one star and write its JSON record")
    law(s)
    which = s.add_mutually_exclusive_group(required=True)
    which.add_argument("--beta", type=float)
    which.add_argument("--mass", type=float)
    s.add_argument("--grid", type=int, default=N_GRID)
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default="json")

    s = sub.add_parser("sweep", help="solve over a geometric mass grid and write CSV")
    law(s)
    s.add_argument("--mass-min", type=float, required=True)
    s.add_argument("--mass-max", type=float, required=True)
    s.add_argument("--points", type=int, default=10)
    s.add_argument("--out")

    s = sub.add_parser("verify", help="run the identity checks and print a table")
    s.add_argument("--gamma-list", type=_float_list, required=True)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--tol", type=_tolerance, default=1e-10)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("scale", help="rescale a stored solution to another mass")
    s.add_argument("--in", dest="path", required=True)
    s.add_argument("--mass", type=float, required=True)
    s.add_argument("--tol", type=_tolerance, default=1e-10)
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default="json")

    s = sub.add_parser("two-body", help="mutual energy of two uniform balls")
    s.add_argument("--m1", type=float, required=True)
    s.add_argument("--m2", type=float, required=True)
    s.add_argument("--D", type=float, required=True)
    s.add_argument("--r1", type=float)
    s.add_argument("--r2", type=float)

    s = sub.add_parser("collapse-demo", help="energy of uniform balls shrinking to a point")
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--mass", type=float, default=1.0)
    s.add_argument("--deltas", type=_float_list,
                   default=[10.0 ** -k for k in range(1, 8)])

    s = sub.add_parser("minimize", help="direct energy minimisation on a grid")
    law(s)
    s.add_argument("--mass", type=float, required=True)
    s.add_argument("--grid", type=int, default=2000)
    s.add_argument("--history")
    s.add_argument("--out")
    return p


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _g(x):
    return format(float(x), ".12g")


def _cmd_solve(a):
    eos = EquationOfState.polytropic(a.K, a.gamma)
    if a.beta is not None:
        sol = solve_star(eos, a.beta, tol=a.tol, n_grid=a.grid)
    else:
        sol = solve_star_for_mass(eos, a.mass, tol=a.tol, n_grid=a.grid)
    text = sio.solution_to_json(sol) if a.format == "json" else sio.profile_to_csv(sol)
    _emit(text, a.out)
    return EXIT_OK


def _sweep_row(args):
    gamma, K, m, tol = args
    s = solve_star_for_mass(EquationOfState.polytropic(K, gamma), m, tol=tol)
    e = s.energies
    return (gamma, m, s.beta, s.R, s.M, s.lam, e.U, e.G, e.E0)


def _threads():
    raw = os.environ.get("STELLAR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"STELLAR_THREADS must be an integer, got {raw!r}") from None


def _cmd_sweep(a):
    if not 0 < a.mass_min <= a.mass_max or a.points < 1:
        raise DomainError("need 0 < mass-min <= mass-max and points >= 1")
    EquationOfState.polytropic(a.K, a.gamma)
    masses = np.geomspace(a.mass_min, a.mass_max, a.points) if a.points > 1 else [a.mass_min]
    jobs = [(a.gamma, a.K, float(m), a.tol) for m in masses]
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    _emit(sio.sweep_to_csv(rows), a.out)
    return EXIT_OK


def verify_rows(gamma, K=1.0, tol=1e-10, seed=0):
    """(gamma, check, value, limit) rows for one adiabatic index."""
    sol = solve_star(EquationOfState.polytropic(K, gamma), 1.0, tol=tol)
    res = sol.energies.virial_residuals
    rows = [
        (gamma, "G = (6g-6) U", res["G"], VERIFY_TOL),
        (gamma, "E0 = (4-3g) U", res["E0"], VERIFY_TOL),
        (gamma, "E0 = int(4A - 3 s A')", res["pohozaev"], VERIFY_TOL),
        (gamma, "lambda = (6-5g) U / M", res["lambda"], VERIFY_TOL),
        (gamma, "lambda = -M/R = beta - V(0)",
         abs(sol.lambda_check - sol.lam) / abs(sol.lam), VERIFY_TOL),
        (gamma, "Euler-Lagrange residual", el_residual(sol) / sol.beta, VERIFY_TOL),
    ]
    r_out = sol.R * np.geomspace(1.0, 50.0, 64)
    shell = float(np.max(np.abs(sol.potential(r_out) - sol.M / r_out)))
    rows.append((gamma, "exterior V = M/r", shell / (sol.M / sol.R), VERIFY_TOL))

    rng = np.random.default_rng(seed)
    m1, m2 = rng.uniform(0.5, 2.0, 2)
    r1, r2 = rng.uniform(0.5, 1.5, 2)
    D = (r1 + r2) * rng.uniform(1.1, 3.0)
    b1, b2 = uniform_ball(m1, r1), uniform_ball(m2, r2)
    exact = two_sphere_energy(b1, b2, D)
    quad = mutual_energy_quadrature(b1, b2, D)
    rows.append((gamma, "two-body m1 m2 / D", abs(quad - exact) / abs(exact), VERIFY_TOL))
    return rows


def _cmd_verify(a):
    failed = False
    print(f"{'gamma':>8}  {'check':<30} {'value':>12} {'limit':>8}  verdict")
    for gamma in a.gamma_list:
        for g, name, value, limit in verify_rows(gamma, a.K, a.tol, a.seed):
            ok = value <= limit
            failed |= not ok
            print(f"{g:8.5g}  {name:<30} {value:12.3e} {limit:8.0e}  {'PASS' if ok else 'FAIL'}")
    return EXIT_VALIDATION if failed else EXIT_OK


def _cmd_scale(a):
    doc = sio.read_solution_json(a.path)
    eos = EquationOfState.polytropic(doc["K"], doc["gamma"])
    src = solve_star(eos, doc["beta"], tol=a.tol, n_grid=len(doc["profile"]))
    if abs(src.M - doc["M"]) > 1e-8 * abs(doc["M"]):
        raise DomainError(
            f"stored mass {doc['M']!r} does not match the star rebuilt from beta ({src.M!r})"
        )
    out = rescale_solution(src, a.mass)
    text = sio.solution_to_json(out) if a.format == "json" else sio.profile_to_csv(out)
    _emit(text, a.out)
    return EXIT_OK


def _cmd_two_body(a):
    if a.D <= 0:
        raise DomainError("D must be positive")
    r1 = a.r1 if a.r1 is not None else a.D / 4
    r2 = a.r2 if a.r2 is not None else a.D / 4
    b1, b2 = uniform_ball(a.m1, r1), uniform_ball(a.m2, r2)
    exact = two_sphere_energy(b1, b2, a.D)
    quad = mutual_energy_quadrature(b1, b2, a.D)
    value = _g(a.m1 * a.m2 / a.D)
    if "." not in value and "e" not in value and "n" not in value:
        value += ".0"
    print(value)
    rel = abs(quad - exact) / abs(exact) if exact else abs(quad)
    print(f"# quadrature {_g(quad)} relative gap {rel:.3e}")
    return EXIT_OK if rel <= VERIFY_TOL else EXIT_VALIDATION


def _cmd_collapse(a):
    energies = collapse_family_energy(a.gamma, a.K, a.mass, np.asarray(a.deltas))
    lines = ["delta,energy"] + [f"{_g(d)},{_g(e)}" for d, e in zip(a.deltas, np.atleast_1d(energies))]
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def _cmd_minimize(a):
    eos = EquationOfState.polytropic(a.K, a.gamma)
    d = fixed_point_minimize(eos, a.mass, tol=a.tol, n=a.grid)
    if a.history:
        _emit(sio.history_to_csv(d.history), a.history)
    V = discrete_potential(d.r, d.rho)
    _emit(sio.profile_rows_to_csv(d.r, d.rho, np.cumsum(d.weights * d.rho), V), a.out)
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
    "scale": _cmd_scale,
    "two-body": _cmd_two_body,
    "collapse-demo": _cmd_collapse,
    "minimize": _cmd_minimize,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"polystar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"polystar: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, BracketError, ValueError, OSError, KeyError) as exc:
        print(f"polystar: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
