"""Serialisation of solutions, sweeps and minimisation histories.

JSON numbers carry 17 significant digits so a round trip is exact; CSV
numbers carry 12 for readability.
"""

import csv
import io
import json

import numpy as np

JSON_DIGITS = 17
CSV_DIGITS = 12

PROFILE_HEADER = ("r", "sigma", "mass", "V")
SWEEP_HEADER = ("gamma", "m", "beta", "R", "M", "lambda", "U", "G", "E0")
HISTORY_HEADER = ("iter", "energy", "residual", "lambda_hat")


def _num(x):
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    return x


def _dump(obj, indent, level):
    # json.dumps always uses repr for floats, so numbers are formatted here
    if isinstance(obj, float):
        return format(obj, f".{JSON_DIGITS}g")
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        items = [f"{pad}{json.dumps(k)}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}" if items else "{}"
    items = [pad + _dump(v, indent, level + 1) for v in obj]
    return "[" + sep.join(items) + end + "]" if items else "[]"


def solution_to_dict(sol):
    e = sol.energies
    d = sol.density
    V = sol.potential.V
    theta = sol.theta.theta_fn(d.r) if sol.theta.theta_fn is not None else np.zeros_like(d.r)
    mass = d.mass_samples
    profile = [
        {"r": _num(r), "theta": _num(t), "sigma": _num(s), "mass": _num(m), "V": _num(v)}
        for r, t, s, m, v in zip(d.r, theta, d.sigma, mass, V)
    ]
    return {
        "gamma": _num(sol.eos.gamma),
        "K": _num(sol.eos.K),
        "beta": _num(sol.beta),
        "R": _num(sol.R),
        "M": _num(sol.M),
        "lambda": _num(sol.lam),
        "energies": {
            "U": _num(e.U),
            "G": _num(e.G),
            "E0": _num(e.E0),
            "E0_pohozaev": _num(e.E0_pohozaev),
            "virial_residuals": {k: _num(v) for k, v in sorted(e.virial_residuals.items())},
        },
        "profile": profile,
    }


def solution_to_json(sol, indent=None):
    return _dump(solution_to_dict(sol), indent, 0)


def read_solution_json(path_or_text):
    """Parsed JSON document (a dict); accepts a path or the text itself."""
    text = str(path_or_text)
    if not text.lstrip().startswith("{"):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


def _fmt(x):
    return format(float(x), f".{CSV_DIGITS}g")


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, np.integer)) else _fmt(v) for v in row])
    return buf.getvalue()


def profile_rows_to_csv(r, sigma, mass, V):
    return _csv(PROFILE_HEADER, zip(r, sigma, mass, V))


def profile_to_csv(sol):
    d = sol.density
    return profile_rows_to_csv(d.r, d.sigma, d.mass_samples, sol.potential.V)


def sweep_to_csv(rows):
    return _csv(SWEEP_HEADER, rows)


def history_to_csv(history):
    return _csv(HISTORY_HEADER, ((int(it), e, res, lam) for it, e, res, lam in history))


def read_csv_rows(text):
    """Header and float rows of one of the CSV formats above."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [[float(v) for v in row] for row in reader]
