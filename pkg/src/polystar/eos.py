"""Pressure laws and the internal-energy kernels derived from them.

For a pressure law ``P(s)`` the internal energy density is

    A(s) = s * integral_0^s P(t) t**-2 dt

with marginal ``A'(s) = (A(s) + P(s)) / s`` and ``A''(s) = P'(s) / s``.
``phi`` is the inverse of ``A'``.  Polytropes ``P = K s**gamma`` have all of
these in closed form; tabulated laws use a dense table of the integral
built once per law, with :func:`a_by_quadrature` as the reference.
"""

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ._validation import DomainError, NumericError, check_nonnegative

FOUR_THIRDS = 4.0 / 3.0
TABLE_POINTS = 6001
TABLE_MARGIN = 3 * math.log(10.0)


def _scalar_or_array(values, like):
    if np.ndim(like) == 0:
        return float(values)
    return values


def a_by_quadrature(pressure, s, tol=1e-10):
    """Evaluate ``s * int_0^s P(t)/t^2 dt`` for a pressure callable.

    Uses ``t = s u^2`` so the integrand ``2 P(s u^2) / u^3`` stays bounded
    at ``u = 0`` whenever ``P(t) = o(t^(4/3))``.
    """
    s = float(s)
    if s < 0:
        raise DomainError("density must be nonnegative")
    if s == 0.0:
        return 0.0

    def integrand(u):
        if u == 0.0:
            return 0.0
        return 2.0 * pressure(s * u * u) / u**3

    value, err = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=tol, limit=200)
    if not np.isfinite(value) or err > max(10 * tol * abs(value), 1e-300):
        raise NumericError(
            "quadrature for A(s) did not converge", s=s, value=value, error_estimate=err
        )
    return value


@dataclass(frozen=True)
class AssumptionReport:
    """Verdicts per assumption: ``"pass"``, ``"fail"`` or ``"inconclusive"``."""

    F1: str
    F2: str
    F3: str
    F4: str
    f_convex: str
    g_concave: str
    f_positive_near_zero: str
    details: dict = field(default_factory=dict, compare=False)

    @property
    def all_pass(self):
        return all(
            v == "pass"
            for v in (self.F1, self.F2, self.F3, self.F4, self.f_convex,
                      self.g_concave, self.f_positive_near_zero)
        )


@dataclass(frozen=True)
class EquationOfState:
    """Barotropic pressure law, either ``K s**gamma`` or a monotone table.

    Use :meth:`polytropic`, :meth:`tabulated` or :meth:`from_csv` rather than
    the bare constructor.
    """

    kind: str
    K: float = 1.0
    gamma: float = 2.0
    table: tuple = None
    quad_tol: float = 1e-10

    def __post_init__(self):
        if self.kind == "polytropic":
            if not (self.K > 0 and np.isfinite(self.K)):
                raise DomainError(f"K must be positive, got {self.K!r}")
            if not self.gamma > 1:
                raise DomainError(f"gamma must exceed 1, got {self.gamma!r}")
        elif self.kind == "tabulated":
            if self.table is None:
                raise DomainError("tabulated equation of state needs a table")
            s, p = (np.asarray(c, dtype=float) for c in self.table)
            if s.ndim != 1 or s.shape != p.shape or s.size < 3:
                raise DomainError("table needs matching 1-D columns with at least 3 rows")
            if s[0] != 0.0 or p[0] != 0.0:
                raise DomainError("table must start with the row s=0, P=0")
            if np.any(np.diff(s) <= 0):
                raise DomainError("table densities must be strictly increasing")
            if np.any(p[1:] <= 0):
                raise DomainError("table pressures must be positive for s > 0")
        else:
            raise DomainError(f"unknown equation of state kind {self.kind!r}")
        if not 0 < self.quad_tol < 1:
            raise DomainError("quad_tol must lie in (0, 1)")

    @classmethod
    def polytropic(cls, K, gamma, quad_tol=1e-10):
        return cls("polytropic", K=float(K), gamma=float(gamma), quad_tol=quad_tol)

    @classmethod
    def tabulated(cls, s, P, quad_tol=1e-10):
        table = (tuple(float(v) for v in s), tuple(float(v) for v in P))
        return cls("tabulated", K=float("nan"), gamma=float("nan"), table=table,
                   quad_tol=quad_tol)

    @classmethod
    def from_csv(cls, path, quad_tol=1e-10):
        """Read a table with header ``s,P``."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["s", "P"]:
                raise DomainError(f"{path}: expected header 's,P'")
            try:
                rows = [(float(r["s"]), float(r["P"])) for r in reader]
            except (TypeError, ValueError) as exc:
                raise DomainError(f"{path}: unreadable row ({exc})") from None
        s, p = zip(*rows)
        return cls.tabulated(s, p, quad_tol=quad_tol)

    @property
    def is_polytropic(self):
        return self.kind == "polytropic"

    # -- tabulated machinery -------------------------------------------------

    @cached_property
    def _log_interp(self):
        s, p = (np.asarray(c, dtype=float) for c in self.table)
        ls, lp = np.log(s[1:]), np.log(p[1:])
        low = (lp[1] - lp[0]) / (ls[1] - ls[0])
        high = (lp[-1] - lp[-2]) / (ls[-1] - ls[-2])
        return PchipInterpolator(ls, lp, extrapolate=False), ls, lp, low, high

    def _log_p_and_slope(self, s):
        spl, ls, lp, low, high = self._log_interp
        x = np.log(s)
        logp = np.empty_like(x)
        slope = np.empty_like(x)
        lo = x < ls[0]
        hi = x > ls[-1]
        mid = ~(lo | hi)
        logp[lo] = lp[0] + low * (x[lo] - ls[0])
        slope[lo] = low
        logp[hi] = lp[-1] + high * (x[hi] - ls[-1])
        slope[hi] = high
        logp[mid] = spl(x[mid])
        slope[mid] = spl(x[mid], 1)
        return logp, slope

    # -- kernels -------------------------------------------------------------

    def pressure(self, s):
        s_arr = check_nonnegative(s)
        if self.is_polytropic:
            out = self.K * s_arr**self.gamma
        else:
            flat = np.atleast_1d(s_arr).astype(float)
            out = np.zeros_like(flat)
            pos = flat > 0
            if np.any(pos):
                out[pos] = np.exp(self._log_p_and_slope(flat[pos])[0])
            out = out.reshape(np.shape(s_arr))
        return _scalar_or_array(out, s)

    def pressure_derivative(self, s):
        s_arr = check_nonnegative(s)
        if self.is_polytropic:
            with np.errstate(divide="ignore"):
                out = self.K * self.gamma * s_arr ** (self.gamma - 1)
        else:
            flat = np.atleast_1d(s_arr).astype(float)
            out = np.zeros_like(flat)
            pos = flat > 0
            if np.any(pos):
                logp, slope = self._log_p_and_slope(flat[pos])
                out[pos] = np.exp(logp) * slope / flat[pos]
            out = out.reshape(np.shape(s_arr))
        return _scalar_or_array(out, s)

    @cached_property
    def _energy_table(self):
        """Dense log grid of I(s) = int_0^s P(t)/t^2 dt, so A = s I and A' = I + P/s.

        Cells are integrated with 8-point Gauss rules in log t; below the
        grid the power-law extension gives ``I = P/(s (low - 1))`` exactly.
        """
        _, ls, _, low, high = self._log_interp
        if low <= 1.0:
            raise DomainError("pressure must vanish faster than s at zero density")
        x = np.linspace(ls[0] - TABLE_MARGIN, ls[-1] + TABLE_MARGIN, TABLE_POINTS)
        gx, gw = np.polynomial.legendre.leggauss(8)
        half = 0.5 * np.diff(x)
        nodes = (0.5 * (x[:-1] + x[1:]))[:, None] + half[:, None] * gx
        logp_nodes = self._log_p_and_slope(np.exp(nodes.ravel()))[0].reshape(nodes.shape)
        cells = half * (np.exp(logp_nodes - nodes) @ gw)
        logp, _ = self._log_p_and_slope(np.exp(x))
        I = np.concatenate(([0.0], np.cumsum(cells))) + math.exp(logp[0] - x[0]) / (low - 1.0)
        log_ap = np.log(I + np.exp(logp - x))
        return (x, I, PchipInterpolator(x, np.log(I)), log_ap,
                PchipInterpolator(log_ap, x), low, high)

    def _integral_I(self, s):
        """I(s) for positive s (array)."""
        x_grid, I_grid, spl, _, _, low, high = self._energy_table
        x = np.log(s)
        out = np.empty_like(x)
        lo, hi = x < x_grid[0], x > x_grid[-1]
        mid = ~(lo | hi)
        out[mid] = np.exp(spl(x[mid]))
        if np.any(lo):
            out[lo] = np.exp(self._log_p_and_slope(s[lo])[0] - x[lo]) / (low - 1.0)
        if np.any(hi):
            p_end = math.exp(self._log_p_and_slope(np.array([math.exp(x_grid[-1])]))[0][0] - x_grid[-1])
            ratio = np.exp((high - 1.0) * (x[hi] - x_grid[-1]))
            out[hi] = I_grid[-1] + p_end * (ratio - 1.0) / (high - 1.0)
        return out

    def internal_energy_density(self, s):
        """A(s); closed form for polytropes, integral table otherwise."""
        s_arr = check_nonnegative(s)
        if self.is_polytropic:
            out = self.K / (self.gamma - 1) * s_arr**self.gamma
        else:
            flat = np.atleast_1d(s_arr).astype(float)
            out = np.zeros_like(flat)
            pos = flat > 0
            if np.any(pos):
                out[pos] = flat[pos] * self._integral_I(flat[pos])
            out = out.reshape(np.shape(s_arr))
        return _scalar_or_array(out, s)

    def a_prime(self, s):
        s_arr = check_nonnegative(s)
        if self.is_polytropic:
            out = self.K * self.gamma / (self.gamma - 1) * s_arr ** (self.gamma - 1)
        else:
            flat = np.atleast_1d(s_arr).astype(float)
            out = np.zeros_like(flat)
            pos = flat > 0
            if np.any(pos):
                sp = flat[pos]
                out[pos] = self._integral_I(sp) + self.pressure(sp) / sp
            out = out.reshape(np.shape(s_arr))
        return _scalar_or_array(out, s)

    def a_second(self, s):
        s_arr = check_nonnegative(s)
        if np.any(s_arr == 0):
            raise DomainError("A''(s) is not defined at s = 0")
        if self.is_polytropic:
            out = self.K * self.gamma * s_arr ** (self.gamma - 2)
        else:
            out = self.pressure_derivative(s_arr) / s_arr
        return _scalar_or_array(out, s)

    def phi(self, y):
        """Inverse of ``A'``: the density whose marginal energy is ``y``."""
        y_arr = check_nonnegative(y, "y")
        if self.is_polytropic:
            g = self.gamma
            out = ((g - 1) * y_arr / (self.K * g)) ** (1.0 / (g - 1))
        else:
            flat = np.atleast_1d(y_arr).astype(float)
            out = np.zeros_like(flat)
            pos = flat > 0
            if np.any(pos):
                out[pos] = self._phi_tabulated(flat[pos])
            out = out.reshape(np.shape(y_arr))
        return _scalar_or_array(out, y)

    def _phi_tabulated(self, y):
        x_grid, _, _, log_ap, inv, low, _ = self._energy_table
        ly = np.log(y)
        out = np.empty_like(ly)
        lo, hi = ly < log_ap[0], ly > log_ap[-1]
        mid = ~(lo | hi)
        out[mid] = np.exp(inv(ly[mid]))
        # A' is a pure power s^(low-1) below the table
        out[lo] = np.exp(x_grid[0] + (ly[lo] - log_ap[0]) / (low - 1.0))
        for i in np.flatnonzero(hi):
            target = y[i]
            top = math.exp(x_grid[-1])
            lo_s, hi_s = top, 2 * top
            while self.a_prime(hi_s) < target:
                lo_s, hi_s = hi_s, 2 * hi_s
                if hi_s > 1e300:
                    raise NumericError("could not bracket phi(y)", y=float(target))
            out[i] = brentq(lambda v: self.a_prime(v) - target, lo_s, hi_s,
                            rtol=4 * np.finfo(float).eps)
        return out

    def g_profile(self, s):
        """4 A(s) - 3 s A'(s)."""
        s_arr = check_nonnegative(s)
        out = 4 * self.internal_energy_density(s_arr) - 3 * s_arr * self.a_prime(s_arr)
        return _scalar_or_array(out, s)

    def f_profile(self, s):
        """A'(s**3)."""
        s_arr = check_nonnegative(s)
        return _scalar_or_array(self.a_prime(s_arr**3), s)


# module-level spellings of the kernels
def pressure(eos, s):
    return eos.pressure(s)


def internal_energy_density(eos, s):
    return eos.internal_energy_density(s)


def a_prime(eos, s):
    return eos.a_prime(s)


def a_second(eos, s):
    return eos.a_second(s)


def phi(eos, y):
    return eos.phi(y)


def g_profile(eos, s):
    return eos.g_profile(s)


def f_profile(eos, s):
    return eos.f_profile(s)


def _second_difference_verdict(fn, grid, sign, tol=1e-6):
    """Classify the sign of centred second differences of ``fn`` on ``grid``.

    ``sign=+1`` asks for convexity, ``-1`` for concavity.  Values are scaled by
    the magnitude of the stencil so the tolerance is relative.
    """
    s = np.asarray(grid, dtype=float)
    h = s * 1e-3
    fp, f0, fm = fn(s + h), fn(s), fn(s - h)
    scale = np.abs(fp) + 2 * np.abs(f0) + np.abs(fm)
    scale = np.where(scale > 0, scale, 1.0)
    d2 = sign * (fp - 2 * f0 + fm) / scale
    worst = float(d2.min())
    if worst >= -tol:
        verdict = "pass"
    elif worst < -100 * tol:
        verdict = "fail"
    else:
        verdict = "inconclusive"
    return verdict, d2


def _slope_verdict(slope, n_points, want_above):
    if slope is None or n_points < 3:
        return "inconclusive"
    if abs(slope - FOUR_THIRDS) < 0.05:
        return "inconclusive"
    above = slope > FOUR_THIRDS
    return "pass" if above == want_above else "fail"


def _decade_slope(s, p, end):
    """Least-squares log-log slope over the first or last decade of samples."""
    s, p = np.asarray(s, float), np.asarray(p, float)
    keep = (s > 0) & (p > 0)
    s, p = s[keep], p[keep]
    if s.size < 2 or s[-1] < 10 * s[0]:
        return None, s.size
    sel = s <= 10 * s[0] if end == "low" else s >= s[-1] / 10
    if sel.sum() < 2:
        return None, int(sel.sum())
    slope = np.polyfit(np.log(s[sel]), np.log(p[sel]), 1)[0]
    return float(slope), int(sel.sum())


def check_assumptions(eos, sample_grid):
    """Check the pressure-law assumptions on a strictly increasing positive grid."""
    grid = np.asarray(sample_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("sample_grid must be a strictly increasing list of positive densities")
    details = {}

    p = eos.pressure(grid)
    f1_ok = eos.pressure(0.0) == 0.0 and bool(np.all(np.diff(p) > 0))
    if not eos.is_polytropic:
        p_tab = np.asarray(eos.table[1])
        f1_ok = f1_ok and bool(np.all(np.diff(p_tab) > 0))
    F1 = "pass" if f1_ok else "fail"

    if eos.is_polytropic:
        F2 = F3 = "pass" if eos.gamma > FOUR_THIRDS else "fail"
        F4 = "pass"
        details["gamma"] = eos.gamma
    else:
        s_tab, p_tab = eos.table
        low, n_low = _decade_slope(s_tab, p_tab, "low")
        high, n_high = _decade_slope(s_tab, p_tab, "high")
        details["low_slope"], details["high_slope"] = low, high
        F2 = _slope_verdict(low, n_low, want_above=True)
        F3 = _slope_verdict(high, n_high, want_above=True)
        F4 = "pass" if np.all(eos.pressure_derivative(grid) > 0) else "fail"

    f_convex, d2f = _second_difference_verdict(eos.f_profile, grid, +1)
    g_concave, _ = _second_difference_verdict(eos.g_profile, grid, -1)
    # strictly positive curvature of f somewhere in the lowest decile of the grid
    near = grid <= grid[0] + 0.1 * (grid[-1] - grid[0])
    near[: max(1, grid.size // 10)] = True
    f_pos = "pass" if np.any(d2f[near] > 1e-6) else "fail"
    details["f_second_difference_min"] = float(d2f.min())
    return AssumptionReport(F1, F2, F3, F4, f_convex, g_concave, f_pos, details)


def polytropic_phi_power(eos):
    """Exponent n with phi(y) proportional to y**n (the polytropic index)."""
    if not eos.is_polytropic:
        raise DomainError("only polytropes have a power-law phi")
    return 1.0 / (eos.gamma - 1.0)


def lane_emden_length(eos, beta):
    """Length unit that turns the radial potential ODE into the Lane-Emden form."""
    beta = float(beta)
    return math.sqrt(beta / (4 * math.pi * float(eos.phi(beta))))
