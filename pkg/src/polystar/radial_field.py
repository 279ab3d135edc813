"""Potential theory for spherically symmetric densities.

Densities live on a radial grid ``0 = r_0 < ... < r_{n-1} = R`` and vanish
beyond ``R``.  When a density carries a callable profile (``sigma_fn``),
radial integrals use 16-point Gauss-Legendre on every grid cell with adaptive
quadrature on the outermost cell, where equilibrium profiles have a
power-law edge.  Sample-only densities fall back to composite Simpson.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson, quad, simpson
from scipy.special import eval_legendre

from ._validation import DomainError, NumericError

FOUR_PI = 4.0 * np.pi
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Nonnegative radial density sampled on ``r`` with support ``[0, r[-1]]``.

    ``strict`` enforces the equilibrium shape (nonincreasing, zero at the
    edge); generic test densities such as shells or uniform balls pass
    ``strict=False``.  ``sigma_fn``/``mass_fn`` are optional vectorised
    callables giving the continuous profile and enclosed mass.
    """

    r: np.ndarray
    sigma: np.ndarray
    sigma_fn: object = None
    mass_fn: object = None
    strict: bool = True

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "sigma", sigma)
        if r.ndim != 1 or r.shape != sigma.shape or r.size < 3:
            raise DomainError("r and sigma must be matching 1-D arrays of length >= 3")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise DomainError("radial grid must start at 0 and increase strictly")
        if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise DomainError("density samples must be finite and nonnegative")
        if self.strict:
            scale = max(sigma.max(), np.finfo(float).tiny)
            if np.any(np.diff(sigma) > 1e-12 * scale):
                raise DomainError("equilibrium density must be radially nonincreasing")
            if sigma[-1] > 1e-8 * scale:
                raise DomainError("equilibrium density must vanish at the support radius")

    @property
    def R_support(self):
        return float(self.r[-1])

    @cached_property
    def _cell_masses(self):
        return _cell_integrals(self, lambda r, s: FOUR_PI * r * r * s)

    @cached_property
    def mass_samples(self):
        """Enclosed mass at each grid radius."""
        if self.mass_fn is not None:
            m = np.asarray(self.mass_fn(self.r), dtype=float)
            m[0] = 0.0
            return m
        if self.sigma_fn is None:
            return cumulative_simpson(FOUR_PI * self.r**2 * self.sigma, x=self.r, initial=0.0)
        return np.concatenate(([0.0], np.cumsum(self._cell_masses)))

    @property
    def M(self):
        return float(self.mass_samples[-1])

    def sigma_at(self, rq):
        rq = np.asarray(rq, dtype=float)
        if self.sigma_fn is not None:
            out = np.where(rq <= self.R_support, self.sigma_fn(np.minimum(rq, self.R_support)), 0.0)
        else:
            out = np.interp(rq, self.r, self.sigma, right=0.0)
        return np.where(rq > self.R_support, 0.0, out)

    def mass_at(self, rq):
        """Enclosed mass m(r) for arbitrary radii."""
        rq = np.asarray(rq, dtype=float)
        flat = np.atleast_1d(rq).ravel()
        inside = flat < self.R_support
        out = np.full(flat.shape, self.M)
        if self.mass_fn is not None:
            out[inside] = self.mass_fn(flat[inside])
        elif self.sigma_fn is None:
            out[inside] = np.interp(flat[inside], self.r, self.mass_samples)
        else:
            x = flat[inside]
            i = np.clip(np.searchsorted(self.r, x, side="right") - 1, 0, self.r.size - 2)
            a = self.r[i]
            half = 0.5 * (x - a)
            nodes = a[:, None] + half[:, None] * (_GAUSS_X + 1.0)
            vals = FOUR_PI * nodes**2 * self.sigma_fn(nodes)
            out[inside] = self.mass_samples[i] + half * (vals @ _GAUSS_W)
        out[flat <= 0] = 0.0
        return out.reshape(rq.shape) if rq.ndim else float(out[0])


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """Newtonian potential ``V`` on the density grid; ``V = M/r`` outside."""

    r: np.ndarray
    V: np.ndarray
    V_at_zero: float
    M: float

    def __call__(self, rq):
        rq = np.asarray(rq, dtype=float)
        R = self.r[-1]
        inside = np.interp(rq, self.r, self.V)
        with np.errstate(divide="ignore"):
            outside = self.M / rq
        return np.where(rq >= R, outside, inside)


def _cell_integrals(d, integrand, with_mass=False):
    """Integral of ``integrand(r, sigma[, m])`` over each grid cell."""
    r = d.r
    if d.sigma_fn is None:
        vals = integrand(r, d.sigma, d.mass_samples) if with_mass else integrand(r, d.sigma)
        cum = cumulative_simpson(vals, x=r, initial=0.0)
        return np.diff(cum)

    def f(x):
        s = d.sigma_fn(x)
        return integrand(x, s, d.mass_at(x)) if with_mass else integrand(x, s)

    a, b = r[:-2], r[1:-1]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GAUSS_X
    cells = half * (f(nodes) @ _GAUSS_W)
    # outermost cell: equilibrium profiles go like (R - r)**(1/(gamma-1)) there
    last, err = quad(lambda x: float(f(np.array([x]))[0]), r[-2], r[-1],
                     epsabs=1e-15, epsrel=1e-12, limit=200)
    if not np.isfinite(last):
        raise NumericError("radial quadrature failed on the outer cell", error_estimate=err)
    return np.concatenate((cells, [last]))


def radial_integral(d, integrand, with_mass=False):
    """Integral over ``[0, R]`` of ``integrand(r, sigma[, m])`` in ``dr``."""
    if d.sigma_fn is None:
        vals = integrand(d.r, d.sigma, d.mass_samples) if with_mass else integrand(d.r, d.sigma)
        return float(simpson(vals, x=d.r))
    return float(np.sum(_cell_integrals(d, integrand, with_mass)))


def cumulative_mass(d):
    """Enclosed mass m(r) on the density grid."""
    return d.mass_samples.copy()


def potential_profile(d):
    """V(r) = m(r)/r + 4 pi int_r^inf t sigma(t) dt on the grid."""
    tail_cells = _cell_integrals(d, lambda r, s: FOUR_PI * r * s)
    tail = np.concatenate((np.cumsum(tail_cells[::-1])[::-1], [0.0]))
    m = d.mass_samples
    V = np.empty_like(d.r)
    V[0] = tail[0]
    V[1:] = m[1:] / d.r[1:] + tail[1:]
    return PotentialProfile(r=d.r.copy(), V=V, V_at_zero=float(tail[0]), M=d.M)


def potential_gradient(d, r):
    """dV/dr = -m(r)/r**2, and exactly 0 at the centre."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radius must be nonnegative")
    flat = np.atleast_1d(r_arr).ravel()
    out = np.zeros_like(flat)
    pos = flat > 0
    out[pos] = -np.atleast_1d(d.mass_at(flat[pos])) / flat[pos] ** 2
    return out.reshape(r_arr.shape) if r_arr.ndim else float(out[0])


def exterior_potential(d, x_distance):
    x = float(x_distance)
    if x < d.R_support:
        raise DomainError(
            f"distance {x} lies inside the support radius {d.R_support}; use potential_profile"
        )
    return d.M / x


def interaction_energy(d):
    """Self-interaction G(sigma, sigma) = 8 pi int m(r) sigma(r) r dr."""
    return 2.0 * FOUR_PI * radial_integral(d, lambda r, s, m: m * s * r, with_mass=True)


def two_sphere_energy(d1, d2, D, rtol=1e-12):
    """Mutual energy m1*m2/D of two non-overlapping spherical bodies."""
    D = float(D)
    reach = d1.R_support + d2.R_support
    if D < reach * (1 - rtol):
        raise DomainError(f"spheres overlap: separation {D} < sum of radii {reach}")
    return d1.M * d2.M / D


def _radial_rule(d, panels=16, order=12):
    """Nodes and weights for int_0^R f(r) dr suited to the density type."""
    if d.sigma_fn is None:
        w = np.zeros_like(d.r)
        h = np.diff(d.r)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return d.r, w, d.sigma
    x, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, d.R_support, panels + 1)
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * x
    weights = (0.5 * (b - a))[:, None] * wg
    nodes, weights = nodes.ravel(), weights.ravel()
    return nodes, weights, d.sigma_at(nodes)


def mutual_energy_quadrature(d1, d2, D, l_max=4, n_mu=96, return_terms=False):
    """Mutual energy from the multipole expansion of 1/|x - y|.

    Body 1 sits at the origin, body 2 at distance ``D`` on the z axis.  For
    every multipole order the integrand
    ``rho(x) sigma(y) |x|^l / |y|^(l+1) P_l(cos angle(x, y))`` is integrated
    numerically over both bodies; the angular sum over ``x`` directions is
    done with Gauss nodes in ``cos(theta)`` and a uniform azimuth rule.
    """
    D = float(D)
    if l_max < 0:
        raise DomainError("l_max must be nonnegative")
    if D <= d1.R_support + d2.R_support:
        raise DomainError("expansion needs strictly separated spheres")

    r1, w1, s1 = _radial_rule(d1)
    r2, w2, s2 = _radial_rule(d2)

    # directions of x
    mu1, wmu1 = np.polynomial.legendre.leggauss(max(8, l_max + 2))
    n_phi = max(8, 2 * l_max + 2)
    phi1 = 2 * np.pi * np.arange(n_phi) / n_phi
    sin1 = np.sqrt(1 - mu1**2)
    ux = np.stack([
        (sin1[:, None] * np.cos(phi1)).ravel(),
        (sin1[:, None] * np.sin(phi1)).ravel(),
        np.repeat(mu1, n_phi),
    ])
    wx = np.repeat(wmu1, n_phi) * (2 * np.pi / n_phi)

    # points of body 2 (axially symmetric, azimuth of y fixed to 0)
    mu2, wmu2 = np.polynomial.legendre.leggauss(n_mu)
    R2, MU2 = np.meshgrid(r2, mu2, indexing="ij")
    W2 = (w2 * 2 * np.pi * r2**2 * s2)[:, None] * wmu2[None, :]
    Y = np.stack([R2 * np.sqrt(1 - MU2**2), np.zeros_like(R2), D + R2 * MU2])
    ynorm = np.sqrt(np.sum(Y**2, axis=0))
    uy = Y / ynorm

    cosang = np.einsum("ki,kab->iab", ux, uy)
    terms = []
    for ell in range(l_max + 1):
        ang = np.einsum("i,iab->ab", wx, eval_legendre(ell, cosang))
        y_part = np.sum(W2 * ang / ynorm ** (ell + 1))
        x_part = np.sum(w1 * r1 ** (ell + 2) * s1)
        terms.append(float(x_part * y_part))
    total = float(np.sum(terms))
    return (total, terms) if return_terms else total


def uniform_ball(mass, radius, n=2001):
    """Constant-density ball; a standard non-equilibrium test density."""
    rho = 3 * mass / (FOUR_PI * radius**3)
    r = np.linspace(0.0, radius, n)
    return RadialDensity(r, np.full(n, rho), sigma_fn=lambda x: np.full(np.shape(x), rho),
                         mass_fn=None, strict=False)


def shell_density(r_inner, r_outer, density=1.0, n=2001):
    """Uniform shell vanishing on ``[0, r_inner]``; ``r_inner`` is a grid node."""
    n_in = max(3, int(n * r_inner / r_outer))
    r = np.concatenate((np.linspace(0, r_inner, n_in), np.linspace(r_inner, r_outer, n - n_in + 1)[1:]))

    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.where((x > r_inner) & (x <= r_outer), density, 0.0)

    sigma = fn(r)
    return RadialDensity(r, sigma, sigma_fn=fn, strict=False)
