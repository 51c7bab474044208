"""Exact real-line solution via the Cole-Hopf transform, and its large-time constants.

With G(y) = int_0^y g and theta0 = exp(-G / 2 nu), the solution is the quotient

    u(x, t) = int (x - y)/t K(x - y) theta0(y) dy / int K(x - y) theta0(y) dy,
    K(z) = exp(-z^2 / (4 nu t)).

Outside the support [-d, d] theta0 is constant, so both tails are closed
form (a Gaussian for the numerator, erfc for the denominator). Only the
middle segment is integrated numerically.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import special
from scipy.interpolate import CubicHermiteSpline

from . import integrate as gk
from .errors import ConfigError, OracleToleranceError

THREADS_ENV = "BURGERS_RLINE_THREADS"
SQRT_PI = math.sqrt(math.pi)


def erf(x):
    """Double-precision error function (elementwise)."""
    out = special.erf(x)
    return float(out) if np.ndim(out) == 0 else out


class CompactDatum:
    """Initial datum g supported in [-d, d].

    ``g`` must be vectorized. The antiderivative G(y) = int_0^y g is built
    once by adaptive quadrature on panels and interpolated with cubic
    Hermite splines (slopes are g itself), so evaluating it is cheap.
    """

    def __init__(self, g, d, panels=1024):
        if not d > 0:
            raise ConfigError(f"support semidiameter must be positive, got {d}")
        self._g = g
        self.d = float(d)
        self._panels = panels
        self._spline = None

    def g(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= self.d
        out = np.zeros_like(x)
        if inside.any():
            out[inside] = np.asarray(self._g(x[inside]), dtype=float)
        return out if out.ndim else float(out)

    def __call__(self, x):
        return self.g(x)

    def _build(self):
        half = self._panels // 2
        grid = np.linspace(-self.d, self.d, 2 * half + 1)
        pieces = np.array([
            gk.integrate(self.g, a, b, rtol=1e-13, atol=1e-300)
            for a, b in zip(grid[:-1], grid[1:])
        ])
        values = np.zeros_like(grid)
        values[half + 1 :] = np.cumsum(pieces[half:])
        values[:half] = -np.cumsum(pieces[:half][::-1])[::-1]
        slopes = np.asarray(self._g(grid), dtype=float)
        self._spline = CubicHermiteSpline(grid, values, slopes)

    def antiderivative(self, y):
        """G(y), saturating at G(+-d) outside the support."""
        if self._spline is None:
            self._build()
        y = np.clip(np.asarray(y, dtype=float), -self.d, self.d)
        out = self._spline(y)
        return out if np.ndim(out) else float(out)

    def reflected(self):
        return CompactDatum(lambda x: self._g(-np.asarray(x)), self.d, self._panels)


class GaussianBump(CompactDatum):
    """g(x) = exp(-a x^2) on [-d, d], zero outside; a=10, d=2 by default."""

    def __init__(self, a=10.0, d=2.0):
        super().__init__(lambda x: np.exp(-a * np.asarray(x) ** 2), d)
        self.a = float(a)

    def antiderivative(self, y):
        y = np.clip(np.asarray(y, dtype=float), -self.d, self.d)
        out = 0.5 * math.sqrt(math.pi / self.a) * special.erf(math.sqrt(self.a) * y)
        return out if np.ndim(out) else float(out)

    def reflected(self):
        return self


def _thread_count():
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


class AnalyticModel:
    """Cole-Hopf solution for a compactly supported datum and viscosity ``nu``."""

    def __init__(self, datum: CompactDatum, nu, target_digits=5):
        if not nu > 0:
            raise ConfigError(f"nu must be positive, got {nu}")
        self.datum = datum
        self.nu = float(nu)
        self.target_digits = int(target_digits)
        d = datum.d
        self.g_right = float(datum.antiderivative(d))
        self.g_left = float(datum.antiderivative(-d))
        self._mass = self.g_right - self.g_left
        r = self._mass / (2.0 * self.nu)
        self.lam = 0.5 * (1.0 + math.exp(-r)) if r > -700 else math.inf
        self.small_h = -0.5 * math.expm1(-r) if r > -700 else -math.inf
        # exp(-|m| / 2 nu) stored as a logarithm so tiny viscosities do not underflow
        self._log_lmh = -abs(r)
        # largest value of log theta0 over the line, bounds the quotient integrands
        ys = np.linspace(-d, d, 4097)
        self._max_log_theta = float(np.max(-datum.antiderivative(ys) / (2.0 * self.nu)))

    # -- basic quantities -------------------------------------------------
    def mass(self):
        return self._mass

    def g(self, x):
        return self.datum.g(x)

    def theta0(self, y):
        out = np.exp(-np.asarray(self.datum.antiderivative(y)) / (2.0 * self.nu))
        return out if np.ndim(out) else float(out)

    # -- the quotient formula ---------------------------------------------
    def analytic_u(self, x, t, target_digits=None):
        """u(x, t) for t > 0; scalar in, scalar out, arrays evaluated together."""
        scalar = np.ndim(x) == 0
        vals = self.evaluate_many(np.atleast_1d(x), t, target_digits)
        return float(vals[0]) if scalar else vals

    __call__ = analytic_u

    def evaluate_many(self, xs, t, target_digits=None, threads=None):
        if not t > 0:
            raise ValueError(f"the quotient formula needs t > 0, got {t}")
        xs = np.asarray(xs, dtype=float)
        flat = xs.ravel()
        digits = self.target_digits if target_digits is None else target_digits
        rtol = 0.5 * 10.0 ** (-digits)
        threads = _thread_count() if threads is None else threads
        if threads <= 1 or flat.size < 64:
            out = self._quotient(flat, float(t), rtol)
        else:
            chunks = np.array_split(flat, threads)
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda c: self._quotient(c, float(t), rtol), chunks))
            out = np.concatenate(parts)
        return out.reshape(xs.shape)

    def _log_theta(self, y):
        return -self.datum.antiderivative(y) / (2.0 * self.nu)

    def _quotient(self, x, t, rtol):
        nu, d = self.nu, self.datum.d
        var = 4.0 * nu * t
        s = math.sqrt(var)
        log_tr = -self.g_right / (2.0 * nu)
        log_tl = -self.g_left / (2.0 * nu)
        z_r = (d - x) / s
        z_l = (x + d) / s
        exp_r = log_tr - np.maximum(z_r, 0.0) ** 2
        exp_l = log_tl - np.maximum(z_l, 0.0) ** 2
        yc = np.clip(x, -d, d)
        shift = np.maximum.reduce([exp_r, exp_l, self._log_theta(yc) - (x - yc) ** 2 / var])

        # window outside of which the middle integrand is below e^-75 of the shift
        reach = s * np.sqrt(np.maximum(self._max_log_theta - shift, 0.0) + 75.0)
        lo = np.maximum(x - reach, -d)
        hi = np.minimum(x + reach, d)
        width = np.maximum(hi - lo, 0.0)
        active = width > 0
        pieces = np.where(active, np.clip(np.ceil(width / (0.5 * s)), 8, 400), 0).astype(int)

        def integrand(ix, y):
            xi = x[ix][:, None]
            e = self._log_theta(y) - (xi - y) ** 2 / var
            return e, (xi - y) / t

        # initial partition: uniform pieces per point
        ix = np.repeat(np.arange(x.size), pieces)
        starts = np.concatenate([[0], np.cumsum(pieces)[:-1]])
        k = np.arange(ix.size) - np.repeat(starts, pieces)
        step = (width / np.maximum(pieces, 1))[ix]
        a = lo[ix] + k * step
        b = a + step
        pts, half = gk.rule_points(a, b)
        e, lever = integrand(ix, pts)
        if ix.size:
            node_max = np.full(x.size, -np.inf)
            np.maximum.at(node_max, ix, e.max(axis=1))
            shift = np.maximum(shift, node_max)

        # tails, relative to the shift
        tail_r = np.where(
            z_r >= 0,
            np.exp(log_tr - z_r**2 - shift) * special.erfcx(np.maximum(z_r, 0.0)),
            np.exp(log_tr - shift) * special.erfc(z_r),
        )
        tail_l = np.where(
            z_l >= 0,
            np.exp(log_tl - z_l**2 - shift) * special.erfcx(np.maximum(z_l, 0.0)),
            np.exp(log_tl - shift) * special.erfc(z_l),
        )
        root = math.sqrt(math.pi * nu * t)
        den = root * (tail_r + tail_l)
        num_r = -2.0 * nu * np.exp(log_tr - z_r**2 - shift)
        num_l = 2.0 * nu * np.exp(log_tl - z_l**2 - shift)
        num = num_r + num_l
        num_abs = np.abs(num_r) + np.abs(num_l)

        w = np.exp(e - shift[ix][:, None])
        dv, de = gk.apply_rule(w, half)
        nv, ne = gk.apply_rule(w * lever, half)
        nav, _ = gk.apply_rule(w * np.abs(lever), half)
        est_den = den + np.bincount(ix, dv, x.size)
        est_num = num + np.bincount(ix, nv, x.size)
        est_abs = num_abs + np.bincount(ix, nav, x.size)
        tol_den = 0.5 * rtol * est_den
        tol_num = 0.5 * (rtol * np.abs(est_num) + 1e-13 * est_abs)
        span = np.where(active, width, 1.0)

        depth = np.zeros(ix.size, dtype=int)
        while ix.size:
            share = (b - a) / span[ix]
            ok = (de <= tol_den[ix] * share) & (ne <= tol_num[ix] * share)
            den += np.bincount(ix[ok], dv[ok], x.size)
            num += np.bincount(ix[ok], nv[ok], x.size)
            keep = ~ok
            ix, a, b, depth = ix[keep], a[keep], b[keep], depth[keep]
            if not ix.size:
                break
            if depth.max() >= gk.MAX_DEPTH:
                bad = x[ix[np.argmax(depth)]]
                raise OracleToleranceError(
                    f"oracle quadrature did not converge at x={bad:.6g}, t={t:.6g}"
                )
            mid = 0.5 * (a + b)
            ix = np.concatenate([ix, ix])
            a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
            depth = np.concatenate([depth, depth]) + 1
            pts, half = gk.rule_points(a, b)
            e, lever = integrand(ix, pts)
            w = np.exp(e - shift[ix][:, None])
            dv, de = gk.apply_rule(w, half)
            nv, ne = gk.apply_rule(w * lever, half)
        return num / den

    # -- large-time profile -----------------------------------------------
    def _profile_consts(self):
        """(lambda, h, log(lambda - h)) for the nonnegative-mass version of the datum."""
        r = abs(self._mass) / (2.0 * self.nu)
        return 0.5 * (1.0 + math.exp(-r)), -0.5 * math.expm1(-r), -r

    def _log_profile(self, x):
        lam, h, log_lmh = self._profile_consts()
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        neg = x < 0
        out[neg] = -x[neg] ** 2 - np.log(lam + h * special.erf(-x[neg]))
        xp = x[~neg]
        with np.errstate(divide="ignore"):
            log_h = math.log(h) if h > 0 else -math.inf
        log_den = np.logaddexp(log_lmh, log_h + np.log(special.erfcx(xp)) - xp**2)
        out[~neg] = -xp**2 - log_den
        return out

    def f_profile(self, x):
        """exp(-x^2) / (lambda - h erf(x)), evaluated without cancellation."""
        out = np.exp(self._log_profile(np.atleast_1d(x)))
        return float(out[0]) if np.ndim(x) == 0 else out

    def _profile_reach(self):
        # beyond this the profile is below exp(-81) / (lambda - h) on the right
        return math.sqrt(abs(self._mass) / (2.0 * self.nu) + 81.0)

    def profile_norm(self, p):
        lam, h, log_lmh = self._profile_consts()
        if p == 1:
            if h == 0:
                return SQRT_PI
            return SQRT_PI / (2.0 * h) * (math.log(lam + h) - log_lmh)
        if p == 2:
            f2 = lambda y: np.exp(2.0 * self._log_profile(y))
            left = gk.integrate(f2, -9.0, 0.0, rtol=1e-13)
            right = gk.integrate(f2, 0.0, self._profile_reach(), rtol=1e-13, initial_pieces=64)
            return math.sqrt(left + right)
        if p in (math.inf, "inf", "infinity"):
            x_star = golden_section_max(lambda y: float(self._log_profile(np.array([y]))[0]),
                                        0.0, self._profile_reach())
            return float(np.exp(self._log_profile(np.array([x_star]))[0]))
        raise ValueError(f"p must be 1, 2 or inf, got {p!r}")

    def gamma_p(self, p):
        """Limit of t^((1 - 1/p)/2) ||u(., t)||_p as t -> infinity."""
        m = abs(self._mass)
        if m == 0.0:
            return 0.0
        nu = self.nu
        inv = 0.0 if p in (math.inf, "inf", "infinity") else 1.0 / (2.0 * float(p))
        pref = (m / math.sqrt(4.0 * math.pi * nu)) * (4.0 * nu) ** inv
        pref *= (2.0 * nu / m) * -math.expm1(-m / (2.0 * nu))
        return pref * self.profile_norm(p)


def golden_section_max(f, a, b, xtol=1e-12, max_iter=200):
    """Maximizer of a unimodal function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
