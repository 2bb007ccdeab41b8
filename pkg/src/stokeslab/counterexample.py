"""The oscillating-surface construction that defeats the boundary identity.

A strip model glues the graphs of f_k(x) = h^k sin(x / lambda^k) over
horizontal strips [y_k, y_{k+1}] whose widths shrink geometrically; the
normalized-arclength coordinate u(x, y) along horizontal sections yields a
closed 1-form on the surface whose continuous ambient extension has
circulation 1 around the boundary while its tangential differential
vanishes on the smooth part.  Three parameter conditions drive the
demonstration: finite area (h * a < lambda_ratio ... stored as flags on
:class:`Params`), section lengths blowing up, and decay of the form near
the singular segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import forms
from .currents import SurfaceCurrent
from .dyadic import ExceptionalSet
from .quadrature import QuadResult, gauss_rule

__all__ = [
    "Params",
    "TransitionFn",
    "SurfaceModel",
    "CylindricalModel",
    "ParamsError",
    "build_surface_current",
    "verify_failure",
    "cylindrical_variant",
]


class ParamsError(ValueError):
    """Parameter choice violates the conditions the construction needs."""


@dataclass(frozen=True)
class Params:
    """Geometry parameters with the three demonstration conditions as flags."""

    a: float
    h: float
    lam: float

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise ParamsError("a must lie in (0, 1)")
        if not (0.0 <= self.h < 1.0):
            raise ParamsError("h must lie in [0, 1)")
        if not (0.0 < self.lam < 1.0):
            raise ParamsError("lambda must lie in (0, 1)")
        inv = 1.0 / self.lam
        if abs(inv - round(inv)) > 1e-12:
            raise ParamsError("1/lambda must be an integer")

    @classmethod
    def default(cls) -> "Params":
        return cls(a=1.0 / 3.0, h=1.0 / 3.0, lam=0.25)

    @property
    def lam_inverse(self) -> int:
        return round(1.0 / self.lam)

    @property
    def y_infinity(self) -> float:
        return self.a / (1.0 - self.a)

    def y_k(self, k: int) -> float:
        # y_k = sum_{j=1..k} a^j, written to stay accurate near the limit
        return self.y_infinity * (1.0 - self.a ** k)

    @property
    def flag_area(self) -> bool:
        return self.h * self.a / self.lam < 1.0

    @property
    def flag_length(self) -> bool:
        return self.h / self.lam > 1.0

    @property
    def flag_continuity(self) -> bool:
        return self.a > self.lam

    def flags(self) -> dict:
        return {
            "area": self.flag_area,
            "length": self.flag_length,
            "continuity": self.flag_continuity,
        }

    def require_all_flags(self):
        bad = [name for name, ok in self.flags().items() if not ok]
        if bad:
            raise ParamsError(f"violated parameter conditions: {', '.join(bad)}")


# ---------------------------------------------------------------------------


def _smooth_step(u, p: float = 1.0):
    """C-infinity step: 0 below 0, 1 above 1, flat to infinite order at both."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inner = (u > 0.0) & (u < 1.0)
    su = np.where(inner, u, 0.5)
    f = np.exp(-p / su)
    g = np.exp(-p / (1.0 - su))
    out = np.where(inner, f / (f + g), out)
    return np.where(u >= 1.0, 1.0, out)


class TransitionFn:
    """Normalized integrated bump: 0 on [0, 1/8], 1 on [7/8, 1], slope < 2.

    The derivative profile is a plateau bump (smooth ramps of relative width
    ``ramp``), which keeps sup phi' = 1/(0.75 * (1 - ramp)) ~ 1.905 for the
    default ramp of 0.3.  Values come from a dense cumulative-Simpson table;
    the derivative is closed-form.
    """

    LO = 0.125
    HI = 0.875

    def __init__(self, ramp: float = 0.3, table_size: int = 1 << 13):
        self.ramp = ramp
        self.width = self.HI - self.LO
        grid = np.linspace(0.0, 1.0, 2 * table_size + 1)
        b = self._bump(grid)
        h = grid[1] - grid[0]
        cum = np.zeros(table_size + 1)
        cum[1:] = np.cumsum(h / 3.0 * (b[0:-1:2] + 4.0 * b[1::2] + b[2::2]))
        self._norm = cum[-1]
        self._u_grid = grid[::2]
        self._cum = cum / self._norm
        from scipy.interpolate import CubicSpline

        self._spline = CubicSpline(self._u_grid, self._cum, bc_type="clamped")

    def _bump(self, u):
        return _smooth_step(u / self.ramp) * _smooth_step((1.0 - u) / self.ramp)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = (t - self.LO) / self.width
        val = np.clip(self._spline(np.clip(u, 0.0, 1.0)), 0.0, 1.0)
        val = np.where(u <= 0.0, 0.0, val)
        return np.where(u >= 1.0, 1.0, val)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        u = (t - self.LO) / self.width
        inside = (u > 0.0) & (u < 1.0)
        val = np.where(inside, self._bump(np.clip(u, 0.0, 1.0)), 0.0)
        return val / (self._norm * self.width)

    def sup_derivative(self, grid: int = 10_000) -> float:
        t = np.linspace(0.0, 1.0, grid)
        return float(self.derivative(t).max())


_DEFAULT_TRANSITION: Optional[TransitionFn] = None


def default_transition() -> TransitionFn:
    global _DEFAULT_TRANSITION
    if _DEFAULT_TRANSITION is None:
        _DEFAULT_TRANSITION = TransitionFn()
    return _DEFAULT_TRANSITION


# ---------------------------------------------------------------------------


class SurfaceModel:
    """Evaluators for the strip surface, its section lengths, and the form.

    All point evaluators are vectorized over numpy arrays.  x runs over
    [0, pi]; y over [0, y_infinity]; strips are indexed so that strip k
    covers [y_k, y_{k+1}) and interpolates f_k -> f_{k+1}.
    """

    K_TABLE = 60

    def __init__(self, params: Params, transition: Optional[TransitionFn] = None,
                 tail_cut: float = 1e-12, panels_per_osc: int = 8):
        self.params = params
        self.transition = transition or default_transition()
        self.x_lo, self.x_hi = 0.0, math.pi
        self.y_infinity = params.y_infinity
        self.panels_per_osc = panels_per_osc
        a = params.a
        self.k_cut = max(2, math.ceil(math.log(tail_cut) / math.log(a))) if a > 0 else 2
        self._y_table = np.array([params.y_k(k) for k in range(self.K_TABLE + 1)])
        self._sup_dphi = self.transition.sup_derivative()
        self._scalar_cache: dict = {}

    # -- strip bookkeeping --------------------------------------------------

    def strip_index(self, y):
        y = np.asarray(y, dtype=float)
        k = np.searchsorted(self._y_table, y, side="right") - 1
        return np.clip(k, 0, self.K_TABLE - 1)

    def strip_junctions(self) -> np.ndarray:
        ks = np.arange(1, self.k_cut + 1)
        return self._y_table[ks]

    def singular_set(self) -> ExceptionalSet:
        return ExceptionalSet.box((0.0, self.y_infinity, -1.0),
                                  (math.pi, self.y_infinity, 1.0))

    def descriptor(self) -> dict:
        p = self.params
        return {"a": p.a, "h": p.h, "lambda_inverse": p.lam_inverse, "k_cut": self.k_cut}

    # -- pointwise surface data ----------------------------------------------

    def _f(self, k, x):
        """f_k(x) stacked for integer array k and float array x."""
        p = self.params
        k = np.asarray(k)
        x = np.asarray(x, dtype=float)
        hk = np.where(k == 0, 0.0, p.h ** k)
        freq = p.lam ** (-k.astype(float))
        return hk * np.sin(x * freq)

    def _fprime(self, k, x):
        p = self.params
        k = np.asarray(k)
        x = np.asarray(x, dtype=float)
        hk = np.where(k == 0, 0.0, p.h ** k)
        freq = p.lam ** (-k.astype(float))
        return hk * freq * np.cos(x * freq)

    def _strip_data(self, x, y):
        """theta, phi-prime factor and the four partials on matching arrays."""
        p = self.params
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        k = self.strip_index(y)
        width = p.a ** (k + 1.0)
        s = (y - self._y_table[k]) / width
        theta = self.transition(s)
        dtheta = self.transition.derivative(s) / width
        fk, fk1 = self._f(k, x), self._f(k + 1, x)
        gk, gk1 = self._fprime(k, x), self._fprime(k + 1, x)
        psi = (1.0 - theta) * fk + theta * fk1
        px = (1.0 - theta) * gk + theta * gk1
        py = dtheta * (fk1 - fk)
        pxy = dtheta * (gk1 - gk)
        return psi, px, py, pxy

    def psi(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        flat = y >= self.y_infinity
        val = self._strip_data(x, np.where(flat, 0.0, y))[0]
        return np.where(flat, 0.0, val)

    def dpsi_dx(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        flat = y >= self.y_infinity
        val = self._strip_data(x, np.where(flat, 0.0, y))[1]
        return np.where(flat, 0.0, val)

    def dpsi_dy(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        flat = y >= self.y_infinity
        val = self._strip_data(x, np.where(flat, 0.0, y))[2]
        return np.where(flat, 0.0, val)

    def point(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.stack(np.broadcast_arrays(x, y, self.psi(x, y)), axis=-1)

    def sup_abs_psi(self, y_from: float) -> float:
        if y_from >= self.y_infinity:
            return 0.0
        k = int(self.strip_index(y_from))
        return 2.0 * self.params.h ** max(k, 0) if self.params.h > 0 else 0.0

    # -- periodized x-integrals ----------------------------------------------

    def _x_period(self, k: int) -> float:
        return 2.0 * math.pi * self.params.lam ** k

    def _panels_per_period(self) -> int:
        return 2 * self.panels_per_osc * self.params.lam_inverse

    def _gl_fixed(self, f, a: float, b: float, panels: int, order: int = 12) -> float:
        if b <= a:
            return 0.0
        nodes, weights = gauss_rule(order)
        edges = np.linspace(a, b, panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halves = 0.5 * np.diff(edges)
        pts = (mids[:, None] + halves[:, None] * nodes[None, :]).ravel()
        vals = np.asarray(f(pts)).reshape(panels, -1)
        return float(np.sum(halves * (vals @ weights)))

    def _periodized_x_integral(self, integrand, y: float, x_hi: float,
                               with_error: bool = False):
        """Integral of a strip-periodic integrand over [0, x_hi] at height y."""
        k = int(self.strip_index(y))
        P = self._x_period(k)
        panels = self._panels_per_period()

        def g(xs):
            return integrand(xs, np.full_like(xs, y))

        n_full = int(math.floor(x_hi / P + 1e-12))
        rem = x_hi - n_full * P
        if rem < 1e-15 * max(1.0, x_hi):
            rem = 0.0
        per = self._gl_fixed(g, 0.0, P, panels) if n_full else 0.0
        rem_panels = max(2, int(math.ceil(panels * rem / P))) if rem else 0
        tail = self._gl_fixed(g, 0.0, rem, rem_panels) if rem else 0.0
        value = n_full * per + tail
        if not with_error:
            return value
        per2 = self._gl_fixed(g, 0.0, P, 2 * panels) if n_full else 0.0
        tail2 = self._gl_fixed(g, 0.0, rem, 2 * rem_panels) if rem else 0.0
        value2 = n_full * per2 + tail2
        return value2, abs(value2 - value)

    def _speed(self, xs, ys):
        return np.sqrt(1.0 + self._strip_data(xs, ys)[1] ** 2)

    def _area_density(self, xs, ys):
        _, px, py, _ = self._strip_data(xs, ys)
        return np.sqrt(1.0 + px ** 2 + py ** 2)

    def _dy_speed(self, xs, ys):
        _, px, _, pxy = self._strip_data(xs, ys)
        return px * pxy / np.sqrt(1.0 + px ** 2)

    def _memo(self, key, compute):
        cache = self._scalar_cache
        if key not in cache:
            if len(cache) > 200_000:
                cache.clear()
            cache[key] = compute()
        return cache[key]

    def section_length(self, y: float) -> QuadResult:
        """L(y): arclength of the horizontal section at height y."""
        y = float(y)
        if y >= self.y_infinity:
            return QuadResult(math.pi, 0.0, 0)
        value, err = self._memo(
            ("L", y),
            lambda: self._periodized_x_integral(self._speed, y, math.pi, with_error=True),
        )
        return QuadResult(value, err, 0)

    def partial_length(self, x: float, y: float) -> float:
        """L(x, y): arclength of the section from 0 to x."""
        x, y = float(x), float(y)
        if y >= self.y_infinity:
            return x
        return self._memo(
            ("Lp", x, y), lambda: self._periodized_x_integral(self._speed, y, x)
        )

    def dy_section_length(self, y: float) -> float:
        y = float(y)
        if y >= self.y_infinity:
            return 0.0
        return self._memo(
            ("dL", y), lambda: self._periodized_x_integral(self._dy_speed, y, math.pi)
        )

    def dy_partial_length(self, x: float, y: float) -> float:
        x, y = float(x), float(y)
        if y >= self.y_infinity:
            return 0.0
        return self._memo(
            ("dLp", x, y), lambda: self._periodized_x_integral(self._dy_speed, y, x)
        )

    # -- strip areas and windowed mass ----------------------------------------

    def strip_bounds_y(self, k: int) -> tuple[float, float]:
        return float(self._y_table[k]), float(self._y_table[k + 1])

    def strip_area(self, k: int, tol: float = 1e-10) -> tuple[QuadResult, float]:
        """Area over strip k with its closed-form upper bound."""
        y0, y1 = self.strip_bounds_y(k)
        res = self._memo(("strip_area", k, tol), lambda: self._mass_rows(y0, y1, tol))
        p = self.params
        bound = math.pi * p.a ** k * math.sqrt(
            1.0 + 16.0 * p.h ** (2 * k) * p.lam ** (-2 * k)
            + 4.0 * p.h ** (2 * k) * p.a ** (-2 * k)
        )
        return res, bound

    def _mass_rows(self, y0: float, y1: float, tol: float = 1e-10) -> QuadResult:
        """Integral over [0, pi] x [y0, y1] of the area element; single strip."""
        if y1 <= y0:
            return QuadResult(0.0, 0.0, 0)

        def row(y: float) -> float:
            return self._periodized_x_integral(self._area_density, y, math.pi)

        def rows(ys):
            return np.array([row(float(yy)) for yy in np.atleast_1d(ys)])

        nodes, weights = gauss_rule(12)
        panels = 8
        total1 = self._y_composite(rows, y0, y1, panels, nodes, weights)
        total2 = self._y_composite(rows, y0, y1, 2 * panels, nodes, weights)
        return QuadResult(total2, abs(total2 - total1) + tol, 2 * panels)

    @staticmethod
    def _y_composite(rows, y0, y1, panels, nodes, weights):
        edges = np.linspace(y0, y1, panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halves = 0.5 * np.diff(edges)
        total = 0.0
        for mid, half in zip(mids, halves):
            ys = mid + half * nodes
            total += half * float(np.dot(weights, rows(ys)))
        return total

    def tail_area_bound(self, k_from: int) -> float:
        """Geometric bound on the area of all strips with k >= k_from."""
        p = self.params
        if p.h == 0.0:
            return math.pi * p.a ** (k_from + 1) / (1.0 - p.a)
        qa = p.a
        qal = p.a * p.h / p.lam
        qah = p.a * p.h / p.a  # = h
        total = (
            qa ** k_from / (1.0 - qa)
            + 4.0 * qal ** k_from / (1.0 - qal)
            + 2.0 * qah ** k_from / (1.0 - qah)
        )
        return math.pi * total

    def mass_between(self, y0: float, y1: float, tol: float = 1e-9) -> QuadResult:
        """Surface area over the window [y0, y1], certificate included."""
        y0 = max(0.0, float(y0))
        y1 = min(self.y_infinity, float(y1))
        if y1 <= y0:
            return QuadResult(0.0, 0.0, 0)
        return self._memo(("mass", y0, y1, tol), lambda: self._mass_between(y0, y1, tol))

    def _mass_between(self, y0: float, y1: float, tol: float) -> QuadResult:
        k0 = int(self.strip_index(y0))
        total, err, panels = 0.0, 0.0, 0
        for k in range(k0, self.k_cut + 1):
            s0, s1 = self.strip_bounds_y(k)
            lo, hi = max(y0, s0), min(y1, s1)
            if hi <= lo:
                continue
            if lo == s0 and hi == s1:
                res, _ = self.strip_area(k)  # full strips come from the cache
            else:
                res = self._mass_rows(lo, hi, tol=tol / (self.k_cut + 1 - k0))
            total += res.value
            err += res.error
            panels += res.panels
        if y1 > self._y_table[self.k_cut + 1]:
            err += self.tail_area_bound(self.k_cut + 1)
        return QuadResult(total, err, panels)

    # -- normalized arclength and the form -------------------------------------

    def u_and_du(self, x: float, y: float):
        """u = L(x,y)/L(y) and its differential as a planar 1-covector."""
        x, y = float(x), float(y)
        L = self.section_length(y).value
        Lxy = self.partial_length(x, y)
        dyL = self.dy_section_length(y)
        dyLxy = self.dy_partial_length(x, y)
        px = float(self.dpsi_dx(x, y))
        ux = math.sqrt(1.0 + px * px) / L
        uy = (L * dyLxy - Lxy * dyL) / (L * L)
        return Lxy / L, forms.KCovector(2, 1, np.array([ux, uy]))

    def tangent_frame(self, x, y):
        """Orthonormal frame (tau1, tau2, tau3); tau3 is the upward normal."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        _, px, py, _ = self._strip_data(x, y)
        n1 = np.sqrt(1.0 + px ** 2)
        n2 = np.sqrt(1.0 + px ** 2 + py ** 2)
        zero = np.zeros_like(px)
        tau1 = np.stack([1.0 / n1 + zero, zero, px / n1], axis=-1)
        tau2 = np.stack([-px * py / (n1 * n2), (1.0 + px ** 2) / (n1 * n2), py / (n1 * n2)],
                        axis=-1)
        tau3 = np.stack([-px / n2, -py / n2, 1.0 / n2 + zero], axis=-1)
        return tau1, tau2, tau3

    def omega_surface_coeffs(self, x: float, y: float) -> tuple[float, float]:
        """Frame coefficients (c1, c2) of the form at the surface point."""
        x, y = float(x), float(y)
        if y >= self.y_infinity:
            if self.params.h == 0.0:
                return 1.0 / math.pi, 0.0
            return 0.0, 0.0
        _, px, py, _ = (float(v) for v in self._strip_data(x, y))
        L = self.section_length(y).value
        n1 = math.sqrt(1.0 + px * px)
        n2 = math.sqrt(1.0 + px * px + py * py)
        Lxy = self.partial_length(x, y)
        dyL = self.dy_section_length(y)
        dyLxy = self.dy_partial_length(x, y)
        Y = (L * dyLxy - Lxy * dyL) / (L * L)
        c1 = 1.0 / L
        c2 = -px * py / (L * n2) + Y * n1 / n2
        return c1, c2

    def omega_at_surface(self, x: float, y: float) -> np.ndarray:
        """Cartesian coefficients of the form at Psi(x, y)."""
        c1, c2 = self.omega_surface_coeffs(x, y)
        tau1, tau2, _ = self.tangent_frame(x, y)
        return c1 * tau1 + c2 * tau2

    def _cutoff(self, t):
        """C-infinity plateau cutoff: 1 on [-1, 1], 0 outside (-2, 2)."""
        t = np.abs(np.asarray(t, dtype=float))
        return _smooth_step(2.0 - t)

    def omega_coeffs(self, point) -> np.ndarray:
        """Ambient form value at any point of R^3 (Cartesian coefficients)."""
        X, Yc, Z = (float(v) for v in point)
        decay = self.params.flag_length
        if Yc >= self.y_infinity and decay:
            return np.zeros(3)
        damp = 1.0
        base_y = Yc
        if Yc >= self.y_infinity:
            damp *= float(self._cutoff(1.0 + (Yc - self.y_infinity)))
            base_y = self.y_infinity
        if Yc < 0.0:
            damp *= float(self._cutoff(1.0 - Yc))
            base_y = 0.0
        if damp == 0.0:
            return np.zeros(3)
        damp *= float(self._cutoff((2.0 * X - math.pi) / math.pi))
        if damp == 0.0:
            return np.zeros(3)
        base_x = X
        if X > math.pi:
            base_x = X - math.pi
        elif X < 0.0:
            base_x = X + math.pi
        psi_val = float(self.psi(base_x, base_y))
        damp *= float(self._cutoff(Z - psi_val))
        if damp == 0.0:
            return np.zeros(3)
        return damp * self.omega_at_surface(base_x, base_y)

    def omega_field(self) -> forms.FormField:
        model = self

        def evaluate(p):
            return forms.KCovector(3, 1, model.omega_coeffs(p))

        return forms.FormField(
            n=3, k=1, evaluate=evaluate,
            exceptional_set=self.singular_set(),
            name="normalized-arclength form",
        )

    # -- derived diagnostics ----------------------------------------------------

    def sup_omega_on_section(self, k: int, samples_per_period: int = 64) -> float:
        """sup over x of |omega(Psi(x, y_k))| via one-period sampling."""
        y = float(self._y_table[k])
        if y >= self.y_infinity:
            return 0.0
        P = self._x_period(int(self.strip_index(y)))
        xs = np.linspace(0.0, min(P, math.pi), samples_per_period, endpoint=False)
        best = 0.0
        for x in xs:
            v = self.omega_at_surface(float(x), y)
            best = max(best, float(np.linalg.norm(v)))
        return best

    def tangential_curl_samples(self, n_points: int, rng=None,
                                max_strip: int = 10) -> np.ndarray:
        """|<d omega, tau1 ^ tau2>| at random smooth points, fd differentials.

        The step scales with the strip oscillation wavelength so truncation
        and rounding stay balanced.
        """
        rng = rng or np.random.default_rng(0)
        out = np.empty(n_points)
        p = self.params
        count = 0
        while count < n_points:
            y = rng.uniform(0.0, self._y_table[min(max_strip, self.k_cut)])
            k = int(self.strip_index(y))
            step = 5e-6 * p.lam ** k
            y0, y1 = self.strip_bounds_y(k)
            if y - y0 < 2 * step or y1 - y < 2 * step:
                continue
            x = rng.uniform(0.1, math.pi - 0.1)
            val = self.tangential_curl_at(x, y, step)
            out[count] = val
            count += 1
        return out

    def tangential_curl_at(self, x: float, y: float, step: float) -> float:
        base = np.array([x, y, float(self.psi(x, y))])
        partial = np.zeros((3, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            hi = self.omega_coeffs(base + e)
            lo = self.omega_coeffs(base - e)
            partial[i] = (hi - lo) / (2.0 * step)
        # two-form coefficients over (e12, e13, e23)
        d12 = partial[0, 1] - partial[1, 0]
        d13 = partial[0, 2] - partial[2, 0]
        d23 = partial[1, 2] - partial[2, 1]
        tau1, tau2, _ = self.tangent_frame(x, y)
        w12 = tau1[0] * tau2[1] - tau1[1] * tau2[0]
        w13 = tau1[0] * tau2[2] - tau1[2] * tau2[0]
        w23 = tau1[1] * tau2[2] - tau1[2] * tau2[1]
        return abs(d12 * w12 + d13 * w13 + d23 * w23)

    # -- chart atlas for the decomposition engine -------------------------------

    def strip_lip_upper(self, k: int) -> float:
        p = self.params
        if p.h == 0.0:
            return 1.0
        px_max = max((p.h / p.lam) ** k, (p.h / p.lam) ** (k + 1))
        py_max = self._sup_dphi * (p.h ** k + p.h ** (k + 1)) / p.a ** (k + 1)
        return math.sqrt(1.0 + px_max ** 2 + py_max ** 2)

    def max_regularity(self, y: float) -> float:
        """Per-strip maximal regularity from the chart Lipschitz constants."""
        k = int(self.strip_index(y))
        lip = self.strip_lip_upper(k)
        return lip ** (-2) * 2.0 ** (-1) * 2.0 ** (-1.5)

    def strip_chart(self, k: int):
        from .currents import ChartMap

        return ChartMap(
            psi=self.psi,
            dpsi_dx=self.dpsi_dx,
            dpsi_dy=self.dpsi_dy,
            lip_upper=self.strip_lip_upper(k),
            lip_inverse=1.0,
            name=f"strip-{k}",
        )


def build_surface_current(params: Optional[Params] = None,
                          transition: Optional[TransitionFn] = None) -> SurfaceCurrent:
    """The full oscillating-surface current for the given parameters."""
    params = params or Params.default()
    if not params.flag_area:
        raise ParamsError("area condition h*a/lambda < 1 is required for a finite-mass current")
    model = SurfaceModel(params, transition)
    return SurfaceCurrent(model, 0.0, model.y_infinity, 1)


# ---------------------------------------------------------------------------


def verify_failure(params: Optional[Params] = None, n_tangent_samples: int = 1000,
                   n_strips: int = 12, seed: int = 0,
                   content_grid: tuple[float, float, int] = (0.2, 0.62, 18),
                   tail_cut: float = 1e-12, panels_per_osc: int = 8) -> dict:
    """Full demonstration report for the failure of the boundary identity.

    Refuses when any of the three parameter conditions fails.
    """
    params = params or Params.default()
    params.require_all_flags()
    from . import integration, minkowski

    model = SurfaceModel(params, tail_cut=tail_cut, panels_per_osc=panels_per_osc)
    S = SurfaceCurrent(model, 0.0, model.y_infinity, 1)
    omega = model.omega_field()

    circ = integration.circulation(omega, S)

    rng = np.random.default_rng(seed)
    tang = model.tangential_curl_samples(n_tangent_samples, rng)

    r0, q, steps = content_grid
    profile = minkowski.intrinsic_content(S, model.singular_set(), r0, q, steps)

    per_strip = []
    running = 0.0
    k_hi = min(model.k_cut, max(n_strips, 20))
    content_by_k = {}
    for r, v in zip(profile.radii, profile.values):
        k = int(model.strip_index(max(model.y_infinity - r, 0.0)))
        content_by_k.setdefault(k, v)
    for k in range(0, k_hi + 1):
        res, bound = model.strip_area(k)
        running += res.value
        per_strip.append({
            "k": k,
            "area": res.value,
            "bound": bound,
            "within_bound": res.value <= bound + res.error,
            "partial_sum": running,
            "section_length": model.section_length(model.strip_bounds_y(k)[0]).value,
            "sup_omega": model.sup_omega_on_section(k) if 1 <= k <= n_strips else "",
            "content_value": content_by_k.get(k, ""),
        })

    bmass = S.boundary_mass()
    expected_bmass = 2.0 * math.pi + 2.0 * model.y_infinity

    return {
        "params": {"a": params.a, "h": params.h, "lambda": params.lam},
        "flags": params.flags(),
        "circulation": {"value": circ.value, "error": circ.error, "expected": 1.0},
        "tangential_curl": {
            "max": float(tang.max()),
            "mean": float(tang.mean()),
            "samples": len(tang),
        },
        "sup_omega_per_strip": [
            {"k": row["k"], "sup_omega": row["sup_omega"]}
            for row in per_strip if row["sup_omega"] != ""
        ],
        "content_profile": profile.as_dict(),
        "strip_areas": per_strip,
        "tail_area_bound": model.tail_area_bound(k_hi + 1),
        "boundary_mass": {
            "value": bmass.value,
            "error": bmass.error,
            "expected": expected_bmass,
        },
    }


# ---------------------------------------------------------------------------
# cylindrical variant (experimental): oscillations on concentric annuli
# collapsing to a single singular point at the origin.


class CylindricalModel:
    """Disk-based analogue: strips are annuli r in [r_{k+1}, r_k], r_k = a^k.

    The surface is the graph of psi(r, theta) over the unit disk; sections
    are circles, and the normalized-arclength form has circulation 1 around
    the boundary circle.  The area condition re-derived for the polar area
    element is a*h/lambda < 1 (the ratio of the dominant term of the annulus
    area bound  2*pi*a^k*(1-a)*sup|d_theta psi| ).
    """

    K_TABLE = 60

    def __init__(self, params: Params, transition: Optional[TransitionFn] = None,
                 tail_cut: float = 1e-12, panels_per_osc: int = 8):
        self.params = params
        self.transition = transition or default_transition()
        self.panels_per_osc = panels_per_osc
        a = params.a
        self.k_cut = max(2, math.ceil(math.log(tail_cut) / math.log(a)))
        self._r_table = np.array([a ** k for k in range(self.K_TABLE + 1)])
        self._sup_dphi = self.transition.sup_derivative()

    def strip_index(self, r):
        r = np.asarray(r, dtype=float)
        # strip k covers (r_{k+1}, r_k]
        k = np.searchsorted(-self._r_table, -r, side="left")
        return np.clip(k - 1, 0, self.K_TABLE - 1)

    def singular_set(self) -> ExceptionalSet:
        return ExceptionalSet.box((0.0, 0.0, -1.0), (0.0, 0.0, 1.0))

    def _f(self, k, theta):
        p = self.params
        k = np.asarray(k)
        hk = np.where(k == 0, 0.0, p.h ** k)
        freq = p.lam ** (-k.astype(float))
        return hk * np.sin(np.asarray(theta, dtype=float) * freq)

    def _fprime(self, k, theta):
        p = self.params
        k = np.asarray(k)
        hk = np.where(k == 0, 0.0, p.h ** k)
        freq = p.lam ** (-k.astype(float))
        return hk * freq * np.cos(np.asarray(theta, dtype=float) * freq)

    def _strip_data(self, r, theta):
        p = self.params
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        k = self.strip_index(r)
        r_out = self._r_table[k]
        r_in = self._r_table[k + 1]
        s = (r - r_in) / (r_out - r_in)
        w = self.transition(s)
        dw = self.transition.derivative(s) / (r_out - r_in)
        fk, fk1 = self._f(k, theta), self._f(k + 1, theta)
        gk, gk1 = self._fprime(k, theta), self._fprime(k + 1, theta)
        psi = w * fk + (1.0 - w) * fk1
        ptheta = w * gk + (1.0 - w) * gk1
        pr = dw * (fk - fk1)
        return psi, ptheta, pr, k

    def psi(self, r, theta):
        r = np.asarray(r, dtype=float)
        center = r <= 0.0
        val = self._strip_data(np.where(center, self._r_table[1], r), theta)[0]
        return np.where(center, 0.0, val)

    def _panels_per_period(self) -> int:
        return 2 * self.panels_per_osc * self.params.lam_inverse

    def _periodized_theta_integral(self, integrand, r: float, theta_hi: float) -> float:
        k = int(self.strip_index(r))
        P = 2.0 * math.pi * self.params.lam ** k
        panels = self._panels_per_period()
        nodes, weights = gauss_rule(12)

        def block(a, b, n):
            edges = np.linspace(a, b, n + 1)
            mids = 0.5 * (edges[:-1] + edges[1:])
            halves = 0.5 * np.diff(edges)
            pts = (mids[:, None] + halves[:, None] * nodes[None, :]).ravel()
            vals = np.asarray(integrand(np.full_like(pts, r), pts)).reshape(n, -1)
            return float(np.sum(halves * (vals @ weights)))

        n_full = int(math.floor(theta_hi / P + 1e-12))
        rem = max(theta_hi - n_full * P, 0.0)
        per = block(0.0, P, panels) if n_full else 0.0
        tail = block(0.0, rem, max(2, int(math.ceil(panels * rem / P)))) if rem > 1e-15 else 0.0
        return n_full * per + tail

    def section_length(self, r: float) -> float:
        """Circumference of the section circle at radius r."""
        if r <= 0.0:
            return 0.0

        def speed(rr, th):
            _, ptheta, _, _ = self._strip_data(rr, th)
            return np.sqrt(rr ** 2 + ptheta ** 2)

        return self._periodized_theta_integral(speed, float(r), 2.0 * math.pi)

    def annulus_area(self, k: int) -> tuple[float, float]:
        """Area over annulus k, with its derived upper bound."""
        p = self.params
        r_out, r_in = p.a ** k, p.a ** (k + 1)

        def density_row(r: float) -> float:
            def dens(rr, th):
                _, ptheta, pr, _ = self._strip_data(rr, th)
                return np.sqrt(rr ** 2 + ptheta ** 2 + (rr * pr) ** 2)

            return self._periodized_theta_integral(dens, r, 2.0 * math.pi)

        nodes, weights = gauss_rule(12)
        panels = 8
        edges = np.linspace(r_in, r_out, panels + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            for node, wt in zip(nodes, weights):
                total += half * wt * density_row(float(mid + half * node))
        if p.h == 0.0:
            ptheta_max = 0.0
        else:
            ptheta_max = max((p.h / p.lam) ** k, (p.h / p.lam) ** (k + 1))
        rpr_max = self._sup_dphi * (p.h ** k + p.h ** (k + 1)) / (1.0 - p.a)
        bound = 2.0 * math.pi * (r_out - r_in) * math.sqrt(
            r_out ** 2 + ptheta_max ** 2 + rpr_max ** 2
        )
        return total, bound

    def omega_surface_coeffs(self, r: float, theta: float) -> tuple[float, float]:
        """Frame coefficients of the form at the surface point (polar frame)."""
        L = self.section_length(r)

        def speed(rr, th):
            _, ptheta, _, _ = self._strip_data(rr, th)
            return np.sqrt(rr ** 2 + ptheta ** 2)

        Lrt = self._periodized_theta_integral(speed, r, theta)
        dr = 1e-7 * max(r, 1e-6)
        # keep the difference stencil inside one strip: mixing strips mixes
        # quadrature panelizations and their independent errors blow up /dr
        k = int(self.strip_index(r))
        r_out, r_in = float(self._r_table[k]), float(self._r_table[k + 1])
        r_eval = min(max(r, r_in + 4 * dr), r_out - 4 * dr)
        dL = (self.section_length(r_eval + dr) - self.section_length(r_eval - dr)) / (2 * dr)
        dLrt = (
            self._periodized_theta_integral(speed, r_eval + dr, theta)
            - self._periodized_theta_integral(speed, r_eval - dr, theta)
        ) / (2 * dr)
        Yterm = (L * dLrt - Lrt * dL) / (L * L)
        _, ptheta, pr, _ = (float(v) for v in self._strip_data(r, theta))
        n1 = math.sqrt(1.0 + (ptheta / r) ** 2)
        n2 = math.sqrt(1.0 + (ptheta / r) ** 2 + pr ** 2)
        c1 = 1.0 / L * 1.0  # pairing with tau1 (angular direction)
        c2 = -(ptheta / r) * pr / (L * n2) + Yterm * n1 / n2
        return c1, c2

    def sup_omega_on_circle(self, k: int, samples: int = 64) -> float:
        r = float(self._r_table[k])
        P = 2.0 * math.pi * self.params.lam ** k
        best = 0.0
        for theta in np.linspace(0.0, P, samples, endpoint=False):
            c1, c2 = self.omega_surface_coeffs(r, float(theta))
            best = max(best, math.hypot(c1, c2))
        return best

    def boundary_circulation(self) -> float:
        """Circulation of the form around the positively oriented unit circle."""
        def integrand(rr, th):
            out = np.empty_like(th)
            for i, t in enumerate(np.atleast_1d(th)):
                c1, _ = self.omega_surface_coeffs(1.0, float(t))
                _, ptheta, _, _ = (float(v) for v in self._strip_data(1.0, t))
                # tangent to the lifted circle: speed sqrt(r^2 + ptheta^2)
                out[i] = c1 * math.sqrt(1.0 + ptheta ** 2)
            return out

        return self._periodized_theta_integral(integrand, 1.0, 2.0 * math.pi)


def cylindrical_variant(params: Optional[Params] = None) -> CylindricalModel:
    """One-singular-point analogue; experimental (conditions re-derived here).

    Requires a*h/lambda < 1 (area), h > lambda (length blow-up), and
    lambda < min(a, h) (continuity of the form at the origin).
    """
    params = params or Params.default()
    problems = []
    if not params.a * params.h / params.lam < 1.0:
        problems.append("area: a*h/lambda < 1")
    if not params.h > params.lam:
        problems.append("length: h > lambda")
    if not (params.lam < params.a and params.lam < params.h):
        problems.append("continuity: lambda < min(a, h)")
    if problems:
        raise ParamsError("cylindrical variant needs " + "; ".join(problems))
    return CylindricalModel(params)
