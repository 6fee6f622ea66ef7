"""Reference distribution models with exact CDF, quantile and tail integrals.

Every model exposes the same surface:

* ``cdf(t)``                 distribution function F
* ``quantile(u)``            generalized (cadlag) inverse of F
* ``tail(t)``                P(|Y| > t)
* ``tail_quantile(u)``       cadlag inverse of the tail function of |Y|
* ``cdf_antiderivative(t)``  t -> integral of F over (-inf, t] (finite because
                             every kind here has support bounded below)
* ``upper_mean_excess(t)``   integral of 1 - F over [t, inf)

plus metadata used by the convergence checkers: ``support()``,
``tail_exponent()`` (the r such that tail(t) ~ t**-r, ``inf`` for bounded or
exponential tails), ``density_bound`` and ``mean_abs()``.

All evaluation methods accept scalars or numpy arrays and are vectorized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "DistributionModel",
    "Uniform",
    "Exponential",
    "ParetoTail",
    "PowerPushforward",
    "Tabulated",
    "model_from_dict",
]


def _maybe_scalar(out, like):
    """Return a python float when the query was scalar."""
    if np.ndim(like) == 0:
        return float(out)
    return out


def _bisect_nonincreasing(fn, target, lo, hi, iters=200):
    """inf{t in [lo, hi] : fn(t) <= target} for nonincreasing fn."""
    if fn(lo) <= target:
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if fn(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


class DistributionModel:
    """Common behaviour; concrete kinds override the closed forms."""

    kind = "abstract"
    density_bound: float | None = None

    # --- evaluation surface -------------------------------------------------
    def cdf(self, t):
        raise NotImplementedError

    def quantile(self, u):
        raise NotImplementedError

    def tail(self, t):
        raise NotImplementedError

    def cdf_antiderivative(self, t):
        raise NotImplementedError

    def upper_mean_excess(self, t):
        raise NotImplementedError

    def tail_quantile(self, u):
        """Cadlag inverse of ``tail``; generic bisection fallback."""
        u_arr = np.asarray(u, dtype=float)
        lo, hi = self.support()
        hi_abs = max(abs(lo), abs(hi))
        if not math.isfinite(hi_abs):
            raise NotImplementedError("unbounded model must override tail_quantile")
        out = np.empty(u_arr.shape)
        flat = out.reshape(-1)
        for i, ui in enumerate(np.atleast_1d(u_arr).reshape(-1)):
            if ui >= 1.0:
                flat[i] = 0.0
            else:
                flat[i] = _bisect_nonincreasing(lambda t: float(self.tail(t)), ui, 0.0, hi_abs)
        return _maybe_scalar(out, u)

    def quantile_density(self, u):
        """Derivative of the quantile function; not all kinds have one."""
        raise ValidationError(f"{self.kind} model has no differentiable quantile")

    # --- metadata -----------------------------------------------------------
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def tail_exponent(self) -> float:
        """Polynomial decay rate r of P(|Y|>t); math.inf if faster than any power."""
        raise NotImplementedError

    @property
    def has_finite_mean(self) -> bool:
        return self.tail_exponent() > 1.0

    def mean_abs(self) -> float:
        """E|Y| via E|Y| = int_0^inf tail = upper_mean_excess(0) + cdf_antiderivative(0)."""
        return float(self.upper_mean_excess(0.0)) + float(self.cdf_antiderivative(0.0))

    def sqrt_tail_integral_exact(self) -> float | None:
        """Closed form of int_0^inf sqrt(tail(t)) dt when available, else None."""
        return None

    def quantile_tail_integral_exact(self, alpha: float) -> float | None:
        """Closed form of int_0^alpha Q(u)/sqrt(u) du when available, else None."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(DistributionModel):
    lo: float = 0.0
    hi: float = 1.0

    kind = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.hi > self.lo):
            raise ValidationError("Uniform requires finite lo < hi")

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def density_bound(self):
        return 1.0 / self.width

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        return _maybe_scalar(np.clip((t_arr - self.lo) / self.width, 0.0, 1.0), t)

    def quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _maybe_scalar(self.lo + u_arr * self.width, u)

    def tail(self, t):
        t_arr = np.asarray(t, dtype=float)
        upper = np.clip((self.hi - t_arr) / self.width, 0.0, 1.0)
        lower = np.clip((-t_arr - self.lo) / self.width, 0.0, 1.0)
        out = np.where(t_arr < 0.0, 1.0, np.clip(upper + lower, 0.0, 1.0))
        return _maybe_scalar(out, t)

    def tail_quantile(self, u):
        if self.lo < 0.0:
            return super().tail_quantile(u)
        u_arr = np.asarray(u, dtype=float)
        out = np.where(u_arr >= 1.0, 0.0, self.hi - u_arr * self.width)
        return _maybe_scalar(out, u)

    def cdf_antiderivative(self, t):
        t_arr = np.asarray(t, dtype=float)
        w = self.width
        inside = np.clip(t_arr, self.lo, self.hi) - self.lo
        out = inside**2 / (2.0 * w) + np.maximum(t_arr - self.hi, 0.0)
        return _maybe_scalar(out, t)

    def upper_mean_excess(self, t):
        t_arr = np.asarray(t, dtype=float)
        w = self.width
        inside = self.hi - np.clip(t_arr, self.lo, self.hi)
        out = inside**2 / (2.0 * w) + np.maximum(self.lo - t_arr, 0.0)
        return _maybe_scalar(out, t)

    def quantile_density(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _maybe_scalar(np.full(u_arr.shape, self.width), u)

    def support(self):
        return (self.lo, self.hi)

    def tail_exponent(self):
        return math.inf

    def sqrt_tail_integral_exact(self):
        if self.lo < 0.0:
            return None
        # int_0^lo 1 dt + int_lo^hi sqrt((hi-t)/w) dt
        return self.lo + 2.0 * self.width / 3.0

    def to_dict(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Exponential(DistributionModel):
    rate: float = 1.0

    kind = "exponential"

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise ValidationError("Exponential requires rate > 0")

    @property
    def density_bound(self):
        return self.rate

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.where(t_arr <= 0.0, 0.0, -np.expm1(-self.rate * np.maximum(t_arr, 0.0)))
        return _maybe_scalar(out, t)

    def quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _maybe_scalar(-np.log1p(-u_arr) / self.rate, u)

    def tail(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.where(t_arr <= 0.0, 1.0, np.exp(-self.rate * np.maximum(t_arr, 0.0)))
        return _maybe_scalar(out, t)

    def tail_quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        out = np.where(u_arr >= 1.0, 0.0, -np.log(np.minimum(u_arr, 1.0)) / self.rate)
        return _maybe_scalar(out, u)

    def cdf_antiderivative(self, t):
        t_arr = np.maximum(np.asarray(t, dtype=float), 0.0)
        out = t_arr + np.expm1(-self.rate * t_arr) / self.rate
        return _maybe_scalar(out, t)

    def upper_mean_excess(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.exp(-self.rate * np.maximum(t_arr, 0.0)) / self.rate - np.minimum(t_arr, 0.0)
        return _maybe_scalar(out, t)

    def quantile_density(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _maybe_scalar(1.0 / (self.rate * (1.0 - u_arr)), u)

    def support(self):
        return (0.0, math.inf)

    def tail_exponent(self):
        return math.inf

    def sqrt_tail_integral_exact(self):
        return 2.0 / self.rate

    def to_dict(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class ParetoTail(DistributionModel):
    """P(Y > t) = (scale/t)**exponent for t >= scale; support [scale, inf)."""

    scale: float = 1.0
    exponent: float = 3.0

    kind = "pareto_tail"

    def __post_init__(self):
        if not (self.scale > 0.0 and self.exponent > 0.0):
            raise ValidationError("ParetoTail requires scale > 0 and exponent > 0")

    @property
    def density_bound(self):
        return self.exponent / self.scale

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        safe = np.maximum(t_arr, self.scale)
        out = np.where(t_arr < self.scale, 0.0, 1.0 - (self.scale / safe) ** self.exponent)
        return _maybe_scalar(out, t)

    def quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _maybe_scalar(self.scale * (1.0 - u_arr) ** (-1.0 / self.exponent), u)

    def tail(self, t):
        t_arr = np.asarray(t, dtype=float)
        safe = np.maximum(t_arr, self.scale)
        out = np.where(t_arr < self.scale, 1.0, (self.scale / safe) ** self.exponent)
        return _maybe_scalar(out, t)

    def tail_quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        out = np.where(
            u_arr >= 1.0, 0.0, self.scale * np.minimum(u_arr, 1.0) ** (-1.0 / self.exponent)
        )
        return _maybe_scalar(out, u)

    def cdf_antiderivative(self, t):
        t_arr = np.asarray(t, dtype=float)
        c, r = self.scale, self.exponent
        safe = np.maximum(t_arr, c)
        if r == 1.0:
            tail_part = c * np.log(safe / c)
        else:
            tail_part = c**r * (safe ** (1.0 - r) - c ** (1.0 - r)) / (1.0 - r)
        out = np.where(t_arr < c, 0.0, (safe - c) - tail_part)
        return _maybe_scalar(out, t)

    def upper_mean_excess(self, t):
        if self.exponent <= 1.0:
            raise ValidationError(
                f"mean excess diverges: tail exponent {self.exponent} <= 1"
            )
        t_arr = np.asarray(t, dtype=float)
        c, r = self.scale, self.exponent
        safe = np.maximum(t_arr, c)
        beyond = c**r * safe ** (1.0 - r) / (r - 1.0)
        out = beyond + np.maximum(c - t_arr, 0.0)
        return _maybe_scalar(out, t)

    def quantile_density(self, u):
        u_arr = np.asarray(u, dtype=float)
        c, r = self.scale, self.exponent
        return _maybe_scalar((c / r) * (1.0 - u_arr) ** (-1.0 - 1.0 / r), u)

    def support(self):
        return (self.scale, math.inf)

    def tail_exponent(self):
        return self.exponent

    def sqrt_tail_integral_exact(self):
        if self.exponent <= 2.0:
            return None
        return self.scale * self.exponent / (self.exponent - 2.0)

    def to_dict(self):
        return {"kind": "pareto_tail", "scale": self.scale, "exponent": self.exponent}


@dataclass
class Tabulated(DistributionModel):
    """CDF given by values on a strictly increasing grid.

    ``interp="linear"`` linearly interpolates between knots (with a jump of
    ``cdf_values[0]`` at ``grid[0]``); ``interp="step"`` is the right-continuous
    step CDF, which represents an empirical CDF exactly.  The last value must
    be 1: mass beyond the grid is a documented tail cutoff the caller controls
    through the grid extent.
    """

    grid: np.ndarray
    cdf_values: np.ndarray
    interp: str = "linear"

    kind = "tabulated"
    density_bound = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.cdf_values = np.asarray(self.cdf_values, dtype=float)
        if self.grid.ndim != 1 or len(self.grid) < 2:
            raise ValidationError("tabulated grid needs at least 2 points")
        if not np.all(np.diff(self.grid) > 0):
            raise ValidationError("tabulated grid must be strictly increasing")
        if len(self.cdf_values) != len(self.grid):
            raise ValidationError("grid and cdf_values length mismatch")
        if np.any(np.diff(self.cdf_values) < 0):
            raise ValidationError("cdf values must be nondecreasing")
        if self.cdf_values[0] < 0 or abs(self.cdf_values[-1] - 1.0) > 1e-9:
            raise ValidationError("cdf values must lie in [0, 1] and end at 1")
        if self.interp not in ("linear", "step"):
            raise ValidationError("interp must be 'linear' or 'step'")
        self.cdf_values = self.cdf_values.copy()
        self.cdf_values[-1] = 1.0
        self._build_antiderivative()

    @classmethod
    def from_sample(cls, values) -> "Tabulated":
        """Step CDF placing mass 1/n at every observation (ties merge)."""
        v = np.sort(np.asarray(values, dtype=float).ravel())
        if len(v) == 0 or not np.all(np.isfinite(v)):
            raise ValidationError("sample must be nonempty and finite")
        uniq, counts = np.unique(v, return_counts=True)
        if len(uniq) < 2:
            uniq = np.concatenate([uniq, uniq + max(1.0, abs(uniq[0]))])
            counts = np.concatenate([counts, [0]])
        cdf = np.cumsum(counts) / len(v)
        return cls(uniq, cdf, interp="step")

    def _build_antiderivative(self):
        g, v = self.grid, self.cdf_values
        if self.interp == "step":
            piece = v[:-1] * np.diff(g)
        else:
            piece = 0.5 * (v[:-1] + v[1:]) * np.diff(g)
        self._a_knots = np.concatenate([[0.0], np.cumsum(piece)])

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        g, v = self.grid, self.cdf_values
        if self.interp == "step":
            idx = np.searchsorted(g, t_arr, side="right")
            vv = np.concatenate([[0.0], v])
            out = vv[idx]
        else:
            out = np.where(t_arr < g[0], 0.0, np.interp(t_arr, g, v))
        return _maybe_scalar(out, t)

    def _cdf_left_limit(self, t):
        t_arr = np.asarray(t, dtype=float)
        g, v = self.grid, self.cdf_values
        if self.interp == "step":
            idx = np.searchsorted(g, t_arr, side="left")
            vv = np.concatenate([[0.0], v])
            out = vv[idx]
        else:
            out = np.where(t_arr <= g[0], 0.0, np.interp(t_arr, g, v))
        return out

    def quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        g, v = self.grid, self.cdf_values
        idx = np.searchsorted(v, u_arr, side="left")
        idx = np.clip(idx, 0, len(g) - 1)
        if self.interp == "step":
            out = g[idx]
        else:
            left = np.clip(idx - 1, 0, len(g) - 1)
            dv = v[idx] - v[left]
            frac = np.where(dv > 0, (u_arr - v[left]) / np.where(dv > 0, dv, 1.0), 0.0)
            out = np.where(idx == 0, g[0], g[left] + frac * (g[idx] - g[left]))
        return _maybe_scalar(out, u)

    def tail(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = (1.0 - np.asarray(self.cdf(t_arr))) + self._cdf_left_limit(-t_arr)
        out = np.where(t_arr < 0.0, 1.0, np.clip(out, 0.0, 1.0))
        return _maybe_scalar(out, t)

    def tail_quantile(self, u):
        if self.grid[0] >= 0.0:
            u_arr = np.asarray(u, dtype=float)
            out = np.where(u_arr >= 1.0, 0.0, np.asarray(self.quantile(1.0 - u_arr)))
            out = np.maximum(out, 0.0)
            return _maybe_scalar(out, u)
        return super().tail_quantile(u)

    def cdf_antiderivative(self, t):
        t_arr = np.asarray(t, dtype=float)
        g, v = self.grid, self.cdf_values
        idx = np.clip(np.searchsorted(g, t_arr, side="right") - 1, 0, len(g) - 2)
        t_in = np.clip(t_arr, g[0], g[-1])
        dt = t_in - g[idx]
        if self.interp == "step":
            local = v[idx] * dt
        else:
            slope = (v[idx + 1] - v[idx]) / (g[idx + 1] - g[idx])
            local = v[idx] * dt + 0.5 * slope * dt**2
        out = self._a_knots[idx] + local + np.maximum(t_arr - g[-1], 0.0)
        out = np.where(t_arr < g[0], 0.0, out)
        return _maybe_scalar(out, t)

    def upper_mean_excess(self, t):
        t_arr = np.asarray(t, dtype=float)
        a_top = self._a_knots[-1]
        t_in = np.clip(t_arr, self.grid[0], self.grid[-1])
        out = (self.grid[-1] - t_in) - (a_top - np.asarray(self.cdf_antiderivative(t_in)))
        out = out + np.maximum(self.grid[0] - t_arr, 0.0)
        out = np.where(t_arr > self.grid[-1], 0.0, out)
        return _maybe_scalar(out, t)

    def support(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    def tail_exponent(self):
        return math.inf

    def quantile_tail_integral_exact(self, alpha):
        # the tail quantile is piecewise linear in u (breakpoints 1 - v[i]),
        # so each segment integrates to (A + B u)/sqrt(u) in closed form
        if self.grid[0] < 0.0:
            # reduce to the |Y| tabulation: F_|Y|(t) = F(t) - F(-t^-), exact
            # at the folded knots for both interpolation modes
            t_knots = np.unique(np.abs(self.grid))
            if t_knots[0] > 0.0:
                t_knots = np.concatenate([[0.0], t_knots])
            f_abs = np.asarray(self.cdf(t_knots)) - self._cdf_left_limit(-t_knots)
            f_abs = np.clip(np.maximum.accumulate(f_abs), 0.0, 1.0)
            f_abs[-1] = 1.0
            folded = Tabulated(t_knots, f_abs, interp=self.interp)
            return folded.quantile_tail_integral_exact(alpha)
        g, v = self.grid, self.cdf_values
        u_lo = 1.0 - v[1:]
        u_hi = 1.0 - v[:-1]
        if self.interp == "step":
            a_coef = g[1:].copy()
            b_coef = np.zeros(len(g) - 1)
        else:
            dv = np.diff(v)
            with np.errstate(divide="ignore", invalid="ignore"):
                slope = np.where(dv > 0, np.diff(g) / np.where(dv > 0, dv, 1.0), 0.0)
            a_coef = g[:-1] + (1.0 - v[:-1]) * slope
            b_coef = -slope
        # top piece: u in [1 - v[0], 1] has constant quantile g[0]
        u_lo = np.concatenate([u_lo, [1.0 - v[0]]])
        u_hi = np.concatenate([u_hi, [1.0]])
        a_coef = np.concatenate([a_coef, [g[0]]])
        b_coef = np.concatenate([b_coef, [0.0]])
        lo = np.clip(u_lo, 0.0, alpha)
        hi = np.clip(u_hi, 0.0, alpha)
        keep = hi > lo
        lo, hi = lo[keep], hi[keep]
        root_lo, root_hi = np.sqrt(lo), np.sqrt(hi)
        pieces = 2.0 * a_coef[keep] * (root_hi - root_lo)
        pieces += (2.0 / 3.0) * b_coef[keep] * (root_hi**3 - root_lo**3)
        return float(np.sum(pieces))

    def to_dict(self):
        return {
            "kind": "tabulated",
            "grid": self.grid.tolist(),
            "cdf_values": self.cdf_values.tolist(),
            "interp": self.interp,
        }


@dataclass(frozen=True)
class PowerPushforward(DistributionModel):
    """Law of Y = X**(-exponent) for X ~ base measure on (0, 1).

    With the Lebesgue base this is exactly ParetoTail(1, 1/exponent).  With a
    tabulated base CDF G the tabulation is transformed knot-for-knot
    (F_Y(x**-a) = 1 - G(x)); mass below the first base knot becomes the tail
    cutoff of the transformed table.
    """

    exponent: float = 0.25
    base: "Tabulated | str" = "lebesgue"
    _inner: DistributionModel = field(init=False, repr=False, compare=False)

    kind = "power_pushforward"

    def __post_init__(self):
        if not (self.exponent > 0.0 and math.isfinite(self.exponent)):
            raise ValidationError("PowerPushforward requires exponent > 0")
        if isinstance(self.base, str):
            if self.base != "lebesgue":
                raise ValidationError("base must be 'lebesgue' or a Tabulated model")
            inner = ParetoTail(scale=1.0, exponent=1.0 / self.exponent)
        else:
            g, v = self.base.grid, self.base.cdf_values
            if g[0] <= 0.0 or g[-1] > 1.0:
                raise ValidationError("tabulated base must live on (0, 1]")
            y_grid = g[::-1] ** (-self.exponent)
            y_cdf = (1.0 - v[::-1]).copy()
            y_cdf[-1] = 1.0
            inner = Tabulated(y_grid, y_cdf, interp="linear")
        object.__setattr__(self, "_inner", inner)

    @property
    def density_bound(self):
        return None

    def cdf(self, t):
        return self._inner.cdf(t)

    def quantile(self, u):
        return self._inner.quantile(u)

    def tail(self, t):
        return self._inner.tail(t)

    def tail_quantile(self, u):
        return self._inner.tail_quantile(u)

    def cdf_antiderivative(self, t):
        return self._inner.cdf_antiderivative(t)

    def upper_mean_excess(self, t):
        return self._inner.upper_mean_excess(t)

    def quantile_density(self, u):
        return self._inner.quantile_density(u)

    def support(self):
        return self._inner.support()

    def tail_exponent(self):
        return self._inner.tail_exponent()

    def sqrt_tail_integral_exact(self):
        return self._inner.sqrt_tail_integral_exact()

    def quantile_tail_integral_exact(self, alpha):
        return self._inner.quantile_tail_integral_exact(alpha)

    def to_dict(self):
        base = "lebesgue" if isinstance(self.base, str) else self.base.to_dict()
        return {"kind": "power_pushforward", "exponent": self.exponent, "base": base}


def model_from_dict(d: dict) -> DistributionModel:
    """Rebuild a model from its ``to_dict`` form (the JSON wire format)."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError("model spec must be a dict with a 'kind' field")
    kind = d["kind"]
    if kind == "uniform":
        return Uniform(float(d.get("lo", 0.0)), float(d.get("hi", 1.0)))
    if kind == "exponential":
        return Exponential(float(d.get("rate", 1.0)))
    if kind == "pareto_tail":
        return ParetoTail(float(d.get("scale", 1.0)), float(d.get("exponent", 3.0)))
    if kind == "power_pushforward":
        base = d.get("base", "lebesgue")
        if isinstance(base, dict):
            base = model_from_dict(base)
            if not isinstance(base, Tabulated):
                raise ValidationError("power_pushforward base must be tabulated")
        return PowerPushforward(float(d["exponent"]), base)
    if kind == "tabulated":
        return Tabulated(
            np.asarray(d["grid"], dtype=float),
            np.asarray(d["cdf_values"], dtype=float),
            d.get("interp", "linear"),
        )
    raise ValidationError(f"unknown model kind {kind!r}")
