"""Constant-sum samplers with standard Cauchy marginals.

For a target per-variable center c with 0 < c <= log(n-1)/pi, the law is
decomposed as a continuum mixture of slice laws indexed by t > 0. Each
slice is an atom at c-t, an atom at c+(n-1)t and a uniform piece on
[c-t, cut(t)], weighted so that the slice mean is exactly c; the mixing
measure over t reassembles the Cauchy density. Every slice admits an
n-tuple coupling with constant sum n*c:

* the two atoms combine cyclically (one coordinate at the high atom, the
  rest at the low atom) with an exactly constant sum;
* the atom-plus-uniform remainder is realized by a rearrangement coupling
  of its mid-quantile discretization, with the tiny discretization
  residual of each row folded back into one in-range uniform coordinate so
  emitted sums are exact.

c = 0 is handled by a separate exact construction (the law is a scale
mixture of centered uniforms, and centered uniforms combine into constant
sums by antithetic pairs plus an explicit three-block map); c < 0 by
reflection of the mixer for -c.

The slice machinery is driven by the clip level h(t): the unique level
below the density value at c+t for which the level-clipped density over
the window [c-t, c+(n-1)t] has centered first moment zero.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.integrate import quad
from scipy.optimize import brentq

from .distributions import AtomUniform, GenericDensity
from .errors import ConstructionError, DomainError
from .rearrangement import discretize, ra_flatten
from .seeding import substream

PI = math.pi
_EPS = np.finfo(float).eps


def _atan_diff(u, el):
    """arctan(u) - arctan(el), computed without cancellation."""
    u = np.asarray(u, dtype=float)
    el = np.asarray(el, dtype=float)
    denom = 1.0 + u * el
    base = np.arctan((u - el) / denom)
    corr = np.where(denom > 0, 0.0, np.where(u >= el, PI, -PI))
    out = base + corr
    return float(out) if out.ndim == 0 else out


class CauchyKernel:
    """Closed-form standard Cauchy ingredients for the slice machinery."""

    name = "cauchy"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = 1.0 / (PI * (1.0 + x * x))
        return float(out) if out.ndim == 0 else out

    def peak(self):
        return 1.0 / PI

    def inverse_pdf(self, y):
        """Positive x with pdf(x) = y; +inf for y <= 0."""
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(
                y <= 0.0, np.inf, np.sqrt(np.maximum(1.0 / (PI * np.maximum(y, 1e-300)) - 1.0, 0.0))
            )
        return float(out) if out.ndim == 0 else out

    def centered_moment(self, el, u, c):
        """Integral of (x - c) * pdf(x) over [el, u], cancellation-safe."""
        el = np.asarray(el, dtype=float)
        u = np.asarray(u, dtype=float)
        t1 = np.log1p((u - el) * (u + el) / (1.0 + el * el)) / (2.0 * PI)
        t2 = -(c / PI) * _atan_diff(u, el)
        out = t1 + t2
        return float(out) if out.ndim == 0 else out

    def cdf_diff(self, el, u):
        """F(u) - F(el)."""
        out = _atan_diff(u, el) / PI
        return float(out) if np.ndim(out) == 0 else out

    def center_limit(self, n):
        return math.log(n - 1) / PI

    def radius_cdf(self, a):
        """cdf of the radius law when the density is viewed as a scale
        mixture of centered uniforms: 2F(a) - 1 - 2a*pdf(a)."""
        a = np.asarray(a, dtype=float)
        out = (2.0 / PI) * (np.arctan(a) - a / (1.0 + a * a))
        return float(out) if out.ndim == 0 else out

    def radius_pdf(self, a):
        a = np.asarray(a, dtype=float)
        out = 4.0 * a * a / (PI * (1.0 + a * a) ** 2)
        return float(out) if out.ndim == 0 else out

    def radius_quantile(self, u):
        """Vectorized inverse of radius_cdf (Newton from asymptotic guesses)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        # small-u: R(a) ~ 4a^3/(3pi); large-u: 1-R(a) ~ 4/(pi*a)
        a = np.where(
            u < 0.5,
            np.cbrt(3.0 * PI * np.maximum(u, 1e-300) / 4.0),
            4.0 / (PI * np.maximum(1.0 - u, 1e-300)),
        )
        for _ in range(60):
            resid = self.radius_cdf(a) - u
            step = resid / np.maximum(self.radius_pdf(a), 1e-300)
            step = np.clip(step, -a * 0.9, a * 9.0)
            a_new = a - step
            if np.max(np.abs(a_new - a) / np.maximum(a, 1e-300)) < 1e-14:
                a = a_new
                break
            a = a_new
        return a


class DensityKernel:
    """Quadrature-backed ingredients for a generic admissible density."""

    name = "generic"

    def __init__(self, density: GenericDensity, center_limit_value: float):
        self.density = density
        self._limit = float(center_limit_value)

    def pdf(self, x):
        return self.density.pdf(x)

    def peak(self):
        return float(self.density.pdf(0.0))

    def inverse_pdf(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.array([self.density.inverse_pdf(v) for v in y])
        return float(out[0]) if out.size == 1 else out

    def centered_moment(self, el, u, c):
        el_a = np.atleast_1d(np.asarray(el, dtype=float))
        u_a = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array(
            [
                quad(lambda x: (x - c) * self.density.pdf(x), lo, hi, limit=400)[0]
                for lo, hi in zip(el_a, u_a)
            ]
        )
        return float(out[0]) if out.size == 1 else out

    def cdf_diff(self, el, u):
        el_a = np.atleast_1d(np.asarray(el, dtype=float))
        u_a = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array([self.density.cdf(hi) - self.density.cdf(lo) for lo, hi in zip(el_a, u_a)])
        return float(out[0]) if out.size == 1 else out

    def center_limit(self, n):
        return self._limit

    def radius_cdf(self, a):
        a_arr = np.atleast_1d(np.asarray(a, dtype=float))
        out = np.array(
            [2.0 * self.density.cdf(v) - 1.0 - 2.0 * v * float(self.density.pdf(v)) for v in a_arr]
        )
        return float(out[0]) if out.size == 1 else out

    def radius_pdf(self, a):
        a_arr = np.atleast_1d(np.asarray(a, dtype=float))
        out = np.array([-2.0 * v * self.density.dpdf(v) for v in a_arr])
        return float(out[0]) if out.size == 1 else out

    def radius_quantile(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        for i, ui in enumerate(u):
            hi = 1.0
            while self.radius_cdf(hi) < ui and hi < 1e14:
                hi *= 2.0
            out[i] = brentq(lambda a: self.radius_cdf(a) - ui, 0.0, hi, xtol=1e-13, rtol=8.9e-16)
        return out


@dataclass(frozen=True)
class MixerConfig:
    """Build parameters for a constant-sum Cauchy sampler.

    ``c`` is the per-variable center; admissible range |c| <= log(n-1)/pi.
    ``t_grid`` knots tabulate the slice machinery on a log-spaced grid,
    ``tail_eps`` bounds the truncated mixing-measure mass, ``ra_grid_m``
    is the discretization size of the per-slice rearrangement couplings,
    and ``seed`` drives their deterministic initial shuffles.
    """

    n: int
    c: float
    t_grid: int = 2048
    tail_eps: float = 1e-4
    ra_grid_m: int = 512
    root_tol: float = 1e-12
    t_min: float = 1e-6
    seed: int = 0


@dataclass(frozen=True)
class SliceWeights:
    """Weights of one slice law: atoms at c-t and c+(n-1)t plus a uniform
    piece on [c-t, cut]; ``rate`` is their total, the mixing density."""

    t: float
    level: float
    w_lo: float
    w_hi: float
    cut: float
    w_unif: float

    @property
    def rate(self):
        return self.w_lo + self.w_hi + self.w_unif


@dataclass
class SampleBatch:
    """Rows of a constant-sum sample: values plus per-row provenance."""

    values: np.ndarray          # (count, n)
    t: np.ndarray               # mixing parameter per row
    branch: np.ndarray          # 1 = exact atom construction, 2 = coupling row
    row_bound: np.ndarray       # guaranteed |row sum - n*c| bound per row
    target_sum: float

    def row_sums(self):
        return self.values.sum(axis=1)

    def __len__(self):
        return self.values.shape[0]


def _uniform_block_rows(n, count, rng):
    """count x n matrix, coordinates U(0,1), every row summing to n/2.

    Even n: antithetic pairs (v, 1-v). Odd n: one explicit three-block
    (v, shift of v by 1/2 mod 1, and the slope -2 completion) plus pairs.
    """
    rows = np.empty((count, n))
    k = 0
    if n % 2 == 1:
        v = rng.random(count)
        rows[:, 0] = v
        rows[:, 1] = np.where(v < 0.5, v + 0.5, v - 0.5)
        rows[:, 2] = np.where(v < 0.5, 1.0 - 2.0 * v, 2.0 - 2.0 * v)
        k = 3
    while k < n:
        v = rng.random(count)
        rows[:, k] = v
        rows[:, k + 1] = 1.0 - v
        k += 2
    return rows


def _permute_rows(values, rng):
    n = values.shape[1]
    perm = rng.permuted(np.broadcast_to(np.arange(n), values.shape).copy(), axis=1)
    return np.take_along_axis(values, perm, axis=1)


class SymmetricMixer:
    """Exact center-0 sampler for a symmetric unimodal kernel.

    Draw a radius from the centered-uniform scale mixture of the density,
    then an exact constant-sum tuple of U(-a, a) coordinates. Marginals
    are exact (no discretization or truncation) and row sums vanish to
    machine precision.
    """

    kind = "symmetric"

    def __init__(self, config: MixerConfig, kernel=None):
        if config.n < 2:
            raise DomainError("need n >= 2")
        if config.c != 0.0:
            raise DomainError("symmetric construction only covers c = 0")
        self.config = config
        self.kernel = kernel or CauchyKernel()
        self.n = config.n
        self.c = 0.0
        self.mass_deficit = 0.0

    def sample(self, count, rng) -> SampleBatch:
        n = self.n
        radius = self.kernel.radius_quantile(rng.random(count))
        rows = _uniform_block_rows(n, count, rng)
        values = (2.0 * rows - 1.0) * radius[:, None]
        values = _permute_rows(values, rng)
        bound = 64.0 * _EPS * n * np.maximum(1.0, radius)
        return SampleBatch(
            values=values,
            t=radius,
            branch=np.ones(count, dtype=np.int8),
            row_bound=bound,
            target_sum=0.0,
        )

    def row_bound_for(self, t, branch):
        return 64.0 * _EPS * self.n * np.maximum(1.0, np.asarray(t, dtype=float))

    def metadata(self):
        cfg = self.config
        return {
            "n": cfg.n,
            "c": 0.0,
            "tail_eps": cfg.tail_eps,
            "ra_grid_m": cfg.ra_grid_m,
            "seed": cfg.seed,
            "mass_deficit": 0.0,
        }


@dataclass
class _CellCoupling:
    """Cached rearrangement coupling of one slice's atom-plus-uniform part."""

    t_hat: float
    lo: float
    cut: float
    atom_weight: float
    raw_matrix: np.ndarray        # columns are exact permutations of the discretization
    corrected_matrix: np.ndarray  # per-row residual folded into one uniform coordinate
    bound: float                  # n * width / m, the recorded per-row bound
    ra_spread: float


class ConstructiveMixer:
    """Sampler for 0 < c <= log(n-1)/pi via the slice decomposition."""

    kind = "constructive"

    def __init__(self, config: MixerConfig, kernel=None):
        kernel = kernel or CauchyKernel()
        n, c = config.n, config.c
        if n < 3:
            raise DomainError("the constructive route needs n >= 3 (n = 2 only admits c = 0)")
        limit = kernel.center_limit(n)
        if not 0.0 < c <= limit + 1e-12:
            raise DomainError(
                f"center {c} outside the admissible interval (0, {limit:.10g}] for n={n}"
            )
        self.config = config
        self.kernel = kernel
        self.n = n
        self.c = min(c, limit)
        self._cells = {}
        self._build()

    # ----- scalar slice machinery -------------------------------------

    def imbalance(self, t, y):
        """Centered first moment of the density clipped at level ``y`` over
        the window [c-t, c+(n-1)t]. The clip level h(t) is its root in y."""
        n, c, kern = self.n, self.c, self.kernel
        lo, hi = c - t, c + (n - 1) * t
        if y > 0.0:
            if y >= kern.peak():
                return 0.0
            r = kern.inverse_pdf(y)
            el, u = max(lo, -r), min(hi, r)
            if el >= u:
                return 0.0
        else:
            el, u = lo, hi
        lin = 0.5 * (u - el) * (u + el - 2.0 * c)
        return kern.centered_moment(el, u, c) - y * lin

    def _imbalance_dy(self, t, y):
        n, c, kern = self.n, self.c, self.kernel
        lo, hi = c - t, c + (n - 1) * t
        if y > 0.0:
            if y >= kern.peak():
                return 0.0
            r = kern.inverse_pdf(y)
            el, u = max(lo, -r), min(hi, r)
            if el >= u:
                return 0.0
        else:
            el, u = lo, hi
        return -0.5 * (u - el) * (u + el - 2.0 * c)

    def _imbalance_dt(self, t, y):
        n, c, kern = self.n, self.c, self.kernel
        a = max(kern.pdf(c + (n - 1) * t) - y, 0.0)
        b = max(kern.pdf(c - t) - y, 0.0)
        return t * ((n - 1) ** 2 * a - b)

    def clip_level(self, t):
        """Solve for the clip level h(t) (root of the imbalance in y)."""
        kern = self.kernel
        ymax = float(kern.pdf(self.c + t))
        a0 = self.imbalance(t, 0.0)
        if a0 <= 0.0:
            if a0 < -1e-10:
                raise ConstructionError(
                    f"imbalance at zero level is {a0:.3e} < 0 at t={t}; "
                    "center outside the admissible interval or numeric defect"
                )
            return 0.0
        if self.imbalance(t, ymax) >= 0.0:
            return ymax
        y = brentq(lambda yy: self.imbalance(t, yy), 0.0, ymax, xtol=1e-300, rtol=8.9e-16)
        for _ in range(6):
            resid = self.imbalance(t, y)
            if abs(resid) <= self.config.root_tol:
                break
            d = self._imbalance_dy(t, y)
            if d == 0.0:
                break
            y = min(max(y - resid / d, 0.0), ymax)
        return y

    def clip_level_slope(self, t, level=None):
        """h'(t) by the implicit-function formula with closed-form partials."""
        if level is None:
            level = self.level_at(t)
        d_y = self._imbalance_dy(t, level)
        if d_y == 0.0:
            return 0.0
        return -self._imbalance_dt(t, level) / d_y

    def edge_density_balance(self, t):
        """(n-1)^2 f(c+(n-1)t) - f(c-t); its sign changes at most once and
        controls the monotonicity of the zero-level imbalance."""
        n, c, kern = self.n, self.c, self.kernel
        t = np.asarray(t, dtype=float)
        out = (n - 1) ** 2 * kern.pdf(c + (n - 1) * t) - kern.pdf(c - t)
        return float(out) if out.ndim == 0 else out

    def slice_weights(self, t, level=None) -> SliceWeights:
        n, c, kern = self.n, self.c, self.kernel
        if level is None:
            level = self.clip_level(t)
        w_lo = float(kern.pdf(c - t)) - level
        w_hi = (n - 1) * max(float(kern.pdf(c + (n - 1) * t)) - level, 0.0)
        cut = min(c + (n - 1) * t, float(kern.inverse_pdf(level)) if level > 0 else math.inf)
        w_unif = -self.clip_level_slope(t, level) * (cut - (c - t))
        self._check_slice(t, level, w_lo, w_hi, cut, w_unif)
        return SliceWeights(t=t, level=level, w_lo=w_lo, w_hi=w_hi, cut=cut, w_unif=w_unif)

    def _check_slice(self, t, level, w_lo, w_hi, cut, w_unif):
        c, n = self.c, self.n
        if w_lo <= 0.0:
            raise ConstructionError(f"low-atom weight {w_lo} <= 0 at t={t}")
        if w_hi < 0.0 or w_unif < -1e-15:
            raise ConstructionError(f"negative slice weight at t={t}")
        if cut < c + t - 1e-9 * max(1.0, t):
            raise ConstructionError(f"uniform cut {cut} below c+t at t={t}")
        if w_unif > 0.0 and w_lo < (n - 1) * w_hi - 1e-12:
            raise ConstructionError(f"atom imbalance w_lo < (n-1)w_hi at t={t}")

    def slice_mean(self, t, level=None):
        """Mean of the slice law (must equal c)."""
        c, n = self.c, self.n
        w = self.slice_weights(t, level)
        num = w.w_lo * (c - t) + w.w_hi * (c + (n - 1) * t) + w.w_unif * 0.5 * ((c - t) + w.cut)
        return num / w.rate

    def truncated_mass(self, t, level=None):
        """Mixing-measure mass on (0, t]: closed form F(cut)-F(c-t) - h*(cut-(c-t))."""
        c, n, kern = self.c, self.n, self.kernel
        if level is None:
            level = self.clip_level(t)
        cut = min(c + (n - 1) * t, float(kern.inverse_pdf(level)) if level > 0 else math.inf)
        lo = c - t
        return float(kern.cdf_diff(lo, cut)) - level * (cut - lo)

    # ----- tabulation ---------------------------------------------------

    def _build(self):
        cfg = self.config
        # grow T until the truncated mixing mass is within tail_eps of 1
        t_max = 16.0 * max(1.0, self.n)
        for _ in range(60):
            if 1.0 - self.truncated_mass(t_max) <= cfg.tail_eps:
                break
            t_max *= 2.0
        else:
            raise ConstructionError("could not reach the requested mixing-measure mass")
        knots = list(np.geomspace(cfg.t_min, t_max, cfg.t_grid))
        levels = [self.clip_level(t) for t in knots]
        # the high-atom positive part switches where pdf(c+(n-1)t) crosses the
        # level; pin a knot at each detected crossing so the kink is resolved
        kern, n, c = self.kernel, self.n, self.c
        kink_arg = [float(kern.pdf(c + (n - 1) * t)) - lv for t, lv in zip(knots, levels)]
        inserts = []
        for i in range(len(knots) - 1):
            if kink_arg[i] * kink_arg[i + 1] >= 0.0:
                continue
            # at tiny t both quantities agree to second order and the sign is
            # numerical noise; only resolve crossings that are clearly real
            noise_floor = 1e-10 * max(levels[i], levels[i + 1], 1e-30)
            if min(abs(kink_arg[i]), abs(kink_arg[i + 1])) < noise_floor:
                continue
            t_star = brentq(
                lambda t: float(kern.pdf(c + (n - 1) * t)) - self.clip_level(t),
                knots[i],
                knots[i + 1],
                xtol=1e-14,
                rtol=8.9e-16,
            )
            inserts.append(t_star)
        for t_star in inserts:
            lv = self.clip_level(t_star)
            idx = int(np.searchsorted(knots, t_star))
            if 0 < idx < len(knots):
                rel = min(abs(t_star - knots[idx - 1]), abs(knots[idx] - t_star))
                if rel > 1e-12 * t_star:
                    knots.insert(idx, t_star)
                    levels.insert(idx, lv)
        self.knots = np.array(knots)
        self.levels = np.array(levels)
        self._level_interp = PchipInterpolator(np.log(self.knots), self.levels)

        w = self.weights_at(self.knots, self.levels)
        self.rates = w["rate"]
        # the cumulative mixing mass has a closed form (the truncated
        # reassembly mass), so the cdf is tabulated exactly at the knots;
        # the trapezoid of the rates is kept as an independent cross-check
        cdf = np.array(
            [self.truncated_mass(t, lv) for t, lv in zip(self.knots, self.levels)]
        )
        self.raw_mass = float(cdf[-1])
        self.mass_deficit = 1.0 - self.raw_mass
        if not -1e-9 <= self.mass_deficit <= cfg.tail_eps + 1e-6:
            raise ConstructionError(
                f"mixing measure mass {self.raw_mass} deviates from 1 beyond calibration"
            )
        increments = 0.5 * (self.rates[1:] + self.rates[:-1]) * np.diff(self.knots)
        trap_mass = cdf[0] + float(np.sum(increments))
        if abs(trap_mass - self.raw_mass) > cfg.tail_eps + 1e-3:
            raise ConstructionError(
                f"rate trapezoid mass {trap_mass} disagrees with the closed form "
                f"{self.raw_mass} beyond calibration"
            )
        self.mixing_cdf = cdf / self.raw_mass

    def level_at(self, t):
        """Tabulated clip level (monotone cubic through the solved knots)."""
        t_arr = np.clip(np.asarray(t, dtype=float), self.knots[0], self.knots[-1])
        out = np.clip(self._level_interp(np.log(t_arr)), 0.0, None)
        return float(out) if out.ndim == 0 else out

    def weights_at(self, t, level=None):
        """Vectorized slice weights at arbitrary t (tabulated level)."""
        n, c, kern = self.n, self.c, self.kernel
        t = np.asarray(t, dtype=float)
        level = self.level_at(t) if level is None else np.asarray(level, dtype=float)
        lo = c - t
        hi = c + (n - 1) * t
        w_lo = kern.pdf(lo) - level
        w_hi = (n - 1) * np.maximum(kern.pdf(hi) - level, 0.0)
        cut = np.minimum(hi, kern.inverse_pdf(level))
        d_y = -0.5 * (cut - lo) * (cut + lo - 2.0 * c)
        d_t = t * ((n - 1) ** 2 * np.maximum(kern.pdf(hi) - level, 0.0) - np.maximum(w_lo, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(d_y != 0.0, -d_t / d_y, 0.0)
        w_unif = np.maximum(-slope * (cut - lo), 0.0)
        rate = w_lo + w_hi + w_unif
        return {"w_lo": w_lo, "w_hi": w_hi, "cut": cut, "w_unif": w_unif, "rate": rate,
                "lo": lo, "hi": hi, "level": level}

    def slice_cdf_below(self, t, y):
        """Slice-law mass below y, vectorized over t (for reconstruction checks)."""
        w = self.weights_at(t)
        unif = np.clip((y - w["lo"]) / np.maximum(w["cut"] - w["lo"], 1e-300), 0.0, 1.0)
        mass = (
            w["w_lo"] * (w["lo"] < y)
            + w["w_hi"] * (w["hi"] < y)
            + w["w_unif"] * unif
        )
        return mass / w["rate"]

    def truncated_mass_below(self, t, y):
        """Closed-form mass below y of the t-truncated reassembly."""
        c, n, kern = self.c, self.n, self.kernel
        level = float(self.level_at(t))
        cut = min(c + (n - 1) * t, float(kern.inverse_pdf(level)) if level > 0 else math.inf)
        lo = c - t
        ym = min(y, cut)
        if ym <= lo:
            return 0.0
        return float(kern.cdf_diff(lo, ym)) - level * (ym - lo)

    # ----- sampling -----------------------------------------------------

    def cell_coupling(self, idx) -> _CellCoupling:
        cell = self._cells.get(idx)
        if cell is not None:
            return cell
        cfg = self.config
        n, c = self.n, self.c
        t_hat = math.sqrt(self.knots[idx] * self.knots[min(idx + 1, len(self.knots) - 1)])
        level = self.clip_level(t_hat)
        w = self.slice_weights(t_hat, level)
        lo = c - t_hat
        width = w.cut - lo
        denom = w.w_lo - (n - 1) * w.w_hi + w.w_unif
        if denom <= 0.0 or w.w_unif <= 0.0:
            raise ConstructionError(f"degenerate atom-plus-uniform slice at t={t_hat}")
        atom_weight = min(max((w.w_lo - (n - 1) * w.w_hi) / denom, 0.0), 1.0)
        if atom_weight > 1.0 - 2.0 / n + 1e-9:
            raise ConstructionError(
                f"atom weight {atom_weight} violates the mean inequality margin at t={t_hat}"
            )
        # mean-inequality precondition: n * t >= width (cut <= c+(n-1)t)
        if n * t_hat < width - 1e-9 * max(1.0, width):
            raise ConstructionError(f"slice width {width} exceeds n*t at t={t_hat}")
        model = AtomUniform(lo, w.cut, atom_weight)
        column = discretize(model, cfg.ra_grid_m)
        mat = np.column_stack([column] * n)
        rng = substream(cfg.seed, "coupling", str(idx))
        flat = ra_flatten(mat, max_sweeps=64, rng=rng)
        corrected = flat.matrix.copy()
        sums = corrected.sum(axis=1)
        target = n * c
        for r in range(corrected.shape[0]):
            dev = sums[r] - target
            shifted = corrected[r] - dev
            # fold the residual into the coordinate with the most room; the
            # shifted value must stay inside the slice support [lo, cut]
            margin = np.minimum(shifted - lo, w.cut - shifted)
            j = int(np.argmax(margin))
            if margin[j] < 0.0:
                raise ConstructionError(
                    f"coupling residual {dev} cannot be folded into any coordinate at t={t_hat}"
                )
            corrected[r, j] = shifted[j]
        bound = n * width / cfg.ra_grid_m
        cell = _CellCoupling(
            t_hat=t_hat,
            lo=lo,
            cut=w.cut,
            atom_weight=atom_weight,
            raw_matrix=flat.matrix,
            corrected_matrix=corrected,
            bound=bound,
            ra_spread=flat.spread,
        )
        self._cells[idx] = cell
        return cell

    def sample_slice_mix(self, t, rng):
        """One n-tuple from the slice coupling at ``t`` (sum n*c)."""
        batch = self._sample_at(np.array([t]), rng)
        return batch.values[0]

    def _sample_at(self, ts, rng) -> SampleBatch:
        n, c = self.n, self.c
        count = len(ts)
        w = self.weights_at(ts)
        with np.errstate(divide="ignore", invalid="ignore"):
            p_cyclic = np.clip(n * w["w_hi"] / np.maximum(w["rate"], 1e-300), 0.0, 1.0)
        is_cyclic = rng.random(count) < p_cyclic
        hot = rng.integers(0, n, size=count)
        row_idx = rng.integers(0, self.config.ra_grid_m, size=count)

        values = np.empty((count, n))
        out_t = np.array(ts, dtype=float)
        branch = np.where(is_cyclic, 1, 2).astype(np.int8)
        bound = np.empty(count)

        # cyclic branch: exact at the drawn t
        idx1 = np.nonzero(is_cyclic)[0]
        if idx1.size:
            t1 = ts[idx1]
            values[idx1] = (c - t1)[:, None]
            values[idx1, hot[idx1]] = c + (n - 1) * t1
            bound[idx1] = 64.0 * _EPS * n * np.maximum(1.0, np.abs(c) + (n - 1) * t1)

        # coupling branch: snap to the cell representative
        idx2 = np.nonzero(~is_cyclic)[0]
        if idx2.size:
            cells = np.clip(
                np.searchsorted(self.knots, ts[idx2], side="right") - 1,
                0,
                len(self.knots) - 2,
            )
            for cell_id in np.unique(cells):
                cell = self.cell_coupling(int(cell_id))
                sel = idx2[cells == cell_id]
                values[sel] = cell.corrected_matrix[row_idx[sel]]
                out_t[sel] = cell.t_hat
                bound[sel] = cell.bound
            values[idx2] = _permute_rows(values[idx2], rng)

        return SampleBatch(
            values=values,
            t=out_t,
            branch=branch,
            row_bound=bound,
            target_sum=n * c,
        )

    def sample(self, count, rng) -> SampleBatch:
        """``count`` rows with standard-Cauchy coordinates summing to n*c."""
        u = rng.random(count)
        ts = np.interp(u, self.mixing_cdf, self.knots)
        return self._sample_at(ts, rng)

    def row_bound_for(self, t, branch):
        """Recompute the per-row sum bound from the recorded (t, branch)."""
        t = np.asarray(t, dtype=float)
        branch = np.asarray(branch)
        n, c = self.n, self.c
        cyclic = 64.0 * _EPS * n * np.maximum(1.0, abs(c) + (n - 1) * t)
        w = self.weights_at(t)
        width = w["cut"] - w["lo"]
        coupling = n * width / self.config.ra_grid_m
        return np.where(branch == 1, cyclic, coupling)

    def metadata(self):
        cfg = self.config
        return {
            "n": cfg.n,
            "c": self.c,
            "tail_eps": cfg.tail_eps,
            "ra_grid_m": cfg.ra_grid_m,
            "seed": cfg.seed,
            "mass_deficit": self.mass_deficit,
        }


class ReflectedMixer:
    """Sampler for c < 0: negation of the mixer for -c, row by row."""

    kind = "reflected"

    def __init__(self, base):
        self.base = base
        self.config = base.config
        self.n = base.n
        self.c = -base.c
        self.mass_deficit = base.mass_deficit

    def sample(self, count, rng) -> SampleBatch:
        batch = self.base.sample(count, rng)
        return SampleBatch(
            values=-batch.values,
            t=batch.t,
            branch=batch.branch,
            row_bound=batch.row_bound,
            target_sum=-batch.target_sum,
        )

    def row_bound_for(self, t, branch):
        return self.base.row_bound_for(t, branch)

    def metadata(self):
        meta = dict(self.base.metadata())
        meta["c"] = self.c
        return meta


def build_mixer(config: MixerConfig, kernel=None):
    """Dispatch on the sign of c; rejects centers outside the exact interval."""
    kernel = kernel or CauchyKernel()
    n, c = config.n, config.c
    if n < 2:
        raise DomainError("need n >= 2")
    limit = kernel.center_limit(n)
    if abs(c) > limit + 1e-12:
        raise DomainError(
            f"center {c} outside the admissible interval [-{limit:.10g}, {limit:.10g}] for n={n}"
        )
    if c == 0.0:
        return SymmetricMixer(config, kernel)
    if c > 0.0:
        return ConstructiveMixer(config, kernel)
    return ReflectedMixer(build_mixer(dataclasses.replace(config, c=-c), kernel))


class ConvexCombinationSampler:
    """Coordinatewise convex combination of two constant-sum samplers.

    For standard Cauchy marginals the combination alpha*X + (1-alpha)*Y of
    independent mixes is again standard Cauchy in every coordinate (strict
    stability), and the center interpolates linearly. This realizes every
    center between the two input centers.
    """

    def __init__(self, mixer_a, mixer_b, alpha: float):
        if not 0.0 <= alpha <= 1.0:
            raise DomainError("alpha must lie in [0, 1]")
        if mixer_a.n != mixer_b.n:
            raise DomainError("mixers must share n")
        self.mixer_a = mixer_a
        self.mixer_b = mixer_b
        self.alpha = float(alpha)
        self.n = mixer_a.n
        self.c = alpha * mixer_a.c + (1.0 - alpha) * mixer_b.c

    def sample(self, count, rng) -> SampleBatch:
        a = self.mixer_a.sample(count, rng)
        b = self.mixer_b.sample(count, rng)
        al = self.alpha
        return SampleBatch(
            values=al * a.values + (1.0 - al) * b.values,
            t=np.full(count, np.nan),
            branch=np.full(count, 3, dtype=np.int8),
            row_bound=al * a.row_bound + (1.0 - al) * b.row_bound,
            target_sum=al * a.target_sum + (1.0 - al) * b.target_sum,
        )


@dataclass(frozen=True)
class AdmissibilityResult:
    ok: bool
    q_max: float
    witness: float | None = None


def generic_admissibility(density: GenericDensity, n: int,
                          grid_points: int = 801) -> AdmissibilityResult:
    """Check whether a symmetric unimodal density supports the slice pipeline.

    Requires sqrt(1/g) convex (verified by second differences on a grid,
    tolerance 1e-9) and returns the largest admissible per-variable center,
    the liminf of integral_t^{(n-1)t} x g(x) dx along a geometric t-sequence.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    half = density.grid_halfwidth
    xs = np.linspace(-half, half, grid_points)
    g = np.maximum(density.pdf(xs), 1e-300)
    s = np.sqrt(1.0 / g)
    second = s[:-2] - 2.0 * s[1:-1] + s[2:]
    bad = np.nonzero(second < -1e-9)[0]
    if bad.size:
        return AdmissibilityResult(ok=False, q_max=0.0, witness=float(xs[bad[0] + 1]))
    vals = []
    for k in range(0, 36):
        t = 2.0 ** k
        v, _ = quad(lambda x: x * density.pdf(x), t, (n - 1) * t, limit=200)
        vals.append(v)
    q_max = max(0.0, float(min(vals[-10:])))
    return AdmissibilityResult(ok=True, q_max=q_max, witness=None)


def build_mixer_for_density(density: GenericDensity, n: int, c: float,
                            t_grid: int = 256, tail_eps: float = 1e-3,
                            ra_grid_m: int = 128, seed: int = 0):
    """Run the slice pipeline with a generic admissible density as kernel."""
    adm = generic_admissibility(density, n)
    if not adm.ok:
        raise DomainError(
            f"density fails the sqrt(1/g) convexity requirement near x={adm.witness}"
        )
    if abs(c) > adm.q_max + 1e-9:
        raise DomainError(f"center {c} outside the admissible bound {adm.q_max:.6g}")
    kernel = DensityKernel(density, adm.q_max)
    cfg = MixerConfig(n=n, c=c, t_grid=t_grid, tail_eps=tail_eps,
                      ra_grid_m=ra_grid_m, seed=seed)
    return build_mixer(cfg, kernel)
