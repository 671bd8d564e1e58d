"""Necessary conditions and exact intervals for centers of mixes.

A center is the constant value of the coordinate sum of a joint mix. For
marginals with finite means the center is forced (sum of the means); for
heavy-tailed marginals the admissible centers form a compact set, bounded
by window averages of the quantile functions. For the standard Cauchy the
per-variable center set is known exactly: [-log(n-1)/pi, +log(n-1)/pi].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .distributions import avg_quantile
from .errors import DomainError

PI = math.pi


@dataclass(frozen=True)
class CenterInterval:
    """Closed interval [lo, hi] of admissible per-variable centers."""

    lo: float
    hi: float
    kind: str  # "exact_formula" | "numeric_necessary_bound"
    n: int

    def __contains__(self, c):
        return self.lo <= c <= self.hi


def cauchy_center_interval(n: int) -> CenterInterval:
    """Exact per-variable center interval of the standard Cauchy law.

    The sum of n standard Cauchy variables can be made constant exactly
    when the constant C satisfies |C| <= n*log(n-1)/pi; per variable that
    is log(n-1)/pi.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    hi = math.log(n - 1) / PI
    return CenterInterval(lo=-hi, hi=hi, kind="exact_formula", n=n)


def cauchy_avg_quantile_upper(n: int, alpha: float) -> float:
    """Closed form for the Cauchy average quantile over [(n-1)a, 1-a].

    Equals log(sin(pi*(n-1)*a) / sin(pi*a)) / (pi*(1 - n*a)); the 0/0 form
    at a = 1/n is evaluated by series (limit cot(pi/n)). This is the upper
    window whose infimum over a in (0, 1/n) bounds admissible centers from
    above; its a->0 limit is log(n-1)/pi.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if not 0.0 < alpha < 1.0 / n:
        raise DomainError("need 0 < alpha < 1/n")
    d = 1.0 - n * alpha
    if d < 1e-6:
        # 0/0 form; third-order expansion of log sin around pi/n keeps the
        # error below ~1e-12 at the branch point (the direct quotient loses
        # accuracy already for d below ~1e-6)
        u = PI / n
        cot = 1.0 / math.tan(u)
        csc2 = 1.0 / math.sin(u) ** 2
        t2 = -d * u * u * ((n - 1) ** 2 - 1) * csc2 / (2.0 * PI)
        t3 = d * d * u ** 3 * ((n - 1) ** 3 + 1) * csc2 * cot / (3.0 * PI)
        return cot + t2 + t3
    return math.log(math.sin(PI * (n - 1) * alpha) / math.sin(PI * alpha)) / (PI * d)


@dataclass(frozen=True)
class JmBoundsInput:
    """Marginals plus the window levels beta_i (sum must stay below 1)."""

    marginals: tuple
    betas: tuple

    def __post_init__(self):
        if len(self.marginals) < 2:
            raise DomainError("need at least two marginals")
        if len(self.marginals) != len(self.betas):
            raise DomainError("need one beta per marginal")
        if any(not 0.0 < b < 1.0 for b in self.betas):
            raise DomainError("each beta must lie in (0, 1)")
        if sum(self.betas) >= 1.0:
            raise DomainError("sum of betas must stay below 1")


def jm_center_bounds(inp: JmBoundsInput) -> tuple:
    """Necessary window bounds for the center of a joint mix.

    lower = sum_i R[b_i, 1-b+b_i](mu_i), upper = sum_i R[b-b_i, 1-b_i](mu_i),
    where b is the total of the betas. Any center C satisfies
    lower <= C <= upper.
    """
    beta = sum(inp.betas)
    lower = sum(
        avg_quantile(m, b_i, 1.0 - beta + b_i)
        for m, b_i in zip(inp.marginals, inp.betas)
    )
    upper = sum(
        avg_quantile(m, beta - b_i, 1.0 - b_i)
        for m, b_i in zip(inp.marginals, inp.betas)
    )
    return lower, upper


@dataclass(frozen=True)
class CmBounds:
    """Numeric necessary bounds a* <= c <= b* for per-variable centers."""

    a_star: float
    b_star: float
    alpha_at_a: float
    alpha_at_b: float
    grid_size: int

    def __iter__(self):
        return iter((self.a_star, self.b_star))


def cm_bounds(model, n: int, grid_size: int = 64, alpha_min: float = 1e-6) -> CmBounds:
    """Necessary center bounds for an n-fold complete mix of ``model``.

    a* is the supremum over a in (0, 1/n) of the average quantile on
    [a, 1-(n-1)a]; b* the infimum of the average on [(n-1)a, 1-a]. Both
    are computed on a log-spaced alpha grid with golden-section refinement
    around the best grid point, so the returned values bracket the true
    optimum to grid accuracy. Models declaring an infinite mean short to
    the corresponding +-inf sentinel (the diverging side).
    """
    if n < 2:
        raise DomainError("need n >= 2")
    hi_alpha = 1.0 / n - min(1e-6, 0.1 / n)
    alphas = np.geomspace(alpha_min, hi_alpha, grid_size)

    def upper_window(a):
        return avg_quantile(model, (n - 1) * a, 1.0 - a)

    def lower_window(a):
        return avg_quantile(model, a, 1.0 - (n - 1) * a)

    status = getattr(model, "mean_status", "finite")

    def refine(objective, sign):
        vals = np.array([sign * objective(a) for a in alphas])
        i = int(np.argmin(vals))
        lo = alphas[max(i - 1, 0)]
        hi = alphas[min(i + 1, len(alphas) - 1)]
        best_a, best_v = alphas[i], vals[i]
        if hi > lo:
            res = minimize_scalar(
                lambda a: sign * objective(a),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-10},
            )
            if res.fun < best_v:
                best_a, best_v = float(res.x), float(res.fun)
        return sign * best_v, best_a

    if status == "+inf":
        a_star, alpha_a = math.inf, 0.0
    else:
        a_star, alpha_a = refine(lower_window, -1.0)
    if status == "-inf":
        b_star, alpha_b = -math.inf, 0.0
    else:
        b_star, alpha_b = refine(upper_window, +1.0)
    return CmBounds(a_star, b_star, alpha_a, alpha_b, grid_size)


def mean_inequality_holds(alpha: float, x: float, y: float, q: float, n: int,
                          tol: float = 1e-12) -> bool:
    """Check alpha <= 1 - (y - x) / (n * (q - x)) with boundary slack ``tol``.

    This is the necessary (and for monotone densities sufficient) atom-mass
    condition for an atom at x plus a law on [x, y] with mean q to admit an
    n-fold complete mix.
    """
    if not x < y:
        raise DomainError("need x < y")
    if not x < q <= y:
        raise DomainError("need x < q <= y")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError("alpha must lie in [0, 1]")
    if n < 2:
        raise DomainError("need n >= 2")
    return alpha <= 1.0 - (y - x) / (n * (q - x)) + tol


@dataclass(frozen=True)
class DualBoundResult:
    """Grid infimum of the piecewise-linear dual bound.

    ``value`` is an upper estimate of the true infimum (the bound itself is
    an upper bound on the maximal probability of hitting the candidate
    center, so the conclusion "value < 1 excludes the center" is safe);
    ``grid_resolution`` is the local t-spacing at the minimizer.
    """

    value: float
    t_at_min: float
    grid_resolution: float
    grid_size: int


def dual_bound(model, n: int, c: float, grid_size: int = 256) -> DualBoundResult:
    """Upper bound on the probability that an n-mix of ``model`` sums to n*c.

    Evaluates inf over t < c of  integral_t^{nc-(n-1)t} (1-F) dx / (c - t)
    on a grid log-spaced toward c, with local refinement of the best
    bracket. A value below 1 certifies that c is not an n-center.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    try:
        iqr = float(model.quantile(0.75)) - float(model.quantile(0.25))
    except Exception:
        iqr = 1.0
    # degenerate laws have iqr 0; fall back to the scale set by c itself
    span = 50.0 * max(iqr, abs(c) * 0.5, 1e-6)
    gaps = np.geomspace(span, span * 1e-9, grid_size)
    ts = c - gaps

    def ratio(t):
        upper = n * c - (n - 1) * t
        return model.survival_integral(t, upper) / (c - t)

    vals = np.array([ratio(t) for t in ts])
    i = int(np.argmin(vals))
    best_t, best_v = float(ts[i]), float(vals[i])
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, len(ts) - 1)]
    if hi > lo:
        res = minimize_scalar(
            ratio, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
        )
        if res.fun < best_v:
            best_t, best_v = float(res.x), float(res.fun)
    local_gap = float(gaps[max(i - 1, 0)] - gaps[min(i + 1, len(ts) - 1)]) / 2.0
    return DualBoundResult(best_v, best_t, abs(local_gap), grid_size)


def infinite_mean_classifier(marginals) -> str:
    """Decide whether an infinite mean already rules out a joint mix.

    Returns "excluded" when every marginal has a well-defined mean on one
    side (all in {finite, +inf} or all in {finite, -inf}) and at least one
    is infinite; "inconclusive" otherwise. Undefined means (both tails
    heavy, e.g. Cauchy) never exclude, and mixed +inf / -inf tuples can be
    jointly mixable.
    """
    statuses = [getattr(m, "mean_status", "finite") for m in marginals]
    if all(s in ("finite", "+inf") for s in statuses) and "+inf" in statuses:
        return "excluded"
    if all(s in ("finite", "-inf") for s in statuses) and "-inf" in statuses:
        return "excluded"
    return "inconclusive"
