"""Exact discrete constructions and a transportation feasibility oracle.

Feasibility of a prescribed sum value C for finitely supported marginals
is a transportation problem restricted to the slice of support tuples
whose coordinates add to C. It is decided by a dense phase-1 simplex with
Bland's rule (instances are tiny; determinism and certificates matter more
than speed), with an exact-rational mode for small instances. Feasible
instances return the coupling found; infeasible ones a separating dual
vector (Farkas certificate).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .center_bounds import JmBoundsInput, jm_center_bounds
from .distributions import FiniteDiscrete, PowerTwoGeometric
from .errors import DomainError, SizeError

VARIABLE_GUARD = 1_000_000
EXACT_VARIABLE_GUARD = 10_000


@dataclass
class Coupling:
    """Finite joint law as support tuples plus weights.

    ``total_mass`` below 1 encodes a truncated view of a countable law;
    the deficit is then carried in ``residual``. Weights may be floats or
    Fractions (exact constructions keep Fractions).
    """

    n: int
    support: list
    weights: list
    total_mass: object = 1
    residual: object = 0

    def row_sums(self):
        return [math.fsum(row) if not _is_exact(row) else sum(row) for row in self.support]

    def marginal(self, i) -> dict:
        out = {}
        for row, wgt in zip(self.support, self.weights):
            out[row[i]] = out.get(row[i], 0 * wgt) + wgt
        return out

    def validate(self, marginals=None, center=None, tol=1e-9,
                 weight_tol=1e-12, marginal_tol=1e-10):
        """Raise DomainError on any violated coupling invariant."""
        if any(w < 0 for w in self.weights):
            raise DomainError("coupling weights must be nonnegative")
        total = sum(self.weights) if _is_exact(self.weights) else math.fsum(self.weights)
        if abs(total - self.total_mass) > weight_tol:
            raise DomainError(f"weights sum to {total}, expected {self.total_mass}")
        if center is not None:
            for s in self.row_sums():
                if abs(s - center) > tol:
                    raise DomainError(f"support row sums to {s}, expected {center}")
        if marginals is not None:
            for i, m in enumerate(marginals):
                proj = self.marginal(i)
                declared = dict(zip(m.values, m.probs))
                keys = set(proj) | set(declared)
                for v in keys:
                    if abs(float(proj.get(v, 0)) - float(declared.get(v, 0))) > marginal_tol:
                        raise DomainError(
                            f"marginal {i} mismatch at atom {v}: "
                            f"{proj.get(v, 0)} vs {declared.get(v, 0)}"
                        )

    def permuted(self, order) -> "Coupling":
        support = [tuple(row[j] for j in order) for row in self.support]
        return Coupling(self.n, support, list(self.weights), self.total_mass, self.residual)

    def symmetrized(self) -> "Coupling":
        """Average over all n! coordinate permutations (exact exchangeable
        version); duplicate rows are merged. Guarded at n <= 8."""
        if self.n > 8:
            raise SizeError("exact symmetrization is guarded at n <= 8")
        perms = list(itertools.permutations(range(self.n)))
        exact = _is_exact(self.weights)
        fac = Fraction(1, len(perms)) if exact else 1.0 / len(perms)
        merged = {}
        for row, wgt in zip(self.support, self.weights):
            for order in perms:
                key = tuple(row[j] for j in order)
                merged[key] = merged.get(key, 0 * wgt) + wgt * fac
        support = sorted(merged)
        return Coupling(
            self.n, list(support), [merged[k] for k in support],
            self.total_mass, self.residual,
        )

    def to_json_dict(self):
        return {
            "n": self.n,
            "support": [[float(v) for v in row] for row in self.support],
            "weights": [float(w) for w in self.weights],
            "total_mass": float(self.total_mass),
            "residual": float(self.residual),
        }


def _is_exact(seq):
    return any(isinstance(v, Fraction) for v in seq)


def exchangeable_permute(coupling: Coupling, rng=None) -> Coupling:
    """Exchangeable version of a coupling.

    Without an rng this is the exact symmetrization (all marginals become
    the average marginal); with an rng, one uniformly drawn coordinate
    permutation is applied. Row sums are invariant either way.
    """
    if rng is None:
        return coupling.symmetrized()
    order = list(rng.permutation(coupling.n))
    return coupling.permuted(order)


# ----------------------------------------------------------------------
# phase-1 simplex with Bland's rule

def _phase1_float(A: np.ndarray, b: np.ndarray, tol: float):
    """Minimize the total artificial mass for Ax = b, x >= 0.

    Returns (objective, x, y) where y is the dual vector read off the
    artificial columns (Farkas certificate when the objective is > 0).
    """
    m, k = A.shape
    T = np.zeros((m + 1, k + m + 1))
    T[:m, :k] = A
    T[:m, k:k + m] = np.eye(m)
    T[:m, -1] = b
    # objective row holds z_j - c_j for the max(-sum a) formulation
    T[m, :k] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(k, k + m))
    piv_tol = 1e-11
    for _ in range(20000):
        enter = -1
        for j in range(k + m):
            if T[m, j] < -tol:
                enter = j
                break  # Bland: first improving column
        if enter < 0:
            break
        col = T[:m, enter]
        best = np.inf
        leave = -1
        for i in range(m):
            if col[i] <= piv_tol:
                continue
            ratio = T[i, -1] / col[i]
            if leave < 0 or ratio < best - 1e-15 or (
                abs(ratio - best) <= 1e-15 and basis[i] < basis[leave]
            ):
                best = ratio
                leave = i
        if leave < 0:
            raise DomainError("phase-1 problem is unbounded; inputs are inconsistent")
        T[leave, :] /= T[leave, enter]
        for i in range(m + 1):
            if i != leave and T[i, enter] != 0.0:
                T[i, :] -= T[i, enter] * T[leave, :]
        basis[leave] = enter
    else:
        raise DomainError("simplex iteration guard exceeded")
    objective = -T[m, -1]
    x = np.zeros(k)
    for i, var in enumerate(basis):
        if var < k:
            x[var] = T[i, -1]
    # reduced cost of artificial j is y_j + 1 in this formulation
    y = T[m, k:k + m] - 1.0
    return objective, x, -y


def _phase1_exact(A_rows, b, tol: Fraction):
    """Exact-rational variant of the phase-1 simplex (lists of Fractions)."""
    m = len(A_rows)
    k = len(A_rows[0]) if m else 0
    zero, one = Fraction(0), Fraction(1)
    T = [list(row) + [zero] * m + [bi] for row, bi in zip(A_rows, b)]
    for i in range(m):
        T[i][k + i] = one
    obj = [-sum(T[i][j] for i in range(m)) for j in range(k + m + 1)]
    for j in range(m):
        obj[k + j] = zero  # artificials start basic with zero reduced cost
    basis = list(range(k, k + m))
    for _ in range(50000):
        enter = -1
        for j in range(k + m):
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        best, leave = None, -1
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            raise DomainError("phase-1 problem is unbounded; inputs are inconsistent")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b2 for a, b2 in zip(T[i], T[leave])]
        f = obj[enter]
        if f != 0:
            obj = [a - f * b2 for a, b2 in zip(obj, T[leave])]
        basis[leave] = enter
    else:
        raise DomainError("simplex iteration guard exceeded")
    objective = -obj[-1]
    x = [zero] * k
    for i, var in enumerate(basis):
        if var < k:
            x[var] = T[i][-1]
    y = [-(obj[k + j] - one) for j in range(m)]
    return objective, x, y


@dataclass
class FeasibilityResult:
    verdict: str                      # "feasible" | "infeasible" | "borderline"
    center: float
    coupling: Coupling | None = None
    dual: list | None = None          # Farkas certificate when infeasible
    residual: float = 0.0             # phase-1 objective (unmatched mass)
    candidates: int = 0               # admissible support tuples

    @property
    def feasible(self):
        return self.verdict == "feasible"


def _slice_tuples(marginals, center, tol):
    """Support tuples whose coordinate sums land within tol of center."""
    values = [list(m.values) for m in marginals]
    tuples = [((), 0.0)]
    for i, vals in enumerate(values):
        rest_min = sum(min(v) for v in values[i + 1:])
        rest_max = sum(max(v) for v in values[i + 1:])
        nxt = []
        for prefix, acc in tuples:
            for v in vals:
                s = acc + v
                if s + rest_min <= center + tol and s + rest_max >= center - tol:
                    nxt.append((prefix + (v,), s))
            if len(nxt) > VARIABLE_GUARD:
                raise SizeError(
                    f"slice enumeration exceeds the {VARIABLE_GUARD} variable guard"
                )
        tuples = nxt
    return [prefix for prefix, acc in tuples if abs(acc - center) <= tol]


def feasible_center(marginals, center: float, tol: float = 1e-9,
                    exact: bool = False) -> FeasibilityResult:
    """Decide whether the marginals admit a joint law with sum == center.

    Builds variables only on support tuples whose coordinate sum matches
    ``center`` within ``tol`` and solves the transportation feasibility
    problem. Feasible instances return a certificate coupling (marginal
    residuals <= tol); infeasible ones the phase-1 dual. A phase-1 residual
    inside (tol, 10 tol] yields the "borderline" verdict.
    """
    marginals = list(marginals)
    if any(not isinstance(m, FiniteDiscrete) for m in marginals):
        raise DomainError("the feasibility oracle needs FiniteDiscrete marginals")
    n = len(marginals)
    if n < 2:
        raise DomainError("need at least two marginals")
    tuples = _slice_tuples(marginals, center, tol)
    rows = []
    b = []
    index = {}
    for i, m in enumerate(marginals):
        for v, p in zip(m.values, m.probs):
            index[(i, float(v))] = len(rows)
            rows.append((i, float(v)))
            b.append(float(p))
    if not tuples:
        return FeasibilityResult(
            verdict="infeasible", center=center, dual=None,
            residual=float(sum(b)) / n, candidates=0,
        )
    if exact:
        if len(tuples) > EXACT_VARIABLE_GUARD:
            raise SizeError(
                f"exact mode is guarded at {EXACT_VARIABLE_GUARD} variables"
            )
        A_rows = [[Fraction(0)] * len(tuples) for _ in rows]
        for jcol, tup in enumerate(tuples):
            for i, v in enumerate(tup):
                A_rows[index[(i, float(v))]][jcol] += 1
        # recover the intended rational probabilities from their float form
        b_exact = [Fraction(x).limit_denominator(10 ** 12) for x in b]
        start = 0
        for m in marginals:
            share = sum(b_exact[start:start + len(m.values)])
            if share != 1:
                raise DomainError(
                    "exact mode needs probabilities that reconstruct to "
                    f"rationals summing to 1 (marginal total {share})"
                )
            start += len(m.values)
        objective, x, y = _phase1_exact(A_rows, b_exact, Fraction(0))
        resid = float(objective)
        feasible = objective == 0
        borderline = False
    else:
        A = np.zeros((len(rows), len(tuples)))
        for jcol, tup in enumerate(tuples):
            for i, v in enumerate(tup):
                A[index[(i, float(v))], jcol] += 1.0
        objective, x, y = _phase1_float(A, np.array(b), tol=1e-13)
        resid = float(objective)
        feasible = resid <= tol
        borderline = tol < resid <= 10 * tol
    if feasible:
        support, weights = [], []
        for tup, w in zip(tuples, x):
            if (w > 0) if exact else (w > 1e-14):
                support.append(tup)
                weights.append(w)
        total = sum(weights) if exact else math.fsum(weights)
        coupling = Coupling(n, support, weights, total_mass=1 if exact else 1.0)
        if not exact:
            # clean float residue so the invariant checker sees mass 1
            coupling.weights = [w / total for w in weights]
        coupling.validate(marginals=marginals, center=center, tol=tol,
                          marginal_tol=max(1e-10, 10 * tol))
        return FeasibilityResult(
            verdict="feasible", center=center, coupling=coupling,
            residual=resid, candidates=len(tuples),
        )
    verdict = "borderline" if borderline else "infeasible"
    return FeasibilityResult(
        verdict=verdict, center=center,
        dual=[float(v) for v in y], residual=resid, candidates=len(tuples),
    )


@dataclass
class CenterSet:
    """All certified centers of a finite-marginal tuple."""

    centers: list
    candidates_examined: int
    certificates: dict = field(default_factory=dict)


def enumerate_centers(marginals, tol: float = 1e-9,
                      prefilter_beta: float = 1e-9) -> CenterSet:
    """Certified-feasible candidate sums of finitely supported marginals.

    Candidates are the distinct values of the support sumset, pre-filtered
    by the window center bounds (with vanishing levels the window bounds
    collapse toward the forced center, the sum of the means) and decided
    by the feasibility oracle.
    """
    marginals = list(marginals)
    sums = {0.0}
    for m in marginals:
        sums = {round(s + float(v), 12) for s in sums for v in m.values}
        if len(sums) > VARIABLE_GUARD:
            raise SizeError("candidate sumset exceeds the variable guard")
    betas = (prefilter_beta,) * len(marginals)
    lo, hi = jm_center_bounds(JmBoundsInput(tuple(marginals), betas))
    pad = max(1e-7, 10 * tol)
    candidates = sorted(s for s in sums if lo - pad <= s <= hi + pad)
    centers, certs = [], {}
    for cand in candidates:
        res = feasible_center(marginals, cand, tol=tol)
        if res.feasible:
            centers.append(cand)
            certs[cand] = res.coupling
    return CenterSet(centers=centers, candidates_examined=len(candidates),
                     certificates=certs)


# ----------------------------------------------------------------------
# explicit couplings with two distinct centers

def zero_one_couplings(truncation: int = 20):
    """Two exact couplings with equal marginals and different constant sums.

    Over a truncated geometric index Z <= truncation (residual mass
    2^-(truncation+1), reported on the couplings), the first coupling has
    rows (2^Z, 2^Z, -2^(Z+1)) summing to 0; the second uses an independent
    fair bit to split the doubled value across the first two coordinates,
    rows (B*2^(Z+1) + (1-B), (1-B)*2^(Z+1) + B, -2^(Z+1)) summing to 1.
    Third marginals agree exactly, and the first/second marginals agree
    atom-by-atom on {2, 4, ..., 2^truncation}; mass 1/2 sits on the atom 1
    for the untruncated laws (the truncated second coupling holds
    1/2 - 2^-(truncation+2) of it, the rest rides the residual).
    """
    if truncation < 1:
        raise DomainError("truncation must be >= 1")
    K = truncation
    residual = Fraction(1, 2 ** (K + 1))
    support_x, weights_x = [], []
    for k in range(K + 1):
        support_x.append((2 ** k, 2 ** k, -(2 ** (k + 1))))
        weights_x.append(Fraction(1, 2 ** (k + 1)))
    mix_x = Coupling(3, support_x, weights_x,
                     total_mass=1 - residual, residual=residual)
    support_y, weights_y = [], []
    for k in range(K + 1):
        for bit in (0, 1):
            support_y.append((
                bit * 2 ** (k + 1) + (1 - bit),
                (1 - bit) * 2 ** (k + 1) + bit,
                -(2 ** (k + 1)),
            ))
            weights_y.append(Fraction(1, 2 ** (k + 2)))
    mix_y = Coupling(3, support_y, weights_y,
                     total_mass=1 - residual, residual=residual)
    return mix_x, mix_y


def center_two_excluded(truncation: int = 40) -> bool:
    """Check the argument ruling out the candidate sum 2 for the mixture
    law (2 nu + gamma)/3 built from the zero/one couplings.

    No two support values can add to 1: every support value other than 1
    is even, so a pair summing to the odd value 1 would need the atom 1
    plus the value 0, which is not in the support (verified by enumeration
    on the truncated atoms and by parity for the tails). Together with
    P(X1 = 1) < 1 this caps the probability of the sum 2 below 1.
    """
    nu = PowerTwoGeometric("positive", truncation)
    gamma = PowerTwoGeometric("negative", truncation)
    atoms = [v for v, _ in nu.pmf_fractions()] + [v for v, _ in gamma.pmf_fractions()]
    if 0 in atoms:
        return False
    support = set(atoms)
    for a in support:
        if (1 - a) in support:
            return False
    if any(a != 1 and a % 2 != 0 for a in support):
        return False  # parity argument needs all non-1 atoms even
    p_one = Fraction(1, 2) * Fraction(2, 3)  # mixture weight 2/3 on nu
    return p_one > 0
