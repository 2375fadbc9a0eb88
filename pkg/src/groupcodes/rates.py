"""Achievable-rate functionals for Abelian group codes.

The two central quantities are a min-max (source side) and a max-min
(channel side) over weight vectors w on the (q, s) slots and subgroup
selectors theta.  Every objective term is a ratio of linear forms in w, so
for a fixed support the optimum is found by bisection on the target rate
with an exact rational feasibility test (vertex enumeration of a small
polytope); the outer optimization enumerates the support patterns that give
every prime of the group at least one slot.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .groups import GroupElement, GroupSpec, ThetaVector
from .measures import (
    ChannelSpec,
    SourceJoint,
    ValidationError,
    coset_mi_channel,
    coset_mi_source,
    validate_distribution,
)

# Information terms at or below this count as exactly zero when applying the
# 0/0 -> 0 term convention; far below any meaningful rate in bits.
INFO_ZERO_TOL = 1e-12
BISECT_TOL = 1e-9
BISECT_MAX_ITER = 200
# Relative slack when collecting the thetas that attain the inner optimum.
CRITICAL_TOL = 1e-7


class SolverError(RuntimeError):
    """The weight optimization could not produce a value."""


def _log_weight(q: int) -> Fraction:
    """log2(q) as an exact rational of its float value (exactly 1 for q=2)."""
    return Fraction(1) if q == 2 else Fraction(math.log2(q))


def _numerator_coeff(spec: GroupSpec, theta: ThetaVector, q: int, s: int) -> int:
    """Coefficient of w_{q,s} in the omega numerator: the clipped depth
    max over levels (p,r) with p=q of (theta_{p,r} - |r-s|^+)^+."""
    best = 0
    for (p, r), t in zip(spec.ring_levels, theta.components):
        if p == q:
            best = max(best, t - max(r - s, 0))
    return max(best, 0)


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative weights over the (q, s) slots of a group, summing to one.

    Values may be fractions.Fraction (exact) or floats.
    """

    spec: GroupSpec
    values: tuple

    def __post_init__(self) -> None:
        slots = self.spec.weight_slots
        if len(self.values) != len(slots):
            raise ValueError(f"expected {len(slots)} weights for slots {slots}")
        if any(v < 0 for v in self.values):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.values) - 1) > 1e-9:
            raise ValueError(f"weights sum to {sum(self.values)}, not 1")

    @classmethod
    def from_mapping(cls, spec: GroupSpec, mapping: Mapping[tuple[int, int], object]):
        return cls(spec, tuple(mapping.get(slot, 0) for slot in spec.weight_slots))

    @property
    def support(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            slot for slot, v in zip(self.spec.weight_slots, self.values) if v > 0
        )

    def as_mapping(self) -> dict[tuple[int, int], object]:
        return dict(zip(self.spec.weight_slots, self.values))

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values)


def induced_theta(
    spec: GroupSpec,
    support: Iterable[tuple[int, int]],
    slot_depths: Mapping[tuple[int, int], int],
) -> ThetaVector:
    """Map per-slot depths on the supported input components to the subgroup
    selector they induce on the group: each level takes the minimum of
    |r - s|^+ + depth over supported slots of its prime, clamped to [0, r]."""
    support = tuple(support)
    slots = set(spec.weight_slots)
    for slot in support:
        if slot not in slots:
            raise ValueError(f"slot {slot} is not a weight slot of this group")
        q, s = slot
        depth = slot_depths[slot]
        if not 0 <= depth <= s:
            raise ValueError(f"depth {depth} for slot {slot} not in [0, {s}]")
    comps = []
    for p, r in spec.ring_levels:
        vals = [
            max(r - s, 0) + slot_depths[(q, s)] for (q, s) in support if q == p
        ]
        if not vals:
            raise ValueError(
                f"support {support} has no slot for prime {p}: "
                "the induced depth is undefined"
            )
        comps.append(min(r, min(vals)))
    return ThetaVector(spec, tuple(comps))


@lru_cache(maxsize=None)
def _theta_set_cached(
    spec: GroupSpec, support: tuple[tuple[int, int], ...]
) -> frozenset[ThetaVector]:
    ranges = [range(s + 1) for (_, s) in support]
    out = set()
    for depths in itertools.product(*ranges):
        out.add(induced_theta(spec, support, dict(zip(support, depths))))
    return frozenset(out)


def enumerate_theta_set(
    spec: GroupSpec, support: Iterable[tuple[int, int]]
) -> frozenset[ThetaVector]:
    """All subgroup selectors reachable from a support pattern.  Depends only
    on the support, never on the weight values."""
    return _theta_set_cached(spec, tuple(sorted(set(support))))


def omega(spec: GroupSpec, weights, theta: ThetaVector):
    """The weighted rate fraction in [0, 1] for a subgroup selector.

    ``weights`` is a WeightVector or a mapping over the (q, s) slots.  With
    Fraction weights the result is exact whenever the group has a single
    prime (log factors cancel); with floats it is a float.
    """
    if isinstance(weights, WeightVector):
        items = list(zip(spec.weight_slots, weights.values))
    else:
        items = [(slot, weights.get(slot, 0)) for slot in spec.weight_slots]
    num = 0
    den = 0
    for (q, s), w in items:
        if w == 0:
            continue
        scale = _log_weight(q) * w
        num = num + _numerator_coeff(spec, theta, q, s) * scale
        den = den + s * scale
    if den == 0:
        raise ValueError("weight vector has empty support")
    return num / den


# -- per-support data ------------------------------------------------------


@dataclass(frozen=True)
class _SupportProblem:
    support: tuple[tuple[int, int], ...]
    thetas: tuple[ThetaVector, ...]  # Theta(support), sorted by components
    d_coeffs: tuple[Fraction, ...]  # s * log2(q) per slot
    n_coeffs: tuple[tuple[Fraction, ...], ...]  # per theta, per slot
    d_floats: tuple[float, ...]
    n_floats: tuple[tuple[float, ...], ...]


@lru_cache(maxsize=None)
def _support_problem(
    spec: GroupSpec, support: tuple[tuple[int, int], ...]
) -> _SupportProblem:
    thetas = tuple(
        sorted(enumerate_theta_set(spec, support), key=lambda t: t.components)
    )
    d_coeffs = tuple(Fraction(s) * _log_weight(q) for q, s in support)
    n_coeffs = tuple(
        tuple(
            Fraction(_numerator_coeff(spec, th, q, s)) * _log_weight(q)
            for q, s in support
        )
        for th in thetas
    )
    return _SupportProblem(
        support,
        thetas,
        d_coeffs,
        n_coeffs,
        tuple(float(c) for c in d_coeffs),
        tuple(tuple(float(c) for c in row) for row in n_coeffs),
    )


def _covering_supports(spec: GroupSpec) -> list[tuple[tuple[int, int], ...]]:
    """All support patterns giving every prime at least one slot, in
    lexicographic order (the deterministic tie-break order)."""
    per_prime = []
    for q in spec.primes:
        slots = [(q, s) for s in range(1, spec.max_exponent(q) + 1)]
        per_prime.append(
            [
                c
                for k in range(1, len(slots) + 1)
                for c in itertools.combinations(slots, k)
            ]
        )
    supports = [
        tuple(sorted(itertools.chain.from_iterable(combo)))
        for combo in itertools.product(*per_prime)
    ]
    return sorted(supports)


def all_reachable_thetas(spec: GroupSpec) -> tuple[ThetaVector, ...]:
    """Union of the theta sets over every valid support pattern."""
    out: set[ThetaVector] = set()
    for support in _covering_supports(spec):
        out |= enumerate_theta_set(spec, support)
    return tuple(sorted(out, key=lambda t: t.components))


# -- exact feasibility -----------------------------------------------------


def _solve_linear(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Solve a small square rational system; None if singular."""
    k = len(rows)
    a = [list(row) + [b] for row, b in zip(rows, rhs)]
    for col in range(k):
        pivot = next((r for r in range(col, k) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(k):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * p for v, p in zip(a[r], a[col])]
    return [a[r][k] for r in range(k)]


def _find_feasible(
    k: int, ineq_rows: list[tuple[Fraction, ...]]
) -> tuple[Fraction, ...] | None:
    """A point of {w in Q^k : sum w = 1, row . w >= 0 for all rows}, or None.

    The polytope is a subset of the simplex, hence bounded: if nonempty it
    has a vertex cut out by the sum constraint plus k-1 of the inequalities,
    so enumerating those (tiny) candidate systems is a complete decision
    procedure.
    """
    one = Fraction(1)
    eq_row = [one] * k
    rhs = [one] + [Fraction(0)] * (k - 1)
    for active in itertools.combinations(range(len(ineq_rows)), k - 1):
        mat = [eq_row] + [list(ineq_rows[i]) for i in active]
        w = _solve_linear(mat, rhs)
        if w is None:
            continue
        if all(
            sum(c * wi for c, wi in zip(row, w)) >= 0 for row in ineq_rows
        ):
            return tuple(w)
    return None


# -- inner evaluation ------------------------------------------------------


def _term_ratio(sense: str, c: float, den_fraction: float) -> float:
    """Objective term c / omega-part with the 0/0 -> 0 convention.

    ``den_fraction`` is omega (source) or 1 - omega (channel).
    """
    if den_fraction <= 0:
        return 0.0 if c <= INFO_ZERO_TOL else math.inf
    return c / den_fraction


def _evaluate_point(
    prob: _SupportProblem,
    terms: Mapping[ThetaVector, float],
    w: Sequence,
    sense: str,
) -> tuple[float, dict[ThetaVector, float]]:
    """Inner max (source) or min (channel) at a weight point, plus the
    per-theta ratios, skipping the excluded endpoint selector."""
    wf = [float(v) for v in w]
    d_val = sum(c * v for c, v in zip(prob.d_floats, wf))
    ratios: dict[ThetaVector, float] = {}
    candidates: list[float] = []
    for th, n_row in zip(prob.thetas, prob.n_floats):
        n_val = sum(c * v for c, v in zip(n_row, wf))
        c = terms[th]
        if sense == "source":
            ratio = _term_ratio(sense, c, n_val / d_val)
            excluded = th.is_zero()
        else:
            ratio = _term_ratio(sense, c, (d_val - n_val) / d_val)
            excluded = th.is_full()
        ratios[th] = ratio
        if not excluded:
            candidates.append(ratio)
    if not candidates:
        raise SolverError(f"no admissible selector for support {prob.support}")
    value = max(candidates) if sense == "source" else min(candidates)
    return value, ratios


# -- per-support bisection -------------------------------------------------


@dataclass
class _SupportResult:
    value: float
    witness: tuple
    problem: _SupportProblem


def _feasibility_rows(
    prob: _SupportProblem,
    terms: Mapping[ThetaVector, float],
    sense: str,
    t: Fraction,
) -> list[tuple[Fraction, ...]]:
    k = len(prob.support)
    rows: list[tuple[Fraction, ...]] = []
    # nonnegativity rows first: simplex vertices are the cheapest candidates
    for i in range(k):
        rows.append(tuple(Fraction(int(i == j)) for j in range(k)))
    for th, n_row in zip(prob.thetas, prob.n_coeffs):
        c = terms[th]
        if sense == "source":
            if th.is_zero() or c <= INFO_ZERO_TOL:
                continue  # vacuous: contributes 0 to the max
            cf = Fraction(c)
            rows.append(tuple(t * n - cf * d for n, d in zip(n_row, prob.d_coeffs)))
        else:
            if th.is_full() or c <= INFO_ZERO_TOL:
                continue  # zero terms short-circuit before bisection
            if all(n == d for n, d in zip(n_row, prob.d_coeffs)):
                continue  # term is +inf on the whole simplex: never binds
            cf = Fraction(c)
            rows.append(
                tuple(cf * d - t * (d - n) for n, d in zip(n_row, prob.d_coeffs))
            )
    return rows


def _solve_support(
    spec: GroupSpec,
    support: tuple[tuple[int, int], ...],
    terms: Mapping[ThetaVector, float],
    sense: str,
    tol: float,
    max_iter: int,
    incumbent: float | None,
) -> _SupportResult | None:
    """Optimize one support pattern; None when it provably cannot beat the
    incumbent (or, for the source side, when some term is infinite for every
    weight choice)."""
    prob = _support_problem(spec, support)
    k = len(support)
    uniform = tuple(Fraction(1, k) for _ in range(k))

    active = [
        (th, n_row)
        for th, n_row in zip(prob.thetas, prob.n_floats)
        if not (th.is_zero() if sense == "source" else th.is_full())
        and terms[th] > INFO_ZERO_TOL
    ]

    if sense == "source":
        for th, n_row in active:
            if all(n == 0 for n in n_row):
                return None  # infinite term for every w on this support
        if not active:
            return _SupportResult(0.0, uniform, prob)
        # D/N over the simplex is minimized at a vertex, so this is a valid
        # lower bracket for the inner max of every active term
        lo = max(
            terms[th]
            * min(d / n for n, d in zip(n_row, prob.d_floats) if n != 0)
            for th, n_row in active
        )
        hi, _ = _evaluate_point(prob, terms, uniform, sense)
        hi += 1e-12 * (1.0 + hi)
        witness = uniform
        if incumbent is not None:
            if incumbent <= lo:
                return None
            if incumbent < hi:
                w = _feasible_at(prob, terms, sense, incumbent, k)
                if w is None:
                    return None
                hi, witness = incumbent, w
        feasible_is_high = True
    else:
        if any(
            terms[th] <= INFO_ZERO_TOL for th in prob.thetas if not th.is_full()
        ):
            # a zero term pins the inner min to zero for every weight choice
            return _SupportResult(0.0, uniform, prob)
        # the minimal selector of the support has an all-zero numerator row,
        # so its term is a constant upper bound on the achievable value
        bound = min(
            (terms[th] for th, n_row in active if all(n == 0 for n in n_row)),
            default=None,
        )
        if bound is None:
            raise SolverError(f"support {support}: no constant bounding term")
        hi = bound + 1.0
        lo, _ = _evaluate_point(prob, terms, uniform, sense)
        lo = max(0.0, lo - 1e-12 * (1.0 + lo))
        witness = uniform
        if incumbent is not None:
            if incumbent >= bound:
                return None
            if incumbent > lo:
                w = _feasible_at(prob, terms, sense, incumbent, k)
                if w is None:
                    return None
                lo, witness = incumbent, w
        feasible_is_high = False

    iters = 0
    while hi - lo > tol and iters < max_iter:
        iters += 1
        mid = 0.5 * (lo + hi)
        w = _feasible_at(prob, terms, sense, mid, k)
        if (w is not None) == feasible_is_high:
            hi = mid
        else:
            lo = mid
        if w is not None:
            witness = w
    if hi - lo > tol:
        raise SolverError(
            f"bisection on support {support} did not converge: bracket "
            f"[{lo:.12g}, {hi:.12g}] after {iters} iterations (tol {tol:g})"
        )

    value, _ = _evaluate_point(prob, terms, witness, sense)
    return _SupportResult(value, witness, prob)


def _feasible_at(prob, terms, sense, t: float, k: int):
    rows = _feasibility_rows(prob, terms, sense, Fraction(t))
    return _find_feasible(k, rows)


# -- results ---------------------------------------------------------------


@dataclass(frozen=True)
class PerThetaTerm:
    theta: ThetaVector
    omega: float
    info_bits: float
    ratio_bits: float


@dataclass(frozen=True)
class RateResult:
    """Outcome of a weight optimization: the rate in bits, a witness weight
    vector, the selectors that attain the inner optimum there, and the full
    per-selector term table at the witness."""

    value: float
    weights: WeightVector | None
    critical_thetas: tuple[ThetaVector, ...]
    per_theta: tuple[PerThetaTerm, ...]
    support: tuple[tuple[int, int], ...]
    sense: str


def optimize_weights(
    spec: GroupSpec,
    terms: Mapping[ThetaVector, float],
    sense: str,
    *,
    tol: float = BISECT_TOL,
    max_iter: int = BISECT_MAX_ITER,
) -> RateResult:
    """Optimize the weighted min-max (source) or max-min (channel) objective
    built from precomputed per-selector information terms.

    ``terms`` must cover every selector reachable from some support pattern.
    """
    if sense not in ("source", "channel"):
        raise ValueError(f"unknown sense {sense!r}")
    missing = [th for th in all_reachable_thetas(spec) if th not in terms]
    if missing:
        raise ValueError(f"terms missing for selectors {missing}")
    for th, c in terms.items():
        if c < -1e-12 or math.isnan(c):
            raise ValueError(f"information term for {th.components} is {c}")

    best: _SupportResult | None = None
    for support in _covering_supports(spec):
        incumbent = best.value if best is not None else None
        res = _solve_support(spec, support, terms, sense, tol, max_iter, incumbent)
        if res is None:
            continue
        if (
            best is None
            or (sense == "source" and res.value < best.value)
            or (sense == "channel" and res.value > best.value)
        ):
            best = res

    if best is None:
        # only reachable when every support carries an everywhere-infinite term
        return RateResult(math.inf, None, (), (), (), sense)

    prob = best.problem
    value, ratios = _evaluate_point(prob, terms, best.witness, sense)
    weight_map = dict(zip(prob.support, best.witness))
    weights = WeightVector.from_mapping(spec, weight_map)
    crit_tol = max(CRITICAL_TOL, 10 * tol) * (1.0 + abs(value))
    critical = tuple(
        th
        for th in prob.thetas
        if not (th.is_zero() if sense == "source" else th.is_full())
        and abs(ratios[th] - value) <= crit_tol
    )
    table = tuple(
        PerThetaTerm(
            theta=th,
            omega=float(omega(spec, weights, th)),
            info_bits=terms[th],
            ratio_bits=ratios[th],
        )
        for th in prob.thetas
    )
    return RateResult(value, weights, critical, table, prob.support, sense)


# -- the two functionals ---------------------------------------------------


def source_terms(sj: SourceJoint) -> dict[ThetaVector, float]:
    """Coset information terms for every reachable selector."""
    return {th: coset_mi_source(sj, th) for th in all_reachable_thetas(sj.group)}


def channel_terms(chan: ChannelSpec) -> dict[ThetaVector, float]:
    """Conditional coset information terms for every reachable selector."""
    return {th: coset_mi_channel(chan, th) for th in all_reachable_thetas(chan.group)}


def source_coding_rate(
    sj: SourceJoint, *, tol: float = BISECT_TOL, max_iter: int = BISECT_MAX_ITER
) -> RateResult:
    """Source-coding group mutual information of a joint with uniform
    reconstruction marginal: min over weights of the max scaled coset term."""
    return optimize_weights(sj.group, source_terms(sj), "source", tol=tol, max_iter=max_iter)


def channel_coding_rate(
    chan: ChannelSpec, *, tol: float = BISECT_TOL, max_iter: int = BISECT_MAX_ITER
) -> RateResult:
    """Channel-coding group mutual information of a channel with uniform
    input: max over weights of the min scaled coset term."""
    return optimize_weights(
        chan.group, channel_terms(chan), "channel", tol=tol, max_iter=max_iter
    )


# -- closed forms for a single Z_{p^r} ring --------------------------------


def _single_ring(spec: GroupSpec) -> tuple[int, int]:
    if len(spec.rings) != 1:
        raise ValueError(
            f"closed form applies to a single Z_(p^r) ring, not {spec.describe()}"
        )
    p, r, _ = spec.rings[0]
    return p, r


def source_rate_prime_power(sj: SourceJoint) -> float:
    """Single-ring fast path: max over depth 1..r of (r/depth) times the
    coset information.  Must match the general optimizer."""
    _, r = _single_ring(sj.group)
    return max(
        (r / t) * coset_mi_source(sj, ThetaVector(sj.group, (t,)))
        for t in range(1, r + 1)
    )


def channel_rate_prime_power(chan: ChannelSpec) -> float:
    """Single-ring fast path: min over depth 0..r-1 of (r/(r-depth)) times
    the conditional coset information.  The reduction is a minimum: each
    depth is a constraint and the tightest one binds, mirroring the max on
    the source side."""
    _, r = _single_ring(chan.group)
    return min(
        (r / (r - t)) * coset_mi_channel(chan, ThetaVector(chan.group, (t,)))
        for t in range(r)
    )


# -- grid oracle -----------------------------------------------------------


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def grid_search(
    spec: GroupSpec,
    terms: Mapping[ThetaVector, float],
    sense: str,
    steps: int = 200,
) -> tuple[float, WeightVector]:
    """Independent exhaustive oracle: evaluate the inner optimum on every
    weight vector of the simplex grid with the given step count and return
    the best value.  Slow but direct; used to cross-check the bisection
    solver."""
    slots = spec.weight_slots
    k = len(slots)
    prime_of_slot = [q for q, _ in slots]
    cache: dict[tuple[bool, ...], _SupportProblem] = {}
    best_val: float | None = None
    best_w: tuple[float, ...] | None = None
    for combo in _compositions(steps, k):
        mask = tuple(c > 0 for c in combo)
        if {q for q, m in zip(prime_of_slot, mask) if m} != set(spec.primes):
            continue
        prob = cache.get(mask)
        if prob is None:
            support = tuple(s for s, m in zip(slots, mask) if m)
            prob = _support_problem(spec, support)
            cache[mask] = prob
        w = tuple(c / steps for c, m in zip(combo, mask) if m)
        value, _ = _evaluate_point(prob, terms, w, sense)
        if (
            best_val is None
            or (sense == "source" and value < best_val)
            or (sense == "channel" and value > best_val)
        ):
            best_val = value
            best_w = tuple(c / steps for c in combo)
    if best_val is None:
        raise SolverError("grid contains no valid weight vector")
    return best_val, WeightVector(spec, best_w)


# -- heuristic joint search (source design side) ---------------------------


@dataclass(frozen=True)
class JointSearchResult:
    """Best joint found by the heuristic; ``certified`` is always False: the
    value is an upper bound on the optimum over admissible joints, nothing
    more."""

    joint: SourceJoint
    rate: RateResult
    certified: bool = False


def search_source_joint(
    source_dist,
    spec: GroupSpec,
    distortion,
    target: float,
    *,
    restarts: int = 3,
    sweeps: int = 60,
    seed: int = 0,
) -> JointSearchResult:
    """Random-restart coordinate search for a low-rate test joint meeting a
    distortion target under the uniform-reconstruction constraint.

    Moves are 2x2 transport swaps (add mass on one diagonal of a submatrix,
    remove it on the other), which preserve both marginals exactly; the swap
    amount is quantized to halves of the available mass.  Not a certified
    optimum.
    """
    px = validate_distribution(source_dist)
    nx, ng = len(px), spec.order
    d = np.asarray(distortion, dtype=float)
    if d.shape != (nx, ng):
        raise ValidationError(f"distortion must be {nx}x{ng}")
    if np.any(d < 0):
        raise ValidationError("distortion entries must be >= 0")

    def expected(q):
        return float((q * d).sum())

    def rate_of(q):
        return source_coding_rate(SourceJoint(spec, q))

    rng = np.random.Generator(np.random.Philox(seed))
    best: JointSearchResult | None = None
    for _ in range(restarts):
        q = np.outer(px, np.full(ng, 1.0 / ng))
        # phase 1: greedy swaps until the distortion target is met
        for _ in range(20 * sweeps):
            if expected(q) <= target:
                break
            x1, x2 = rng.integers(0, nx, 2)
            u1, u2 = rng.integers(0, ng, 2)
            gain = d[x1, u1] + d[x2, u2] - d[x1, u2] - d[x2, u1]
            amount = min(q[x1, u1], q[x2, u2])
            if gain <= 0 or amount <= 0:
                continue
            q[x1, u1] -= amount
            q[x2, u2] -= amount
            q[x1, u2] += amount
            q[x2, u1] += amount
        if expected(q) > target + 1e-9:
            continue
        current = rate_of(q)
        # phase 2: accept swaps that keep the target and lower the rate
        for _ in range(sweeps):
            x1, x2 = rng.integers(0, nx, 2)
            u1, u2 = rng.integers(0, ng, 2)
            amount = 0.5 * min(q[x1, u1], q[x2, u2])
            if x1 == x2 or u1 == u2 or amount <= 0:
                continue
            trial = q.copy()
            trial[x1, u1] -= amount
            trial[x2, u2] -= amount
            trial[x1, u2] += amount
            trial[x2, u1] += amount
            if expected(trial) > target + 1e-12:
                continue
            cand = rate_of(trial)
            if cand.value < current.value - 1e-12:
                q, current = trial, cand
        sj = SourceJoint(spec, q, d, target)
        if best is None or current.value < best.rate.value:
            best = JointSearchResult(sj, current)
    if best is None:
        raise SolverError(
            "no joint meeting the distortion target was found; the target "
            "may be infeasible for this source"
        )
    return best
