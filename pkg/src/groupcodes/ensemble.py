"""Random-homomorphism code ensemble: sampling, exact law verification, and
a desk-scale Monte Carlo channel simulation.

Codes are images of random homomorphisms from an auxiliary input group into
the n-fold direct sum of the target group, shifted by a uniform dither.  The
verifiers here check the ensemble's structural laws (generator constraints,
pairwise joint probabilities, selector census bounds) by exhaustive
enumeration whenever the state space is small enough, falling back to seeded
sampling beyond that.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

from .groups import GroupElement, GroupSpec, Subgroup, ThetaVector
from .measures import ChannelSpec
from .rates import _numerator_coeff, enumerate_theta_set

# Exhaustive enumeration is preferred whenever the sampled space fits under
# this cap; statistical checks are a fallback, not the default.
EXHAUSTIVE_CAP = 1 << 16
TABLE_CELL_CAP = 1 << 16
SIZE_CAP = 1 << 20


def _depth(value: int, q: int, s: int) -> int:
    """q-adic depth of a residue in Z_{q^s}; the zero residue has depth s."""
    if value == 0:
        return s
    d = 0
    while value % q == 0:
        value //= q
        d += 1
    return d


@dataclass(frozen=True)
class InputGroup:
    """The auxiliary group J = sum of Z_{q^s} components, one block of
    ``counts[(q,s)]`` copies per weight slot of the target group."""

    group: GroupSpec
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        slots = self.group.weight_slots
        if len(self.counts) != len(slots):
            raise ValueError(f"expected {len(slots)} counts for slots {slots}")
        if any(c < 0 or not isinstance(c, int) for c in self.counts):
            raise ValueError("counts must be nonnegative integers")
        if sum(self.counts) < 1:
            raise ValueError("the input group needs at least one component")

    @classmethod
    def from_mapping(cls, group: GroupSpec, mapping) -> "InputGroup":
        return cls(group, tuple(mapping.get(slot, 0) for slot in group.weight_slots))

    @cached_property
    def spec(self) -> GroupSpec:
        """The input group as a group in its own right; its rings are exactly
        the (q, s, l) component index triples."""
        rings = []
        for (q, s), count in zip(self.group.weight_slots, self.counts):
            rings.extend((q, s, l) for l in range(1, count + 1))
        return GroupSpec(tuple(sorted(rings)))

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def size(self) -> int:
        return self.spec.order

    @property
    def support(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            slot for slot, c in zip(self.group.weight_slots, self.counts) if c > 0
        )

    def weights(self) -> dict[tuple[int, int], Fraction]:
        k = self.total
        return {
            slot: Fraction(c, k)
            for slot, c in zip(self.group.weight_slots, self.counts)
        }

    def rate_bits(self, blocklength: int) -> float:
        """Code rate log2|J| / n."""
        return math.log2(self.size) / blocklength

    def element(self, value) -> GroupElement:
        if isinstance(value, GroupElement):
            if value.spec != self.spec:
                raise TypeError("element bound to a different input group")
            return value
        return self.spec.element(value)


@dataclass(frozen=True)
class HomomorphismTable:
    """Sampled generator images plus dither, defining one shifted group code.

    ``images[slot][i]`` is the target-group element receiving the generator
    of input component ``slot`` in coordinate i.  Construction enforces the
    structural constraints: cross-prime image components are zero and the
    (p, r) component of a Z_{q^s} generator image lies in p^(r-s) Z_{p^r}.
    """

    input_group: InputGroup
    blocklength: int
    images: tuple[tuple[GroupElement, ...], ...]
    dither: tuple[GroupElement, ...]
    seed: int | None = None

    def __post_init__(self) -> None:
        n = self.blocklength
        if len(self.images) != len(self.input_group.spec.rings):
            raise ValueError("one image row per input component is required")
        if len(self.dither) != n or any(
            d.spec != self.input_group.group for d in self.dither
        ):
            raise ValueError("dither must be a blocklength tuple over the group")
        for row in self.images:
            if len(row) != n:
                raise ValueError("each image row must have one entry per coordinate")
        bad = constraint_violations(self)
        if bad:
            raise ValueError(f"generator image violates ensemble constraints: {bad[0]}")


def constraint_violations(table: HomomorphismTable) -> list[str]:
    """Structural checks on the generator images; empty when the table obeys
    the ensemble's two constraints."""
    out = []
    g_spec = table.input_group.group
    for (q, s, l), row in zip(table.input_group.spec.rings, table.images):
        for i, g in enumerate(row):
            if g.spec != g_spec:
                out.append(f"component ({q},{s},{l}) coord {i}: wrong group")
                continue
            for (p, r, m), v in zip(g_spec.rings, g.residues):
                if p != q and v != 0:
                    out.append(
                        f"({q},{s},{l})->({p},{r},{m}) coord {i}: cross-prime {v} != 0"
                    )
                if p == q and r >= s and v % p ** (r - s) != 0:
                    out.append(
                        f"({q},{s},{l})->({p},{r},{m}) coord {i}: "
                        f"{v} not in {p}^{r - s} Z_{p**r}"
                    )
    return out


def _sample_with_rng(
    ig: InputGroup, n: int, rng: np.random.Generator, seed: int | None
) -> HomomorphismTable:
    g_spec = ig.group
    images = []
    for q, s, _ in ig.spec.rings:
        row = []
        for _ in range(n):
            residues = []
            for p, r, _m in g_spec.rings:
                if p != q:
                    residues.append(0)
                else:
                    step = p ** max(r - s, 0)
                    residues.append(step * int(rng.integers(0, p ** min(r, s))))
            row.append(GroupElement(g_spec, tuple(residues)))
        images.append(tuple(row))
    dither = tuple(
        GroupElement(g_spec, tuple(int(rng.integers(0, m)) for m in g_spec.moduli))
        for _ in range(n)
    )
    return HomomorphismTable(ig, n, tuple(images), dither, seed)


def sample_hom(ig: InputGroup, n: int, seed: int) -> HomomorphismTable:
    """Draw a homomorphism table from the ensemble: each admissible generator
    image component uniform on its allowed subgroup, dither uniform on the
    group, all reproducible from the 64-bit seed (counter-based generator)."""
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    return _sample_with_rng(ig, n, rng, seed)


def apply_hom(table: HomomorphismTable, a) -> tuple[GroupElement, ...]:
    """Image of an input element: per coordinate, the weighted sum of the
    generator images."""
    a = table.input_group.element(a)
    g_spec = table.input_group.group
    out = [g_spec.zero()] * table.blocklength
    for value, row in zip(a.residues, table.images):
        if value:
            out = [acc + value * g for acc, g in zip(out, row)]
    return tuple(out)


def encode(table: HomomorphismTable, a) -> tuple[GroupElement, ...]:
    """Shifted codeword: homomorphism image plus dither."""
    return tuple(x + b for x, b in zip(apply_hom(table, a), table.dither))


def pair_theta(ig: InputGroup, a, b) -> ThetaVector:
    """The subgroup selector induced by an input pair: per level (p, r), the
    minimum of |r-s|^+ plus the q-adic depth of the component difference,
    over components of the same prime (clamped to r; levels with no matching
    component get r, since the image difference there is identically zero)."""
    a = ig.element(a)
    b = ig.element(b)
    comps = []
    for p, r in ig.group.ring_levels:
        best = r
        for (q, s, _), av, bv in zip(ig.spec.rings, a.residues, b.residues):
            if q == p:
                cand = max(r - s, 0) + _depth((bv - av) % q**s, q, s)
                best = min(best, cand)
        comps.append(min(best, r))
    return ThetaVector(ig.group, tuple(comps))


def count_t_theta(ig: InputGroup, a, theta: ThetaVector) -> int:
    """Exact size of {b : pair_theta(a, b) = theta} by enumeration."""
    if ig.size > SIZE_CAP:
        raise ValueError(f"input group size {ig.size} exceeds cap {SIZE_CAP}")
    a = ig.element(a)
    return sum(1 for b in ig.spec.elements() if pair_theta(ig, a, b) == theta)


def theta_census(ig: InputGroup, a=None) -> dict[ThetaVector, int]:
    """Counts of every selector over all input pairs with a fixed first
    element (the census is the same for every choice)."""
    if ig.size > SIZE_CAP:
        raise ValueError(f"input group size {ig.size} exceeds cap {SIZE_CAP}")
    a = ig.element(a) if a is not None else ig.spec.zero()
    census: dict[ThetaVector, int] = {}
    for b in ig.spec.elements():
        th = pair_theta(ig, a, b)
        census[th] = census.get(th, 0) + 1
    return census


def brute_theta_set(ig: InputGroup, a=None) -> frozenset[ThetaVector]:
    """Selectors with a nonempty census class; must equal the enumerated
    theta set of the support."""
    return frozenset(theta_census(ig, a))


def t_theta_bound(ig: InputGroup, theta: ThetaVector) -> int:
    """The census upper bound: product over slots of q^((s - coeff) * count)."""
    bound = 1
    for (q, s), count in zip(ig.group.weight_slots, ig.counts):
        if count:
            coeff = _numerator_coeff(ig.group, theta, q, s)
            bound *= q ** ((s - coeff) * count)
    return bound


# -- pairwise joint law ------------------------------------------------------


@dataclass(frozen=True)
class PairwiseLawReport:
    theta: ThetaVector
    mode: str  # "exhaustive" | "sampled"
    outcomes: int  # states enumerated or samples drawn
    support_cells: int
    off_support_mass: float
    tv_distance: float
    threshold: float
    passed: bool


def _hom_space_size(ig: InputGroup, n: int) -> int:
    size = 1
    for q, s, _ in ig.spec.rings:
        for p, r, _m in ig.group.rings:
            if p == q:
                size *= p ** (min(r, s) * n)
    return size


def verify_pairwise_law(
    ig: InputGroup,
    n: int,
    a,
    b,
    samples: int = 4096,
    seed: int = 0,
) -> PairwiseLawReport:
    """Check the pairwise codeword law: the joint distribution of the two
    shifted images is uniform on {(u, v) : v - u in H_theta^n} and zero
    elsewhere, theta being the selector of the input pair.

    Exhaustive (exact, zero tolerance) whenever the (generators, dither)
    space fits under the cap; otherwise seeded sampling with a total
    variation threshold of 3 * sqrt(cells / samples).
    """
    g_spec = ig.group
    gn = g_spec.order**n
    if gn * gn > TABLE_CELL_CAP:
        raise ValueError(
            f"joint table would need {gn * gn} cells, above cap {TABLE_CELL_CAP}"
        )
    a = ig.element(a)
    b = ig.element(b)
    theta = pair_theta(ig, a, b)
    h = Subgroup(g_spec, theta)
    support_cells = gn * (h.order**n)

    def word_index(word: Sequence[GroupElement]) -> int:
        idx = 0
        for x in word:
            idx = idx * g_spec.order + g_spec.element_index(x)
        return idx

    def in_support(u: Sequence[GroupElement], v: Sequence[GroupElement]) -> bool:
        zero_label = (0,) * len(g_spec.rings)
        return all(h.coset_label(vi - ui) == zero_label for ui, vi in zip(u, v))

    space = _hom_space_size(ig, n) * gn
    counts: dict[tuple[int, int], int] = {}

    if space <= EXHAUSTIVE_CAP:
        mode = "exhaustive"
        total = 0
        all_dithers = list(
            itertools.product(*[list(g_spec.elements())] * n)
        )
        for table in _all_tables(ig, n):
            xa = apply_hom(table, a)
            xb = apply_hom(table, b)
            for dither in all_dithers:
                u = tuple(x + d for x, d in zip(xa, dither))
                v = tuple(x + d for x, d in zip(xb, dither))
                key = (word_index(u), word_index(v))
                counts[key] = counts.get(key, 0) + 1
                total += 1
        expected = Fraction(1, support_cells)
        off_mass = Fraction(0)
        tv = Fraction(0)
        seen_support = 0
        for (ui, vi), c in counts.items():
            u = _word_at(g_spec, n, ui)
            v = _word_at(g_spec, n, vi)
            prob = Fraction(c, total)
            if in_support(u, v):
                seen_support += 1
                tv += abs(prob - expected)
            else:
                off_mass += prob
        tv += (support_cells - seen_support) * expected  # support cells never hit
        tv = tv / 2
        passed = off_mass == 0 and tv == 0
        return PairwiseLawReport(
            theta, mode, total, support_cells, float(off_mass), float(tv), 0.0, passed
        )

    mode = "sampled"
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(samples):
        table = _sample_with_rng(ig, n, rng, None)
        u = encode(table, a)
        v = encode(table, b)
        key = (word_index(u), word_index(v))
        counts[key] = counts.get(key, 0) + 1
    expected_f = 1.0 / support_cells
    off_mass_f = 0.0
    tv_f = 0.0
    seen_support = 0
    for (ui, vi), c in counts.items():
        u = _word_at(g_spec, n, ui)
        v = _word_at(g_spec, n, vi)
        prob = c / samples
        if in_support(u, v):
            seen_support += 1
            tv_f += abs(prob - expected_f)
        else:
            off_mass_f += prob
    tv_f += (support_cells - seen_support) * expected_f
    tv_f /= 2
    threshold = 3.0 * math.sqrt(support_cells / samples)
    passed = off_mass_f == 0.0 and tv_f < threshold
    return PairwiseLawReport(
        theta, mode, samples, support_cells, off_mass_f, tv_f, threshold, passed
    )


def _word_at(g_spec: GroupSpec, n: int, index: int) -> tuple[GroupElement, ...]:
    out = []
    for _ in range(n):
        out.append(g_spec.element_at(index % g_spec.order))
        index //= g_spec.order
    return tuple(reversed(out))


def _all_tables(ig: InputGroup, n: int):
    """Every homomorphism table (dither fixed at zero: callers own the dither
    loop), in a deterministic order."""
    g_spec = ig.group
    positions = []  # (slot_index, coord, ring_index, step, choices)
    for si, (q, s, _) in enumerate(ig.spec.rings):
        for i in range(n):
            for ri, (p, r, _m) in enumerate(g_spec.rings):
                if p == q:
                    positions.append((si, i, ri, p ** max(r - s, 0), p ** min(r, s)))
    zero_dither = tuple(g_spec.zero() for _ in range(n))
    for values in itertools.product(*[range(c) for _, _, _, _, c in positions]):
        residues = [
            [[0] * len(g_spec.rings) for _ in range(n)]
            for _ in ig.spec.rings
        ]
        for (si, i, ri, step, _), val in zip(positions, values):
            residues[si][i][ri] = step * val
        images = tuple(
            tuple(GroupElement(g_spec, tuple(res)) for res in row)
            for row in residues
        )
        yield HomomorphismTable(ig, n, images, zero_dither, None)


# -- Monte Carlo channel simulation -----------------------------------------


@dataclass(frozen=True)
class MonteCarloReport:
    trials: int
    errors: int
    seed: int
    code_rate_bits: float
    injective_trials: int
    injective_errors: int

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials


def mc_channel_error(
    ig: InputGroup, n: int, chan: ChannelSpec, trials: int, seed: int
) -> MonteCarloReport:
    """Empirical block-error rate of the shifted random code under exhaustive
    maximum-likelihood decoding, averaged over freshly sampled (table,
    dither, message, noise) per trial.  Ties decode to the lowest message
    index, so the result is deterministic given the seed."""
    if chan.group != ig.group:
        raise ValueError("channel input alphabet differs from the code group")
    if ig.size * chan.group.order**n > SIZE_CAP:
        raise ValueError("codebook times space size exceeds the simulation cap")
    if trials < 1:
        raise ValueError("need at least one trial")
    g_spec = ig.group
    messages = list(ig.spec.elements())
    w = chan.matrix
    ny = chan.output_size
    errors = 0
    injective_trials = 0
    injective_errors = 0
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.Generator(np.random.Philox(child))
        table = _sample_with_rng(ig, n, rng, None)
        codebook = np.array(
            [
                [g_spec.element_index(x) for x in encode(table, m)]
                for m in messages
            ],
            dtype=np.intp,
        )
        injective = len({tuple(row) for row in codebook}) == len(messages)
        m_idx = int(rng.integers(0, len(messages)))
        y = np.array(
            [rng.choice(ny, p=w[xi]) for xi in codebook[m_idx]], dtype=np.intp
        )
        likelihood = w[codebook, y].prod(axis=1)
        decoded = int(np.argmax(likelihood))
        wrong = decoded != m_idx
        errors += wrong
        if injective:
            injective_trials += 1
            injective_errors += wrong
    return MonteCarloReport(
        trials, errors, seed, ig.rate_bits(n), injective_trials, injective_errors
    )


# -- lemma suite --------------------------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    passed: bool
    detail: str


def lemma_suite(
    ig: InputGroup, n: int, *, samples: int = 200, seed: int = 0
) -> list[LemmaCheck]:
    """Run every structural check of the ensemble for one configuration.

    Exhaustive wherever the space allows; the pairwise law falls back to
    seeded sampling above the enumeration cap.
    """
    checks: list[LemmaCheck] = []
    rng = np.random.Generator(np.random.Philox(seed))

    # generator constraints on freshly sampled tables
    n_tables = min(samples, 1000)
    bad_tables = 0
    tables = []
    for _ in range(n_tables):
        table = _sample_with_rng(ig, n, rng, None)
        tables.append(table)
        if constraint_violations(table):
            bad_tables += 1
    checks.append(
        LemmaCheck(
            "generator-constraints",
            bad_tables == 0,
            f"{n_tables} sampled tables, {bad_tables} violations",
        )
    )

    # additivity of the sampled maps
    elements = list(ig.spec.elements()) if ig.size <= 256 else None
    law_fail = 0
    law_total = 0
    for table in tables[: min(len(tables), 25)]:
        if elements is not None and len(elements) ** 2 <= 4096:
            pairs = itertools.product(elements, elements)
        else:
            pairs = (
                (
                    ig.spec.element([int(rng.integers(0, m)) for m in ig.spec.moduli]),
                    ig.spec.element([int(rng.integers(0, m)) for m in ig.spec.moduli]),
                )
                for _ in range(64)
            )
        for a, b in pairs:
            law_total += 1
            lhs = apply_hom(table, a + b)
            rhs = tuple(x + y for x, y in zip(apply_hom(table, a), apply_hom(table, b)))
            if lhs != rhs:
                law_fail += 1
    checks.append(
        LemmaCheck(
            "homomorphism-law",
            law_fail == 0,
            f"{law_total} pairs checked, {law_fail} failures",
        )
    )

    # pairwise joint law
    if elements is not None and len(elements) ** 2 <= 64:
        pairs = list(itertools.product(elements, elements))
    else:
        pool = elements or [
            ig.spec.element([int(rng.integers(0, m)) for m in ig.spec.moduli])
            for _ in range(16)
        ]
        flat = [(pool[int(rng.integers(0, len(pool)))],
                 pool[int(rng.integers(0, len(pool)))]) for _ in range(16)]
        pairs = flat
    reports = [
        verify_pairwise_law(ig, n, a, b, samples=max(samples, 1024), seed=seed + i)
        for i, (a, b) in enumerate(pairs)
    ]
    failed = [r for r in reports if not r.passed]
    modes = {r.mode for r in reports}
    checks.append(
        LemmaCheck(
            "pairwise-joint-law",
            not failed,
            f"{len(reports)} pairs ({'/'.join(sorted(modes))}), {len(failed)} failures",
        )
    )

    # census bound and selector-set equality
    census = theta_census(ig)
    over = [
        th for th, count in census.items() if count > t_theta_bound(ig, th)
    ]
    checks.append(
        LemmaCheck(
            "census-bound",
            not over,
            f"{len(census)} selector classes, {len(over)} above the bound",
        )
    )
    expected = enumerate_theta_set(ig.group, ig.support)
    got = frozenset(census)
    checks.append(
        LemmaCheck(
            "theta-set-equality",
            got == expected,
            f"census has {len(got)} selectors, support enumeration {len(expected)}",
        )
    )

    # congruence solver against brute force
    cong_total = 0
    cong_fail = 0
    for p in ig.group.primes:
        for r in range(1, ig.group.max_exponent(p) + 1):
            mod = p**r
            for s in range(1, r + 1):
                for a in range(1, p**s):
                    for b in range(mod):
                        brute = tuple(x for x in range(mod) if (a * x) % mod == b % mod)
                        cong_total += 1
                        if solve_congruence(p, r, s, a, b) != brute:
                            cong_fail += 1
    checks.append(
        LemmaCheck(
            "congruence-solver",
            cong_fail == 0,
            f"{cong_total} equations checked, {cong_fail} mismatches",
        )
    )
    return checks


# -- the modular linear-congruence solver ------------------------------------


def congruence_solutions_from(
    p: int, r: int, theta_hat: int, theta: int, alpha: int, beta: int
) -> tuple[int, ...]:
    """The explicit solution set for p^theta_hat * alpha * x = p^theta * beta
    mod p^r, exposed separately so the representation invariance (choice of
    alpha and beta) can be probed directly."""
    mod = p**r
    alpha_inv = pow(alpha, -1, mod)
    base = (p ** (theta - theta_hat) * alpha_inv * beta) % mod
    step = (alpha_inv * p ** (r - theta_hat)) % mod
    return tuple(sorted((base + i * step) % mod for i in range(p**theta_hat)))


def solve_congruence(p: int, r: int, s: int, a: int, b: int) -> tuple[int, ...]:
    """Exact solution set of a*x = b mod p^r for a nonzero a in Z_{p^s},
    s <= r: empty when b is shallower than a, else p^depth(a) solutions."""
    if not 1 <= s <= r:
        raise ValueError(f"need 1 <= s <= r, got s={s}, r={r}")
    if not 0 < a < p**s:
        raise ValueError(
            f"coefficient {a} must be a nonzero residue of Z_{p**s}; "
            "for a = 0 the equation is solvable exactly when b = 0"
        )
    if not 0 <= b < p**r:
        raise ValueError(f"target {b} must be a residue of Z_{p**r}")
    theta_hat = _depth(a, p, s)
    theta = _depth(b, p, r)
    if theta < theta_hat:
        return ()
    alpha = a // p**theta_hat
    beta = b // p**theta
    return congruence_solutions_from(p, r, theta_hat, theta, alpha, beta)
