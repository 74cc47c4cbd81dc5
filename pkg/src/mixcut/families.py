"""Closed-form inequality families: generators and membership certifiers.

Seven nested families are supported, from the classic star inequalities up
to the generic aggregation family with its per-scenario certificate search.
Generators validate their parameter preconditions exactly and emit canonical
cuts; `member_of` answers whether a given hull facet can be reproduced by
some parameterization of a family, returning the witnessing parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Optional, Sequence

from .core import (
    LinearCut,
    MixingInstance,
    ParsedMixingForm,
    Rational,
    ValidationError,
    canonicalize,
    mixing_form,
    parse_mixing_form,
    rat,
)

FAMILIES = (
    "star",
    "strengthened_star",
    "lifted",
    "kucukyavuz",
    "zhao",
    "blp_uniform",
    "blp_generic",
)


class FamilyParamError(ValidationError):
    """Family parameters violate the theorem's hypotheses."""


# ---------------------------------------------------------------------------
# Parameter records


@dataclass(frozen=True)
class StarParams:
    t_set: tuple[int, ...]


@dataclass(frozen=True)
class LiftedParams:
    """Parameters for the three lifted families (negative-coefficient terms).

    ``q_list`` order is significant for the permuted families.  ``s_list``
    applies only to the general-probability family; when omitted it is
    derived from the knapsack feasibility conditions.
    """

    r: int
    t_set: tuple[int, ...]
    q_list: tuple[int, ...] = ()
    s_list: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class BlpUniformParams:
    r: int
    t_set: tuple[int, ...]
    q_list: tuple[int, ...]
    delta: tuple[Fraction, ...]


@dataclass(frozen=True)
class BlpGenericParams:
    """Generic-family parameters plus an optional certificate.

    ``a_sets`` maps each scenario j = 1..m to a set of scenario indices drawn
    from ``q_list`` (entries not exceeding j are inert); ``beta`` is the
    per-scenario multiplier vector.  When both are present they form the
    certificate that the emitted cut is a valid aggregation.
    """

    r: int
    t_set: tuple[int, ...]
    delta: tuple[Fraction, ...]
    q_list: tuple[int, ...] = ()
    phi: tuple[Fraction, ...] = ()
    a_sets: Optional[tuple[frozenset[int], ...]] = None
    beta: Optional[tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class GenericCutResult:
    accepted: bool
    cut: Optional[LinearCut]
    certificate: Optional[BlpGenericParams]
    infeasible_j: Optional[int] = None

    def __bool__(self) -> bool:
        return self.accepted


@dataclass(frozen=True)
class Membership:
    member: bool
    via: Optional[str] = None
    certificate: object = None

    def __bool__(self) -> bool:
        return self.member


# ---------------------------------------------------------------------------
# Shared validation helpers


def _check_increasing(t_set: Sequence[int], upper: int, what: str) -> tuple[int, ...]:
    t = tuple(int(i) for i in t_set)
    if not t:
        raise FamilyParamError(f"{what} must be nonempty")
    if any(a >= b for a, b in zip(t, t[1:])):
        raise FamilyParamError(f"{what} must be strictly increasing")
    if t[0] < 1 or t[-1] > upper:
        raise FamilyParamError(f"{what} must lie within 1..{upper}")
    return t


def _telescope(inst: MixingInstance, t: Sequence[int], anchor: int) -> list[Fraction]:
    """Coefficients h_{t_i} - h_{t_{i+1}} with the final index replaced by `anchor`."""
    idx = list(t) + [anchor]
    return [inst.h_at(idx[i]) - inst.h_at(idx[i + 1]) for i in range(len(t))]


def _require_uniform(inst: MixingInstance, family: str) -> None:
    if not inst.uniform:
        raise FamilyParamError(f"the {family} family requires a uniform instance")


# ---------------------------------------------------------------------------
# Generators


def gen_star(inst: MixingInstance, params: StarParams) -> LinearCut:
    """Telescoping inequality over an increasing index set, anchored at 0.

    Valid for the knapsack-free mixing relaxation, hence for the instance.
    """
    t = _check_increasing(params.t_set, inst.m, "t_set")
    coefs = _telescope(inst, t, inst.m + 1)  # h_{m+1} = 0 anchor
    return mixing_form(inst.m, t, coefs, (), (), inst.h_at(t[0]))


def gen_strengthened_star(inst: MixingInstance, params: StarParams) -> LinearCut:
    """Telescoping inequality over indices within 1..p, anchored at h_{p+1}."""
    t = _check_increasing(params.t_set, inst.p, "t_set")
    coefs = _telescope(inst, t, inst.p + 1)
    return mixing_form(inst.m, t, coefs, (), (), inst.h_at(t[0]))


def _lifted_phis_all(inst: MixingInstance, r: int, count: int) -> list[Fraction]:
    phis: list[Fraction] = []
    for i in range(count):
        if i == 0:
            phis.append(inst.h_at(r + 1) - inst.h_at(r + 2))
        else:
            phis.append(
                max(
                    phis[-1],
                    inst.h_at(r + 1) - inst.h_at(r + i + 2) - sum(phis, Fraction(0)),
                )
            )
    return phis


def gen_luedtke_lifted(inst: MixingInstance, params: LiftedParams) -> LinearCut:
    """Lifted telescoping inequality for the cardinality case, sorted lifting set."""
    _require_uniform(inst, "lifted")
    r, p = params.r, inst.p
    if not 1 <= r <= p:
        raise FamilyParamError("r must lie within 1..p")
    t = _check_increasing(params.t_set, r, "t_set")
    q = tuple(params.q_list)
    if len(q) != p - r:
        raise FamilyParamError(f"q_list must have exactly p - r = {p - r} entries")
    if q:
        _check_increasing(q, inst.m, "q_list")
        if q[0] <= p:
            raise FamilyParamError("q_list must lie within p+1..m")
    phis = _lifted_phis_all(inst, r, len(q))
    coefs = _telescope(inst, t, r + 1)
    return mixing_form(inst.m, t, coefs, q, phis, inst.h_at(t[0]))


def _kucukyavuz_phis(inst: MixingInstance, r: int, q: Sequence[int]) -> list[Fraction]:
    phis: list[Fraction] = []
    for i, _ in enumerate(q):
        if i == 0:
            phis.append(inst.h_at(r + 1) - inst.h_at(r + 2))
        else:
            restricted = sum(
                (phis[k] for k in range(i) if q[k] >= r + i + 2), Fraction(0)
            )
            phis.append(
                max(phis[-1], inst.h_at(r + 1) - inst.h_at(r + i + 2) - restricted)
            )
    return phis


def gen_kucukyavuz(inst: MixingInstance, params: LiftedParams) -> LinearCut:
    """Lifted inequality with a permuted lifting sequence, q_i >= r + i + 1."""
    _require_uniform(inst, "kucukyavuz")
    r, p = params.r, inst.p
    if not 1 <= r <= p:
        raise FamilyParamError("r must lie within 1..p")
    t = _check_increasing(params.t_set, r, "t_set")
    q = tuple(params.q_list)
    if len(q) != p - r:
        raise FamilyParamError(f"q_list must have exactly p - r = {p - r} entries")
    if len(set(q)) != len(q):
        raise FamilyParamError("q_list entries must be distinct")
    for i, qi in enumerate(q, start=1):
        if not r + i + 1 <= qi <= inst.m:
            raise FamilyParamError(f"q_{i} = {qi} violates q_i >= r + i + 1")
    phis = _kucukyavuz_phis(inst, r, q)
    coefs = _telescope(inst, t, r + 1)
    return mixing_form(inst.m, t, coefs, q, phis, inst.h_at(t[0]))


def _zhao_w_tails(inst: MixingInstance, q: Sequence[int]) -> list[Fraction]:
    """Suffix sums of the lifting probabilities in descending-probability order."""
    w = sorted(q, key=lambda i: (-inst.pi_at(i), i))
    tails = [Fraction(0)] * (len(q) + 1)
    for i in range(len(q) - 1, -1, -1):
        tails[i] = tails[i + 1] + inst.pi_at(w[i])
    return tails


def _zhao_derive_s(
    inst: MixingInstance, r: int, q: Sequence[int]
) -> tuple[Optional[tuple[int, ...]], Optional[int]]:
    """The unique s-sequence satisfying the knapsack crossing conditions.

    For each position i the prefix mass of scenarios 1..r+s_i-1 plus the
    suffix mass of the lifting set must not exceed epsilon, while including
    scenario r+s_i pushes it strictly over.  Returns (None, i) when no such
    integer exists for position i (1-based).
    """
    tails = _zhao_w_tails(inst, q)
    s: list[int] = []
    for i in range(len(q)):
        room = inst.epsilon - tails[i]
        if inst.prefix(r) > room:
            return None, i + 1
        si = None
        for cand in range(1, inst.m - r + 1):
            if inst.prefix(r + cand - 1) <= room < inst.prefix(r + cand):
                si = cand
                break
        if si is None:
            return None, i + 1
        s.append(si)
    return tuple(s), None


def _zhao_check_s(
    inst: MixingInstance, r: int, q: Sequence[int], s: Sequence[int]
) -> Optional[int]:
    """Failing position (1-based) of the crossing conditions, or None."""
    tails = _zhao_w_tails(inst, q)
    for i, si in enumerate(s):
        if r + si > inst.m:
            return i + 1
        if not (
            inst.prefix(r + si) + tails[i] > inst.epsilon
            and inst.prefix(r + si - 1) + tails[i] <= inst.epsilon
        ):
            return i + 1
    return None


def _zhao_phis(
    inst: MixingInstance, r: int, q: Sequence[int], s: Sequence[int], s_top: int
) -> list[Fraction]:
    sx = list(s) + [s_top]
    phis: list[Fraction] = []
    for i, _ in enumerate(q):
        if i == 0:
            phis.append(inst.h_at(r + sx[0]) - inst.h_at(r + sx[1]))
        else:
            cutoff = r + min(1 + sx[i], sx[i + 1])
            restricted = sum(
                (phis[k] for k in range(i) if q[k] >= cutoff), Fraction(0)
            )
            phis.append(
                max(
                    phis[-1],
                    inst.h_at(r + sx[0]) - inst.h_at(r + sx[i] + 1) - restricted,
                )
            )
    return phis


def gen_zhao(inst: MixingInstance, params: LiftedParams) -> LinearCut:
    """General-probability lifted inequality with the s-shifted anchors.

    All feasibility conditions are verified exactly; a violated knapsack
    crossing condition is reported with its failing position.
    """
    r, p, theta = params.r, inst.p, inst.theta
    if not 1 <= r <= p:
        raise FamilyParamError("r must lie within 1..p")
    t = _check_increasing(params.t_set, r, "t_set")
    q = tuple(params.q_list)
    v = len(q)
    if v < 1:
        raise FamilyParamError("q_list must be nonempty (use the star families otherwise)")
    if len(set(q)) != len(q):
        raise FamilyParamError("q_list entries must be distinct")
    if v > theta - r:
        raise FamilyParamError(f"need |q_list| <= theta - r = {theta - r}")
    if params.s_list is not None:
        s = tuple(int(x) for x in params.s_list)
        if len(s) != v:
            raise FamilyParamError("s_list must match q_list in length")
        bad = _zhao_check_s(inst, r, q, s)
        if bad is not None:
            raise FamilyParamError(f"knapsack crossing condition fails at iota={bad}")
    else:
        s, bad = _zhao_derive_s(inst, r, q)
        if s is None:
            raise FamilyParamError(f"knapsack crossing condition fails at iota={bad}")
    s_top = p - r + 1
    if any(a > b for a, b in zip(s, list(s[1:]) + [s_top])) or s[0] < 1:
        raise FamilyParamError("s-sequence must be nondecreasing within 1..p-r+1")
    sx = list(s) + [s_top]
    for i, qi in enumerate(q, start=1):
        lo = r + min(1 + sx[i - 1], sx[i])
        if not lo <= qi <= inst.m or qi <= r + s[0]:
            raise FamilyParamError(f"q_{i} = {qi} outside its admissible range")
    phis = _zhao_phis(inst, r, q, s, s_top)
    coefs = _telescope(inst, t, r + s[0])
    return mixing_form(inst.m, t, coefs, q, phis, inst.h_at(t[0]))


def _blp_uniform_phis(
    inst: MixingInstance,
    r: int,
    q: Sequence[int],
    s: Sequence[int],
    delta_sum: Fraction,
) -> list[Fraction]:
    phis: list[Fraction] = []
    anchor = inst.h_at(r + s[0])
    for i, _ in enumerate(q):
        if i == 0:
            phis.append(anchor - inst.h_at(r + s[1]) - delta_sum)
        else:
            cutoff = r + s[i] + 1
            restricted = sum(
                (phis[k] for k in range(i) if q[k] >= cutoff), Fraction(0)
            )
            phis.append(
                max(phis[-1], anchor - inst.h_at(r + s[i] + 1) - delta_sum - restricted)
            )
    return phis


def gen_blp_uniform(inst: MixingInstance, params: BlpUniformParams) -> LinearCut:
    """Aggregation family for the cardinality case: shifted coefficients.

    The delta shifts relax the telescoping coefficients; the lifting values
    follow the same crossing recursion as the permuted family but discounted
    by the total shift.
    """
    _require_uniform(inst, "blp_uniform")
    if inst.epsilon == 1:
        raise FamilyParamError(
            "the shifted families need epsilon < 1 (their multiplier construction"
            " divides by 1 - epsilon); the star families cover the vacuous knapsack"
        )
    r, p = params.r, inst.p
    if not 1 <= r <= p:
        raise FamilyParamError("r must lie within 1..p")
    t = _check_increasing(params.t_set, r, "t_set")
    q = tuple(params.q_list)
    v = len(q)
    if not 1 <= v <= p - r:
        raise FamilyParamError(f"need 1 <= |q_list| <= p - r = {p - r}")
    if len(set(q)) != len(q):
        raise FamilyParamError("q_list entries must be distinct")
    delta = tuple(rat(d) for d in params.delta)
    if len(delta) != len(t):
        raise FamilyParamError("delta must match t_set in length")
    # s_iota = p - r - v + iota, so the anchor sits at h_{p-v+1}
    s = [p - r - v + i for i in range(1, v + 2)]
    anchor_idx = r + s[0]
    tx = list(t) + [anchor_idx]
    for i, d in enumerate(delta):
        if d < inst.h_at(tx[i + 1]) - inst.h_at(tx[i]):
            raise FamilyParamError(f"delta_{i + 1} below its telescoping lower bound")
    # every prefix including the full sum must be non-negative: the proof's
    # scenario cases rely on it, and a negative total genuinely produces
    # invalid inequalities
    for k in range(2, len(t) + 2):
        if sum(delta[: k - 1], Fraction(0)) < 0:
            raise FamilyParamError(f"partial delta sum through {k - 1} is negative")
    delta_sum = sum(delta, Fraction(0))
    if delta_sum > inst.h_at(r + s[0]) - inst.h_at(r + s[1]):
        raise FamilyParamError("total delta exceeds the first anchor gap")
    for i, qi in enumerate(q, start=1):
        if not r + s[i - 1] + 1 <= qi <= inst.m:
            raise FamilyParamError(f"q_{i} = {qi} outside r+s_{i}+1..m")
    phis = _blp_uniform_phis(inst, r, q, s, delta_sum)
    coefs = [
        inst.h_at(tx[i]) - inst.h_at(tx[i + 1]) + delta[i] for i in range(len(t))
    ]
    return mixing_form(inst.m, t, coefs, q, phis, inst.h_at(t[0]))


# ---------------------------------------------------------------------------
# Generic certificate machinery


def _beta_bounds_for_j(
    inst: MixingInstance,
    j: int,
    r: int,
    t: Sequence[int],
    delta: Sequence[Fraction],
    q: Sequence[int],
    phi: Sequence[Fraction],
    a_pos: frozenset[int],
) -> Optional[Fraction]:
    """Least feasible multiplier for scenario j, or None when infeasible.

    Combines the ratio window from the lifted coefficients with the covering
    requirement; a_pos holds 0-based positions into q (only those with
    q > j matter).
    """
    m = inst.m
    relevant = [k for k in range(len(q)) if q[k] > j]
    lo = Fraction(0)
    hi: Optional[Fraction] = None
    for k in relevant:
        bound = phi[k] / (m * inst.pi_at(q[k]))
        if k in a_pos:
            if bound > lo:
                lo = bound
        elif hi is None or bound < hi:
            hi = bound
    coef = inst.prefix(j) - inst.pi_at(j) - inst.epsilon
    for k in relevant:
        coef += inst.pi_at(q[k])
        if k in a_pos:
            coef -= inst.pi_at(q[k])
    a_j = sum(1 for ti in t if ti < j)
    anchor = inst.h_at(t[a_j]) if a_j < len(t) else inst.h_at(r + 1)
    rhs = anchor - inst.h_at(j)
    for i, ti in enumerate(t):
        if ti < j:
            rhs -= delta[i]
    for k in range(len(q)):
        if q[k] == j:
            rhs -= phi[k]
    for k in relevant:
        if k in a_pos:
            rhs -= phi[k]
    rhs /= m
    if coef > 0:
        need = rhs / coef
        if need > lo:
            lo = need
    elif coef < 0:
        cap = rhs / coef
        if hi is None or cap < hi:
            hi = cap
    elif rhs > 0:
        return None
    if hi is not None and lo > hi:
        return None
    return lo


def _search_certificate_j(
    inst: MixingInstance,
    j: int,
    r: int,
    t: Sequence[int],
    delta: Sequence[Fraction],
    q: Sequence[int],
    phi: Sequence[Fraction],
) -> Optional[tuple[frozenset[int], Fraction]]:
    """First feasible (A_j, beta_j) in deterministic subset order."""
    relevant = [k for k in range(len(q)) if q[k] > j]
    for mask in range(1 << len(relevant)):
        a_pos = frozenset(relevant[i] for i in range(len(relevant)) if mask >> i & 1)
        beta = _beta_bounds_for_j(inst, j, r, t, delta, q, phi, a_pos)
        if beta is not None:
            return a_pos, beta
    return None


def _generic_structure_check(
    inst: MixingInstance, params: BlpGenericParams
) -> tuple[tuple[int, ...], tuple[Fraction, ...], tuple[int, ...], tuple[Fraction, ...]]:
    if inst.epsilon == 1:
        raise FamilyParamError(
            "the aggregation family needs epsilon < 1 (its multiplier construction"
            " divides by 1 - epsilon); the star families cover the vacuous knapsack"
        )
    r, p = params.r, inst.p
    if not 1 <= r <= p:
        raise FamilyParamError("r must lie within 1..p")
    t = _check_increasing(params.t_set, r, "t_set")
    delta = tuple(rat(d) for d in params.delta)
    if len(delta) != len(t):
        raise FamilyParamError("delta must match t_set in length")
    q = tuple(params.q_list)
    if q:
        _check_increasing(q, inst.m, "q_list")
        if q[0] <= r:
            raise FamilyParamError("q_list must lie within r+1..m")
    if len(q) > p - r + len(t):
        raise FamilyParamError(f"need |q_list| <= p - r + |t_set| = {p - r + len(t)}")
    phi = tuple(rat(v) for v in params.phi)
    if len(phi) != len(q):
        raise FamilyParamError("phi must match q_list in length")
    if any(v < 0 for v in phi):
        raise FamilyParamError("phi entries must be non-negative")
    tx = list(t) + [r + 1]
    for i, d in enumerate(delta):
        if d < inst.h_at(tx[i + 1]) - inst.h_at(tx[i]):
            raise FamilyParamError(f"delta_{i + 1} below its telescoping lower bound")
    if sum(delta, Fraction(0)) > inst.h_at(r + 1):
        raise FamilyParamError("total delta exceeds h_{r+1}")
    return t, delta, q, phi


def _a_values_to_positions(
    q: Sequence[int], a_sets: Sequence[Iterable[int]]
) -> list[frozenset[int]]:
    pos = {qi: k for k, qi in enumerate(q)}
    out = []
    for a in a_sets:
        ids = frozenset(pos[x] for x in a if x in pos)
        out.append(ids)
    return out


def gen_blp_generic(inst: MixingInstance, params: BlpGenericParams) -> GenericCutResult:
    """Emit the generic aggregation cut when a multiplier certificate exists.

    With ``a_sets``/``beta`` supplied they are verified; otherwise each
    scenario is searched independently (subsets of the lifting positions
    above the scenario, smallest feasible multiplier).  On failure the first
    infeasible scenario is reported and no cut is emitted.
    """
    t, delta, q, phi = _generic_structure_check(inst, params)
    m = inst.m
    if params.a_sets is not None:
        if len(params.a_sets) != m:
            raise FamilyParamError("a_sets must have one entry per scenario")
        a_posed = _a_values_to_positions(q, params.a_sets)
        if params.beta is not None:
            beta = tuple(rat(b) for b in params.beta)
            if len(beta) != m or any(b < 0 for b in beta):
                raise FamilyParamError("beta must be m non-negative rationals")
            for j in range(1, m + 1):
                if not _certificate_conditions_hold(
                    inst, j, params.r, t, delta, q, phi, a_posed[j - 1], beta[j - 1]
                ):
                    return GenericCutResult(False, None, None, infeasible_j=j)
            chosen = list(zip(a_posed, beta))
        else:
            chosen = []
            for j in range(1, m + 1):
                beta_j = _beta_bounds_for_j(
                    inst, j, params.r, t, delta, q, phi, a_posed[j - 1]
                )
                if beta_j is None:
                    return GenericCutResult(False, None, None, infeasible_j=j)
                chosen.append((a_posed[j - 1], beta_j))
    else:
        chosen = []
        for j in range(1, m + 1):
            found = _search_certificate_j(inst, j, params.r, t, delta, q, phi)
            if found is None:
                return GenericCutResult(False, None, None, infeasible_j=j)
            chosen.append(found)

    tx = list(t) + [params.r + 1]
    coefs = [inst.h_at(tx[i]) - inst.h_at(tx[i + 1]) + delta[i] for i in range(len(t))]
    cut = mixing_form(m, t, coefs, q, phi, inst.h_at(t[0]))
    cert = BlpGenericParams(
        r=params.r,
        t_set=t,
        delta=delta,
        q_list=q,
        phi=phi,
        a_sets=tuple(frozenset(q[k] for k in a_pos) for a_pos, _ in chosen),
        beta=tuple(b for _, b in chosen),
    )
    return GenericCutResult(True, cut, cert)


def _certificate_conditions_hold(
    inst: MixingInstance,
    j: int,
    r: int,
    t: Sequence[int],
    delta: Sequence[Fraction],
    q: Sequence[int],
    phi: Sequence[Fraction],
    a_pos: frozenset[int],
    beta_j: Fraction,
) -> bool:
    if beta_j < 0:
        return False
    m = inst.m
    relevant = [k for k in range(len(q)) if q[k] > j]
    for k in relevant:
        bound = phi[k] / (m * inst.pi_at(q[k]))
        if k in a_pos:
            if beta_j < bound:
                return False
        elif beta_j > bound:
            return False
    coef = inst.prefix(j) - inst.pi_at(j) - inst.epsilon
    for k in relevant:
        if k not in a_pos:
            coef += inst.pi_at(q[k])
    a_j = sum(1 for ti in t if ti < j)
    anchor = inst.h_at(t[a_j]) if a_j < len(t) else inst.h_at(r + 1)
    rhs = anchor - inst.h_at(j)
    for i, ti in enumerate(t):
        if ti < j:
            rhs -= delta[i]
    for k in range(len(q)):
        if q[k] == j:
            rhs -= phi[k]
    for k in relevant:
        if k in a_pos:
            rhs -= phi[k]
    return beta_j * coef >= rhs / m


def facet_necessity_count(inst: MixingInstance, params: BlpGenericParams) -> int:
    """Number of certificate conditions that hold with equality.

    Counts ties among the ratio bounds, the covering inequalities and the
    sign conditions on multiplier products; a cut can only be facet-defining
    when this count reaches 2m + 1.  Requires a certified parameter set.
    """
    if params.a_sets is None or params.beta is None:
        raise FamilyParamError("necessity counting requires a certificate (a_sets, beta)")
    t, delta, q, phi = _generic_structure_check(inst, params)
    a_posed = _a_values_to_positions(q, params.a_sets)
    beta = tuple(rat(b) for b in params.beta)
    m = inst.m
    pq = set(t) | set(q)
    count = 0
    for j in range(1, m + 1):
        a_pos = a_posed[j - 1]
        b = beta[j - 1]
        if not _certificate_conditions_hold(inst, j, params.r, t, delta, q, phi, a_pos, b):
            raise FamilyParamError(f"certificate conditions fail at scenario {j}")
        relevant = [k for k in range(len(q)) if q[k] > j]
        for k in relevant:
            if b == phi[k] / (m * inst.pi_at(q[k])):
                count += 1
        coef = inst.prefix(j) - inst.pi_at(j) - inst.epsilon
        for k in relevant:
            if k not in a_pos:
                coef += inst.pi_at(q[k])
        a_j = sum(1 for ti in t if ti < j)
        anchor = inst.h_at(t[a_j]) if a_j < len(t) else inst.h_at(params.r + 1)
        rhs = anchor - inst.h_at(j)
        for i, ti in enumerate(t):
            if ti < j:
                rhs -= delta[i]
        for k in range(len(q)):
            if q[k] == j:
                rhs -= phi[k]
        for k in relevant:
            if k in a_pos:
                rhs -= phi[k]
        if b * coef == rhs / m:
            count += 1
        if b == 0:
            count += sum(1 for i in range(j + 1, m + 1) if i not in pq)
    return count


# ---------------------------------------------------------------------------
# Membership


def member_of(inst: MixingInstance, facet: LinearCut, family: str) -> Membership:
    """Does some parameterization of `family` reproduce this facet exactly?

    The facet must be canonical with z coefficient 1 (vertical facets have
    no family membership).  Memberships are inclusive along the family
    hierarchy; on non-uniform instances the cardinality-only families are
    simply empty.
    """
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}")
    facet = canonicalize(facet)
    if facet.z_coef != 1:
        raise ValidationError("family membership is defined for z_coef = 1 cuts only")
    return _memberships(inst, facet)[family]


def _memberships(inst: MixingInstance, facet: LinearCut) -> dict[str, Membership]:
    parsed = parse_mixing_form(inst, facet)
    out: dict[str, Membership] = {}
    if not parsed.p_coefs and not parsed.q_phis:
        degenerate = facet.rhs == inst.h_at(inst.p + 1)
        base = Membership(degenerate, "degenerate" if degenerate else None)
        return {f: base for f in FAMILIES}

    star = _proper_star(inst, parsed)
    out["star"] = star

    sstar = _proper_strengthened_star(inst, parsed) or star
    out["strengthened_star"] = sstar

    vacuous = inst.epsilon == 1
    if inst.uniform:
        lifted = _proper_lifted(inst, parsed) or sstar
        kucu = _proper_kucukyavuz(inst, parsed) or lifted
        out["lifted"] = lifted
        out["kucukyavuz"] = kucu
        zhao = _proper_zhao(inst, parsed) or kucu
        out["zhao"] = zhao
        # with a vacuous knapsack the shifted families' multiplier
        # construction is undefined; they collapse onto the chain below them
        blpu = (_proper_blp_uniform(inst, parsed) if not vacuous else Membership(False)) or zhao
        out["blp_uniform"] = blpu
        out["blp_generic"] = (
            _proper_blp_generic(inst, parsed) if not vacuous else Membership(False)
        ) or blpu
    else:
        out["lifted"] = Membership(False)
        out["kucukyavuz"] = Membership(False)
        out["zhao"] = _proper_zhao(inst, parsed) or sstar
        out["blp_uniform"] = Membership(False)
        out["blp_generic"] = (
            _proper_blp_generic(inst, parsed) if not vacuous else Membership(False)
        ) or sstar
    return out


def _proper_star(inst: MixingInstance, parsed: ParsedMixingForm) -> Membership:
    if parsed.q_phis or not parsed.p_coefs:
        return Membership(False)
    t = parsed.t_list
    if parsed.rhs_base != inst.h_at(t[0]):
        return Membership(False)
    if list(parsed.coefs) != _telescope(inst, t, inst.m + 1):
        return Membership(False)
    return Membership(True, "star", StarParams(t))


def _proper_strengthened_star(inst: MixingInstance, parsed: ParsedMixingForm) -> Membership:
    if parsed.q_phis or not parsed.p_coefs:
        return Membership(False)
    t = parsed.t_list
    if t[-1] > inst.p or parsed.rhs_base != inst.h_at(t[0]):
        return Membership(False)
    if list(parsed.coefs) != _telescope(inst, t, inst.p + 1):
        return Membership(False)
    return Membership(True, "strengthened_star", StarParams(t))


def _parsed_phi_map(parsed: ParsedMixingForm) -> dict[int, Fraction]:
    return dict(parsed.q_phis)


def _proper_lifted(inst: MixingInstance, parsed: ParsedMixingForm) -> Membership:
    if not parsed.q_phis or not parsed.p_coefs:
        return Membership(False)
    p = inst.p
    q = parsed.q_list  # sorted ascending by construction
    r = p - len(q)
    t = parsed.t_list
    if r < 1 or t[-1] > r or q[0] <= p:
        return Membership(False)
    if parsed.rhs_base != inst.h_at(t[0]):
        return Membership(False)
    if list(parsed.coefs) != _telescope(inst, t, r + 1):
        return Membership(False)
    if _lifted_phis_all(inst, r, len(q)) != list(parsed.phis):
        return Membership(False)
    return Membership(True, "lifted", LiftedParams(r, t, q))


def _proper_kucukyavuz(inst: MixingInstance, parsed: ParsedMixingForm) -> Membership:
    if not parsed.q_phis or not parsed.p_coefs:
        return Membership(False)
    p = inst.p
    r = p - len(parsed.q_phis)
    t = parsed.t_list
    if r < 1 or t[-1] > r:
        return Membership(False)
    if parsed.rhs_base != inst.h_at(t[0]):
        return Membership(False)
    if list(parsed.coefs) != _telescope(inst, t, r + 1):
        return Membership(False)
    phi_of = _parsed_phi_map(parsed)
    for perm in permutations(parsed.q_list):
        if any(qi < r + i + 2 for i, qi in enumerate(perm)):
            continue
        if _kucukyavuz_phis(inst, r, perm) == [phi_of[qi] for qi in perm]:
            return Membership(True, "kucukyavuz", LiftedParams(r, t, perm))
    return Membership(False)


def _proper_zhao(inst: MixingInstance, parsed: ParsedMixingForm) -> Membership:
    if not parsed.q_phis or not parsed.p_coefs:
        return Membership(False)
    t = parsed.t_list
    v = len(parsed.q_phis)
    phi_of = _parsed_phi_map(parsed)
    if parsed.rhs_base != inst.h_at(t[0]):
        return Membership(False)
    for r in range(t[-1], min(inst.p, inst.theta - v) + 1):
        s, _bad = _zhao_derive_s(inst, r, parsed.q_list)
        if s is None:
            continue
        s_top = inst.p - r + 1
        if s[0] < 1 or any(a > b for a, b in zip(s, list(s[1:]) + [s_top])):
            continue
        if list(parsed.coefs) != _telescope(inst, t, r + s[0]):
            continue
        sx = list(s) + [s_top]
        for perm in permutations(parsed.q_list):
            ok = True
            for i, qi in enumerate(perm, start=1):
                if qi <= r + s[0] or qi < r + min(1 + sx[i - 1], sx[i]):
                    ok = False
                    break
            if not ok:
                continue
            if _zhao_phis(inst, r, perm, s, s_top) == [phi_of[qi] for qi in perm]:
                return Membership(
                    True, "zhao", LiftedParams(r, t, perm, s_list=s)
                )
    return Membership(False)


def _proper_blp_uniform(inst: MixingInstance, parsed: ParsedMixingForm) -> Membership:
    """Search for generating parameters, allowing zero-lift phantom entries.

    A generating q-sequence may start with entries whose lift coefficient
    works out to zero; they are invisible in the cut but enlarge v, which
    moves the anchor.  The lift recursion is non-decreasing, so such entries
    always occupy a prefix of the sequence, and their scenario values only
    need to exist (they contribute nothing to the sums).
    """
    if not parsed.q_phis or not parsed.p_coefs:
        return Membership(False)
    p, m = inst.p, inst.m
    t = parsed.t_list
    v_vis = len(parsed.q_phis)
    if parsed.rhs_base != inst.h_at(t[0]):
        return Membership(False)
    phi_of = _parsed_phi_map(parsed)
    used = set(t) | set(parsed.q_list)
    for extra in range(0, p - v_vis - t[-1] + 1):
        v = v_vis + extra
        r = p - v  # the largest admissible r; smaller ones give the same cut
        if r < 1 or t[-1] > r:
            break
        anchor = p - v + 1
        tx = list(t) + [anchor]
        delta = [
            parsed.coefs[i] - inst.h_at(tx[i]) + inst.h_at(tx[i + 1])
            for i in range(len(t))
        ]
        if any(sum(delta[: k - 1], Fraction(0)) < 0 for k in range(2, len(t) + 2)):
            continue
        delta_sum = sum(delta, Fraction(0))
        if delta_sum > inst.h_at(anchor) - inst.h_at(anchor + 1):
            continue
        s = [p - r - v + i for i in range(1, v + 2)]
        pool = sorted(i for i in range(anchor + 1, m + 1) if i not in used)
        if not _phantoms_available(pool, [anchor + i for i in range(1, extra + 1)]):
            continue
        for perm in permutations(parsed.q_list):
            seq_phis = _blp_uniform_phis_with_phantoms(inst, r, perm, s, delta_sum, extra)
            if seq_phis is None:
                continue
            if any(qi < r + s[extra + i] + 1 for i, qi in enumerate(perm)):
                continue
            if seq_phis == [phi_of[qi] for qi in perm]:
                return Membership(
                    True,
                    "blp_uniform",
                    BlpUniformParams(r, t, perm, tuple(delta)),
                )
    return Membership(False)


def _phantoms_available(pool: Sequence[int], thresholds: Sequence[int]) -> bool:
    """Can distinct pool values be matched to the given lower thresholds?"""
    remaining = list(pool)
    for bound in sorted(thresholds, reverse=True):
        for idx in range(len(remaining) - 1, -1, -1):
            if remaining[idx] >= bound:
                del remaining[idx]
                break
        else:
            return False
    return True


def _blp_uniform_phis_with_phantoms(
    inst: MixingInstance,
    r: int,
    visible: Sequence[int],
    s: Sequence[int],
    delta_sum: Fraction,
    extra: int,
) -> Optional[list[Fraction]]:
    """Lift values of the visible entries when `extra` zero lifts lead the sequence.

    Returns None when the recursion cannot keep the leading lifts at zero.
    Zero entries contribute nothing to the restricted sums, so only their
    count matters.
    """
    anchor = inst.h_at(r + s[0])
    prev = Fraction(0)
    for i in range(extra):
        value = anchor - inst.h_at(r + s[i] + 1) - delta_sum if i else \
            anchor - inst.h_at(r + s[1]) - delta_sum
        if max(prev, value) != 0:
            return None
    phis: list[Fraction] = []
    for i, _ in enumerate(visible):
        pos = extra + i  # 0-based position in the full sequence
        if pos == 0:
            phis.append(anchor - inst.h_at(r + s[1]) - delta_sum)
        else:
            cutoff = r + s[pos] + 1
            restricted = sum(
                (phis[k] for k in range(i) if visible[k] >= cutoff), Fraction(0)
            )
            base = anchor - inst.h_at(r + s[pos] + 1) - delta_sum - restricted
            phis.append(max(phis[-1] if phis else Fraction(0), base))
    return phis


def _proper_blp_generic(inst: MixingInstance, parsed: ParsedMixingForm) -> Membership:
    """Certificate search over r and phantom zero-coefficient index choices.

    A generating index set may include positions whose shifted coefficient is
    zero; they drop out of the cut but count toward |t_set|, which is what
    bounds the number of lifted terms, and they shift the per-scenario
    covering sums.  The search tries the fewest phantoms first.
    """
    if not parsed.p_coefs:
        return Membership(False)
    from itertools import combinations

    t_vis = parsed.t_list
    q = parsed.q_list
    phi = list(parsed.phis)
    v = len(q)
    l_vis = len(t_vis)
    hi = inst.p
    if q:
        hi = min(hi, q[0] - 1)
    coef_of = dict(parsed.p_coefs)
    for r in range(t_vis[-1], hi + 1):
        pool = [i for i in range(1, r + 1) if i not in coef_of]
        need = max(0, v - (inst.p - r) - l_vis)
        for extra in range(need, len(pool) + 1):
            for phantom in combinations(pool, extra):
                t = tuple(sorted(t_vis + phantom))
                if parsed.rhs_base != inst.h_at(t[0]):
                    continue
                tx = list(t) + [r + 1]
                delta = [
                    coef_of.get(t[i], Fraction(0))
                    - inst.h_at(tx[i])
                    + inst.h_at(tx[i + 1])
                    for i in range(len(t))
                ]
                if sum(delta, Fraction(0)) > inst.h_at(r + 1):
                    continue
                chosen = []
                feasible = True
                for j in range(1, inst.m + 1):
                    found = _search_certificate_j(inst, j, r, t, delta, q, phi)
                    if found is None:
                        feasible = False
                        break
                    chosen.append(found)
                if feasible:
                    cert = BlpGenericParams(
                        r=r,
                        t_set=t,
                        delta=tuple(delta),
                        q_list=q,
                        phi=tuple(phi),
                        a_sets=tuple(
                            frozenset(q[k] for k in a_pos) for a_pos, _ in chosen
                        ),
                        beta=tuple(b for _, b in chosen),
                    )
                    return Membership(True, "blp_generic", cert)
    return Membership(False)
