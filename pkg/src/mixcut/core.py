"""Exact-rational model of the mixing set with a knapsack constraint.

Everything downstream (hull enumeration, inequality families, the bilinear
aggregation engine) works over the types defined here.  All scalars are
`fractions.Fraction`; no floating point is used anywhere in a decision path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

#: Exact scalar type used throughout the package.  ``Fraction`` already
#: guarantees lowest terms and a positive denominator.
Rational = Fraction

RationalLike = Union[Fraction, int, str]


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class DimensionError(ValidationError):
    """A cut and an instance disagree on the number of scenarios."""


def rat(value: RationalLike) -> Fraction:
    """Parse an exact rational from an int, Fraction or ``"a/b"`` string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    raise ValidationError(f"not an exact rational: {value!r} (floats are rejected)")


def rat_str(q: Fraction) -> str:
    """Render a rational as ``"a"`` or ``"a/b"`` (inverse of :func:`rat`)."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class MixingInstance:
    """The tuple (m, h, pi, epsilon) together with its derived indices.

    ``h`` is non-increasing and non-negative, ``pi`` is a probability vector
    with every entry at most ``epsilon``.  ``p`` is the longest prefix of
    scenarios whose probability mass fits under ``epsilon``; ``theta`` is the
    same count when scenarios are taken in order of ascending probability
    (the permutation stored in ``order``).  Instances are immutable and
    hashable, so they can key caches.
    """

    m: int
    h: tuple[Fraction, ...]
    pi: tuple[Fraction, ...]
    epsilon: Fraction
    p: int
    theta: int
    order: tuple[int, ...]
    uniform: bool
    pi_prefix: tuple[Fraction, ...]  # pi_prefix[k] = sum of the first k probabilities

    def h_at(self, i: int) -> Fraction:
        """1-indexed access to h with the convention ``h_{m+1} = 0``."""
        if not 1 <= i <= self.m + 1:
            raise IndexError(f"h index {i} out of range 1..{self.m + 1}")
        if i == self.m + 1:
            return Fraction(0)
        return self.h[i - 1]

    def pi_at(self, i: int) -> Fraction:
        return self.pi[i - 1]

    def prefix(self, k: int) -> Fraction:
        """Cumulative probability of scenarios 1..k (0 for k = 0)."""
        return self.pi_prefix[k]


def build_instance(
    m: int,
    h: Sequence[RationalLike],
    pi: Optional[Sequence[RationalLike]] = None,
    epsilon: RationalLike = 1,
) -> MixingInstance:
    """Validate raw data and compute the derived indices p, theta, order.

    Rejects unsorted or negative ``h``, non-positive probabilities, a
    probability exceeding ``epsilon``, probabilities not summing to one, and
    ``epsilon`` outside [0, 1].
    """
    if m < 1:
        raise ValidationError("need at least one scenario")
    hv = tuple(rat(x) for x in h)
    if len(hv) != m:
        raise ValidationError(f"expected {m} right-hand sides, got {len(hv)}")
    if any(hv[i] < hv[i + 1] for i in range(m - 1)):
        raise ValidationError("h must be non-increasing")
    if hv[-1] < 0:
        raise ValidationError("h must be non-negative")
    eps = rat(epsilon)
    if not 0 <= eps <= 1:
        raise ValidationError("epsilon must lie in [0, 1]")
    if pi is None:
        pv = tuple(Fraction(1, m) for _ in range(m))
    else:
        pv = tuple(rat(x) for x in pi)
        if len(pv) != m:
            raise ValidationError(f"expected {m} probabilities, got {len(pv)}")
    if any(q <= 0 for q in pv):
        raise ValidationError("probabilities must be positive")
    if sum(pv) != 1:
        raise ValidationError("probabilities must sum to 1")
    if any(q > eps for q in pv):
        raise ValidationError("every probability must be at most epsilon")

    prefix = [Fraction(0)]
    for q in pv:
        prefix.append(prefix[-1] + q)
    p = max(k for k in range(1, m + 1) if prefix[k] <= eps)

    order = tuple(sorted(range(1, m + 1), key=lambda i: (pv[i - 1], i)))
    acc = Fraction(0)
    theta = 0
    for i in order:
        acc += pv[i - 1]
        if acc > eps:
            break
        theta += 1

    uniform = all(q == Fraction(1, m) for q in pv)
    return MixingInstance(
        m=m,
        h=hv,
        pi=pv,
        epsilon=eps,
        p=p,
        theta=theta,
        order=order,
        uniform=uniform,
        pi_prefix=tuple(prefix),
    )


@dataclass(frozen=True)
class LinearCut:
    """An inequality ``z_coef * z + sum_i x_coefs[i] * x_i >= rhs``.

    Canonical form (see :func:`canonicalize`) makes cuts comparable: equal
    dataclasses are the same inequality up to positive scaling.
    """

    z_coef: Fraction
    x_coefs: tuple[Fraction, ...]
    rhs: Fraction

    @property
    def m(self) -> int:
        return len(self.x_coefs)

    def evaluate(self, z: Fraction, x: Sequence[int]) -> Fraction:
        return self.z_coef * z + sum(c * xi for c, xi in zip(self.x_coefs, x) if xi)

    def scaled(self, factor: Fraction) -> "LinearCut":
        if factor <= 0:
            raise ValidationError("cuts may only be scaled by positive rationals")
        return LinearCut(
            self.z_coef * factor,
            tuple(c * factor for c in self.x_coefs),
            self.rhs * factor,
        )

    def sort_key(self):
        return (self.z_coef, self.x_coefs, self.rhs)


def make_cut(z: RationalLike, x: Iterable[RationalLike], rhs: RationalLike) -> LinearCut:
    return LinearCut(rat(z), tuple(rat(c) for c in x), rat(rhs))


def canonicalize(cut: LinearCut) -> LinearCut:
    """Scale a cut to canonical form (idempotent, positive scaling only).

    If the z coefficient is nonzero the cut is scaled so |z_coef| = 1; for a
    vertical cut the first nonzero x coefficient gets absolute value 1.
    """
    if cut.z_coef != 0:
        return cut.scaled(1 / abs(cut.z_coef))
    for c in cut.x_coefs:
        if c != 0:
            return cut.scaled(1 / abs(c))
    raise ValidationError("cannot canonicalize the all-zero cut")


@dataclass(frozen=True)
class Vertex:
    """A minimal point of the mixing set: binary x with z forced as low as possible."""

    z: Fraction
    x: tuple[int, ...]


def enumerate_vertices(inst: MixingInstance) -> tuple[Vertex, ...]:
    """All minimal-z points of the instance, sorted lexicographically by x.

    One vertex per feasible binary ``x`` (knapsack ``pi . x <= epsilon``) with
    ``z = max{h_i : x_i = 0}`` (0 when x is the all-ones vector).  Together
    with the recession ray (1, 0) these generate the convex hull.
    """
    if inst.m > 20:
        raise ValidationError("vertex enumeration is guarded at m <= 20")
    return _vertices_cached(inst)


@lru_cache(maxsize=None)
def _vertices_cached(inst: MixingInstance) -> tuple[Vertex, ...]:
    m = inst.m
    out: list[Vertex] = []
    x = [0] * m

    def rec(i: int, mass: Fraction) -> None:
        if i == m:
            zeros_max = Fraction(0)
            for k in range(m):
                if not x[k] and inst.h[k] > zeros_max:
                    zeros_max = inst.h[k]
            out.append(Vertex(zeros_max, tuple(x)))
            return
        x[i] = 0
        rec(i + 1, mass)
        new_mass = mass + inst.pi[i]
        if new_mass <= inst.epsilon:
            x[i] = 1
            rec(i + 1, new_mass)
            x[i] = 0

    rec(0, Fraction(0))
    out.sort(key=lambda v: v.x)
    return tuple(out)


def cut_is_valid(inst: MixingInstance, cut: LinearCut) -> bool:
    """Exact validity oracle: the cut holds at every vertex and along the ray.

    The recession ray (1, 0) makes ``z_coef >= 0`` necessary; point-wise
    validity over the minimal vertices is then sufficient for the whole set.
    """
    if cut.m != inst.m:
        raise DimensionError(f"cut has {cut.m} x coefficients, instance has m={inst.m}")
    if cut.z_coef < 0:
        return False
    return all(cut.evaluate(v.z, v.x) >= cut.rhs for v in enumerate_vertices(inst))


def mixing_form(
    m: int,
    t_set: Sequence[int],
    coefs: Sequence[RationalLike],
    phi_set: Sequence[int],
    phis: Sequence[RationalLike],
    rhs_base: RationalLike,
) -> LinearCut:
    """Assemble ``z + sum coef_t x_t + sum phi_q (1 - x_q) >= rhs_base``.

    Expanding the (1 - x_q) terms gives x coefficient ``-phi_q`` and right
    hand side ``rhs_base - sum(phi)``.  The result is canonical (z_coef = 1).
    """
    t_list = list(t_set)
    q_list = list(phi_set)
    if len(t_list) != len(list(coefs)) or len(q_list) != len(list(phis)):
        raise ValidationError("index and coefficient lists must have equal length")
    if set(t_list) & set(q_list):
        raise ValidationError("positive and lifted index sets must be disjoint")
    for i in t_list + q_list:
        if not 1 <= i <= m:
            raise ValidationError(f"index {i} out of range 1..{m}")
    if len(set(t_list)) != len(t_list) or len(set(q_list)) != len(q_list):
        raise ValidationError("index sets may not repeat entries")
    phv = [rat(v) for v in phis]
    if any(v < 0 for v in phv):
        raise ValidationError("lifting coefficients must be non-negative")
    x = [Fraction(0)] * m
    for i, c in zip(t_list, coefs):
        x[i - 1] = rat(c)
    for q, v in zip(q_list, phv):
        x[q - 1] = -v
    return LinearCut(Fraction(1), tuple(x), rat(rhs_base) - sum(phv, Fraction(0)))


@dataclass(frozen=True)
class ParsedMixingForm:
    """Decomposition of a canonical cut into mixing-form components.

    ``p_coefs`` maps indices with positive coefficient to that coefficient,
    ``q_phis`` maps indices with negative coefficient to its negation, and
    ``rhs_base`` restores the pre-expansion right hand side.  ``consistent``
    flags whether ``rhs_base`` equals ``h`` at the smallest positive index;
    family membership checkers decide what to do with inconsistent parses.
    """

    p_coefs: tuple[tuple[int, Fraction], ...]
    q_phis: tuple[tuple[int, Fraction], ...]
    rhs_base: Fraction
    consistent: bool

    @property
    def t_list(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.p_coefs)

    @property
    def q_list(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.q_phis)

    @property
    def coefs(self) -> tuple[Fraction, ...]:
        return tuple(c for _, c in self.p_coefs)

    @property
    def phis(self) -> tuple[Fraction, ...]:
        return tuple(c for _, c in self.q_phis)


def parse_mixing_form(inst: MixingInstance, cut: LinearCut) -> ParsedMixingForm:
    """Inverse of :func:`mixing_form` for canonical cuts with z_coef = 1."""
    if cut.m != inst.m:
        raise DimensionError(f"cut has {cut.m} x coefficients, instance has m={inst.m}")
    if cut.z_coef != 1:
        raise ValidationError("mixing-form parsing requires a canonical cut with z_coef = 1")
    p_coefs = tuple(
        (i + 1, c) for i, c in enumerate(cut.x_coefs) if c > 0
    )
    q_phis = tuple(
        (i + 1, -c) for i, c in enumerate(cut.x_coefs) if c < 0
    )
    rhs_base = cut.rhs + sum((phi for _, phi in q_phis), Fraction(0))
    consistent = (not p_coefs) or rhs_base == inst.h_at(p_coefs[0][0])
    return ParsedMixingForm(p_coefs, q_phis, rhs_base, consistent)


# ---------------------------------------------------------------------------
# JSON interchange


def instance_to_json(inst: MixingInstance) -> str:
    payload = {
        "m": inst.m,
        "h": [rat_str(v) for v in inst.h],
        "pi": [rat_str(v) for v in inst.pi],
        "epsilon": rat_str(inst.epsilon),
    }
    return json.dumps(payload)


def instance_from_json(text: str) -> MixingInstance:
    payload = json.loads(text)
    try:
        m = int(payload["m"])
        h = payload["h"]
        eps = payload["epsilon"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instance document: {exc}") from exc
    pi = payload.get("pi")
    return build_instance(m, h, pi, eps)


def cut_to_json(cut: LinearCut) -> str:
    payload = {
        "z": rat_str(cut.z_coef),
        "x": [rat_str(c) for c in cut.x_coefs],
        "rhs": rat_str(cut.rhs),
    }
    return json.dumps(payload)


def cut_from_json(text: str) -> LinearCut:
    payload = json.loads(text)
    try:
        return make_cut(payload["z"], payload["x"], payload["rhs"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed cut document: {exc}") from exc


def vertex_to_dict(v: Vertex) -> dict:
    return {"z": rat_str(v.z), "x": list(v.x)}


def vertex_from_dict(payload: dict) -> Vertex:
    return Vertex(rat(payload["z"]), tuple(int(b) for b in payload["x"]))
