"""Generic bilinear aggregation engine over a simplex, and the mixing reformulation.

A `BilinearSet` holds constraints of the form ``y^T A x + b.x + c.y >= d``
over ``x`` in a polyhedron and ``y`` in the integral simplex.  Aggregating
weighted constraints, normalizing the y-products, and applying the
substitution rules yields linear cuts in the x variables; the projection-cone
view certifies them.  `build_sc` produces the lifted reformulation of a
mixing instance whose aggregation cuts are valid for the instance's hull.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import dd, linalg
from .core import (
    LinearCut,
    MixingInstance,
    Rational,
    RationalLike,
    ValidationError,
    canonicalize,
    rat,
    rat_str,
)


@dataclass(frozen=True)
class BilinearConstraint:
    """One constraint y^T A x + b.x + c.y >= d (A is m rows by n columns)."""

    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    c: tuple[Fraction, ...]
    d: Fraction
    label: str = ""


@dataclass(frozen=True)
class BilinearSet:
    n: int
    m: int
    constraints: tuple[BilinearConstraint, ...]
    e_rows: tuple[tuple[Fraction, ...], ...]
    f: tuple[Fraction, ...]
    upper_bounded: frozenset[int]
    compl_pairs: frozenset[tuple[int, int]]
    compl_complement_pairs: frozenset[tuple[int, int]]
    upper_bound_row: tuple[tuple[int, int], ...] = ()  # x index -> row of -x_i >= -1
    compl_index: tuple[tuple[tuple[int, int], int], ...] = ()
    compl_complement_index: tuple[tuple[tuple[int, int], int], ...] = ()
    z_slot: Optional[int] = None

    @property
    def kappa(self) -> int:
        return len(self.constraints)

    @property
    def tau(self) -> int:
        return len(self.e_rows)


@dataclass(frozen=True)
class BilinearExpr:
    """Aggregated inequality with y-squares folded and y-crosses dropped.

    Represents ``sum quad[j][i] x_i y_{j+1} + lin_x . x + lin_y . y >= rhs``.
    ``zeroed`` counts coefficients that some weighted constraint touched but
    that cancelled to zero in the sum (the quantity audited by the facet
    necessity condition).
    """

    quad: tuple[tuple[Fraction, ...], ...]
    lin_x: tuple[Fraction, ...]
    lin_y: tuple[Fraction, ...]
    rhs: Fraction
    zeroed: int
    weight_count: int
    t_sets_disjoint: bool


@dataclass(frozen=True)
class BlpAssignment:
    """Aggregation selection: a base constraint plus weighted constraint sets.

    ``base_j`` = 0 weights the base with the simplex complement 1 - sum(y);
    1..m weights it with y_j.  ``k_weights`` and ``t_weights`` are sparse
    ((j, index, weight) with weight > 0); the base pair may not reappear in
    ``k_weights``.
    """

    base_k: int
    base_j: int
    k_weights: tuple[tuple[int, int, Fraction], ...] = ()
    t_weights: tuple[tuple[int, int, Fraction], ...] = ()

    @staticmethod
    def build(
        base_k: int,
        base_j: int,
        k_weights: Iterable[tuple[int, int, RationalLike]] = (),
        t_weights: Iterable[tuple[int, int, RationalLike]] = (),
    ) -> "BlpAssignment":
        kw = tuple(
            (int(j), int(k), rat(w)) for j, k, w in k_weights if rat(w) != 0
        )
        tw = tuple(
            (int(j), int(t), rat(w)) for j, t, w in t_weights if rat(w) != 0
        )
        return BlpAssignment(int(base_k), int(base_j), kw, tw)


@dataclass(frozen=True)
class Move:
    """One substitution step, kept so the dual certificate can be assembled."""

    kind: str  # "r0", "compl_zero", "compl_to_y", "y_to_x"
    i: int
    j: int  # scenario, 1-based
    amount: Fraction


@dataclass(frozen=True)
class SubstitutionResult:
    coefs: tuple[Fraction, ...]
    rhs: Fraction
    p_values: tuple[Fraction, ...]
    q_counts: tuple[int, ...]
    p0: Fraction
    q0: int
    zeroed: int
    required: int
    c1_satisfied: bool
    moves: tuple[Move, ...]
    t_sets_disjoint: bool
    z_slot: Optional[int]

    def mixing_cut(self) -> LinearCut:
        """Interpret the x-block as (z, x) and emit a mixing-set cut."""
        if self.z_slot is None:
            raise ValidationError("this bilinear set has no designated z slot")
        xs = tuple(
            c for i, c in enumerate(self.coefs) if i != self.z_slot
        )
        return LinearCut(self.coefs[self.z_slot], xs, self.rhs)


def _validate_assignment(S: BilinearSet, a: BlpAssignment) -> None:
    if not 0 <= a.base_k < S.kappa:
        raise ValidationError(f"base constraint index {a.base_k} out of range")
    if not 0 <= a.base_j <= S.m:
        raise ValidationError(f"base weight index {a.base_j} out of range")
    for j, k, w in a.k_weights:
        if not 0 <= j <= S.m or not 0 <= k < S.kappa:
            raise ValidationError(f"constraint weight ({j},{k}) out of range")
        if w < 0:
            raise ValidationError("aggregation weights must be non-negative")
        if (k, j) == (a.base_k, a.base_j):
            raise ValidationError("the base pair may not be reweighted")
    for j, t, w in a.t_weights:
        if not 0 <= j <= S.m or not 0 <= t < S.tau:
            raise ValidationError(f"polyhedron weight ({j},{t}) out of range")
        if w < 0:
            raise ValidationError("aggregation weights must be non-negative")


def aggregate(S: BilinearSet, a: BlpAssignment) -> BilinearExpr:
    """Weighted sum of the selected constraints with y-normalization applied.

    Weighting by y_j keeps only that constraint's j-th bilinear row (squares
    fold to y_j, crosses vanish); weighting by the simplex complement keeps
    the linear part and mirrors it negatively into every bilinear row.
    """
    _validate_assignment(S, a)
    m, n = S.m, S.n
    quad = [[Fraction(0)] * n for _ in range(m)]
    lin_x = [Fraction(0)] * n
    lin_y = [Fraction(0)] * m
    rhs = Fraction(0)
    touched_q = [[False] * n for _ in range(m)]
    touched_y = [False] * m

    def add_constraint(k: int, j: int, w: Fraction) -> None:
        nonlocal rhs
        con = S.constraints[k]
        if j == 0:
            for i in range(n):
                if con.b[i]:
                    lin_x[i] += w * con.b[i]
                    for jj in range(m):
                        quad[jj][i] -= w * con.b[i]
                        touched_q[jj][i] = True
            if con.d:
                for jj in range(m):
                    lin_y[jj] += w * con.d
                    touched_y[jj] = True
                rhs += w * con.d
        else:
            row = con.A[j - 1]
            for i in range(n):
                coef = row[i] + con.b[i]
                if coef:
                    quad[j - 1][i] += w * coef
                    touched_q[j - 1][i] = True
            delta = con.c[j - 1] - con.d
            if delta:
                lin_y[j - 1] += w * delta
                touched_y[j - 1] = True

    def add_polyhedron_row(t: int, j: int, w: Fraction) -> None:
        nonlocal rhs
        row = S.e_rows[t]
        if j == 0:
            for i in range(n):
                if row[i]:
                    lin_x[i] += w * row[i]
                    for jj in range(m):
                        quad[jj][i] -= w * row[i]
                        touched_q[jj][i] = True
            if S.f[t]:
                for jj in range(m):
                    lin_y[jj] += w * S.f[t]
                    touched_y[jj] = True
                rhs += w * S.f[t]
        else:
            for i in range(n):
                if row[i]:
                    quad[j - 1][i] += w * row[i]
                    touched_q[j - 1][i] = True
            if S.f[t]:
                lin_y[j - 1] -= w * S.f[t]
                touched_y[j - 1] = True

    add_constraint(a.base_k, a.base_j, Fraction(1))
    for j, k, w in a.k_weights:
        add_constraint(k, j, w)
    for j, t, w in a.t_weights:
        add_polyhedron_row(t, j, w)

    zeroed = sum(
        1
        for j in range(m)
        for i in range(n)
        if touched_q[j][i] and quad[j][i] == 0
    )
    zeroed += sum(1 for j in range(m) if touched_y[j] and lin_y[j] == 0)

    t_nonempty = {}
    for j, t, _ in a.t_weights:
        t_nonempty.setdefault(j, set()).add(t)
    if len(t_nonempty) == S.m + 1:
        common = None
        for s in t_nonempty.values():
            common = s if common is None else common & s
        disjoint = not common
    else:
        disjoint = True

    return BilinearExpr(
        quad=tuple(tuple(r) for r in quad),
        lin_x=tuple(lin_x),
        lin_y=tuple(lin_y),
        rhs=rhs,
        zeroed=zeroed,
        weight_count=len(a.k_weights) + len(a.t_weights),
        t_sets_disjoint=disjoint,
    )


MoveSpec = Union[str, Iterable[tuple[int, int]]]


def substitute(
    S: BilinearSet,
    expr: BilinearExpr,
    r0: MoveSpec = "auto",
    r34: MoveSpec = "auto",
) -> SubstitutionResult:
    """Reduce an aggregated inequality to a linear cut in the x variables.

    Order: bound substitutions for upper-bounded variables, then the two
    complementarity eliminations, then the positive-coefficient collapse of
    the remaining bilinear terms, then of the remaining y terms.  ``r0`` and
    ``r34`` accept "auto" (move every eligible coefficient, mirroring the
    closed-form derivations) or explicit (i, j) pair lists.

    The returned audit compares the coefficients cancelled during
    aggregation against the count the facet-necessity condition demands;
    failing it leaves the cut valid but certifies it is not facet-defining.
    """
    m, n = S.m, S.n
    quad = [list(row) for row in expr.quad]
    lin_y = list(expr.lin_y)
    lin_x = list(expr.lin_x)
    moves: list[Move] = []

    if r0 == "auto":
        r0_pairs = [
            (i, j)
            for i in sorted(S.upper_bounded)
            for j in range(1, m + 1)
            if quad[j - 1][i] > 0
        ]
    else:
        r0_pairs = [(int(i), int(j)) for i, j in r0]
    for i, j in r0_pairs:
        if i not in S.upper_bounded:
            raise ValidationError(f"x_{i} carries no scaled upper bound")
        u = quad[j - 1][i]
        if u <= 0:
            continue
        quad[j - 1][i] = Fraction(0)
        lin_y[j - 1] += u
        moves.append(Move("r0", i, j, u))

    for i, j in sorted(S.compl_pairs):
        u = quad[j - 1][i]
        if u != 0:
            quad[j - 1][i] = Fraction(0)
            moves.append(Move("compl_zero", i, j, u))

    if r34 == "auto":
        r34_pairs = [
            (i, j)
            for i, j in sorted(S.compl_complement_pairs)
            if quad[j - 1][i] < 0
        ]
        y_to_x: list[tuple[int, int]] = []
    else:
        r34_pairs = []
        y_to_x = []
        for i, j in r34:
            if quad[j - 1][i] < 0:
                r34_pairs.append((i, j))
            else:
                y_to_x.append((i, j))
    for i, j in r34_pairs:
        if (i, j) not in S.compl_complement_pairs:
            raise ValidationError(f"pair ({i},{j}) carries no complement relation")
        u = quad[j - 1][i]
        if u >= 0:
            continue
        quad[j - 1][i] = Fraction(0)
        lin_y[j - 1] += u
        moves.append(Move("compl_to_y", i, j, u))
    for i, j in y_to_x:
        if (i, j) not in S.compl_complement_pairs:
            raise ValidationError(f"pair ({i},{j}) carries no complement relation")
        u = lin_y[j - 1]
        if u > 0:
            lin_y[j - 1] = Fraction(0)
            quad[j - 1][i] += u
            moves.append(Move("y_to_x", i, j, u))

    p_values: list[Fraction] = []
    q_counts: list[int] = []
    for i in range(n):
        column = [quad[j][i] for j in range(m)]
        best = max(column, default=Fraction(0))
        if best > 0:
            p_values.append(best)
            q_counts.append(sum(1 for v in column if v == best))
        else:
            p_values.append(Fraction(0))
            q_counts.append(0)
        lin_x[i] += p_values[i]
    p0 = max(lin_y, default=Fraction(0))
    if p0 > 0:
        q0 = sum(1 for v in lin_y if v == p0)
    else:
        p0 = Fraction(0)
        q0 = 0
    rhs = expr.rhs - p0

    required = expr.weight_count
    required += (1 if q0 else 0) - q0
    required += sum((1 if q else 0) - q for q in q_counts)

    return SubstitutionResult(
        coefs=tuple(lin_x),
        rhs=rhs,
        p_values=tuple(p_values),
        q_counts=tuple(q_counts),
        p0=p0,
        q0=q0,
        zeroed=expr.zeroed,
        required=required,
        c1_satisfied=expr.zeroed >= required,
        moves=tuple(moves),
        t_sets_disjoint=expr.t_sets_disjoint,
        z_slot=S.z_slot,
    )


# ---------------------------------------------------------------------------
# The mixing reformulation


def build_sc(inst: MixingInstance) -> BilinearSet:
    """Lift a mixing instance to its bilinear reformulation on the simplex.

    x-block layout: slot 0 is z, slots 1..m are the binary indicators.  Five
    constraint groups (complement link both ways, the conditional bound on z,
    self-complementarity, and the prefix complement chain), then the box and
    knapsack rows of the deterministic polyhedron.
    """
    m = inst.m
    n = m + 1
    zero_row = tuple(Fraction(0) for _ in range(n))

    def unit(i: int, value: RationalLike = 1) -> tuple[Fraction, ...]:
        return tuple(rat(value) if k == i else Fraction(0) for k in range(n))

    constraints: list[BilinearConstraint] = []
    # (1 - x_i)(1 - sum y) >= 0
    for i in range(1, m + 1):
        A = tuple(unit(i) for _ in range(m))
        constraints.append(
            BilinearConstraint(A, unit(i, -1), tuple(Fraction(-1) for _ in range(m)),
                               Fraction(-1), label=f"complement+:{i}")
        )
    # -(1 - x_i)(1 - sum y) >= 0
    for i in range(1, m + 1):
        A = tuple(unit(i, -1) for _ in range(m))
        constraints.append(
            BilinearConstraint(A, unit(i), tuple(Fraction(1) for _ in range(m)),
                               Fraction(1), label=f"complement-:{i}")
        )
    # z y_i - h_i y_i >= 0
    for i in range(1, m + 1):
        A = tuple(unit(0) if j == i - 1 else zero_row for j in range(m))
        c = tuple(-inst.h_at(i) if j == i - 1 else Fraction(0) for j in range(m))
        constraints.append(
            BilinearConstraint(A, zero_row, c, Fraction(0), label=f"zbound:{i}")
        )
    # -x_i y_i >= 0
    for i in range(1, m + 1):
        A = tuple(unit(i, -1) if j == i - 1 else zero_row for j in range(m))
        constraints.append(
            BilinearConstraint(A, zero_row, tuple(Fraction(0) for _ in range(m)),
                               Fraction(0), label=f"self:{i}")
        )
    # -(1 - x_i) y_j >= 0 for i < j
    compl_complement_index = []
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            A = tuple(unit(i) if jj == j - 1 else zero_row for jj in range(m))
            c = tuple(Fraction(-1) if jj == j - 1 else Fraction(0) for jj in range(m))
            compl_complement_index.append(((i, j), len(constraints)))
            constraints.append(
                BilinearConstraint(A, zero_row, c, Fraction(0), label=f"prefix:{i}<{j}")
            )

    e_rows = []
    f = []
    upper_bound_row = []
    for i in range(1, m + 1):
        upper_bound_row.append((i, len(e_rows)))
        e_rows.append(unit(i, -1))
        f.append(Fraction(-1))
    e_rows.append(tuple([Fraction(0)] + [-q for q in inst.pi]))
    f.append(-inst.epsilon)

    compl_index = tuple(((i, i), 3 * m + i - 1) for i in range(1, m + 1))
    return BilinearSet(
        n=n,
        m=m,
        constraints=tuple(constraints),
        e_rows=tuple(e_rows),
        f=tuple(f),
        upper_bounded=frozenset(range(1, m + 1)),
        compl_pairs=frozenset((i, i) for i in range(1, m + 1)),
        compl_complement_pairs=frozenset(
            (i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)
        ),
        upper_bound_row=tuple(upper_bound_row),
        compl_index=compl_index,
        compl_complement_index=tuple(compl_complement_index),
        z_slot=0,
    )


def sc_constraint_index(S: BilinearSet, group: int, i: int, j: Optional[int] = None) -> int:
    """Index of a reformulation constraint by group (1..5) and scenario."""
    m = S.m
    if group in (1, 2, 3, 4):
        if not 1 <= i <= m:
            raise ValidationError(f"scenario {i} out of range")
        return (group - 1) * m + i - 1
    if group == 5:
        if j is None or not 1 <= i < j <= m:
            raise ValidationError("group 5 requires a pair i < j")
        lookup = dict(S.compl_complement_index)
        return lookup[(i, j)]
    raise ValidationError(f"unknown constraint group {group}")


def sc_restriction_witness(inst: MixingInstance, j: int):
    """Candidate feasible point (z, x, y) for the restriction y = e_j (e_0 = 0).

    These witnesses satisfy every bilinear constraint and the box bounds;
    the knapsack row additionally holds only when the fixed prefix mass fits
    under epsilon (always for j <= p + 1, never for j >= p + 2 unless the
    knapsack is vacuous).
    """
    m = inst.m
    if j == 0:
        return (Fraction(0), tuple(Fraction(1) for _ in range(m)), tuple(Fraction(0) for _ in range(m)))
    x = tuple(Fraction(0) if i == j else Fraction(1) for i in range(1, m + 1))
    y = tuple(Fraction(1) if i == j else Fraction(0) for i in range(1, m + 1))
    return (inst.h_at(j), x, y)


def point_satisfies_bilinear(S: BilinearSet, x: Sequence[Fraction], y: Sequence[Fraction]) -> bool:
    for con in S.constraints:
        total = con.d * -1
        total += sum(con.b[i] * x[i] for i in range(S.n))
        total += sum(con.c[j] * y[j] for j in range(S.m))
        for j in range(S.m):
            if y[j]:
                total += y[j] * sum(con.A[j][i] * x[i] for i in range(S.n))
        if total < 0:
            return False
    return True


def point_in_xi(S: BilinearSet, x: Sequence[Fraction]) -> bool:
    if any(v < 0 for v in x):
        return False
    return all(
        sum(row[i] * x[i] for i in range(S.n)) >= b
        for row, b in zip(S.e_rows, S.f)
    )


# ---------------------------------------------------------------------------
# Restrictions and the disjunctive view


def restriction_rows(S: BilinearSet, j: int) -> tuple[list[tuple[Fraction, ...]], list[Fraction]]:
    """H-representation of the x-space restriction at y = e_j (j = 0: y = 0)."""
    rows: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    for con in S.constraints:
        if j == 0:
            rows.append(con.b)
            rhs.append(con.d)
        else:
            rows.append(tuple(a + b for a, b in zip(con.A[j - 1], con.b)))
            rhs.append(con.d - con.c[j - 1])
    rows.extend(S.e_rows)
    rhs.extend(S.f)
    for i in range(S.n):
        rows.append(tuple(Fraction(1) if k == i else Fraction(0) for k in range(S.n)))
        rhs.append(Fraction(0))
    return rows, rhs


def restriction_generators(
    S: BilinearSet, j: int
) -> tuple[list[tuple[Fraction, ...]], list[tuple[int, ...]]]:
    rows, rhs = restriction_rows(S, j)
    return dd.polyhedron_generators(rows, rhs)


@dataclass(frozen=True)
class AssumptionReport:
    nonempty: tuple[bool, ...]  # indexed by j = 0..m
    recession_shared: bool
    recession: tuple[tuple[int, ...], ...]


def check_restrictions(S: BilinearSet) -> AssumptionReport:
    """Which restrictions are nonempty, and do the nonempty ones share a cone."""
    nonempty = []
    cones: list[tuple[tuple[int, ...], ...]] = []
    for j in range(S.m + 1):
        vertices, rays = restriction_generators(S, j)
        nonempty.append(bool(vertices))
        if vertices:
            cones.append(tuple(sorted(rays)))
    shared = all(c == cones[0] for c in cones) if cones else False
    recession = cones[0] if cones else ()
    return AssumptionReport(tuple(nonempty), shared, recession)


@dataclass(frozen=True)
class DisjunctiveSystem:
    """The extended-space relaxation in variables (x, y, u^1..u^m).

    Row layout follows the disjunctive-programming construction: per-piece
    copies of the bilinear restrictions and the polyhedron, tied together by
    the simplex weights.  ``rows . vars >= rhs`` with x first, then y, then
    the u blocks.
    """

    n: int
    m: int
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]

    @property
    def dim(self) -> int:
        return self.n + self.m + self.n * self.m


def build_disjunctive(S: BilinearSet) -> DisjunctiveSystem:
    """Assemble the lifted H-representation whose x-projection convexifies S.

    Requires at least one nonempty restriction with all nonempty restrictions
    sharing a recession cone; empty restrictions only contribute recession
    directions already present, so they are reported, not fatal.
    """
    report = check_restrictions(S)
    if not any(report.nonempty):
        raise ValidationError("every restriction is empty")
    if not report.recession_shared:
        raise ValidationError("nonempty restrictions have different recession cones")
    n, m = S.n, S.m
    dim = n + m + n * m

    def var_x(i: int) -> int:
        return i

    def var_y(j: int) -> int:  # j 1-based
        return n + j - 1

    def var_u(j: int, i: int) -> int:  # j 1-based
        return n + m + (j - 1) * n + i

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []

    def new_row() -> list[Fraction]:
        row = [Fraction(0)] * dim
        rows.append(row)
        return row

    for con in S.constraints:
        # b . (x - sum_j u^j) - d (1 - sum y) >= 0
        row = new_row()
        for i in range(n):
            if con.b[i]:
                row[var_x(i)] += con.b[i]
                for j in range(1, m + 1):
                    row[var_u(j, i)] -= con.b[i]
        for j in range(1, m + 1):
            row[var_y(j)] += con.d
        rhs.append(con.d)
        # (A_j + b) . u^j >= (d - c_j) y_j
        for j in range(1, m + 1):
            row = new_row()
            for i in range(n):
                coef = con.A[j - 1][i] + con.b[i]
                if coef:
                    row[var_u(j, i)] += coef
            row[var_y(j)] -= con.d - con.c[j - 1]
            rhs.append(Fraction(0))
    for t in range(S.tau):
        row = new_row()
        for i in range(n):
            if S.e_rows[t][i]:
                row[var_x(i)] += S.e_rows[t][i]
                for j in range(1, m + 1):
                    row[var_u(j, i)] -= S.e_rows[t][i]
        for j in range(1, m + 1):
            row[var_y(j)] += S.f[t]
        rhs.append(S.f[t])
        for j in range(1, m + 1):
            row = new_row()
            for i in range(n):
                if S.e_rows[t][i]:
                    row[var_u(j, i)] += S.e_rows[t][i]
            row[var_y(j)] -= S.f[t]
            rhs.append(Fraction(0))
    for i in range(n):
        row = new_row()
        row[var_x(i)] += 1
        for j in range(1, m + 1):
            row[var_u(j, i)] -= 1
        rhs.append(Fraction(0))
    for j in range(1, m + 1):
        for i in range(n):
            row = new_row()
            row[var_u(j, i)] += 1
            rhs.append(Fraction(0))
    row = new_row()
    for j in range(1, m + 1):
        row[var_y(j)] -= 1
    rhs.append(Fraction(-1))
    for j in range(1, m + 1):
        row = new_row()
        row[var_y(j)] += 1
        rhs.append(Fraction(0))

    return DisjunctiveSystem(n, m, tuple(tuple(r) for r in rows), tuple(rhs))


def projected_hull_generators(
    S: BilinearSet,
) -> tuple[list[tuple[Fraction, ...]], list[tuple[int, ...]]]:
    """Generators of the x-projection of the disjunctive hull.

    The projection is the convex hull of the nonempty restrictions plus the
    shared recession cone, so collecting each restriction's generators gives
    an exact V-representation without eliminating the lifted variables.
    """
    points: list[tuple[Fraction, ...]] = []
    rays: list[tuple[int, ...]] = []
    seen_rays: set = set()
    any_nonempty = False
    for j in range(S.m + 1):
        vertices, recession = restriction_generators(S, j)
        if vertices:
            any_nonempty = True
            points.extend(vertices)
        for r in recession:
            if r not in seen_rays:
                seen_rays.add(r)
                rays.append(r)
    if not any_nonempty:
        raise ValidationError("every restriction is empty")
    dedup = sorted(set(points))
    return dedup, rays


def projected_hull_facets(S: BilinearSet) -> list[LinearCut]:
    """Facets of the disjunctive projection, as cuts over the x-block."""
    points, rays = projected_hull_generators(S)
    gens = [linalg.primitive(p + (Fraction(1),)) for p in points]
    gens.extend(linalg.primitive(tuple(r) + (0,)) for r in rays)
    facets = []
    for a in dd.dual_rays(gens):
        body, a0 = a[:-1], a[-1]
        if all(v == 0 for v in body):
            continue
        if S.z_slot is not None:
            cut = LinearCut(
                Fraction(body[S.z_slot]),
                tuple(Fraction(v) for k, v in enumerate(body) if k != S.z_slot),
                Fraction(-a0),
            )
        else:
            cut = LinearCut(Fraction(0), tuple(Fraction(v) for v in body), Fraction(-a0))
        facets.append(canonicalize(cut))
    return sorted(facets, key=LinearCut.sort_key)


# ---------------------------------------------------------------------------
# Projection-cone certificates


def _extended_weights(
    S: BilinearSet, a: BlpAssignment, moves: Sequence[Move]
) -> tuple[dict[tuple[int, int], Fraction], dict[tuple[int, int], Fraction]]:
    """Aggregation weights augmented with the weights implied by substitutions."""
    alphas: dict[tuple[int, int], Fraction] = {(a.base_j, a.base_k): Fraction(1)}
    betas: dict[tuple[int, int], Fraction] = {}
    for j, k, w in a.k_weights:
        alphas[(j, k)] = alphas.get((j, k), Fraction(0)) + w
    for j, t, w in a.t_weights:
        betas[(j, t)] = betas.get((j, t), Fraction(0)) + w
    bound_row = dict(S.upper_bound_row)
    compl_idx = dict(S.compl_index)
    compl_comp_idx = dict(S.compl_complement_index)
    for mv in moves:
        if mv.kind == "r0":
            t = bound_row[mv.i]
            betas[(mv.j, t)] = betas.get((mv.j, t), Fraction(0)) + mv.amount
        elif mv.kind == "compl_zero":
            if mv.amount > 0:
                k = compl_idx[(mv.i, mv.j)]
                alphas[(mv.j, k)] = alphas.get((mv.j, k), Fraction(0)) + mv.amount
            # negative coefficients are absorbed by the completion multipliers
        elif mv.kind == "compl_to_y":
            k = compl_comp_idx[(mv.i, mv.j)]
            alphas[(mv.j, k)] = alphas.get((mv.j, k), Fraction(0)) - mv.amount
        elif mv.kind == "y_to_x":
            k = compl_comp_idx[(mv.i, mv.j)]
            alphas[(mv.j, k)] = alphas.get((mv.j, k), Fraction(0)) + mv.amount
    return alphas, betas


def assemble_dual(
    S: BilinearSet, a: BlpAssignment, result: SubstitutionResult
) -> tuple[Fraction, ...]:
    """Dual vector certifying a substitution's cut via the projection cone.

    The aggregation and substitution weights determine the first two blocks;
    the last two are the canonical completion (columnwise positive part of
    the residual bilinear matrix, and its per-scenario slack).
    """
    alphas, betas = _extended_weights(S, a, result.moves)
    extended = BlpAssignment(
        base_k=a.base_k,
        base_j=a.base_j,
        k_weights=tuple(
            (j, k, w)
            for (j, k), w in sorted(alphas.items())
            if w != 0 and (j, k) != (a.base_j, a.base_k)
        ),
        t_weights=tuple((j, t, w) for (j, t), w in sorted(betas.items()) if w != 0),
    )
    expr = aggregate(S, extended)
    n, m = S.n, S.m
    gamma0 = [
        max((expr.quad[j][i] for j in range(m)), default=Fraction(0))
        for i in range(n)
    ]
    gamma0 = [g if g > 0 else Fraction(0) for g in gamma0]
    theta0 = max(expr.lin_y, default=Fraction(0))
    theta0 = theta0 if theta0 > 0 else Fraction(0)

    dual: list[Fraction] = []
    for j in range(m + 1):
        for k in range(S.kappa):
            dual.append(alphas.get((j, k), Fraction(0)))
    for j in range(m + 1):
        for t in range(S.tau):
            dual.append(betas.get((j, t), Fraction(0)))
    dual.extend(gamma0)
    for j in range(m):
        dual.extend(gamma0[i] - expr.quad[j][i] for i in range(n))
    dual.append(theta0)
    dual.extend(theta0 - expr.lin_y[j] for j in range(m))
    return tuple(dual)


def cone_membership(
    S: BilinearSet, dual: Sequence[RationalLike]
) -> tuple[bool, Optional[LinearCut]]:
    """Is the weight vector in the projection cone; if so, its projected cut.

    Layout: alpha blocks j = 0..m (each kappa long), beta blocks j = 0..m
    (each tau long), gamma blocks j = 0..m (each n long), then theta_0..m.
    """
    n, m, kappa, tau = S.n, S.m, S.kappa, S.tau
    expected = (m + 1) * (kappa + tau + n + 1)
    vec = [rat(v) for v in dual]
    if len(vec) != expected:
        raise ValidationError(f"dual vector must have length {expected}")
    if any(v < 0 for v in vec):
        return False, None
    pos = 0
    alpha = [vec[pos + j * kappa : pos + (j + 1) * kappa] for j in range(m + 1)]
    pos += (m + 1) * kappa
    beta = [vec[pos + j * tau : pos + (j + 1) * tau] for j in range(m + 1)]
    pos += (m + 1) * tau
    gamma = [vec[pos + j * n : pos + (j + 1) * n] for j in range(m + 1)]
    pos += (m + 1) * n
    theta = vec[pos : pos + m + 1]

    for j in range(1, m + 1):
        for i in range(n):
            total = gamma[j][i] - gamma[0][i]
            for k, con in enumerate(S.constraints):
                total += (con.A[j - 1][i] + con.b[i]) * alpha[j][k]
                total -= con.b[i] * alpha[0][k]
            for t in range(tau):
                total += S.e_rows[t][i] * (beta[j][t] - beta[0][t])
            if total != 0:
                return False, None
        total = theta[j] - theta[0]
        for k, con in enumerate(S.constraints):
            total += (con.c[j - 1] - con.d) * alpha[j][k]
            total += con.d * alpha[0][k]
        for t in range(tau):
            total += S.f[t] * (beta[0][t] - beta[j][t])
        if total != 0:
            return False, None

    coefs = []
    for i in range(n):
        c = gamma[0][i]
        for k, con in enumerate(S.constraints):
            c += con.b[i] * alpha[0][k]
        for t in range(tau):
            c += S.e_rows[t][i] * beta[0][t]
        coefs.append(c)
    rhs = -theta[0]
    for k, con in enumerate(S.constraints):
        rhs += con.d * alpha[0][k]
    for t in range(tau):
        rhs += S.f[t] * beta[0][t]
    if S.z_slot is not None:
        cut = LinearCut(
            coefs[S.z_slot],
            tuple(c for i, c in enumerate(coefs) if i != S.z_slot),
            rhs,
        )
    else:
        cut = LinearCut(Fraction(0), tuple(coefs), rhs)
    return True, cut


# ---------------------------------------------------------------------------
# Serialization


def bilinear_set_to_json(S: BilinearSet) -> str:
    import json

    payload = {
        "n": S.n,
        "m": S.m,
        "constraints": [
            {
                "A": [[rat_str(v) for v in row] for row in con.A],
                "b": [rat_str(v) for v in con.b],
                "c": [rat_str(v) for v in con.c],
                "d": rat_str(con.d),
                "label": con.label,
            }
            for con in S.constraints
        ],
        "E": [[rat_str(v) for v in row] for row in S.e_rows],
        "f": [rat_str(v) for v in S.f],
        "upper_bounded": sorted(S.upper_bounded),
        "compl_pairs": sorted(map(list, S.compl_pairs)),
        "compl_complement_pairs": sorted(map(list, S.compl_complement_pairs)),
        "z_slot": S.z_slot,
    }
    return json.dumps(payload)


def bilinear_set_from_json(text: str) -> BilinearSet:
    import json

    payload = json.loads(text)
    n, m = int(payload["n"]), int(payload["m"])
    constraints = tuple(
        BilinearConstraint(
            A=tuple(tuple(rat(v) for v in row) for row in con["A"]),
            b=tuple(rat(v) for v in con["b"]),
            c=tuple(rat(v) for v in con["c"]),
            d=rat(con["d"]),
            label=con.get("label", ""),
        )
        for con in payload["constraints"]
    )
    e_rows = tuple(tuple(rat(v) for v in row) for row in payload["E"])
    f = tuple(rat(v) for v in payload["f"])
    compl = frozenset(tuple(p) for p in payload.get("compl_pairs", []))
    complc = frozenset(tuple(p) for p in payload.get("compl_complement_pairs", []))
    upper = frozenset(payload.get("upper_bounded", []))
    bound_row = tuple(
        (i, t)
        for i in sorted(upper)
        for t, row in enumerate(e_rows)
        if row[i] == -1 and f[t] == -1 and all(v == 0 for k, v in enumerate(row) if k != i)
    )
    compl_index = tuple(
        (pair, k)
        for pair in sorted(compl)
        for k, con in enumerate(constraints)
        if _is_compl_constraint(con, pair, n, m)
    )
    complc_index = tuple(
        (pair, k)
        for pair in sorted(complc)
        for k, con in enumerate(constraints)
        if _is_compl_complement_constraint(con, pair, n, m)
    )
    return BilinearSet(
        n=n,
        m=m,
        constraints=constraints,
        e_rows=e_rows,
        f=f,
        upper_bounded=upper,
        compl_pairs=compl,
        compl_complement_pairs=complc,
        upper_bound_row=bound_row,
        compl_index=compl_index,
        compl_complement_index=complc_index,
        z_slot=payload.get("z_slot"),
    )


def _is_compl_constraint(con: BilinearConstraint, pair: tuple[int, int], n: int, m: int) -> bool:
    i, j = pair
    if con.d != 0 or any(v != 0 for v in con.b) or any(v != 0 for v in con.c):
        return False
    for jj in range(m):
        for ii in range(n):
            want = Fraction(-1) if (ii, jj) == (i, j - 1) else Fraction(0)
            if con.A[jj][ii] != want:
                return False
    return True


def _is_compl_complement_constraint(
    con: BilinearConstraint, pair: tuple[int, int], n: int, m: int
) -> bool:
    i, j = pair
    if con.d != 0 or any(v != 0 for v in con.b):
        return False
    for jj in range(m):
        want_c = Fraction(-1) if jj == j - 1 else Fraction(0)
        if con.c[jj] != want_c:
            return False
        for ii in range(n):
            want = Fraction(1) if (ii, jj) == (i, j - 1) else Fraction(0)
            if con.A[jj][ii] != want:
                return False
    return True


def assignment_to_json(a: BlpAssignment) -> str:
    import json

    payload = {
        "base": [a.base_k, a.base_j],
        "k_weights": [[j, k, rat_str(w)] for j, k, w in a.k_weights],
        "t_weights": [[j, t, rat_str(w)] for j, t, w in a.t_weights],
    }
    return json.dumps(payload)


def assignment_from_json(text: str) -> BlpAssignment:
    import json

    payload = json.loads(text)
    base_k, base_j = payload["base"]
    return BlpAssignment.build(
        base_k,
        base_j,
        [(j, k, w) for j, k, w in payload.get("k_weights", [])],
        [(j, t, w) for j, t, w in payload.get("t_weights", [])],
    )
