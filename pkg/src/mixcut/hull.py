"""Exact facet enumeration for the convex hull of a mixing instance.

The hull is conv(minimal vertices) + cone{(1, 0)}.  Homogenizing lifts each
vertex to (z, x, 1) and the ray to (1, 0, 0); the facets are then the extreme
rays of the dual cone, which the double-description engine enumerates
exactly.  Float hulls mis-merge near-parallel facet normals, which would
corrupt the coverage counts, so everything here stays rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import json

from . import dd, linalg
from .core import (
    LinearCut,
    MixingInstance,
    ValidationError,
    Vertex,
    canonicalize,
    cut_is_valid,
    cut_from_json,
    cut_to_json,
    enumerate_vertices,
    vertex_from_dict,
    vertex_to_dict,
)

BudgetExceeded = dd.BudgetExceeded


class InvalidCutError(ValidationError):
    """Facet test invoked on a cut that is not even valid."""


@dataclass(frozen=True)
class FacetSet:
    """Complete facet description of one instance's hull.

    ``nonvertical`` facets have z coefficient 1 after canonicalization (the
    recession ray forces the sign), ``vertical`` ones have z coefficient 0
    and are implied by the box/knapsack polyhedron alone.
    """

    instance: MixingInstance
    facets: tuple[LinearCut, ...]
    nonvertical: tuple[LinearCut, ...]
    vertical: tuple[LinearCut, ...]
    vertices: tuple[Vertex, ...]


def lifted_generators(inst: MixingInstance) -> list[tuple[int, ...]]:
    """Homogenized generators: the ray first, then vertices in lex order."""
    gens: list[tuple[int, ...]] = [tuple([1] + [0] * (inst.m + 1))]
    for v in enumerate_vertices(inst):
        gens.append(linalg.primitive((v.z,) + tuple(Fraction(b) for b in v.x) + (Fraction(1),)))
    return gens


def enumerate_facets(
    inst: MixingInstance,
    budget_seconds: Optional[float] = None,
    step_limit: Optional[int] = None,
) -> FacetSet:
    """The complete, irredundant, canonical facet list of the hull.

    Raises :class:`BudgetExceeded` when the configured guard trips; a partial
    list is never returned.
    """
    budget = None
    if budget_seconds or step_limit:
        budget = dd.Budget(seconds=budget_seconds, steps=step_limit)
    gens = lifted_generators(inst)
    normals = dd.dual_rays(gens, budget)
    return _facetset_from_normals(inst, normals)


def _facetset_from_normals(inst: MixingInstance, normals) -> FacetSet:
    nonvertical = []
    vertical = []
    for a in normals:
        z, xs, a0 = a[0], a[1:-1], a[-1]
        if z == 0 and all(c == 0 for c in xs):
            continue  # constant inequality, not a facet of a full-dimensional hull
        cut = canonicalize(LinearCut(Fraction(z), tuple(Fraction(c) for c in xs), Fraction(-a0)))
        if cut.z_coef == 0:
            vertical.append(cut)
        else:
            nonvertical.append(cut)
    nonvertical.sort(key=LinearCut.sort_key)
    vertical.sort(key=LinearCut.sort_key)
    return FacetSet(
        instance=inst,
        facets=tuple(nonvertical + vertical),
        nonvertical=tuple(nonvertical),
        vertical=tuple(vertical),
        vertices=enumerate_vertices(inst),
    )


@lru_cache(maxsize=256)
def cached_facets(inst: MixingInstance) -> FacetSet:
    """Unguarded, memoized hull; callers needing budgets use enumerate_facets."""
    return enumerate_facets(inst)


def is_facet(inst: MixingInstance, cut: LinearCut) -> bool:
    """Rank test: does the cut's tight set span an m-dimensional face?

    The tight set consists of the vertices where the cut holds with equality,
    plus the recession ray when the z coefficient is zero.  The hull is full
    dimensional, so a facet needs affine rank m + 1.
    """
    cut = canonicalize(cut)
    if not cut_is_valid(inst, cut):
        raise InvalidCutError("facet test requires a valid cut")
    tight_points = [
        (v.z,) + tuple(Fraction(b) for b in v.x)
        for v in enumerate_vertices(inst)
        if cut.evaluate(v.z, v.x) == cut.rhs
    ]
    directions = []
    if cut.z_coef == 0:
        directions.append(tuple([Fraction(1)] + [Fraction(0)] * inst.m))
    return linalg.affine_rank(tight_points, directions) == inst.m + 1


# ---------------------------------------------------------------------------
# Independent oracles (tests / acceptance only)


def facets_by_wrapping(inst: MixingInstance, budget_steps: Optional[int] = None) -> FacetSet:
    """Cross-oracle facet list via ridge-pivot wrapping (no double description).

    (1, 0, ..., 0, 1) is strictly positive on every lifted generator, which
    seeds the wrapping.
    """
    gens = lifted_generators(inst)
    interior = tuple([1] + [0] * inst.m + [1])
    budget = dd.Budget(steps=budget_steps) if budget_steps else None
    normals = dd.facet_normals_by_wrapping(gens, interior, budget)
    return _facetset_from_normals(inst, normals)


def facets_by_hyperplane_search(
    inst: MixingInstance, max_subsets: Optional[int] = None
) -> FacetSet:
    """Brute-force oracle: all valid hyperplanes through m+1 independent generators."""
    gens = lifted_generators(inst)
    normals = dd.facet_normals_by_hyperplane_search(gens, max_subsets)
    return _facetset_from_normals(inst, normals)


# ---------------------------------------------------------------------------
# Serialization


def facetset_to_json(fs: FacetSet) -> str:
    payload = {
        "vertices": [vertex_to_dict(v) for v in fs.vertices],
        "facets": [json.loads(cut_to_json(c)) for c in fs.facets],
        "vertical_count": len(fs.vertical),
    }
    return json.dumps(payload)


def facetset_from_json(inst: MixingInstance, text: str) -> FacetSet:
    payload = json.loads(text)
    facets = tuple(cut_from_json(json.dumps(c)) for c in payload["facets"])
    vertices = tuple(vertex_from_dict(v) for v in payload["vertices"])
    nonvertical = tuple(c for c in facets if c.z_coef != 0)
    vertical = tuple(c for c in facets if c.z_coef == 0)
    if len(vertical) != payload["vertical_count"]:
        raise ValidationError("vertical_count does not match the facet list")
    return FacetSet(inst, facets, nonvertical, vertical, vertices)
