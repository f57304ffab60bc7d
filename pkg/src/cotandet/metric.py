"""Discrete metrics and the per-face geometry they induce.

A discrete metric assigns a positive length to every edge such that the
three sides of every face satisfy strict triangle inequalities. Angles,
areas, curvature and realizability all derive from plain Euclidean triangle
formulas applied face by face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .mesh import Edge, Triangle, Triangulation, _normalize_edge

CONVENTIONS = ("paper", "standard")


class InvalidMetricError(ValueError):
    """Missing lengths, non-positive lengths, or violated triangle inequalities."""

    def __init__(self, message: str, violations: tuple = ()):
        super().__init__(message)
        self.violations = violations


class MetricFormatError(ValueError):
    """A metric file could not be parsed."""


@dataclass(frozen=True)
class DiscreteMetric:
    """Positive length per edge, keyed by canonical (sorted) edge tuples."""

    lengths: Mapping[Edge, float]

    def __init__(self, lengths: Mapping[Iterable[int], float]):
        normalized = {}
        for e, value in lengths.items():
            edge = _normalize_edge(e)
            v = float(value)
            if not v > 0.0:
                raise InvalidMetricError(f"length of edge {edge} must be positive, got {v}")
            normalized[edge] = v
        object.__setattr__(self, "lengths", normalized)

    def __getitem__(self, e: Iterable[int]) -> float:
        return self.lengths[_normalize_edge(e)]

    def as_vector(self, t: Triangulation) -> np.ndarray:
        """Lengths aligned with ``t.edge_list``."""
        try:
            return np.array([self.lengths[e] for e in t.edge_list], dtype=float)
        except KeyError as exc:
            raise InvalidMetricError(f"metric is missing a length for edge {exc.args[0]}") from None

    @classmethod
    def from_vector(cls, t: Triangulation, values) -> "DiscreteMetric":
        vec = np.asarray(values, dtype=float)
        if vec.shape != (len(t.edge_list),):
            raise InvalidMetricError(
                f"expected {len(t.edge_list)} lengths, got shape {vec.shape}")
        return cls(dict(zip(t.edge_list, vec)))

    def replaced(self, updates: Mapping[Iterable[int], float]) -> "DiscreteMetric":
        """New metric with some edge lengths overridden."""
        merged = dict(self.lengths)
        merged.update({_normalize_edge(e): float(v) for e, v in updates.items()})
        return DiscreteMetric(merged)


@dataclass(frozen=True)
class CornerAngles:
    """Angle in radians at each (triangle, vertex) incidence."""

    angles: Mapping[tuple[Triangle, int], float]

    def at(self, tri: Triangle, vertex: int) -> float:
        return self.angles[(tri, vertex)]

    def opposite(self, tri: Triangle, edge: Edge) -> float:
        """Angle at the vertex of ``tri`` facing ``edge``."""
        (k,) = set(tri) - set(edge)
        return self.angles[(tri, k)]


@dataclass(frozen=True)
class CurvatureVector:
    values: np.ndarray
    convention: str


def uniform_metric(t: Triangulation, l0: float) -> DiscreteMetric:
    """The equilateral metric: every edge gets length ``l0`` (angles all pi/3)."""
    if not l0 > 0.0:
        raise InvalidMetricError(f"l0 must be positive, got {l0}")
    return DiscreteMetric({e: l0 for e in t.edges})


def validate_metric(t: Triangulation, m: DiscreteMetric) -> list[tuple[Triangle, str]]:
    """Return the violated (strict) triangle inequalities, one entry per failure.

    An empty list means ``m`` is a valid discrete metric on ``t``. A missing
    edge length is an error, not a violation.
    """
    violations: list[tuple[Triangle, str]] = []
    for e in t.edge_list:
        if e not in m.lengths:
            raise InvalidMetricError(f"metric is missing a length for edge {e}")
    for tri in t.triangle_list:
        a, b, c = tri
        lab, lac, lbc = m[(a, b)], m[(a, c)], m[(b, c)]
        if not lab < lac + lbc:
            violations.append((tri, f"l{a}{b} >= l{a}{c} + l{b}{c} ({lab} >= {lac} + {lbc})"))
        if not lac < lab + lbc:
            violations.append((tri, f"l{a}{c} >= l{a}{b} + l{b}{c} ({lac} >= {lab} + {lbc})"))
        if not lbc < lab + lac:
            violations.append((tri, f"l{b}{c} >= l{a}{b} + l{a}{c} ({lbc} >= {lab} + {lac})"))
    return violations


def _require_valid(t: Triangulation, m: DiscreteMetric) -> None:
    violations = validate_metric(t, m)
    if violations:
        raise InvalidMetricError(
            f"invalid discrete metric: {len(violations)} triangle inequality violation(s), "
            f"first: triangle {violations[0][0]}: {violations[0][1]}",
            violations=tuple(violations),
        )


def _corner_angle(l_adj1: float, l_adj2: float, l_opp: float) -> float:
    # Clamp so near-degenerate faces give 0 or pi instead of NaN.
    cosine = (l_adj1 * l_adj1 + l_adj2 * l_adj2 - l_opp * l_opp) / (2.0 * l_adj1 * l_adj2)
    return math.acos(min(1.0, max(-1.0, cosine)))


def corner_angles(t: Triangulation, m: DiscreteMetric) -> CornerAngles:
    """Law-of-cosines angle at every (triangle, vertex) pair of a valid metric."""
    _require_valid(t, m)
    angles = {}
    for tri in t.triangle_list:
        a, b, c = tri
        lab, lac, lbc = m[(a, b)], m[(a, c)], m[(b, c)]
        angles[(tri, a)] = _corner_angle(lab, lac, lbc)
        angles[(tri, b)] = _corner_angle(lab, lbc, lac)
        angles[(tri, c)] = _corner_angle(lac, lbc, lab)
    return CornerAngles(angles)


def _heron(a: float, b: float, c: float) -> float:
    s = 0.5 * (a + b + c)
    return math.sqrt(max(s * (s - a) * (s - b) * (s - c), 0.0))


def triangle_areas(t: Triangulation, m: DiscreteMetric) -> dict[Triangle, float]:
    """Heron area of every face."""
    _require_valid(t, m)
    return {tri: _heron(m[(tri[0], tri[1])], m[(tri[0], tri[2])], m[(tri[1], tri[2])])
            for tri in t.triangle_list}


def local_area_elements(t: Triangulation, m: DiscreteMetric) -> dict[int, float]:
    """A_i = one third of the total area of the faces meeting vertex i.

    Summing over vertices recovers the total area exactly (each face is
    counted three times at weight 1/3).
    """
    areas = triangle_areas(t, m)
    out = {i: 0.0 for i in range(t.vertex_count)}
    for tri, area in areas.items():
        share = area / 3.0
        for v in tri:
            out[v] += share
    return out


def total_area(t: Triangulation, m: DiscreteMetric) -> float:
    return sum(triangle_areas(t, m).values())


def gaussian_curvature(t: Triangulation, m: DiscreteMetric,
                       convention: str = "paper") -> CurvatureVector:
    """Angle defect at each vertex.

    convention="paper": K_i = pi - sum of angles at i.
    convention="standard": K_i = 2*pi - sum of angles at i (satisfies
    Gauss-Bonnet, sum K_i = 2*pi*chi).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    angles = corner_angles(t, m)
    angle_sum = np.zeros(t.vertex_count)
    for (tri, v), angle in angles.angles.items():
        angle_sum[v] += angle
    base = math.pi if convention == "paper" else 2.0 * math.pi
    return CurvatureVector(values=base - angle_sum, convention=convention)


def cayley_menger_tetrahedron(lengths: Mapping[Iterable[int], float]) -> float:
    """Cayley-Menger determinant for four points with the given pairwise lengths.

    The bordered 5x5 matrix has zero diagonal, a first row and column of
    ones, and squared lengths elsewhere. Positive values certify that the
    six lengths are realized by a nondegenerate tetrahedron in 3-space;
    all-unit lengths give exactly 4.
    """
    table = {_normalize_edge(e): float(v) for e, v in lengths.items()}
    expected = {(i, j) for i in range(4) for j in range(i + 1, 4)}
    if set(table) != expected:
        raise ValueError(f"need lengths for exactly the 6 vertex pairs of K4, got {sorted(table)}")
    mat = np.zeros((5, 5))
    mat[0, 1:] = 1.0
    mat[1:, 0] = 1.0
    for (i, j), l in table.items():
        mat[i + 1, j + 1] = mat[j + 1, i + 1] = l * l
    return float(np.linalg.det(mat))


def save_metric(m: DiscreteMetric, path) -> None:
    """Write the text format: one `length i j v` line per edge."""
    with open(path, "w", encoding="utf-8") as fh:
        for (i, j), v in sorted(m.lengths.items()):
            fh.write(f"length {i} {j} {v!r}\n")


def load_metric(t: Triangulation, path) -> DiscreteMetric:
    """Parse a metric file for ``t``; every edge of ``t`` must get one length."""
    lengths: dict[Edge, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if fields[0] != "length" or len(fields) != 4:
                raise MetricFormatError(f"{path}:{lineno}: expected 'length i j v'")
            try:
                i, j = int(fields[1]), int(fields[2])
                v = float(fields[3])
            except ValueError:
                raise MetricFormatError(f"{path}:{lineno}: malformed numbers in {line!r}") from None
            edge = _normalize_edge((i, j))
            if edge not in t.edges:
                raise MetricFormatError(f"{path}:{lineno}: edge {edge} not in the triangulation")
            if edge in lengths:
                raise MetricFormatError(f"{path}:{lineno}: duplicate length for edge {edge}")
            lengths[edge] = v
    missing = sorted(t.edges - set(lengths))
    if missing:
        raise InvalidMetricError(f"{path}: missing lengths for edges {missing}")
    return DiscreteMetric(lengths)
