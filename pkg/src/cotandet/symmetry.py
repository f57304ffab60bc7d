"""Graph-distance machinery and distance-class structure of matrix inverses.

A connected graph is *strongly symmetric* when alpha_s(i, j), the number of
neighbors of i at distance s from j, depends only on s and the distance
L(i, j). On such graphs the inverse of any matrix x*I + y*A (A the 0/1
adjacency matrix) is constant on distance classes, and the class values
x_0 .. x_L solve a short linear recursion. Both facts are made checkable
here: a closed form for complete graphs, the recursion for the general
case, and a dense-inversion spread check usable on any graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .mesh import Triangulation


class SingularPatternError(ValueError):
    """The requested (x, y) lies in the singular set of the pattern matrix."""


@dataclass(frozen=True)
class SymmetryProfile:
    """Distance matrix, neighbor-count table, and the symmetry verdict.

    ``alpha_table`` maps (ell, s) to alpha_s(ell) and omits zero entries; it
    is only populated when the graph is strongly symmetric. On failure,
    ``witness`` holds two vertex pairs at equal distance whose neighbor
    counts differ: (pair_a, pair_b, s, count_a, count_b).
    """

    distance_matrix: np.ndarray
    diameter: int
    alpha_table: Mapping[tuple[int, int], int]
    is_strongly_symmetric: bool
    witness: tuple | None = None

    def alpha(self, s: int, ell: int) -> int:
        """alpha_s(ell); zero when absent from the table."""
        return self.alpha_table.get((ell, s), 0)

    @property
    def degree(self) -> int:
        return self.alpha(1, 0)


@dataclass(frozen=True)
class PatternMatrix:
    """B = x*I + y*A on the edge graph of a triangulation."""

    graph: Triangulation
    x: complex | float
    y: complex | float

    def materialize(self) -> np.ndarray:
        n = self.graph.vertex_count
        dtype = complex if isinstance(self.x, complex) or isinstance(self.y, complex) else float
        mat = np.zeros((n, n), dtype=dtype)
        np.fill_diagonal(mat, self.x)
        for i, j in self.graph.edges:
            mat[i, j] = mat[j, i] = self.y
        return mat


@dataclass(frozen=True)
class StructuredInverse:
    """Inverse values by distance class: c_ij = values[L(i, j)]."""

    values: tuple
    valid: bool
    max_residual: float


@dataclass(frozen=True)
class DistanceClassCheck:
    """Per-distance-class spread of a densely inverted matrix."""

    is_constant: bool
    spreads: Mapping[int, float]
    class_means: Mapping[int, complex | float]


def distance_matrix(t: Triangulation) -> np.ndarray:
    """All-pairs shortest path lengths by BFS from every vertex."""
    n = t.vertex_count
    dist = np.full((n, n), -1, dtype=int)
    for source in range(n):
        dist[source, source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in t.neighbors[v]:
                if dist[source, w] < 0:
                    dist[source, w] = dist[source, v] + 1
                    queue.append(w)
    if np.any(dist < 0):
        raise ValueError("graph is disconnected; distances are undefined")
    return dist


def symmetry_profile(t: Triangulation) -> SymmetryProfile:
    """Classify the edge graph by comparing neighbor-count tables per distance class.

    Classes are scanned in order of increasing distance, so an irregular
    graph is witnessed by its degree mismatch (the distance-0 class) before
    anything subtler.
    """
    dist = distance_matrix(t)
    n = t.vertex_count
    diameter = int(dist.max())

    def neighbor_counts(i: int, j: int) -> dict[int, int]:
        counts: dict[int, int] = {}
        for k in t.neighbors[i]:
            s = int(dist[k, j])
            counts[s] = counts.get(s, 0) + 1
        return counts

    reference: dict[int, dict[int, int]] = {}
    for ell in range(diameter + 1):
        pairs = [(i, j) for i in range(n) for j in range(n) if dist[i, j] == ell]
        ref_pair = pairs[0]
        reference[ell] = ref_counts = neighbor_counts(*ref_pair)
        for pair in pairs[1:]:
            counts = neighbor_counts(*pair)
            if counts != ref_counts:
                s = next(s for s in sorted(set(ref_counts) | set(counts))
                         if ref_counts.get(s, 0) != counts.get(s, 0))
                witness = (ref_pair, pair, s, ref_counts.get(s, 0), counts.get(s, 0))
                return SymmetryProfile(
                    distance_matrix=dist,
                    diameter=diameter,
                    alpha_table={},
                    is_strongly_symmetric=False,
                    witness=witness,
                )
    table = {(ell, s): c
             for ell, counts in sorted(reference.items())
             for s, c in sorted(counts.items()) if c != 0}
    return SymmetryProfile(
        distance_matrix=dist,
        diameter=diameter,
        alpha_table=table,
        is_strongly_symmetric=True,
    )


def _adjacency_int(t: Triangulation) -> np.ndarray:
    # dtype=object keeps entries as Python ints, so powers never overflow.
    n = t.vertex_count
    a = np.zeros((n, n), dtype=object)
    for i, j in t.edges:
        a[i, j] = a[j, i] = 1
    return a


def path_count_matrix(t: Triangulation, m_steps: int) -> np.ndarray:
    """All-pairs walk counts of length ``m_steps`` in exact integer arithmetic."""
    if m_steps < 0:
        raise ValueError(f"m_steps must be >= 0, got {m_steps}")
    n = t.vertex_count
    power = np.identity(n, dtype=object)
    if m_steps:
        adjacency = _adjacency_int(t)
        for _ in range(m_steps):
            power = power @ adjacency
    return power


def path_count(t: Triangulation, m_steps: int, i: int, j: int) -> int:
    """Number of walks of length ``m_steps`` from i to j."""
    return int(path_count_matrix(t, m_steps)[i, j])


def complete_pattern_inverse(n: int, x, y) -> tuple:
    """Entries of (x*I + y*(J - I))^{-1}: constant diagonal and off-diagonal.

    Works over any field Python arithmetic supports (float, complex,
    Fraction). The denominator (x - y) * (x + (n-1) y) must be nonzero.
    """
    denom = (x - y) * (x + (n - 1) * y)
    tol = 1e-12 * max(abs(x), abs(y), 1.0) ** 2
    if abs(denom) <= tol:
        raise SingularPatternError(
            f"(x - y)(x + (n-1)y) = {denom} is singular for n={n}, x={x}, y={y}")
    c_diag = (x + (n - 2) * y) / denom
    c_off = -y / denom
    return c_diag, c_off


def recursion_inverse(profile: SymmetryProfile, x, y,
                      residual_tol: float = 1e-9) -> StructuredInverse:
    """Solve for the distance-class values of (x*I + y*A)^{-1}.

    The diagonal equation and the per-distance off-diagonal equations
    express x_1 .. x_L as affine functions of x_0; the maximal-distance
    equation then closes the system. Validity is confirmed by rebuilding
    C with c_ij = x_{L(i,j)} and checking B @ C against the identity.
    """
    if not profile.is_strongly_symmetric:
        raise ValueError("recursion needs a strongly symmetric profile")
    L = profile.diameter
    if y == 0:
        if abs(x) <= 1e-300:
            raise SingularPatternError("x = y = 0 has no inverse")
        values = tuple([1.0 / x] + [0.0] * L)
        return _validated(profile, x, y, values, residual_tol)
    # x_ell = affine[ell][0] + affine[ell][1] * x_0
    degree = profile.alpha(1, 0)
    affine = [(0.0, 1.0), (1.0 / (degree * y), -x / (degree * y))]
    for ell in range(1, L):
        a_prev, b_prev = affine[ell - 1]
        a_cur, b_cur = affine[ell]
        step_down = profile.alpha(ell - 1, ell)
        stay = profile.alpha(ell, ell)
        step_up = profile.alpha(ell + 1, ell)
        if step_up == 0:
            raise ValueError(
                f"alpha_{ell + 1}({ell}) vanished below the diameter; profile is inconsistent")
        denom = step_up * y
        affine.append((
            -(x * a_cur + step_down * y * a_prev + stay * y * a_cur) / denom,
            -(x * b_cur + step_down * y * b_prev + stay * y * b_cur) / denom,
        ))
    a_last, b_last = affine[L]
    a_prev, b_prev = affine[L - 1]
    step_down = profile.alpha(L - 1, L)
    stay = profile.alpha(L, L)
    coeff = (x + stay * y) * b_last + step_down * y * b_prev
    const = (x + stay * y) * a_last + step_down * y * a_prev
    scale = max(abs((x + stay * y) * b_last), abs(step_down * y * b_prev), 1e-30)
    if abs(coeff) <= 1e-10 * scale:
        raise SingularPatternError(
            f"x = {x} is (numerically) a root of the closure polynomial for y = {y}")
    x0 = -const / coeff
    values = tuple(a + b * x0 for a, b in affine)
    return _validated(profile, x, y, values, residual_tol)


def _validated(profile: SymmetryProfile, x, y, values: tuple,
               residual_tol: float) -> StructuredInverse:
    dist = profile.distance_matrix
    n = dist.shape[0]
    lookup = np.array(values)
    c = lookup[dist]
    b = np.where(dist == 0, x, np.where(dist == 1, y, 0.0)).astype(lookup.dtype)
    residual = float(np.max(np.abs(b @ c - np.identity(n))))
    return StructuredInverse(values=values, valid=residual <= residual_tol,
                             max_residual=residual)


def verify_distance_constant_inverse(t: Triangulation, B: PatternMatrix,
                                     tol: float = 1e-10) -> DistanceClassCheck:
    """Invert B densely and measure the entry spread within each distance class.

    Constant classes (spread below ``tol``) are the empirical signature of
    the structured inverse; this works on any connected graph, classified
    or not.
    """
    dist = distance_matrix(t)
    try:
        inv = np.linalg.inv(B.materialize())
    except np.linalg.LinAlgError as exc:
        raise SingularPatternError(f"pattern matrix is singular: {exc}") from None
    spreads: dict[int, float] = {}
    means: dict[int, complex | float] = {}
    for ell in range(int(dist.max()) + 1):
        entries = inv[dist == ell]
        if np.iscomplexobj(entries):
            spread = float(max(np.ptp(entries.real), np.ptp(entries.imag)))
            means[ell] = complex(entries.mean())
        else:
            spread = float(np.ptp(entries))
            means[ell] = float(entries.mean())
        spreads[ell] = spread
    return DistanceClassCheck(
        is_constant=all(s < tol for s in spreads.values()),
        spreads=spreads,
        class_means=means,
    )
