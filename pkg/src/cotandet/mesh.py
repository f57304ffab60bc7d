"""Combinatorial triangulations of closed surfaces.

Vertices are 0-based integer indices. Edges are stored as sorted pairs and
triangles as sorted triples, so two triangulations compare equal iff they
have the same combinatorics regardless of input ordering.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

Edge = tuple[int, int]
Triangle = tuple[int, int, int]

CANONICAL_NAMES = ("tetrahedron", "csaszar_k7", "octahedron", "torus_9", "icosahedron")


class MeshFormatError(ValueError):
    """A mesh file could not be parsed."""


class MeshValidationError(ValueError):
    """A triangulation violates a structural invariant."""


def _normalize_edge(e: Iterable[int]) -> Edge:
    i, j = e
    if i == j:
        raise MeshValidationError(f"edge ({i}, {j}) repeats a vertex")
    return (i, j) if i < j else (j, i)


def _normalize_triangle(tri: Iterable[int]) -> Triangle:
    a, b, c = sorted(tri)
    if a == b or b == c:
        raise MeshValidationError(f"triangle {tuple(tri)} repeats a vertex")
    return (a, b, c)


def _triangle_edges(tri: Triangle) -> tuple[Edge, Edge, Edge]:
    a, b, c = tri
    return (a, b), (a, c), (b, c)


@dataclass(frozen=True)
class Triangulation:
    """A combinatorial surface: vertex count, edge set, triangle set.

    Construction normalizes and checks per-element invariants (index ranges,
    no repeated vertices, every triangle side present in the edge set).
    Closedness is *not* enforced here; use :func:`validate_closed`.
    """

    vertex_count: int
    edges: frozenset[Edge]
    triangles: frozenset[Triangle]

    def __init__(self, vertex_count: int, edges: Iterable[Iterable[int]],
                 triangles: Iterable[Iterable[int]]):
        if vertex_count < 3:
            raise MeshValidationError(f"vertex_count must be >= 3, got {vertex_count}")
        edge_set = frozenset(_normalize_edge(e) for e in edges)
        tri_set = frozenset(_normalize_triangle(t) for t in triangles)
        for i, j in edge_set:
            if not (0 <= i < vertex_count and 0 <= j < vertex_count):
                raise MeshValidationError(f"edge ({i}, {j}) out of range [0, {vertex_count})")
        for tri in tri_set:
            for e in _triangle_edges(tri):
                if e not in edge_set:
                    raise MeshValidationError(f"triangle {tri} uses edge {e} not in the edge set")
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "edges", edge_set)
        object.__setattr__(self, "triangles", tri_set)

    @classmethod
    def from_triangles(cls, vertex_count: int,
                       triangles: Iterable[Iterable[int]]) -> "Triangulation":
        """Build a triangulation whose edge set is derived from its faces."""
        tris = [_normalize_triangle(t) for t in triangles]
        edges = {e for tri in tris for e in _triangle_edges(tri)}
        return cls(vertex_count, edges, tris)

    @cached_property
    def edge_list(self) -> tuple[Edge, ...]:
        """Edges in canonical (sorted) order; fixes vector layouts downstream."""
        return tuple(sorted(self.edges))

    @cached_property
    def triangle_list(self) -> tuple[Triangle, ...]:
        return tuple(sorted(self.triangles))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def triangles_of_edge(self) -> dict[Edge, tuple[Triangle, ...]]:
        """Map each edge to the faces containing it (2 on a closed surface)."""
        incident: dict[Edge, list[Triangle]] = {e: [] for e in self.edges}
        for tri in self.triangle_list:
            for e in _triangle_edges(tri):
                incident[e].append(tri)
        return {e: tuple(ts) for e, ts in incident.items()}

    def degree(self, vertex: int) -> int:
        return len(self.neighbors[vertex])

    def triangles_at_vertex(self, vertex: int) -> tuple[Triangle, ...]:
        return tuple(tri for tri in self.triangle_list if vertex in tri)


@dataclass(frozen=True)
class ValidationReport:
    is_closed: bool
    is_connected: bool
    euler_characteristic: int
    offending_edges: tuple[Edge, ...] = field(default_factory=tuple)


def validate_closed(t: Triangulation) -> ValidationReport:
    """Check the closed-surface condition: every edge borders exactly 2 faces.

    Defects are reported, never raised.
    """
    offenders = tuple(sorted(e for e, ts in t.triangles_of_edge.items() if len(ts) != 2))
    chi = t.vertex_count - len(t.edges) + len(t.triangles)
    return ValidationReport(
        is_closed=not offenders,
        is_connected=component_count(t) == 1,
        euler_characteristic=chi,
        offending_edges=offenders,
    )


def component_count(t: Triangulation) -> int:
    """Number of connected components of the edge graph."""
    seen = [False] * t.vertex_count
    components = 0
    for start in range(t.vertex_count):
        if seen[start]:
            continue
        components += 1
        queue = deque([start])
        seen[start] = True
        while queue:
            v = queue.popleft()
            for w in t.neighbors[v]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    return components


def is_complete(t: Triangulation) -> bool:
    """True iff every pair of vertices is joined by an edge."""
    n = t.vertex_count
    return len(t.edges) == n * (n - 1) // 2


def build_canonical(name: str) -> Triangulation:
    """Build one of the five canonical closed triangulations by name.

    tetrahedron   K4 on the sphere          (4, 6, 4),   chi = 2
    csaszar_k7    K7 on the torus           (7, 21, 14), chi = 0
    octahedron    6-point sphere            (6, 12, 8),  chi = 2
    torus_9       3x3 grid quotient torus   (9, 27, 18), chi = 0
    icosahedron   12-point sphere           (12, 30, 20), chi = 2
    """
    if name == "tetrahedron":
        tris = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        return Triangulation.from_triangles(4, tris)
    if name == "csaszar_k7":
        # Two face orbits mod 7 give the unique 2-neighborly torus triangulation.
        tris = [(i % 7, (i + 1) % 7, (i + 3) % 7) for i in range(7)]
        tris += [(i % 7, (i + 2) % 7, (i + 3) % 7) for i in range(7)]
        return Triangulation.from_triangles(7, tris)
    if name == "octahedron":
        # Poles 0 and 5, equator cycle 1-2-3-4.
        equator = (1, 2, 3, 4)
        tris = []
        for k in range(4):
            a, b = equator[k], equator[(k + 1) % 4]
            tris.append((0, a, b))
            tris.append((5, a, b))
        return Triangulation.from_triangles(6, tris)
    if name == "torus_9":
        # 3x3 grid quotient; each square split along the (r,c)-(r+1,c+1) diagonal.
        def v(r: int, c: int) -> int:
            return 3 * (r % 3) + (c % 3)

        tris = []
        for r in range(3):
            for c in range(3):
                tris.append((v(r, c), v(r, c + 1), v(r + 1, c + 1)))
                tris.append((v(r, c), v(r + 1, c + 1), v(r + 1, c)))
        return Triangulation.from_triangles(9, tris)
    if name == "icosahedron":
        # Pole 0, upper ring 1..5, lower ring 6..10, pole 11.
        top = [1 + k for k in range(5)]
        bot = [6 + k for k in range(5)]
        tris = []
        for k in range(5):
            kn = (k + 1) % 5
            tris.append((0, top[k], top[kn]))
            tris.append((11, bot[k], bot[kn]))
            tris.append((top[k], top[kn], bot[k]))
            tris.append((bot[k], bot[kn], top[kn]))
        return Triangulation.from_triangles(12, tris)
    raise ValueError(f"unknown canonical triangulation {name!r}; expected one of {CANONICAL_NAMES}")


def triangular_bipyramid() -> Triangulation:
    """5-vertex double pyramid: apexes 0 and 4 (degree 3), equator 1,2,3 (degree 4).

    Closed but not vertex-transitive; the stock counterexample for the
    distance-class symmetry checks.
    """
    tris = [(0, 1, 2), (0, 2, 3), (0, 1, 3), (4, 1, 2), (4, 2, 3), (4, 1, 3)]
    return Triangulation.from_triangles(5, tris)


def save(t: Triangulation, path) -> None:
    """Write the text format: `vertices N`, then `edge i j`, then `triangle i j k`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"vertices {t.vertex_count}\n")
        for i, j in t.edge_list:
            fh.write(f"edge {i} {j}\n")
        for a, b, c in t.triangle_list:
            fh.write(f"triangle {a} {b} {c}\n")


def load(path) -> Triangulation:
    """Parse a mesh file and validate it as a connected closed surface.

    Raises MeshFormatError with a line number on malformed input, and
    MeshValidationError if the parsed complex is not closed or not connected.
    """
    vertex_count: int | None = None
    edges: list[Edge] = []
    triangles: list[Triangle] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            kind, args = fields[0], fields[1:]
            try:
                values = [int(a) for a in args]
            except ValueError:
                raise MeshFormatError(f"{path}:{lineno}: non-integer field in {line!r}") from None
            if kind == "vertices":
                if vertex_count is not None:
                    raise MeshFormatError(f"{path}:{lineno}: duplicate 'vertices' header")
                if len(values) != 1 or values[0] < 3:
                    raise MeshFormatError(f"{path}:{lineno}: expected 'vertices N' with N >= 3")
                vertex_count = values[0]
                continue
            if vertex_count is None:
                raise MeshFormatError(f"{path}:{lineno}: 'vertices N' header must come first")
            if kind == "edge":
                if len(values) != 2:
                    raise MeshFormatError(f"{path}:{lineno}: expected 'edge i j'")
                record: tuple[int, ...] = tuple(values)
                edges.append(record)  # type: ignore[arg-type]
            elif kind == "triangle":
                if len(values) != 3:
                    raise MeshFormatError(f"{path}:{lineno}: expected 'triangle i j k'")
                record = tuple(values)
                triangles.append(record)  # type: ignore[arg-type]
            else:
                raise MeshFormatError(f"{path}:{lineno}: unknown record {kind!r}")
            if any(not 0 <= v < vertex_count for v in values):
                raise MeshFormatError(
                    f"{path}:{lineno}: vertex index out of range [0, {vertex_count})")
    if vertex_count is None:
        raise MeshFormatError(f"{path}: missing 'vertices N' header")
    t = Triangulation(vertex_count, edges, triangles)
    report = validate_closed(t)
    if not report.is_closed:
        raise MeshValidationError(
            f"{path}: not closed; edges with face count != 2: {list(report.offending_edges)}")
    if not report.is_connected:
        raise MeshValidationError(f"{path}: edge graph is not connected")
    return t
