"""Derivatives of the log pseudo-determinant over the space of edge lengths.

Everything here is finite differences: gradients and Hessians of
log det' along edge-length directions, the trace-formula derivative
tr(Mdot @ Mplus) that must agree with them at constant rank, constrained
bases that freeze the total area to first order, and two-edge landscape
sweeps. No analytic differentiation of the cotan weights is attempted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .mesh import Edge, Triangulation, component_count
from .metric import DiscreteMetric, InvalidMetricError, total_area, validate_metric
from .laplacian import assemble, spectrum, ZERO_THRESHOLD

DEFAULT_GRADIENT_STEP = 1e-5
DEFAULT_HESSIAN_STEP = 1e-3
DEFAULT_STATIONARITY_TOL = 1e-6


class RankChangeError(RuntimeError):
    """Kernel dimension changed across a finite-difference stencil."""


@dataclass(frozen=True)
class PerturbationDirection:
    """A tangent vector in edge-length space, aligned with ``edges``.

    Coordinate directions have max-norm 1; basis directions produced by
    :func:`area_preserving_basis` are unit in the 2-norm.
    """

    edges: tuple[Edge, ...]
    components: np.ndarray
    label: str = ""

    @classmethod
    def coordinate(cls, t: Triangulation, edge: Edge) -> "PerturbationDirection":
        edges = t.edge_list
        vec = np.zeros(len(edges))
        vec[edges.index(tuple(sorted(edge)))] = 1.0
        return cls(edges=edges, components=vec, label=f"edge {tuple(sorted(edge))}")

    @classmethod
    def from_components(cls, t: Triangulation, values, label: str = "") -> "PerturbationDirection":
        vec = np.asarray(values, dtype=float)
        if vec.shape != (len(t.edge_list),):
            raise ValueError(f"expected {len(t.edge_list)} components, got shape {vec.shape}")
        return cls(edges=t.edge_list, components=vec, label=label)


@dataclass(frozen=True)
class StationarityReport:
    kind: str
    h: float
    tol: float
    labels: tuple[str, ...]
    fd_derivatives: np.ndarray
    trace_derivatives: np.ndarray
    max_abs_derivative: float
    passed: bool

    @property
    def differences(self) -> np.ndarray:
        return self.fd_derivatives - self.trace_derivatives


@dataclass(frozen=True)
class SweepGrid:
    """log det' over a two-edge length grid; NaN marks invalid-metric cells."""

    edge_a: Edge
    edge_b: Edge
    la_values: np.ndarray
    lb_values: np.ndarray
    values: np.ndarray  # shape (len(la), len(lb))
    kind: str

    def write_csv(self, fh) -> None:
        fh.write("la,lb,log_det\n")
        for ia, la in enumerate(self.la_values):
            for ib, lb in enumerate(self.lb_values):
                fh.write(f"{la:.17g},{lb:.17g},{self.values[ia, ib]:.17g}\n")


def _metric_at(t: Triangulation, vec: np.ndarray) -> DiscreteMetric:
    return DiscreteMetric.from_vector(t, vec)


def _check_perturbed(t: Triangulation, vec: np.ndarray, context: str) -> DiscreteMetric:
    m = _metric_at(t, vec)
    violations = validate_metric(t, m)
    if violations:
        raise InvalidMetricError(
            f"perturbed metric is invalid during {context}: triangle "
            f"{violations[0][0]}: {violations[0][1]}", violations=tuple(violations))
    return m


def _logdet(t: Triangulation, vec: np.ndarray, kind: str, kernel_dim: int,
            context: str) -> float:
    m = _check_perturbed(t, vec, context)
    return spectrum(assemble(t, m, kind), expected_kernel_dim=kernel_dim).log_pseudo_det


def _directional_fd(t: Triangulation, vec0: np.ndarray, direction: np.ndarray,
                    kind: str, h: float, kernel_dim: int, context: str) -> float:
    f_plus = _logdet(t, vec0 + h * direction, kind, kernel_dim, context)
    f_minus = _logdet(t, vec0 - h * direction, kind, kernel_dim, context)
    return (f_plus - f_minus) / (2.0 * h)


def fd_gradient(t: Triangulation, m0: DiscreteMetric, kind: str = "cotan",
                h: float = DEFAULT_GRADIENT_STEP) -> dict[Edge, float]:
    """Central-difference gradient of log det' per coordinate edge direction.

    The kernel dimension is pinned to its value at ``m0`` (the number of
    connected components); a kernel change across the stencil surfaces as a
    SpectrumError from the eigenvalue check.
    """
    vec0 = m0.as_vector(t)
    _check_perturbed(t, vec0, "fd_gradient base point")
    kernel_dim = component_count(t)
    grad = {}
    for idx, edge in enumerate(t.edge_list):
        direction = np.zeros(len(vec0))
        direction[idx] = 1.0
        grad[edge] = _directional_fd(t, vec0, direction, kind, h, kernel_dim,
                                     f"fd_gradient along edge {edge}")
    return grad


def area_gradient(t: Triangulation, m0: DiscreteMetric,
                  h: float = DEFAULT_GRADIENT_STEP) -> np.ndarray:
    """Central-difference gradient of the total area, aligned with ``t.edge_list``."""
    vec0 = m0.as_vector(t)
    grad = np.zeros(len(vec0))
    for idx in range(len(vec0)):
        plus, minus = vec0.copy(), vec0.copy()
        plus[idx] += h
        minus[idx] -= h
        grad[idx] = (total_area(t, _check_perturbed(t, plus, "area gradient"))
                     - total_area(t, _check_perturbed(t, minus, "area gradient"))) / (2.0 * h)
    return grad


def area_preserving_basis(t: Triangulation, m0: DiscreteMetric,
                          h: float = DEFAULT_GRADIENT_STEP) -> list[PerturbationDirection]:
    """Orthonormal basis of the complement of the area gradient.

    Moving along any returned direction changes the total area only at
    second order in the step. The uniform-scaling direction is never in the
    span, since area strictly increases under scaling.
    """
    grad = area_gradient(t, m0, h)
    norm = np.linalg.norm(grad)
    if norm == 0.0:
        raise ValueError("total-area gradient vanished; cannot build a constrained basis")
    q, _ = np.linalg.qr(grad.reshape(-1, 1).copy(), mode="complete")
    return [PerturbationDirection(edges=t.edge_list, components=q[:, k],
                                  label=f"area-preserving basis [{k - 1}]")
            for k in range(1, q.shape[1])]


def _kernel_dim_at(t: Triangulation, m: DiscreteMetric, kind: str) -> int:
    evals = np.linalg.eigvalsh(assemble(t, m, kind).symmetrized())
    threshold = ZERO_THRESHOLD * max(1.0, float(np.max(evals)))
    return int(np.sum(np.abs(evals) < threshold))


def _group_inverse(mat: np.ndarray, right_kernel: np.ndarray,
                   left_kernel: np.ndarray) -> np.ndarray:
    """Invert on the complement of a one-dimensional kernel.

    Adds the spectral projector onto the kernel, inverts, and removes it
    again; exact for diagonalizable matrices with a semisimple zero
    eigenvalue, which covers both Laplacian kinds.
    """
    projector = np.outer(right_kernel, left_kernel) / float(left_kernel @ right_kernel)
    return np.linalg.inv(mat + projector) - projector


def trace_formula_derivative(t: Triangulation, m0: DiscreteMetric,
                             direction: PerturbationDirection | Sequence[float],
                             kind: str = "cotan",
                             h: float = DEFAULT_GRADIENT_STEP) -> float:
    """Derivative of log det' as tr(Mdot @ Mplus).

    Mdot is the central finite difference of the assembled matrix along
    ``direction``; Mplus inverts the base matrix on the complement of its
    kernel (constants on the right; constants or the area vector on the
    left, depending on kind). Valid under constant rank, which is checked
    across the stencil.
    """
    vec = direction.components if isinstance(direction, PerturbationDirection) \
        else np.asarray(direction, dtype=float)
    vec0 = m0.as_vector(t)
    _check_perturbed(t, vec0, "trace formula base point")
    base = assemble(t, m0, kind)
    if any(w <= 0.0 for w in base.weights.weights.values()):
        warnings.warn("non-positive cotan weight at the base metric; the constant-rank "
                      "hypothesis behind the trace formula may fail", stacklevel=2)
    if not np.any(vec):
        return 0.0
    m_plus = _check_perturbed(t, vec0 + h * vec, "trace formula stencil")
    m_minus = _check_perturbed(t, vec0 - h * vec, "trace formula stencil")
    expected = component_count(t)
    for m in (m0, m_plus, m_minus):
        k = _kernel_dim_at(t, m, kind)
        if k != expected:
            raise RankChangeError(
                f"kernel dimension {k} != {expected} across the finite-difference stencil")
    mdot = (assemble(t, m_plus, kind).matrix - assemble(t, m_minus, kind).matrix) / (2.0 * h)
    ones = np.ones(t.vertex_count)
    left = ones if kind == "cotan" else base.areas
    pinv = _group_inverse(base.matrix, ones, left)
    return float(np.trace(mdot @ pinv))


def check_stationarity(t: Triangulation, m0: DiscreteMetric, kind: str = "cotan",
                       h: float = DEFAULT_GRADIENT_STEP,
                       tol: float = DEFAULT_STATIONARITY_TOL) -> StationarityReport:
    """Probe the first derivative of log det' around ``m0``.

    kind="cotan" probes every coordinate edge direction; kind="normalized"
    probes the area-preserving basis only (the constrained setting in which
    the normalized determinant is expected to be stationary). Each probe
    reports both the finite-difference and the trace-formula derivative.
    """
    lengths = m0.as_vector(t)
    if np.ptp(lengths) > 1e-12 * float(np.mean(lengths)):
        warnings.warn("base metric is not uniform; stationarity is only expected at "
                      "equilateral metrics", stacklevel=2)
    if kind == "normalized":
        directions = area_preserving_basis(t, m0, h)
    else:
        directions = [PerturbationDirection.coordinate(t, e) for e in t.edge_list]
    kernel_dim = component_count(t)
    vec0 = m0.as_vector(t)
    fd = np.array([_directional_fd(t, vec0, d.components, kind, h, kernel_dim, d.label)
                   for d in directions])
    tr = np.array([trace_formula_derivative(t, m0, d, kind, h) for d in directions])
    max_abs = float(np.max(np.abs(fd))) if len(fd) else 0.0
    return StationarityReport(
        kind=kind, h=h, tol=tol,
        labels=tuple(d.label for d in directions),
        fd_derivatives=fd, trace_derivatives=tr,
        max_abs_derivative=max_abs,
        passed=max_abs < tol,
    )


def fd_hessian(t: Triangulation, m0: DiscreteMetric, kind: str = "cotan",
               h: float = DEFAULT_HESSIAN_STEP, constrained: bool = False,
               directions: Iterable[PerturbationDirection] | None = None) -> np.ndarray:
    """Second-order central-difference Hessian of log det' over a direction set.

    ``constrained`` selects the area-preserving basis; otherwise coordinate
    directions are used. The result is symmetrized as (H + H^T) / 2.
    """
    if directions is None:
        if constrained:
            directions = area_preserving_basis(t, m0)
        else:
            directions = [PerturbationDirection.coordinate(t, e) for e in t.edge_list]
    dirs = [np.asarray(d.components, dtype=float) for d in directions]
    vec0 = m0.as_vector(t)
    kernel_dim = component_count(t)

    def f(vec: np.ndarray) -> float:
        return _logdet(t, vec, kind, kernel_dim, "fd_hessian stencil")

    f0 = f(vec0)
    k = len(dirs)
    hess = np.zeros((k, k))
    for a in range(k):
        hess[a, a] = (f(vec0 + h * dirs[a]) - 2.0 * f0 + f(vec0 - h * dirs[a])) / (h * h)
        for b in range(a + 1, k):
            hess[a, b] = hess[b, a] = (
                f(vec0 + h * (dirs[a] + dirs[b]))
                - f(vec0 + h * (dirs[a] - dirs[b]))
                - f(vec0 - h * (dirs[a] - dirs[b]))
                + f(vec0 - h * (dirs[a] + dirs[b]))
            ) / (4.0 * h * h)
    return 0.5 * (hess + hess.T)


def sweep_two_edges(t: Triangulation, m0: DiscreteMetric, edge_a: Edge, edge_b: Edge,
                    bounds: tuple[float, float], steps: int,
                    kind: str = "cotan") -> SweepGrid:
    """Evaluate log det' on a (length_a, length_b) grid over two chosen edges.

    Grid cells whose lengths violate a triangle inequality are kept and
    flagged NaN rather than skipped, so the emitted grid is always dense.
    """
    edge_a = tuple(sorted(edge_a))
    edge_b = tuple(sorted(edge_b))
    if edge_a == edge_b:
        raise ValueError("sweep needs two distinct edges")
    for e in (edge_a, edge_b):
        if e not in t.edges:
            raise ValueError(f"edge {e} is not in the triangulation")
    lo, hi = bounds
    if not (lo > 0.0 and hi > lo):
        raise ValueError(f"bounds must satisfy 0 < lo < hi, got {bounds}")
    grid = np.linspace(lo, hi, steps)
    kernel_dim = component_count(t)
    values = np.full((steps, steps), np.nan)
    for ia, la in enumerate(grid):
        for ib, lb in enumerate(grid):
            m = m0.replaced({edge_a: la, edge_b: lb})
            if validate_metric(t, m):
                continue  # cell stays NaN
            values[ia, ib] = spectrum(assemble(t, m, kind),
                                      expected_kernel_dim=kernel_dim).log_pseudo_det
    return SweepGrid(edge_a=edge_a, edge_b=edge_b, la_values=grid, lb_values=grid,
                     values=values, kind=kind)
