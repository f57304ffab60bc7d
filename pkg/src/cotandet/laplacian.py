"""Cotan Laplacians, their spectra, and log pseudo-determinants.

The edge weight w_ij is the sum of the cotangents of the two angles facing
edge (i, j) in its two incident faces. The plain matrix is the weighted
graph Laplacian; the area-normalized variant scales row i by 1/A_i with A_i
the local area element. The pseudo-determinant is the product of nonzero
eigenvalues, kept as a log-sum for overflow robustness.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .mesh import Edge, Triangulation, component_count
from .metric import DiscreteMetric, corner_angles, local_area_elements

KINDS = ("cotan", "normalized")

# Relative eigenvalue threshold below which a mode counts as kernel.
ZERO_THRESHOLD = 1e-9


class SpectrumError(RuntimeError):
    """Kernel detection failed or a retained eigenvalue is non-positive."""


@dataclass(frozen=True)
class EdgeWeights:
    """Symmetric cotan weight per edge; negative across obtuse angle pairs."""

    weights: Mapping[Edge, float]

    def __getitem__(self, e: Edge) -> float:
        return self.weights[e]


@dataclass(frozen=True)
class LaplaceMatrix:
    """Dense Laplacian with its assembly provenance.

    kind="cotan": symmetric, zero row sums, off-diagonal -w_ij on edges.
    kind="normalized": row i of the cotan matrix scaled by 1/A_i; ``areas``
    holds the A_i used. Similar to a symmetric matrix, so the spectrum is
    real; see :func:`spectrum`.
    """

    matrix: np.ndarray
    kind: str
    weights: EdgeWeights
    areas: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def symmetrized(self) -> np.ndarray:
        """A symmetric matrix with the same spectrum.

        The cotan matrix is already symmetric. The normalized matrix
        D^{-1} W is similar to D^{-1/2} W D^{-1/2} via D^{1/2}.
        """
        if self.kind == "cotan":
            return self.matrix
        root = np.sqrt(self.areas)
        return self.matrix * root[:, None] / root[None, :]


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray  # all n, ascending
    kernel_dim: int
    log_pseudo_det: float

    @property
    def pseudo_det(self) -> float:
        # May overflow to +inf; the log is the primary representation.
        try:
            return math.exp(self.log_pseudo_det)
        except OverflowError:
            return math.inf


def cotan_weights(t: Triangulation, m: DiscreteMetric) -> EdgeWeights:
    """w_ij = cot(alpha_ij) + cot(beta_ij) over the two faces of each edge."""
    angles = corner_angles(t, m)
    weights = {}
    for e in t.edge_list:
        faces = t.triangles_of_edge[e]
        if len(faces) != 2:
            raise ValueError(
                f"edge {e} borders {len(faces)} face(s); cotan weights need a closed surface")
        w = 0.0
        for tri in faces:
            w += 1.0 / math.tan(angles.opposite(tri, e))
        weights[e] = w
    return EdgeWeights(weights)


def assemble(t: Triangulation, m: DiscreteMetric, kind: str = "cotan") -> LaplaceMatrix:
    """Assemble the cotan Laplacian (or its area-normalized variant) as a dense matrix."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    weights = cotan_weights(t, m)
    n = t.vertex_count
    mat = np.zeros((n, n))
    for (i, j), w in weights.weights.items():
        mat[i, j] = mat[j, i] = -w
        mat[i, i] += w
        mat[j, j] += w
    if kind == "cotan":
        return LaplaceMatrix(matrix=mat, kind=kind, weights=weights)
    areas_map = local_area_elements(t, m)
    areas = np.array([areas_map[i] for i in range(n)])
    if not np.all(areas > 0.0):
        raise ValueError("normalized Laplacian needs positive local area elements")
    return LaplaceMatrix(matrix=mat / areas[:, None], kind=kind, weights=weights, areas=areas)


def spectrum(L: LaplaceMatrix, expected_kernel_dim: int | None = None) -> SpectrumResult:
    """Eigenvalues, kernel dimension, and log pseudo-determinant of ``L``.

    Eigenvalues come from the symmetric similar matrix, so they are real for
    both kinds. If ``expected_kernel_dim`` is given, exactly that many
    smallest-magnitude eigenvalues are dropped after checking they sit below
    the zero threshold (raising SpectrumError otherwise); extra near-zero
    eigenvalues are a warning, since they signal rank loss. Without it, all
    eigenvalues below the threshold are dropped.
    """
    evals = np.linalg.eigvalsh(L.symmetrized())
    evals = np.sort(evals)
    threshold = ZERO_THRESHOLD * max(1.0, float(evals[-1]))
    by_magnitude = np.argsort(np.abs(evals), kind="stable")
    if expected_kernel_dim is not None:
        kernel_dim = expected_kernel_dim
        kernel_idx = by_magnitude[:kernel_dim]
        not_small = np.abs(evals[kernel_idx]) >= threshold
        if np.any(not_small):
            raise SpectrumError(
                f"expected kernel dimension {kernel_dim} but eigenvalue(s) "
                f"{evals[kernel_idx][not_small]} are not below the zero threshold {threshold:g}")
        extra = np.abs(evals[by_magnitude[kernel_dim:]]) < threshold
        if np.any(extra):
            warnings.warn(
                f"{int(np.sum(extra))} eigenvalue(s) beyond the expected kernel fall below the "
                f"zero threshold; the matrix rank may have dropped", stacklevel=2)
    else:
        kernel_idx = by_magnitude[np.abs(evals[by_magnitude]) < threshold]
        kernel_dim = len(kernel_idx)
    keep = np.ones(len(evals), dtype=bool)
    keep[kernel_idx] = False
    retained = evals[keep]
    if np.any(retained <= 0.0):
        raise SpectrumError(
            f"retained non-positive eigenvalue(s) {retained[retained <= 0.0]}; the matrix is "
            f"not positive semidefinite on the complement of the detected kernel")
    log_det = float(np.sum(np.log(retained)))
    return SpectrumResult(eigenvalues=evals, kernel_dim=kernel_dim, log_pseudo_det=log_det)


def log_pseudo_det(t: Triangulation, m: DiscreteMetric, kind: str = "cotan") -> float:
    """log det' of the assembled Laplacian, with the kernel pinned to the
    number of connected components."""
    L = assemble(t, m, kind)
    return spectrum(L, expected_kernel_dim=component_count(t)).log_pseudo_det
