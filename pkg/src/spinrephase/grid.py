"""Quadrature grids for ensemble averages over motional energy.

For a thermal gas in a 3D harmonic trap the distribution of total motional
energy E (in units of k_B T) has density (E^2 / 2) e^{-E}; ensemble
averages of any spin observable are integrals against that weight.  A grid
holds nodes E_i and weights w_i normalized so that sum(w) = 1, i.e. the
weights absorb the density of states.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class GridScheme(enum.Enum):
    GAUSS_LAGUERRE_ALPHA2 = "gauss"
    UNIFORM_TRUNCATED = "uniform"
    CUSTOM = "custom"


@dataclass(frozen=True)
class EnergyGrid:
    """Quadrature nodes and weights for the weight (E^2 / 2) e^{-E}.

    Nodes are strictly increasing and positive; weights are positive and
    sum to 1.  Grids are immutable after construction and safe to share.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scheme: GridScheme
    norm_deficit: float = field(default=0.0)  # pre-normalization weight deficit

    def __post_init__(self) -> None:
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        weights = np.ascontiguousarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or weights.ndim != 1 or nodes.size != weights.size:
            raise ValueError("nodes and weights must be 1D arrays of equal length")
        if nodes.size < 2:
            raise ValueError("a grid needs at least 2 nodes")
        if not np.all(np.isfinite(nodes)) or not np.all(np.isfinite(weights)):
            raise ValueError("nodes and weights must be finite")
        if nodes[0] <= 0.0 or np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing and > 0")
        if np.any(weights <= 0.0):
            raise ValueError(
                "all weights must be > 0 (weight underflow: use fewer nodes)"
            )
        if abs(weights.sum() - 1.0) > 1e-10:
            raise ValueError(f"weights must sum to 1, got {weights.sum()!r}")

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def e_max(self) -> float:
        return float(self.nodes[-1])


def build_gauss(n_points: int) -> EnergyGrid:
    """Generalized Gauss-Laguerre grid for the weight (E^2 / 2) e^{-E}.

    Nodes are the eigenvalues (Golub-Welsch) of the Jacobi matrix of the
    three-term recurrence of the generalized Laguerre polynomials with
    alpha = 2 (weight E^2 e^{-E}).  Weights are Christoffel sums of the
    orthonormal recurrence, w_i = 1 / sum_k p_k(E_i)^2, which stay
    representable far beyond where the squared-first-eigenvector form
    underflows; they are scaled by 1/2 so they sum to Gamma(3)/2 = 1.
    The rule integrates polynomials of degree <= 2 n_points - 1 exactly
    against the weight.  Beyond n_points of roughly 180 the smallest
    weights underflow double precision and construction fails.
    """
    if not (2 <= n_points <= 256):
        raise ValueError(f"n_points must be in [2, 256], got {n_points}")
    alpha = 2.0
    k = np.arange(n_points, dtype=float)
    diag = 2.0 * k + alpha + 1.0
    offdiag = np.sqrt(k[1:] * (k[1:] + alpha))
    nodes = scipy.linalg.eigh_tridiagonal(diag, offdiag, eigvals_only=True)

    # Orthonormal recurrence p_{k+1} = [(x - a_k) p_k - sqrt(b_k) p_{k-1}]
    # / sqrt(b_{k+1}), a_k = 2k + alpha + 1, b_k = k (k + alpha), evaluated
    # at the nodes; mu0 = Gamma(alpha + 1) = 2.
    mu0 = math.gamma(alpha + 1.0)
    p_prev = np.zeros_like(nodes)
    p_cur = np.full_like(nodes, 1.0 / math.sqrt(mu0))
    total = p_cur**2
    for j in range(n_points - 1):
        sqrt_b_next = math.sqrt((j + 1.0) * (j + 1.0 + alpha))
        sqrt_b_cur = math.sqrt(j * (j + alpha))
        p_next = ((nodes - diag[j]) * p_cur - sqrt_b_cur * p_prev) / sqrt_b_next
        total += p_next**2
        p_prev, p_cur = p_cur, p_next
    # Christoffel weights sum to mu0 = 2; the extra 1/2 normalizes to 1.
    weights = 1.0 / (2.0 * total)
    return EnergyGrid(nodes, weights, GridScheme.GAUSS_LAGUERRE_ALPHA2)


def build_uniform(n_points: int, e_max: float) -> EnergyGrid:
    """Midpoint grid on (0, e_max] with density-of-states weights.

    Raw weights are (E_i^2 / 2) e^{-E_i} dE; they are renormalized to sum
    to 1 and the pre-normalization deficit (truncated tail plus midpoint
    discretization error) is recorded on the grid.  Kept alongside the
    Gauss rule because singular energy kernels are easier to regularize on
    equispaced nodes.
    """
    if n_points < 8:
        raise ValueError(f"n_points must be >= 8, got {n_points}")
    if not (e_max >= 8.0 and math.isfinite(e_max)):
        raise ValueError(f"e_max must be >= 8, got {e_max}")
    de = e_max / n_points
    nodes = (np.arange(n_points) + 0.5) * de
    raw = 0.5 * nodes**2 * np.exp(-nodes) * de
    total = raw.sum()
    return EnergyGrid(
        nodes, raw / total, GridScheme.UNIFORM_TRUNCATED, norm_deficit=1.0 - total
    )


def average(grid: EnergyGrid, field: np.ndarray) -> np.ndarray:
    """Ensemble average sum_i w_i S(E_i), component-wise.

    ``field`` has shape (n,) or (n, k) with n matching the grid.
    """
    values = np.asarray(field, dtype=float)
    if values.shape[0] != len(grid):
        raise ValueError(
            f"field length {values.shape[0]} does not match grid length {len(grid)}"
        )
    return grid.weights @ values
