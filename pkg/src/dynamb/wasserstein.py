"""Discrete measures and exact p-Wasserstein distances.

The distance solver is exact: uniform same-size measures go through the
assignment problem, anything else through a transportation solve. A
permutation brute-force oracle is provided for testing.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog

from dynamb._transport import solve_transport

WEIGHT_TOL = 1e-12


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted atoms in R^d; weights positive and summing to one."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.shape[0] != weights.shape[0]:
            raise MeasureError(
                f"{atoms.shape[0]} atoms but {weights.shape[0]} weights")
        if not np.all(np.isfinite(atoms)):
            raise MeasureError("atoms must be finite")
        if np.any(weights <= 0):
            raise MeasureError("weights must be positive")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_TOL:
            raise MeasureError(f"weights sum to {weights.sum()!r}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, atoms) -> "DiscreteMeasure":
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        n = atoms.shape[0]
        return cls(atoms, np.full(n, 1.0 / n))

    @classmethod
    def point(cls, x) -> "DiscreteMeasure":
        return cls(np.atleast_2d(np.asarray(x, dtype=float)), np.array([1.0]))

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.size, rtol=0, atol=WEIGHT_TOL))

    def moment_p(self, p: float) -> float:
        """(sum_i w_i ||x_i||^p)^(1/p), the p-th moment about the origin."""
        norms = np.linalg.norm(self.atoms, axis=1)
        return float(np.sum(self.weights * norms ** p) ** (1.0 / p))

    def to_text(self) -> str:
        """One atom per row, coordinates first, weight in the last column."""
        buf = io.StringIO()
        cols = [f"x{k}" for k in range(self.dim)] + ["weight"]
        buf.write(" ".join(cols) + "\n")
        for x, w in zip(self.atoms, self.weights):
            buf.write(" ".join(f"{v:.17g}" for v in x) + f" {w:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "DiscreteMeasure":
        rows = []
        for line in text.strip().splitlines()[1:]:
            rows.append([float(tok) for tok in line.split()])
        arr = np.asarray(rows, dtype=float)
        return cls(arr[:, :-1], arr[:, -1])


def _check_pair(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float):
    if mu.dim != nu.dim:
        raise MeasureError(f"dimension mismatch: {mu.dim} vs {nu.dim}")
    if p < 1:
        raise MeasureError(f"need p >= 1, got {p}")


def cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float) -> np.ndarray:
    diff = mu.atoms[:, None, :] - nu.atoms[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return dist ** p


def wasserstein_p(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0,
                  solver: str = "auto") -> float:
    """Exact p-Wasserstein distance with Euclidean ground cost.

    ``solver`` is ``"auto"`` (assignment for uniform same-size pairs,
    transportation simplex otherwise), ``"simplex"``, or ``"linprog"``
    (scipy HiGHS, kept as an independent cross-check path).
    """
    _check_pair(mu, nu, p)
    C = cost_matrix(mu, nu, p)
    if solver == "auto" and mu.size == nu.size and mu.is_uniform and nu.is_uniform:
        rows, cols = linear_sum_assignment(C)
        total = math.fsum(C[rows, cols].tolist()) / mu.size
        return float(total ** (1.0 / p))
    if solver == "linprog":
        value = _transport_linprog(C, mu.weights, nu.weights)
    else:
        value, rows, cols, flows = solve_transport(C, mu.weights, nu.weights)
    return float(max(value, 0.0) ** (1.0 / p))


def _transport_linprog(C: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    n, m = C.shape
    ii = np.repeat(np.arange(n), m)
    jj = np.tile(np.arange(m), n)
    var = np.arange(n * m)
    mask = jj < m - 1  # drop one redundant marginal constraint
    rows = np.concatenate([ii, n + jj[mask]])
    cols = np.concatenate([var, var[mask]])
    A = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n + m - 1, n * m))
    rhs = np.concatenate([a, b[:-1]])
    res = linprog(C.ravel(), A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def wasserstein_upper_bound_paired(mu: DiscreteMeasure, nu: DiscreteMeasure,
                                   p: float = 2.0) -> float:
    """Identity-coupling bound ((1/N) sum_i ||x_i - y_i||^p)^(1/p).

    Requires uniform measures of equal size with matched atom indexing;
    always an upper bound on the exact distance.
    """
    _check_pair(mu, nu, p)
    if mu.size != nu.size:
        raise MeasureError(f"size mismatch: {mu.size} vs {nu.size}")
    if not (mu.is_uniform and nu.is_uniform):
        raise MeasureError("paired bound needs uniform weights")
    d = np.linalg.norm(mu.atoms - nu.atoms, axis=1)
    return float((math.fsum((d ** p).tolist()) / mu.size) ** (1.0 / p))


def permutation_wasserstein(mu: DiscreteMeasure, nu: DiscreteMeasure,
                            p: float = 2.0) -> float:
    """Brute-force oracle: minimum over all atom permutations (uniform, same N)."""
    _check_pair(mu, nu, p)
    if mu.size != nu.size or not (mu.is_uniform and nu.is_uniform):
        raise MeasureError("oracle needs uniform same-size measures")
    C = cost_matrix(mu, nu, p)
    n = mu.size
    best = math.inf
    for perm in permutations(range(n)):
        total = math.fsum(C[i, perm[i]] for i in range(n)) / n
        if total < best:
            best = total
    return float(best ** (1.0 / p))


def pushforward(mu: DiscreteMeasure, M: np.ndarray) -> DiscreteMeasure:
    """Image measure under the linear map x -> M x; weights preserved."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] != mu.dim:
        raise MeasureError(f"map shape {M.shape} incompatible with dim {mu.dim}")
    return DiscreteMeasure(mu.atoms @ M.T, mu.weights.copy())


def convolve(mu: DiscreteMeasure, q: DiscreteMeasure,
             max_atoms: int = 200_000) -> DiscreteMeasure:
    """Convolution: atoms are pairwise sums, weights are products."""
    if mu.dim != q.dim:
        raise MeasureError(f"dimension mismatch: {mu.dim} vs {q.dim}")
    total = mu.size * q.size
    if total > max_atoms:
        raise MeasureError(
            f"convolution would create {total} atoms (cap {max_atoms})")
    atoms = (mu.atoms[:, None, :] + q.atoms[None, :, :]).reshape(total, mu.dim)
    weights = np.outer(mu.weights, q.weights).ravel()
    return DiscreteMeasure(atoms, weights)
