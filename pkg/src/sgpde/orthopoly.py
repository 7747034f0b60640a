"""One-dimensional orthonormal polynomial families and Gauss quadrature.

Each family is indexed by the probability law of a random input:

* ``hermite``  -- standard normal on the real line,
* ``jacobi``   -- Beta law on (-1, 1) with density proportional to
  ``(1-z)**alpha * (1+z)**beta``,
* ``laguerre`` -- Gamma law on (0, inf) with shape ``alpha + 1`` and rate 1.

All polynomials are orthonormal with respect to the *probability* measure,
so ``h_0 = 1``, quadrature weights sum to one, and Parseval identities hold
without extra normalization factors. Nodes and weights of the Gauss rules
come from the symmetric tridiagonal recurrence matrix (eigenvalue method).

The module also provides the second-order differential operator whose
eigenfunctions are the orthogonal polynomials, applied exactly on monomial
coefficients, together with its eigenvalues and norm-bound constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "PolyFamily",
    "QuadratureRule",
    "PolyCoeffs",
    "hermite",
    "jacobi",
    "laguerre",
    "recurrence_coeffs",
    "eval_orthonormal",
    "gauss_rule",
    "orthonormal_coeffs",
    "apply_Q",
    "sl_eigenvalue",
    "sl_norm_bound_constant",
]

MAX_POLY_DEGREE = 64


@dataclass(frozen=True)
class PolyFamily:
    """An orthonormal polynomial family, identified by its probability law.

    Use the factory functions :func:`hermite`, :func:`jacobi`, and
    :func:`laguerre` instead of constructing instances directly.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("hermite", "jacobi", "laguerre"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "jacobi" and (self.alpha <= -1.0 or self.beta <= -1.0):
            raise ValueError("jacobi requires alpha > -1 and beta > -1")
        if self.kind == "laguerre" and self.alpha <= -1.0:
            raise ValueError("laguerre requires alpha > -1")

    @property
    def weighted(self) -> bool:
        """True if the Sobolev weight of this family is rho(z) = z."""
        return self.kind == "laguerre"

    def rho(self, z):
        """Sobolev weight: identity for hermite/jacobi, z for laguerre."""
        z = np.asarray(z, dtype=float)
        return z if self.kind == "laguerre" else np.ones_like(z)


def hermite() -> PolyFamily:
    """Family for a standard normal input."""
    return PolyFamily("hermite")


def jacobi(alpha: float, beta: float) -> PolyFamily:
    """Family for a Beta input on (-1, 1); alpha = beta = 0 is uniform."""
    return PolyFamily("jacobi", float(alpha), float(beta))


def laguerre(alpha: float) -> PolyFamily:
    """Family for a Gamma input with shape alpha + 1 and rate 1."""
    return PolyFamily("laguerre", float(alpha))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for a family's probability measure; weights sum to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _monic_recurrence(family: PolyFamily, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Monic three-term recurrence (alpha_k, beta_k) for k = 0..k_max.

    Convention: p_{k+1}(z) = (z - alpha_k) p_k(z) - beta_k p_{k-1}(z) with
    beta_0 = 1 for probability measures.
    """
    k = np.arange(k_max + 1, dtype=float)
    if family.kind == "hermite":
        return np.zeros(k_max + 1), np.where(k == 0, 1.0, k)
    if family.kind == "laguerre":
        a = family.alpha
        return 2.0 * k + a + 1.0, np.where(k == 0, 1.0, k * (k + a))
    a, b = family.alpha, family.beta
    ab = a + b
    alphas = np.empty(k_max + 1)
    betas = np.empty(k_max + 1)
    alphas[0] = (b - a) / (ab + 2.0)
    betas[0] = 1.0
    for i in range(1, k_max + 1):
        d = 2.0 * i + ab
        alphas[i] = (b * b - a * a) / (d * (d + 2.0))
        if i == 1:
            # cancelled form, regular also at a + b = -1
            betas[1] = 4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0) ** 2 * (ab + 3.0))
        else:
            betas[i] = (
                4.0 * i * (i + a) * (i + b) * (i + ab)
                / (d * d * (d + 1.0) * (d - 1.0))
            )
    return alphas, betas


def recurrence_coeffs(family: PolyFamily, k_max: int) -> list[tuple[float, float]]:
    """Coefficients (a_k, b_k) of the orthonormal three-term recurrence.

    The orthonormal polynomials satisfy

        z * h_k(z) = b_{k+1} h_{k+1}(z) + a_k h_k(z) + b_k h_{k-1}(z)

    with b_0 = 0 by convention. For the hermite family a_k = 0, b_k = sqrt(k).
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    alphas, betas = _monic_recurrence(family, k_max)
    bs = np.sqrt(betas)
    bs[0] = 0.0
    return list(zip(alphas.tolist(), bs.tolist()))


def eval_orthonormal(family: PolyFamily, n: int, z) -> np.ndarray:
    """Evaluate (h_0(z), ..., h_n(z)) by the three-term recurrence.

    Returns an array of shape ``(n + 1,)`` for scalar z and
    ``(n + 1,) + z.shape`` otherwise.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    z = np.asarray(z, dtype=float)
    alphas, betas = _monic_recurrence(family, n + 1)
    bs = np.sqrt(betas)
    out = np.empty((n + 1,) + z.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = (z - alphas[0]) / bs[1]
    for k in range(1, n):
        out[k + 1] = ((z - alphas[k]) * out[k] - bs[k] * out[k - 1]) / bs[k + 1]
    return out


def gauss_rule(family: PolyFamily, q: int) -> QuadratureRule:
    """q-node Gauss rule, exact for polynomials of degree <= 2q - 1."""
    if q < 1:
        raise ValueError("q must be >= 1")
    alphas, betas = _monic_recurrence(family, q - 1)
    if q == 1:
        return QuadratureRule(np.array([alphas[0]]), np.array([1.0]))
    offdiag = np.sqrt(betas[1:q])
    try:
        nodes, vecs = eigh_tridiagonal(alphas, offdiag)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError(f"Gauss rule eigen-solve failed for {family}") from exc
    weights = vecs[0, :] ** 2
    return QuadratureRule(nodes, weights)


@dataclass(frozen=True)
class PolyCoeffs:
    """A polynomial in the monomial basis; ``coeffs[k]`` multiplies ``z**k``."""

    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        c = _trim(c)
        if c.size - 1 > MAX_POLY_DEGREE:
            raise ValueError(f"degree {c.size - 1} exceeds cap {MAX_POLY_DEGREE}")
        object.__setattr__(self, "coeffs", c)
        c.setflags(write=False)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=float), self.coeffs)

    def derivative(self, order: int = 1) -> "PolyCoeffs":
        return PolyCoeffs(np.polynomial.polynomial.polyder(self.coeffs, order))


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1)


def _shift(c: np.ndarray, k: int) -> np.ndarray:
    """Multiply a coefficient array by z**k."""
    return np.concatenate([np.zeros(k), c])


def _add(*arrays: np.ndarray) -> np.ndarray:
    n = max(a.size for a in arrays)
    out = np.zeros(n)
    for a in arrays:
        out[: a.size] += a
    return out


def orthonormal_coeffs(family: PolyFamily, k: int) -> PolyCoeffs:
    """Monomial coefficients of the orthonormal polynomial h_k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    alphas, betas = _monic_recurrence(family, k + 1)
    bs = np.sqrt(betas)
    prev = np.zeros(1)
    cur = np.ones(1)
    for j in range(k):
        nxt = (_add(_shift(cur, 1), -alphas[j] * cur, -bs[j] * prev)) / bs[j + 1]
        prev, cur = cur, nxt
    return PolyCoeffs(cur)


def apply_Q(family: PolyFamily, p: PolyCoeffs) -> PolyCoeffs:
    """Apply the family's Sturm--Liouville operator exactly on coefficients.

    hermite:  Q = -d2 + z d1
    jacobi:   Q = -(1 - z^2) d2 + (alpha - beta + (alpha + beta + 2) z) d1
    laguerre: Q = -z d2 + (z - alpha - 1) d1
    """
    d1 = np.polynomial.polynomial.polyder(p.coeffs)
    d2 = np.polynomial.polynomial.polyder(p.coeffs, 2)
    if family.kind == "hermite":
        out = _add(-d2, _shift(d1, 1))
    elif family.kind == "jacobi":
        a, b = family.alpha, family.beta
        out = _add(-d2, _shift(d2, 2), (a - b) * d1, (a + b + 2.0) * _shift(d1, 1))
    else:
        a = family.alpha
        out = _add(-_shift(d2, 1), _shift(d1, 1), -(a + 1.0) * d1)
    return PolyCoeffs(out)


def sl_eigenvalue(family: PolyFamily, k: int) -> float:
    """Eigenvalue of the Sturm--Liouville operator on h_k.

    k for hermite and laguerre, k (k + alpha + beta + 1) for jacobi.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if family.kind == "jacobi":
        return float(k * (k + family.alpha + family.beta + 1.0))
    return float(k)


def sl_norm_bound_constant(family: PolyFamily, ell: int) -> float:
    """Constant C with ||Q f||_{H^ell_rho} <= C ||f||_{H^(ell+2)_rho}."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if family.kind == "hermite":
        return sqrt(21.0 + 3.0 * ell**2)
    if family.kind == "laguerre":
        return sqrt(24.0 * family.alpha + 87.0 + 24.0 * ell + 3.0 * ell**2)
    a, b = family.alpha, family.beta
    return sqrt(
        3.0 * (1.0 + 4.0 * (ell + 1.0 + max(a, b)) ** 2 + ell**2 * (ell + a + b + 1.0) ** 2)
    )
