"""Diagonal model of a Hilbert scale.

The scale ``(X_r)`` is generated by a strictly positive self-adjoint operator
``L``. Everything here works in the eigenbasis of ``L``: a vector is just its
coefficient array, and ``L^r`` acts by multiplying coefficient ``k`` with
``l_k**r``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ScaleOperator:
    """Spectrum ``l_1 <= ... <= l_K`` of the generator ``L``.

    ``theta`` is the tight constant in ``||x||^2 <= theta <Lx, x>``, i.e.
    ``1 / l_1``.
    """

    eigenvalues: np.ndarray
    theta: float

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def power(self, r: float) -> np.ndarray:
        """Diagonal of ``L^r``."""
        if r == 0:
            return np.ones(self.dim)
        return np.exp(r * np.log(self.eigenvalues))

    def apply_power(self, r: float, x) -> np.ndarray:
        return apply_power(self, r, x)

    def norm(self, r: float, x) -> float:
        return norm_r(self, r, x)


def make_scale(eigenvalues) -> ScaleOperator:
    """Build a :class:`ScaleOperator` from a list of positive eigenvalues."""
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("the spectrum of L must be non-empty")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise ValueError("L must be strictly positive: all eigenvalues must be > 0")
    lam = np.sort(lam)
    return ScaleOperator(lam, 1.0 / lam[0])


def default_scale(K: int) -> ScaleOperator:
    """The Sobolev-like scale ``l_k = k``, ``k = 1..K``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    return make_scale(np.arange(1, K + 1, dtype=float))


def _check(op: ScaleOperator, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (op.dim,):
        raise ValueError(f"dimension mismatch: vector of shape {x.shape}, scale of dimension {op.dim}")
    return x


def apply_power(op: ScaleOperator, r: float, x) -> np.ndarray:
    """Return ``L^r x``."""
    x = _check(op, x)
    if r == 0:
        return x.copy()
    return op.power(r) * x


def norm_r(op: ScaleOperator, r: float, x) -> float:
    """The scale norm ``||x||_r = ||L^r x||``."""
    y = apply_power(op, r, x)
    # scale first: squaring tiny or huge coefficients under/overflows
    peak = float(np.max(np.abs(y), initial=0.0))
    if peak == 0.0 or not np.isfinite(peak):
        return peak
    return peak * float(np.linalg.norm(y / peak))


def interpolation_slack(op: ScaleOperator, x, p: float, q: float, r: float) -> float:
    """Slack of the interpolation inequality for ``p < q < r``.

    Returns ``||x||_p^((r-q)/(r-p)) * ||x||_r^((q-p)/(r-p)) - ||x||_q``,
    which is nonnegative up to rounding.
    """
    if not p < q < r:
        raise ValueError(f"interpolation needs p < q < r, got p={p}, q={q}, r={r}")
    x = _check(op, x)
    if not np.any(x):
        raise ValueError("interpolation slack is undefined for the zero vector")
    # both sides are 1-homogeneous; normalizing avoids underflow of tiny vectors
    peak = float(np.max(np.abs(x)))
    x = x / peak
    np_, nq, nr = norm_r(op, p, x), norm_r(op, q, x), norm_r(op, r, x)
    theta = (r - q) / (r - p)
    # log form avoids overflow for large |p|, |r|
    bound = np.exp(theta * np.log(np_) + (1.0 - theta) * np.log(nr))
    return float(bound - nq) * peak


def embedding_slack(op: ScaleOperator, x, q: float, r: float) -> float:
    """Slack ``theta^(r-q) ||x||_r - ||x||_q`` of the embedding ``X_r -> X_q``."""
    if not q < r:
        raise ValueError(f"embedding needs q < r, got q={q}, r={r}")
    return float(op.theta ** (r - q) * norm_r(op, r, x) - norm_r(op, q, x))
