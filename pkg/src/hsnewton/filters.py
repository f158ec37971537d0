"""Spectral filter families ``g_alpha`` and their application to operators.

Four families are supported:

=================  ===========================================  ==========================
kind               ``g_alpha(lam)``                             ``r_alpha(lam)``
=================  ===========================================  ==========================
``tikhonov``       ``((alpha+lam)^N - alpha^N) / (lam (alpha+lam)^N)``  ``(alpha/(alpha+lam))^N``
``exponential``    ``(1 - exp(-lam/alpha)) / lam``              ``exp(-lam/alpha)``
``landweber``      ``(1 - (1-lam)^k) / lam``, ``k = [1/alpha]`` ``(1-lam)^k``
``lardy``          ``(1 - (1+lam)^-k) / lam``, ``k = [1/alpha]`` ``(1+lam)^-k``
=================  ===========================================  ==========================

The residual function is always ``r_alpha = 1 - lam * g_alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

KINDS = ("tikhonov", "exponential", "landweber", "lardy")

# relative tolerance when deciding whether 1/alpha is an integer
_INT_TOL = 1e-9
# eigenvalues of A*A may exceed 1 by this much before the scaling is rejected
SPECTRUM_TOL = 1e-8


class InadmissibleAlpha(ValueError):
    """Raised when ``alpha`` is not allowed for a filter family."""


class ScalingError(ValueError):
    """Raised when ``||A|| > 1``, i.e. the problem is not properly scaled."""


class InnerSolveError(RuntimeError):
    """Raised when an inner linear solve does not converge."""


@dataclass(frozen=True)
class FilterFamily:
    """One of the four filter families plus the contour used to certify it.

    Parameters
    ----------
    kind : str
        ``"tikhonov"``, ``"exponential"``, ``"landweber"`` or ``"lardy"``.
    order : int
        Order ``N`` of iterated Tikhonov; ignored for the other kinds.
    contour_R : float
        Outer radius of the certification contour.
    contour_phi0 : float
        Opening angle of the certification contour, in ``(0, pi/2)``.
    """

    kind: str
    order: int = 1
    contour_R: float = 1.5
    contour_phi0: float = math.pi / 6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "tikhonov" and (int(self.order) != self.order or self.order < 1):
            raise ValueError("iterated Tikhonov order N must be an integer >= 1")
        if not self.contour_R > 1:
            raise ValueError("contour radius R must exceed 1")
        if not 0 < self.contour_phi0 < math.pi / 2:
            raise ValueError("contour angle phi0 must lie in (0, pi/2)")
        if self.integer_steps and not self.contour_R < 2 * math.cos(self.contour_phi0):
            raise ValueError(
                f"{self.kind} contour needs R < 2 cos(phi0); "
                f"got R={self.contour_R}, 2cos(phi0)={2 * math.cos(self.contour_phi0):.6g}"
            )

    @classmethod
    def tikhonov(cls, order: int = 1, **kw) -> FilterFamily:
        return cls("tikhonov", order=order, **kw)

    @classmethod
    def exponential(cls, **kw) -> FilterFamily:
        return cls("exponential", **kw)

    @classmethod
    def landweber(cls, **kw) -> FilterFamily:
        return cls("landweber", **kw)

    @classmethod
    def lardy(cls, **kw) -> FilterFamily:
        return cls("lardy", **kw)

    @property
    def integer_steps(self) -> bool:
        """Whether ``alpha`` must be the reciprocal of a positive integer."""
        return self.kind in ("landweber", "lardy")

    @property
    def name(self) -> str:
        if self.kind == "tikhonov":
            return f"tikhonov(N={self.order})"
        return self.kind

    def steps(self, alpha: float) -> int:
        """``[1/alpha]`` after checking admissibility."""
        check_alpha(self, alpha)
        return int(round(1.0 / alpha))

    def admissible(self, alpha: float) -> bool:
        try:
            check_alpha(self, alpha)
        except InadmissibleAlpha:
            return False
        return True

    def g(self, alpha, lam):
        return g_scalar(self, alpha, lam)

    def r(self, alpha, lam):
        return r_scalar(self, alpha, lam)

    def phi(self, alpha, z):
        return phi_complex(self, alpha, z)


def check_alpha(family: FilterFamily, alpha: float) -> None:
    if not (np.isfinite(alpha) and alpha > 0):
        raise InadmissibleAlpha(f"alpha must be positive, got {alpha}")
    if family.integer_steps:
        k = round(1.0 / alpha)
        if k < 1 or abs(k * alpha - 1.0) > _INT_TOL:
            raise InadmissibleAlpha(
                f"{family.kind} needs alpha = 1/k for an integer k >= 1, got alpha={alpha!r}"
            )


def _lambda(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0) or np.any(lam > 1):
        raise ValueError("lambda must lie in [0, 1]")
    return lam


def _g(family: FilterFamily, alpha: float, lam: np.ndarray) -> np.ndarray:
    # no range or admissibility checks; lam may carry a rounding excess over 1
    kind = family.kind
    if kind == "tikhonov":
        # sum_{j<N} alpha^j / (alpha+lam)^(j+1): no 0/0 at lam = 0
        q = alpha / (alpha + lam)
        term = 1.0 / (alpha + lam)
        out = term.copy()
        for _ in range(family.order - 1):
            term = term * q
            out += term
        return out
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "exponential":
            x = lam / alpha
            small = x < 1e-8
            out = -np.expm1(-x) / np.where(lam > 0, lam, 1.0)
            series = (1.0 - x / 2 + x * x / 6) / alpha
            return np.where(small, series, out)
        k = int(round(1.0 / alpha))
        safe = np.where(lam > 0, lam, 1.0)
        if kind == "landweber":
            # 1 - (1-lam)^k without cancellation; lam = 1 gives log1p(-1) = -inf
            out = -np.expm1(k * np.log1p(-np.minimum(lam, 1.0))) / safe
        else:
            out = -np.expm1(-k * np.log1p(lam)) / safe
        return np.where(lam > 0, out, float(k))


def _r(family: FilterFamily, alpha: float, lam: np.ndarray) -> np.ndarray:
    kind = family.kind
    if kind == "tikhonov":
        return (alpha / (alpha + lam)) ** family.order
    if kind == "exponential":
        return np.exp(-lam / alpha)
    k = int(round(1.0 / alpha))
    if kind == "landweber":
        return (1.0 - lam) ** k
    return (1.0 + lam) ** (-k)


def g_scalar(family: FilterFamily, alpha: float, lam):
    """Evaluate ``g_alpha(lam)`` for scalar or array ``lam`` in ``[0, 1]``.

    At ``lam = 0`` the continuous extension is returned (``N/alpha`` for
    Tikhonov, ``1/alpha`` for the exponential filter, ``[1/alpha]`` for
    Landweber and Lardy).
    """
    check_alpha(family, alpha)
    lam = _lambda(lam)
    out = _g(family, alpha, np.atleast_1d(lam))
    return out.reshape(lam.shape)[()] if lam.ndim else float(out[0])


def r_scalar(family: FilterFamily, alpha: float, lam):
    """Evaluate the residual function ``r_alpha(lam) = 1 - lam g_alpha(lam)``."""
    check_alpha(family, alpha)
    lam = _lambda(lam)
    out = _r(family, alpha, np.atleast_1d(lam))
    return out.reshape(lam.shape)[()] if lam.ndim else float(out[0])


def _clog1p(z: np.ndarray) -> np.ndarray:
    # numpy's complex log1p loses the real part for tiny |z|
    x, y = z.real, z.imag
    re = 0.5 * np.log1p(2 * x + x * x + y * y)
    im = np.arctan2(y, 1.0 + x)
    return re + 1j * im


def phi_complex(family: FilterFamily, alpha: float, z):
    """``phi_alpha(z) = g_alpha(z) - 1/(alpha + z)`` continued to complex ``z``.

    Defined for ``z`` away from ``-alpha`` and ``-1``. Integer powers
    ``(1 -/+ z)^k`` are evaluated as ``exp(k Log(1 -/+ z))`` with the
    principal logarithm, which is single valued for integer ``k``.
    """
    check_alpha(family, alpha)
    zs = np.asarray(z, dtype=complex)
    z1 = np.atleast_1d(zs)
    if np.any(z1 == -alpha) or np.any(z1 == -1):
        raise ValueError("phi_alpha is undefined at z = -alpha and z = -1")
    kind = family.kind
    eta = 1.0 / (alpha + z1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind == "tikhonov":
            q = alpha * eta
            term = eta.copy()
            g = eta.copy()
            for _ in range(family.order - 1):
                term = term * q
                g = g + term
            out = g - eta
        else:
            if kind == "exponential":
                num = -np.expm1(-z1 / alpha)
                limit = 1.0 / alpha
            else:
                k = int(round(1.0 / alpha))
                limit = float(k)
                if kind == "landweber":
                    num = -np.expm1(k * _clog1p(-z1))
                else:
                    num = -np.expm1(-k * _clog1p(z1))
            zero = z1 == 0
            g = num / np.where(zero, 1.0, z1)
            g = np.where(zero, limit, g)
            if kind == "landweber":
                # Log(0) at z = 1: (1 - z)^k = 0
                g = np.where(z1 == 1, 1.0 + 0j, g)
            out = g - eta
    out = out.reshape(zs.shape)
    return out if zs.ndim else complex(out)


def _spectrum(A) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    """Eigen-decomposition of ``A^T A``; diagonal ``A`` may be given as a vector."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        return A * A, None, A
    lam, V = np.linalg.eigh(A.T @ A)
    return lam, V, A


def filter_step_spectral(family: FilterFamily, alpha: float, A, residual) -> np.ndarray:
    """Compute ``g_alpha(A^T A) A^T residual`` through the eigenvalues of ``A^T A``.

    ``A`` is a dense matrix, or a 1-D array holding the diagonal of a
    diagonal operator. The spectrum of ``A^T A`` must lie in ``[0, 1]``.
    """
    check_alpha(family, alpha)
    residual = np.asarray(residual, dtype=float)
    lam, V, A = _spectrum(A)
    top = float(lam.max(initial=0.0))
    if top > 1.0 + SPECTRUM_TOL:
        raise ScalingError(
            f"spectral radius of A*A is {top:.12g} > 1: the problem is not properly scaled"
        )
    lam = np.clip(lam, 0.0, 1.0)
    gl = _g(family, alpha, lam)
    if V is None:
        return gl * (A * residual)
    return V @ (gl * (V.T @ (A.T @ residual)))


def _solve_shifted(apply_AtA, shift: float, rhs: np.ndarray, tol: float, maxiter: int | None):
    """Solve ``(shift I + A^T A) u = rhs`` by conjugate gradients."""
    n = rhs.size
    op = LinearOperator((n, n), matvec=lambda u: shift * u + apply_AtA(u), dtype=float)
    if not np.any(rhs):
        return np.zeros(n)
    u, info = cg(op, rhs, rtol=tol, atol=0.0, maxiter=maxiter or 10 * n + 100)
    if info != 0:
        raise InnerSolveError(f"conjugate gradients did not converge (info={info})")
    return u


def filter_step_iterative(
    family: FilterFamily,
    alpha: float,
    apply_A,
    apply_At,
    residual,
    *,
    tol: float = 1e-13,
    maxiter: int | None = None,
    ode_dt: float = 0.01,
    ode_steps: int | None = None,
) -> np.ndarray:
    """Compute ``g_alpha(A^T A) A^T residual`` with the family's inner iteration.

    Only products with ``A`` and ``A^T`` are used:

    * tikhonov: ``N`` regularized normal-equation solves (conjugate gradients),
    * exponential: classical Runge-Kutta for ``h' = A^T(residual - A h)``,
      ``h(0) = 0``, integrated to ``t = 1/alpha``,
    * landweber: ``[1/alpha]`` sweeps ``h += A^T(residual - A h)``,
    * lardy: ``[1/alpha]`` sweeps ``h += (I + A^T A)^-1 A^T(residual - A h)``.

    Parameters
    ----------
    tol, maxiter : float, int
        Relative tolerance and iteration cap of each conjugate gradient solve.
    ode_dt, ode_steps : float, int
        Runge-Kutta step size, or an explicit number of steps.
    """
    check_alpha(family, alpha)
    residual = np.asarray(residual, dtype=float)
    b = np.asarray(apply_At(residual), dtype=float)
    h = np.zeros_like(b)

    def AtA(u):
        return apply_At(apply_A(u))

    kind = family.kind
    if kind == "tikhonov":
        for _ in range(family.order):
            h = h + _solve_shifted(AtA, alpha, b - AtA(h), tol, maxiter)
    elif kind == "exponential":
        T = 1.0 / alpha
        n = ode_steps or max(1, math.ceil(T / ode_dt))
        dt = T / n

        def f(u):
            return b - AtA(u)

        for _ in range(n):
            k1 = f(h)
            k2 = f(h + 0.5 * dt * k1)
            k3 = f(h + 0.5 * dt * k2)
            k4 = f(h + dt * k3)
            h = h + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    elif kind == "landweber":
        for _ in range(family.steps(alpha)):
            h = h + (b - AtA(h))
    else:
        for _ in range(family.steps(alpha)):
            h = h + _solve_shifted(AtA, 1.0, b - AtA(h), tol, maxiter)
    return h
