"""Synthetic forward problems with known structural constants.

Both problems live in the eigenbasis of the scale generator ``L`` and use
the smoothing operator ``T = diag(l_k^-a)``, so ``||T h|| = ||h||_{-a}``
exactly.

``DiagonalLinear``
    ``F(x) = c T x``.
``QuadraticRank1``
    ``F(x) = c [T x + (gamma/2) (<T x, v> - <T x_true, v>)^2 v]`` with a unit
    vector ``v``. Its derivative is ``F'(x) = R_x F'(x_true)`` with
    ``R_x = I + gamma <T(x - x_true), v> v v^T``.

``c`` is the scaling factor set by :func:`rescale_to_assumption3b`.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert_scale import ScaleOperator, default_scale, norm_r


class PowerIterationError(RuntimeError):
    """Power iteration did not converge."""


@dataclass(frozen=True, eq=False)
class ForwardProblem:
    """Common contract: ``eval``, ``deriv_apply``, ``adjoint_apply``, ``jacobian``.

    Attributes ``a, b, beta, K0, m, M, rho`` are the constants of the
    structural conditions, already multiplied by ``factor``.
    """

    scale: ScaleOperator
    a: float
    x_truth: np.ndarray
    factor: float = 1.0
    rho: float = math.inf

    name = "abstract"
    diagonal = False

    def __post_init__(self):
        x = np.array(self.x_truth, dtype=float)
        if x.shape != (self.scale.dim,):
            raise ValueError("x_truth does not match the scale dimension")
        x.setflags(write=False)
        object.__setattr__(self, "x_truth", x)
        sigma = self.scale.power(-self.a)
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @property
    def dim(self) -> int:
        return self.scale.dim

    @property
    def y_exact(self) -> np.ndarray:
        return self.eval(self.x_truth)

    def with_truth(self, x_truth) -> ForwardProblem:
        return dataclasses.replace(self, x_truth=x_truth)

    def scaled(self, c: float) -> ForwardProblem:
        """The problem ``c F`` (all constants rescaled accordingly)."""
        return dataclasses.replace(self, factor=self.factor * c)

    def in_ball(self, x) -> bool:
        return bool(np.linalg.norm(np.asarray(x) - self.x_truth) <= self.rho)

    # subclasses implement the operator contract
    def eval(self, x) -> np.ndarray:
        raise NotImplementedError

    def deriv_apply(self, x, h) -> np.ndarray:
        raise NotImplementedError

    def adjoint_apply(self, x, w) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        """Dense ``F'(x)``; diagonal problems return the diagonal as a 1-D array."""
        raise NotImplementedError

    def describe(self) -> dict:
        return {"name": self.name, "K": self.dim, "a": self.a, "b": self.b, "beta": self.beta,
                "K0": self.K0, "m": self.m, "M": self.M, "rho": self.rho, "factor": self.factor}


@dataclass(frozen=True, eq=False)
class DiagonalLinear(ForwardProblem):
    name = "diagonal-linear"
    diagonal = True

    @property
    def b(self):
        return self.a

    beta = 1.0
    K0 = 0.0

    @property
    def m(self):
        return self.factor

    @property
    def M(self):
        return self.factor

    def eval(self, x):
        return self.factor * self.sigma * np.asarray(x, dtype=float)

    def deriv_apply(self, x, h):
        return self.factor * self.sigma * np.asarray(h, dtype=float)

    def adjoint_apply(self, x, w):
        return self.factor * self.sigma * np.asarray(w, dtype=float)

    def jacobian(self, x):
        return self.factor * self.sigma


@dataclass(frozen=True, eq=False)
class QuadraticRank1(ForwardProblem):
    gamma: float = 0.05
    v: np.ndarray = field(default=None)

    name = "quadratic-rank1"

    def __post_init__(self):
        super().__post_init__()
        v = np.full(self.dim, 1.0) if self.v is None else np.array(self.v, dtype=float)
        if v.shape != (self.dim,) or not np.any(v):
            raise ValueError("v must be a nonzero vector of the problem dimension")
        v = v / np.linalg.norm(v)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self._perturbation_bound() < 1:
            raise ValueError(
                f"gamma * theta^a * rho = {self._perturbation_bound():.4g} must be < 1, "
                "otherwise the derivative may degenerate inside the ball"
            )
        object.__setattr__(self, "_c_true", float(self.v @ (self.sigma * self.x_truth)))

    def _perturbation_bound(self):
        # sup over the ball of ||I - R_x|| = gamma |<T(x - x_true), v>|
        return self.gamma * self.scale.theta ** self.a * self.rho

    @property
    def b(self):
        return self.a

    beta = 1.0

    @property
    def K0(self):
        return self.factor * self.gamma * self.scale.theta ** self.a

    @property
    def m(self):
        return self.factor * (1.0 - self._perturbation_bound())

    @property
    def M(self):
        return self.factor * (1.0 + self._perturbation_bound())

    def _d(self, x):
        return float(self.v @ (self.sigma * np.asarray(x, dtype=float))) - self._c_true

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        d = self._d(x)
        return self.factor * (self.sigma * x + 0.5 * self.gamma * d * d * self.v)

    def deriv_apply(self, x, h):
        Th = self.sigma * np.asarray(h, dtype=float)
        return self.factor * (Th + self.gamma * self._d(x) * float(self.v @ Th) * self.v)

    def adjoint_apply(self, x, w):
        w = np.asarray(w, dtype=float)
        return self.factor * self.sigma * (w + self.gamma * self._d(x) * float(self.v @ w) * self.v)

    def jacobian(self, x):
        J = np.diag(self.sigma) + self.gamma * self._d(x) * np.outer(self.v, self.v * self.sigma)
        return self.factor * J

    def describe(self):
        out = super().describe()
        out["gamma"] = self.gamma
        return out


def make_diagonal_linear(K: int, a: float, x_truth=None, scale: ScaleOperator | None = None) -> DiagonalLinear:
    """``F(x) = T x`` with ``T = diag(l_k^-a)``; ``m = M = 1``, ``K0 = 0``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    if a < 0:
        raise ValueError("the smoothing degree a must be >= 0")
    scale = scale or default_scale(K)
    if scale.dim != K:
        raise ValueError("scale dimension differs from K")
    x_truth = scale.power(-2.0) if x_truth is None else x_truth
    return DiagonalLinear(scale, float(a), x_truth)


def make_quadratic_perturbed(K: int, a: float, gamma: float = 0.05, v=None, x_truth=None,
                             rho: float = 1.0, scale: ScaleOperator | None = None) -> QuadraticRank1:
    """Rank-one quadratic perturbation of :func:`make_diagonal_linear`.

    ``v`` defaults to the normalized vector ``v_k ~ 1/k`` so that the
    nonlinearity acts on the modes the data actually sees.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    scale = scale or default_scale(K)
    if v is None:
        v = 1.0 / np.arange(1, K + 1)
    x_truth = scale.power(-2.0) if x_truth is None else x_truth
    return QuadraticRank1(scale, float(a), x_truth, rho=float(rho), gamma=float(gamma), v=v)


CATALOG = {
    "diagonal-linear": make_diagonal_linear,
    "quadratic-rank1": make_quadratic_perturbed,
}


def operator_norm(apply, apply_t, dim: int, maxiter: int = 200, tol: float = 1e-10, seed: int = 0) -> float:
    """Largest singular value of a linear map by power iteration on ``B^T B``."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(maxiter):
        Bv = apply(v)
        new = float(np.linalg.norm(Bv))
        if new == 0.0:
            return 0.0
        if abs(new - est) <= tol * new:
            return new
        est = new
        v = apply_t(Bv)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
    raise PowerIterationError(f"power iteration did not converge in {maxiter} iterations")


def scaled_derivative_norm(problem: ForwardProblem, x, s: float, **kw) -> float:
    """``||F'(x) L^-s||`` by power iteration."""
    ls = problem.scale.power(-s)
    return operator_norm(
        lambda h: problem.deriv_apply(x, ls * h),
        lambda w: ls * problem.adjoint_apply(x, w),
        problem.dim, **kw,
    )


def rescale_to_assumption3b(problem: ForwardProblem, s: float, alpha0: float, x=None):
    """Scale ``F`` so that ``||F'(x) L^-s|| <= min(1, sqrt(alpha0))`` on the ball.

    The norm is estimated at ``x`` (default ``x_truth``) by power iteration
    and inflated by the frame ratio ``M/m``, which bounds its variation over
    the ball. Returns ``(scaled_problem, c)``.
    """
    if s < -problem.a:
        raise ValueError("the scale exponent must satisfy s >= -a")
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    x = problem.x_truth if x is None else x
    est = scaled_derivative_norm(problem, x, s) * (problem.M / problem.m)
    if est == 0.0:
        raise PowerIterationError("derivative vanishes: degenerate problem")
    c = min(1.0, math.sqrt(alpha0)) / est
    return problem.scaled(c), c


@dataclass(frozen=True, eq=False)
class NoisyData:
    y_delta: np.ndarray
    delta: float
    seed: int


def make_noisy(problem: ForwardProblem, delta: float, seed: int = 0, y=None) -> NoisyData:
    """``y_delta = y + delta xi/||xi||`` with seeded Gaussian ``xi``.

    The realized ``||y_delta - y||`` matches ``delta`` up to the resolution
    of floating point data, roughly ``ulp(min |y_k|) / delta`` relative.
    """
    if delta < 0:
        raise ValueError("noise level must be nonnegative")
    y = problem.y_exact if y is None else np.asarray(y, dtype=float)
    if delta == 0:
        return NoisyData(y.copy(), 0.0, seed)
    xi = np.random.default_rng(seed).standard_normal(y.size)
    yd = y + delta * xi / np.linalg.norm(xi)
    # rounding in y + n perturbs the realized noise norm by ~ulp(y)/delta;
    # renormalize, then set the norm exactly through the finest-resolved component
    for _ in range(3):
        d = yd - y
        yd = y + d * (delta / np.linalg.norm(d))
    d = yd - y
    j = int(np.argmax(np.abs(d) / np.spacing(np.abs(yd))))
    rest = math.fsum((np.delete(d, j) ** 2).tolist())
    if delta * delta > rest:
        yd[j] = y[j] + math.copysign(math.sqrt(delta * delta - rest), d[j])
    return NoisyData(yd, float(delta), seed)


@dataclass(frozen=True, eq=False)
class SourceElement:
    mu: float
    s: float
    omega: np.ndarray
    e0: np.ndarray
    omega_norm: float


def smoothness_window(problem: ForwardProblem, s: float) -> tuple[float, float]:
    """Admissible ``mu`` interval ``((a - b)/beta, b + 2s]``."""
    return (problem.a - problem.b) / problem.beta, problem.b + 2 * s


def construct_source(problem: ForwardProblem, s: float, mu: float, omega):
    """Initial error with ``L^s e0 = (A^T A)^((mu - s)/(2(a + s))) omega``.

    ``A = F'(x_true) L^-s``. Returns ``(SourceElement, x0)`` with
    ``x0 = x_true + e0``.
    """
    a = problem.a
    if not a + s > 0:
        raise ValueError("source construction needs a + s > 0")
    lo, hi = smoothness_window(problem, s)
    if not lo < mu <= hi:
        raise ValueError(f"smoothness index mu={mu} outside the window ({lo:g}, {hi:g}]")
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (problem.dim,):
        raise ValueError("omega does not match the problem dimension")
    p = (mu - s) / (2 * (a + s))
    ls = problem.scale.power(-s)
    J = problem.jacobian(problem.x_truth)
    if J.ndim == 1:
        lam = (J * ls) ** 2
        Ls_e0 = lam ** p * omega
    else:
        A = J * ls[None, :]
        lam, V = np.linalg.eigh(A.T @ A)
        if p < 0 and lam.min() <= 0:
            raise ValueError("A^T A is singular; negative powers are undefined")
        Ls_e0 = V @ (np.clip(lam, 0, None) ** p * (V.T @ omega))
    e0 = ls * Ls_e0
    src = SourceElement(float(mu), float(s), omega.copy(), e0, float(np.linalg.norm(omega)))
    return src, problem.x_truth + e0


def sample_ball(problem: ForwardProblem, count: int, seed: int = 0, radius: float | None = None):
    """Random points ``x_true + e`` with ``0 < ||e|| <= radius`` (default ``rho``, or 1)."""
    radius = radius if radius is not None else (problem.rho if math.isfinite(problem.rho) else 1.0)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = rng.standard_normal(problem.dim)
        d /= np.linalg.norm(d)
        out.append(problem.x_truth + radius * rng.uniform(0.05, 1.0) * d)
    return out


def holder_probe(problem: ForwardProblem, sample_count: int = 20, seed: int = 0) -> float:
    """Empirical ``max ||[F'(x) - F'(x_true)] L^b|| / ||x - x_true||^beta`` over ball samples."""
    lb = problem.scale.power(problem.b)
    xt = problem.x_truth
    worst = 0.0
    for x in sample_ball(problem, sample_count, seed):
        dist = float(np.linalg.norm(x - xt))
        if dist == 0.0:
            continue
        nrm = operator_norm(
            lambda h: problem.deriv_apply(x, lb * h) - problem.deriv_apply(xt, lb * h),
            lambda w: lb * (problem.adjoint_apply(x, w) - problem.adjoint_apply(xt, w)),
            problem.dim,
        )
        worst = max(worst, nrm / dist ** problem.beta)
    return worst


def frame_ratios(problem: ForwardProblem, sample_count: int = 20, seed: int = 0) -> np.ndarray:
    """Ratios ``||F'(x) h|| / ||h||_{-a}`` for random ball points and directions."""
    rng = np.random.default_rng(seed + 1)
    out = []
    for x in sample_ball(problem, sample_count, seed):
        h = rng.standard_normal(problem.dim)
        out.append(np.linalg.norm(problem.deriv_apply(x, h)) / norm_r(problem.scale, -problem.a, h))
    return np.array(out)


def taylor_remainder(problem: ForwardProblem, x) -> tuple[float, float]:
    """``(||F(x) - y - F'(x_true)(x - x_true)||, K0 ||e||^beta ||e||_{-b}``)."""
    e = np.asarray(x, dtype=float) - problem.x_truth
    lhs = np.linalg.norm(problem.eval(x) - problem.y_exact - problem.deriv_apply(problem.x_truth, e))
    rhs = problem.K0 * np.linalg.norm(e) ** problem.beta * norm_r(problem.scale, -problem.b, e)
    return float(lhs), float(rhs)
