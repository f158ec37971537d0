"""Numerical certification of the structure conditions on a filter family.

Two conditions are checked:

* the product bounds on a grid of ``(nu, lam, j, n)`` (``check_assumption2``),
* boundedness of the contour integral of ``|phi_alpha|`` and the resolvent
  constant ``b0`` on the keyhole contour around ``[0, 1]``
  (``check_assumption1``).

Neither check proves anything; they evaluate the inequalities on finite
grids and with a fixed quadrature, and report the empirical constants.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .filters import FilterFamily, _g, _r, check_alpha, phi_complex
from .schedules import AlphaSchedule


def default_lambda_grid() -> np.ndarray:
    # uniform part plus a log-spaced part that resolves maxima at lam ~ 1/s_n
    return np.unique(np.concatenate([np.linspace(0.0, 1.0, 501), np.logspace(-18, 0, 361)]))


@dataclass
class AssumptionCheckConfig:
    nu_grid: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    n_max: int = 50
    quadrature_nodes: int = 512
    panel_order: int = 32

    def __post_init__(self):
        self.nu_grid = np.atleast_1d(np.asarray(self.nu_grid, dtype=float))
        self.lambda_grid = np.atleast_1d(np.asarray(self.lambda_grid, dtype=float))
        if self.nu_grid.size == 0 or self.lambda_grid.size == 0:
            raise ValueError("nu and lambda grids must be non-empty")
        if np.any((self.nu_grid < 0) | (self.nu_grid > 1)):
            raise ValueError("nu grid must lie in [0, 1]")
        if np.any((self.lambda_grid < 0) | (self.lambda_grid > 1)):
            raise ValueError("lambda grid must lie in [0, 1]")
        if self.n_max < 0:
            raise ValueError("n_max must be nonnegative")
        if self.quadrature_nodes < self.panel_order or self.quadrature_nodes % self.panel_order:
            raise ValueError("quadrature_nodes must be a positive multiple of panel_order")


@dataclass
class Assumption2Report:
    family: str
    schedule_kind: str
    n_max: int
    max_V1: float
    b2_estimate: float
    argmax_V1: dict

    @property
    def passed(self) -> bool:
        return self.max_V1 <= 1.0 + 1e-10


def check_assumption2(family: FilterFamily, sched: AlphaSchedule,
                      cfg: AssumptionCheckConfig | None = None) -> Assumption2Report:
    """Evaluate the normalized product bounds on a grid.

    For ``0 <= j <= n <= n_max``, ``nu`` and ``lam`` on the grids::

        V1 = lam^nu prod_{k=j..n} r_k(lam) (s_n - s_{j-1})^nu
        V2 = lam^nu g_j(lam) prod_{k=j+1..n} r_k(lam) alpha_j (s_n - s_{j-1})^nu

    ``max V1`` must not exceed 1; ``max V2`` is the empirical ``b2``.
    """
    cfg = cfg or AssumptionCheckConfig()
    n_max = min(cfg.n_max, len(sched) - 1)
    alphas = sched.alphas[: n_max + 1]
    for a in alphas:
        check_alpha(family, float(a))
    s = sched.s[: n_max + 1]
    lam = cfg.lambda_grid
    nu = cfg.nu_grid[:, None]
    lam_nu = lam[None, :] ** nu  # 0**0 = 1
    R = np.stack([_r(family, float(a), lam) for a in alphas])
    G = np.stack([_g(family, float(a), lam) for a in alphas])

    best1, best2, where = -np.inf, -np.inf, {}
    for j in range(n_max + 1):
        s_prev = sched.s_prev(j)
        # prod_{k=j+1..n} r_k for n = j..n_max (empty product first)
        tail = np.vstack([np.ones_like(lam), np.cumprod(R[j + 1:], axis=0)])
        span = (s[j:] - s_prev)[:, None, None] ** nu[None]  # (n, nu, 1)
        v1 = lam_nu[None] * (R[j] * tail)[:, None, :] * span
        v2 = lam_nu[None] * (G[j] * tail)[:, None, :] * alphas[j] * span
        m1 = float(v1.max())
        if m1 > best1:
            best1 = m1
            n_i, nu_i, lam_i = np.unravel_index(int(v1.argmax()), v1.shape)
            where = {"j": j, "n": j + int(n_i), "nu": float(cfg.nu_grid[nu_i]), "lam": float(lam[lam_i])}
        best2 = max(best2, float(v2.max()))
    return Assumption2Report(family.name, sched.kind, n_max, best1, best2, where)


def lemma1_probe(sched: AlphaSchedule, nu_grid=None, lambda_grid=None,
                 family: FilterFamily | None = None, n_max: int = 50, alphas=None) -> float:
    """Largest ratio LHS/RHS of the resolvent-product bound on the grid.

    Checks ``lam^nu (alpha+lam)^-1 prod_{k=j+1..n} r_k(lam) <=
    2 alpha^(nu-1) (1 + alpha (s_n - s_j))^-nu`` for ``alpha`` ranging over
    the distinct schedule values (or ``alphas`` if given). A value ``<= 1``
    means the bound holds everywhere on the grid.
    """
    family = family or FilterFamily.tikhonov(1)
    nu = np.asarray([0.0, 0.25, 0.5, 0.75, 1.0] if nu_grid is None else nu_grid, dtype=float)
    lam = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    n_max = min(n_max, len(sched) - 1)
    sa = sched.alphas[: n_max + 1]
    s = sched.s[: n_max + 1]
    av = np.unique(sa) if alphas is None else np.asarray(alphas, dtype=float)
    R = np.stack([_r(family, float(a), lam) for a in sa])

    A = av[:, None, None]
    NU = nu[None, :, None]
    base = lam[None, None, :] ** NU / (A + lam[None, None, :])  # (alpha, nu, lam)
    worst = 0.0
    for j in range(n_max + 1):
        prod = np.ones_like(lam)
        for n in range(j, n_max + 1):
            if n > j:
                prod = prod * R[n]
            lhs = base * prod[None, None, :]
            rhs = 2.0 * A ** (NU - 1.0) * (1.0 + A * (s[n] - s[j])) ** (-NU)
            worst = max(worst, float((lhs / rhs).max()))
    return worst


# --- contour ---------------------------------------------------------------


def _gauss_panels(a: float, b: float, panels: int, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def contour_arcs(alpha: float, R: float, phi0: float, nodes: int = 512, order: int = 32):
    """Quadrature on the four pieces of the keyhole contour around ``[0, 1]``.

    Returns a list of ``(z, |dz| weights)`` pairs for

    1. the small arc ``(alpha/2) e^{i phi}``, ``phi0 <= phi <= 2 pi - phi0``,
    2. the large arc ``R e^{i phi}``, ``-phi0 <= phi <= phi0``,
    3. and 4. the rays ``t e^{+-i phi0}``, ``alpha/2 <= t <= R``.

    Each piece uses composite Gauss-Legendre with ``nodes`` points in panels of
    ``order``; the rays are parametrized by ``log t`` so that the panels
    resolve the scale ``t ~ alpha`` as well as ``t ~ R``.
    """
    panels = nodes // order
    r0 = alpha / 2.0
    th, w = _gauss_panels(phi0, 2 * math.pi - phi0, panels, order)
    arc1 = (r0 * np.exp(1j * th), r0 * w)
    th, w = _gauss_panels(-phi0, phi0, panels, order)
    arc2 = (R * np.exp(1j * th), R * w)
    u, w = _gauss_panels(math.log(r0), math.log(R), panels, order)
    t = np.exp(u)
    arc3 = (t * np.exp(1j * phi0), t * w)
    arc4 = (t * np.exp(-1j * phi0), t * w)
    return [arc1, arc2, arc3, arc4]


@dataclass
class Assumption1Report:
    family: str
    alpha: float
    b1_integral: float
    b1_refined: float
    quadrature_refinement_delta: float
    b0_estimate: float
    min_abs_z: float

    @property
    def refinement_ok(self) -> bool:
        return self.quadrature_refinement_delta < 0.01

    def to_dict(self) -> dict:
        return asdict(self)


def _contour_integral(family, alpha, R, phi0, nodes, order):
    total = 0.0
    for z, w in contour_arcs(alpha, R, phi0, nodes, order):
        total += float(np.sum(np.abs(phi_complex(family, alpha, z)) * w))
    return total


def check_assumption1(family: FilterFamily, alpha: float,
                      cfg: AssumptionCheckConfig | None = None) -> Assumption1Report:
    """Integrate ``|phi_alpha|`` over the contour and estimate ``b0``.

    The integral is computed with ``cfg.quadrature_nodes`` nodes per arc and
    again with twice as many; the relative change is reported as
    ``quadrature_refinement_delta``. ``b0`` is the maximum of
    ``(|z| + lam)/|z - lam|`` over contour nodes and the lambda grid.
    """
    cfg = cfg or AssumptionCheckConfig()
    check_alpha(family, alpha)
    R, phi0 = family.contour_R, family.contour_phi0
    if not R > max(1.0, alpha):
        raise ValueError(f"contour radius R={R} must exceed max(1, alpha)")
    coarse = _contour_integral(family, alpha, R, phi0, cfg.quadrature_nodes, cfg.panel_order)
    fine = _contour_integral(family, alpha, R, phi0, 2 * cfg.quadrature_nodes, cfg.panel_order)
    scale = max(abs(fine), abs(coarse))
    delta = abs(fine - coarse) / scale if scale > 1e-14 else 0.0

    z = np.concatenate([a[0] for a in contour_arcs(alpha, R, phi0, cfg.quadrature_nodes, cfg.panel_order)])
    lam = cfg.lambda_grid
    az = np.abs(z)[:, None]
    b0 = float(np.max((az + lam[None, :]) / np.abs(z[:, None] - lam[None, :])))
    return Assumption1Report(family.name, float(alpha), coarse, fine, delta, b0, float(np.abs(z).min()))
