"""A-priori step schedules ``alpha_0, alpha_1, ...`` and their partial sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class AlphaSchedule:
    """A finite prefix of a step schedule.

    ``s[n] = sum_{j<=n} 1/alpha_j`` are the accumulated sums (with the
    convention ``s_{-1} = 0``). ``c0`` and ``c1`` are the declared constants
    in ``s_{n+1} <= c0 s_n`` and ``alpha_n <= c1``.
    """

    alphas: np.ndarray
    c0: float
    c1: float
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float).ravel()
        if a.size == 0:
            raise ValueError("a schedule needs at least one step")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ValueError("all alpha_n must be positive and finite")
        if not self.c0 > 1:
            raise ValueError("c0 must exceed 1")
        if not self.c1 > 0:
            raise ValueError("c1 must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        s = _accumulate(1.0 / a)
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    def __len__(self):
        return self.alphas.size

    def s_prev(self, j: int) -> float:
        """``s_{j-1}``, zero for ``j = 0``."""
        return 0.0 if j == 0 else float(self.s[j - 1])

    @classmethod
    def from_alphas(cls, alphas, c0: float | None = None, c1: float | None = None, kind="custom",
                    params=None) -> AlphaSchedule:
        """Build a schedule; unspecified constants are set to their tightest valid values."""
        a = np.asarray(alphas, dtype=float).ravel()
        t0, t1 = _tight_constants(a)
        return cls(a, t0 if c0 is None else c0, t1 if c1 is None else c1, kind, dict(params or {}))

    def extended(self, length: int) -> AlphaSchedule:
        """The same kind of schedule with a different prefix length."""
        if self.kind == "custom":
            raise ValueError("custom schedules cannot be extended")
        return make_schedule(self.kind, length, **self.params)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params, "length": len(self),
                "c0": self.c0, "c1": self.c1}


def _accumulate(x: np.ndarray) -> np.ndarray:
    # compensated running sum; exact for integer-valued increments
    out = np.empty_like(x)
    total = comp = 0.0
    for i, v in enumerate(x.tolist()):
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


def _tight_constants(alphas: np.ndarray) -> tuple[float, float]:
    s = _accumulate(1.0 / alphas)
    c1 = float(alphas.max())
    if s.size > 1:
        c0 = float(np.max(s[1:] / s[:-1]))
    else:
        c0 = 2.0
    return c0, c1


def _integer_rule(rule, length: int) -> np.ndarray:
    if callable(rule):
        k = [rule(n) for n in range(length)]
    elif rule == "linear":
        k = [n + 1 for n in range(length)]
    elif rule == "constant":
        k = [1] * length
    elif isinstance(rule, str) and rule.startswith("geometric:"):
        # "geometric:g" -> k_n = ceil(g^n)
        g = float(rule.split(":", 1)[1])
        if not g >= 1:
            raise ValueError("geometric integer growth factor must be >= 1")
        k = [math.ceil(g ** n - 1e-9) for n in range(length)]
    else:
        k = list(rule)
        if len(k) < length:
            raise ValueError("explicit k_n list shorter than the requested length")
        k = k[:length]
    k = np.asarray(k, dtype=float)
    if np.any(k < 1) or np.any(k != np.round(k)):
        raise ValueError("reciprocal-integer schedules need integers k_n >= 1")
    return k


def make_schedule(kind: str, length: int, **params) -> AlphaSchedule:
    """Build a schedule prefix of the given length.

    Kinds and their parameters:

    * ``"constant"``: ``alpha`` (``alpha_n = alpha``);
    * ``"geometric"``: ``alpha0``, ``q`` in ``(0, 1)`` (``alpha_n = alpha0 q^n``);
    * ``"reciprocal_integers"``: ``k``, a rule for integers ``k_n`` with
      ``alpha_n = 1/k_n``. ``k`` is ``"linear"`` (``k_n = n+1``),
      ``"constant"`` (``k_n = 1``), ``"geometric:g"`` (``k_n = ceil(g^n)``),
      a callable ``n -> k_n`` or an explicit sequence.

    ``c0`` and ``c1`` are set to the tightest values valid on the prefix.
    """
    if length < 1:
        raise ValueError("schedule length must be at least 1")
    n = np.arange(length, dtype=float)
    if kind == "constant":
        alpha = float(params.get("alpha", 1.0))
        if not alpha > 0:
            raise ValueError("constant schedule needs alpha > 0")
        alphas = np.full(length, alpha)
    elif kind == "geometric":
        alpha0 = float(params.get("alpha0", 1.0))
        q = float(params.get("q", 0.5))
        if not alpha0 > 0:
            raise ValueError("geometric schedule needs alpha0 > 0")
        if not 0 < q < 1:
            raise ValueError("geometric schedule needs 0 < q < 1")
        alphas = alpha0 * q ** n
        if not np.all(alphas > 0) or not np.isfinite(np.sum(1.0 / alphas)):
            raise ValueError("geometric schedule underflows: shorten it or raise q")
    elif kind == "reciprocal_integers":
        alphas = 1.0 / _integer_rule(params.get("k", "linear"), length)
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")
    return AlphaSchedule.from_alphas(alphas, kind=kind, params=params)


@dataclass
class ScheduleReport:
    c0_empirical: float
    c1_empirical: float
    c0_ok: bool
    c1_ok: bool
    strictly_increasing: bool
    unbounded: bool

    @property
    def passed(self) -> bool:
        return self.c0_ok and self.c1_ok and self.strictly_increasing and self.unbounded


def validate_schedule(sched: AlphaSchedule) -> ScheduleReport:
    """Check the growth conditions on the stored prefix.

    Divergence of ``s_n`` cannot be observed on a finite prefix; it is
    reported as the sufficient condition that every increment ``1/alpha_n``
    is at least ``1/c1``, i.e. ``s_n >= (n+1)/c1``.
    """
    c0e, c1e = _tight_constants(sched.alphas)
    s = sched.s
    increasing = bool(np.all(np.diff(s) > 0)) and s[0] > 0
    c1_ok = c1e <= sched.c1
    c0_ok = len(sched) == 1 or c0e <= sched.c0
    return ScheduleReport(
        c0_empirical=c0e,
        c1_empirical=c1e,
        c0_ok=bool(c0_ok),
        c1_ok=bool(c1_ok),
        strictly_increasing=increasing,
        unbounded=bool(increasing and c1_ok),
    )
