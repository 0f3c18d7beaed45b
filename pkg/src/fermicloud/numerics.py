"""Deterministic numerical kernels shared by the rest of the package.

Three primitives live here: quadrature over ``[0, inf)`` with a caller-chosen
split point, root finding on a monotone function with automatic bracket
expansion, and adaptive Runge-Kutta integration with dense output.  They are
thin, carefully-configured wrappers around the corresponding QUADPACK /
Brent / Dormand-Prince routines in scipy.

Every routine is a pure function of its inputs: no hidden state, no
randomness, so repeated calls with identical arguments give bit-identical
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

__all__ = [
    "NumericsConfig",
    "DEFAULT_CONFIG",
    "NumericsError",
    "DomainError",
    "ConfigError",
    "QuadratureError",
    "BracketError",
    "StepLimitError",
    "BlowUpError",
    "PositivityError",
    "OdePath",
    "integrate_semi_infinite",
    "find_root_monotone",
    "ode_integrate",
]


class NumericsError(Exception):
    """Base class for numerical failures raised by this package."""


class DomainError(NumericsError, ValueError):
    """An input lies outside the mathematical domain of the operation."""


class ConfigError(NumericsError, ValueError):
    """A configuration value is inconsistent or out of range."""


class QuadratureError(NumericsError):
    """Adaptive quadrature failed to converge within its refinement budget.

    Carries the partial result so callers can inspect how far it got.
    """

    def __init__(self, message: str, value: float, err_est: float):
        super().__init__(f"{message} (partial value {value!r}, err_est {err_est!r})")
        self.value = value
        self.err_est = err_est


class BracketError(NumericsError):
    """No sign change could be bracketed for the root finder."""


class StepLimitError(NumericsError):
    """ODE integration exceeded the configured step budget."""


class BlowUpError(NumericsError):
    """The ODE solution left the representable range in finite time.

    Carries the last valid time and state.
    """

    def __init__(self, message: str, t: float, state: np.ndarray):
        super().__init__(f"{message} (t={t!r}, state={state!r})")
        self.t = t
        self.state = state


class PositivityError(NumericsError):
    """A quantity required to stay positive crossed zero during integration."""

    def __init__(self, message: str, t: float, state: np.ndarray):
        super().__init__(f"{message} (t={t!r}, state={state!r})")
        self.t = t
        self.state = state


@dataclass(frozen=True)
class NumericsConfig:
    """Shared tolerance and budget settings.

    Attributes
    ----------
    quad_rel_tol : relative tolerance for quadrature.
    quad_split_margin : distance past the integrand's edge at which the
        semi-infinite integral is split into head and tail.
    root_tol : absolute/relative bracket tolerance for root finding.
    ode_rel_tol, ode_abs_tol : local error control for the ODE integrator.
    max_steps : accepted-step budget for a single ODE solve.
    """

    quad_rel_tol: float = 1e-10
    quad_split_margin: float = 30.0
    root_tol: float = 1e-12
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-14
    max_steps: int = 10**6

    def __post_init__(self) -> None:
        for name in ("quad_rel_tol", "root_tol", "ode_rel_tol", "ode_abs_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 < value < 1.0):
                raise ConfigError(f"{name} must lie in (0, 1), got {value!r}")
        if not self.quad_split_margin > 0.0:
            raise ConfigError(
                f"quad_split_margin must be positive, got {self.quad_split_margin!r}"
            )
        if not (isinstance(self.max_steps, int) and self.max_steps >= 1):
            raise ConfigError(f"max_steps must be a positive integer, got {self.max_steps!r}")


DEFAULT_CONFIG = NumericsConfig()

# QUADPACK subdivision cap; acts as the refinement-depth budget.
_QUAD_LIMIT = 200


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    """Wrap an integrand so NaN evaluations raise instead of propagating."""

    def wrapped(x: float) -> float:
        v = f(x)
        if math.isnan(v):
            raise DomainError(f"integrand returned NaN at x={x!r}")
        return v

    return wrapped


def _quad(f, a, b, cfg: NumericsConfig, points=None) -> tuple[float, float]:
    result = quad(
        f,
        a,
        b,
        epsabs=1e-300,
        epsrel=cfg.quad_rel_tol,
        limit=_QUAD_LIMIT,
        points=points,
        full_output=1,
    )
    value, err_est = result[0], result[1]
    if len(result) > 3:
        # QUADPACK flagged non-convergence; result[3] is its message.
        raise QuadratureError(str(result[3]), value, err_est)
    return value, err_est


def integrate_semi_infinite(
    f: Callable[[float], float],
    split_point: float,
    cfg: NumericsConfig = DEFAULT_CONFIG,
    points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[0, inf)``.

    The interval is split at ``max(split_point, 0)`` into a head handled by
    adaptive Gauss-Kronrod and a tail handled by the infinite-range
    transformation.  ``points`` may list interior locations of known kinks
    in the head interval.

    Returns
    -------
    (value, err_est) with ``|value - true| <= max(quad_rel_tol*|value|, err_est)``
    for integrands within contract (eventually decaying, finite).
    """
    if not math.isfinite(split_point) or split_point < 0.0:
        raise DomainError(f"split_point must be finite and >= 0, got {split_point!r}")
    g = _checked(f)
    split = max(split_point, 0.0)
    total = 0.0
    err = 0.0
    if split > 0.0:
        interior = [p for p in (points or ()) if 0.0 < p < split]
        head, head_err = _quad(g, 0.0, split, cfg, points=sorted(interior) or None)
        total += head
        err += head_err
    tail, tail_err = _quad(g, split, np.inf, cfg)
    return total + tail, err + tail_err


def find_root_monotone(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> float:
    """Root of a monotone continuous scalar function.

    The initial interval need not bracket: it is expanded geometrically in
    the direction indicated by the endpoint values until a sign change is
    found (up to a fixed budget), then polished with Brent's method.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError(f"bracket endpoints must be finite, got {lo!r}, {hi!r}")
    if lo > hi:
        lo, hi = hi, lo
    glo, ghi = g(lo), g(hi)
    if math.isnan(glo) or math.isnan(ghi):
        raise DomainError("objective returned NaN at a bracket endpoint")
    increasing = ghi >= glo
    for _ in range(64):
        if glo == 0.0:
            return lo
        if ghi == 0.0:
            return hi
        if (glo < 0.0) != (ghi < 0.0):
            break
        width = max(hi - lo, 1.0)
        # Same sign at both ends: the root lies below lo or above hi,
        # depending on the monotone direction.
        root_below = (glo > 0.0) == increasing
        if root_below:
            lo -= width
            glo = g(lo)
        else:
            hi += width
            ghi = g(hi)
    else:
        raise BracketError(
            f"no sign change found near [{lo!r}, {hi!r}] after bracket expansion"
        )
    rtol = max(cfg.root_tol, 4 * np.finfo(float).eps)
    return float(brentq(g, lo, hi, xtol=cfg.root_tol, rtol=rtol, maxiter=200))


class OdePath:
    """Dense solution of one ODE solve.

    Holds the accepted step points and a piecewise interpolant of matching
    order, evaluable anywhere between the endpoints.
    """

    def __init__(self, ts: np.ndarray, states: np.ndarray, interpolant):
        self.ts = ts
        self.states = states
        self._interpolant = interpolant
        self.t0 = float(ts[0])
        self.t1 = float(ts[-1])

    def __call__(self, t):
        """Evaluate the dense solution at scalar or array ``t``.

        Scalar ``t`` gives the state vector, array ``t`` an array of shape
        ``(dim, len(t))``.
        """
        t_arr = np.asarray(t, dtype=float)
        lo, hi = min(self.t0, self.t1), max(self.t0, self.t1)
        slack = 1e-9 * max(1.0, hi - lo)
        if np.any(t_arr < lo - slack) or np.any(t_arr > hi + slack):
            raise DomainError(f"evaluation time outside [{lo!r}, {hi!r}]")
        return self._interpolant(np.clip(t_arr, lo, hi))

    @property
    def end_state(self) -> np.ndarray:
        return self.states[-1]


def ode_integrate(
    field: Callable[[float, np.ndarray], Sequence[float]],
    t0: float,
    u0: Sequence[float],
    t1: float,
    cfg: NumericsConfig = DEFAULT_CONFIG,
    abs_tol: float | Sequence[float] | None = None,
    stop_events: Sequence[Callable[[float, np.ndarray], float]] = (),
) -> OdePath:
    """Integrate ``u' = field(t, u)`` from ``t0`` to ``t1`` (either direction).

    Uses the Dormand-Prince 4(5) pair with proportional step control and
    dense output.  ``abs_tol`` overrides the configured absolute tolerance
    (may be per-component).  ``stop_events`` are terminal sign-crossing
    events; if one fires a :class:`PositivityError` is raised with the
    crossing location.

    Raises
    ------
    StepLimitError : when the step budget is exhausted.
    BlowUpError : when a state component exceeds 1e300 in magnitude.
    """
    u0 = np.asarray(u0, dtype=float)
    if not (math.isfinite(t0) and math.isfinite(t1)) or t0 == t1:
        raise DomainError(f"need distinct finite endpoints, got {t0!r}, {t1!r}")
    if not np.all(np.isfinite(u0)):
        raise DomainError(f"initial state must be finite, got {u0!r}")

    eval_budget = 8 * cfg.max_steps
    n_evals = 0

    def counted(t, u):
        nonlocal n_evals
        n_evals += 1
        if n_evals > eval_budget:
            raise StepLimitError(
                f"exceeded {cfg.max_steps} steps integrating from t={t0!r}"
            )
        return field(t, u)

    def blow_up(t, u):
        return 1e300 - float(np.max(np.abs(u)))

    blow_up.terminal = True
    blow_up.direction = -1
    extra = []
    for ev in stop_events:
        ev.terminal = True
        extra.append(ev)

    sol = solve_ivp(
        counted,
        (t0, t1),
        u0,
        method="RK45",
        rtol=cfg.ode_rel_tol,
        atol=cfg.ode_abs_tol if abs_tol is None else abs_tol,
        dense_output=True,
        events=[blow_up] + extra,
    )
    if sol.status == -1:
        last_t = float(sol.t[-1]) if len(sol.t) else t0
        last_u = sol.y[:, -1].copy() if len(sol.t) else u0
        # Step-size underflow with a rapidly grown state is how a pole
        # manifests before the 1e300 magnitude event can fire.
        if np.max(np.abs(last_u)) > 1e12:
            raise BlowUpError("finite-time explosion (step size underflow)", last_t, last_u)
        raise NumericsError(f"ODE solver failed: {sol.message}")
    if sol.status == 1:
        if len(sol.t_events[0]):
            raise BlowUpError(
                "solution magnitude exceeded 1e300",
                float(sol.t[-1]),
                sol.y[:, -1].copy(),
            )
        raise PositivityError(
            "terminal event fired during integration",
            float(sol.t[-1]),
            sol.y[:, -1].copy(),
        )
    return OdePath(sol.t.copy(), sol.y.T.copy(), sol.sol)
