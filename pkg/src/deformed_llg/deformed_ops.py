"""Local structural derivatives and their eigenvalue identities.

Two operators act on callables:

* the scale-q derivative ``[1 + (1-q) lam x] f'(x)``, whose eigenfunction is the
  q-exponential ``e_q(lam x)``;
* the axiomatic (conformable-type) derivative ``x**(1-alpha) f'(x)``, for which
  ``E_alpha(lam x**alpha)`` is an eigenfunction only approximately, with an error
  of order ``|1 - alpha|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DeformedLLGError, DomainError
from .specfun import DeformationQ, MLParams, ml, q_exp, q_exp_derivative

ALPHA_SLACK = 0.2
POLE_MARGIN = 1e-8

# Measured on E_alpha(x**alpha), lam = 1, x in [0.5, 5]: the relative residual of
# the axiomatic eigenvalue relation stays below this multiple of |1 - alpha| for
# alpha in [0.95, 1).
LOW_FRACTIONALITY_CONSTANT = 1.7
# Relative residual above which the eigenvalue relation is no longer a usable
# approximation.
LOW_FRACTIONALITY_TOL = 0.1


@dataclass(frozen=True)
class Sampled1DFunction:
    """A scalar function with an optional analytic derivative."""

    eval: Callable[[float], complex]
    derivative: Callable[[float], complex] | None = None

    def __call__(self, x):
        return self.eval(x)


@dataclass
class ResidualReport:
    grid: list[float]
    residuals: list[float]
    max_residual: float
    config_echo: dict
    scale: float = 0.0
    relative_residuals: list[float] = field(default_factory=list)
    ratio: float | None = None
    in_regime: bool = True

    def __post_init__(self):
        if not self.grid:
            raise DomainError("residual report needs a non-empty grid")

    @property
    def max_relative_residual(self) -> float:
        return max(self.relative_residuals) if self.relative_residuals else math.nan

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "residuals": list(self.residuals),
            "max_residual": self.max_residual,
            "scale": self.scale,
            "ratio": self.ratio,
            "in_regime": self.in_regime,
            "config": {k: _jsonable(v) for k, v in self.config_echo.items()},
        }


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def default_step(x: float) -> float:
    """Five-point stencil step, ``eps**(1/5) * max(1, |x|)``."""
    return np.finfo(float).eps ** 0.2 * max(1.0, abs(x))


def _safe_eval(f, x):
    try:
        v = complex(f(x))
    except (ArithmeticError, ValueError, DeformedLLGError) as exc:
        raise DomainError(f"function undefined at x={x}: {exc}") from exc
    if not cmath.isfinite(v):
        raise DomainError(f"function is not finite at x={x}")
    return v


def five_point_derivative(f: Callable, x: float, step: float | None = None) -> complex:
    """Fourth-order central difference of ``f`` at ``x``."""
    h = default_step(x) if step is None else step
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    fm2, fm1 = _safe_eval(f, x - 2 * h), _safe_eval(f, x - h)
    fp1, fp2 = _safe_eval(f, x + h), _safe_eval(f, x + 2 * h)
    return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)


def _derivative(f, x, step):
    if isinstance(f, Sampled1DFunction) and f.derivative is not None:
        return complex(f.derivative(x))
    return five_point_derivative(f, x, step)


def scale_q_derivative(f, d: DeformationQ, x: float, step: float | None = None) -> complex:
    """``[1 + (1-q) lam x] f'(x)``; reduces to ``f'(x)`` at q = 1."""
    prefactor = 1.0 if d.q == 1.0 else 1.0 + (1.0 - d.q) * d.lam * x
    return prefactor * _derivative(f, x, step)


def axiomatic_derivative(f, alpha: float, x: float, step: float | None = None) -> complex:
    """Conformable-type local derivative ``x**(1-alpha) f'(x)`` for x > 0."""
    if x <= 0:
        raise DomainError(f"axiomatic derivative needs x > 0, got {x}")
    if not (0 < alpha <= 1 + ALPHA_SLACK):
        raise DomainError(f"alpha must lie in (0, {1 + ALPHA_SLACK}], got {alpha}")
    if step is None:
        # keep the stencil inside x > 0
        step = min(default_step(x), x / 4)
    return x ** (1.0 - alpha) * _derivative(f, x, step)


def _check_q_grid(d: DeformationQ, grid):
    for x in grid:
        w = 1.0 + (1.0 - d.q) * d.lam * x
        if d.q == 1.0:
            continue
        if abs(w) < POLE_MARGIN:
            raise DomainError(f"grid point x={x} is within {POLE_MARGIN} of the q-exponential pole")
        wc = complex(w)
        if wc.real < POLE_MARGIN and abs(wc.imag) < POLE_MARGIN:
            raise DomainError(f"grid point x={x} lies on the q-exponential branch cut")


def q_eigenfunction(d: DeformationQ) -> Sampled1DFunction:
    """``e_q(lam x)`` together with its analytic derivative ``lam e_q(lam x)**q``."""
    lam = d.lam
    real = isinstance(lam, (int, float)) or complex(lam).imag == 0
    lam_v = float(complex(lam).real) if real else complex(lam)
    return Sampled1DFunction(
        eval=lambda x: q_exp(d, lam_v * x),
        derivative=lambda x: lam_v * q_exp_derivative(d, lam_v * x),
    )


def verify_q_eigenvalue(
    d: DeformationQ, grid, *, numerical: bool = False, step: float | None = None
) -> ResidualReport:
    """Residuals of ``D f - lam f`` for ``f = e_q(lam x)`` on ``grid``.

    ``numerical=True`` replaces the analytic derivative with the five-point
    stencil, which makes the check independent of ``q_exp_derivative``.
    """
    grid = [float(x) for x in grid]
    if not grid:
        raise DomainError("grid must be non-empty")
    _check_q_grid(d, grid)
    f = q_eigenfunction(d)
    if numerical:
        f = Sampled1DFunction(eval=f.eval)
    res, scale = [], 0.0
    for x in grid:
        lf = d.lam * complex(f(x))
        res.append(abs(scale_q_derivative(f, d, x, step) - lf))
        scale = max(scale, abs(lf))
    return ResidualReport(
        grid=grid,
        residuals=res,
        max_residual=max(res),
        config_echo={"q": d.q, "lambda": complex(d.lam), "q_prime": d.q_prime, "numerical": numerical},
        scale=scale,
    )


def ml_eigenfunction(alpha: float, lam: float) -> Sampled1DFunction:
    """``E_alpha(lam x**alpha)`` with derivative ``lam x**(alpha-1) E_{alpha,alpha}(lam x**alpha)``."""
    p1, pa = MLParams(alpha, 1.0), MLParams(alpha, alpha)

    def value(x):
        return ml(p1, lam * x**alpha).value

    def deriv(x):
        return lam * x ** (alpha - 1.0) * ml(pa, lam * x**alpha).value

    return Sampled1DFunction(eval=value, derivative=deriv)


def verify_alpha_eigenvalue(
    alpha: float, lam: float, grid, *, numerical: bool = False, step: float | None = None
) -> ResidualReport:
    """Residuals of the axiomatic eigenvalue relation for ``E_alpha(lam x**alpha)``.

    With the analytic derivative the residual is exactly
    ``|lam| |E_{alpha,alpha}(lam x**alpha) - E_alpha(lam x**alpha)|``, which vanishes
    at alpha = 1 and grows like ``|1 - alpha|`` nearby. ``ratio`` is
    ``max_residual / |1 - alpha|`` (None at alpha = 1) and ``in_regime`` is False
    once the relative residual exceeds LOW_FRACTIONALITY_TOL.
    """
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    grid = [float(x) for x in grid]
    if not grid:
        raise DomainError("grid must be non-empty")
    if min(grid) <= 0:
        raise DomainError("grid points must be positive")
    f = ml_eigenfunction(alpha, lam)
    if numerical:
        f = Sampled1DFunction(eval=f.eval)
    res, rel, scale = [], [], 0.0
    for x in grid:
        lf = lam * complex(f(x))
        r = abs(axiomatic_derivative(f, alpha, x, step) - lf)
        res.append(r)
        rel.append(r / abs(lf) if lf != 0 else math.inf)
        scale = max(scale, abs(lf))
    max_res = max(res)
    ratio = None if alpha == 1.0 else max_res / abs(1.0 - alpha)
    return ResidualReport(
        grid=grid,
        residuals=res,
        max_residual=max_res,
        config_echo={"alpha": alpha, "lambda": lam, "numerical": numerical},
        scale=scale,
        relative_residuals=rel,
        ratio=ratio,
        in_regime=max(rel) <= LOW_FRACTIONALITY_TOL,
    )
