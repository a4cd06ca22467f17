"""Run configuration: a flat JSON object, validated into a RunConfig.

Units: without ``gamma_h0`` (resp. ``omega0``) time is measured in precession
periods, i.e. the precession rate is 2*pi and ``t_max`` counts periods. When
the rate is given explicitly, ``t_max`` is in the matching time unit. Either
way ``t_max`` defaults to 20 periods.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

from .errors import DomainError, ParseError, ValidationError
from .llg import DEFAULT_N_STEPS, DEFAULT_PERIODS, FieldConfig, LambdaMode, SimConfigAlpha, SimConfigQ
from .specfun import DeformationQ


class Mode(str, enum.Enum):
    SIMULATE_Q = "simulate_q"
    SIMULATE_ALPHA = "simulate_alpha"
    VERIFY = "verify"
    SPECIAL = "special"


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    RK4 = "rk4"


SPECIAL_FUNCTIONS = ("q_exp", "q_cos", "q_sin", "ml", "gamma")

_COMMON = {"mode", "output", "report"}
_KEYS = {
    Mode.SIMULATE_Q: _COMMON
    | {"q", "lambda_mode", "lambda", "gamma_h0", "theta0", "amplitude", "t_max", "n_steps", "mz0", "method", "plot"},
    Mode.SIMULATE_ALPHA: _COMMON | {"alpha", "omega0", "theta0", "amplitude", "t_max", "n_steps", "mz0", "plot"},
    Mode.VERIFY: _COMMON,
    Mode.SPECIAL: _COMMON | {"function", "q", "alpha", "beta", "x_min", "x_max", "n_points", "imaginary"},
}
_REQUIRED = {Mode.SIMULATE_Q: ("q",), Mode.SIMULATE_ALPHA: ("alpha",), Mode.SPECIAL: ("function",)}


@dataclass(frozen=True)
class SpecialConfig:
    function: str
    q: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    x_min: float = -5.0
    x_max: float = 5.0
    n_points: int = 101
    imaginary: bool = False


@dataclass(frozen=True)
class RunConfig:
    mode: Mode
    sim_q: SimConfigQ | None = None
    sim_alpha: SimConfigAlpha | None = None
    special: SpecialConfig | None = None
    method: Method = Method.CLOSED_FORM
    output: str | None = None
    report: str | None = None
    plot: str | None = None


def _number(obj, key, default=None, *, integer=False):
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(key, "must be a number")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ValidationError(key, "must be an integer")
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        raise ValidationError(key, "must be finite")
    return v


def _string(obj, key, default=None):
    if key not in obj:
        return default
    v = obj[key]
    if not isinstance(v, str) or not v:
        raise ValidationError(key, "must be a non-empty string")
    return v


def _rate_and_horizon(obj, rate_key):
    rate = _number(obj, rate_key)
    if rate is None:
        rate = 2 * math.pi
        t_max = _number(obj, "t_max", float(DEFAULT_PERIODS))
    else:
        if rate <= 0:
            raise ValidationError(rate_key, f"{rate_key} > 0")
        t_max = _number(obj, "t_max", DEFAULT_PERIODS * 2 * math.pi / rate)
    if t_max <= 0:
        raise ValidationError("t_max", "t_max > 0")
    return rate, t_max


def _n_steps(obj):
    n = _number(obj, "n_steps", DEFAULT_N_STEPS, integer=True)
    if n < 2:
        raise ValidationError("n_steps", "n_steps >= 2")
    return n


def parse_config(text: str) -> RunConfig:
    """Validate JSON text into a RunConfig, applying defaults.

    Raises ParseError (with line and column) for malformed JSON and
    ValidationError naming the offending key otherwise.
    """
    return config_from_dict(load_object(text))


def load_object(text: str) -> dict:
    """Decode ``text`` into a JSON object, or raise ParseError."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(obj, dict):
        raise ParseError("configuration must be a JSON object", 1, 1)
    return obj


def config_from_dict(obj: dict) -> RunConfig:
    raw_mode = obj.get("mode")
    try:
        mode = Mode(raw_mode)
    except ValueError:
        raise ValidationError("mode", f"must be one of {[m.value for m in Mode]}") from None
    unknown = sorted(set(obj) - _KEYS[mode])
    if unknown:
        raise ValidationError(unknown[0], f"not a valid key for mode {mode.value}")
    for key in _REQUIRED.get(mode, ()):
        if key not in obj:
            raise ValidationError(key, f"required for mode {mode.value}")

    paths = {k: _string(obj, k) for k in ("output", "report", "plot") if k in _KEYS[mode]}

    try:
        if mode is Mode.SIMULATE_Q:
            rate, t_max = _rate_and_horizon(obj, "gamma_h0")
            try:
                lambda_mode = LambdaMode(obj.get("lambda_mode", LambdaMode.EIGENVALUE_MATCHED.value))
            except ValueError:
                raise ValidationError("lambda_mode", f"one of {[m.value for m in LambdaMode]}") from None
            lam = _number(obj, "lambda", 1.0)
            if "lambda" in obj and lambda_mode is not LambdaMode.EXPLICIT_REAL:
                raise ValidationError("lambda", "only used with lambda_mode explicit_real")
            try:
                method = Method(obj.get("method", Method.CLOSED_FORM.value))
            except ValueError:
                raise ValidationError("method", f"one of {[m.value for m in Method]}") from None
            if lambda_mode is LambdaMode.EXPLICIT_REAL and method is Method.CLOSED_FORM and "method" in obj:
                raise ValidationError("method", "explicit_real mode has no closed form; use rk4")
            if lambda_mode is LambdaMode.EXPLICIT_REAL:
                method = Method.RK4
            sim = SimConfigQ(
                deformation=DeformationQ(_number(obj, "q"), lam=lam),
                field=FieldConfig(h0=rate),
                theta0=_number(obj, "theta0", 0.0),
                rho=_number(obj, "amplitude", 1.0),
                t_max=t_max,
                n_steps=_n_steps(obj),
                lambda_mode=lambda_mode,
                mz0=_number(obj, "mz0", 0.0),
            )
            return RunConfig(mode, sim_q=sim, method=method, **paths)

        if mode is Mode.SIMULATE_ALPHA:
            alpha = _number(obj, "alpha")
            if not (0 < alpha <= 1.2):
                raise ValidationError("alpha", "0 < alpha <= 1.2")
            rate, t_max = _rate_and_horizon(obj, "omega0")
            sim = SimConfigAlpha(
                alpha=alpha,
                omega0=rate,
                amplitude=_number(obj, "amplitude", 1.0),
                theta0=_number(obj, "theta0", 0.0),
                t_max=t_max,
                n_steps=_n_steps(obj),
                mz0=_number(obj, "mz0", 0.0),
            )
            return RunConfig(mode, sim_alpha=sim, **paths)

        if mode is Mode.SPECIAL:
            fn = _string(obj, "function")
            if fn not in SPECIAL_FUNCTIONS:
                raise ValidationError("function", f"one of {list(SPECIAL_FUNCTIONS)}")
            imaginary = obj.get("imaginary", False)
            if not isinstance(imaginary, bool):
                raise ValidationError("imaginary", "must be true or false")
            n_points = _number(obj, "n_points", 101, integer=True)
            if n_points < 1:
                raise ValidationError("n_points", "n_points >= 1")
            x_min, x_max = _number(obj, "x_min", -5.0), _number(obj, "x_max", 5.0)
            if x_max < x_min:
                raise ValidationError("x_max", "x_max >= x_min")
            alpha = _number(obj, "alpha", 1.0)
            if alpha <= 0:
                raise ValidationError("alpha", "alpha > 0")
            special = SpecialConfig(
                function=fn,
                q=_number(obj, "q", 1.0),
                alpha=alpha,
                beta=_number(obj, "beta", 1.0),
                x_min=x_min,
                x_max=x_max,
                n_points=n_points,
                imaginary=imaginary,
            )
            return RunConfig(mode, special=special, **paths)
    except DomainError as exc:
        raise ValidationError("config", str(exc)) from None

    return RunConfig(mode, **paths)


def config_to_dict(cfg: RunConfig) -> dict:
    """Inverse of :func:`config_from_dict`; rates and horizons are written explicitly."""
    out: dict = {"mode": cfg.mode.value}
    if cfg.sim_q is not None:
        s = cfg.sim_q
        out.update(
            q=s.deformation.q,
            lambda_mode=s.lambda_mode.value,
            gamma_h0=s.field.h0,
            theta0=s.theta0,
            amplitude=s.rho,
            t_max=s.t_max,
            n_steps=s.n_steps,
            mz0=s.mz0,
        )
        if s.lambda_mode is LambdaMode.EXPLICIT_REAL:
            out["lambda"] = complex(s.deformation.lam).real
        else:
            out["method"] = cfg.method.value
    if cfg.sim_alpha is not None:
        s = cfg.sim_alpha
        out.update(
            alpha=s.alpha,
            omega0=s.omega0,
            theta0=s.theta0,
            amplitude=s.amplitude,
            t_max=s.t_max,
            n_steps=s.n_steps,
            mz0=s.mz0,
        )
    if cfg.special is not None:
        s = cfg.special
        out.update(
            function=s.function,
            q=s.q,
            alpha=s.alpha,
            beta=s.beta,
            x_min=s.x_min,
            x_max=s.x_max,
            n_points=s.n_points,
            imaginary=s.imaginary,
        )
    for key in ("output", "report", "plot"):
        v = getattr(cfg, key)
        if v is not None:
            out[key] = v
    return out


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
