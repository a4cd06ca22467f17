"""Deformed Landau-Lifshitz-Gilbert precession about a static field along z.

No Gilbert or Slonczewski torque appears anywhere: damping and growth of the
precession come only from the deformed time derivative.

Scale-q family
    ``[1 + (1-q) lam t] dm/dt = -gamma m x H``. In the default eigenvalue-matched
    reading ``lam = -i gamma H0`` and the in-plane combination
    ``m_minus = mx - i my`` solves a scalar linear ODE whose solution is
    ``rho e_q(i theta0) e_q(-i gamma H0 t)``.

Axiomatic (alpha) family
    Mittag-Leffler closed form built from the alpha-cosine
    ``E_{2a}(-w^2 t^{2a})`` and alpha-sine ``w t^a E_{2a,1+a}(-w^2 t^{2a})``.
"""

from __future__ import annotations

import enum
import io
import math
import os
import tempfile
from dataclasses import dataclass, replace
from dataclasses import field as dc_field

import numpy as np

from .errors import DomainError, PoleError, StepError
from .specfun import DeformationQ, MLParams, ml, q_exp
from .spin_algebra import PhysicalScales

FIELD_AXIS = (0.0, 0.0, 1.0)
DEFAULT_PERIODS = 20
DEFAULT_N_STEPS = 10_000
MAX_PHASE_STEP = 0.5
ANGLE_MIN_MODULUS = 1e-14
# absolute accuracy requested from the Mittag-Leffler evaluations of the closed form
ML_MAX_ERROR = 1e-13

CSV_HEADER = "t,mx,my,mz,modulus,angle_rad"


class LambdaMode(str, enum.Enum):
    EIGENVALUE_MATCHED = "eigenvalue_matched"
    EXPLICIT_REAL = "explicit_real"


@dataclass(frozen=True)
class FieldConfig:
    """Static effective field ``h0 * z_hat``."""

    h0: float = 1.0

    def __post_init__(self):
        if not (self.h0 >= 0 and math.isfinite(self.h0)):
            raise DomainError(f"field magnitude must be finite and >= 0, got {self.h0}")

    @property
    def axis(self) -> tuple[float, float, float]:
        return FIELD_AXIS


@dataclass(frozen=True)
class SimConfigQ:
    """Run parameters for the scale-q deformed LLG equation.

    ``t_max`` defaults to ``DEFAULT_PERIODS`` precession periods. ``n_steps`` is
    the number of intervals, so trajectories hold ``n_steps + 1`` samples.
    In explicit-real mode ``deformation.lam`` is the real operator scale.
    """

    deformation: DeformationQ = dc_field(default_factory=lambda: DeformationQ(1.0))
    scales: PhysicalScales = dc_field(default_factory=PhysicalScales)
    field: FieldConfig = dc_field(default_factory=FieldConfig)
    theta0: float = 0.0
    rho: float = 1.0
    t_max: float | None = None
    n_steps: int = DEFAULT_N_STEPS
    lambda_mode: LambdaMode = LambdaMode.EIGENVALUE_MATCHED
    mz0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lambda_mode", LambdaMode(self.lambda_mode))
        if self.n_steps < 2:
            raise DomainError("n_steps must be >= 2")
        if self.t_max is None:
            if self.omega == 0:
                raise DomainError("t_max is required when the precession frequency is zero")
            object.__setattr__(self, "t_max", DEFAULT_PERIODS * 2 * math.pi / self.omega)
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise DomainError("t_max must be positive")
        if self.lambda_mode is LambdaMode.EXPLICIT_REAL and complex(self.deformation.lam).imag != 0:
            raise DomainError("explicit_real mode needs a real lambda")

    @property
    def omega(self) -> float:
        """Precession rate ``|gamma| H0`` (the spin algebra is taken undeformed, q' = 1)."""
        return abs(self.scales.gamma_q()) * self.field.h0

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)


@dataclass(frozen=True)
class SimConfigAlpha:
    alpha: float = 1.0
    omega0: float = 1.0
    amplitude: float = 1.0
    theta0: float = 0.0
    t_max: float | None = None
    n_steps: int = DEFAULT_N_STEPS
    mz0: float = 0.0

    def __post_init__(self):
        if not (0 < self.alpha <= 1.2):
            raise DomainError(f"alpha must lie in (0, 1.2], got {self.alpha}")
        if not self.omega0 >= 0:
            raise DomainError("omega0 must be >= 0")
        if self.n_steps < 2:
            raise DomainError("n_steps must be >= 2")
        if self.t_max is None:
            if self.omega0 == 0:
                raise DomainError("t_max is required when omega0 is zero")
            object.__setattr__(self, "t_max", DEFAULT_PERIODS * 2 * math.pi / self.omega0)
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise DomainError("t_max must be positive")

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)


@dataclass(frozen=True)
class Trajectory:
    """Magnetization samples ``m`` (shape ``(n, 3)``) with optional diagnostics.

    ``envelope`` is the analytic in-plane amplitude where one is known.
    """

    times: np.ndarray
    m: np.ndarray
    modulus: np.ndarray | None = None
    angle_to_field: np.ndarray | None = None
    angle_defined: np.ndarray | None = None
    envelope: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        m = np.asarray(self.m, dtype=float).reshape(-1, 3)
        if t.ndim != 1 or t.size != m.shape[0]:
            raise DomainError("times and magnetizations must have the same length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise DomainError("times must be strictly increasing")
        if not np.all(np.isfinite(m)):
            raise DomainError("magnetization components must be finite")
        for name in ("modulus", "angle_to_field", "angle_defined", "envelope"):
            v = getattr(self, name)
            if v is not None and np.asarray(v).shape != t.shape:
                raise DomainError(f"{name} must be parallel to times")
        object.__setattr__(self, "times", _frozen(t))
        object.__setattr__(self, "m", _frozen(m))
        for name in ("modulus", "angle_to_field", "angle_defined", "envelope"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _frozen(np.asarray(v)))

    def __len__(self):
        return self.times.size

    @property
    def mx(self):
        return self.m[:, 0]

    @property
    def my(self):
        return self.m[:, 1]

    @property
    def mz(self):
        return self.m[:, 2]

    @property
    def in_plane(self) -> np.ndarray:
        return np.hypot(self.mx, self.my)

    def summary(self) -> dict:
        """Initial/final in-plane amplitude and the drift of |m| and of the field angle."""
        out = {
            "samples": len(self),
            "t_final": float(self.times[-1]),
            "in_plane_initial": float(self.in_plane[0]),
            "in_plane_final": float(self.in_plane[-1]),
        }
        if self.modulus is not None:
            out["modulus_drift"] = float(self.modulus.max() - self.modulus.min())
        if self.angle_to_field is not None and self.angle_defined is not None and self.angle_defined.any():
            a = self.angle_to_field[self.angle_defined]
            out["angle_drift"] = float(a.max() - a.min())
        return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# --- diagnostics and envelope -----------------------------------------------


def diagnostics(traj: Trajectory, field: FieldConfig | None = None) -> Trajectory:
    """Fill |m| and the angle between m and the field axis.

    Where ``|m| < ANGLE_MIN_MODULUS`` the angle is undefined: it is stored as NaN
    and flagged False in ``angle_defined``.
    """
    if len(traj) == 0:
        raise DomainError("diagnostics need a non-empty trajectory")
    axis = np.asarray((field or FieldConfig()).axis)
    m = traj.m
    modulus = np.linalg.norm(m, axis=1)
    along = m @ axis
    across = np.linalg.norm(np.cross(m, axis), axis=1)
    defined = modulus >= ANGLE_MIN_MODULUS
    angle = np.where(defined, np.arctan2(across, along), np.nan)
    return replace(traj, modulus=modulus, angle_to_field=angle, angle_defined=defined)


def envelope_q(d: DeformationQ | float, omega: float, t):
    """In-plane amplitude ``[1 + (1-q)^2 w^2 t^2]**(1/(2(1-q)))``; 1 at q = 1."""
    q = d.q if isinstance(d, DeformationQ) else float(d)
    t = np.asarray(t, dtype=float)
    if q == 1.0:
        out = np.ones_like(t)
    else:
        out = np.power(1.0 + (1.0 - q) ** 2 * (omega * t) ** 2, 1.0 / (2.0 * (1.0 - q)))
    return out.item() if out.ndim == 0 else out


# --- scale-q family ---------------------------------------------------------


def _in_plane(m_minus: np.ndarray, mz0: float) -> np.ndarray:
    m_minus = np.asarray(m_minus, dtype=complex)
    return np.column_stack([m_minus.real, -m_minus.imag, np.full(m_minus.shape, float(mz0))])


def initial_m_minus_q(cfg: SimConfigQ) -> complex:
    """``rho e_q(i theta0)``, so that mx(0) = rho cos_q(theta0)."""
    return cfg.rho * q_exp(cfg.deformation, 1j * cfg.theta0)


def closed_form_q(cfg: SimConfigQ) -> Trajectory:
    """Closed-form solution of the eigenvalue-matched scale-q LLG equation.

    ``mx = rho [cos_q(theta0) cos_q(w t) + sin_q(theta0) sin_q(w t)]`` with
    ``w = gamma H0``, i.e. the real part of ``rho e_q(i theta0) e_q(-i w t)``;
    ``my`` is minus its imaginary part and ``mz`` stays at ``mz0``.
    """
    t = cfg.times()
    w = cfg.omega
    m_minus = initial_m_minus_q(cfg) * q_exp(cfg.deformation, -1j * w * t)
    env = abs(initial_m_minus_q(cfg)) * envelope_q(cfg.deformation, w, t)
    traj = Trajectory(times=t, m=_in_plane(m_minus, cfg.mz0), envelope=env, label=f"q={cfg.deformation.q:g}")
    return diagnostics(traj, cfg.field)


def rk4(f, times: np.ndarray, y0):
    """Classical fourth-order Runge-Kutta on the given (uniform) grid."""
    y = np.empty((times.size,) + np.shape(y0), dtype=np.result_type(y0, float))
    y[0] = y0
    for i in range(times.size - 1):
        t, h = times[i], times[i + 1] - times[i]
        yi = y[i]
        k1 = f(t, yi)
        k2 = f(t + h / 2, yi + h / 2 * k1)
        k3 = f(t + h / 2, yi + h / 2 * k2)
        k4 = f(t + h, yi + h * k3)
        y[i + 1] = yi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def integrate_q_llg(cfg: SimConfigQ) -> Trajectory:
    """RK4 solution of the scale-q LLG equation on the uniform grid of ``cfg``.

    Raises StepError if the largest phase advance per step exceeds
    ``MAX_PHASE_STEP`` radians, and PoleError if the real-lambda prefactor
    vanishes inside the integration window.
    """
    t = cfg.times()
    h = t[1] - t[0]
    q = cfg.deformation.q
    w = cfg.omega
    m0 = initial_m_minus_q(cfg)

    if cfg.lambda_mode is LambdaMode.EIGENVALUE_MATCHED:
        lam = -1j * w
        # |1 + (1-q) lam t| >= 1 on the real axis, so the phase rate never exceeds w
        if w * h > MAX_PHASE_STEP:
            raise StepError(f"phase step {w * h:.3g} rad exceeds {MAX_PHASE_STEP}; increase n_steps")

        def rhs(tt, y):
            return lam * y / (1.0 + (1.0 - q) * lam * tt)

        y = rk4(rhs, t, complex(m0))
        traj = Trajectory(times=t, m=_in_plane(y, cfg.mz0), label=f"q={q:g} rk4")
        return diagnostics(traj, cfg.field)

    lam = complex(cfg.deformation.lam).real
    pref = 1.0 + (1.0 - q) * lam * np.array([0.0, cfg.t_max])
    if np.any(pref <= 0):
        t_star = 1.0 / ((q - 1.0) * lam)
        raise PoleError(f"the prefactor 1 + (1-q) lam t vanishes at t = {t_star:.6g} inside [0, {cfg.t_max:.6g}]")
    phase_step = w * h / pref.min()
    if phase_step > MAX_PHASE_STEP:
        raise StepError(f"phase step {phase_step:.3g} rad exceeds {MAX_PHASE_STEP}; increase n_steps")

    def rhs_vec(tt, m):
        # -gamma m x (H0 z_hat) = w (-my, mx, 0)
        s = w / (1.0 + (1.0 - q) * lam * tt)
        return np.array([-s * m[1], s * m[0], 0.0])

    y0 = np.array([m0.real, -m0.imag, cfg.mz0])
    m = rk4(rhs_vec, t, y0)
    traj = Trajectory(times=t, m=m, label=f"q={q:g} lambda={lam:g} rk4")
    return diagnostics(traj, cfg.field)


# --- alpha family -----------------------------------------------------------


def alpha_cos_sin(alpha: float, omega0: float, t):
    """``(E_{2a}(-w^2 t^{2a}), w t^a E_{2a,1+a}(-w^2 t^{2a}))``, the alpha-cosine/sine pair."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("the alpha closed form needs t >= 0")
    ta = np.power(t, alpha)
    z = -((omega0 * ta) ** 2)
    c = ml(MLParams(2 * alpha, 1.0), z, z_max=math.inf, max_error=ML_MAX_ERROR).value
    s = omega0 * ta * ml(MLParams(2 * alpha, 1.0 + alpha), z, z_max=math.inf, max_error=ML_MAX_ERROR).value
    return c, s


def closed_form_alpha(cfg: SimConfigAlpha) -> Trajectory:
    """Mittag-Leffler solution of the alpha-deformed LLG equation.

    ``mx = A [cos(theta0) C(t) + sin(theta0) S(t)]`` and
    ``my = A [cos(theta0) S(t) - sin(theta0) C(t)]`` with the alpha-cosine C and
    alpha-sine S; at alpha = 1 this is ``A (cos, sin)(w t - theta0)``.
    """
    t = cfg.times()
    c, s = alpha_cos_sin(cfg.alpha, cfg.omega0, t)
    ct, st = math.cos(cfg.theta0), math.sin(cfg.theta0)
    a = cfg.amplitude
    m = np.column_stack([a * (ct * c + st * s), a * (ct * s - st * c), np.full(t.shape, float(cfg.mz0))])
    traj = Trajectory(times=t, m=m, label=f"alpha={cfg.alpha:g}")
    return diagnostics(traj, FieldConfig())


def gl_weights(order: float, n: int) -> np.ndarray:
    """Grunwald-Letnikov weights ``(-1)^j binom(order, j)`` for j = 0..n."""
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(1, n + 1):
        w[j] = w[j - 1] * (1.0 - (order + 1.0) / j)
    return w


def integrate_caputo_oscillator(
    alpha: float, omega0: float, x0: float, n_steps: int, t_max: float
) -> Trajectory:
    """Grunwald-Letnikov solution of ``D^{2 alpha} x = -w^2 x``, ``x(0) = x0``, ``x'(0) = 0``.

    The Caputo derivative is the Grunwald-Letnikov derivative of ``x - x0``.
    The right-hand side is sampled at ``t_n - alpha h``, where the GL
    difference is centred; with that shift the scheme becomes the central
    difference at alpha = 1. The starting step limits the accuracy to first
    order in ``h``. The history sum makes the cost O(n_steps**2).

    The solution is stored in ``mx``; ``my`` and ``mz`` are zero.
    """
    if not (0.5 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0.5, 1], got {alpha}")
    if n_steps < 1000:
        raise StepError(f"n_steps must be >= 1000, got {n_steps}")
    if not (t_max > 0 and omega0 >= 0):
        raise DomainError("t_max must be positive and omega0 non-negative")
    h = t_max / n_steps
    if omega0 * h > MAX_PHASE_STEP:
        raise StepError(f"phase step {omega0 * h:.3g} rad exceeds {MAX_PHASE_STEP}")

    order = 2.0 * alpha
    shift = alpha  # centre of the GL stencil, in steps behind t_n
    w = gl_weights(order, n_steps)
    w_rev = w[1:][::-1].copy()
    hn = h ** (-order)
    w2 = omega0 * omega0
    y = np.zeros(n_steps + 1)  # y = x - x0
    denom = hn + w2 * (1.0 - shift)
    for n in range(1, n_steps + 1):
        history = np.dot(w_rev[n_steps - n :], y[:n])
        y[n] = (-w2 * x0 - w2 * shift * y[n - 1] - hn * history) / denom
    t = np.linspace(0.0, t_max, n_steps + 1)
    m = np.column_stack([y + x0, np.zeros_like(y), np.zeros_like(y)])
    traj = Trajectory(times=t, m=m, label=f"caputo alpha={alpha:g}")
    return diagnostics(traj, FieldConfig())


# --- output -----------------------------------------------------------------


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text: header ``t,mx,my,mz,modulus,angle_rad``, 17 significant digits, LF."""
    if traj.modulus is None or traj.angle_to_field is None:
        traj = diagnostics(traj)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    # adding 0.0 turns -0.0 into 0.0
    cols = np.column_stack([traj.times, traj.m, traj.modulus, traj.angle_to_field]) + 0.0
    for row in cols:
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def atomic_write(path: str, data: str | bytes) -> None:
    """Write ``data`` to a temporary file next to ``path``, then rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "\n", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(traj: Trajectory, path: str) -> None:
    atomic_write(path, trajectory_csv(traj))


def read_csv(path: str) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(
        times=data[:, 0],
        m=data[:, 1:4],
        modulus=data[:, 4],
        angle_to_field=data[:, 5],
        angle_defined=np.isfinite(data[:, 5]),
    )
