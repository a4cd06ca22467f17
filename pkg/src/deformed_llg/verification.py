"""The invariant suite behind ``deformed-llg verify``.

Every check compares a measured quantity against a fixed bound and records
both, so a report can be read without rerunning anything.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .deformed_ops import LOW_FRACTIONALITY_CONSTANT, LOW_FRACTIONALITY_TOL, verify_alpha_eigenvalue, verify_q_eigenvalue
from .llg import (
    LambdaMode,
    SimConfigAlpha,
    SimConfigQ,
    closed_form_alpha,
    closed_form_q,
    envelope_q,
    integrate_caputo_oscillator,
    initial_m_minus_q,
    integrate_q_llg,
)
from .specfun import DeformationQ, MLParams, ml
from .spin_algebra import (
    IDENTITY,
    SIGMA_Z,
    PhysicalScales,
    closure_defect,
    evolution_operator_alpha,
    evolution_operator_q,
    kappa_alpha,
    kappa_q,
    nonunitarity,
)

TWO_PI = 2.0 * math.pi


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    bound: float
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = "pass" if d.pop("passed") else "fail"
        return d

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured={self.measured:.3e} bound={self.bound:.3e} {self.params}"


def _le(name, measured, bound, **params):
    return Check(name, bool(measured <= bound), float(measured), float(bound), params)


def local_extrema(x: np.ndarray) -> np.ndarray:
    """Indices of interior samples where the discrete slope changes sign."""
    d = np.sign(np.diff(x))
    return np.where(d[1:] * d[:-1] < 0)[0] + 1


def explicit_real_phase(cfg: SimConfigQ, t):
    """Rotation angle of the explicit-real q-LLG solution, ``int_0^t w / (1 + (1-q) lam s) ds``."""
    q, lam, w = cfg.deformation.q, complex(cfg.deformation.lam).real, cfg.omega
    c = (1.0 - q) * lam
    t = np.asarray(t, dtype=float)
    return w * t if c == 0 else w * np.log1p(c * t) / c


def explicit_real_exact(cfg: SimConfigQ) -> np.ndarray:
    t = cfg.times()
    phi = explicit_real_phase(cfg, t)
    z = initial_m_minus_q(cfg)
    x0, y0 = z.real, -z.imag
    return np.column_stack([x0 * np.cos(phi) - y0 * np.sin(phi), x0 * np.sin(phi) + y0 * np.cos(phi)])


# --- individual criteria ----------------------------------------------------


def check_classical_q() -> list[Check]:
    cfg = SimConfigQ(deformation=DeformationQ(1.0))  # unit rate, 20 periods, 10^4 steps
    t = cfg.times()
    out = [
        _le(
            "classical_q_simulated",
            np.max(np.abs(closed_form_q(cfg).mx - np.cos(cfg.omega * t))),
            1e-8,
            q=1.0,
            periods=20,
            n_steps=cfg.n_steps,
        )
    ]
    short = SimConfigQ(deformation=DeformationQ(1.0), t_max=20.0 / cfg.omega)
    out.append(
        _le(
            "classical_q_rk4",
            np.max(np.abs(integrate_q_llg(short).mx - np.cos(short.omega * short.times()))),
            1e-8,
            q=1.0,
            t_max=short.t_max,
            n_steps=short.n_steps,
        )
    )
    return out


def check_classical_alpha() -> list[Check]:
    cfg = SimConfigAlpha(alpha=1.0, omega0=1.0, amplitude=1.0, theta0=0.0)
    tr = closed_form_alpha(cfg)
    err = np.max(np.abs(tr.mx - np.cos(cfg.omega0 * tr.times)))
    return [_le("classical_alpha", err, 1e-12, alpha=1.0, t_max=cfg.t_max)]


Q_EIGEN_CASES = (
    (1.0, np.linspace(0.0, 1.0, 41)),
    (-1.0, np.linspace(0.0, 1.0, 41)),
    (1j, np.linspace(0.0, 5.0, 101)),
    (-1j, np.linspace(0.0, 5.0, 101)),
)


def check_q_eigenvalue() -> list[Check]:
    out = []
    for q in (0.5, 0.9, 1.1, 1.5):
        for lam, grid in Q_EIGEN_CASES:
            r = verify_q_eigenvalue(DeformationQ(q, lam=lam), grid)
            lam_j = [lam.real, lam.imag] if isinstance(lam, complex) else lam
            out.append(_le("q_eigenvalue", r.max_residual, 1e-10, q=q, lam=lam_j))
    return out


NEAR_ONE_ALPHAS = (0.99, 0.98, 0.95)
FAR_ALPHA = 0.7
# spread allowed between the largest and smallest near-1 ratio
RATIO_SPREAD = 1.2


def check_low_fractionality() -> list[Check]:
    grid = np.linspace(0.5, 5.0, 91)
    near = {a: verify_alpha_eigenvalue(a, 1.0, grid) for a in NEAR_ONE_ALPHAS}
    far = verify_alpha_eigenvalue(FAR_ALPHA, 1.0, grid)
    out = []
    for a, r in near.items():
        out.append(
            _le(
                "alpha_eigenvalue_bounded",
                r.max_relative_residual / abs(1 - a),
                LOW_FRACTIONALITY_CONSTANT,
                alpha=a,
                ratio=r.ratio,
            )
        )
    ratios = [r.ratio for r in near.values()]
    out.append(_le("alpha_eigenvalue_ratio_spread", max(ratios) / min(ratios), RATIO_SPREAD, alphas=list(NEAR_ONE_ALPHAS)))
    mean = float(np.mean(ratios))
    out.append(
        Check(
            "alpha_eigenvalue_violated_far",
            bool(far.ratio > 1.5 * mean and not far.in_regime),
            float(far.max_relative_residual),
            LOW_FRACTIONALITY_TOL,
            {"alpha": FAR_ALPHA, "ratio": far.ratio, "near_mean_ratio": mean},
        )
    )
    return out


def check_q_dichotomy() -> list[Check]:
    out = []
    for q, grows in ((0.7, True), (1.5, False)):
        cfg = SimConfigQ(deformation=DeformationQ(q))
        tr = closed_form_q(cfg)
        a0, a1 = tr.in_plane[0], tr.in_plane[-1]
        out.append(
            Check(
                "q_growth" if grows else "q_damping",
                bool(a1 > a0 if grows else a1 < a0),
                float(a1 / a0),
                1.0,
                {"q": q, "periods": 20},
            )
        )
        env = envelope_q(DeformationQ(q), cfg.omega, tr.times)
        out.append(_le("q_envelope", np.max(np.abs(tr.in_plane / env - 1.0)), 1e-12, q=q))
    return out


def check_alpha_dichotomy() -> list[Check]:
    out = []
    for alpha, grows in ((0.9, False), (1.05, True)):
        tr = closed_form_alpha(SimConfigAlpha(alpha=alpha, omega0=1.0, t_max=30.0, n_steps=30_000))
        amps = np.abs(tr.mx[local_extrema(tr.mx)])
        steps = np.diff(amps)
        ok = amps.size >= 3 and bool(np.all(steps > 0) if grows else np.all(steps < 0))
        worst = float(np.min(steps) if grows else np.max(steps)) if steps.size else math.nan
        out.append(
            Check(
                "alpha_growth" if grows else "alpha_damping",
                ok,
                worst,
                0.0,
                {"alpha": alpha, "extrema": int(amps.size), "t_max": 30.0},
            )
        )
    return out


def check_cross_oracle(n_oracle: int = 100_000, stride: int = 10) -> list[Check]:
    out = []
    for alpha in (0.95, 0.9):
        oracle = integrate_caputo_oscillator(alpha, 1.0, 1.0, n_oracle, 20.0)
        cf = closed_form_alpha(SimConfigAlpha(alpha=alpha, omega0=1.0, t_max=20.0, n_steps=n_oracle // stride))
        err = np.max(np.abs(cf.mx - oracle.mx[::stride]))
        out.append(_le("cross_oracle", err, 1e-3, alpha=alpha, oracle_steps=n_oracle))
    return out


def check_algebra() -> list[Check]:
    s = PhysicalScales(hbar_scale=1.3, m_q=0.7, m_alpha=1.9)
    out = []
    for q, qp, x in ((1.0, 1.0, 0.0), (1.2, 0.8, 0.5), (0.8, 1.3, 2.0)):
        k = kappa_q(DeformationQ(q, lam=1.0, q_prime=qp), s, x)
        out.append(_le("algebra_closure_q", closure_defect(k), 1e-14 * k * k, q=q, q_prime=qp, x=x, kappa=k))
    for alpha in (0.5, 0.9, 1.0, 1.1):
        k = kappa_alpha(alpha, s)
        out.append(_le("algebra_closure_alpha", closure_defect(k), 1e-14 * k * k, alpha=alpha, kappa=k))
    return out


def check_evolution() -> list[Check]:
    s = PhysicalScales()
    h = SIGMA_Z
    zero = max(
        float(np.max(np.abs(evolution_operator_q(h, 0.0, DeformationQ(1.3), s) - IDENTITY))),
        float(np.max(np.abs(evolution_operator_alpha(h, 0.0, MLParams(0.8), s) - IDENTITY))),
    )
    out = [
        Check("evolution_identity_at_zero", zero == 0.0, zero, 0.0, {}),
        _le("evolution_unitary_q1", nonunitarity(evolution_operator_q(h, 1.0, DeformationQ(1.0), s)), 1e-13, q=1.0),
        _le(
            "evolution_unitary_alpha1",
            nonunitarity(evolution_operator_alpha(h, 1.0, MLParams(1.0), s)),
            1e-13,
            alpha=1.0,
        ),
    ]
    qs = (1.05, 1.1, 1.2)
    vals = [nonunitarity(evolution_operator_q(h, 1.0, DeformationQ(q), s)) for q in qs]
    out.append(
        Check(
            "evolution_nonunitarity_increasing",
            bool(np.all(np.diff(vals) > 0)),
            float(np.min(np.diff(vals))),
            0.0,
            {"q": list(qs), "nonunitarity": vals},
        )
    )
    return out


RK4_LEVELS = (64, 128, 256, 512)


def observed_orders(errors) -> list[float]:
    e = np.asarray(errors, dtype=float)
    return [float(v) for v in np.log2(e[:-1] / e[1:])]


def rk4_errors(mode: LambdaMode) -> list[float]:
    errs = []
    for n in RK4_LEVELS:
        if mode is LambdaMode.EIGENVALUE_MATCHED:
            cfg = SimConfigQ(deformation=DeformationQ(1.1), t_max=2.0 * TWO_PI, n_steps=n)
            ref = closed_form_q(cfg).m[:, :2]
        else:
            cfg = SimConfigQ(
                deformation=DeformationQ(1.1, lam=-1.0),
                t_max=2.0 * TWO_PI,
                n_steps=n,
                lambda_mode=LambdaMode.EXPLICIT_REAL,
            )
            ref = explicit_real_exact(cfg)
        errs.append(float(np.max(np.abs(integrate_q_llg(cfg).m[:, :2] - ref))))
    return errs


def check_rk4_order() -> list[Check]:
    out = []
    for mode in LambdaMode:
        orders = observed_orders(rk4_errors(mode))
        out.append(
            Check("rk4_order", bool(min(orders) >= 3.8), float(min(orders)), 3.8, {"mode": mode.value, "orders": orders})
        )
    return out


def check_ml_special_values() -> list[Check]:
    x = np.linspace(-3.0, 3.0, 601)
    erfc = np.vectorize(math.erfc)
    cases = (
        ("ml_exp", MLParams(1.0), x, np.exp(x)),
        ("ml_cos", MLParams(2.0), -(x**2), np.cos(x)),
        ("ml_erfc", MLParams(0.5), x, np.exp(x**2) * erfc(-x)),
    )
    out = []
    for name, p, z, ref in cases:
        got = ml(p, z).value
        out.append(_le(name, np.max(np.abs(got - ref) / np.abs(ref)), 1e-10, alpha=p.alpha))
    return out


CRITERIA: tuple[tuple[str, Callable[[], list[Check]]], ...] = (
    ("classical reduction (q)", check_classical_q),
    ("classical reduction (alpha)", check_classical_alpha),
    ("q eigenvalue identity", check_q_eigenvalue),
    ("low-level fractionality", check_low_fractionality),
    ("q growth/damping dichotomy", check_q_dichotomy),
    ("alpha growth/damping dichotomy", check_alpha_dichotomy),
    ("closed form vs Caputo oracle", check_cross_oracle),
    ("deformed algebra closure", check_algebra),
    ("evolution operators", check_evolution),
    ("RK4 convergence order", check_rk4_order),
    ("Mittag-Leffler special values", check_ml_special_values),
)


def run_all() -> list[Check]:
    checks = []
    for _, fn in CRITERIA:
        checks.extend(fn())
    return checks


def build_report(checks: list[Check], version: str) -> dict:
    return {
        "checks": [c.to_dict() for c in checks],
        "overall": "pass" if all(c.passed for c in checks) else "fail",
        "tool_version": version,
    }
