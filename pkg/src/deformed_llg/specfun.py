"""Deformed special functions: the q-exponential family and Mittag-Leffler.

All functions accept Python scalars or numpy arrays. Scalars in, scalars out.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from .errors import BranchCutError, ConvergenceError, DomainError, NumericalError, PoleError

EPS_REL = 1e-12
EPS_ABS = 1e-300
K_MAX = 10_000
Z_MAX = 50.0

_EPS = np.finfo(float).eps
# direct products z**k / gamma(.) are used below this argument, log-space above
_GAMMA_DIRECT_MAX = 170.0
_LOG_OVERFLOW = 700.0


@dataclass(frozen=True)
class DeformationQ:
    """Parameters of the scale-q framework.

    ``lam`` is the scale factor of the derivative operator and may be complex;
    ``q_prime`` is the auxiliary index of the deformed spin algebra.
    """

    q: float
    lam: complex = 1.0
    q_prime: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.q) or not math.isfinite(self.q_prime):
            raise DomainError("q and q_prime must be finite")
        if not cmath.isfinite(complex(self.lam)):
            raise DomainError("lambda must be finite")

    @property
    def classical(self) -> bool:
        return self.q == 1.0


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"Mittag-Leffler order must be positive, got alpha={self.alpha}")
        if not math.isfinite(self.beta):
            raise DomainError("beta must be finite")


@dataclass(frozen=True)
class MLResult:
    """Value of E_{alpha,beta}(z) with an absolute error estimate.

    ``terms`` is the number of series terms summed (per point for arrays) and
    ``digits`` the working precision in decimal digits (16 means plain doubles;
    larger values signal the extended-precision re-summation).
    """

    value: complex | float | np.ndarray
    error: float | np.ndarray
    terms: int | np.ndarray
    digits: int | np.ndarray = 16


def default_eps_rel() -> float:
    """Relative truncation tolerance, overridable through ``DEFORMED_LLG_EPS``."""
    raw = os.environ.get("DEFORMED_LLG_EPS")
    if raw is None:
        return EPS_REL
    try:
        eps = float(raw)
    except ValueError:
        raise DomainError(f"DEFORMED_LLG_EPS is not a number: {raw!r}") from None
    if not (0 < eps < 1):
        raise DomainError(f"DEFORMED_LLG_EPS must lie in (0, 1), got {eps}")
    return eps


def _q_of(d) -> float:
    return d.q if isinstance(d, DeformationQ) else float(d)


def _out(a):
    a = np.asarray(a)
    return a.item() if a.ndim == 0 else a


def _check_finite(a, what: str):
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"{what} produced a non-finite value (overflow)")


# --- q-exponential family -------------------------------------------------


def q_exp(d: DeformationQ | float, z):
    """q-exponential ``[1 + (1-q) z]**(1/(1-q))`` on the principal branch.

    Real input asks for a real result, so the base must be positive. Complex
    input is evaluated as ``exp(log(w) / (1-q))`` with the principal logarithm.
    ``q == 1`` returns ``exp(z)`` exactly.
    """
    q = _q_of(d)
    z = np.asarray(z)
    if q == 1.0:
        with np.errstate(over="ignore"):
            out = np.exp(z)
        _check_finite(out, "q_exp")
        return _out(out)
    w = 1.0 + (1.0 - q) * z
    if np.any(w == 0):
        raise PoleError(f"q_exp: 1 + (1-q) z vanishes (q={q})")
    with np.errstate(over="ignore", invalid="ignore"):
        if np.iscomplexobj(w):
            out = np.exp(np.log(w) / (1.0 - q))
        else:
            if np.any(w < 0):
                raise BranchCutError(f"q_exp: real result requested but 1 + (1-q) z < 0 (q={q})")
            out = np.power(w, 1.0 / (1.0 - q))
    _check_finite(out, "q_exp")
    return _out(out)


def q_exp_derivative(d: DeformationQ | float, z):
    """d/dz e_q(z) = e_q(z)**q, i.e. ``w**(q/(1-q))`` on the same branch as q_exp."""
    q = _q_of(d)
    z = np.asarray(z)
    if q == 1.0:
        return _out(np.exp(z))
    w = 1.0 + (1.0 - q) * z
    if np.any(w == 0):
        raise PoleError(f"q_exp_derivative: 1 + (1-q) z vanishes (q={q})")
    if np.iscomplexobj(w):
        out = np.exp(q * np.log(w) / (1.0 - q))
    else:
        if np.any(w < 0):
            raise BranchCutError("q_exp_derivative: real result requested on the branch cut")
        out = np.power(w, q / (1.0 - q))
    _check_finite(out, "q_exp_derivative")
    return _out(out)


def q_cos(d: DeformationQ | float, x):
    """Real part of e_q(i x)."""
    return _out(np.real(q_exp(d, 1j * np.asarray(x, dtype=float))))


def q_sin(d: DeformationQ | float, x):
    """Imaginary part of e_q(i x)."""
    return _out(np.imag(q_exp(d, 1j * np.asarray(x, dtype=float))))


def q_trig_envelope_sq(d: DeformationQ | float, x):
    """``q_cos(x)**2 + q_sin(x)**2`` in closed form: ``[1 + (1-q)^2 x^2]**(1/(1-q))``."""
    q = _q_of(d)
    x = np.asarray(x, dtype=float)
    if q == 1.0:
        return _out(np.ones_like(x))
    return _out(np.power(1.0 + (1.0 - q) ** 2 * x * x, 1.0 / (1.0 - q)))


# --- gamma ----------------------------------------------------------------


def gamma_fn(x: float) -> float:
    """Euler gamma function, with the reflection formula below 1/2."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x < 0.5:
        s = math.sin(math.pi * math.fmod(x, 2.0))
        return math.pi / (s * gamma_fn(1.0 - x))
    try:
        return math.gamma(x)
    except OverflowError:
        raise NumericalError(f"gamma({x}) overflows double precision") from None


def _coefficient(a: float) -> tuple[float, float, float]:
    """For the argument a = alpha*k + beta return (1/gamma(a), log|1/gamma(a)|, sign)."""
    if a <= 0 and a == math.floor(a):
        return 0.0, -math.inf, 0.0
    if a < _GAMMA_DIRECT_MAX:
        c = 1.0 / gamma_fn(a)
        return c, math.log(abs(c)), math.copysign(1.0, c)
    return 0.0, -math.lgamma(a), 1.0


# --- Mittag-Leffler -------------------------------------------------------


def _neumaier_add(s, c, t):
    """One vectorized step of Neumaier (improved Kahan) summation."""
    tot = s + t
    big = np.abs(s) >= np.abs(t)
    c = c + np.where(big, (s - tot) + t, (t - tot) + s)
    return tot, c


def _ml_double(alpha, beta, z, eps_rel, eps_abs, k_max):
    """Series in double precision, vectorized over the points of ``z``.

    Returns (sum, error estimate, terms used, sum of |terms|, ok mask); the mask
    is False where a term overflowed.
    """
    is_complex = np.iscomplexobj(z)
    zr = z.real.astype(float)
    zi = z.imag.astype(float) if is_complex else np.zeros_like(zr)
    n = zr.size
    absz = np.hypot(zr, zi)
    with np.errstate(divide="ignore"):
        logabs = np.log(absz)
    # real divisions: complex / subnormal overflows inside numpy
    safe = np.where(absz > 0, absz, 1.0)
    unit = np.where(absz > 0, zr / safe + 1j * (zi / safe), 1.0)

    sr, cr = np.zeros(n), np.zeros(n)
    si, ci = np.zeros(n), np.zeros(n)
    abs_sum = np.zeros(n)
    round_err = np.zeros(n)
    prev_abs = np.zeros(n)
    last_two = np.zeros(n)
    small_run = np.zeros(n, dtype=int)
    terms = np.zeros(n, dtype=int)
    ok = np.ones(n, dtype=bool)
    active = np.ones(n, dtype=bool)

    # z**k with unit magnitude phase, advanced by repeated multiplication
    power = np.ones(n, dtype=complex)
    phase = np.ones(n, dtype=complex)

    k = 0
    while np.any(active):
        if k >= k_max:
            raise ConvergenceError(
                f"Mittag-Leffler series did not converge within {k_max} terms"
                f" (alpha={alpha}, beta={beta}, max|z|={absz.max():.6g})"
            )
        a = alpha * k + beta
        c, logc, sign = _coefficient(a)
        idx = np.nonzero(active)[0]
        if c == 0.0 and logc == -math.inf:
            t = np.zeros(idx.size, dtype=complex)
            rel = np.zeros(idx.size)
        else:
            lk = k * logabs[idx] if k else np.zeros(idx.size)
            direct = (a < _GAMMA_DIRECT_MAX) & (lk < _LOG_OVERFLOW)
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                t = np.where(
                    direct,
                    power[idx] * c,
                    phase[idx] * (sign * np.exp(np.minimum(lk + logc, _LOG_OVERFLOW + 10))),
                )
            # per-term relative rounding bound: gamma, the running power, log-space exp
            rel = _EPS * (16 + 2 * k + np.where(direct, 0.0, np.abs(lk) + abs(logc)))
        bad = ~np.isfinite(t)
        if np.any(bad):
            ok[idx[bad]] = False
            active[idx[bad]] = False
            t = np.where(bad, 0.0, t)
        tr, ti = t.real, t.imag
        with np.errstate(over="ignore", invalid="ignore"):
            sr[idx], cr[idx] = _neumaier_add(sr[idx], cr[idx], tr)
            si[idx], ci[idx] = _neumaier_add(si[idx], ci[idx], ti)
            at = np.abs(t)
            abs_sum[idx] += at
            round_err[idx] += np.where(at > 0, rel * at, 0.0)
            last_two[idx] = prev_abs[idx] + at
            prev_abs[idx] = at
            terms[idx] = k + 1
            partial = np.hypot(sr[idx] + cr[idx], si[idx] + ci[idx])

        # the partial sum itself can overflow even when every term is finite
        blown = ~np.isfinite(partial) | ~np.isfinite(abs_sum[idx])
        if np.any(blown):
            ok[idx[blown]] = False
            active[idx[blown]] = False
        small = at < eps_abs + eps_rel * partial
        if a > 1.0:
            small_run[idx] = np.where(small, small_run[idx] + 1, 0)
        done = small_run[idx] >= 2
        active[idx[done]] = False

        k += 1
        with np.errstate(over="ignore", invalid="ignore"):
            power[idx] = power[idx] * (zr[idx] + 1j * zi[idx])
        phase[idx] = phase[idx] * unit[idx]

    with np.errstate(invalid="ignore", divide="ignore"):
        total = (sr + cr) + 1j * (si + ci)
        # for real z < 0 the tail alternates with shrinking terms, so the last terms bound it
        alternating = (zi == 0) & (zr < 0)
        tail = last_two + np.where(alternating, 0.0, _tail_bound(prev_abs, last_two - prev_abs))
        err = tail + round_err + 2 * _EPS * np.abs(total)
    if not is_complex:
        total = total.real
    return total, err, terms, abs_sum, ok


def _tail_bound(last, before):
    """Geometric bound ``last * rho / (1 - rho)`` on the terms not summed.

    Past the peak, the ratio of consecutive Mittag-Leffler terms only
    decreases, so the last observed ratio rho bounds every later one.
    """
    last = np.asarray(last, dtype=float)
    before = np.asarray(before, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rho = np.where(last == 0, 0.0, last / before)
        return np.where(rho < 1, last * rho / (1 - rho), np.inf)


def _ml_extended(alpha, beta, zs, target, digits, k_max):
    """Re-sum the series for the points ``zs`` with ``digits`` working digits.

    The term count comes from log-space term magnitudes (two consecutive terms
    below ``target/1000`` past the largest term), then the polynomial is
    evaluated by Horner's rule.
    """
    values, errors, terms = [], [], []
    bits = int(math.ceil(digits * math.log2(10))) + 8
    log_cut = math.log(target * 1e-3)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        coeffs = _RGammaSequence(alpha, beta)
        log_tiny = -bits * math.log(2.0)
        table = _LogGammaTable(alpha, beta)
        alt = [not isinstance(z, complex) and z < 0 for z in zs]
        ns, tails, log_sums = _truncation_stats(table, [abs(z) for z in zs], log_cut, k_max, alt)
        for z, n, tail, log_abs_sum in zip(zs, ns, tails, log_sums):
            n = int(n)
            cs = coeffs.upto(n)
            zx = gmpy2.mpc(z) if isinstance(z, complex) else gmpy2.mpfr(z)
            s = cs[n - 1]
            for c in reversed(cs[: n - 1]):
                s = s * zx + c
            v = complex(s) if isinstance(z, complex) else float(s)
            # 2**-bits * n * sum|t_k|, formed in log space since |t_k| may exceed the double range
            rounding = math.exp(min(log_tiny + math.log(n) + log_abs_sum, _LOG_OVERFLOW))
            values.append(v)
            errors.append(float(tail) + rounding + 2 * _EPS * abs(v))
            terms.append(n)
    return values, errors, terms


def _as_small_fraction(x: float, max_den: int = 64) -> Fraction | None:
    """``x`` as a fraction with denominator <= max_den, only when that is exact."""
    f = Fraction(x)
    return f if f.denominator <= max_den else None


class _RGammaSequence:
    """1/gamma(alpha k + beta) for k = 0, 1, ... in the current gmpy2 precision.

    When the doubles alpha = n/m and beta are exactly small-denominator
    rationals (0.5, 1.25, ...) the arguments
    split into m chains advancing by the integer n, so each new coefficient
    costs n multiplications via gamma(x + n) = gamma(x) x (x+1) ... (x+n-1)
    instead of a full gamma evaluation.
    """

    def __init__(self, alpha, beta):
        self.alpha, self.beta = alpha, beta
        self.values: list = []
        fa, fb = _as_small_fraction(alpha), _as_small_fraction(beta)
        self.chain = None
        if fa is not None and fb is not None and fa.numerator > 0:
            starts = [fb + fa * j for j in range(fa.denominator)]
            if all(x > 0 for x in starts):
                self.chain = (fa.numerator, fa.denominator)
                self.args = [gmpy2.mpfr(x.numerator) / x.denominator for x in starts]
                self.gammas = [gmpy2.gamma(x) for x in self.args]

    def upto(self, n):
        vals = self.values
        if self.chain is None:
            a_x, b_x = gmpy2.mpfr(self.alpha), gmpy2.mpfr(self.beta)
            while len(vals) < n:
                vals.append(_rgamma_x(a_x * len(vals) + b_x))
            return vals
        step, m = self.chain
        while len(vals) < n:
            k = len(vals)
            j = k % m
            if k >= m:
                x, g = self.args[j], self.gammas[j]
                for i in range(step):
                    g = g * (x + i)
                self.args[j], self.gammas[j] = x + step, g
            vals.append(1 / self.gammas[j])
        return vals


class _LogGammaTable:
    """Growing table of log|gamma(alpha k + beta)|, +inf at the poles."""

    def __init__(self, alpha, beta):
        self.alpha, self.beta = alpha, beta
        self.values = np.empty(0)

    def upto(self, n):
        if self.values.size < n:
            m = max(n, 2 * self.values.size, 256)
            a = self.alpha * np.arange(m) + self.beta
            self.values = np.array(
                [math.inf if (x <= 0 and x == math.floor(x)) else math.lgamma(x) for x in a]
            )
        return self.values[:n]


_STATS_CHUNK = 4_000_000  # matrix entries per vectorized block


def _truncation_stats(table, rs, log_cut, k_max, alt=None):
    """Per radius: term count, sum of the last two |terms|, and log of sum |terms|.

    The series stops after the first two consecutive terms, past the largest
    one, whose log-magnitude is below ``log_cut``. ``alt`` marks real negative
    arguments, whose alternating tail needs no geometric bound.
    """
    rs = np.asarray(rs, dtype=float)
    alt = np.zeros(rs.size, dtype=bool) if alt is None else np.asarray(alt, dtype=bool)
    n_out = np.zeros(rs.size, dtype=int)
    tail = np.zeros(rs.size)
    log_sum = np.zeros(rs.size)
    with np.errstate(divide="ignore"):
        lrs = np.log(rs)
    width = 256
    todo = np.arange(rs.size)
    while todo.size:
        if width > 2 * k_max:
            raise ConvergenceError(f"extended-precision Mittag-Leffler series exceeded {k_max} terms")
        ks = np.arange(width)
        lg = table.upto(width)
        late = table.alpha * ks + table.beta > 1.0
        rows = max(1, _STATS_CHUNK // width)
        unresolved = []
        for start in range(0, todo.size, rows):
            idx = todo[start : start + rows]
            with np.errstate(invalid="ignore"):
                vals = np.where(ks > 0, ks * lrs[idx, None], 0.0) - lg
            small = late & (vals < log_cut) & (vals < np.maximum.accumulate(vals, axis=1))
            pair = small[:, :-1] & small[:, 1:]
            found = pair.any(axis=1)
            unresolved.append(idx[~found])
            if not found.any():
                continue
            hit = idx[found]
            v = vals[found]
            n = np.argmax(pair[found], axis=1) + 2
            cols = np.arange(width)
            v = np.where(cols < n[:, None], v, -np.inf)
            peak = v.max(axis=1)
            n_out[hit] = n
            rows_hit = np.arange(v.shape[0])
            last, before = np.exp(v[rows_hit, n - 1]), np.exp(v[rows_hit, n - 2])
            alternating = alt[hit]
            tail[hit] = last + before + np.where(alternating, 0.0, _tail_bound(last, before))
            log_sum[hit] = peak + np.log(np.exp(v - peak[:, None]).sum(axis=1))
        todo = np.concatenate(unresolved) if unresolved else todo[:0]
        width *= 2
    if np.any(n_out > k_max):
        raise ConvergenceError(f"extended-precision Mittag-Leffler series exceeded {k_max} terms")
    return n_out, tail, log_sum


def _rgamma_x(a):
    """Reciprocal gamma in the current gmpy2 precision, zero at the poles."""
    if a <= 0 and gmpy2.is_integer(a):
        return gmpy2.mpfr(0)
    return 1 / gmpy2.gamma(a)


def ml(
    p: MLParams,
    z,
    *,
    z_max: float = Z_MAX,
    eps_rel: float | None = None,
    eps_abs: float = EPS_ABS,
    k_max: int = K_MAX,
    max_error: float | None = None,
) -> MLResult:
    """Two-parameter Mittag-Leffler function ``sum_k z**k / gamma(alpha k + beta)``.

    ``alpha == beta == 1`` is returned as ``exp(z)`` exactly. Otherwise the
    series is summed with Neumaier compensation and stops once two
    consecutive terms fall below ``eps_abs + eps_rel*|partial sum|``. The
    returned error estimate covers the truncated tail and the rounding in each
    term.

    If ``max_error`` is given, points whose double-precision estimate exceeds it
    (cancellation for large negative arguments) are re-summed with enough extra
    working digits to meet it.

    Raises DomainError if ``|z| > z_max`` and ConvergenceError when more than
    ``k_max`` terms are needed.
    """
    if isinstance(p, (int, float)):
        p = MLParams(float(p))
    eps_rel = default_eps_rel() if eps_rel is None else eps_rel
    z_arr = np.asarray(z)
    if not np.iscomplexobj(z_arr):
        z_arr = z_arr.astype(float)
    flat = z_arr.ravel()
    if not np.all(np.isfinite(flat)):
        raise DomainError("Mittag-Leffler argument must be finite")
    if flat.size and np.max(np.abs(flat)) > z_max:
        raise DomainError(
            f"|z| = {np.max(np.abs(flat)):.6g} exceeds the series radius z_max = {z_max}"
        )

    if p.alpha == 1.0 and p.beta == 1.0:
        value = np.exp(flat)
        if not np.all(np.isfinite(value)):
            raise NumericalError("Mittag-Leffler value overflows double precision")
        return MLResult(
            value=_out(value.reshape(z_arr.shape)),
            error=_out((_EPS * np.abs(value)).reshape(z_arr.shape)),
            terms=_out(np.zeros(z_arr.shape, dtype=int)),
        )

    value, err, terms, abs_sum, ok = _ml_double(p.alpha, p.beta, flat, eps_rel, eps_abs, k_max)
    digits = np.full(flat.size, 16)

    if max_error is not None:
        need = ~ok | (err > np.maximum(max_error, 4 * _EPS * np.abs(value)))
    else:
        need = ~ok
        if np.any(need):
            raise NumericalError("Mittag-Leffler series term overflowed double precision")
    if np.any(need):
        # with z > 0 and beta > 0 every term is positive, so an overflowing
        # partial sum means the value itself overflows
        if p.beta > 0 and np.any(~ok & (flat.real > 0) & (flat.imag == 0)):
            raise NumericalError("Mittag-Leffler value overflows double precision")
        value = value.copy()
        need_idx = np.nonzero(need)[0]
        # digits lost to cancellation follow the size of the largest terms
        lost = np.array(
            [
                math.log10(max(abs_sum[i], 1.0)) if ok[i] else _digits_lost(p.alpha, p.beta, abs(flat[i]))
                for i in need_idx
            ]
        )
        want = np.maximum(np.ceil((lost - math.log10(max_error) + 8) / 8) * 8, 24).astype(int)
        for dig in np.unique(want):
            idx = need_idx[want == dig]
            pts = [complex(flat[i]) if np.iscomplexobj(flat) else float(flat[i]) for i in idx]
            vals, errs, ks = _ml_extended(p.alpha, p.beta, pts, max_error, int(dig), k_max)
            value[idx] = vals
            err[idx] = errs
            terms[idx] = ks
            digits[idx] = dig
        if not np.all(np.isfinite(value)):
            raise NumericalError("Mittag-Leffler value overflows double precision")

    shape = z_arr.shape
    return MLResult(
        value=_out(value.reshape(shape)),
        error=_out(err.reshape(shape)),
        terms=_out(terms.reshape(shape)),
        digits=_out(digits.reshape(shape)),
    )


def _digits_lost(alpha: float, beta: float, r: float) -> float:
    """log10 of the largest series term |z|**k / gamma(alpha k + beta)."""
    if r == 0:
        return 0.0
    best = -math.inf
    k = 0
    lr = math.log(r)
    while True:
        a = alpha * k + beta
        if a > 0:
            v = k * lr - math.lgamma(a)
            if v < best and a > 2:
                break
            best = max(best, v)
        k += 1
    return best / math.log(10)


def ml_value(alpha: float, beta: float, z, **kwargs):
    """Shorthand returning only the value of :func:`ml`."""
    return ml(MLParams(alpha, beta), z, **kwargs).value
