import math

import mpmath as mp
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def ml_oracle(alpha, beta, z, digits=20):
    """E_{alpha,beta}(z) by direct high-precision summation with mpmath.

    Working precision covers the largest term plus ``digits``, about twice the
    accuracy a double result can carry.
    """
    r = abs(complex(z))
    peak = 0.0
    if r > 0:
        k = 0
        while True:
            a = alpha * k + beta
            if a > 0:
                v = k * math.log(r) - math.lgamma(a)
                if a > 2 and v < peak:
                    break
                peak = max(peak, v)
            k += 1
    dps = int(peak / math.log(10)) + 2 * digits
    with mp.workdps(dps):
        zz = mp.mpc(z) if isinstance(z, complex) else mp.mpf(z)
        a_m, b_m = mp.mpf(alpha), mp.mpf(beta)
        total, k = mp.mpf(0), 0
        tol = mp.mpf(10) ** (-2 * digits)
        small = 0
        while True:
            t = zz**k * mp.rgamma(a_m * k + b_m)
            total += t
            if alpha * k + beta > 2 and abs(t) < tol * max(1, abs(total)):
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
            k += 1
        return complex(total) if isinstance(z, complex) else float(total)


def q_exp_oracle(q, z):
    """Principal-branch complex power in polar form, computed with mpmath."""
    with mp.workdps(40):
        w = 1 + (1 - mp.mpf(q)) * mp.mpc(z)
        r, phi = abs(w), mp.arg(w)
        p = 1 / (1 - mp.mpf(q))
        return complex(r**p * mp.expj(p * phi))


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path
