"""Deformed spin-1/2 algebra and evolution operators on two-level systems.

Operators are plain 2x2 complex numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .specfun import DeformationQ, MLParams, gamma_fn, ml, q_exp

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class PhysicalScales:
    """Action scale, regularization masses and magnetic constants.

    The defaults (g = 2, mu_b = 1/2, everything else 1) give unit gyromagnetic
    factors in both frameworks.
    """

    hbar_scale: float = 1.0
    m_q: float = 1.0
    m_alpha: float = 1.0
    g_factor: float = 2.0
    mu_b: float = 0.5

    def __post_init__(self):
        for name in ("hbar_scale", "m_q", "m_alpha"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    def gamma_q(self, d: DeformationQ | None = None, x: float = 0.0) -> float:
        """``[1 + lam (1-q') x] g mu_B / (hbar M_q)``."""
        return deformation_factor_q(d, x) * self.g_factor * self.mu_b / (self.hbar_scale * self.m_q)

    def gamma_alpha(self, alpha: float) -> float:
        """``M_alpha Gamma(alpha + 1) g mu_B / hbar**alpha``."""
        return self.m_alpha * gamma_fn(alpha + 1.0) * self.g_factor * self.mu_b / self.hbar_scale**alpha


def deformation_factor_q(d: DeformationQ | None, x: float = 0.0) -> float:
    """``1 + lam (1 - q') x``; ``x`` is a fixed position-like configuration scalar."""
    if d is None or x == 0.0:
        return 1.0
    v = 1.0 + complex(d.lam) * (1.0 - d.q_prime) * x
    if v.imag != 0:
        raise DomainError("the algebra deformation factor needs a real lambda")
    return v.real


def kappa_q(d: DeformationQ, s: PhysicalScales, x: float = 0.0) -> float:
    """Commutator scale ``[1 + lam (1-q') x] hbar M_q``."""
    k = deformation_factor_q(d, x) * s.hbar_scale * s.m_q
    if not k > 0:
        raise DomainError(f"kappa_q must be positive, got {k}")
    return k


def kappa_alpha(alpha: float, s: PhysicalScales) -> float:
    """Commutator scale ``Gamma(alpha + 1) hbar**alpha M_alpha``."""
    return gamma_fn(alpha + 1.0) * s.hbar_scale**alpha * s.m_alpha


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def deformed_angular_momenta(kappa: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``kappa * sigma_i / 2``, closing as ``[L_i, L_j] = i kappa eps_ijk L_k``."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return tuple(0.5 * kappa * s for s in PAULI)


def levi_civita(i: int, j: int, k: int) -> int:
    return (i - j) * (j - k) * (k - i) // 2


def closure_defect(kappa: float) -> float:
    """Largest Frobenius norm of ``[L_i, L_j] - i kappa eps_ijk L_k`` over all i, j."""
    ls = deformed_angular_momenta(kappa)
    worst = 0.0
    for i in range(3):
        for j in range(3):
            rhs = sum(1j * kappa * levi_civita(i, j, k) * ls[k] for k in range(3))
            worst = max(worst, float(np.linalg.norm(commutator(ls[i], ls[j]) - rhs)))
    return worst


def is_hermitian(h: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.allclose(h, h.conj().T, atol=tol * max(1.0, float(np.abs(h).max()))))


def _eigh(h):
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise DomainError(f"expected a 2x2 operator, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NumericalError("operator has non-finite entries")
    if not is_hermitian(h):
        raise DomainError("the generator must be Hermitian")
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc


def _spectral(vecs, fvals):
    return (vecs * fvals) @ vecs.conj().T


def evolution_operator_q(h, t: float, d: DeformationQ, s: PhysicalScales) -> np.ndarray:
    """``e_q(-i H t / (hbar M_q))`` applied in the eigenbasis of ``H``."""
    if t == 0:
        return IDENTITY.copy()
    vals, vecs = _eigh(h)
    args = -1j * vals * t / (s.hbar_scale * s.m_q)
    return _spectral(vecs, np.array([q_exp(d, complex(a)) for a in args]))


def evolution_operator_alpha(h, t: float, p: MLParams, s: PhysicalScales) -> np.ndarray:
    """``E_alpha(-i H t**alpha / hbar**alpha)`` applied in the eigenbasis of ``H``."""
    if not (0 < p.alpha <= 1.2):
        raise DomainError(f"alpha must lie in (0, 1.2], got {p.alpha}")
    if t < 0:
        raise DomainError("the alpha evolution operator needs t >= 0")
    if t == 0:
        return IDENTITY.copy()
    vals, vecs = _eigh(h)
    args = -1j * vals * t**p.alpha / s.hbar_scale**p.alpha
    return _spectral(vecs, np.array([ml(p, complex(a)).value for a in args]))


def nonunitarity(u) -> float:
    """Frobenius norm of ``U^dagger U - I``."""
    u = np.asarray(u, dtype=complex)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def matrix_to_json(m) -> list:
    """Row-major nested lists of ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)

