"""SU(2) parameterizations, Wigner d-matrices and basis-change Jacobians.

Conventions used throughout the package:

* Euler angles compose as ``exp(i psi1 sz/2) exp(i psi2 sy/2) exp(i psi3 sz/2)``
  (note the ``+i``), and the spin-j analogue uses ``J_z``, ``J_y``.
* ``d^j_{md,m}(beta) = <j,md| exp(+i beta J_y) |j,m>``.
* Spin-j states are indexed by the photon number in mode ``a``:
  ``index M <-> m = M - j``.
* The DA and RL measurement frames are reached with ``h`` and ``h_c``:
  ``P_DA(U) = P_HV(h^+ U h)`` and ``P_RL(U) = P_HV(h_c^+ U h_c)``.
* ``{a, b, c, d}`` coordinates parameterize ``[[a+ib, c+id], [-c+id, a-ib]]``.
  As used for the path families and the ``abcd:`` CLI spec, this is the
  matrix acting on the creation operators; the matrix acting on spin
  states is its transpose (see :func:`mode_quaternion_to_spin`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConversionError, DomainError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
IDENTITY2 = np.eye(2, dtype=complex)

H_DA = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
H_RL = np.array([[1, 1], [1j, -1j]], dtype=complex) / math.sqrt(2.0)
BASIS_MATRICES = {"HV": IDENTITY2, "DA": H_DA, "RL": H_RL}

UNITARY_TOL = 1e-10
SINGULAR_SIN_TOL = 1e-8
TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class EulerAngles:
    psi1: float
    psi2: float
    psi3: float

    @classmethod
    def from_array(cls, arr) -> "EulerAngles":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.psi1, self.psi2, self.psi3])

    def canonical(self) -> "EulerAngles":
        """Equivalent angles in the canonical ranges (same SU(2) element)."""
        return matrix_to_euler(euler_to_matrix(self))

    @property
    def singular(self) -> bool:
        return abs(math.sin(self.psi2)) < SINGULAR_SIN_TOL


@dataclass(frozen=True)
class QuaternionParams:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        norm = self.a**2 + self.b**2 + self.c**2 + self.d**2
        if abs(norm - 1.0) > 1e-12:
            raise ConversionError(f"quaternion components must have unit norm, got {norm!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])


U_MIN = QuaternionParams(0.5, 0.5, 0.5, 0.5)


def _wrap_pm(x, period):
    """Map into ``[-period/2, period/2)``."""
    return (np.asarray(x) + period / 2.0) % period - period / 2.0


def euler_to_matrix(e) -> np.ndarray:
    psi1, psi2, psi3 = e.as_array() if isinstance(e, EulerAngles) else np.asarray(e, dtype=float)
    c, s = math.cos(psi2 / 2.0), math.sin(psi2 / 2.0)
    ps = np.exp(0.5j * (psi1 + psi3))
    pd = np.exp(0.5j * (psi1 - psi3))
    return np.array([[c * ps, s * pd], [-s * np.conj(pd), c * np.conj(ps)]])


def euler_to_matrix_batch(psi: np.ndarray) -> np.ndarray:
    """Vectorized :func:`euler_to_matrix` over rows of a ``(K, 3)`` array."""
    psi = np.asarray(psi, dtype=float)
    c, s = np.cos(psi[:, 1] / 2.0), np.sin(psi[:, 1] / 2.0)
    ps = np.exp(0.5j * (psi[:, 0] + psi[:, 2]))
    pd = np.exp(0.5j * (psi[:, 0] - psi[:, 2]))
    out = np.empty((psi.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = c * ps
    out[:, 0, 1] = s * pd
    out[:, 1, 0] = -s * np.conj(pd)
    out[:, 1, 1] = c * np.conj(ps)
    return out


def check_su2(m: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ConversionError(f"expected a 2x2 matrix, got shape {m.shape}")
    if np.max(np.abs(m.conj().T @ m - IDENTITY2)) > tol:
        raise ConversionError("matrix is not unitary")
    if abs(np.linalg.det(m) - 1.0) > tol:
        raise ConversionError("matrix is unitary but det != 1; fix the global phase first")
    return m


def to_su2(m: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Remove the global phase of a unitary so that ``det == 1``.

    The square root of the determinant is taken on the principal branch,
    so the result is defined up to an overall sign.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2) or np.max(np.abs(m.conj().T @ m - IDENTITY2)) > tol:
        raise ConversionError("matrix is not a 2x2 unitary")
    return m / np.sqrt(np.linalg.det(m))


def quaternion_to_matrix(q) -> np.ndarray:
    a, b, c, d = q.as_array() if isinstance(q, QuaternionParams) else np.asarray(q, dtype=float)
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def matrix_to_quaternion(m: np.ndarray) -> QuaternionParams:
    m = check_su2(m)
    a, b, c, d = m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag
    norm = math.sqrt(a * a + b * b + c * c + d * d)
    return QuaternionParams(a / norm, b / norm, c / norm, d / norm)


def mode_quaternion_to_spin(q) -> np.ndarray:
    """Single-particle (spin) matrix for ``{a,b,c,d}`` given as a mode transformation."""
    return quaternion_to_matrix(q).T


def spin_to_mode_quaternion(m: np.ndarray) -> QuaternionParams:
    return matrix_to_quaternion(np.asarray(m).T)


def _angles_from_entries(m11, m12):
    r11, r12 = abs(m11), abs(m12)
    psi2 = 2.0 * math.atan2(r12, r11)
    if r12 < 1e-15:
        # gimbal lock at psi2 = 0: phase goes to psi1
        psi1, psi3 = 2.0 * np.angle(m11), 0.0
    elif r11 < 1e-15:
        psi1, psi3 = 2.0 * np.angle(m12), 0.0
    else:
        t11, t12 = np.angle(m11), np.angle(m12)
        psi1, psi3 = t11 + t12, t11 - t12
    return float(_wrap_pm(psi1, FOUR_PI)), psi2, float(_wrap_pm(psi3, FOUR_PI))


def matrix_to_euler(m: np.ndarray) -> EulerAngles:
    """Canonical Euler angles of an SU(2) matrix.

    ``psi2`` lies in ``[0, pi]`` and ``psi1``, ``psi3`` in ``[-2pi, 2pi)`` with
    ``psi1 +- psi3`` in ``(-2pi, 2pi]`` (that box alone covers SU(2) twice).
    At ``psi2 in {0, pi}`` we set ``psi3 = 0``.
    """
    m = check_su2(m)
    return EulerAngles(*_angles_from_entries(m[0, 0], m[0, 1]))


def matrix_to_euler_batch(ms: np.ndarray) -> np.ndarray:
    """``(K, 2, 2)`` SU(2) stack to ``(K, 3)`` canonical Euler angles (no validation)."""
    m11, m12 = ms[:, 0, 0], ms[:, 0, 1]
    r11, r12 = np.abs(m11), np.abs(m12)
    t11, t12 = np.angle(m11), np.angle(m12)
    psi1 = np.where(r12 < 1e-15, 2 * t11, np.where(r11 < 1e-15, 2 * t12, t11 + t12))
    psi3 = np.where((r12 < 1e-15) | (r11 < 1e-15), 0.0, t11 - t12)
    return np.column_stack([_wrap_pm(psi1, FOUR_PI), 2.0 * np.arctan2(r12, r11), _wrap_pm(psi3, FOUR_PI)])


def projective_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_phi ||a - e^{i phi} b||_F``."""
    overlap = np.trace(np.asarray(b).conj().T @ np.asarray(a))
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


# --- spin-j representation -------------------------------------------------


def _check_lattice(j, *ms):
    two_j = 2.0 * float(j)
    if two_j < 0 or abs(two_j - round(two_j)) > 1e-12:
        raise DomainError(f"j must be a non-negative half-integer, got {j!r}")
    for m in ms:
        diff = float(j) - float(m)
        if abs(diff - round(diff)) > 1e-12 or abs(float(m)) > float(j) + 1e-12:
            raise DomainError(f"m={m!r} is not on the lattice of j={j!r}")
    return int(round(two_j))


@lru_cache(maxsize=64)
def _jy_eig(n: int):
    jy = spin_jy(n)
    w, v = np.linalg.eigh(jy)
    return w, v


def spin_jz(n: int) -> np.ndarray:
    return np.diag(np.arange(n + 1) - n / 2.0).astype(complex)


def spin_jy(n: int) -> np.ndarray:
    """``J_y`` on the ``n + 1`` states of spin ``j = n/2``, indexed by ``M = m + j``."""
    j = n / 2.0
    m = np.arange(n) - j
    jp = np.zeros((n + 1, n + 1))
    jp[np.arange(1, n + 1), np.arange(n)] = np.sqrt((j - m) * (j + m + 1.0))
    return (jp - jp.T) / 2j


def spin_jx(n: int) -> np.ndarray:
    j = n / 2.0
    m = np.arange(n) - j
    jp = np.zeros((n + 1, n + 1))
    jp[np.arange(1, n + 1), np.arange(n)] = np.sqrt((j - m) * (j + m + 1.0))
    return ((jp + jp.T) / 2.0).astype(complex)


def wigner_d_matrix(j, beta: float) -> np.ndarray:
    """Full real d-matrix ``d[Md, M] = <j, Md-j| exp(i beta J_y) |j, M-j>``."""
    n = _check_lattice(j)
    w, v = _jy_eig(n)
    d = (v * np.exp(1j * beta * w)) @ v.conj().T
    return d.real


def wigner_d(j, md, m, beta: float) -> float:
    n = _check_lattice(j, md, m)
    jj = n / 2.0
    return float(wigner_d_matrix(jj, beta)[int(round(md + jj)), int(round(m + jj))])


def spin_representation(m2: np.ndarray, n: int) -> np.ndarray:
    """Action of a 2x2 single-particle matrix on the N-photon space.

    Built directly from ``U a+ U+ = m2[0,0] a+ + m2[1,0] b+`` and
    ``U b+ U+ = m2[0,1] a+ + m2[1,1] b+``, expanding the creation-operator
    polynomial; independent of any Euler decomposition.
    """
    alpha, beta = m2[0, 0], m2[1, 0]
    gamma, delta = m2[0, 1], m2[1, 1]
    fact = [math.factorial(k) for k in range(n + 1)]
    out = np.zeros((n + 1, n + 1), dtype=complex)
    for k in range(n + 1):
        for p in range(k + 1):
            for q in range(n - k + 1):
                r = p + q
                coef = math.comb(k, p) * math.comb(n - k, q)
                amp = alpha**p * beta ** (k - p) * gamma**q * delta ** (n - k - q)
                out[r, k] += coef * amp * math.sqrt(fact[r] * fact[n - r] / (fact[k] * fact[n - k]))
    return out


# --- Haar sampling ---------------------------------------------------------


def haar_random(rng=None) -> np.ndarray:
    """One Haar-distributed SU(2) matrix.  ``rng`` is a seed or ``Generator``."""
    return haar_random_batch(np.random.default_rng(rng), 1)[0]


def haar_random_batch(rng, k: int) -> np.ndarray:
    """``(k, 2, 2)`` Haar SU(2) samples from uniform points on the 3-sphere."""
    rng = np.random.default_rng(rng)
    g = rng.standard_normal((k, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    out = np.empty((k, 2, 2), dtype=complex)
    out[:, 0, 0] = g[:, 0] + 1j * g[:, 1]
    out[:, 0, 1] = g[:, 2] + 1j * g[:, 3]
    out[:, 1, 0] = -g[:, 2] + 1j * g[:, 3]
    out[:, 1, 1] = g[:, 0] - 1j * g[:, 1]
    return out


# --- basis changes and Jacobians -------------------------------------------


def basis_conjugate(e: EulerAngles, basis: str) -> EulerAngles:
    """Euler angles ``psi'`` (DA) or ``psi''`` (RL) with ``P_basis(psi) = P_HV(psi')``."""
    b = BASIS_MATRICES[basis]
    if basis == "HV":
        return e
    return matrix_to_euler(b.conj().T @ euler_to_matrix(e) @ b)


def conjugated_cos2(e: EulerAngles, basis: str) -> float:
    """Closed form of ``cos^2(psi2'/2)`` (DA) or ``cos^2(psi2''/2)`` (RL)."""
    s_half = (e.psi1 + e.psi3) / 2.0
    d_half = (e.psi1 - e.psi3) / 2.0
    c2 = math.cos(e.psi2 / 2.0) ** 2
    s2 = 1.0 - c2
    if basis == "DA":
        return c2 * math.cos(s_half) ** 2 + s2 * math.sin(d_half) ** 2
    if basis == "RL":
        return c2 * math.cos(s_half) ** 2 + s2 * math.cos(d_half) ** 2
    raise ValueError(f"no closed form for basis {basis!r}")


def conjugated_psi2_gradient(e: EulerAngles, basis: str) -> np.ndarray:
    """Analytic ``d psi2' / d psi`` from the closed-form cos^2 identity.

    Undefined where the conjugated angle itself sits on a gimbal point.
    """
    x = conjugated_cos2(e, basis)
    psi2p = 2.0 * math.acos(math.sqrt(min(max(x, 0.0), 1.0)))
    total, diff = e.psi1 + e.psi3, e.psi1 - e.psi3
    c2 = math.cos(e.psi2 / 2.0) ** 2
    s2 = 1.0 - c2
    half_sin = math.sin(e.psi2) / 2.0
    sgn = 1.0 if basis == "DA" else -1.0
    cos_half_s2 = math.cos(total / 2.0) ** 2
    tail = math.sin(diff / 2.0) ** 2 if basis == "DA" else math.cos(diff / 2.0) ** 2
    dx = np.array(
        [
            -c2 * math.sin(total) / 2.0 + sgn * s2 * math.sin(diff) / 2.0,
            -half_sin * cos_half_s2 + half_sin * tail,
            -c2 * math.sin(total) / 2.0 - sgn * s2 * math.sin(diff) / 2.0,
        ]
    )
    return -2.0 * dx / math.sin(psi2p)


def v_closed_form(psi2: float) -> np.ndarray:
    c = math.cos(psi2)
    return 0.5 * np.array([[1.0, 0.0, c], [0.0, 1.0, 0.0], [c, 0.0, 1.0]])


@dataclass(frozen=True)
class Jacobians:
    """Frame-change matrices at one point.

    ``J[k, a] = d psi_k / d theta_a`` (locally-independent ``theta``),
    ``V = (J^-1)^T J^-1``, ``Wp[a, b] = d psi'_a / d psi_b`` and likewise
    ``Wpp`` for the RL frame.  ``J`` is all-NaN when ``singular`` is set.
    """

    J: np.ndarray
    V: np.ndarray
    Wp: np.ndarray
    Wpp: np.ndarray
    singular: bool


def _euler_derivatives(e: EulerAngles):
    psi1, psi2, psi3 = e.as_array()
    a = np.diag([np.exp(0.5j * psi1), np.exp(-0.5j * psi1)])
    b = np.array([[math.cos(psi2 / 2), math.sin(psi2 / 2)], [-math.sin(psi2 / 2), math.cos(psi2 / 2)]])
    c = np.diag([np.exp(0.5j * psi3), np.exp(-0.5j * psi3)])
    m = a @ b @ c
    return m, (0.5j * SIGMA_Z @ m, a @ (0.5j * SIGMA_Y) @ b @ c, m @ (0.5j * SIGMA_Z))


def generator_coefficients(e: EulerAngles) -> np.ndarray:
    """``A[k, b]`` with ``i U^+ dU/dpsi_k = sum_b A[k, b] sigma_b``."""
    m, dms = _euler_derivatives(e)
    coeffs = np.empty((3, 3))
    for k, dm in enumerate(dms):
        g = 1j * m.conj().T @ dm
        for b, sigma in enumerate(PAULIS):
            coeffs[k, b] = (np.trace(g @ sigma) / 2.0).real
    return coeffs


def _conjugate_fd(e: np.ndarray, basis: str, step: float) -> np.ndarray:
    w = np.empty((3, 3))
    for k in range(3):
        dp = np.zeros(3)
        dp[k] = step
        plus = basis_conjugate(EulerAngles.from_array(e + dp), basis).as_array()
        minus = basis_conjugate(EulerAngles.from_array(e - dp), basis).as_array()
        delta = plus - minus
        # psi1/psi3 jump by 2pi across the arg branch cut without changing U
        delta[[0, 2]] = _wrap_pm(delta[[0, 2]], TWO_PI)
        w[:, k] = delta / (2.0 * step)
    return w


def jacobians_at(e: EulerAngles, step: float = 1e-6) -> Jacobians:
    coeffs = generator_coefficients(e)
    j_inv = math.sqrt(2.0) * coeffs.T
    v = j_inv.T @ j_inv
    singular = e.singular
    j = np.full((3, 3), np.nan) if singular else np.linalg.inv(j_inv)
    arr = e.as_array()
    return Jacobians(j, v, _conjugate_fd(arr, "DA", step), _conjugate_fd(arr, "RL", step), singular)


def parse_unitary_spec(spec: str) -> EulerAngles:
    """Parse ``euler:psi1,psi2,psi3`` or ``abcd:a,b,c,d`` into Euler angles.

    ``abcd`` components off unit norm by less than 1e-6 are rescaled with a
    warning; anything further off is rejected.
    """
    kind, _, body = spec.partition(":")
    try:
        vals = [float(v) for v in body.split(",")]
    except ValueError as exc:
        raise ConversionError(f"bad numbers in unitary spec {spec!r}") from exc
    if kind == "euler" and len(vals) == 3:
        if not all(math.isfinite(v) for v in vals):
            raise ConversionError("Euler angles must be finite")
        return EulerAngles(*vals)
    if kind == "abcd" and len(vals) == 4:
        norm = math.sqrt(sum(v * v for v in vals))
        if abs(norm - 1.0) >= 1e-6:
            raise ConversionError(f"abcd components have norm {norm!r}; expected 1")
        if abs(norm - 1.0) > 1e-12:
            warnings.warn(f"abcd components rescaled from norm {norm!r}", UserWarning, stacklevel=2)
        q = QuaternionParams(*(v / norm for v in vals))
        return matrix_to_euler(mode_quaternion_to_spin(q))
    raise ConversionError(f"unitary spec must be 'euler:p1,p2,p3' or 'abcd:a,b,c,d', got {spec!r}")
