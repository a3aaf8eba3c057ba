"""Two-mode N-photon pure states and their low-order correlations.

States are stored as amplitudes ``c_M`` over the Fock basis ``|M, N-M>``
(``M`` photons in mode ``a``).  Under the photon/spin mapping mode ``a``
is spin-up and mode ``b`` is spin-down, so ``|M, N-M>`` corresponds to the
symmetric (Dicke) state with ``M`` up-spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OrderError, ScaleError, SpecError, StateFamilyError

NORM_TOL = 1e-12
CONDITION_TOL = 1e-10
DICKE_MAX_N = 12

# Spin-slot ordering of the two-particle space is (uu, ud, du, dd).
_SQRT2 = math.sqrt(2.0)
_SYM_EMBED = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0 / _SQRT2, 0.0],
        [0.0, 1.0 / _SQRT2, 0.0],
        [0.0, 0.0, 1.0],
    ]
)


@dataclass(frozen=True)
class FockState:
    """Pure N-photon two-mode state ``sum_M c_M |M, N-M>``."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if int(self.n) != self.n or self.n < 1:
            raise StateFamilyError(f"photon number must be a positive integer, got {self.n!r}")
        if amps.size != self.n + 1:
            raise StateFamilyError(f"expected {self.n + 1} amplitudes for n={self.n}, got {amps.size}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise StateFamilyError(f"amplitudes are not normalized (sum |c|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "FockState":
        """Build a state from unnormalized amplitudes ``c_0..c_N``."""
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if amps.size < 2 or norm == 0.0:
            raise StateFamilyError("need at least two amplitudes with non-zero norm")
        return cls(amps.size - 1, amps / norm)

    @property
    def j(self) -> float:
        return self.n / 2.0

    def is_product(self) -> bool:
        """True when exactly one Fock amplitude is non-zero."""
        return int(np.count_nonzero(np.abs(self.amps) > NORM_TOL)) == 1

    def occupied(self) -> int:
        """Index ``M`` of the dominant amplitude (meaningful for product states)."""
        return int(np.argmax(np.abs(self.amps)))


@dataclass(frozen=True)
class StateFamily:
    """A named family of probe states.

    ``tag`` is one of ``noon``, ``holland-burnett``, ``fock``, ``yurke-odd``,
    ``yurke-even`` or ``custom``.  ``m`` is only used by ``fock`` and
    ``amps`` only by ``custom``.
    """

    tag: str
    n: int
    m: int | None = None
    amps: tuple | None = field(default=None, compare=False)


def make_state(family: StateFamily) -> FockState:
    tag, n = family.tag, family.n
    if tag != "custom" and (int(n) != n or n < 1):
        raise StateFamilyError(f"{tag}: photon number must be a positive integer, got {n!r}")
    if tag == "custom":
        if family.amps is None:
            raise StateFamilyError("custom family needs amplitudes")
        state = FockState.from_amplitudes(family.amps)
        if state.n != n:
            raise StateFamilyError(f"custom family declares n={n} but has {state.n + 1} amplitudes")
        return state

    amps = np.zeros(n + 1, dtype=complex)
    if tag == "noon":
        amps[0] = amps[n] = 1.0
    elif tag == "holland-burnett":
        if n % 2:
            raise StateFamilyError(f"holland-burnett needs even n, got {n}")
        amps[n // 2] = 1.0
    elif tag == "fock":
        m = family.m
        if m is None or not 0 <= m <= n:
            raise StateFamilyError(f"fock needs 0 <= M <= n, got M={m}, n={n}")
        amps[m] = 1.0
    elif tag == "yurke-odd":
        if n % 2 == 0:
            raise StateFamilyError(f"yurke-odd needs odd n, got {n}")
        amps[(n + 1) // 2] = amps[(n - 1) // 2] = 1.0
    elif tag == "yurke-even":
        if n % 2:
            raise StateFamilyError(f"yurke-even needs even n, got {n}")
        amps[n // 2] = amps[n // 2 + 1] = 1.0
    else:
        raise StateFamilyError(f"unknown state family {tag!r}")
    return FockState(n, amps / np.linalg.norm(amps))


def noon(n: int) -> FockState:
    return make_state(StateFamily("noon", n))


def holland_burnett(n: int) -> FockState:
    return make_state(StateFamily("holland-burnett", n))


def fock(m: int, n: int) -> FockState:
    return make_state(StateFamily("fock", n, m=m))


def yurke(n: int) -> FockState:
    """Yurke state; the odd or even variant is chosen from the parity of ``n``."""
    return make_state(StateFamily("yurke-odd" if n % 2 else "yurke-even", n))


def symmetric_pair(m: int, n: int) -> FockState:
    """Normalized ``|M, N-M> + |N-M, M>`` (collapses to ``|M, M>`` when ``2M == N``)."""
    if not 0 <= m <= n:
        raise StateFamilyError(f"need 0 <= M <= n, got M={m}, n={n}")
    amps = np.zeros(n + 1, dtype=complex)
    amps[m] += 1.0
    amps[n - m] += 1.0
    return FockState.from_amplitudes(amps)


def parse_state_spec(spec: str) -> FockState:
    """Parse ``noon:N``, ``hb:N``, ``fock:M,N``, ``yurke:N`` or ``custom:c0,...,cN``.

    Custom amplitudes are Python complex literals (``0.5``, ``1-2j``) and are
    normalized on input.
    """
    if ":" not in spec:
        raise SpecError(f"state spec {spec!r} is missing ':'")
    kind, _, body = spec.partition(":")
    kind = kind.strip().lower()
    parts = [p.strip() for p in body.split(",") if p.strip()]
    try:
        if kind == "custom":
            amps = [complex(p.replace(" ", "")) for p in parts]
            return FockState.from_amplitudes(amps)
        ints = [int(p) for p in parts]
    except ValueError as exc:
        raise SpecError(f"cannot parse state spec {spec!r}: {exc}") from None

    if kind == "fock":
        if len(ints) != 2:
            raise SpecError("fock spec is fock:M,N")
        return fock(ints[0], ints[1])
    if len(ints) != 1:
        raise SpecError(f"{kind} spec takes a single photon number")
    if kind == "noon":
        return noon(ints[0])
    if kind == "hb":
        return holland_burnett(ints[0])
    if kind == "yurke":
        return yurke(ints[0])
    raise SpecError(f"unknown state kind {kind!r}")


@dataclass(frozen=True)
class ModeExpectations:
    """Normally-ordered ladder-operator moments of a two-mode state."""

    n_a: float  # <a+ a>
    n_b: float  # <b+ b>
    a_dag_b: complex  # <a+ b>
    n_a_sq: float  # <a+ a a+ a>
    n_b_sq: float  # <b+ b b+ b>
    n_a_n_b: float  # <a+ a b+ b>
    a_dag2_b2: complex  # <a+^2 b^2> = <a+ a+ b b>
    a_dag_b_nb_minus_1: complex  # <a+ b (b+ b - 1)> = <a+ b+ b b>
    a_dag_b_n_a: complex  # <(a+ b)(a+ a)> = <a+ a+ a b>

    @property
    def a_b_dag(self) -> complex:
        return complex(np.conj(self.a_dag_b))


def mode_expectations(state: FockState) -> ModeExpectations:
    c = state.amps
    n = state.n
    m = np.arange(n + 1, dtype=float)
    pop = np.abs(c) ** 2

    # a+ b |M> = sqrt((M+1)(N-M)) |M+1>
    hop = np.sqrt((m[:-1] + 1.0) * (n - m[:-1]))
    shift1 = np.conj(c[1:]) * c[:-1] * hop
    if n >= 2:
        mm = m[:-2]
        hop2 = np.sqrt((mm + 1.0) * (mm + 2.0) * (n - mm) * (n - mm - 1.0))
        a_dag2_b2 = complex(np.sum(np.conj(c[2:]) * c[:-2] * hop2))
    else:
        a_dag2_b2 = 0j

    return ModeExpectations(
        n_a=float(pop @ m),
        n_b=float(pop @ (n - m)),
        a_dag_b=complex(np.sum(shift1)),
        n_a_sq=float(pop @ m**2),
        n_b_sq=float(pop @ (n - m) ** 2),
        n_a_n_b=float(pop @ (m * (n - m))),
        a_dag2_b2=a_dag2_b2,
        a_dag_b_nb_minus_1=complex(np.sum(shift1 * (n - m[:-1] - 1.0))),
        a_dag_b_n_a=complex(np.sum(shift1 * m[:-1])),
    )


@dataclass(frozen=True)
class ReducedDensity:
    """One- or two-particle reduced state in the spin picture."""

    order: int
    matrix: np.ndarray
    trace_norm: float = 1.0

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        dim = 2**self.order
        if mat.shape != (dim, dim):
            raise ValueError(f"order-{self.order} density must be {dim}x{dim}, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def validate(self, herm_tol=1e-12, psd_tol=1e-10, trace_tol=1e-12) -> None:
        """Raise ``AssertionError`` if the matrix is not a valid (scaled) density."""
        mat = self.matrix
        assert np.max(np.abs(mat - mat.conj().T)) <= herm_tol, "not Hermitian"
        assert np.min(np.linalg.eigvalsh(mat)) >= -psd_tol, "not positive semidefinite"
        assert abs(np.trace(mat).real - self.trace_norm) <= trace_tol, "wrong trace"


def rho1(state: FockState) -> ReducedDensity:
    """One-particle reduced state in the (up, down) basis."""
    ex = mode_expectations(state)
    mat = np.array([[ex.n_a, ex.a_b_dag], [ex.a_dag_b, ex.n_b]], dtype=complex) / state.n
    return ReducedDensity(1, mat)


def rho2_photonic(state: FockState) -> np.ndarray:
    """Two-photon reduced state on the basis (|2,0>, |1,1>, |0,2>)."""
    n = state.n
    if n < 2:
        raise OrderError(f"two-particle reduced state needs n >= 2, got n={n}")
    ex = mode_expectations(state)
    r20_11 = _SQRT2 * np.conj(ex.a_dag_b_n_a)  # <2,0| rho |1,1>
    r11_02 = _SQRT2 * np.conj(ex.a_dag_b_nb_minus_1)  # <1,1| rho |0,2>
    r20_02 = np.conj(ex.a_dag2_b2)  # <2,0| rho |0,2>
    mat = np.array(
        [
            [ex.n_a_sq - ex.n_a, r20_11, r20_02],
            [np.conj(r20_11), 2.0 * ex.n_a_n_b, r11_02],
            [np.conj(r20_02), np.conj(r11_02), ex.n_b_sq - ex.n_b],
        ],
        dtype=complex,
    )
    return mat / (n * (n - 1))


def rho2(state: FockState) -> ReducedDensity:
    """Two-particle reduced state in the (uu, ud, du, dd) basis, swap-symmetric."""
    return ReducedDensity(2, _SYM_EMBED @ rho2_photonic(state) @ _SYM_EMBED.T)


@dataclass(frozen=True)
class ConditionReport:
    passed: bool
    residuals: dict

    def __bool__(self):
        return self.passed


def check_saturation(state: FockState, tol: float = CONDITION_TOL) -> ConditionReport:
    """Balanced intensities and no first-order coherence between the modes."""
    ex = mode_expectations(state)
    residuals = {
        "n_a_minus_half_n": abs(ex.n_a - state.n / 2.0),
        "a_dag_b": abs(ex.a_dag_b),
    }
    return ConditionReport(all(r <= tol for r in residuals.values()), residuals)


def check_optimality(state: FockState, tol: float = CONDITION_TOL) -> ConditionReport:
    if state.n < 2:
        raise OrderError("optimality conditions involve two-photon correlators; need n >= 2")
    ex = mode_expectations(state)
    half = state.n / 2.0
    residuals = {
        "n_a_minus_half_n": abs(ex.n_a - half),
        "n_b_minus_half_n": abs(ex.n_b - half),
        "n_a_sq_minus_n_b_sq": abs(ex.n_a_sq - ex.n_b_sq),
        "a_dag_b": abs(ex.a_dag_b),
        "a_dag_a_dag_a_b": abs(ex.a_dag_b_n_a),
        "a_dag_a_dag_b_b": abs(ex.a_dag2_b2),
        "a_dag_b_dag_b_b": abs(ex.a_dag_b_nb_minus_1),
    }
    return ConditionReport(all(r <= tol for r in residuals.values()), residuals)


def dicke_expand(state: FockState) -> np.ndarray:
    """Full ``2**N`` spin vector; spin 0 is the most significant bit, up = 0."""
    n = state.n
    if n > DICKE_MAX_N:
        raise ScaleError(f"Dicke expansion limited to n <= {DICKE_MAX_N}, got {n}")
    idx = np.arange(2**n)
    downs = np.zeros(idx.size, dtype=int)
    for bit in range(n):
        downs += (idx >> bit) & 1
    ups = n - downs
    weights = np.array([1.0 / math.sqrt(math.comb(n, k)) for k in range(n + 1)])
    return state.amps[ups] * weights[ups]


def partial_trace_keep(vec: np.ndarray, n: int, keep: int) -> np.ndarray:
    """Reduced density of the first ``keep`` spins of an ``n``-spin pure state."""
    psi = np.asarray(vec).reshape(2**keep, 2 ** (n - keep))
    return psi @ psi.conj().T
