"""Photon-counting outcome statistics and classical Fisher information.

Three measurement settings are used: HV counts photons in the original modes,
DA and RL count after the fixed basis changes ``h`` and ``h_c``.  All Fisher
matrices here are taken with respect to the Euler angles; the
locally-independent precision is ``tr(F^-1) = tr(V F_euler^-1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fock import FockState
from .qfi import FisherMatrix, richardson_drift
from .su2 import (
    BASIS_MATRICES,
    SINGULAR_SIN_TOL,
    EulerAngles,
    basis_conjugate,
    conjugated_psi2_gradient,
    euler_to_matrix,
    jacobians_at,
    spin_representation,
    v_closed_form,
    wigner_d_matrix,
)

FD_STEP = 1e-5
P_FLOOR = 1e-12
DIVERGENT_GRAD = 1e-6
ILL_CONDITIONED = 1e12
# conjugated frames closer than this to a gimbal point use the direct route
CONJUGATE_GIMBAL_TOL = 1e-4
BASES = ("HV", "DA", "RL")

SINGULAR_FRAME = "singular-frame"
ILL_CONDITIONED_FLAG = "ill-conditioned"
DIVERGENT = "divergent"


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities for ``m_d = -j, ..., j`` (index ``k`` is ``m_d = k - j``)."""

    j: float
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if np.min(p) < -1e-12:
            raise ValueError("negative probability beyond rounding")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def prob(self, md: float) -> float:
        return float(self.probs[int(round(md + self.j))])


@dataclass(frozen=True)
class PrecisionResult:
    """``tr_inv`` is None whenever ``flag`` is set."""

    tr_inv: float | None
    flag: str | None
    condition_number: float
    frame: str = "local"
    breakdown: tuple = (math.nan, math.nan, math.nan)

    @property
    def finite(self) -> bool:
        return self.flag is None


def hv_amplitudes(amps: np.ndarray, psi: np.ndarray) -> np.ndarray:
    n = len(amps) - 1
    m = np.arange(n + 1) - n / 2.0
    d = wigner_d_matrix(n / 2.0, psi[1])
    return np.exp(1j * psi[0] * m) * (d @ (np.exp(1j * psi[2] * m) * amps))


def _amplitudes(amps: np.ndarray, psi: np.ndarray, basis: str) -> np.ndarray:
    if basis == "HV":
        return hv_amplitudes(amps, psi)
    b = BASIS_MATRICES[basis]
    return spin_representation(b.conj().T @ euler_to_matrix(psi) @ b, len(amps) - 1) @ amps


def outcome_distribution(state: FockState, e: EulerAngles, basis: str = "HV") -> OutcomeDistribution:
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    angles = basis_conjugate(e, basis) if basis != "HV" else e
    amp = hv_amplitudes(state.amps, angles.as_array())
    return OutcomeDistribution(state.n / 2.0, np.abs(amp) ** 2)


def evolved_distribution(state: FockState, e: EulerAngles, basis: str = "HV") -> np.ndarray:
    """Same distribution through the polynomial N-photon representation of the 2x2 matrix."""
    return np.abs(_amplitudes(state.amps, e.as_array(), basis)) ** 2


def _fisher(amps: np.ndarray, psi: np.ndarray, basis: str, step: float) -> tuple[np.ndarray, set]:
    flags = set()
    amp0 = _amplitudes(amps, psi, basis)
    grads = np.empty((3, len(amps)), dtype=complex)
    for k in range(3):
        dp = np.zeros(3)
        dp[k] = step
        grads[k] = (_amplitudes(amps, psi + dp, basis) - _amplitudes(amps, psi - dp, basis)) / (2 * step)
    p = np.abs(amp0) ** 2
    # dP = 2 Re(conj(A) dA); difference amplitudes instead of probabilities so
    # the zero-probability limit below uses the same stencil
    dp_all = 2.0 * (np.conj(amp0)[None, :] * grads).real
    keep = p > P_FLOOR
    f = (dp_all[:, keep] / p[keep]) @ dp_all[:, keep].T
    for idx in np.nonzero(~keep)[0]:
        g = grads[:, idx]
        norm2 = float(np.sum(np.abs(g) ** 2))
        if norm2 <= DIVERGENT_GRAD**2:
            continue
        # (dP)^2/P has a direction-independent limit only if all dA_k share a phase
        if norm2 - abs(np.sum(g * g)) <= 1e-6 * norm2:
            f = f + 4.0 * np.real(np.outer(np.conj(g), g))
        else:
            flags.add(DIVERGENT)
    return (f + f.T) / 2.0, flags


def fisher_euler(state: FockState, e: EulerAngles, basis: str = "HV", step: float = FD_STEP) -> FisherMatrix:
    """Classical Fisher matrix of one basis, differentiated directly in ``psi``."""
    f, flags = _fisher(state.amps, e.as_array(), basis, step)
    if flags:
        warnings.warn(f"zero-probability outcome with non-vanishing gradient at {e}", RuntimeWarning, stacklevel=2)
    return FisherMatrix(f, frame="euler", kind="classical", flags=tuple(sorted(flags)))


@dataclass(frozen=True)
class TotalFisher:
    total: FisherMatrix
    per_basis: tuple
    direct_max_diff: float | None = None


def total_fisher(state: FockState, e: EulerAngles, cross_check: bool = False, step: float = FD_STEP) -> TotalFisher:
    """``F = F_HV(psi) + W'^T F_HV(psi') W' + W''^T F_HV(psi'') W''``.

    Where a conjugated frame is within ``CONJUGATE_GIMBAL_TOL`` of its own
    gimbal point the ``W`` matrices are unbounded, so that basis is
    differentiated directly instead.
    """
    psi = e.as_array()
    jac = jacobians_at(e)
    flags = set()
    f_hv, fl = _fisher(state.amps, psi, "HV", step)
    flags |= fl
    parts = [f_hv]
    for basis, w in (("DA", jac.Wp), ("RL", jac.Wpp)):
        conj = basis_conjugate(e, basis)
        if abs(math.sin(conj.psi2)) < CONJUGATE_GIMBAL_TOL:
            f, fl = _fisher(state.amps, psi, basis, step)
        else:
            f_c, fl = _fisher(state.amps, conj.as_array(), "HV", step)
            f = w.T @ f_c @ w
        flags |= fl
        parts.append((f + f.T) / 2.0)
    total = sum(parts)
    diff = None
    if cross_check:
        direct = f_hv.copy()
        for basis in ("DA", "RL"):
            f, fl = _fisher(state.amps, psi, basis, step)
            direct = direct + f
        diff = float(np.max(np.abs(direct - total)))
    fm = FisherMatrix(total, frame="euler", kind="classical", flags=tuple(sorted(flags)))
    per = tuple(FisherMatrix(p, frame="euler", kind="classical") for p in parts)
    return TotalFisher(fm, per, diff)


def _trace_v_inv(v: np.ndarray, f: np.ndarray) -> tuple[float | None, float]:
    w, vecs = np.linalg.eigh((f + f.T) / 2.0)
    if w[0] <= 0 or not np.all(np.isfinite(w)):
        return None, math.inf
    cond = float(w[-1] / w[0])
    if cond > ILL_CONDITIONED:
        return None, cond
    inv = (vecs / w) @ vecs.T
    return float(np.trace(v @ inv)), cond


def tr_inv_precision(state: FockState, e: EulerAngles) -> PrecisionResult:
    if e.singular:
        return PrecisionResult(None, SINGULAR_FRAME, math.inf)
    tf = total_fisher(state, e)
    breakdown = tuple(float(np.trace(p.m)) for p in tf.per_basis)
    if DIVERGENT in tf.total.flags:
        return PrecisionResult(None, DIVERGENT, math.inf, breakdown=breakdown)
    val, cond = _trace_v_inv(v_closed_form(e.psi2), tf.total.m)
    if val is None:
        return PrecisionResult(None, ILL_CONDITIONED_FLAG, cond, breakdown=breakdown)
    return PrecisionResult(val, None, cond, breakdown=breakdown)


def f_single(m: int, n: int) -> int:
    return n + 2 * m * (n - m)


def wtilde(e: EulerAngles) -> np.ndarray:
    """``e2 e2^T + w' w'^T + w'' w''^T`` from the closed-form second rows."""
    w1 = conjugated_psi2_gradient(e, "DA")
    w2 = conjugated_psi2_gradient(e, "RL")
    out = np.outer(w1, w1) + np.outer(w2, w2)
    out[1, 1] += 1.0
    return out


def product_state_precision(m: int, n: int, e: EulerAngles) -> PrecisionResult:
    """``tr(V W~^-1) / F_single`` for the Fock state ``|M, N-M>``."""
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= M <= N, got M={m}, N={n}")
    if e.singular:
        return PrecisionResult(None, SINGULAR_FRAME, math.inf)
    for basis in ("DA", "RL"):
        if abs(math.sin(basis_conjugate(e, basis).psi2)) < SINGULAR_SIN_TOL:
            # W~ has a vanishing direction: the precision genuinely diverges
            return PrecisionResult(None, ILL_CONDITIONED_FLAG, math.inf)
    fs = f_single(m, n)
    w1 = conjugated_psi2_gradient(e, "DA")
    w2 = conjugated_psi2_gradient(e, "RL")
    breakdown = (float(fs), fs * float(w1 @ w1), fs * float(w2 @ w2))
    val, cond = _trace_v_inv(v_closed_form(e.psi2), fs * wtilde(e))
    if val is None:
        return PrecisionResult(None, ILL_CONDITIONED_FLAG, cond, breakdown=breakdown)
    return PrecisionResult(val, None, cond, breakdown=breakdown)


def fisher_drift(state: FockState, e: EulerAngles, basis: str = "HV") -> float:
    """Relative drift of :func:`fisher_euler` between steps 1e-5 and 2e-5."""
    fine, _ = _fisher(state.amps, e.as_array(), basis, FD_STEP)
    coarse, _ = _fisher(state.amps, e.as_array(), basis, 2 * FD_STEP)
    return richardson_drift(fine, coarse)
