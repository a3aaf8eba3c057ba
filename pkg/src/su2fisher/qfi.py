"""Quantum Fisher information for the three-basis protocol.

The probe is used three times: as given (z block), rotated by ``h`` (x block)
and by ``h_c`` (y block).  All matrices are in the locally-independent frame
with generators ``sigma_alpha / sqrt(2)`` and are indexed ``(x, y, z)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import least_squares

from . import fock as fk
from ._kernels import optimality_residuals_batch
from .errors import ScaleError, UnknownProtocolError
from .su2 import H_DA, H_RL, IDENTITY2, PAULIS, EulerAngles, euler_to_matrix, spin_representation

ORACLE_MAX_N = 8
ORACLE_STEP = 1e-5
RICHARDSON_TOL = 1e-4
BLOCKS = (("z", IDENTITY2), ("x", H_DA), ("y", H_RL))


@dataclass(frozen=True)
class FisherMatrix:
    """A 3x3 Fisher matrix with its frame ("euler" or "local") and kind."""

    m: np.ndarray
    frame: str = "local"
    kind: str = "quantum"
    flags: tuple = ()

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def eig(self):
        return np.linalg.eigh((self.m + self.m.T) / 2.0)

    @property
    def condition_number(self) -> float:
        w = self.eig()[0]
        if w[0] <= 0:
            return math.inf
        return float(w[-1] / w[0])

    def inverse(self) -> np.ndarray:
        w, v = self.eig()
        return (v / w) @ v.T

    def tr_inv(self) -> float:
        return float(np.sum(1.0 / self.eig()[0]))

    def is_valid(self, sym_tol=1e-10, psd_tol=-1e-9) -> bool:
        return bool(np.max(np.abs(self.m - self.m.T)) <= sym_tol and self.eig()[0][0] >= psd_tol)


@dataclass(frozen=True)
class ProbeTriple:
    """One Fock-basis probe read in the z, x and y bases."""

    source: fk.FockState

    @property
    def n(self) -> int:
        return self.source.n

    def rho1_blocks(self) -> list[np.ndarray]:
        r = fk.rho1(self.source).matrix
        return [b @ r @ b.conj().T for _, b in BLOCKS]

    def rho2_blocks(self) -> list[np.ndarray]:
        r = fk.rho2(self.source).matrix
        return [np.kron(b, b) @ r @ np.kron(b, b).conj().T for _, b in BLOCKS]

    def rho1_total(self) -> fk.ReducedDensity:
        return fk.ReducedDensity(1, sum(self.rho1_blocks()), trace_norm=3.0)

    def rho2_total(self) -> fk.ReducedDensity:
        return fk.ReducedDensity(2, sum(self.rho2_blocks()), trace_norm=3.0)


def _as_probe(probe) -> ProbeTriple:
    return probe if isinstance(probe, ProbeTriple) else ProbeTriple(probe)


def _block_qfi(n: int, r1: np.ndarray, r2: np.ndarray | None) -> np.ndarray:
    out = np.empty((3, 3))
    for a, sa in enumerate(PAULIS):
        for b, sb in enumerate(PAULIS):
            val = 2.0 * n * np.trace(r1 @ sa @ sb).real
            if r2 is not None:
                val += 2.0 * n * (n - 1) * np.trace(r2 @ np.kron(sa, sb)).real
            val -= 2.0 * n * n * np.trace(r1 @ sa).real * np.trace(r1 @ sb).real
            out[a, b] = val
    return out


def qfi_single_basis(probe, block: str) -> FisherMatrix:
    """QFI of one block (``"z"``, ``"x"`` or ``"y"``)."""
    probe = _as_probe(probe)
    k = [name for name, _ in BLOCKS].index(block)
    r2 = probe.rho2_blocks()[k] if probe.n >= 2 else None
    return FisherMatrix(_block_qfi(probe.n, probe.rho1_blocks()[k], r2))


def qfi_three_basis(probe) -> FisherMatrix:
    """Total QFI from the aggregated one- and two-particle reduced states.

    ``I = 2N Re tr(rho1_tot s_a s_b) + 2N(N-1) tr(rho2_tot s_a (x) s_b)
    - 2N^2 sum_k tr(rho1_k s_a) tr(rho1_k s_b)``.
    """
    probe = _as_probe(probe)
    n = probe.n
    r1s = probe.rho1_blocks()
    r1_tot = sum(r1s)
    r2_tot = sum(probe.rho2_blocks()) if n >= 2 else None
    out = np.empty((3, 3))
    for a, sa in enumerate(PAULIS):
        for b, sb in enumerate(PAULIS):
            val = 2.0 * n * np.trace(r1_tot @ sa @ sb).real
            if r2_tot is not None:
                val += 2.0 * n * (n - 1) * np.trace(r2_tot @ np.kron(sa, sb)).real
            val -= 2.0 * n * n * sum(np.trace(r @ sa).real * np.trace(r @ sb).real for r in r1s)
            out[a, b] = val
    return FisherMatrix((out + out.T) / 2.0)


# --- brute-force oracle -----------------------------------------------------


def _local_unitary(theta: np.ndarray) -> np.ndarray:
    gen = sum(t * s for t, s in zip(theta, PAULIS)) / math.sqrt(2.0)
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * w)) @ v.conj().T


def _oracle_block(amps: np.ndarray, n: int, u0: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    start = spin_representation(b, n) @ amps
    d0 = spin_representation(u0, n)
    psi = d0 @ start
    derivs = []
    for a in range(3):
        th = np.zeros(3)
        th[a] = step
        plus = spin_representation(u0 @ _local_unitary(th), n) @ start
        minus = spin_representation(u0 @ _local_unitary(-th), n) @ start
        derivs.append((plus - minus) / (2.0 * step))
    out = np.empty((3, 3))
    for a in range(3):
        for c in range(3):
            val = np.vdot(derivs[a], derivs[c]) - np.vdot(derivs[a], psi) * np.vdot(psi, derivs[c])
            out[a, c] = 4.0 * val.real
    return out


def qfi_oracle(probe, e: EulerAngles | None = None, step: float = ORACLE_STEP) -> FisherMatrix:
    """QFI by finite differences of the evolved state in the (N+1)-dim spin-j space.

    Each block state is ``D(U0 exp(-i theta.sigma/sqrt2)) D(B_k)|psi>`` with
    ``D`` built by polynomial expansion, so this shares no code with
    :func:`qfi_three_basis` beyond the basis matrices.
    """
    probe = _as_probe(probe)
    n = probe.n
    if n > ORACLE_MAX_N:
        raise ScaleError(f"oracle limited to n <= {ORACLE_MAX_N}, got {n}")
    u0 = IDENTITY2 if e is None else euler_to_matrix(e)
    total = sum(_oracle_block(probe.source.amps, n, u0, b, step) for _, b in BLOCKS)
    return FisherMatrix((total + total.T) / 2.0)


def richardson_drift(a: np.ndarray, b: np.ndarray) -> float:
    """Relative drift ``max|a - b| / max|a|`` between two step sizes."""
    scale = max(float(np.max(np.abs(a))), 1e-300)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / scale)


def qfi_oracle_checked(probe, e: EulerAngles | None = None) -> tuple[FisherMatrix, float]:
    """Oracle at step 1e-5 plus its drift against step 2e-5."""
    fine = qfi_oracle(probe, e, ORACLE_STEP)
    coarse = qfi_oracle(probe, e, 2 * ORACLE_STEP)
    return fine, richardson_drift(fine.m, coarse.m)


# --- bounds -------------------------------------------------------------------

PROTOCOLS = ("three-basis", "repeated-single-probe", "single-probe-3N-entangled", "fock-baseline")


@dataclass(frozen=True)
class BoundReport:
    protocol: str
    n: int
    value: Fraction

    def __float__(self) -> float:
        return float(self.value)


def optimal_bound(protocol: str, n: int) -> BoundReport:
    if n < 1:
        raise ValueError("n must be >= 1")
    if protocol == "three-basis":
        v = Fraction(3, 2 * n * (n + 2))
    elif protocol == "repeated-single-probe":
        v = Fraction(9, 2 * n * (n + 2))
    elif protocol == "single-probe-3N-entangled":
        v = Fraction(3, 2 * n * (3 * n + 2))
    elif protocol == "fock-baseline":
        v = Fraction(3, 4 * n)
    else:
        raise UnknownProtocolError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    return BoundReport(protocol, n, v)


# --- 2-designs ----------------------------------------------------------------

PAULI_STATES = [
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([1, 1], dtype=complex) / math.sqrt(2),
    np.array([1, -1], dtype=complex) / math.sqrt(2),
    np.array([1, 1j], dtype=complex) / math.sqrt(2),
    np.array([1, -1j], dtype=complex) / math.sqrt(2),
]

TETRAHEDRAL_STATES = [
    np.array([1, 0], dtype=complex),
    np.array([1 / math.sqrt(3), -(1 / math.sqrt(2) + 1j / math.sqrt(6))]),
    np.array([1 / math.sqrt(3), 1 / math.sqrt(2) - 1j / math.sqrt(6)]),
    np.array([1 / math.sqrt(3), 1j * math.sqrt(2 / 3)]),
]

TWO_DESIGN_TARGET = np.eye(4) / 4 + sum(np.kron(s, s) for s in PAULIS) / 12


@dataclass(frozen=True)
class DesignReport:
    passed: bool
    residual: float

    def __bool__(self):
        return self.passed


def check_two_design(states, tol: float = 1e-10) -> DesignReport:
    avg = np.zeros((4, 4), dtype=complex)
    for s in states:
        s = np.asarray(s, dtype=complex)
        p = np.outer(s, s.conj())
        avg += np.kron(p, p)
    avg /= len(states)
    res = float(np.max(np.abs(avg - TWO_DESIGN_TARGET)))
    return DesignReport(res <= tol, res)


# --- uniqueness of optimal N = 2, 3 states --------------------------------------


def rho2_n3_closed_form(c: np.ndarray) -> np.ndarray:
    """Two-spin reduced state of a three-photon state, written out term by term."""
    c0, c1, c2, c3 = c
    cc = np.conj
    r3, s3 = math.sqrt(3.0), 3.0
    top = c3 * cc(c2) / r3 + cc(c1) * c2 / s3
    corner = c3 * cc(c1) / r3 + c2 * cc(c0) / r3
    side = c1 * cc(c0) / r3 + cc(c1) * c2 / s3
    mid = (abs(c1) ** 2 + abs(c2) ** 2) / s3
    m = np.array(
        [
            [abs(c3) ** 2 + abs(c2) ** 2 / s3, top, top, corner],
            [cc(top), mid, mid, side],
            [cc(top), mid, mid, side],
            [cc(corner), cc(side), cc(side), abs(c0) ** 2 + abs(c1) ** 2 / s3],
        ]
    )
    return m


def _is_expected_optimum(c: np.ndarray, n: int, tol: float) -> bool:
    c = c / np.linalg.norm(c)
    if n == 2:
        return abs(abs(c[1]) - 1.0) <= tol
    return bool(abs(c[1]) <= tol and abs(c[2]) <= tol and abs(abs(c[0]) - abs(c[3])) <= tol)


def _residual_vector(x: np.ndarray, n: int) -> np.ndarray:
    c = x[: n + 1] + 1j * x[n + 1 :]
    nrm = np.linalg.norm(c)
    c = c / nrm
    m = np.arange(n + 1, dtype=float)
    pop = np.abs(c) ** 2
    hop = np.sqrt((m[:-1] + 1.0) * (n - m[:-1]))
    shift1 = np.conj(c[1:]) * c[:-1] * hop
    mm = m[:-2]
    hop2 = np.sqrt((mm + 1.0) * (mm + 2.0) * (n - mm) * (n - mm - 1.0))
    s2 = np.sum(np.conj(c[2:]) * c[:-2] * hop2)
    cplx = [shift1.sum(), (shift1 * m[:-1]).sum(), s2, (shift1 * (n - m[:-1] - 1.0)).sum()]
    real = [pop @ m - n / 2.0, pop @ m**2 - pop @ (n - m) ** 2, nrm - 1.0]
    return np.array(real + [z.real for z in cplx] + [z.imag for z in cplx])


@dataclass
class UniquenessReport:
    n: int
    trials: int
    raw_hits: int
    refined: int
    refined_converged: int
    unexpected: list = field(default_factory=list)
    closed_form_max_error: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.unexpected and self.closed_form_max_error < 1e-10 and self.refined_converged > 0


def uniqueness_search(
    n: int, trials: int, rng=None, refine: int = 200, tol: float = fk.CONDITION_TOL, batch: int = 20000
) -> UniquenessReport:
    """Search for states satisfying the optimality conditions at ``n`` in {2, 3}.

    Raw samples are complex-Gaussian amplitude vectors; since the optimal set
    has measure zero, the first ``refine`` samples are also used as starting
    points for a least-squares descent on the condition residuals, and every
    converged point must be of the expected form.
    """
    if n not in (2, 3):
        raise ValueError("uniqueness search is defined for n = 2 or 3")
    rng = np.random.default_rng(rng)
    report = UniquenessReport(n, trials, 0, 0, 0)
    starts = []
    done = 0
    while done < trials:
        k = min(batch, trials - done)
        z = rng.standard_normal((k, n + 1)) + 1j * rng.standard_normal((k, n + 1))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        res = optimality_residuals_batch(z)
        hits = np.nonzero(np.all(res <= tol, axis=1))[0]
        report.raw_hits += len(hits)
        for i in hits:
            if not _is_expected_optimum(z[i], n, 1e-6):
                report.unexpected.append(z[i].tolist())
        if len(starts) < refine:
            starts.extend(z[: refine - len(starts)])
        done += k
    for z in starts:
        x0 = np.concatenate([z.real, z.imag])
        sol = least_squares(_residual_vector, x0, args=(n,), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        c = sol.x[: n + 1] + 1j * sol.x[n + 1 :]
        c = c / np.linalg.norm(c)
        report.refined += 1
        state = fk.FockState.from_amplitudes(c)
        if not fk.check_optimality(state, tol):
            continue
        report.refined_converged += 1
        if not _is_expected_optimum(c, n, 1e-6):
            report.unexpected.append(c.tolist())
        if n == 3:
            ptrace = fk.partial_trace_keep(fk.dicke_expand(state), 3, 2)
            err = float(np.max(np.abs(rho2_n3_closed_form(state.amps) - ptrace)))
            report.closed_form_max_error = max(report.closed_form_max_error, err)
    return report


# --- report records -----------------------------------------------------------


def classification_record(state: fk.FockState, spec: str) -> dict:
    sat = fk.check_saturation(state)
    opt = fk.check_optimality(state) if state.n >= 2 else None
    fisher = qfi_three_basis(state)
    tr_inv = fisher.tr_inv() if fisher.eig()[0][0] > 0 else None
    residuals = dict(sat.residuals)
    if opt is not None:
        residuals.update(opt.residuals)
    return {
        "protocol": "three-basis",
        "n": state.n,
        "state": spec,
        "tr_inv_qfi": tr_inv,
        "saturates": bool(sat),
        "optimal": None if opt is None else bool(opt),
        "residuals": residuals,
        "bounds": {p: float(optimal_bound(p, state.n)) for p in PROTOCOLS},
    }


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2)
