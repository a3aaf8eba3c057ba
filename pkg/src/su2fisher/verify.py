"""Self-check suites run by ``su2fisher verify``."""

from __future__ import annotations

import math

import numpy as np

from . import cfi, fock, qfi
from .su2 import EulerAngles, haar_random_batch, matrix_to_euler

SCOPES = ("oracle", "two-design", "uniqueness", "transform")


def oracle_states(max_n: int = 6) -> list[tuple[str, fock.FockState]]:
    out = []
    for n in range(1, max_n + 1):
        out.append((f"noon:{n}", fock.noon(n)))
        out.append((f"fock:{n // 2},{n}", fock.fock(n // 2, n)))
        out.append((f"yurke:{n}", fock.yurke(n)))
        if n % 2 == 0:
            out.append((f"hb:{n}", fock.holland_burnett(n)))
    return out


def suite_oracle(seed: int | None = 0, max_n: int = 6) -> list[str]:
    rng = np.random.default_rng(seed)
    failures = []
    states = oracle_states(max_n)
    for n in range(1, max_n + 1):
        z = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        states.append((f"random:{n}", fock.FockState.from_amplitudes(z)))
    for label, st in states:
        e = matrix_to_euler(haar_random_batch(rng, 1)[0])
        ref = qfi.qfi_three_basis(st).m
        got, drift = qfi.qfi_oracle_checked(st, e)
        err = float(np.max(np.abs(ref - got.m)))
        if err >= 1e-6:
            failures.append(f"{label}: oracle mismatch {err:.3e}")
        if drift >= qfi.RICHARDSON_TOL:
            failures.append(f"{label}: richardson drift {drift:.3e}")
    return failures


def suite_two_design() -> list[str]:
    failures = []
    for name, states, expect in (
        ("pauli", qfi.PAULI_STATES, True),
        ("tetrahedral", qfi.TETRAHEDRAL_STATES, True),
        ("z-basis", qfi.PAULI_STATES[:2], False),
    ):
        rep = qfi.check_two_design(states)
        if rep.passed != expect:
            failures.append(f"{name}: expected {expect}, residual {rep.residual:.3e}")
    return failures


def suite_uniqueness(seed: int | None = 0, trials: int = 100_000) -> list[str]:
    failures = []
    for n in (2, 3):
        rep = qfi.uniqueness_search(n, trials, np.random.default_rng(None if seed is None else seed + n))
        if not rep.passed:
            failures.append(
                f"n={n}: unexpected={len(rep.unexpected)} converged={rep.refined_converged} "
                f"closed_form_err={rep.closed_form_max_error:.3e}"
            )
    if fock.check_optimality(fock.noon(2)):
        failures.append("noon:2 passes the optimality conditions")
    return failures


def suite_transform(seed: int | None = 0, points: int = 20) -> list[str]:
    rng = np.random.default_rng(seed)
    failures = []
    for k in range(points):
        n = int(rng.integers(1, 5))
        z = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        st = fock.FockState.from_amplitudes(z)
        e = EulerAngles(rng.uniform(-math.pi, math.pi), rng.uniform(0.2, math.pi - 0.2), rng.uniform(-math.pi, math.pi))
        tf = cfi.total_fisher(st, e, cross_check=True)
        scale = max(1.0, float(np.max(np.abs(tf.total.m))))
        if not tf.total.flags and tf.direct_max_diff > 1e-6 * scale:
            failures.append(f"point {k}: transform vs direct {tf.direct_max_diff:.3e}")
        m = int(rng.integers(0, n + 1))
        fast = cfi.product_state_precision(m, n, e)
        slow = cfi.tr_inv_precision(fock.fock(m, n), e)
        if fast.finite and slow.finite and abs(fast.tr_inv - slow.tr_inv) > 1e-6 * max(1.0, fast.tr_inv):
            failures.append(f"point {k}: product path {fast.tr_inv} vs general {slow.tr_inv}")
    return failures


def run(scope: str = "all", seed: int | None = 0, trials: int = 100_000) -> dict:
    scopes = SCOPES if scope == "all" else (scope,)
    report = {}
    for s in scopes:
        if s == "oracle":
            fails = suite_oracle(seed)
        elif s == "two-design":
            fails = suite_two_design()
        elif s == "uniqueness":
            fails = suite_uniqueness(seed, trials)
        elif s == "transform":
            fails = suite_transform(seed)
        else:
            raise ValueError(f"unknown scope {s!r}; expected one of {SCOPES} or 'all'")
        report[s] = {"passed": not fails, "failures": fails}
    return report
