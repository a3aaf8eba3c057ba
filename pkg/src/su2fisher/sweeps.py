"""Path scans through u_min and Haar-random precision searches."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import cfi
from ._kernels import wtilde_trace_batch
from .fock import FockState
from .su2 import (
    SINGULAR_SIN_TOL,
    U_MIN,
    EulerAngles,
    haar_random_batch,
    matrix_to_euler,
    matrix_to_euler_batch,
    mode_quaternion_to_spin,
    spin_to_mode_quaternion,
)

PATH_DIRECTIONS = {
    1: (1.0, 0.0, 0.0, 0.0),
    2: (1.0, 0.0, 1.0, 0.0),
    3: (1.0, 0.7, 1.0, 0.0),
    4: (0.7, 1.0, 0.7, 0.0),
    5: (1.0, 1.0, 1.0, 0.0),
}
SPECIAL_LAMBDAS = (0.5, 0.5 / 0.7)
NEIGHBOUR_OFFSET = 1e-3
ZERO_COMPONENT_TOL = 1e-12
DIVERGENCE = "divergence"


def path_point(index: int, lam: float) -> np.ndarray:
    """Normalized ``{a,b,c,d}`` of ``P_i(lambda) = (u_min - lambda * dir_i) / norm``."""
    if index not in PATH_DIRECTIONS:
        raise ValueError(f"path index must be 1..5, got {index}")
    p = U_MIN.as_array() - lam * np.array(PATH_DIRECTIONS[index])
    return p / np.linalg.norm(p)


def path_angles(index: int, lam: float) -> EulerAngles:
    return matrix_to_euler(mode_quaternion_to_spin(path_point(index, lam)))


def lambda_grid(step: float = 0.005) -> np.ndarray:
    if not 0 < step <= 1:
        raise ValueError("grid step must be in (0, 1]")
    count = int(round(1.0 / step))
    base = [round(k * step, 12) for k in range(count + 1)]
    extra = []
    for s in SPECIAL_LAMBDAS:
        extra += [s, s - NEIGHBOUR_OFFSET, s + NEIGHBOUR_OFFSET]
    pts = sorted({x for x in base + extra if 0.0 <= x <= 1.0})
    return np.array(pts)


@dataclass(frozen=True)
class SweepRecord:
    lambda_or_angle: float
    tr_inv: float | None
    flag: str | None
    cond_number: float
    trF_HV: float
    trF_DA: float
    trF_RL: float


def _evaluate(state: FockState, e: EulerAngles) -> cfi.PrecisionResult:
    if state.is_product():
        return cfi.product_state_precision(state.occupied(), state.n, e)
    return cfi.tr_inv_precision(state, e)


def path_scan(state: FockState, index: int, grid: np.ndarray | None = None) -> list[SweepRecord]:
    """Precision along one path, with divergence detection.

    A point is marked ``divergence`` when some quaternion component vanishes
    there, the evaluation is non-finite (ill-conditioned or divergent, not a
    singular Euler frame) and its grid neighbours are finite.
    """
    grid = lambda_grid() if grid is None else np.asarray(grid, dtype=float)
    results = [_evaluate(state, path_angles(index, lam)) for lam in grid]
    records = []
    for i, (lam, res) in enumerate(zip(grid, results)):
        flag = res.flag
        if flag in (cfi.ILL_CONDITIONED_FLAG, cfi.DIVERGENT):
            on_zero = np.min(np.abs(path_point(index, lam))) < ZERO_COMPONENT_TOL
            left = results[i - 1].finite if i > 0 else True
            right = results[i + 1].finite if i + 1 < len(results) else True
            if on_zero and left and right:
                flag = DIVERGENCE
        records.append(SweepRecord(float(lam), res.tr_inv, flag, res.condition_number, *res.breakdown))
    return records


def path_is_ill_conditioned(records: list[SweepRecord]) -> bool:
    bad = sum(r.flag == cfi.ILL_CONDITIONED_FLAG for r in records)
    return bad > len(records) / 2


def divergence_lambdas(records: list[SweepRecord]) -> list[float]:
    return [r.lambda_or_angle for r in records if r.flag == DIVERGENCE]


@dataclass(frozen=True)
class SearchRecord:
    state: str
    seed: int | None
    trials: int
    min_tr_inv: float | None
    argmin_euler: list | None
    argmin_abcd: list | None
    excluded_singular: int
    excluded_ill_conditioned: int


def haar_search(state: FockState, trials: int, seed: int | None, label: str = "") -> SearchRecord:
    """Minimum of ``tr(F^-1)`` over ``trials`` Haar-random unitaries.

    Samples on a gimbal point are excluded and counted; so are samples whose
    Fisher matrix is ill-conditioned or divergent.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mats = haar_random_batch(np.random.default_rng(seed), trials)
    best, arg = math.inf, None
    n_sing = n_ill = 0
    for m in mats:
        e = matrix_to_euler(m)
        res = _evaluate(state, e)
        if res.flag == cfi.SINGULAR_FRAME:
            n_sing += 1
        elif not res.finite:
            n_ill += 1
        elif res.tr_inv < best:
            best, arg = res.tr_inv, (e, m)
    if arg is None:
        return SearchRecord(label, seed, trials, None, None, None, n_sing, n_ill)
    e, m = arg
    q = spin_to_mode_quaternion(m)
    return SearchRecord(label, seed, trials, best, e.as_array().tolist(), q.as_array().tolist(), n_sing, n_ill)


def wtilde_floor_search(points: int, seed: int | None, batch: int = 200_000) -> tuple[float, np.ndarray, int]:
    """Minimum of ``tr(V W~^-1)`` over Haar-random points.

    Returns the minimum, its ``{a,b,c,d}`` (mode convention) and the number of
    points excluded as singular or ill-conditioned.
    """
    rng = np.random.default_rng(seed)
    best, best_m, excluded = math.inf, None, 0
    done = 0
    while done < points:
        k = min(batch, points - done)
        mats = haar_random_batch(rng, k)
        psi = matrix_to_euler_batch(mats)
        vals = wtilde_trace_batch(psi)
        bad = ~np.isfinite(vals) | (np.abs(np.sin(psi[:, 1])) < SINGULAR_SIN_TOL)
        excluded += int(bad.sum())
        vals = np.where(bad, np.inf, vals)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            best_m = mats[i]
        done += k
    q = spin_to_mode_quaternion(best_m).as_array() if best_m is not None else None
    return best, q, excluded


def record_dict(rec) -> dict:
    return asdict(rec)
