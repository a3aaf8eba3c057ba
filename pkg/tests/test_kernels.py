import math
import os
import subprocess
import sys

import numpy as np
import pytest

from su2fisher import _kernels as kern
from su2fisher import cfi
from su2fisher import fock as fk
from su2fisher.su2 import EulerAngles


@pytest.fixture(scope="module")
def angle_batch():
    rng = np.random.default_rng(0)
    k = 20_000
    return np.column_stack([rng.uniform(-6, 6, k), rng.uniform(0, math.pi, k), rng.uniform(-6, 6, k)])


@pytest.mark.skipif(not kern.HAVE_NUMBA, reason="numba unavailable")
class TestNumbaMatchesNumpy:
    def test_wtilde_trace(self, angle_batch):
        a = kern.wtilde_trace_batch(angle_batch, use_numba=True)
        b = kern.wtilde_trace_batch(angle_batch, use_numba=False)
        np.testing.assert_array_equal(np.isnan(a), np.isnan(b))
        ok = ~np.isnan(a)
        # rounding is amplified by the conditioning of W~, which tracks the value itself
        rel = np.abs(a[ok] - b[ok]) / np.abs(b[ok])
        assert np.all(rel <= 1e-10 * np.maximum(1.0, np.abs(b[ok])))

    def test_residuals(self):
        rng = np.random.default_rng(1)
        for n in (2, 3, 6):
            z = rng.standard_normal((200, n + 1)) + 1j * rng.standard_normal((200, n + 1))
            z /= np.linalg.norm(z, axis=1, keepdims=True)
            np.testing.assert_allclose(
                kern.optimality_residuals_batch(z, True), kern.optimality_residuals_batch(z, False), atol=1e-13
            )


class TestAgainstScalarCode:
    def test_wtilde_matches_product_path(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            e = EulerAngles(rng.uniform(-3, 3), rng.uniform(0.1, 3.0), rng.uniform(-3, 3))
            ref = cfi.product_state_precision(1, 2, e)
            got = kern.wtilde_trace_batch(e.as_array()[None])[0]
            if ref.finite and ref.condition_number < 1e8:
                assert got / cfi.f_single(1, 2) == pytest.approx(ref.tr_inv, rel=1e-8)

    def test_u_min_floor(self):
        u = np.array([[math.pi, math.pi / 2, -math.pi / 2]])
        assert kern.wtilde_trace_batch(u)[0] == pytest.approx(1.5)

    def test_singular_rows_are_nan(self):
        assert np.isnan(kern.wtilde_trace_batch(np.array([[0.3, 0.0, 0.1]]))[0])

    def test_residuals_match_condition_report(self):
        for s in (fk.noon(2), fk.noon(4), fk.yurke(5), fk.holland_burnett(6)):
            rep = fk.check_optimality(s)
            np.testing.assert_allclose(
                kern.optimality_residuals_batch(s.amps[None])[0], list(rep.residuals.values()), atol=1e-14
            )


def test_env_flag_disables_numba():
    env = dict(os.environ, SU2FISHER_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "import su2fisher._kernels as k; print(k.USE_NUMBA)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "False"
