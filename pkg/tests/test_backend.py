"""Kernel backend tests: fallback correctness and compiled/numpy agreement."""

import numpy as np
import pytest

from cssmodem import backend
from cssmodem import _kernels_py as kpy

try:
    from cssmodem import _kernels as kc
except ImportError:
    kc = None

needs_compiled = pytest.mark.skipif(kc is None, reason="compiled kernels not built")


def reference_jakes(amps, omegas, phases, n_samples):
    # direct per-sample trig evaluation, independent of both kernels
    n_taps, n_sin = omegas.shape
    t = np.arange(n_samples)
    out = np.zeros((n_taps, n_samples), dtype=complex)
    for l in range(n_taps):
        for m in range(n_sin):
            out[l] += np.cos(omegas[l, m] * t + phases[l, m]) + 1j * np.sin(
                omegas[l, m] * t + phases[l, m]
            )
        out[l] *= amps[l] / np.sqrt(n_sin)
    return out


def reference_tv(taps, x):
    n_taps, n = taps.shape
    y = np.zeros(n, dtype=complex)
    for i in range(n):
        for l in range(min(i, n_taps - 1) + 1):
            y[i] += taps[l, i] * x[i - l]
    return y


@pytest.fixture
def jakes_inputs():
    rng = np.random.default_rng(0)
    amps = np.array([1.0, 0.35])
    omegas = rng.uniform(-0.02, 0.02, size=(2, 32))
    phases = rng.uniform(0, 2 * np.pi, size=(2, 32))
    return amps, omegas, phases


@pytest.fixture
def tv_inputs():
    rng = np.random.default_rng(1)
    taps = rng.standard_normal((4, 300)) + 1j * rng.standard_normal((4, 300))
    x = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    return taps, x


def test_numpy_jakes_matches_reference(jakes_inputs):
    amps, omegas, phases = jakes_inputs
    got = kpy.jakes_trace(amps, omegas, phases, 200)
    np.testing.assert_allclose(got, reference_jakes(amps, omegas, phases, 200), atol=1e-12)


def test_numpy_tv_matches_reference(tv_inputs):
    taps, x = tv_inputs
    np.testing.assert_allclose(kpy.tv_convolve(taps, x), reference_tv(taps, x), atol=1e-12)


def test_numpy_tv_rejects_length_mismatch():
    with pytest.raises(ValueError):
        kpy.tv_convolve(np.ones((1, 5), complex), np.ones(4, complex))


@needs_compiled
def test_compiled_jakes_matches_numpy(jakes_inputs):
    amps, omegas, phases = jakes_inputs
    a = kc.jakes_trace(amps, omegas, phases, 5000)
    b = kpy.jakes_trace(amps, omegas, phases, 5000)
    np.testing.assert_allclose(a, b, atol=1e-10)


@needs_compiled
def test_compiled_jakes_long_trace_drift(jakes_inputs):
    # the phasor recurrence must hold its accuracy over frame-scale traces
    amps, omegas, phases = jakes_inputs
    n = 200_000
    a = kc.jakes_trace(amps, omegas[:1], phases[:1], n)
    b = kpy.jakes_trace(amps[:1], omegas[:1], phases[:1], n)
    np.testing.assert_allclose(a[0, -64:], b[0, -64:], atol=1e-9)


@needs_compiled
def test_compiled_tv_matches_numpy(tv_inputs):
    taps, x = tv_inputs
    a = kc.tv_convolve(taps, x)
    b = kpy.tv_convolve(taps, x)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_compiled
def test_compiled_tv_rejects_length_mismatch():
    with pytest.raises(ValueError):
        kc.tv_convolve(np.ones((1, 5), complex), np.ones(4, complex))


def test_backend_exports():
    assert backend.BACKEND_NAME in ("compiled", "numpy")
    assert callable(backend.jakes_trace) and callable(backend.tv_convolve)


def test_force_pure_python_env(tmp_path):
    import subprocess
    import sys

    code = "import cssmodem.backend as b; print(b.BACKEND_NAME)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "CSSMODEM_PURE_PYTHON": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
