import importlib
import os
import subprocess
import sys

import numpy as np

from gapsol import kernels

RNG = np.random.default_rng(42)


def rand_grid4(shape, sparse=0.0):
    re = RNG.normal(size=shape)
    im = RNG.normal(size=shape)
    if sparse:
        mask = RNG.random(shape) < sparse
        re[mask] = 0.0
        im[mask] = 0.0
    w = np.abs(RNG.normal(size=shape)) * 1e-12
    return (re - w, re + w, im - w, im + w)


def test_backend_reports():
    assert kernels.backend_name() in ("numba", "numpy")


def test_conv_contains_float_conv():
    for _ in range(25):
        sa = (int(RNG.integers(1, 4)), int(RNG.integers(1, 9)))
        sb = (int(RNG.integers(1, 4)), int(RNG.integers(1, 9)))
        a4 = rand_grid4(sa)
        b4 = rand_grid4(sb)
        out = kernels.conv2_complex(a4, b4)
        za = 0.5 * (a4[0] + a4[1]) + 1j * 0.5 * (a4[2] + a4[3])
        zb = 0.5 * (b4[0] + b4[1]) + 1j * 0.5 * (b4[2] + b4[3])
        ref = np.zeros((sa[0] + sb[0] - 1, sa[1] + sb[1] - 1), dtype=complex)
        for i in range(sa[0]):
            for j in range(sa[1]):
                ref[i:i + sb[0], j:j + sb[1]] += za[i, j] * zb
        assert np.all(out[0] - 1e-9 <= ref.real) and np.all(ref.real <= out[1] + 1e-9)
        assert np.all(out[2] - 1e-9 <= ref.imag) and np.all(ref.imag <= out[3] + 1e-9)


def test_real_conv_zero_preservation():
    a = (np.array([[1.0, 0.0, 2.0]]), np.array([[1.0, 0.0, 2.0]]))
    b = (np.array([[0.0, 3.0]]), np.array([[0.0, 3.0]]))
    lo, hi = kernels.conv2_real(a, b)
    # (a*b)[0,0] pairs a[0]*b[0] = 0 exactly
    assert lo[0, 0] == 0.0 and hi[0, 0] == 0.0


def _run_other_path(code):
    env = dict(os.environ)
    env["GAPSOL_NO_NUMBA"] = "" if not kernels.USE_NUMBA else "1"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, cwd=os.path.dirname(os.path.dirname(__file__)))
    assert out.returncode == 0, out.stderr
    return out.stdout


def test_paths_agree_bitwise(tmp_path):
    a4 = rand_grid4((3, 7), sparse=0.3)
    b4 = rand_grid4((2, 5), sparse=0.3)
    np.savez(tmp_path / "in.npz", *(a4 + b4))
    here = kernels.conv2_complex(a4, b4)
    np.savez(tmp_path / "here.npz", *here)
    code = f"""
import numpy as np
from gapsol import kernels
d = np.load({str(tmp_path / 'in.npz')!r})
arrs = [d[k] for k in d.files]
out = kernels.conv2_complex(tuple(arrs[:4]), tuple(arrs[4:]))
ref = np.load({str(tmp_path / 'here.npz')!r})
refs = [ref[k] for k in ref.files]
for x, y in zip(out, refs):
    assert np.array_equal(x, y), 'paths disagree'
print('backend', kernels.backend_name(), 'MATCH')
"""
    out = _run_other_path(code)
    assert "MATCH" in out
