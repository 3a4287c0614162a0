import numpy as np
import pytest

from monorad._numeric import context
from monorad.errors import NearBranchLocus
from monorad.polyalg import parse_family
from monorad.roots import all_roots, fiber_at, min_separation, scaled_residual


def test_quadratic_roots():
    assert np.allclose(all_roots([1, 0, -4]), [-2, 2])


def test_roots_sorted_by_real_then_imag():
    roots = all_roots([1, 0, 0, -1])
    keys = [(z.real, z.imag) for z in roots]
    assert keys == sorted(keys)


@pytest.mark.parametrize("degree", range(2, 10))
def test_random_polynomials_against_numpy(degree):
    rng = np.random.default_rng(degree)
    coeffs = list(rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1))
    ours = sorted(all_roots(coeffs, seed=degree), key=lambda z: (z.real, z.imag))
    ref = sorted(np.roots(coeffs), key=lambda z: (z.real, z.imag))
    assert max(abs(a - b) for a, b in zip(ours, ref)) < 1e-8
    assert max(scaled_residual(coeffs, z) for z in ours) < 1e-13


def test_seed_reproducible():
    coeffs = [1, 2 - 1j, 0, 3, -1]
    assert all_roots(coeffs, seed=4) == all_roots(coeffs, seed=4)


def test_high_precision_roots():
    ctx = context(128)
    roots = all_roots([1, 0, -2], ctx=ctx)
    assert abs(roots[1] - ctx.mp.sqrt(2)) < ctx.mp.mpf(10) ** -35


def test_vanishing_leading_coefficient():
    with pytest.raises(NearBranchLocus):
        all_roots([0, 1, 2])


def test_fiber_examples():
    fib = fiber_at(parse_family("y^2 - x"), (4,))
    assert np.allclose(fib.roots, [-2, 2])
    assert fib.min_sep == pytest.approx(4)
    fib = fiber_at(parse_family("y^5 + a*y + b"), (0, 1))
    assert fib.min_sep == pytest.approx(2 * np.sin(np.pi / 5))
    assert fib.residual < 1e-14


def test_fiber_on_branch_locus():
    with pytest.raises(NearBranchLocus):
        fiber_at(parse_family("y^2 - x"), (0,))


def test_scaled_residual_guard_at_double_root():
    # without the max(|z|, 1) guard this ratio would be ~1
    assert scaled_residual([1, 0, 0], 1e-9) < 1e-15


def test_min_separation():
    assert min_separation([0, 1, 3]) == 1
    assert min_separation([5]) == float("inf")
