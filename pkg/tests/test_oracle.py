from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from spectral_games.errors import DegenerateInput, SingularLeastSquares
from spectral_games.numerics import is_conjugate_closed
from spectral_games.oracle import (
    acf_estimate,
    chebyshev_reference,
    lawson_minimax,
    sample_boundary,
)
from spectral_games.shapes import Disc, Ellipse, ImagCross, Segment, acf


def mp_chebyshev_reference(mu, L, t):
    """1 / T_t(z0) through the defining recurrence, in 50-digit arithmetic."""
    with mpmath.workdps(50):
        z0 = mpmath.mpf(L + mu) / (L - mu)
        T0, T1 = mpmath.mpf(1), z0
        for _ in range(t - 1):
            T0, T1 = T1, 2 * z0 * T1 - T0
        return float(1 / (T1 if t >= 1 else T0))


def test_sample_boundary_examples():
    z = sample_boundary(Disc(2, 1), 4)
    assert np.allclose(z, [3, 2 + 1j, 1, 2 - 1j], atol=1e-15)
    assert list(sample_boundary(Segment(1, 100), 2)) == [1, 100]
    assert is_conjugate_closed(sample_boundary(Ellipse(4, 3, 5), 360), tol=1e-14)


@pytest.mark.parametrize("K,n", [(Disc(2, 1), 7), (Ellipse(4, 3, 5), 11), (Ellipse(4, 3, 5), 64), (ImagCross(1, 10), 40)])
def test_samples_lie_on_boundary_and_are_conjugate_closed(K, n):
    z = sample_boundary(K, n)
    assert z.size == n
    assert is_conjugate_closed(z, tol=1e-14)
    np.testing.assert_array_equal(z, sample_boundary(K, n))
    if isinstance(K, Ellipse):
        q = ((z.real - K.c) / K.a) ** 2 + (z.imag / K.b) ** 2
        assert np.allclose(q, 1, atol=1e-12)


def test_interval_samples_include_end_points():
    z = sample_boundary(ImagCross(1, 10), 10)
    assert set(np.round(np.abs(z.imag), 12)) >= {1.0, 10.0}
    z = sample_boundary(Ellipse(3, 0, 5), 9)
    assert z.real.min() == 2 and z.real.max() == 8


def test_single_point_interpolation():
    res = lawson_minimax([2.0], t=1)
    assert res.max_abs == 0
    assert res.poly.coeffs == pytest.approx([-0.5], abs=1e-15)
    assert res.poly(0)[0] == 1


def test_constraint_and_real_coefficients():
    res = lawson_minimax(sample_boundary(Ellipse(4, 3, 5), 400), t=10)
    assert res.poly(0)[0] == 1
    c = res.poly.coeffs
    assert c.dtype.kind == "f"
    # monomial form agrees with the orthogonal-basis evaluation
    z = sample_boundary(Ellipse(4, 3, 5), 37)
    mono = 1 + sum(ck * z ** (k + 1) for k, ck in enumerate(c))
    assert np.allclose(mono, res.poly(z), atol=1e-8)


def test_max_abs_recomputes():
    z = sample_boundary(Segment(1, 10), 300)
    res = lawson_minimax(z, t=8)
    assert abs(res.max_abs - np.max(np.abs(res.poly(z)))) <= 1e-12


def test_disc_degree_8():
    assert acf_estimate(Disc(2, 1), t=8, n=400) == pytest.approx(0.5, rel=0.02)


def test_segment_degree_40_matches_chebyshev():
    est = acf_estimate(Segment(1, 100), t=40, n=2000)
    assert est == pytest.approx(chebyshev_reference(1, 100, 40) ** (1 / 40), rel=0.02)


def test_ellipse_degree_40():
    assert acf_estimate(Ellipse(4, 3, 5), t=40, n=2000) == pytest.approx(0.757359, rel=0.03)


def test_imag_cross_degree_20_matches_exact_finite_degree_value():
    # even p(z) = q(z**2) reduces the problem to [a**2, b**2] with degree t/2
    est = acf_estimate(ImagCross(1, 10), t=20, n=1000)
    exact = chebyshev_reference(1, 100, 10) ** (1 / 20)
    assert est == pytest.approx(exact, rel=1e-3)


def test_imag_cross_approaches_closed_form_with_degree():
    est = acf_estimate(ImagCross(1, 10), t=40, n=2000)
    assert est == pytest.approx(math.sqrt(9 / 11), rel=0.03)


def test_imag_cross_odd_coefficients_vanish():
    res = lawson_minimax(sample_boundary(ImagCross(1, 10), 1000), t=20)
    c = res.poly.coeffs
    scale = 10.0 ** np.arange(1, 21)  # c_k b**k is the natural size
    odd = c[0::2] * scale[0::2]  # c_1, c_3, ...
    assert np.max(np.abs(odd)) < 1e-6


@pytest.mark.parametrize("K", [Segment(1, 100), Disc(2, 1), Ellipse(4, 3, 5), ImagCross(1, 10)])
def test_oracle_upper_bounds_theory(K):
    for t in (6, 10, 20, 40):
        assert acf_estimate(K, t, n=50 * t) >= acf(K) * (1 - 0.02)


def test_oracle_non_increasing_in_degree_on_fixed_grid():
    z = sample_boundary(Segment(1, 100), 2000)
    ests = [lawson_minimax(z, t).acf_estimate for t in (5, 10, 20, 40)]
    assert all(b <= a * (1 + 1e-6) for a, b in zip(ests, ests[1:]))


@pytest.mark.parametrize("K,t", [(Segment(1, 100), 20), (Ellipse(4, 3, 5), 20), (Disc(2, 1), 10)])
def test_finer_grid_does_not_expose_overfit(K, t):
    res = lawson_minimax(sample_boundary(K, 50 * t), t)
    fine = np.max(np.abs(res.poly(sample_boundary(K, 500 * t))))
    assert fine <= res.max_abs * 1.03


def test_lawson_lower_bound_is_monotone():
    # the weighted 2-norm residual rises toward the minimax value from below
    res = lawson_minimax(sample_boundary(Segment(1, 100), 600), t=12, max_iters=200)
    obj = np.array(res.objective)
    assert np.all(np.diff(obj) >= -1e-12 * obj[1:])
    assert obj[-1] <= res.max_abs * (1 + 1e-9)


def test_convergence_flag():
    res = lawson_minimax(sample_boundary(Disc(2, 1), 64), t=4)
    assert res.converged
    res = lawson_minimax(sample_boundary(Segment(1, 100), 400), t=20, max_iters=5)
    assert not res.converged and res.iterations_used == 5


def test_chebyshev_reference_examples():
    assert chebyshev_reference(1, 100, 1) == pytest.approx(99 / 101, rel=1e-14)
    v = chebyshev_reference(1, 100, 40)
    assert v == pytest.approx(mp_chebyshev_reference(1, 100, 40), rel=1e-12)
    # value**(1/t) -> 9/11 from above; the gap is the 2**(1/t) factor
    assert v ** (1 / 40) == pytest.approx(9 / 11 * 2 ** (1 / 40), rel=1e-3)
    assert chebyshev_reference(1, 100, 1000) ** (1 / 1000) == pytest.approx(9 / 11, rel=1e-3)


@pytest.mark.parametrize("t", [1, 2, 7, 25, 80])
def test_chebyshev_reference_matches_recurrence(t):
    assert chebyshev_reference(2, 30, t) == pytest.approx(mp_chebyshev_reference(2, 30, t), rel=1e-12)


def test_rejects_bad_inputs():
    with pytest.raises(DegenerateInput):
        lawson_minimax([], 3)
    with pytest.raises(DegenerateInput):
        lawson_minimax([0.0, 1.0], 1)
    with pytest.raises(DegenerateInput):
        lawson_minimax([1 + 1j], 1)
    with pytest.raises(SingularLeastSquares):
        lawson_minimax([1.0, 2.0], 4)


def test_minimax_values_below_machine_epsilon_are_resolved():
    # rho**40 is about 5e-16 here; the exact scaled Chebyshev polynomial attains rho
    for E in (Ellipse(0.09412864224039919, 0.8662538804729476, 1.0), Ellipse(0.479051298140834, 0.31947782927415713, 1.0)):
        assert acf_estimate(E, t=40, n=2000) == pytest.approx(acf(E), rel=0.01)
    assert acf_estimate(Disc(10, 1), t=30, n=400) == pytest.approx(0.1, rel=0.01)
