#!/usr/bin/env python3
"""
Tests for weighted, Lebesgue, Sobolev and fractional norms
"""

import sys
import os
import math

import numpy as np
import pytest

# Add src to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from cone_dbar.analysis.norms import (volume_weights, weighted_l2_norm, lp_norm, weight_lq_norm,
                                      holder_exponent, frame_derivative_norm, multi_indices,
                                      sobolev_integer_norm, sobolev_fractional_norm,
                                      gaussian_fractional_reference, volume_reference, volume_by_reduction)
from cone_dbar.analysis.fields import make_test_form
from cone_dbar.models.field_data import Grid, ScalarField, OneForm, TestFormSpec, FRAME
from cone_dbar.exceptions import InvalidInputError, UnderResolvedError, WraparoundRiskError
from cone_dbar.verification_manager import VerificationManager, support_window, derive_seeds, ORIGIN

SIGMA = 0.15
SEED = 5


def create_small_grid() -> Grid:
    return Grid(n=8, half_width=0.5)


def create_gaussian(grid: Grid, sigma: float = SIGMA) -> ScalarField:
    radius2 = sum(grid.coordinate(axis) ** 2 for axis in range(4))
    return ScalarField(grid, np.exp(-radius2 / (2.0 * sigma ** 2)))


def test_weighted_l2_norm_scaling_and_auxiliary():
    grid = create_small_grid()
    ones = ScalarField(grid, np.ones(grid.shape))
    volume = float(volume_weights(grid).sum())

    norm = weighted_l2_norm(ones, 0.0)
    assert norm.value == pytest.approx(math.sqrt(volume), rel=1e-12)
    assert norm.kind == 'L2k'
    assert weighted_l2_norm(ones * (3.0 - 4.0j), 0.0).value == pytest.approx(5.0 * norm.value, rel=1e-12)

    form = OneForm(grid, np.ones(grid.shape), np.zeros(grid.shape), FRAME)
    form_norm = weighted_l2_norm(form, 1.0)
    assert 'coordinate_value' in form_norm.auxiliary
    assert form_norm.value > 0
    print("   ✅ weighted L2 norm is homogeneous and reports the coordinate value")


def test_lp_norm_and_hoelder_factor():
    grid = create_small_grid()
    volume = float(volume_weights(grid).sum())
    constant = ScalarField(grid, 2.0 * np.ones(grid.shape))

    assert lp_norm(constant, 4.0).value == pytest.approx(2.0 * volume ** 0.25, rel=1e-12)
    with pytest.raises(InvalidInputError):
        lp_norm(constant, 1.5)

    assert weight_lq_norm(grid, 0.0, 2.0).value == pytest.approx(math.sqrt(volume), rel=1e-12)
    assert holder_exponent(4.0) == pytest.approx(4.0)
    assert holder_exponent(8.0) == pytest.approx(8.0 / 3.0)
    with pytest.raises(InvalidInputError):
        holder_exponent(2.0)
    print("   ✅ Lp norms and Hoelder exponents")


def test_frame_derivative_norm_of_holomorphic_coefficients():
    grid = create_small_grid()
    form = OneForm(grid, grid.v ** 2, grid.v * grid.w, FRAME)
    assert frame_derivative_norm(form, 'Lbar').value <= 1e-10
    assert frame_derivative_norm(form, 'L').value > 0
    with pytest.raises(InvalidInputError):
        frame_derivative_norm(form, 'D')
    print("   ✅ Lbar-norm vanishes on holomorphic coefficients")


def test_sobolev_integer_norm():
    grid = create_small_grid()
    f = create_gaussian(grid, sigma=0.3)
    assert len(multi_indices(2)) == 15

    expected = math.sqrt(float((np.abs(f.values) ** 2 * grid.gamma ** 4 * grid.cell_volume).sum()))
    assert sobolev_integer_norm(f, 0, 0.0).value == pytest.approx(expected, rel=1e-12)
    assert sobolev_integer_norm(f, 1, 0.0).value > sobolev_integer_norm(f, 0, 0.0).value
    with pytest.raises(UnderResolvedError):
        sobolev_integer_norm(f, 3, 0.0)
    print("   ✅ integer Sobolev norm")


def test_gaussian_fractional_reference_at_order_zero():
    # ||f||^2 = (pi sigma^2)^2 for exp(-|x|^2 / (2 sigma^2)) on R^4
    assert gaussian_fractional_reference(SIGMA, 0.0) == pytest.approx(math.pi * SIGMA ** 2, rel=1e-10)
    print("   ✅ closed form reduces to the L2 norm at order zero")


def test_fractional_norm_matches_gaussian_closed_form():
    grid = Grid(n=24, half_width=1.8)
    f = create_gaussian(grid)

    plain = math.sqrt(float((np.abs(f.values) ** 2).sum()) * grid.cell_volume)
    assert sobolev_fractional_norm(f, 0.0, weighted=False).value == pytest.approx(plain, rel=1e-10)

    for eps in (0.0, 0.5, 1.0):
        value = sobolev_fractional_norm(f, eps, weighted=False).value
        reference = gaussian_fractional_reference(SIGMA, eps)
        assert value == pytest.approx(reference, rel=1e-2), eps
        print(f"   eps={eps}: {value:.6g} vs {reference:.6g}")
    print("   ✅ spectral norm matches the Gaussian closed form")


def test_fractional_norm_is_monotone_in_order():
    grid = Grid(n=24, half_width=1.8)
    f = create_gaussian(grid)
    values = [sobolev_fractional_norm(f, eps, weighted=False).value for eps in (0.0, 0.5, 1.0)]
    assert values[0] < values[1] < values[2]
    weighted = sobolev_fractional_norm(f, 0.5)
    assert weighted.kind == 'Weps' and 0.0 < weighted.value < values[1]
    print("   ✅ W^eps norm grows with eps")


def test_fractional_norm_guards():
    grid = create_small_grid()
    ones = ScalarField(grid, np.ones(grid.shape))
    with pytest.raises(WraparoundRiskError):
        sobolev_fractional_norm(ones, 0.5)
    with pytest.raises(InvalidInputError):
        sobolev_fractional_norm(ones, 1.5)
    assert sobolev_fractional_norm(ScalarField.zeros(grid), 0.5).value == 0.0
    print("   ✅ wraparound and order guards")


def create_wave_packet(grid: Grid, wave: np.ndarray, sigma: float) -> ScalarField:
    radius2 = sum(grid.coordinate(axis) ** 2 for axis in range(4))
    phase = sum(k * grid.coordinate(axis) for axis, k in enumerate(wave))
    return ScalarField(grid, np.exp(-radius2 / (2.0 * sigma ** 2) + 1j * phase))


def create_form_pairs(count: int, n: int = 16, radius: float = 0.4):
    """Seeded (f, g, c) triples on one window whose supports clear the spectral guard cells"""
    grid = support_window(n, ORIGIN, radius, margin_cells=5)
    seeds = derive_seeds(SEED, 3 * count)
    rng = np.random.Generator(np.random.Philox(SEED))
    for index in range(count):
        f = make_test_form(TestFormSpec(ORIGIN, radius, 1, 1, seeds[3 * index]), grid)
        g = make_test_form(TestFormSpec(ORIGIN, radius, 1, 1, seeds[3 * index + 1]), grid)
        c = complex(rng.standard_normal(), rng.standard_normal())
        yield f, g, c


NORM_KINDS = {
    'L2k': lambda f: weighted_l2_norm(f, -1.0).value,
    'Lp': lambda f: lp_norm(f, 4.0).value,
    'LbarL': lambda f: frame_derivative_norm(f, 'Lbar').value,
    'Wsk': lambda f: sobolev_integer_norm(f, 1, 0.0).value,
    'Weps': lambda f: sobolev_fractional_norm(f, 0.5).value,
}


def test_fractional_norm_parseval_at_order_one():
    grid = Grid(n=32, half_width=0.9)
    sigma = 0.1
    wave = np.random.Generator(np.random.Philox(SEED)).uniform(-3.0, 3.0, size=4)
    f = create_wave_packet(grid, wave, sigma)

    radius2 = sum(grid.coordinate(axis) ** 2 for axis in range(4))
    gradient2 = radius2 / sigma ** 4 + float(np.sum(wave ** 2))
    expected = math.sqrt(float((np.abs(f.values) ** 2 * (1.0 + gradient2)).sum()) * grid.cell_volume)
    value = sobolev_fractional_norm(f, 1.0, weighted=False, support_threshold=1e-8).value
    assert value == pytest.approx(expected, rel=0.02)
    print(f"   ✅ ||Lambda f|| = {value:.6g} vs (||f||^2 + ||grad f||^2)^(1/2) = {expected:.6g}")


def test_weighted_order_zero_is_the_integer_norm():
    grid = support_window(16, ORIGIN, 0.5)
    for seed in derive_seeds(SEED, 3):
        f = make_test_form(TestFormSpec(ORIGIN, 0.5, 1, 2, seed), grid)
        assert sobolev_fractional_norm(f, 0.0).value == pytest.approx(
            sobolev_integer_norm(f, 0, 0.0).value, rel=1e-10)
    print("   ✅ weighted W^0 = W^{0,0}")


def test_weight_algebra():
    grid = create_small_grid()
    f = create_gaussian(grid, sigma=0.3)
    for a, k in [(1.5, -0.5), (-1.0, 2.0), (0.5, 0.0)]:
        shifted = weighted_l2_norm(f * grid.gamma ** a, k).value
        assert shifted == pytest.approx(weighted_l2_norm(f, k + a).value, rel=1e-12)
    print("   ✅ ||gamma^a f||_{L^{2,k}} = ||f||_{L^{2,k+a}}")


def test_volume_of_x_matches_closed_form():
    reference = volume_reference()
    assert reference == pytest.approx(17.6189, rel=1e-4)
    assert volume_by_reduction() == pytest.approx(reference, rel=1e-8)

    grid = Grid(n=48, half_width=1.05)
    ones = ScalarField(grid, np.ones(grid.shape))
    assert weighted_l2_norm(ones, 0.0).squared == pytest.approx(reference, rel=0.02)
    print("   ✅ 1/2 int_B |g| = pi^2 (1 + pi/4)")


def test_possibly_divergent_flag():
    grid = Grid(n=16, half_width=0.5)
    ones = ScalarField(grid, np.ones(grid.shape))
    singular = weighted_l2_norm(ones, -5.0)
    assert singular.possibly_divergent
    assert not weighted_l2_norm(ones, -1.0).possibly_divergent
    assert not weighted_l2_norm(ones, 0.0).possibly_divergent
    print("   ✅ gamma^{-10} on a non-vanishing field is flagged")


def test_norms_are_homogeneous_and_subadditive():
    for f, g, c in create_form_pairs(100):
        for kind, norm in NORM_KINDS.items():
            nf, ng = norm(f), norm(g)
            assert norm(f.scaled(c)) == pytest.approx(abs(c) * nf, rel=1e-12), kind
            assert norm(f + g) <= (nf + ng) * (1.0 + 1e-12), kind
    print(f"   ✅ {', '.join(NORM_KINDS)} over 100 seeded pairs")


def test_norms_converge_under_refinement():
    smooth = {}
    for n in (16, 32):
        grid = Grid(n=n, half_width=0.5)
        g = create_gaussian(grid, sigma=0.6)
        form = OneForm(grid, g.values, 0.5j * g.values, FRAME)
        smooth[n] = {
            'L2k_0': weighted_l2_norm(g, 0.0).value,
            'L2k_-1': weighted_l2_norm(g, -1.0).value,
            'Lp': lp_norm(g, 4.0).value,
            'Wsk': sobolev_integer_norm(g, 1, 0.0).value,
            'LbarL': frame_derivative_norm(form, 'Lbar').value,
        }
    for n in (24, 48):
        grid = Grid(n=n, half_width=1.05)
        smooth[n] = {'Weps': sobolev_fractional_norm(create_gaussian(grid, sigma=0.1), 0.5,
                                                     support_threshold=1e-6).value}
    for coarse, fine in [(16, 32), (24, 48)]:
        for name, value in smooth[coarse].items():
            assert value == pytest.approx(smooth[fine][name], rel=0.01), name
    print("   ✅ every norm changes by <= 1% from n to 2n")


def test_hoelder_step_on_seeded_forms():
    result = VerificationManager().holder_check(SEED, 16, 50, eps=0.5, p=4.0)
    assert result['q'] == pytest.approx(4.0)
    assert result['forms'] == 50
    assert result['violations'] == 0
    assert 0.0 < result['max_ratio'] <= 1.0
    print(f"   ✅ ||gamma^-1/2 f|| / (||gamma^-1/2||_L4 ||f||_L4) <= {result['max_ratio']:.4g}")


def test_check_norms_summary():
    summary = VerificationManager().check_norms(seed=SEED, n=16, n_forms=5)
    assert summary['holder']['violations'] == 0
    assert summary['volume']['reduction_rel_error'] <= 1e-8
    assert summary['spectral']['parseval_rel_error'] <= 0.02
    assert summary['spectral']['order_zero_rel_error'] <= 1e-10
    assert summary['spectral']['gaussian_rel_error'] <= 0.01
    assert summary['passed']
    print("   ✅ norm checks pass")


if __name__ == "__main__":
    print("=" * 60)
    print("CONE DBAR - NORM TESTS")
    print("=" * 60)

    tests = [test_weighted_l2_norm_scaling_and_auxiliary, test_lp_norm_and_hoelder_factor,
             test_frame_derivative_norm_of_holomorphic_coefficients, test_sobolev_integer_norm,
             test_gaussian_fractional_reference_at_order_zero, test_fractional_norm_matches_gaussian_closed_form,
             test_fractional_norm_is_monotone_in_order, test_fractional_norm_guards,
             test_fractional_norm_parseval_at_order_one, test_weighted_order_zero_is_the_integer_norm,
             test_weight_algebra, test_volume_of_x_matches_closed_form, test_possibly_divergent_flag,
             test_norms_are_homogeneous_and_subadditive, test_norms_converge_under_refinement,
             test_hoelder_step_on_seeded_forms, test_check_norms_summary]
    failures = 0
    for test in tests:
        print(f"\n{test.__name__}")
        try:
            test()
        except Exception as e:
            failures += 1
            print(f"   ❌ {e}")

    print("\n" + ("🎉 All norm tests passed!" if not failures else f"❌ {failures} test(s) failed."))
    print("=" * 60)
    sys.exit(1 if failures else 0)
