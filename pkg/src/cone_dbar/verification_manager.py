"""
Verification manager that coordinates geometry checks, operator checks, studies and sweeps
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Dict, Any, List, Sequence, Tuple

import numpy as np
import pandas as pd

from .analysis.geometry import (metric_at, frame_at, covering_map, grid_frame, sample_interior_points,
                                sample_annulus, frame_growth_exponents, structure_coefficients_at,
                                verify_xi_order_arrays, fit_growth_exponent)
from .analysis.fields import make_test_form, to_frame, bump, random_polynomial, mollify
from .analysis.operators import (dbar_function, dbar_oneform, dbar_star, commutator,
                                 frame_decomposition_residual)
from .analysis.norms import (weighted_l2_norm, volume_weights, lp_norm, weight_lq_norm, holder_exponent,
                             sobolev_integer_norm, sobolev_fractional_norm, gaussian_fractional_reference,
                             volume_reference, volume_by_reduction)
from .analysis.estimates import EstimateEvaluator
from .analysis.convergence import (friedrichs_study, summarize_sweep, study_window, cube_region, prepare_input,
                                   FRIEDRICHS_OPERATORS, FORM_OPERATORS)
from .models.geometry_data import Point
from .models.field_data import Grid, ScalarField, OneForm, TestFormSpec, FRAME
from .models.results import EstimateCase, EstimateReport
from .exceptions import ConeDbarError, InvalidInputError, UnderResolvedError
from .utils.snapshot import save_snapshot
from .config.settings import config

logger = logging.getLogger(__name__)

ORIGIN = Point(0j, 0j)


def derive_seeds(seed: int, count: int) -> List[int]:
    """Deterministic child seeds of one master seed"""
    rng = np.random.Generator(np.random.Philox(seed))
    return [int(s) for s in rng.integers(0, 2 ** 62, size=count)]


def build_family(seed: int = None, n_forms: int = None, radii: Sequence[float] = None,
                 vanishing_order: int = None, degree: int = None) -> List[TestFormSpec]:
    """Forms centred at the origin, n_forms seeds for each support radius"""
    harness = config.harness
    if seed is None:
        seed = harness.seed
    if n_forms is None:
        n_forms = harness.n_forms
    if radii is None:
        radii = harness.radii
    if vanishing_order is None:
        vanishing_order = harness.vanishing_order
    if degree is None:
        degree = harness.poly_degree
    seeds = derive_seeds(seed, n_forms)
    return [TestFormSpec(center=ORIGIN, support_radius=float(radius), vanishing_order=vanishing_order,
                         polynomial_degree=degree, seed=form_seed)
            for form_seed in seeds for radius in radii]


@lru_cache(maxsize=8)
def _window(n: int, center: Point, radius: float, margin_cells: int) -> Grid:
    return Grid.for_support(n, center, radius, margin_cells)


def support_window(n: int, spec_center: Point, radius: float, margin_cells: int = None) -> Grid:
    """Support-fitted grid; equal requests share one Grid and its cached arrays"""
    if margin_cells is None:
        margin_cells = config.grid.window_margin_cells
    return _window(n, spec_center, float(radius), margin_cells)


def _relative_l2(actual: np.ndarray, expected: np.ndarray) -> float:
    scale = float(np.sqrt(np.sum(np.abs(expected) ** 2)))
    if scale == 0:
        return float(np.sqrt(np.sum(np.abs(actual) ** 2)))
    return float(np.sqrt(np.sum(np.abs(actual - expected) ** 2))) / scale


def _region_points(grid: Grid, low: float, high: float) -> Tuple[np.ndarray, np.ndarray]:
    """Selection mask and (N, 4) real coordinates of grid points with low <= gamma <= high"""
    selected = grid.mask & (grid.gamma >= low) & (grid.gamma <= high)
    coordinates = np.stack([np.broadcast_to(grid.coordinate(axis), grid.shape)[selected]
                            for axis in range(4)], axis=1)
    return selected, coordinates


class VerificationManager:
    """Main manager that coordinates all verification components"""

    def __init__(self):
        self.evaluator = EstimateEvaluator()
        self.last_rows = None
        logger.info(f"Verification manager initialized (seed={config.harness.seed}, n={config.grid.n})")

    # ------------------------------------------------------------------ geometry

    def check_geometry(self, seed: int = None, n: int = None) -> Dict[str, Any]:
        """Metric, frame, growth and structure-coefficient checks on seeded points"""
        if seed is None:
            seed = config.harness.seed
        if n is None:
            n = config.grid.n
        geometry = config.geometry
        logger.info(f"Starting geometry check with {geometry.n_random_points} points")

        points = sample_interior_points(geometry.n_random_points, seed)
        det_error = inverse_error = duality_error = ortho_error = cover_error = 0.0
        for x in points:
            p = Point.from_real(x)
            data = metric_at(p)
            det_error = max(det_error, abs(data.direct_det - data.det_g) / data.det_g)
            z1, z2, _ = covering_map(p)
            cover_error = max(cover_error, abs(data.gamma ** 2 - (abs(z1) + abs(z2))))
            if data.gamma > geometry.inverse_min_gamma:
                inverse_error = max(inverse_error,
                                    float(np.max(np.abs(data.g @ data.g_inv - np.eye(2)))))
            if data.gamma > geometry.frame_min_gamma:
                frame = frame_at(p)
                duality_error = max(duality_error, frame.duality_error())
                ortho_error = max(ortho_error, frame.orthonormality_error(data.g_inv))

        slopes = frame_growth_exponents(count=256, seed=seed)
        xi_checks = self.structure_xi_checks(seed)
        grid_error = self._grid_frame_agreement(n, seed)

        summary = {
            'n_points': len(points),
            'det_max_rel_error': det_error,
            'inverse_max_error': inverse_error,
            'duality_max_error': duality_error,
            'orthonormality_max_error': ortho_error,
            'covering_max_error': cover_error,
            'alpha_slope': slopes['alpha_slope'],
            'beta_slope': slopes['beta_slope'],
            'grid_frame_max_error': grid_error,
            'xi_checks': {name: report.to_dict() for name, report in xi_checks.items()},
            'frame_gauge': "cholesky-positive-diagonal",
            'n': n,
            'seed': seed,
        }
        summary['passed'] = bool(
            det_error <= geometry.det_rtol
            and inverse_error <= geometry.inverse_tol
            and duality_error <= geometry.frame_tol
            and ortho_error <= geometry.frame_tol
            and cover_error <= 1e-14
            and abs(slopes['alpha_slope'] - 1.0) <= geometry.slope_tol
            and abs(slopes['beta_slope'] + 1.0) <= geometry.slope_tol
            and grid_error <= geometry.frame_tol
            and all(report.passes for report in xi_checks.values())
        )
        logger.info(f"Geometry check complete: passed={summary['passed']}")
        return summary

    def structure_xi_checks(self, seed: int, per_annulus: int = 64) -> Dict[str, Any]:
        """xi_{-2} order of every structure coefficient over the dyadic annuli"""
        levels = range(1, config.geometry.annulus_levels + 1)
        points = np.concatenate([sample_annulus(level, per_annulus, seed) for level in levels])
        coefficients = structure_coefficients_at(points)
        gamma = coefficients['gamma']

        reports = {}
        for i in (1, 2):
            reports[f'dbar_b{i}'] = verify_xi_order_arrays(gamma, coefficients['dbar'][i - 1], -2)
            reports[f'star_s{i}'] = verify_xi_order_arrays(gamma, coefficients['star'][i - 1], -2)
        names = ('c1', 'c2', 'd1', 'd2')
        for (j, k), values in sorted(coefficients['commutator'].items()):
            for name, row in zip(names, values):
                reports[f'comm_L{j}_Lbar{k}_{name}'] = verify_xi_order_arrays(gamma, row, -2)
        return reports

    def _grid_frame_agreement(self, n: int, seed: int, count: int = 50) -> float:
        grid = Grid(n=n, half_width=config.grid.half_width)
        frame = grid_frame(grid)
        rng = np.random.Generator(np.random.Philox(seed))
        inside = np.argwhere(np.asarray(grid.mask))
        picks = inside[rng.choice(len(inside), size=min(count, len(inside)), replace=False)]
        error = 0.0
        for index in picks:
            index = tuple(int(i) for i in index)
            p = Point(complex(grid.v[index[0], index[1], 0, 0]), complex(grid.w[0, 0, index[2], index[3]]))
            reference = frame_at(p)
            alpha = np.array([[np.broadcast_to(frame.alpha(i, j), grid.shape)[index]
                               for j in (1, 2)] for i in (1, 2)])
            error = max(error, float(np.max(np.abs(alpha - reference.alpha))))
        return error

    # ------------------------------------------------------------------ operators

    def check_operators(self, n: int = None, seed: int = None, n_functions: int = None,
                        annulus_n: int = None) -> Dict[str, Any]:
        """dbar^2, frame decompositions and commutator expansion on the full grid and per annulus"""
        if n is None:
            n = config.grid.n
        if seed is None:
            seed = config.harness.seed
        if n_functions is None:
            n_functions = config.harness.n_pairs
        if annulus_n is None:
            annulus_n = config.geometry.annulus_n
        grid = Grid(n=n, half_width=config.grid.half_width)
        logger.info(f"Starting operator checks on n={n}")

        ddbar = self.ddbar_check(grid, seed, n_functions)
        dbar_error, star_error = self.decomposition_check(grid)
        comm = self.commutator_check(grid, seed)
        annuli = self.annulus_residual_checks(annulus_n)
        # the coarse grid has three quarters of the cells per axis
        refinement = self.decomposition_refinement([max(8, 3 * n // 8 * 2), n])

        geometry = config.geometry
        summary = {
            'n': n,
            'seed': seed,
            'ddbar_max_rel': ddbar,
            'dbar_residual_rel_error': dbar_error,
            'star_residual_rel_error': star_error,
            'commutator_rel_error': comm['rel_error'],
            'commutator_antisymmetry_error': comm['antisymmetry'],
            'commutator_skipped_points': comm['skipped'],
            'annulus_n': annulus_n,
            'annulus_checks': {name: report.to_dict() for name, report in annuli.items()},
            'refinement': refinement,
        }
        summary['passed'] = bool(
            ddbar <= config.harness.ddbar_rtol
            and dbar_error <= geometry.structure_rtol
            and star_error <= geometry.structure_rtol
            and comm['rel_error'] <= geometry.commutator_rtol
            and comm['antisymmetry'] <= 1e-12
            and all(report.passes for report in annuli.values())
            and all(drift <= config.harness.stability_tol for drift in refinement['drift'].values())
        )
        logger.info(f"Operator checks complete: passed={summary['passed']}")
        return summary

    def ddbar_check(self, grid: Grid, seed: int, count: int) -> float:
        """max |dbar dbar u| h^2 / max |u| over seeded functions"""
        worst = 0.0
        for form_seed in derive_seeds(seed, count):
            spec = TestFormSpec(ORIGIN, 0.5, 0, config.harness.poly_degree, form_seed)
            u = make_test_form(spec, grid).component(1)
            scale = u.max_abs()
            if scale == 0:
                continue
            curvature = dbar_oneform(dbar_function(u)).max_abs()
            worst = max(worst, curvature * grid.h ** 2 / scale)
        return worst

    def decomposition_check(self, grid: Grid, dbar_band: Tuple[float, float] = (0.4, 0.75),
                            star_band: Tuple[float, float] = (0.35, 0.5)) -> Tuple[float, float]:
        """
        Grid remainders of the frame decompositions against the pointwise structure coefficients

        dbar is checked on constant frame coefficients (1, 0), whose remainder is b_1;
        dbar* on (psi, 0) with psi a wide bump, whose remainder is -s_1 psi. The dbar* band
        stays where the bump's second derivatives are moderate.
        """
        selected, points = _region_points(grid, *dbar_band)
        coefficients = structure_coefficients_at(points)
        constant = OneForm(grid, np.ones(grid.shape), np.zeros(grid.shape), FRAME)
        dbar_residual = frame_decomposition_residual(constant, 'dbar').residual.values[selected]
        dbar_error = _relative_l2(dbar_residual, coefficients['dbar'][0])

        selected, points = _region_points(grid, *star_band)
        coefficients = structure_coefficients_at(points)
        psi = ScalarField(grid, bump(grid, np.zeros(4), 0.9))
        wide = OneForm(grid, psi.values, np.zeros(grid.shape), FRAME)
        star_residual = frame_decomposition_residual(wide, 'star').residual.values[selected]
        star_error = _relative_l2(star_residual, -coefficients['star'][0] * psi.values[selected])
        logger.debug(f"Decomposition residual errors: dbar={dbar_error:.3g} star={star_error:.3g}")
        return dbar_error, star_error

    def annulus_residual_checks(self, n: int, levels: int = None) -> Dict[str, Any]:
        """
        xi_{-2} order of the decomposition remainders and of the [L_1, Lbar_1] expansion
        over dyadic annuli, each annulus on its own window

        Window j has half width 2^{1-j} and carries f = (psi_j, 0) with psi_j a bump of
        radius 1.6 * 2^{-j}; only the points of annulus j are kept. The commutator acts on
        u = v + wbar with the minimum-norm expansion.
        """
        if levels is None:
            levels = config.geometry.residual_levels
        gammas: Dict[str, List[np.ndarray]] = {'dbar': [], 'star': [], 'commutator': []}
        values: Dict[str, List[np.ndarray]] = {'dbar': [], 'star': [], 'commutator': []}

        for level in range(1, levels + 1):
            outer = 2.0 ** -level
            grid = Grid(n=n, half_width=2.0 * outer)
            psi = bump(grid, np.zeros(4), 1.6 * outer)
            form = OneForm(grid, psi, np.zeros(grid.shape), FRAME)
            selected = grid.mask & (grid.gamma >= 0.5 * outer) & (grid.gamma < outer)
            gamma = np.broadcast_to(grid.gamma, grid.shape)[selected]
            scale = np.abs(psi[selected])

            for which in ('dbar', 'star'):
                residual = frame_decomposition_residual(form, which).residual.values[selected]
                gammas[which].append(gamma)
                values[which].append(residual / scale)

            output = commutator(1, 1, ScalarField(grid, grid.v + np.conj(grid.w)))
            kept = selected & ~output.skipped
            coefficients = np.stack([np.abs(c.values[kept]) for c in output.coefficients])
            gammas['commutator'].append(np.broadcast_to(grid.gamma, grid.shape)[kept])
            values['commutator'].append(coefficients.max(axis=0))

        reports = {name: verify_xi_order_arrays(np.concatenate(gammas[name]), np.concatenate(values[name]), -2)
                   for name in gammas}
        logger.debug("Annulus spreads: " + ", ".join(f"{name}={report.spread:.3g}"
                                                      for name, report in reports.items()))
        return reports

    def decomposition_refinement(self, n_list: Sequence[int], dbar_band: Tuple[float, float] = (0.5, 0.7),
                                 star_band: Tuple[float, float] = (0.35, 0.5)) -> Dict[str, Any]:
        """
        Constant C in |remainder| <= C gamma^{-2} |f| on a fixed band, at each resolution

        dbar uses f = (1, 0); dbar* uses (psi, 0) with psi a bump of radius 0.9, whose
        band stays where psi is resolved.
        """
        constants: Dict[str, Dict[int, float]] = {'dbar': {}, 'star': {}}
        for n in n_list:
            grid = Grid(n=n, half_width=config.grid.half_width)
            constant = OneForm(grid, np.ones(grid.shape), np.zeros(grid.shape), FRAME)
            psi = bump(grid, np.zeros(4), 0.9)
            wide = OneForm(grid, psi, np.zeros(grid.shape), FRAME)
            for which, form, band in (('dbar', constant, dbar_band), ('star', wide, star_band)):
                selected, _ = _region_points(grid, *band)
                residual = frame_decomposition_residual(form, which).residual.values[selected]
                gamma = np.broadcast_to(grid.gamma, grid.shape)[selected]
                scale = np.sqrt(form.pointwise_abs2[selected])
                constants[which][n] = float(np.max(gamma ** 2 * np.abs(residual) / scale))

        coarse, fine = min(n_list), max(n_list)
        drift = {which: abs(values[coarse] - values[fine]) / values[fine] for which, values in constants.items()}
        return {'constants': {which: {str(n): c for n, c in values.items()} for which, values in constants.items()},
                'drift': drift}

    def commutator_check(self, grid: Grid, seed: int, low: float = 0.45, high: float = 0.75) -> Dict[str, Any]:
        """
        Commutator coefficients recovered on the grid against the pointwise expansion

        u is a seeded quadratic in v, w, vbar, wbar, so every remaining discretization
        error comes from differentiating the frame.
        """
        rng = np.random.Generator(np.random.Philox(derive_seeds(seed, 1)[0]))
        u = ScalarField(grid, random_polynomial(grid, 2, rng))
        real_u = ScalarField(grid, u.values.real)
        probes = [ScalarField(grid, grid.v), ScalarField(grid, grid.w),
                  ScalarField(grid, np.conj(grid.v)), ScalarField(grid, np.conj(grid.w))]

        selected, points = _region_points(grid, low, high)
        expected = structure_coefficients_at(points)['commutator']

        rel_error = 0.0
        antisymmetry = 0.0
        skipped = 0
        for j in (1, 2):
            for k in (1, 2):
                output = commutator(j, k, u, probes)
                skipped += output.skipped_count
                recovered = np.stack([c.values[selected] for c in output.coefficients])
                rel_error = max(rel_error, _relative_l2(recovered, expected[(j, k)]))

                swapped = commutator(k, j, real_u).principal.values
                direct = commutator(j, k, real_u).principal.values
                scale = max(float(np.max(np.abs(direct))), 1e-300)
                antisymmetry = max(antisymmetry, float(np.max(np.abs(direct + np.conj(swapped)))) / scale)
        return {'rel_error': rel_error, 'antisymmetry': antisymmetry, 'skipped': skipped}

    # ------------------------------------------------------------------ adjoint

    def check_adjoint(self, seed: int = None, n_list: Sequence[int] = None,
                      n_pairs: int = None) -> Dict[str, Any]:
        """<dbar u, f> against <u, dbar* f> on seeded pairs at each resolution"""
        if seed is None:
            seed = config.harness.seed
        if n_list is None:
            n_list = config.harness.adjoint_n
        if n_pairs is None:
            n_pairs = config.harness.n_pairs
        logger.info(f"Starting adjoint check: {n_pairs} pairs, n in {list(n_list)}")

        rows = []
        seeds = derive_seeds(seed, 2 * n_pairs)
        for n in n_list:
            grid = support_window(n, ORIGIN, 0.5, margin_cells=2)
            for index in range(n_pairs):
                try:
                    residual = self.adjoint_residual(grid, seeds[2 * index], seeds[2 * index + 1])
                    rows.append({'n': n, 'h': grid.h, 'pair': index, 'residual': residual, 'status': 'ok'})
                except ConeDbarError as e:
                    logger.error(f"Adjoint pair {index} at n={n} failed: {e}")
                    rows.append({'n': n, 'h': grid.h, 'pair': index, 'residual': math.nan,
                                 'status': f'error: {e}'})

        table = pd.DataFrame(rows)
        ok = table[table['status'] == 'ok']
        per_n = ok.groupby('n')['residual'].max()
        floor = config.harness.adjoint_floor
        below_floor = bool(len(ok) == len(table) and (ok['residual'] < floor).all())
        order = None
        if not below_floor and len(per_n) >= 2 and (per_n > 0).all():
            spacing = ok.groupby('n')['h'].first()
            order = fit_growth_exponent(spacing.loc[per_n.index].to_numpy(), per_n.to_numpy())

        summary = {
            'n_list': list(n_list),
            'n_pairs': n_pairs,
            'max_residual': float(ok['residual'].max()) if len(ok) else None,
            'per_resolution_max': {str(int(k)): float(v) for k, v in per_n.items()},
            'observed_order': order,
            'below_floor': below_floor,
            'failed_rows': int(len(table) - len(ok)),
            'seed': seed,
        }
        summary['passed'] = bool(below_floor or (order is not None and order >= 1.0
                                                 and summary['failed_rows'] == 0))
        self.last_rows = table
        logger.info(f"Adjoint check complete: passed={summary['passed']}")
        return summary

    @staticmethod
    def adjoint_residual(grid: Grid, seed_u: int, seed_f: int) -> float:
        """|<dbar u, f> - <u, dbar* f>| / (||dbar u|| ||f||)"""
        degree = config.harness.poly_degree
        u = make_test_form(TestFormSpec(ORIGIN, 0.45, 0, degree, seed_u), grid).component(1)
        f = make_test_form(TestFormSpec(ORIGIN, 0.45, 1, degree, seed_f), grid)

        weights = volume_weights(grid)
        du = to_frame(dbar_function(u))
        lhs = complex(np.sum((du.first * np.conj(f.first) + du.second * np.conj(f.second)) * weights))
        rhs = complex(np.sum(u.values * np.conj(dbar_star(f).values) * weights))
        scale = weighted_l2_norm(du, 0.0).value * weighted_l2_norm(f, 0.0).value
        if scale == 0:
            return 0.0
        return abs(lhs - rhs) / scale

    # ------------------------------------------------------------------ norms

    def check_norms(self, seed: int = None, n: int = None, n_forms: int = None) -> Dict[str, Any]:
        """Hoelder step on seeded forms, the volume of X and spectral-norm consistency"""
        if seed is None:
            seed = config.harness.seed
        if n is None:
            n = config.grid.n
        if n_forms is None:
            n_forms = config.harness.holder_forms
        logger.info(f"Starting norm checks: {n_forms} forms on n={n}")

        holder = self.holder_check(seed, n, n_forms)
        volume = self.volume_check(config.grid.refinement_n)
        spectral = self.spectral_checks(seed)

        norms = config.norms
        summary = {'n': n, 'seed': seed, 'holder': holder, 'volume': volume, 'spectral': spectral}
        summary['passed'] = bool(
            holder['forms'] > 0
            and holder['violations'] == 0
            and volume['grid_rel_error'] <= norms.quadrature_rtol
            and volume['reduction_rel_error'] <= 1e-8
            and spectral['parseval_rel_error'] <= norms.parseval_rtol
            and spectral['order_zero_rel_error'] <= 1e-10
            and spectral['gaussian_rel_error'] <= norms.gaussian_rtol
        )
        logger.info(f"Norm checks complete: passed={summary['passed']}")
        return summary

    def holder_check(self, seed: int, n: int, n_forms: int, eps: float = 0.5, p: float = 4.0) -> Dict[str, Any]:
        """
        ||gamma^{-eps} f||_{L^2(X)} <= ||gamma^{-eps}||_{L^q(X)} ||f||_{L^p(X)} with 1/2 = 1/p + 1/q

        The inequality holds exactly for the quadrature weights, so the tolerance is round-off.
        """
        harness = config.harness
        grid = support_window(n, ORIGIN, 0.5)
        q = holder_exponent(p)
        factor = weight_lq_norm(grid, eps, q).value

        ratios = []
        for form_seed in derive_seeds(seed, n_forms):
            spec = TestFormSpec(ORIGIN, 0.5, harness.vanishing_order, harness.poly_degree, form_seed)
            f = make_test_form(spec, grid)
            bound = factor * lp_norm(f, p).value
            if bound > 0:
                ratios.append(weighted_l2_norm(f, -eps).value / bound)
        return {
            'epsilon': eps,
            'p': p,
            'q': q,
            'weight_factor': factor,
            'forms': len(ratios),
            'max_ratio': max(ratios, default=None),
            'violations': int(sum(ratio > 1.0 + 1e-12 for ratio in ratios)),
        }

    @staticmethod
    def volume_check(n: int) -> Dict[str, Any]:
        """||1||^2_{L^2(X)} on the grid against pi^2 (1 + pi/4) and its 2-D reduction"""
        grid = Grid(n=n, half_width=config.grid.half_width)
        grid_value = weighted_l2_norm(ScalarField(grid, np.ones(grid.shape)), 0.0).squared
        reference = volume_reference()
        return {
            'n': n,
            'grid_value': grid_value,
            'reference': reference,
            'grid_rel_error': abs(grid_value - reference) / reference,
            'reduction_rel_error': abs(volume_by_reduction() - reference) / reference,
        }

    @staticmethod
    def spectral_checks(seed: int, sigma: float = 0.1) -> Dict[str, Any]:
        """
        Fractional norms against independent values

        Parseval: the unweighted order-one norm of the wave packet exp(-|x|^2 / 2 sigma^2 + i k.x)
        against (||f||^2 + ||grad f||^2)^{1/2}, with grad f = (i k - x / sigma^2) f sampled exactly.
        The weighted order-zero norm of a seeded form is the zeroth integer norm, and the unweighted
        order-1/2 norm of a Gaussian has a closed form.
        """
        rng = np.random.Generator(np.random.Philox(derive_seeds(seed, 1)[0]))
        wave = rng.uniform(-3.0, 3.0, size=4)
        grid = Grid(n=32, half_width=0.9)
        radius2 = sum(grid.coordinate(axis) ** 2 for axis in range(4))
        phase = sum(k * grid.coordinate(axis) for axis, k in enumerate(wave))
        packet = ScalarField(grid, np.exp(-radius2 / (2.0 * sigma ** 2) + 1j * phase))
        gradient2 = radius2 / sigma ** 4 + float(np.sum(wave ** 2))
        expected = math.sqrt(float((np.abs(packet.values) ** 2 * (1.0 + gradient2)).sum()) * grid.cell_volume)
        parseval = sobolev_fractional_norm(packet, 1.0, weighted=False, support_threshold=1e-8).value

        form = make_test_form(TestFormSpec(ORIGIN, 0.5, 1, config.harness.poly_degree, seed),
                              support_window(16, ORIGIN, 0.5))
        order_zero = sobolev_fractional_norm(form, 0.0).value
        integer = sobolev_integer_norm(form, 0, 0.0).value

        gaussian_sigma = 0.15
        wide = Grid(n=24, half_width=1.8)
        wide_radius2 = sum(wide.coordinate(axis) ** 2 for axis in range(4))
        gaussian = ScalarField(wide, np.exp(-wide_radius2 / (2.0 * gaussian_sigma ** 2)))
        gaussian_value = sobolev_fractional_norm(gaussian, 0.5, weighted=False).value
        gaussian_reference = gaussian_fractional_reference(gaussian_sigma, 0.5)

        return {
            'wave_vector': wave.tolist(),
            'parseval_value': parseval,
            'parseval_reference': expected,
            'parseval_rel_error': abs(parseval - expected) / expected,
            'order_zero_rel_error': abs(order_zero - integer) / integer if integer > 0 else math.inf,
            'gaussian_value': gaussian_value,
            'gaussian_reference': gaussian_reference,
            'gaussian_rel_error': abs(gaussian_value - gaussian_reference) / gaussian_reference,
        }

    # ------------------------------------------------------------------ Friedrichs

    def friedrichs(self, seed: int = None, n: int = None, eps_list: Sequence[float] = None,
                   n_fields: int = None) -> Tuple[pd.DataFrame, Dict[str, Any]]:
        """
        Mollifier studies for every first-order operator on seeded fields

        Fields of support radius friedrichs_radius are sampled on a window around the
        vertex whose spacing resolves the smallest eps; errors are measured on the cube
        of study_window. Each input is mollified once per eps and shared by the operators.
        """
        harness = config.harness
        if seed is None:
            seed = harness.seed
        if n is None:
            n = harness.friedrichs_n
        if eps_list is None:
            eps_list = harness.friedrichs_eps
        if n_fields is None:
            n_fields = harness.friedrichs_fields
        eps_list = sorted((float(e) for e in eps_list), reverse=True)
        radius = harness.friedrichs_radius

        rows = []
        tables = []
        summary: Dict[str, Any] = {'n': n, 'eps_list': eps_list, 'n_fields': n_fields, 'radius': radius}
        try:
            grid, depth = study_window(n, eps_list)
        except UnderResolvedError as e:
            logger.error(f"Friedrichs studies cannot run: {e}")
            grid, depth = None, None
            rows = [{'field': index, 'operator': operator, 'eps': math.nan, 'error': math.nan,
                     'status': f'error: {e}'}
                    for index in range(n_fields) for operator in FRIEDRICHS_OPERATORS]
        if grid is not None:
            summary.update({'h': grid.h, 'window_half_width': grid.half_width, 'cube_half_width': depth})
            region = cube_region(grid, depth)
            for index, field_seed in enumerate(derive_seeds(seed, n_fields)):
                spec = TestFormSpec(ORIGIN, radius, 1, harness.poly_degree, field_seed)
                form = make_test_form(spec, grid)
                inputs = {'scalar': form.component(1), 'form': prepare_input(form, 'curl')}
                smoothed = {key: [mollify(value, eps) for eps in eps_list] for key, value in inputs.items()}
                logger.info(f"Friedrichs field {index + 1}/{n_fields} mollified at {len(eps_list)} radii")
                for operator in FRIEDRICHS_OPERATORS:
                    key = 'form' if operator in FORM_OPERATORS else 'scalar'
                    try:
                        table = friedrichs_study(inputs[key], operator, eps_list, region, smoothed[key])
                        tables.append(table)
                        for eps, error in zip(table.eps, table.errors):
                            rows.append({'field': index, 'operator': operator, 'eps': eps, 'error': error,
                                         'status': 'ok'})
                    except ConeDbarError as e:
                        logger.error(f"Friedrichs study {operator} on field {index} failed: {e}")
                        rows.append({'field': index, 'operator': operator, 'eps': math.nan,
                                     'error': math.nan, 'status': f'error: {e}'})

        frame = pd.DataFrame(rows, columns=['field', 'operator', 'eps', 'error', 'status'])
        summary.update({
            'studies': len(tables),
            'failed_studies': int((frame['status'] != 'ok').sum()),
            'step_violations': int(sum(t.step_violations for t in tables)),
            'worst_final_ratio': max((t.final_ratio for t in tables), default=None),
            'min_observed_order': min((t.observed_order for t in tables if t.observed_order is not None),
                                      default=None),
            'per_operator_passed': {op: any(t.operator == op for t in tables)
                                    and all(t.passed for t in tables if t.operator == op)
                                    for op in FRIEDRICHS_OPERATORS},
        })
        summary['passed'] = bool(tables and summary['failed_studies'] == 0 and all(t.passed for t in tables))
        logger.info(f"Friedrichs studies complete: passed={summary['passed']}")
        return frame, summary

    # ------------------------------------------------------------------ estimates

    def evaluate_row(self, case: EstimateCase, spec: TestFormSpec, n: int) -> Dict[str, Any]:
        """One (form, resolution) evaluation; errors are recorded on the row"""
        row = {'seed': spec.seed, 'support_radius': spec.support_radius, 'n': n,
               'vanishing_order': spec.vanishing_order, 'degree': spec.polynomial_degree,
               'lhs': math.nan, 'rhs': math.nan, 'ratio': math.nan, 'status': 'ok'}
        try:
            grid = support_window(n, spec.center, spec.support_radius)
            form = make_test_form(spec, grid)
            lhs, rhs = self.evaluator.evaluate(case, form)
            row['lhs'], row['rhs'] = lhs, rhs
            if rhs > 0:
                row['ratio'] = lhs / rhs
            else:
                row['status'] = 'degenerate'
        except ConeDbarError as e:
            logger.error(f"{case.label} failed on {spec.label} n={n}: {e}")
            row['status'] = f'error: {e}'
        return row

    def run_sweep(self, case: EstimateCase, family: Sequence[TestFormSpec],
                  resolutions: Sequence[int]) -> EstimateReport:
        """
        Evaluate one case over every (form, resolution) pair

        Raises:
            InvalidInputError: for an empty family or fewer than two resolutions
        """
        if not family:
            raise InvalidInputError("run_sweep needs a non-empty family")
        if len(set(resolutions)) < 2:
            raise InvalidInputError("run_sweep needs at least two resolutions")
        case.validate()

        n_list = sorted(set(resolutions))
        # evaluated window by window so consecutive rows share the grid and its frame arrays
        tasks = sorted(((spec, n) for spec in family for n in n_list),
                       key=lambda task: (tuple(task[0].center.real_coordinates), task[0].support_radius,
                                         task[1], task[0].seed))
        logger.info(f"Sweep {case.label}: {len(family)} forms x {len(n_list)} resolutions")

        workers = max(1, config.harness.workers)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda task: self.evaluate_row(case, *task), tasks))
        else:
            rows = []
            for position, (spec, n) in enumerate(tasks, 1):
                rows.append(self.evaluate_row(case, spec, n))
                logger.debug(f"[{position}/{len(tasks)}] {case.label} {spec.label} n={n}")

        frame = (pd.DataFrame(rows)
                 .sort_values(['seed', 'support_radius', 'n'], kind='mergesort')
                 .reset_index(drop=True))
        summary = summarize_sweep(frame, n_list)
        logger.info(f"Sweep {case.label} complete: max_ratio={summary.get('max_ratio')} "
                    f"passed={summary.get('passed')}")
        return EstimateReport(case=case, rows=frame, n_list=n_list, summary=summary)

    def save_form_snapshots(self, spec: TestFormSpec, resolutions: Sequence[int], out_dir: str) -> List[str]:
        """One form sampled on the support window of each resolution, in the binary snapshot layout"""
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        for n in sorted(set(resolutions)):
            form = make_test_form(spec, support_window(n, spec.center, spec.support_radius))
            name = f"form_seed{spec.seed}_r{spec.support_radius:g}_n{n}.bin"
            paths.append(save_snapshot(form, os.path.join(out_dir, name)))
        logger.info(f"Saved {len(paths)} snapshot(s) of {spec.label} to {out_dir}")
        return paths

    def sweep_cases(self) -> List[EstimateCase]:
        """Every case the full sweep runs, fractional ones at each configured (epsilon, p)"""
        cases = [EstimateCase('E1'), EstimateCase('E2'), EstimateCase('E3')]
        harness = config.harness
        if len(harness.epsilon_list) != len(harness.p_list):
            raise InvalidInputError("epsilon_list and p_list must pair up one to one")
        for case_id in ('E4', 'E5', 'E6', 'E8'):
            for epsilon, p in zip(harness.epsilon_list, harness.p_list):
                cases.append(EstimateCase(case_id, epsilon, p))
        cases.append(EstimateCase('E7'))
        return cases


def run_sweep(case: EstimateCase, family: Sequence[TestFormSpec], resolutions: Sequence[int]) -> EstimateReport:
    """Module-level entry: evaluate one case over a family at every resolution"""
    return VerificationManager().run_sweep(case, family, resolutions)
