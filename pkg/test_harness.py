#!/usr/bin/env python3
"""
Tests for estimate evaluation, sweeps, mollifier studies, configuration and reporting
"""

import sys
import os
import json
import math
import tempfile
import copy
import logging

import numpy as np
import pandas as pd
import pytest

# Add src to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from cone_dbar.analysis.estimates import evaluate_estimate
from cone_dbar.analysis.convergence import friedrichs_study, summarize_sweep, study_window, cube_region
from cone_dbar.analysis.fields import bump, make_test_form
from cone_dbar.analysis.geometry import grid_frame
from cone_dbar.models.field_data import Grid, ScalarField, OneForm, TestFormSpec
from cone_dbar.models.geometry_data import Point
from cone_dbar.models.results import EstimateCase
from cone_dbar.exceptions import InvalidCaseError, InvalidInputError, UnderResolvedError, ConfigError
from cone_dbar.config.settings import config, parse_config_text
from cone_dbar.utils.report_generator import ReportGenerator
from cone_dbar.utils.snapshot import save_snapshot, load_snapshot
from cone_dbar.verification_manager import (VerificationManager, build_family, derive_seeds, support_window,
                                            run_sweep, ORIGIN)

SEED = 3


def create_form(seed: int = SEED, radius: float = 0.5, n: int = 16) -> OneForm:
    """Seeded form with vanishing order 2 on a support-fitted window"""
    spec = TestFormSpec(ORIGIN, radius, 2, 1, seed)
    return make_test_form(spec, support_window(n, ORIGIN, radius))


def create_rows() -> pd.DataFrame:
    return pd.DataFrame([
        {'seed': 1, 'support_radius': 0.5, 'n': 16, 'ratio': 1.0, 'status': 'ok'},
        {'seed': 1, 'support_radius': 0.5, 'n': 20, 'ratio': 1.1, 'status': 'ok'},
        {'seed': 1, 'support_radius': 0.25, 'n': 16, 'ratio': 0.9, 'status': 'ok'},
        {'seed': 1, 'support_radius': 0.25, 'n': 20, 'ratio': 1.0, 'status': 'ok'},
        {'seed': 2, 'support_radius': 0.25, 'n': 20, 'ratio': math.nan, 'status': 'degenerate'},
    ])


def test_estimate_case_constraints():
    with pytest.raises(InvalidCaseError) as error:
        EstimateCase('E4', 0.5, 2.0)
    assert "p > 4/(2-epsilon)" in str(error.value)
    with pytest.raises(InvalidCaseError):
        EstimateCase('E4')
    with pytest.raises(InvalidCaseError):
        EstimateCase('E9')
    assert EstimateCase('E4', 0.5, 4.0).label == "E4_eps0.5_p4"
    assert EstimateCase('E1').parameters == {}
    print("   ✅ p > 4/(2 - eps) enforced")


def test_zero_form_is_degenerate():
    grid = Grid(n=8, half_width=0.5)
    zero = OneForm.zeros(grid)
    for case in (EstimateCase('E1'), EstimateCase('E4', 0.5, 4.0), EstimateCase('E7')):
        assert evaluate_estimate(case, zero) == (0.0, 0.0)
    print("   ✅ f = 0 gives (0, 0)")


def test_estimate_ratios_are_scale_invariant():
    form = create_form()
    factor = 2.0 - 1.0j
    scaled = form.scaled(factor)
    for case in (EstimateCase('E1'), EstimateCase('E3'), EstimateCase('E4', 0.5, 4.0)):
        lhs, rhs = evaluate_estimate(case, form)
        assert lhs > 0 and rhs > 0 and math.isfinite(lhs / rhs)
        lhs_scaled, rhs_scaled = evaluate_estimate(case, scaled)
        assert lhs_scaled == pytest.approx(abs(factor) ** case.homogeneity * lhs, rel=1e-8)
        assert lhs_scaled / rhs_scaled == pytest.approx(lhs / rhs, rel=1e-8)
    print("   ✅ ratios invariant under complex scaling")


def test_e2_dominates_e1():
    form = create_form(seed=SEED + 1)
    lhs_1, rhs_1 = evaluate_estimate(EstimateCase('E1'), form)
    lhs_2, rhs_2 = evaluate_estimate(EstimateCase('E2'), form)
    assert lhs_2 >= lhs_1
    assert rhs_2 == pytest.approx(rhs_1, rel=1e-12)
    print("   ✅ E2 left side dominates E1")


def test_run_sweep_rows_and_summary():
    family = build_family(seed=SEED, n_forms=2, radii=[0.5, 0.25], vanishing_order=2, degree=1)
    assert len(family) == 4
    report = run_sweep(EstimateCase('E1'), family, [20, 16])

    rows = report.rows
    assert len(rows) == 8
    assert list(rows['status']) == ['ok'] * 8
    order = rows[['seed', 'support_radius', 'n']].to_records(index=False).tolist()
    assert order == sorted(order)
    assert report.n_list == [16, 20]
    assert math.isfinite(report.max_ratio) and report.max_ratio > 0

    summary = report.to_summary("E1_rows.csv")
    for key in ('case', 'parameters', 'n_list', 'max_ratio', 'stable', 'rows_csv'):
        assert key in summary
    assert summary['case'] == 'E1'
    print(f"   ✅ sweep max ratio {report.max_ratio:.4g}, stable={summary['stable']}")


def test_run_sweep_rejects_bad_input():
    family = build_family(seed=SEED, n_forms=1, radii=[0.5])
    with pytest.raises(InvalidInputError):
        run_sweep(EstimateCase('E1'), [], [16, 20])
    with pytest.raises(InvalidInputError):
        run_sweep(EstimateCase('E1'), family, [16])
    print("   ✅ empty family and single resolution rejected")


def test_sweep_records_row_errors():
    # support that leaves B: the row records the failure and the sweep goes on
    bad = TestFormSpec(ORIGIN, 1.2, 2, 1, seed=1)
    good = TestFormSpec(ORIGIN, 0.5, 2, 1, seed=2)
    report = VerificationManager().run_sweep(EstimateCase('E7'), [bad, good], [16, 20])
    statuses = list(report.rows['status'])
    assert sum(status.startswith('error') for status in statuses) == 2
    assert statuses.count('ok') == 2
    assert report.summary['failed_rows'] == 2
    print("   ✅ failing rows recorded without stopping the sweep")


def test_summarize_sweep_verdicts():
    summary = summarize_sweep(create_rows(), [16, 20])
    assert summary['max_ratio'] == pytest.approx(1.1)
    assert summary['drift'] == pytest.approx(0.1)
    assert summary['stable'] and summary['trend_ok'] and summary['passed']
    assert summary['degenerate_rows'] == 1

    growing = create_rows()
    growing.loc[3, 'ratio'] = 2.0
    summary = summarize_sweep(growing, [16, 20])
    assert not summary['trend_ok']
    assert not summary['passed']
    print("   ✅ stability and trend verdicts")


def test_friedrichs_study_on_multiplication():
    grid = Grid(n=16, half_width=0.9)
    f = ScalarField(grid, bump(grid, np.zeros(4), 0.3))
    table = friedrichs_study(f, 'multiply', [0.4, 0.3, 0.25])
    assert len(table.errors) == 3
    assert table.errors[-1] < table.errors[0]
    assert table.step_violations == 0

    with pytest.raises(UnderResolvedError):
        friedrichs_study(f, 'multiply', [0.4, 0.1])
    with pytest.raises(InvalidInputError):
        friedrichs_study(f, 'multiply', [0.3, 0.4])
    with pytest.raises(InvalidInputError):
        friedrichs_study(f, 'grad', [0.4, 0.3])
    with pytest.raises(InvalidInputError):
        friedrichs_study(OneForm.zeros(grid), 'L1', [0.4, 0.3])
    print("   ✅ mollifier study on a zeroth-order operator")


def test_friedrichs_window_resolves_default_eps():
    eps_list = config.harness.friedrichs_eps
    grid, depth = study_window(config.harness.friedrichs_n, eps_list)
    assert 2.0 * grid.h <= min(eps_list)
    assert depth >= grid.h
    assert depth + max(eps_list) + 2.0 * grid.h == pytest.approx(grid.half_width)
    region = cube_region(grid, depth)
    assert region.any() and not region[0].any()

    with pytest.raises(UnderResolvedError):
        study_window(16, [0.4, 0.05])
    print(f"   ✅ h = {grid.h:.4g} resolves eps down to {min(eps_list):g}")


def test_friedrichs_studies_converge():
    rows, summary = VerificationManager().friedrichs(seed=SEED, n=32, eps_list=[0.1, 0.05, 0.025], n_fields=1)
    assert summary['studies'] == 7
    assert summary['failed_studies'] == 0
    assert summary['step_violations'] == 0
    assert all(summary['per_operator_passed'].values())
    assert summary['worst_final_ratio'] <= 0.25
    assert summary['min_observed_order'] >= 1.0
    assert summary['passed']
    assert len(rows) == 7 * 3
    print(f"   ✅ every operator converges, min order {summary['min_observed_order']:.3g}")


def test_friedrichs_default_eps_list_passes():
    rows, summary = VerificationManager().friedrichs(seed=SEED, n_fields=1)
    assert summary['eps_list'] == sorted(config.harness.friedrichs_eps, reverse=True)
    assert summary['n'] == config.harness.friedrichs_n
    assert 2.0 * summary['h'] <= min(config.harness.friedrichs_eps)
    assert summary['studies'] == 7 and summary['failed_studies'] == 0
    assert all(summary['per_operator_passed'].values())
    assert summary['passed']
    assert len(rows) == 7 * len(config.harness.friedrichs_eps)
    print(f"   ✅ eps {summary['eps_list']} at n = {summary['n']}, worst final/initial "
          f"{summary['worst_final_ratio']:.3g}")


def test_friedrichs_manager_records_unresolvable_runs():
    rows, summary = VerificationManager().friedrichs(seed=SEED, n=16, eps_list=[0.4, 0.05], n_fields=1)
    # eight-fold eps range does not fit 16 points per axis
    assert summary['studies'] == 0
    assert summary['failed_studies'] == 7
    assert not summary['passed']
    assert not any(summary['per_operator_passed'].values())
    assert list(rows.columns) == ['field', 'operator', 'eps', 'error', 'status']
    print("   ✅ unresolvable studies are logged and recorded")


def test_check_adjoint_passes_below_floor():
    system = VerificationManager()
    summary = system.check_adjoint(seed=SEED, n_list=[12, 16], n_pairs=2)
    assert summary['below_floor']
    assert summary['passed']
    assert len(system.last_rows) == 4
    print(f"   ✅ adjoint residual max {summary['max_residual']:.3g}")


def test_check_operators_algebra():
    summary = VerificationManager().check_operators(n=12, seed=SEED, n_functions=2, annulus_n=12)
    assert summary['ddbar_max_rel'] <= 1e-12
    assert summary['commutator_antisymmetry_error'] <= 1e-12
    assert summary['n'] == 12 and summary['annulus_n'] == 12
    assert sorted(summary['annulus_checks']) == ['commutator', 'dbar', 'star']
    assert sorted(summary['refinement']['drift']) == ['dbar', 'star']
    print("   ✅ operator algebra on the full grid")


def test_parse_config_text():
    parsed = parse_config_text("n = 16  # grid\nradii = 0.5, 0.25\ntolerances = stability:0.3, ddbar:1e-11\n")
    assert parsed.grid.n == 16
    assert parsed.harness.radii == [0.5, 0.25]
    assert parsed.harness.stability_tol == 0.3
    assert parsed.harness.ddbar_rtol == 1e-11
    assert config.grid.n == 32  # the global default is untouched

    for text, key in [("bogus = 1", "bogus"), ("n = abc", "n"), ("n = 15", "n"),
                      ("tolerances = foo:1", "tolerances.foo"), ("p_list = 1.5", "p_list"),
                      ("just words", "just words")]:
        with pytest.raises(ConfigError) as error:
            parse_config_text(text)
        assert error.value.key == key
    print("   ✅ configuration parsing and diagnostics")


def test_default_config_file_parses():
    path = os.path.join(os.path.dirname(__file__), 'default.cfg')
    with open(path, 'r', encoding='utf-8') as f:
        parsed = parse_config_text(f.read())
    assert parsed.grid.n == 32 and parsed.grid.refinement_n == 48
    assert len(parsed.harness.epsilon_list) == len(parsed.harness.p_list)
    for epsilon, p in zip(parsed.harness.epsilon_list, parsed.harness.p_list):
        EstimateCase('E4', epsilon, p)
    print("   ✅ default.cfg is valid")


def test_report_generator_is_deterministic():
    with tempfile.TemporaryDirectory() as out_dir:
        reports = ReportGenerator(out_dir)
        summary = {'case': 'E1', 'max_ratio': np.float64(1.25), 'stable': np.bool_(True), 'passed': True,
                   'n_list': [16, 20], 'missing': math.nan}
        path = reports.save_summary_json(summary, 'E1')
        with open(path, 'rb') as f:
            first = f.read()
        reports.save_summary_json(summary, 'E1')
        with open(path, 'rb') as f:
            assert f.read() == first
        assert json.loads(first)['missing'] is None

        csv_path = reports.save_rows_csv(create_rows(), 'E1')
        assert os.path.basename(csv_path) == 'E1_rows.csv'
        assert pd.read_csv(csv_path).shape == (5, 5)

        collected = reports.collect_summaries()
        assert [s['summary_file'] for s in collected] == ['E1_summary.json']
        with open(reports.save_report(collected), 'r', encoding='utf-8') as f:
            assert json.load(f)['all_passed']
    print("   ✅ reports are byte-reproducible")


def test_snapshot_round_trip():
    grid = Grid(n=4, half_width=0.5)
    form = create_form(n=16)
    small = OneForm(grid, np.arange(256).reshape(grid.shape) * (1 + 2j), np.ones(grid.shape))
    with tempfile.TemporaryDirectory() as out_dir:
        path = save_snapshot(small, os.path.join(out_dir, 'form.bin'))
        loaded = load_snapshot(path)
        assert loaded.grid == grid and loaded.representation == small.representation
        assert np.array_equal(loaded.first, small.first) and np.array_equal(loaded.second, small.second)

        scalar_path = save_snapshot(form.component(1), os.path.join(out_dir, 'scalar.bin'))
        assert np.array_equal(load_snapshot(scalar_path).values, form.first)

        bad = os.path.join(out_dir, 'bad.bin')
        with open(bad, 'wb') as f:
            f.write(b'XXXX' + bytes(40))
        with pytest.raises(InvalidInputError):
            load_snapshot(bad)
    print("   ✅ binary snapshots")


def test_derived_seeds_are_reproducible():
    assert derive_seeds(SEED, 5) == derive_seeds(SEED, 5)
    assert len(set(derive_seeds(SEED, 5))) == 5
    print("   ✅ seeds derive from one master seed")


def run_cli(monkeypatch, args: list, out_dir: str) -> int:
    """main.main() with artifacts and the log file kept under out_dir"""
    import main
    saved = copy.deepcopy(config)
    config.harness.logs_dir = os.path.join(out_dir, 'logs')
    monkeypatch.setattr(sys, 'argv', ['main.py'] + args + ['--out', out_dir, '--log-level', 'WARNING'])
    try:
        return main.main()
    finally:
        for group in ('geometry', 'grid', 'norms', 'harness'):
            setattr(config, group, getattr(saved, group))
        config.log_level = saved.log_level
        root = logging.getLogger()
        for handler in list(root.handlers):
            handler.close()
            root.removeHandler(handler)


def test_cli_rejects_inadmissible_case(monkeypatch):
    with tempfile.TemporaryDirectory() as out_dir:
        assert run_cli(monkeypatch, ['estimate', 'E4', '--epsilon', '0.5', '--p', '2'], out_dir) == 2
        assert os.listdir(os.path.join(out_dir, 'logs'))
    print("   ✅ estimate E4 --epsilon 0.5 --p 2 exits with 2")


def test_unpaired_config_lists_exit_with_usage_error(monkeypatch):
    with pytest.raises(ConfigError) as error:
        parse_config_text("p_list = 3, 4")
    assert error.value.key == 'p_list'
    assert parse_config_text("epsilon_list = 0.5\np_list = 4").harness.p_list == [4.0]

    with tempfile.TemporaryDirectory() as out_dir:
        path = os.path.join(out_dir, 'unpaired.cfg')
        with open(path, 'w', encoding='utf-8') as f:
            f.write("epsilon_list = 0.5\n")
        assert run_cli(monkeypatch, ['check-geometry', '--config', path], out_dir) == 2
    assert len(config.harness.epsilon_list) == len(config.harness.p_list)
    print("   ✅ epsilon_list without a matching p_list exits with 2")


def test_cli_check_geometry_is_byte_reproducible(monkeypatch):
    with tempfile.TemporaryDirectory() as out_dir:
        contents, codes = [], []
        for _ in range(2):
            codes.append(run_cli(monkeypatch, ['check-geometry', '--n', '16', '--seed', '7'], out_dir))
            with open(os.path.join(out_dir, 'check_geometry_summary.json'), 'rb') as f:
                contents.append(f.read())
        assert codes[0] == codes[1] and codes[0] in (0, 1)
        assert contents[0] == contents[1]
        assert os.path.isdir(os.path.join(out_dir, 'logs'))
    print("   ✅ check-geometry --n 16 --seed 7 writes identical JSON twice")


def test_sweep_reuses_windows_and_frames():
    grid_frame.cache_clear()
    family = build_family(seed=SEED, n_forms=3, radii=[0.5, 0.25], vanishing_order=2, degree=1)
    report = run_sweep(EstimateCase('E7'), family, [16, 20])
    # one window per (radius, n), each built and framed once
    assert grid_frame.cache_info().misses == 4
    assert support_window(16, ORIGIN, 0.5) is support_window(16, ORIGIN, 0.5)
    order = report.rows[['seed', 'support_radius', 'n']].to_records(index=False).tolist()
    assert order == sorted(order)
    assert list(report.rows['status']) == ['ok'] * 12
    print(f"   ✅ {len(report.rows)} rows on 4 frames")


def test_weighted_subelliptic_case():
    form = create_form()
    lhs_4, rhs_4 = evaluate_estimate(EstimateCase('E4', 0.5, 4.0), form)
    lhs_8, rhs_8 = evaluate_estimate(EstimateCase('E8', 0.5, 4.0), form)
    assert lhs_8 == pytest.approx(lhs_4 ** 2, rel=1e-10)
    # gamma < 1 on the support, so the weighted terms sit below the unweighted ones
    assert 0.0 < rhs_8 <= rhs_4 ** 2
    assert EstimateCase('E8', 0.5, 4.0).homogeneity == 2

    labels = [case.label for case in VerificationManager().sweep_cases()]
    assert [label for label in labels if label.startswith('E8')] == [
        EstimateCase('E8', e, p).label for e, p in zip(config.harness.epsilon_list, config.harness.p_list)]
    print(f"   ✅ E8 ratio {lhs_8 / rhs_8:.4g}")


def test_e1_stable_under_refinement_off_the_origin():
    center = Point(0.225 + 0.225j, 0.225 + 0.225j)
    ratios = []
    for n in (32, 48):
        grid = support_window(n, center, 0.15, margin_cells=2)
        for seed in derive_seeds(SEED, 2):
            form = make_test_form(TestFormSpec(center, 0.15, 0, 1, seed), grid)
            gamma = np.broadcast_to(grid.gamma, grid.shape)[form.support]
            assert gamma.min() >= 0.29 and gamma.max() <= 0.61
            lhs, rhs = evaluate_estimate(EstimateCase('E1'), form)
            ratios.append(lhs / rhs)
    for coarse, fine in zip(ratios[:2], ratios[2:]):
        assert abs(coarse - fine) <= 0.1 * fine
    print(f"   ✅ E1 ratios {', '.join(f'{r:.4g}' for r in ratios)}")


def test_form_snapshots_are_written():
    spec = build_family(seed=SEED, n_forms=1, radii=[0.5])[0]
    with tempfile.TemporaryDirectory() as out_dir:
        paths = VerificationManager().save_form_snapshots(spec, [20, 16], os.path.join(out_dir, 'snapshots'))
        assert [os.path.basename(p) for p in paths] == [
            f"form_seed{spec.seed}_r0.5_n16.bin", f"form_seed{spec.seed}_r0.5_n20.bin"]
        loaded = load_snapshot(paths[0])
        expected = make_test_form(spec, support_window(16, ORIGIN, 0.5))
        assert loaded.grid == expected.grid
        assert np.array_equal(loaded.first, expected.first)
        assert np.array_equal(loaded.second, expected.second)

    import main
    assert main.build_parser().parse_args(['sweep', '--snapshot']).snapshot
    assert not main.build_parser().parse_args(['estimate', 'E1']).snapshot
    print("   ✅ one snapshot per resolution")


if __name__ == "__main__":
    print("=" * 60)
    print("CONE DBAR - HARNESS TESTS")
    print("=" * 60)

    tests = [test_estimate_case_constraints, test_zero_form_is_degenerate, test_estimate_ratios_are_scale_invariant,
             test_e2_dominates_e1, test_run_sweep_rows_and_summary, test_run_sweep_rejects_bad_input,
             test_sweep_records_row_errors, test_summarize_sweep_verdicts, test_friedrichs_study_on_multiplication,
             test_friedrichs_window_resolves_default_eps, test_friedrichs_studies_converge,
             test_friedrichs_default_eps_list_passes,
             test_friedrichs_manager_records_unresolvable_runs, test_check_adjoint_passes_below_floor,
             test_check_operators_algebra, test_parse_config_text, test_default_config_file_parses,
             test_report_generator_is_deterministic, test_snapshot_round_trip, test_derived_seeds_are_reproducible,
             test_sweep_reuses_windows_and_frames, test_weighted_subelliptic_case,
             test_e1_stable_under_refinement_off_the_origin, test_form_snapshots_are_written]
    failures = 0
    for test in tests:
        print(f"\n{test.__name__}")
        try:
            test()
        except Exception as e:
            failures += 1
            print(f"   ❌ {e}")

    print("\n" + ("🎉 All harness tests passed!" if not failures else f"❌ {failures} test(s) failed."))
    print("=" * 60)
    sys.exit(1 if failures else 0)
