import json

import numpy as np
import pytest

from colorhomography.als import AlsConfig, als_solve, solve_h, solve_shading
from colorhomography.errors import InputError, NumericWarning
from colorhomography.homography import canonical
from colorhomography.synthetic import SynthSpec, generate_synthetic


def synthetic_problem(seed, noise=0.0):
    chart = generate_synthetic(SynthSpec(noise_sigma=noise, seed=seed))
    return chart.measurement.observed, chart.measurement.reference, chart


def test_solve_shading_examples(rng):
    a = rng.uniform(0.1, 1, (6, 3))
    np.testing.assert_allclose(solve_shading(a, a), 1.0)
    np.testing.assert_allclose(solve_shading(a, 2 * a), 2.0)
    d = solve_shading([[1, 0, 0]], [[3, 4, 0]])
    assert d[0] == pytest.approx(3.0)


def test_solve_shading_floor_and_zero_rows():
    d = solve_shading([[1, 0, 0], [0, 1, 0]], [[-1, 0, 0], [0, 2, 0]], floor=1e-8)
    np.testing.assert_allclose(d, [1e-8, 2.0])
    with pytest.warns(NumericWarning):
        d = solve_shading([[0, 0, 0], [1, 1, 1]], [[1, 1, 1], [1, 1, 1]])
    assert d[0] == 1e-8


def test_solve_h_examples(rng):
    da = rng.uniform(0.1, 1, (10, 3))
    h, rank = solve_h(da, da)
    assert rank == 3
    np.testing.assert_allclose(h, np.eye(3), atol=1e-12)
    g = rng.normal(size=(3, 3))
    np.testing.assert_allclose(solve_h(da, da @ g)[0], g, atol=1e-10)


def test_solve_h_matches_normal_equations(rng):
    da = rng.uniform(0.1, 1, (30, 3))
    b = rng.uniform(0.1, 1, (30, 3))
    oracle = np.linalg.inv(da.T @ da) @ da.T @ b
    h, _ = solve_h(da, b)
    assert np.linalg.norm(da @ h - b) == pytest.approx(np.linalg.norm(da @ oracle - b), abs=1e-8)
    np.testing.assert_allclose(h, oracle, atol=1e-8)


def test_solve_h_rank_deficient_reports_rank(rng):
    col = rng.uniform(0.1, 1, (8, 1))
    da = np.hstack([col, 2 * col, rng.uniform(0.1, 1, (8, 1))])
    _, rank = solve_h(da, rng.uniform(size=(8, 3)))
    assert rank == 2


def test_als_identity_problem(rng):
    a = rng.uniform(0.1, 1, (12, 3))
    res = als_solve(a, a)
    assert res.iterations == 1 and res.converged
    np.testing.assert_allclose(res.h, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(res.d, 1.0, atol=1e-12)
    assert res.residuals[-1] < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_als_recovers_noiseless_ground_truth(seed):
    a, b, chart = synthetic_problem(seed)
    res = als_solve(a, b)
    assert res.residuals[-1] < 1e-8 * np.linalg.norm(b)
    assert np.linalg.norm(canonical(res.h) - canonical(chart.correction)) < 1e-6
    # D and H trade one global scale: d_i * s_i is constant across patches.
    ratio = res.d * chart.shading
    np.testing.assert_allclose(ratio / ratio[0], 1.0, atol=1e-6)


def test_als_noisy_instance_with_literal_stopping_rule():
    a, b, _ = synthetic_problem(3, noise=0.01)
    res = als_solve(a, b, AlsConfig(epsilon=1e-6, max_iterations=100))
    assert res.converged and res.iterations <= 100
    assert np.all(np.diff(res.residuals) <= 1e-12)


def test_als_accumulation_reproduces_estimate():
    a, b, _ = synthetic_problem(1, noise=0.01)
    res = als_solve(a, b)
    np.testing.assert_allclose(res.d[:, None] * a @ res.h, res.estimate, atol=1e-9)


def test_als_gauge_invariance_to_global_scale():
    a, b, _ = synthetic_problem(2)
    h1 = canonical(als_solve(a, b).h)
    h2 = canonical(als_solve(7.5 * a, b).h)
    assert np.linalg.norm(h1 - h2) < 1e-8


def test_als_shading_invariance(rng):
    a, b, _ = synthetic_problem(4)
    h1 = canonical(als_solve(a, b).h)
    shaded = rng.uniform(0.1, 10, (len(a), 1)) * a
    assert np.linalg.norm(canonical(als_solve(shaded, b).h) - h1) < 1e-6


def test_als_result_json_schema():
    a, b, _ = synthetic_problem(0)
    out = json.loads(json.dumps(als_solve(a, b).to_dict()))
    assert set(out) == {"H", "D", "residuals", "iterations", "converged"}
    assert len(out["H"]) == 9 and len(out["D"]) == len(a)


def test_als_input_validation(rng):
    with pytest.raises(InputError, match="insufficient"):
        als_solve(np.ones((3, 3)), np.ones((3, 3)))
    with pytest.raises(InputError):
        als_solve(np.ones((5, 3)), np.ones((6, 3)))
    with pytest.raises(InputError):
        AlsConfig(epsilon=0)
    with pytest.raises(InputError):
        AlsConfig(max_iterations=0)


def test_als_flags_rank_deficient_input(rng):
    a = np.outer(rng.uniform(0.2, 1, 8), [0.3, 0.5, 0.2]) + np.outer(rng.uniform(0, 1, 8), [0.1, 0, 0.4])
    b = rng.uniform(0.1, 1, (8, 3))
    with pytest.warns(NumericWarning, match="rank-deficient"):
        res = als_solve(a, b, AlsConfig(max_iterations=20))
    assert res.rank_deficient
