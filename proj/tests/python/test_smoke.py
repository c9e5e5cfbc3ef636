import math

import numpy as np
import pytest

import apcre


def test_version():
    assert apcre.__version__ == "0.1.0"


def test_grid_and_design_shapes():
    g = apcre.build_grid(4, 3)
    assert g["a"] == 4 and g["p"] == 3 and g["c"] == 6
    assert len(g["cells"]) == 12
    assert g["cells"][0] == (1, 1, 4)
    assert g["cells"][-1] == (4, 3, 3)

    d = apcre.design(4, 3, random=["cohort"])
    W = np.asarray(d["W"])
    Z = np.asarray(d["Z"]["cohort"])
    assert W.shape == (12, 1 + 3 + 2)
    assert Z.shape == (12, 6)
    assert np.allclose(Z.sum(axis=1), 1.0)
    assert apcre.intercept_redundancy_check(Z) is True
    assert apcre.rank_deficiency(np.asarray(d["combined"])) == 2


def test_rank_deficiency_ladder():
    W = apcre.fe_design(5, 4, ["age", "period", "cohort"])
    assert apcre.rank_deficiency(W) == 1
    both = apcre.design(5, 4, random=["period", "cohort"])
    assert apcre.rank_deficiency(np.asarray(both["combined"])) == 3


def test_null_space_dimension():
    W = apcre.fe_design(6, 5, ["age", "period", "cohort"])
    N = np.asarray(apcre.null_space_basis(W))
    assert N.shape == (19, 1)
    assert np.max(np.abs(W @ N)) < 1e-9


def test_orthonormal_poly_basis():
    B = np.asarray(apcre.orthonormal_poly_basis(6))
    assert np.allclose(B.T @ B, np.eye(6), atol=1e-12)
    assert np.allclose(B[:, 0], 1.0 / math.sqrt(6.0))


def test_decompose_effect():
    d = apcre.decompose_effect([1.0, 2.0, 3.0])
    assert d["level"] == pytest.approx(2.0)
    assert d["linear_slope"] == pytest.approx(1.0)
    assert np.max(np.abs(np.asarray(d["nonlinear"]))) < 1e-12


def test_quadratic_decomposition_shares():
    q = apcre.quadratic_decomposition(6, 5)
    assert q["total_sq"] == pytest.approx(2.4696970, abs=1e-6)
    assert q["frac_intercept_age"] == pytest.approx(0.39877, abs=1e-4)
    assert q["frac_period"] == pytest.approx(0.06442, abs=1e-4)
    assert q["frac_cohort"] == pytest.approx(0.53681, abs=1e-4)
    total = q["frac_intercept_age"] + q["frac_period"] + q["frac_cohort"]
    assert total == pytest.approx(1.0)


def test_penalized_solve_pins_block():
    y = apcre.generate_dataset(m=0.5, replicate=0)
    fit = apcre.solve_penalized(6, 5, random=["cohort"], lambdas={"cohort": 10.0}, y=y)
    cohort = fit["blocks"]["cohort"]
    assert cohort["random"] is True
    dec = cohort["decomposition"]
    assert abs(dec["level"]) < 1e-9
    assert abs(dec["linear_slope"]) < 1e-9


def test_fit_on_generated_data():
    y = apcre.generate_dataset(m=1.0, replicate=0)
    fit = apcre.fit(6, 5, random=["period", "cohort"], y=y)
    assert fit["variance"]["sigma2_period"] < 1e-4
    assert fit["variance"]["sigma2_cohort"] > 0.01
    slope = fit["effects"]["blocks"]["cohort"]["decomposition"]["linear_slope"]
    assert slope > 0.05
    assert len(fit["convergence"]["starts"]) == 5


def test_infinite_penalty_pins_block_exactly():
    y = apcre.generate_dataset(m=0.0, replicate=3)
    fit = apcre.solve_penalized(6, 5, random=["cohort"], lambdas={"cohort": math.inf}, y=y)
    vals = np.asarray(fit["blocks"]["cohort"]["values"])
    assert np.all(vals == 0.0)


def test_verify_sweep_small():
    rep = apcre.verify_single_re_sweep(3, 4, 3, 4, [0.1, 1.0, 10.0])
    assert rep["pass"] is True
    assert rep["rows"] == 12
    assert rep["overall_max_linear"] < 1e-9
    assert rep["overall_max_intercept"] < 1e-9


def test_transfer_property():
    r = apcre.transfer_property_check(6, 5, n_trials=50, seed=1)
    assert r["pass"] is True
    assert r["trials"] == 50


def test_profiled_rl_dominates_fixed_error_variance():
    y = apcre.generate_dataset(m=0.35, replicate=4)
    prof = apcre.profiled_rl(6, 5, y, 0.5, 2.0)
    grid = np.logspace(-6, 2, 200)
    vals = [
        apcre.restricted_loglik(
            6, 5, ["period", "cohort"], y, sigma2_e=v,
            sigma2_re={"period": 0.5, "cohort": 2.0},
        )
        for v in grid
    ]
    best = max(vals)
    assert prof >= best - 1e-12
    assert prof == pytest.approx(best, abs=1e-3)


def test_surface_scan_finds_competing_maxima():
    y = apcre.generate_dataset(m=0.0, replicate=0)
    surf = apcre.scan_rl_surface(6, 5, y)
    assert len(surf["axis_row"]) == 10
    assert len(surf["maxima"]) >= 2
    top = surf["maxima"][0]
    assert top["sigma2_cohort"] == 0.0
    assert top["sigma2_period"] > 0.0
