import math

import numpy as np
import pytest

import rashomon as rs


def small(seed=3):
    cfg = rs.GenConfig()
    cfg.n_train = 300
    cfg.n_test = 400
    cfg.seed = seed
    return rs.generate(cfg)


def test_generate_shapes_and_determinism():
    train, test = small()
    assert train.column_names == ["y", "x1", "x2", "x3"]
    assert train.values.shape == (300, 4)
    assert len(test) == 400
    again, _ = small()
    assert train == again
    assert rs.from_csv(train.to_csv()) == train


def test_fit_and_evaluate_quartet():
    train, test = small()
    models = [
        rs.fit_tree(train),
        rs.fit_linear(train),
        rs.fit_network(train, max_epochs=500),
        rs.fit_forest(train, n_trees=20),
    ]
    report = rs.evaluate(models, test)
    assert [m.label for m in report.models] == [m.label for m in models]
    assert report.r2_spread() >= 0
    pred = models[1].predict(test.features)
    assert pred.shape == (400,)
    assert np.allclose(pred, models[1].predict_dataset(test))


def test_explanations():
    train, test = small()
    lin = rs.fit_linear(train)
    imp = rs.permutation_importance(lin, test)
    assert set(imp) == {"x1", "x2", "x3"}
    assert imp["x1"] > imp["x3"]
    prof = rs.pdp_ci(lin, test, "x1", grid_size=11, n_boot=10)
    assert len(prof.grid) == len(prof.pd) == len(prof.ci_lo) == 11
    svg = rs.plot.pdp_grid([prof])
    assert svg.startswith("<?xml") and svg.endswith("</svg>\n")
    corr = rs.residual_correlation([lin, rs.fit_tree(train)], test)
    assert corr.shape == (2, 2)


def test_couple():
    alpha = rs.couple.find_couple_exponent()
    assert alpha == pytest.approx((math.sqrt(3) - 1) / 2, abs=1e-10)
    b1, mse_lin = rs.couple.best_linear(alpha)
    b0, mse_stump = rs.couple.best_stump(alpha)
    assert b1 == pytest.approx(1.2679492, abs=1e-7)
    assert b0 == pytest.approx(0.7320508, abs=1e-7)
    assert abs(mse_lin - mse_stump) < 1e-12


def test_errors_map_to_python_exceptions():
    with pytest.raises(rs.ParseError):
        rs.from_csv("y;x1\n1;2\n3\n")
    cfg = rs.GenConfig()
    cfg.rho = 1.5
    with pytest.raises(rs.InvalidArgument):
        rs.generate(cfg)


def test_model_round_trip(tmp_path):
    train, test = small()
    tree = rs.fit_tree(train, max_depth=2, min_split=20)
    path = str(tmp_path / "tree.json")
    rs.save_model(tree, path)
    back = rs.load_model(path)
    assert back.family == "tree"
    assert np.array_equal(back.predict(test.features), tree.predict(test.features))
