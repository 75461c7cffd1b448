import json

import numpy as np
import pytest

import inertial_pd as ip
from inertial_pd.fileio import load_problem, save_l1l2, save_problem
from inertial_pd.generators import gen_l1l2, gen_nnls, l1l2_saddle


def test_l1l2_roundtrip_dense(tmp_path):
    problem, _ = gen_l1l2(20, 30, seed=44)
    saddle = l1l2_saddle(problem)
    prefix = tmp_path / "inst"
    save_l1l2(problem, prefix, rho=0.25, saddle=saddle)

    assert (tmp_path / "inst.mtx").exists()
    meta = json.loads((tmp_path / "inst.json").read_text())
    assert meta["schema"] == "inertial-pd-problem/1"
    assert meta["dim_primal"] == 30 and meta["dim_dual"] == 20
    assert meta["f"] == {"kind": "scaled_sqnorm", "weight": 1.5}
    assert meta["g"]["kind"] == "l1"

    loaded, rho, loaded_saddle = load_problem(prefix)
    assert rho == 0.25
    np.testing.assert_array_equal(loaded.rhs_b, problem.rhs_b)
    np.testing.assert_array_equal(loaded.op_A.dense(), problem.op_A.dense())
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.normal(size=30)
        assert loaded.objective(x) == pytest.approx(problem.objective(x))
        np.testing.assert_allclose(loaded.f_grad(x), problem.f_grad(x))
    np.testing.assert_allclose(loaded_saddle.x_star, saddle.x_star)
    assert loaded_saddle.opt_value == pytest.approx(saddle.opt_value)


def test_nnls_roundtrip_sparse_coordinate(tmp_path):
    problem = gen_nnls(25, 40, density=0.4, seed=3)
    prefix = tmp_path / "nnls"
    save_problem(problem, prefix, rho=1.0)

    header = (tmp_path / "nnls.mtx").read_text().splitlines()[0]
    assert "coordinate" in header

    loaded, _, saddle = load_problem(prefix)
    assert saddle is None
    assert loaded.dim_dual == 0
    assert loaded.g.kind == "nonneg"
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rng.normal(size=40)
        assert loaded.f_value(x) == pytest.approx(problem.f_value(x))
        np.testing.assert_allclose(loaded.f_grad(x), problem.f_grad(x),
                                   atol=1e-12)


def test_nnls_dense_roundtrip(tmp_path):
    problem = gen_nnls(10, 12, density=1.0, seed=5)
    prefix = tmp_path / "dense"
    save_problem(problem, prefix)
    header = (tmp_path / "dense.mtx").read_text().splitlines()[0]
    assert "array" in header
    loaded, _, _ = load_problem(prefix)
    x = np.ones(12)
    assert loaded.f_value(x) == pytest.approx(problem.f_value(x))


def test_zero_f_constrained_roundtrip(tmp_path):
    problem, _ = gen_l1l2(15, 25, seed=7, f_split="prox")
    prefix = tmp_path / "proxsplit"
    save_problem(problem, prefix, rho=2.0)
    loaded, rho, _ = load_problem(prefix)
    assert rho == 2.0
    assert loaded.lipschitz_f == 0.0
    assert loaded.g.kind == "l1_sql2"
    x = np.linspace(-1, 1, 25)
    assert loaded.objective(x) == pytest.approx(problem.objective(x))


def test_unknown_schema_rejected(tmp_path):
    problem = gen_nnls(5, 6, density=1.0, seed=1)
    prefix = tmp_path / "bad"
    save_problem(problem, prefix)
    meta = json.loads((tmp_path / "bad.json").read_text())
    meta["schema"] = "something-else"
    (tmp_path / "bad.json").write_text(json.dumps(meta))
    with pytest.raises(ValueError, match="schema"):
        load_problem(prefix)


def test_save_requires_representable_f(tmp_path):
    problem, _ = __import__("inertial_pd.generators",
                            fromlist=["x"]).random_quadratic_with_saddle(4, 2)
    with pytest.raises(ValueError, match="f_spec"):
        save_problem(problem, tmp_path / "nope")
