import numpy as np
import pytest

import inertial_pd as ip
from inertial_pd.generators import (gen_l1l2, gen_nnls, l1l2_saddle,
                                    least_squares_problem,
                                    random_quadratic_with_saddle)
from inertial_pd.rng import Stream, fnv1a64, stream


def test_stream_determinism_and_independence():
    a1 = stream(1234, "A").normal(100)
    a2 = stream(1234, "A").normal(100)
    b = stream(1234, "B").normal(100)
    np.testing.assert_array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    # a different seed changes everything
    assert not np.array_equal(a1, stream(1235, "A").normal(100))


def test_stream_counter_continuation():
    s = Stream(42, "x")
    first = s.raw(10)
    second = s.raw(10)
    both = Stream(42, "x").raw(20)
    np.testing.assert_array_equal(np.concatenate([first, second]), both)


def test_uniform_range_and_moments():
    u = stream(7, "u").uniform(200000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 5e-3
    assert abs(u.var() - 1.0 / 12.0) < 5e-3


def test_normal_moments():
    z = stream(11, "z").normal(200001)  # odd count exercises pair truncation
    assert abs(z.mean()) < 1e-2
    assert abs(z.std() - 1.0) < 1e-2


def test_fnv1a64_known_value():
    # FNV-1a 64-bit of empty input is the offset basis
    assert fnv1a64("") == 0xCBF29CE484222325


def test_l1l2_bit_identical_regeneration():
    p1, x1 = gen_l1l2(30, 40, seed=99)
    p2, x2 = gen_l1l2(30, 40, seed=99)
    np.testing.assert_array_equal(x1, x2)
    np.testing.assert_array_equal(p1.rhs_b, p2.rhs_b)
    np.testing.assert_array_equal(p1.op_A.dense(), p2.op_A.dense())
    p3, _ = gen_l1l2(30, 40, seed=100)
    assert not np.array_equal(p1.rhs_b, p3.rhs_b)


def test_l1l2_planted_signal_properties():
    problem, x_true = gen_l1l2(60, 80, sparsity=0.05, seed=3)
    assert np.count_nonzero(x_true) == 4  # round(0.05 * 80)
    assert np.max(np.abs(x_true)) <= 2.0
    assert problem.lipschitz_f == 1.5
    assert problem.g.kind == "l1"


def test_l1l2_noise_norm_exact():
    problem, x_true = gen_l1l2(50, 70, noise_norm=1e-6, seed=8)
    # the generated noise itself: rescaling is exact up to rounding
    assert abs(np.linalg.norm(problem.meta["noise"]) - 1e-6) <= 1e-18
    # b assembles signal plus noise (checked at the cancellation-limited scale)
    w = problem.rhs_b - problem.op_A.matvec(x_true)
    assert np.linalg.norm(w - problem.meta["noise"]) <= 1e-12


def test_l1l2_forced_nonzero_warns():
    with pytest.warns(UserWarning, match="forcing one nonzero"):
        _, x_true = gen_l1l2(10, 12, sparsity=0.01, seed=1)
    assert np.count_nonzero(x_true) == 1


def test_l1l2_prox_split_same_objective():
    pq, xq = gen_l1l2(25, 35, seed=17, f_split="quadratic")
    pp, xp = gen_l1l2(25, 35, seed=17, f_split="prox")
    np.testing.assert_array_equal(xq, xp)
    assert pp.lipschitz_f == 0.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=35)
        assert pq.objective(x) == pytest.approx(pp.objective(x), rel=1e-12)


def test_l1l2_saddle_oracle_validates():
    problem, _ = gen_l1l2(30, 40, seed=5)
    saddle = l1l2_saddle(problem)
    stat, feas = ip.kkt_residual(problem, saddle.x_star, saddle.lambda_star)
    assert stat <= 1e-8 and feas <= 1e-8
    # works identically through the prox split
    problem2, _ = gen_l1l2(30, 40, seed=5, f_split="prox")
    saddle2 = l1l2_saddle(problem2)
    np.testing.assert_allclose(saddle2.x_star, saddle.x_star, atol=1e-7)


def test_nnls_full_density_dense_range():
    problem = gen_nnls(20, 30, density=1.0, seed=2)
    A = problem.meta["data_op"].dense()
    assert A.min() >= 0.0 and A.max() <= 0.1
    assert problem.op_A.shape == (0, 30)
    assert problem.dim_dual == 0
    assert problem.g.kind == "nonneg"


def test_nnls_density_fraction_within_one_percent():
    m, n = 400, 300  # m n >= 1e5
    problem = gen_nnls(m, n, density=0.3, seed=4)
    frac = problem.meta["data_op"].nnz_fraction()
    assert abs(frac - 0.3) <= 0.01


def test_nnls_zero_g_flag():
    problem = gen_nnls(10, 15, density=0.5, seed=6, g_kind="zero")
    assert problem.g.kind == "zero"


def test_nnls_lipschitz_is_opnorm_squared():
    problem = gen_nnls(25, 30, density=1.0, seed=9)
    A = problem.meta["data_op"].dense()
    assert problem.lipschitz_f == pytest.approx(np.linalg.norm(A, 2) ** 2,
                                                rel=1e-6)


def test_paper_scale_presets_exposed():
    from inertial_pd.generators import (L1L2_DESK_DIMS, L1L2_FULL_DIMS,
                                        NNLS_FULL_DIMS, L1L2_DEFAULTS)
    assert L1L2_FULL_DIMS == (1500, 2000)
    assert L1L2_DEFAULTS == {"mu": 1.5, "sparsity": 0.05, "noise_norm": 1e-6}
    assert (500, 1000) in NNLS_FULL_DIMS and (1500, 2000) in NNLS_FULL_DIMS
    assert L1L2_DESK_DIMS == (150, 200)


def test_quadratic_saddle_satisfies_kkt():
    for seed in range(5):
        problem, saddle = random_quadratic_with_saddle(12, 5, seed=seed)
        stat, feas = ip.kkt_residual(problem, saddle.x_star,
                                     saddle.lambda_star)
        assert stat <= 1e-8
        assert feas <= 1e-10


def test_least_squares_problem_checks_obs_length():
    from inertial_pd.problems import LinearMap
    with pytest.raises(ValueError):
        least_squares_problem(LinearMap(np.ones((3, 2))), np.ones(4), ip.ZERO)


def test_generator_validation():
    with pytest.raises(ValueError):
        gen_l1l2(5, 5, sparsity=0.0)
    with pytest.raises(ValueError):
        gen_nnls(5, 5, density=1.5)
    with pytest.raises(ValueError):
        gen_nnls(5, 5, g_kind="l1")
    with pytest.raises(ValueError):
        gen_l1l2(5, 5, f_split="other")
