import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inertial_pd.prox import (MoreauParams, ProxFunction, l1, l1_plus_sql2,
                              moreau_grad, moreau_value, nonneg, prox_l1,
                              prox_nonneg, sql2, ZERO)


def golden_min(fn, lo, hi, iters=120):
    """Brute-force 1-D minimizer: coarse grid, golden-section refinement,
    and a final parabolic polish (golden section alone resolves the argmin
    of a smooth minimum only to about sqrt(eps))."""
    grid = np.linspace(lo, hi, 2001)
    vals = [fn(u) for u in grid]
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    for _ in range(iters):
        if fn(c) < fn(d):
            b, d = d, c
            c = b - invphi * (b - a)
        else:
            a, c = c, d
            d = a + invphi * (b - a)
    mid = 0.5 * (a + b)
    # the test objectives are piecewise quadratic with their only kink at 0:
    # away from it a three-point parabola locates the vertex exactly
    h = 0.009
    if abs(mid) > 2.0 * h:
        f0, f1, f2 = fn(mid - h), fn(mid), fn(mid + h)
        denom = f0 - 2.0 * f1 + f2
        if np.isfinite(denom) and denom > 0.0:
            return mid - 0.5 * h * (f2 - f0) / denom
    candidates = [0.0, mid] if lo <= 0.0 <= hi else [mid]
    return min(candidates, key=fn)


def test_prox_l1_values():
    assert prox_l1(np.array([2.0]), 0.5) == pytest.approx(1.5)
    assert prox_l1(np.array([0.3]), 0.5) == pytest.approx(0.0)
    assert prox_l1(np.array([-2.0]), 0.5) == pytest.approx(-1.5)


def test_prox_l1_rejects_negative_threshold():
    with pytest.raises(ValueError):
        prox_l1(np.array([1.0]), -0.1)


def test_prox_nonneg_values():
    z = np.array([0.5, 2.0, 0.0])
    np.testing.assert_array_equal(prox_nonneg(z), z)
    np.testing.assert_array_equal(prox_nonneg(np.array([-1.0, 2.0])),
                                  np.array([0.0, 2.0]))


def test_prox_nonneg_idempotent():
    rng = np.random.default_rng(3)
    z = rng.normal(size=1000)
    once = prox_nonneg(z)
    np.testing.assert_array_equal(prox_nonneg(once), once)


def test_moreau_grad_values():
    g = l1(1.0)
    p = MoreauParams(1.0)
    assert moreau_grad(g, p, np.array([2.0])) == pytest.approx(1.0)
    assert moreau_grad(g, p, np.array([0.0])) == pytest.approx(0.0)
    assert moreau_grad(g, p, np.array([0.25])) == pytest.approx(0.25)


@given(st.floats(-5, 5), st.floats(-5, 5),
       st.floats(0.1, 3.0), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
@settings(max_examples=200)
def test_moreau_grad_lipschitz(x, y, gamma, w, mu):
    g = l1_plus_sql2(w, mu)
    p = MoreauParams(gamma)
    gx = moreau_grad(g, p, np.array([x]))
    gy = moreau_grad(g, p, np.array([y]))
    assert abs(gx[0] - gy[0]) <= (1.0 / gamma) * abs(x - y) + 1e-12


@pytest.mark.parametrize("g", [l1(1.0), l1(0.3), sql2(2.0),
                               l1_plus_sql2(0.7, 1.3), nonneg()])
@pytest.mark.parametrize("x", [-2.3, -0.4, 0.0, 0.8, 3.1])
def test_envelope_value_matches_direct_minimization(g, x):
    gamma = 0.37
    p = MoreauParams(gamma)

    def objective(u):
        return g.value(np.array([u])) + (x - u) ** 2 / (2.0 * gamma)

    lo, hi = (0.0, abs(x) + 2.0) if g.kind == "nonneg" else (-abs(x) - 2.0, abs(x) + 2.0)
    if g.kind == "nonneg" and x < 0:
        lo = 0.0
    u_star = golden_min(objective, lo, hi)
    assert moreau_value(g, p, np.array([x])) == pytest.approx(
        objective(u_star), abs=1e-8)


@pytest.mark.parametrize("z", [-3.0, -0.2, 0.0, 0.5, 4.0])
@pytest.mark.parametrize("s,w,mu", [(1.0, 1.0, 1.5), (0.3, 0.5, 0.1),
                                    (2.0, 0.0, 1.0), (0.7, 2.0, 0.0)])
def test_composite_prox_against_bruteforce(z, s, w, mu):
    g = l1_plus_sql2(w, mu)

    def objective(u):
        return g.value(np.array([u])) + (u - z) ** 2 / (2.0 * s)

    u_star = golden_min(objective, -abs(z) - s * w - 2.0, abs(z) + s * w + 2.0)
    got = g.prox(np.array([z]), s)[0]
    assert got == pytest.approx(u_star, abs=1e-8)
    # shrink-then-scale closed form
    assert got == pytest.approx(prox_l1(np.array([z]), s * w)[0] / (1.0 + s * mu))


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8),
       st.lists(st.floats(-10, 10), min_size=1, max_size=8),
       st.sampled_from(["zero", "l1", "sql2", "nonneg", "l1_sql2"]),
       st.floats(0.05, 5.0))
@settings(max_examples=200)
def test_prox_firmly_nonexpansive(xs, ys, kind, step):
    n = min(len(xs), len(ys))
    x, y = np.array(xs[:n]), np.array(ys[:n])
    g = ProxFunction(kind, l1_weight=0.8, sql2_weight=0.6)
    px, py = g.prox(x, step), g.prox(y, step)
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


@given(st.floats(-4, 4), st.floats(0.1, 3.0),
       st.sampled_from(["l1", "sql2", "nonneg", "l1_sql2"]),
       st.floats(-4, 4))
@settings(max_examples=200)
def test_prox_optimality_subgradient_inequality(z, step, kind, probe):
    # (z - p)/step is a subgradient of g at p = prox_{step g}(z):
    # g(q) >= g(p) + <(z-p)/step, q - p> for every q in dom g
    g = ProxFunction(kind, l1_weight=0.8, sql2_weight=0.6)
    zv = np.array([z])
    p = g.prox(zv, step)
    q = np.array([abs(probe) if kind == "nonneg" else probe])
    sub = (zv - p) / step
    assert g.value(q) >= g.value(p) + float(sub @ (q - p)) - 1e-9


def test_indicator_prox_respects_domain():
    g = nonneg()
    assert g.value(np.array([-0.5, 1.0])) == np.inf
    p = g.prox(np.array([-0.5, 1.0]), 2.0)
    assert g.value(p) == 0.0


def test_moreau_params_validation():
    with pytest.raises(ValueError):
        MoreauParams(0.0)
    with pytest.raises(ValueError):
        ProxFunction("l1", l1_weight=-1.0)
    with pytest.raises(ValueError):
        ProxFunction("spam")
    with pytest.raises(ValueError):
        ZERO.prox(np.zeros(2), 0.0)
