"""Self-contained scalar reference for the inertial accelerated primal-dual
iteration.

Everything here is plain-float arithmetic for the one-dimensional instance

    min f(x)  s.t.  a*x = b,      f(x) = x^2/2,  g = 0,

written directly from the update equations, with no imports from the package
under test.  Used to freeze regression values and to cross-check full runs.
"""

import math


def cd_t(k, alpha=3.0):
    """Extrapolation sequence t_k = 1 + (k-1)/(alpha-1)."""
    return 1.0 + (k - 1) / (alpha - 1.0)


def lagrangian(x, lam, rho, a=1.0, b=0.0):
    r = a * x - b
    return 0.5 * x * x + lam * r + 0.5 * rho * r * r


def iterate(x_prev, x_cur, lam_prev, lam_cur, k, rho=1.0, sigma=1.0,
            beta=1.0, alpha=3.0, a=1.0, b=0.0):
    """One full update k -> k+1.  Returns a dict with every intermediate."""
    t_cur = cd_t(k, alpha)
    t_next = cd_t(k + 1, alpha)
    w = (t_cur - 1.0) / t_next

    x_bar = x_cur + w * (x_cur - x_prev)
    s = sigma * beta * t_next * t_next
    zeta = s + rho
    phi = ((t_next - 1.0) * a * x_cur + b) / t_next
    mu = lam_cur + w * (lam_cur - lam_prev)
    xi = t_next * mu - (t_next - 1.0) * lam_cur
    c = (s * phi + rho * b - xi) / zeta

    # argmin of  grad_f(x_bar)*x + (x - x_bar)^2/(2 beta) + zeta (a x - c)^2 / 2
    grad = x_bar  # f' = x
    x_next = (x_bar / beta - grad + zeta * a * c) / (1.0 / beta + zeta * a * a)

    u_next = x_next + (t_next - 1.0) * (x_next - x_cur)
    lam_next = mu + sigma * beta * (a * u_next - b)
    v_next = xi + s * (a * x_next - phi)
    return {
        "t_cur": t_cur, "t_next": t_next, "x_bar": x_bar, "s": s,
        "zeta": zeta, "phi": phi, "mu": mu, "xi": xi, "c": c,
        "x_next": x_next, "u_next": u_next, "lam_next": lam_next,
        "v_next": v_next,
    }


def energy(k, x_k, u_k, v_k, rho=1.0, sigma=1.0, beta=1.0, alpha=3.0,
           a=1.0, b=0.0, x_star=0.0, lam_star=0.0):
    """E(k) = t_{k+1}(t_{k+1}-1) beta_k gap + ||u_k - x*||^2/2 + ||v_k - l*||^2/(2 sigma)."""
    t_next = cd_t(k + 1, alpha)
    gap = lagrangian(x_k, lam_star, rho, a, b) - lagrangian(x_star, lam_star, rho, a, b)
    return (t_next * (t_next - 1.0) * beta * gap
            + 0.5 * (u_k - x_star) ** 2
            + (v_k - lam_star) ** 2 / (2.0 * sigma))


def run(n_iters, rho=1.0, sigma=1.0, beta=1.0, alpha=3.0, a=1.0, b=0.0,
        x_init=1.0, lam_init=0.0):
    """Run from x_0 = x_1 = x_init, lam_0 = lam_1 = lam_init.

    Returns per-index lists (index 0 <-> k = 1) of x, lam, u, v and E(k).
    """
    xs = [x_init]
    lams = [lam_init]
    # k = 1 boundary conventions: u_1 = x_1 + (t_1-1)(x_1-x_0), v_1 analogous
    t1 = cd_t(1, alpha)
    us = [x_init + (t1 - 1.0) * 0.0]
    vs = [t1 * lam_init - (t1 - 1.0) * lam_init]
    es = [energy(1, xs[0], us[0], vs[0], rho, sigma, beta, alpha, a, b)]
    x_prev, x_cur = x_init, x_init
    lam_prev, lam_cur = lam_init, lam_init
    for k in range(1, n_iters + 1):
        step = iterate(x_prev, x_cur, lam_prev, lam_cur, k,
                       rho, sigma, beta, alpha, a, b)
        x_prev, x_cur = x_cur, step["x_next"]
        lam_prev, lam_cur = lam_cur, step["lam_next"]
        xs.append(x_cur)
        lams.append(lam_cur)
        us.append(step["u_next"])
        vs.append(step["v_next"])
        es.append(energy(k + 1, x_cur, us[-1], vs[-1],
                         rho, sigma, beta, alpha, a, b))
    return {"x": xs, "lam": lams, "u": us, "v": vs, "energy": es}


# Frozen values for the k = 1 update of the instance above (exact fractions),
# verified by hand before the main build.
HAND_K1 = {
    "s": 2.25,
    "zeta": 3.25,
    "phi": 1.0 / 3.0,
    "x_next": 3.0 / 17.0,
    "u_next": -4.0 / 17.0,
    "lam_next": -4.0 / 17.0,
    "v_next": -6.0 / 17.0,
    "energy_1": 1.25,
    "energy_2": 44.0 / 289.0,
}


if __name__ == "__main__":
    out = run(1)
    step = iterate(1.0, 1.0, 0.0, 0.0, 1)
    for name, want in HAND_K1.items():
        if name == "energy_1":
            got = out["energy"][0]
        elif name == "energy_2":
            got = out["energy"][1]
        else:
            got = step[name]
        status = "ok" if abs(got - want) <= 1e-12 else "MISMATCH"
        print(f"{name:10s} got={got!r} want={want!r} {status}")
