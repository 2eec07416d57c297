"""Independent reference computations used to freeze expected values.

Run as a script to regenerate the constants quoted in the tests.
"""

import numpy as np

from planarsp.groundstate import shoot_Q


def fine_shooting():
    p = shoot_Q(tol=1e-10, dr=1e-5, r_max=25.0)
    return p.q0, p.mass, p.residual()


def radial_log_interaction(p, n_r=600, n_theta=4096, r_cut=16.0):
    """``iint ln|x-y| Q^2 Q^2`` by brute-force angular quadrature of the kernel.

    Gauss-Legendre in each radius (split at 4 where Q^2 is concentrated),
    midpoint rule in the angle difference.  Independent of the
    Newton-theorem shortcut used by ``RadialProfile``.
    """
    x, wx = np.polynomial.legendre.leggauss(n_r // 2)
    pieces = [(0.0, 4.0), (4.0, r_cut)]
    r = np.concatenate([0.5 * (b - a) * x + 0.5 * (b + a) for a, b in pieces])
    wr = np.concatenate([0.5 * (b - a) * wx for a, b in pieces])
    w = wr * r * p(r) ** 2
    cos = np.cos((np.arange(n_theta) + 0.5) * 2 * np.pi / n_theta)
    total = 0.0
    for i in range(len(r)):
        d2 = r[i] ** 2 + r[:, None] ** 2 - 2 * r[i] * r[:, None] * cos[None, :]
        kbar = 0.5 * np.log(d2).mean(axis=1)
        total += w[i] * np.dot(kbar, w)
    return 4 * np.pi**2 * total


def extrapolated_log_interaction(p, n_theta=8192):
    """Richardson limit in the radial node count; the kink of the angular
    average at ``|x| = |y|`` makes the radial rule second order."""
    a = radial_log_interaction(p, 600, n_theta)
    b = radial_log_interaction(p, 1200, n_theta)
    return (4 * b - a) / 3


if __name__ == "__main__":
    print("q0, rho*, residual:", fine_shooting())
    from planarsp.groundstate import cached_profile

    print("iint ln|x-y| Q^2 Q^2:", extrapolated_log_interaction(cached_profile()))
