"""Independent numerical references for the closed-form bound machinery."""
import numpy as np
from scipy.integrate import solve_ivp


def nested_by_ode(frequencies, t_eval, rtol=1e-12, atol=1e-14):
    """Iterated integral via y_k' = exp(i w_k t) y_{k-1}, y_0 = 1 (adaptive RK)."""
    w = np.asarray(frequencies, dtype=float)
    d = len(w)

    def rhs(t, y):
        z = y[:d] + 1j * y[d:]
        prev = np.concatenate([[1.0], z[:-1]])
        dz = np.exp(1j * w * t) * prev
        return np.concatenate([dz.real, dz.imag])

    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    sol = solve_ivp(rhs, (0.0, float(t_eval.max())), np.zeros(2 * d), method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol)
    return sol.y[d - 1] + 1j * sol.y[2 * d - 1]


def leakage_sum_direct(g, lam, lam0, t):
    """Defining sum of the leakage amplitude evaluated term by term."""
    total = 0j
    for k in range(lam0, lam + 1):
        prod = 1.0
        for l in range(lam0, lam + 2):
            if l != k:
                prod /= k * k - l * l
        total += (np.exp(-2j * g * g * (lam + 1) ** 2 * t) - np.exp(-2j * g * g * k * k * t)) * prod
    return total
