"""Independent reference computations used as test oracles.

Everything here is written with plain loops or direct formulas so that it
shares no code path with the package under test.
"""

import numpy as np
from scipy import optimize


def brute_product_1d(a, b):
    """Galerkin product of two collocation-layout coefficient vectors.

    The Nyquist coefficient stands for ``c cos(N x / 2)``, so it is split
    evenly between ``+N/2`` and ``-N/2``.  The convolution is evaluated term
    by term and truncated to ``|k| <= N/2``, and the two Nyquist halves are
    summed back into one slot.
    """
    n = len(a)
    h = n // 2

    def sym(c):
        out = {}
        for j in range(n):
            k = j if j < h else j - n
            if j == h:
                out[h] = out[-h] = c[j] / 2
            else:
                out[k] = c[j]
        return out

    A, B = sym(a), sym(b)
    C = {}
    for k1, v1 in A.items():
        for k2, v2 in B.items():
            k = k1 + k2
            if abs(k) <= h:
                C[k] = C.get(k, 0) + v1 * v2
    out = np.zeros(n, dtype=complex)
    for k, v in C.items():
        out[k % n] += v
    return out


def random_real_field(rng, shape):
    return rng.standard_normal(shape)


def naive_sf_1d(u, n, shifts):
    N = len(u)
    out = []
    for j in shifts:
        acc = 0.0
        for i in range(N):
            acc += (u[(i + j) % N] - u[i]) ** n
        out.append(acc / N)
    return np.array(out)


def naive_sf_3d(u, n, shifts, flavor):
    """Direct loop over every grid point, axis and component."""
    N = u.shape[1]
    out = []
    for j in shifts:
        total = 0.0
        for a in range(3):
            if flavor == "longitudinal":
                comps = [a]
            elif flavor == "transverse":
                comps = [b for b in range(3) if b != a]
            else:
                comps = [0, 1, 2]
            acc = 0.0
            for c in comps:
                for i0 in range(N):
                    for i1 in range(N):
                        for i2 in range(N):
                            idx = [i0, i1, i2]
                            idx[a] = (idx[a] + j) % N
                            acc += (u[c, idx[0], idx[1], idx[2]] - u[c, i0, i1, i2]) ** n
            total += acc / (N**3 * len(comps))
        out.append(total / 3)
    return np.array(out)


def burgers_characteristics(x, t):
    """Exact solution of ``u_t + u u_x = 0`` with ``u(x, 0) = cos x`` for ``t < 1``.

    Solves ``u = cos(x - u t)`` pointwise; the map is monotone in ``u`` for
    ``t < 1`` so the bracket ``[-1, 1]`` always contains the unique root.
    """
    return np.array([optimize.brentq(lambda u: u - np.cos(xi - u * t), -1.0 - 1e-12, 1.0 + 1e-12, xtol=1e-15)
                     for xi in np.atleast_1d(x)])


def trig_interpolant(coeffs_full, x):
    """Evaluate ``sum_k c_k exp(i k x)`` for a 1D collocation-layout vector at arbitrary points."""
    n = len(coeffs_full)
    k = np.fft.fftfreq(n, 1.0 / n)
    return np.real(np.exp(1j * np.outer(x, k)) @ coeffs_full)
