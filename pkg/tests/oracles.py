"""Independent reference values used by the tests.

Nothing here imports the package's numerical code: derivatives are plain
central differences, signatures are brute-forced with explicit loops, and
the example values are hand-derived closed forms.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

SIGMA = (3.0 + math.sqrt(13.0)) / 2.0


# -- derivatives --------------------------------------------------------------


def fd_gradient(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_jacobian(f, x, h=1e-5):
    """Columns are central differences of the vector function f."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.array(cols).T


# -- semi-Riemannian linear algebra --------------------------------------------


def brute_force_signatures(vectors, rad_rows, q, tol=1e-9):
    """All q-subsets of timelike coordinates making the listed rows null and orthogonal to every row."""
    V = np.asarray(vectors, dtype=float)
    V = V / np.linalg.norm(V, axis=1, keepdims=True)
    n = V.shape[1]
    out = []
    for combo in itertools.combinations(range(n), q):
        ok = True
        for a in rad_rows:
            for b in range(V.shape[0]):
                s = sum((-1.0 if i in combo else 1.0) * V[a, i] * V[b, i] for i in range(n))
                if abs(s) > tol:
                    ok = False
        if ok:
            out.append(combo)
    return out


def classification_table(r, m, n):
    """The four-way classification written out directly from its definition."""
    if r == 0:
        return "NonDegenerate"
    if r < min(m, n):
        return f"RLightlike({r})"
    if r == n and n < m:
        return "Coisotropic"
    if r == m and m < n:
        return "Isotropic"
    if r == m == n:
        return "TotallyLightlike"
    raise ValueError("r exceeds min(m, n)")


# -- closed forms for the 11-dimensional example --------------------------------


def minimal11_point(t5, t6):
    """Embedding of the (t5, t6) block (other coordinates are linear)."""
    F = np.zeros(11)
    F[5] = math.sin(t5) * math.sinh(t6)
    F[7] = math.sin(t5) * math.cosh(t6)
    F[9] = math.sqrt(2) * math.cos(t5) * math.cosh(t6)
    return F


def minimal11_W5(t5, t6):
    """W5 as printed: -sqrt2 sinh t6 cosh t6 dy6 + sqrt2 (sin^2 t5 + sinh^2 t6) dy8 + sin t5 cos t5 dy10."""
    W = np.zeros(11)
    W[5] = -math.sqrt(2) * math.sinh(t6) * math.cosh(t6)
    W[7] = math.sqrt(2) * (math.sin(t5) ** 2 + math.sinh(t6) ** 2)
    W[9] = math.sin(t5) * math.cos(t5)
    return W


def minimal11_hs_coefficient(t5, t6):
    """Printed coefficient of W5 in h^s(B4, B4); h^s(B5, B5) has the opposite sign."""
    s, ch, sh = math.sin(t5), math.cosh(t6), math.sinh(t6)
    d = s * s + 2 * sh * sh
    return -math.sqrt(2) * s * ch / (d * (1 + d))


def minimal11_hs44_closed_form(t5, t6):
    return minimal11_hs_coefficient(t5, t6) * minimal11_W5(t5, t6)


def minimal11_hs44_at_anchor():
    """Hand value at (t5, t6) = (pi/2, 0): F_{t5 t5} = -dy8 there, and -dy8 lies in S(TM^perp)."""
    v = np.zeros(11)
    v[7] = -1.0
    return v


def minimal11_screen_gram_at_anchor():
    """g(B4, B4) = 2 and g(B5, B5) = 1 at (pi/2, 0) (only y8, y10 move with t5; y6, y8 with t6)."""
    return 2.0, 1.0


# -- toys -------------------------------------------------------------------------


def sphere_mean_curvature(radius):
    """|H| of a round 2-sphere of the given radius in Euclidean 3-space."""
    return 1.0 / radius
