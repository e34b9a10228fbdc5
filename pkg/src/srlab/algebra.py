"""Structure-constant linear algebra for left-invariant frames.

Everything in this module is plain tensor arithmetic on the structure
constants ``c[k, i, j]`` of a frame ``E_1..E_d``, meaning

    [E_i, E_j] = sum_k c[k, i, j] E_k.

The frame is always split into a horizontal block (first ``dim_h``
indices) and a vertical block (the rest).  Connection coefficients,
curvature tensors and the exponential-chart coefficient series are all
constant in the frame because the frame is left-invariant, so they are
ordinary numpy arrays here.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import funm
from scipy.special import bernoulli


def antisymmetry_residual(c: np.ndarray) -> float:
    """Max absolute violation of c[k,i,j] = -c[k,j,i]."""
    return float(np.max(np.abs(c + np.swapaxes(c, 1, 2))))


def jacobi_residual(c: np.ndarray) -> float:
    """Max absolute violation of the Jacobi identity.

    Checks sum over cyclic permutations of [[E_i, E_j], E_k] = 0,
    expanded through the structure constants.
    """
    # [[E_i,E_j],E_k]^l = c[m,i,j] c[l,m,k]
    t = np.einsum("mij,lmk->lijk", c, c)
    cyc = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
    return float(np.max(np.abs(cyc)))


def bracket_filtration(c: np.ndarray, dim_h: int) -> tuple[bool, int]:
    """Growth of span(H) under iterated brackets with H.

    Returns (bracket_generating, step) where step is the number of
    bracket levels needed to span the full algebra (1 = H alone spans,
    2 = first-order brackets suffice, ...).  When the flag is False the
    step is the level at which the filtration stabilized short of full
    rank.
    """
    d = c.shape[0]
    h_basis = np.eye(d)[:dim_h]

    def rank(vs):
        return np.linalg.matrix_rank(np.asarray(vs), tol=1e-10)

    span = list(h_basis)
    step = 1
    while rank(span) < d:
        new = []
        for a in h_basis:
            for v in span:
                # [a, v]^k = c[k,i,j] a_i v_j
                new.append(np.einsum("kij,i,j->k", c, a, v))
        grown = span + new
        if rank(grown) == rank(span):
            return False, step
        span = grown
        step += 1
    return True, step


def nilpotency_step(c: np.ndarray, max_step: int = 12) -> int | None:
    """Nilpotency degree of the algebra, or None if not nilpotent.

    Degree s means all (s+1)-fold brackets vanish (Heisenberg: 2).
    Each lower-central term is compressed to an orthonormal basis so
    the scan stays linear in the dimension.
    """
    d = c.shape[0]
    layer = np.eye(d)  # basis of the current lower-central term
    for s in range(1, max_step + 1):
        new = np.einsum("kij,ai,bj->abk", c, np.eye(d), layer).reshape(-1, d)
        _, sv, vt = np.linalg.svd(new, full_matrices=False)
        basis = vt[sv > 1e-12 * max(1.0, sv[0] if len(sv) else 1.0)]
        if len(basis) == 0:
            return s
        layer = basis
    return None


def orthonormalize_frame(
    c: np.ndarray, metric: np.ndarray, dim_h: int
) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormalize the frame blockwise through Cholesky factors.

    Returns (c_on, T) where the new frame is F_a = sum_b T[a,b] E_b,
    T is block diagonal (it never mixes horizontal with vertical), and
    c_on holds the structure constants of F.  The frame metric of F is
    the identity.
    """
    d = c.shape[0]
    T = np.zeros((d, d))
    for sl in (slice(0, dim_h), slice(dim_h, d)):
        block = metric[sl, sl]
        if block.size:
            L = np.linalg.cholesky(block)
            T[sl, sl] = np.linalg.inv(L)
    Tinv = np.linalg.inv(T)
    c_on = np.einsum("pi,qj,kij,ka->apq", T, T, c, Tinv)
    return c_on, T


def levi_civita_gamma(c: np.ndarray) -> np.ndarray:
    """Levi-Civita coefficients G[k,i,j] of an orthonormal frame.

    nabla_{E_i} E_j = G[k,i,j] E_k with the Koszul formula
    G[k,i,j] = (c[k,i,j] - c[i,j,k] + c[j,k,i]) / 2.
    """
    # transpose(c, (2,0,1))[k,i,j] = c[i,j,k]; transpose(c, (1,2,0))[k,i,j] = c[j,k,i]
    return 0.5 * (
        c - np.transpose(c, (2, 0, 1)) + np.transpose(c, (1, 2, 0))
    )


def adapted_gamma(c: np.ndarray, dim_h: int) -> np.ndarray:
    """Coefficients of the adapted connection of the H/V splitting.

    The connection keeps both subbundles parallel: differentiating in
    horizontal directions it uses the projected Levi-Civita connection
    on H and the bracket on V, and symmetrically for vertical
    directions.
    """
    d = c.shape[0]
    lc = levi_civita_gamma(c)
    g = np.zeros_like(c)
    H = slice(0, dim_h)
    V = slice(dim_h, d)
    g[H, H, H] = lc[H, H, H]
    g[V, V, V] = lc[V, V, V]
    g[V, H, V] = c[V, H, V]
    g[H, V, H] = c[H, V, H]
    return g


def connection_curvature(c: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Curvature R[l,i,j,k] of a frame-constant connection.

    R(E_i,E_j)E_k = R[l,i,j,k] E_l for gamma[k,i,j] constant in the
    frame, so only the quadratic and bracket terms survive.
    """
    quad = np.einsum("mjk,lim->lijk", gamma, gamma)
    r = quad - np.transpose(quad, (0, 2, 1, 3))
    r -= np.einsum("mij,lmk->lijk", c, gamma)
    return r


def nabla_cometric(gamma: np.ndarray, idx: slice, d: int) -> np.ndarray:
    """Covariant derivative of the co-metric of a frame sub-block.

    For s* = sum_{a in idx} E_a (x) E_a, returns W[m, j, k] with
    (nabla_{E_m} s*)^{jk} = W[m, j, k].
    """
    basis = np.zeros((d, d))
    ids = range(d)[idx]
    for a in ids:
        basis[a, a] = 1.0
    # nabla_m (E_a (x) E_a) = gamma[j,m,a] E_j (x) E_a + E_a (x) gamma[k,m,a] E_k
    w = np.einsum("jma,ka->mjk", gamma, basis)
    return w + np.swapaxes(w, 1, 2)


def ad_matrix(c: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Adjoint action matrix ad_u[m, j] = sum_i u_i c[m, i, j], batched."""
    return np.einsum("...i,mij->...mj", u, c)


def bracket(c: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """[u, w] through the structure constants, batched over leading axes."""
    return np.einsum("kij,...i,...j->...k", c, u, w)


def bch_compose(c: np.ndarray, u: np.ndarray, w: np.ndarray, step: int) -> np.ndarray:
    """log(exp(u) exp(w)) for a nilpotent algebra of degree <= 3.

    Uses the Baker-Campbell-Hausdorff series, which terminates exactly
    at the nilpotency degree.  Degrees above 3 are rejected since the
    truncation would silently bias group products.
    """
    if step > 3:
        raise ValueError(f"exact BCH composition supports step <= 3, got {step}")
    z = u + w
    if step >= 2:
        uw = bracket(c, u, w)
        z = z + 0.5 * uw
        if step >= 3:
            z = z + (bracket(c, u, uw) - bracket(c, w, uw)) / 12.0
    return z


_BERNOULLI_PLUS_CACHE: dict[int, np.ndarray] = {}


def bernoulli_plus(n: int) -> np.ndarray:
    """Bernoulli numbers with the B_1 = +1/2 sign convention, orders 0..n."""
    if n not in _BERNOULLI_PLUS_CACHE:
        b = bernoulli(n)
        signs = (-1.0) ** np.arange(n + 1)
        _BERNOULLI_PLUS_CACHE[n] = b * signs
    return _BERNOULLI_PLUS_CACHE[n]


#: series for z / (1 - e^(-z)); converges for |z| < 2 pi
_SERIES_TERMS = 30
_SERIES_SAFE_NORM = 4.0


def _dexpinv_series(ad: np.ndarray, terms: int = _SERIES_TERMS) -> np.ndarray:
    """Evaluate z/(1 - e^(-z)) on a (batch of) ad matrices by power series."""
    b = bernoulli_plus(terms)
    d = ad.shape[-1]
    out = np.zeros_like(ad)
    out[...] = np.eye(d)
    power = np.broadcast_to(np.eye(d), ad.shape).copy()
    fact = 1.0
    for k in range(1, terms + 1):
        power = power @ ad
        fact *= k
        coeff = b[k] / fact
        if coeff != 0.0:
            out = out + coeff * power
    return out


def _dexpinv_scalar(z: complex) -> complex:
    if abs(z) < 1e-8:
        return 1.0 + z / 2.0 + z * z / 12.0
    return z / (1.0 - np.exp(-z))


def frame_coefficients(
    c: np.ndarray, points: np.ndarray, nil_step: int | None = None
) -> np.ndarray:
    """Coefficient matrices of the left-invariant frame in exp coordinates.

    At the exponential-coordinate point u the frame field E_i equals
    sum_j F[j, i] d/du_j with F = f(ad_u) and f(z) = z / (1 - e^(-z)).
    Returns F with shape (..., d, d) for points of shape (..., d).

    For nilpotent algebras (nil_step given) the series terminates and
    is exact everywhere.  Otherwise the power series is used inside its
    comfortable convergence region and falls back to a dense matrix
    function evaluation, which degrades only at the genuine
    singularities of the chart.
    """
    points = np.asarray(points, dtype=float)
    ad = ad_matrix(c, points)
    if nil_step is not None:
        return _dexpinv_series(ad, terms=nil_step)
    norms = np.linalg.norm(ad, ord=np.inf, axis=(-2, -1)) if ad.ndim > 2 else np.array(
        np.linalg.norm(ad, ord=np.inf)
    )
    if np.all(norms <= _SERIES_SAFE_NORM):
        return _dexpinv_series(ad)
    flat = ad.reshape(-1, ad.shape[-1], ad.shape[-1])
    out = np.empty_like(flat)
    for i, m in enumerate(flat):
        if np.linalg.norm(m, ord=np.inf) <= _SERIES_SAFE_NORM:
            out[i] = _dexpinv_series(m[None])[0]
        else:
            out[i] = np.real(funm(m.astype(complex), np.vectorize(_dexpinv_scalar)))
    return out.reshape(ad.shape)
