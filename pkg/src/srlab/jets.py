"""Truncated multivariate Taylor arithmetic.

A jet stores the Taylor coefficients of a smooth function at a base
point up to a fixed total order: ``coeffs[alpha] = d^alpha f(x) /
alpha!``.  Multi-indices are enumerated by total degree and then
lexicographically, so truncation to a lower order is a prefix slice.
Coefficient arrays may carry leading batch axes; every operation is
vectorized over them.

Ring operations truncate consistently: the product of jets of orders
``p`` and ``q`` is exact to order ``min(p, q)``, derivatives drop one
order.  Polynomials of degree at most the jet order are represented
exactly, which is what makes the calculus downstream free of
discretization error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


def _graded_exponents(dim: int, order: int) -> np.ndarray:
    exps = []
    for total in range(order + 1):
        for comb in itertools.combinations_with_replacement(range(dim), total):
            e = [0] * dim
            for i in comb:
                e[i] += 1
            exps.append(e)
    # combinations_with_replacement is not lexicographic on exponent
    # tuples; sort within each degree for a canonical order.
    exps = np.array(exps, dtype=np.int64).reshape(-1, dim)
    degs = exps.sum(axis=1)
    key = np.lexsort(tuple(exps[:, i] for i in range(dim - 1, -1, -1)))
    exps = exps[key]
    degs = degs[key]
    stable = np.argsort(degs, kind="stable")
    return exps[stable]


class JetSpace:
    """Index tables for dense jets of a given dimension and order cap."""

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        self.exponents = _graded_exponents(dim, order)
        self.degrees = self.exponents.sum(axis=1)
        self.size = len(self.exponents)
        self.index = {tuple(e): i for i, e in enumerate(self.exponents)}
        # number of terms of degree <= m
        self.n_at = np.searchsorted(self.degrees, np.arange(order + 2), side="left")
        self._build_product_table()
        self._build_derivative_maps()

    def _build_product_table(self):
        pa, pb, pout = [], [], []
        for a in range(self.size):
            da = self.degrees[a]
            for b in range(self.size):
                if da + self.degrees[b] > self.order:
                    continue
                out = self.index[tuple(self.exponents[a] + self.exponents[b])]
                pa.append(a)
                pb.append(b)
                pout.append(out)
        pa = np.array(pa, dtype=np.int64)
        pb = np.array(pb, dtype=np.int64)
        pout = np.array(pout, dtype=np.int64)
        srt = np.argsort(pout, kind="stable")
        self.pair_a = pa[srt]
        self.pair_b = pb[srt]
        self.pair_out = pout[srt]
        # pairs feeding outputs of degree <= m form a prefix
        self.pairs_at = np.searchsorted(self.pair_out, self.n_at, side="left")
        # reduceat group starts, one per output index
        self.group_starts = np.searchsorted(self.pair_out, np.arange(self.size))

    def _build_derivative_maps(self):
        # deriv_src[j][r], deriv_coef[j][r]: coefficient r of d/du_j f is
        # deriv_coef * coeffs[deriv_src], valid for jets of order >= 1.
        self.deriv_src = []
        self.deriv_coef = []
        n_lower = self.n_at[self.order]  # all terms of degree <= order-1
        for j in range(self.dim):
            src = np.empty(n_lower, dtype=np.int64)
            coef = np.empty(n_lower)
            for r in range(n_lower):
                e = self.exponents[r].copy()
                e[j] += 1
                src[r] = self.index[tuple(e)]
                coef[r] = e[j]
            self.deriv_src.append(src)
            self.deriv_coef.append(coef)

    def terms(self, order: int) -> int:
        return int(self.n_at[order + 1])

    def multiply(self, a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
        n_pairs = self.pairs_at[order + 1]
        prod = a[..., self.pair_a[:n_pairs]] * b[..., self.pair_b[:n_pairs]]
        starts = self.group_starts[: self.terms(order)]
        return np.add.reduceat(prod, starts, axis=-1)

    def multiplication_matrix(self, a: np.ndarray, order: int) -> np.ndarray:
        """Matrix M with (a * b)_r = sum_s M[r, s] b_s at the given order."""
        n = self.terms(order)
        n_pairs = self.pairs_at[order + 1]
        m = np.zeros((n, n))
        np.add.at(
            m,
            (self.pair_out[:n_pairs], self.pair_b[:n_pairs]),
            a[self.pair_a[:n_pairs]],
        )
        return m

    def derivative_matrix(self, j: int, order: int) -> np.ndarray:
        """Matrix of d/du_j from order-``order`` jets to order-1 lower."""
        n_out = self.terms(order - 1)
        n_in = self.terms(order)
        m = np.zeros((n_out, n_in))
        src = self.deriv_src[j][:n_out]
        m[np.arange(n_out), src] = self.deriv_coef[j][:n_out]
        return m


_SPACES: dict[int, JetSpace] = {}


def get_space(dim: int, order: int) -> JetSpace:
    sp = _SPACES.get(dim)
    if sp is None or sp.order < order:
        sp = JetSpace(dim, max(order, 4))
        _SPACES[dim] = sp
    return sp


@dataclass
class Jet:
    """Taylor coefficients of a function at a base point.

    ``coeffs`` has shape ``(..., n_terms)`` where leading axes are a
    batch; the terms follow the graded order of the jet space.
    """

    base_point: np.ndarray
    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.base_point = np.asarray(self.base_point, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        sp = self.space
        if self.coeffs.shape[-1] != sp.terms(self.order):
            raise ValueError(
                f"coefficient length {self.coeffs.shape[-1]} does not match "
                f"order {self.order} in dimension {self.dim}"
            )

    @property
    def dim(self) -> int:
        return len(self.base_point)

    @property
    def space(self) -> JetSpace:
        return get_space(self.dim, self.order)

    @property
    def value(self) -> np.ndarray | float:
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v

    def truncated(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot extend jet of order {self.order} to {order}")
        if order == self.order:
            return self
        n = self.space.terms(order)
        return Jet(self.base_point, order, self.coeffs[..., :n])

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        arr = np.asarray(other, dtype=float)
        coeffs = np.zeros(arr.shape + (self.space.terms(self.order),))
        coeffs[..., 0] = arr
        return Jet(self.base_point, self.order, coeffs)

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        m = min(self.order, other.order)
        a = self.truncated(m)
        b = other.truncated(m)
        return Jet(self.base_point, m, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.base_point, self.order, -self.coeffs)

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.base_point, self.order, self.coeffs * np.asarray(other)[..., None])
        m = min(self.order, other.order)
        sp = get_space(self.dim, max(self.order, other.order))
        na = self.space.terms(m)
        coeffs = sp.multiply(self.coeffs[..., :na], other.coeffs[..., :na], m)
        return Jet(self.base_point, m, coeffs)

    def __rmul__(self, other) -> "Jet":
        return self.__mul__(other)

    def derivative(self, j: int) -> "Jet":
        if self.order < 1:
            raise ValueError("derivative of an order-0 jet is undefined")
        sp = self.space
        n_out = sp.terms(self.order - 1)
        coeffs = sp.deriv_coef[j][:n_out] * self.coeffs[..., sp.deriv_src[j][:n_out]]
        return Jet(self.base_point, self.order - 1, coeffs)

    def exp(self) -> "Jet":
        """exp of the jet, truncated at its own order."""
        a0 = self.coeffs[..., :1]
        rest = self.coeffs.copy()
        rest[..., 0] = 0.0
        nil = Jet(self.base_point, self.order, rest)
        acc = self._coerce(np.ones(self.coeffs.shape[:-1]))
        term = acc
        for k in range(1, self.order + 1):
            term = term * nil * (1.0 / k)
            acc = acc + term
        return Jet(self.base_point, self.order, np.exp(a0) * acc.coeffs)

    def log(self) -> "Jet":
        """log of a jet with strictly positive value."""
        a0 = self.coeffs[..., :1]
        if np.any(a0 <= 0):
            raise ValueError("log requires a strictly positive jet value")
        rest = self.coeffs / a0
        rest[..., 0] = 0.0
        nil = Jet(self.base_point, self.order, rest)
        acc = self._coerce(np.log(a0[..., 0]))
        term = self._coerce(np.ones(self.coeffs.shape[:-1]))
        for k in range(1, self.order + 1):
            term = term * nil
            acc = acc + term * ((-1.0) ** (k + 1) / k)
        return acc


def constant_jet(value, base_point: np.ndarray, order: int) -> Jet:
    base_point = np.asarray(base_point, dtype=float)
    sp = get_space(len(base_point), order)
    arr = np.asarray(value, dtype=float)
    coeffs = np.zeros(arr.shape + (sp.terms(order),))
    coeffs[..., 0] = arr
    return Jet(base_point, order, coeffs)


def coordinate_jet(axis: int, base_point: np.ndarray, order: int) -> Jet:
    """Jet of the coordinate function u_axis."""
    j = constant_jet(float(np.asarray(base_point)[axis]), base_point, order)
    if order >= 1:
        sp = j.space
        e = tuple(1 if k == axis else 0 for k in range(j.dim))
        j.coeffs[..., sp.index[e]] = 1.0
    return j


def polynomial_shift_matrix(
    x: np.ndarray, dim: int, degree: int, order: int
) -> np.ndarray:
    """Matrix taking monomial coefficients to jet coefficients at x.

    For p(u) = sum_alpha c_alpha u^alpha, the jet of p at x has
    coefficients jet_beta = sum_alpha c_alpha binom(alpha, beta)
    x^(alpha - beta); returns M with jet = c @ M.T.
    """
    sp_in = get_space(dim, degree)
    sp_out = get_space(dim, order)
    n_in = sp_in.terms(degree)
    n_out = sp_out.terms(order)
    a = sp_in.exponents[:n_in]
    b = sp_out.exponents[:n_out]
    diff = a[None, :, :] - b[:, None, :]
    valid = np.all(diff >= 0, axis=-1)
    diff = np.where(valid[..., None], diff, 0)
    binom = np.ones((n_out, n_in))
    powers = np.ones((n_out, n_in))
    x = np.asarray(x, dtype=float)
    for k in range(dim):
        binom *= _binom_table(a[None, :, k], b[:, None, k])
        powers *= x[k] ** diff[:, :, k]
    return np.where(valid, binom * powers, 0.0)


def _binom_table(nn, kk):
    nn = np.broadcast_to(nn, np.broadcast_shapes(nn.shape, kk.shape))
    kk = np.broadcast_to(kk, nn.shape)
    out = np.zeros(nn.shape)
    for idx in np.ndindex(nn.shape):
        out[idx] = math.comb(int(nn[idx]), int(kk[idx])) if nn[idx] >= kk[idx] else 0.0
    return out


def lift_polynomials(
    coeffs: np.ndarray, degree: int, x: np.ndarray, order: int
) -> Jet:
    """Lift a batch of dense polynomials (coeffs shape (..., n_terms))."""
    x = np.asarray(x, dtype=float)
    m = polynomial_shift_matrix(x, len(x), degree, order)
    return Jet(x, order, np.asarray(coeffs, dtype=float) @ m.T)


# ----------------------------------------------------------------------
# Test function classes
# ----------------------------------------------------------------------


class TestFunction:
    """Base class for functions the verification sweeps sample over."""

    __test__ = False  # keep pytest from collecting this as a test case
    kind = "abstract"
    dim: int

    def eval(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval_grad(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def lift(self, x: np.ndarray, order: int) -> Jet:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(doc: dict) -> "TestFunction":
        kind = doc["kind"]
        if kind == "polynomial":
            return Polynomial(doc["dim"], doc["degree"], np.asarray(doc["coefficients"]))
        if kind == "trig-polynomial":
            return TrigPolynomial(
                doc["dim"],
                np.asarray(doc["amplitudes"]),
                np.asarray(doc["frequencies"]),
                np.asarray(doc["phases"]),
            )
        if kind == "constant":
            return Constant(doc["dim"], doc["value"])
        if kind == "coordinate":
            return Coordinate(doc["dim"], doc["axis"])
        if kind == "gaussian":
            return GaussianBump(np.asarray(doc["center"]), doc["width"], doc.get("height", 1.0))
        if kind == "shifted-square":
            return ShiftedSquare(
                Polynomial(doc["dim"], doc["degree"], np.asarray(doc["coefficients"])),
                doc["epsilon"],
            )
        raise ValueError(f"unknown test function kind {kind!r}")


class Polynomial(TestFunction):
    """Dense polynomial over the graded monomial basis."""

    kind = "polynomial"

    def __init__(self, dim: int, degree: int, coefficients: np.ndarray):
        self.dim = dim
        self.degree = degree
        self.coefficients = np.asarray(coefficients, dtype=float)
        sp = get_space(dim, degree)
        if self.coefficients.shape[-1] != sp.terms(degree):
            raise ValueError("coefficient length does not match degree")

    @staticmethod
    def random(dim: int, degree: int, rng: np.random.Generator) -> "Polynomial":
        n = get_space(dim, degree).terms(degree)
        return Polynomial(dim, degree, rng.uniform(-1.0, 1.0, n))

    @staticmethod
    def monomial(dim: int, exponent: tuple[int, ...], coeff: float = 1.0) -> "Polynomial":
        degree = int(sum(exponent))
        sp = get_space(dim, degree)
        c = np.zeros(sp.terms(degree))
        c[sp.index[tuple(exponent)]] = coeff
        return Polynomial(dim, degree, c)

    def eval(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        sp = get_space(self.dim, self.degree)
        exps = sp.exponents[: sp.terms(self.degree)]
        mono = np.prod(points[..., None, :] ** exps[None, :, :], axis=-1)
        return mono @ self.coefficients

    def eval_grad(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        out = np.empty(points.shape)
        for j in range(self.dim):
            out[..., j] = self._partial(j).eval(points)
        return out

    def _partial(self, j: int) -> "Polynomial":
        sp = get_space(self.dim, self.degree)
        deg = max(self.degree - 1, 0)
        n_out = sp.terms(deg)
        coeffs = sp.deriv_coef[j][:n_out] * self.coefficients[sp.deriv_src[j][:n_out]]
        return Polynomial(self.dim, deg, coeffs)

    def lift(self, x: np.ndarray, order: int) -> Jet:
        return lift_polynomials(self.coefficients, self.degree, x, order)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "degree": self.degree,
            "coefficients": self.coefficients.tolist(),
        }


class TrigPolynomial(TestFunction):
    """Finite sum of plane waves a cos(k . u + phase)."""

    kind = "trig-polynomial"

    def __init__(self, dim, amplitudes, frequencies, phases):
        self.dim = dim
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        self.frequencies = np.asarray(frequencies, dtype=float)
        self.phases = np.asarray(phases, dtype=float)

    @staticmethod
    def random(dim: int, n_waves: int, rng: np.random.Generator, max_freq: int = 2):
        return TrigPolynomial(
            dim,
            rng.uniform(-1.0, 1.0, n_waves),
            rng.integers(-max_freq, max_freq + 1, (n_waves, dim)).astype(float),
            rng.uniform(0.0, 2.0 * np.pi, n_waves),
        )

    def eval(self, points: np.ndarray) -> np.ndarray:
        arg = np.asarray(points) @ self.frequencies.T + self.phases
        return np.cos(arg) @ self.amplitudes

    def eval_grad(self, points: np.ndarray) -> np.ndarray:
        arg = np.asarray(points) @ self.frequencies.T + self.phases
        return -(np.sin(arg) * self.amplitudes) @ self.frequencies

    def lift(self, x: np.ndarray, order: int) -> Jet:
        x = np.asarray(x, dtype=float)
        sp = get_space(self.dim, order)
        n = sp.terms(order)
        exps = sp.exponents[:n]
        degs = sp.degrees[:n]
        arg = self.frequencies @ x + self.phases  # (m,)
        # d^alpha cos(k.u + p) = prod k^alpha * cos(k.u + p + |alpha| pi/2)
        kpow = np.prod(self.frequencies[:, None, :] ** exps[None, :, :], axis=-1)
        phase = np.cos(arg[:, None] + degs[None, :] * np.pi / 2.0)
        fact = np.array([math.prod(math.factorial(int(e)) for e in a) for a in exps])
        coeffs = (self.amplitudes @ (kpow * phase)) / fact
        return Jet(x, order, coeffs)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "amplitudes": self.amplitudes.tolist(),
            "frequencies": self.frequencies.tolist(),
            "phases": self.phases.tolist(),
        }


class Constant(TestFunction):
    kind = "constant"

    def __init__(self, dim: int, value: float):
        self.dim = dim
        self.value = float(value)

    def eval(self, points):
        return np.full(np.asarray(points).shape[:-1], self.value)

    def eval_grad(self, points):
        return np.zeros(np.asarray(points).shape)

    def lift(self, x, order):
        return constant_jet(self.value, x, order)

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim, "value": self.value}


class Coordinate(TestFunction):
    kind = "coordinate"

    def __init__(self, dim: int, axis: int):
        self.dim = dim
        self.axis = axis

    def eval(self, points):
        return np.asarray(points, dtype=float)[..., self.axis]

    def eval_grad(self, points):
        g = np.zeros(np.asarray(points).shape)
        g[..., self.axis] = 1.0
        return g

    def lift(self, x, order):
        return coordinate_jet(self.axis, x, order)

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim, "axis": self.axis}


class GaussianBump(TestFunction):
    """height * exp(-|u - center|^2 / (2 width^2)); positive and bounded."""

    kind = "gaussian"

    def __init__(self, center: np.ndarray, width: float, height: float = 1.0):
        self.center = np.asarray(center, dtype=float)
        self.dim = len(self.center)
        self.width = float(width)
        self.height = float(height)

    def eval(self, points):
        diff = np.asarray(points, dtype=float) - self.center
        return self.height * np.exp(-np.sum(diff**2, axis=-1) / (2.0 * self.width**2))

    def eval_grad(self, points):
        diff = np.asarray(points, dtype=float) - self.center
        return self.eval(points)[..., None] * (-diff / self.width**2)

    def lift(self, x, order):
        quad = _quadratic_poly(self.center, -1.0 / (2.0 * self.width**2))
        return self.height * quad.lift(x, order).exp()

    def to_json(self):
        return {
            "kind": self.kind,
            "center": self.center.tolist(),
            "width": self.width,
            "height": self.height,
        }


def _quadratic_poly(center: np.ndarray, scale: float) -> Polynomial:
    """Polynomial scale * |u - center|^2."""
    dim = len(center)
    sp = get_space(dim, 2)
    c = np.zeros(sp.terms(2))
    c[0] = scale * float(np.sum(center**2))
    for k in range(dim):
        e1 = tuple(1 if i == k else 0 for i in range(dim))
        e2 = tuple(2 if i == k else 0 for i in range(dim))
        c[sp.index[e1]] = -2.0 * scale * center[k]
        c[sp.index[e2]] = scale
    return Polynomial(dim, 2, c)


class ShiftedSquare(TestFunction):
    """p^2 + epsilon for a polynomial p; strictly positive everywhere."""

    kind = "shifted-square"

    def __init__(self, poly: Polynomial, epsilon: float = 1e-3):
        self.poly = poly
        self.dim = poly.dim
        self.epsilon = float(epsilon)

    def eval(self, points):
        return self.poly.eval(points) ** 2 + self.epsilon

    def eval_grad(self, points):
        return 2.0 * self.poly.eval(points)[..., None] * self.poly.eval_grad(points)

    def lift(self, x, order):
        p = self.poly.lift(x, order)
        return p * p + self.epsilon

    def to_json(self):
        doc = self.poly.to_json()
        doc["kind"] = self.kind
        doc["epsilon"] = self.epsilon
        return doc
