"""Left-invariant frame fields acting on jets.

The coordinate components of the frame in exponential coordinates are
given by the series f(ad_u) with f(z) = z / (1 - e^(-z)); evaluating
that series in jet arithmetic at a base point yields the component
functions to any Taylor order.  Applying a frame field to a jet is then
a linear map on jet coefficients, precomputed here as small dense
matrices per differentiation order.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from . import algebra
from .jets import Jet, coordinate_jet, get_space
from .models import LieModel


def chart_field_jets(model: LieModel, x: np.ndarray, order: int) -> list[list[Jet]]:
    """Component jets F[j][i] of frame field i along coordinate j at x.

    Components refer to the orthonormalized frame and its exponential
    chart.  For nilpotent models the series terminates exactly; for
    compact models it is truncated deep inside its convergence region.
    """
    x = np.asarray(x, dtype=float)
    c = model.onframe.c
    d = model.dim
    coords = [coordinate_jet(j, x, order) for j in range(d)]
    zero = coords[0] * 0.0

    def jet_max(j: Jet) -> float:
        return float(np.max(np.abs(j.coeffs)))

    ad = [[zero for _ in range(d)] for _ in range(d)]
    for m in range(d):
        for j in range(d):
            entry = zero
            for i in range(d):
                if c[m, i, j] != 0.0:
                    entry = entry + c[m, i, j] * coords[i]
            ad[m][j] = entry

    if model.onframe.nil_step is None:
        norm = float(np.linalg.norm(algebra.ad_matrix(c, x), ord=np.inf))
        if norm > algebra._SERIES_SAFE_NORM:
            raise ValueError(
                f"base point too far from identity for the chart series "
                f"(|ad| = {norm:.2f}); stay within the injectivity region"
            )
        terms = algebra._SERIES_TERMS
    else:
        terms = model.onframe.nil_step + 1

    bern = algebra.bernoulli_plus(terms)
    out = [[zero if m != j else zero + 1.0 for j in range(d)] for m in range(d)]
    power = [[zero if m != j else zero + 1.0 for j in range(d)] for m in range(d)]
    fact = 1.0
    for k in range(1, terms + 1):
        nxt = [[zero for _ in range(d)] for _ in range(d)]
        for m in range(d):
            for j in range(d):
                entry = zero
                for l in range(d):
                    if jet_max(ad[m][l]) != 0.0 and jet_max(power[l][j]) != 0.0:
                        entry = entry + ad[m][l] * power[l][j]
                nxt[m][j] = entry
        power = nxt
        if all(jet_max(power[m][j]) == 0.0 for m in range(d) for j in range(d)):
            break
        fact *= k
        if bern[k] != 0.0:
            coeff = bern[k] / fact
            for m in range(d):
                for j in range(d):
                    out[m][j] = out[m][j] + coeff * power[m][j]
    return out


class FrameCalc:
    """Per-point linear operators of the frame fields on jet coefficients."""

    def __init__(self, model: LieModel, x: np.ndarray, order: int):
        self.model = model
        self.x = np.asarray(x, dtype=float)
        self.order = order
        d = model.dim
        self._space = get_space(d, order)
        self._chart = chart_field_jets(model, self.x, max(order - 1, 0))
        # ops[i][m]: coefficients of E_i f at order m-1 from f at order m,
        # assembled lazily since most pipelines touch few orders
        self.ops: list[dict[int, np.ndarray]] = [dict() for _ in range(d)]
        gam = algebra.adapted_gamma(model.onframe.c, model.dim_h)
        lc = algebra.levi_civita_gamma(model.onframe.c)
        self.kappa_h = np.einsum("kii->k", gam[:, : model.dim_h, : model.dim_h])
        self.kappa_full = np.einsum("kaa->k", lc)

    def _op(self, i: int, m: int) -> np.ndarray:
        op = self.ops[i].get(m)
        if op is None:
            sp = self._space
            for j in range(self.model.dim):
                cj = self._chart[j][i].truncated(m - 1)
                mat = sp.multiplication_matrix(cj.coeffs, m - 1) @ sp.derivative_matrix(j, m)
                op = mat if op is None else op + mat
            self.ops[i][m] = op
        return op

    def apply(self, i: int, jet: Jet) -> Jet:
        if jet.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        op = self._op(i, jet.order)
        return Jet(self.x, jet.order - 1, jet.coeffs @ op.T)

    def horizontal(self, jet: Jet) -> list[Jet]:
        return [self.apply(i, jet) for i in range(self.model.dim_h)]

    def vertical(self, jet: Jet) -> list[Jet]:
        return [self.apply(s, jet) for s in range(self.model.dim_h, self.model.dim)]

    def sublaplacian(self, jet: Jet) -> Jet:
        out = None
        for i in range(self.model.dim_h):
            term = self.apply(i, self.apply(i, jet))
            out = term if out is None else out + term
        for k in range(self.model.dim):
            if self.kappa_h[k] != 0.0:
                out = out - self.kappa_h[k] * self.apply(k, jet)
        return out

    def full_laplacian(self, jet: Jet) -> Jet:
        out = None
        for a in range(self.model.dim):
            term = self.apply(a, self.apply(a, jet))
            out = term if out is None else out + term
        for k in range(self.model.dim):
            if self.kappa_full[k] != 0.0:
                out = out - self.kappa_full[k] * self.apply(k, jet)
        return out


_CALC_CACHE: OrderedDict[tuple, FrameCalc] = OrderedDict()
_CALC_CACHE_MAX = 512


def get_calc(model: LieModel, x: np.ndarray, order: int) -> FrameCalc:
    x = np.asarray(x, dtype=float)
    key = (model.fingerprint, x.tobytes())
    calc = _CALC_CACHE.get(key)
    if calc is None or calc.order < order:
        calc = FrameCalc(model, x, order)
        _CALC_CACHE[key] = calc
        if len(_CALC_CACHE) > _CALC_CACHE_MAX:
            _CALC_CACHE.popitem(last=False)
    else:
        _CALC_CACHE.move_to_end(key)
    return calc


def apply_field(model: LieModel, i: int, jet: Jet) -> Jet:
    """Jet of E_i f from the jet of f, one order lower."""
    calc = get_calc(model, jet.base_point, jet.order)
    return calc.apply(i, jet)


# ----------------------------------------------------------------------
# Pointwise numeric evaluation along the frame (no jets)
# ----------------------------------------------------------------------


def frame_gradients(model: LieModel, f, points: np.ndarray) -> np.ndarray:
    """(E_a f)(points) for every frame index a; shape (..., dim)."""
    points = np.asarray(points, dtype=float)
    F = algebra.frame_coefficients(
        model.onframe.c, points, nil_step=model.onframe.nil_step
    )
    grads = f.eval_grad(points)
    return np.einsum("...ji,...j->...i", F, grads)


def gamma_numeric(model: LieModel, f, points: np.ndarray, which: str = "h") -> np.ndarray:
    """Squared frame gradient of f at points; which in {h, v, hv}."""
    g = frame_gradients(model, f, points)
    n = model.dim_h
    if which == "h":
        return np.sum(g[..., :n] ** 2, axis=-1)
    if which == "v":
        return np.sum(g[..., n:] ** 2, axis=-1)
    if which == "hv":
        return np.sum(g**2, axis=-1)
    raise ValueError(f"unknown gradient selector {which!r}")


def fd_frame_derivative(model: LieModel, f, x: np.ndarray, i: int, h: float = 1e-5) -> float:
    """Central-difference oracle for (E_i f)(x) through group translation."""
    x = np.asarray(x, dtype=float)
    e = np.zeros(model.dim)
    e[i] = h
    plus = np.asarray(f.eval(model.compose(x, e)))
    minus = np.asarray(f.eval(model.compose(x, -e)))
    return float(np.squeeze(plus - minus)) / (2.0 * h)
