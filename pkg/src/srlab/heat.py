"""Monte Carlo estimation of the horizontal heat semigroup.

The diffusion generated by half the sub-Laplacian is simulated by
group-exponential increments: each step multiplies the current group
element on the right by exp(sqrt(h) sum_i xi_i A_i) with independent
standard normals xi over the orthonormal horizontal frame.  Because
increments compose through exact group multiplication, the walk stays
on the group, constants are preserved exactly, and the estimator of
P_t 1 is identically 1.

Streams are counter-based (Philox keyed by seed and chunk index), so
estimates are bit-reproducible for fixed settings regardless of how
chunks are scheduled.  Gradient estimates use common random numbers
across a symmetric stencil of group-translated starting points, which
removes almost all of the noise of the finite difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import frames
from .models import LieModel

CHUNK = 1 << 14


@dataclass
class SemigroupEstimate:
    """One Monte Carlo (or PDE) reading of P_t f at a point."""

    value: float
    std_error: float
    t: float
    x: list
    method: str
    paths: int
    steps: int
    seed: int
    settings: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class GradientEstimate:
    """Squared frame gradient of P_t f at a point, with error bars."""

    value: float
    std_error: float
    directional: list
    which: str
    t: float
    x: list
    paths: int
    steps: int
    seed: int
    delta: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _chunks(paths: int) -> list[int]:
    out = [CHUNK] * (paths // CHUNK)
    if paths % CHUNK:
        out.append(paths % CHUNK)
    return out


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, index]))


def _evolve(model: LieModel, starts: np.ndarray, t: float, steps: int, size: int,
            rng: np.random.Generator) -> np.ndarray:
    """Final states of `size` paths from each start; common noise across starts.

    starts has shape (S, d); returns (S, size, d).
    """
    n = model.dim_h
    d = model.dim
    states = np.broadcast_to(starts[:, None, :], (starts.shape[0], size, d)).copy()
    if t == 0 or steps == 0:
        return states
    h = t / steps
    sqh = np.sqrt(h)
    w = np.zeros((size, d))
    for _ in range(steps):
        xi = rng.standard_normal((size, n))
        w[:, :n] = sqh * xi
        states = model.compose(states, w[None, :, :])
    return states


def mc_semigroup_many(
    model: LieModel,
    integrands: list,
    x: np.ndarray,
    t: float,
    paths: int,
    steps: int,
    seed: int,
) -> list[SemigroupEstimate]:
    """Estimate P_t f(x) for several integrands over one set of paths.

    Sharing paths gives the estimates a common probability space, which
    the inequality checks need (their two sides must see the same
    noise).
    """
    if paths < 1 or steps < 1:
        raise ValueError("paths and steps must be >= 1")
    if t < 0:
        raise ValueError("negative time")
    x = np.asarray(x, dtype=float)
    k = len(integrands)
    sums = np.zeros(k)
    sumsq = np.zeros(k)
    cross = np.zeros((k, k))
    for idx, size in enumerate(_chunks(paths)):
        rng = _stream(seed, idx)
        states = _evolve(model, x[None, :], t, steps, size, rng)[0]
        vals = np.stack([np.asarray(f.eval(states), dtype=float) for f in integrands])
        sums += vals.sum(axis=1)
        sumsq += (vals**2).sum(axis=1)
        cross += vals @ vals.T
    means = sums / paths
    out = []
    for i, f in enumerate(integrands):
        var = max(sumsq[i] / paths - means[i] ** 2, 0.0)
        if paths > 1:
            var *= paths / (paths - 1)
        out.append(
            SemigroupEstimate(
                value=float(means[i]),
                std_error=float(np.sqrt(var / paths)),
                t=t,
                x=x.tolist(),
                method="mc",
                paths=paths,
                steps=steps,
                seed=seed,
            )
        )
    # attach the covariance of the means for downstream delta methods
    cov = cross / paths - np.outer(means, means)
    if paths > 1:
        cov *= paths / (paths - 1)
    for est in out:
        est.settings["mean_cov"] = (cov / paths).tolist()
        est.settings["means"] = means.tolist()
    return out


def mc_semigroup(
    model: LieModel, f, x, t: float, paths: int, steps: int, seed: int
) -> SemigroupEstimate:
    """Monte Carlo estimate of P_t f(x)."""
    return mc_semigroup_many(model, [f], x, t, paths, steps, seed)[0]


def mc_variance(
    model: LieModel, f, x, t: float, paths: int, steps: int, seed: int
) -> tuple[float, float]:
    """Estimate of P_t f^2 - (P_t f)^2 with a delta-method error bar."""

    class _Sq:
        def eval(self, pts):
            return np.asarray(f.eval(pts)) ** 2

    est_f, est_f2 = mc_semigroup_many(model, [f, _Sq()], x, t, paths, steps, seed)
    m1, m2 = est_f.value, est_f2.value
    cov = np.asarray(est_f.settings["mean_cov"])
    grad = np.array([-2.0 * m1, 1.0])
    var = float(grad @ cov @ grad)
    return m2 - m1**2, float(np.sqrt(max(var, 0.0)))


def _stencil_dirs(model: LieModel, which: str) -> list[int]:
    if which == "h":
        return list(range(model.dim_h))
    if which == "v":
        return list(range(model.dim_h, model.dim))
    if which == "hv":
        return list(range(model.dim))
    raise ValueError(f"unknown gradient selector {which!r}")


def mc_gradient(
    model: LieModel,
    f,
    x,
    t: float,
    which: str = "h",
    paths: int = 20000,
    steps: int = 100,
    seed: int = 0,
    delta: float = 1e-3,
) -> GradientEstimate:
    """Estimate Gamma^which(P_t f)(x) by stencil differences.

    Starting points are the group translates x exp(+-delta E_i); all
    stencil corners ride the same Brownian increments, so each
    directional derivative is a difference of strongly coupled means.
    The squared-norm estimate subtracts the noise bias tr(Cov) and the
    error bar comes from the delta method on the directional means.
    """
    x = np.asarray(x, dtype=float)
    dirs = _stencil_dirs(model, which)
    m = len(dirs)
    starts = np.empty((2 * m, model.dim))
    for a, i in enumerate(dirs):
        e = np.zeros(model.dim)
        e[i] = delta
        starts[2 * a] = model.compose(x, e)
        starts[2 * a + 1] = model.compose(x, -e)
    sums = np.zeros(m)
    cross = np.zeros((m, m))
    for idx, size in enumerate(_chunks(paths)):
        rng = _stream(seed, idx)
        states = _evolve(model, starts, t, steps, size, rng)
        vals = np.stack(
            [np.asarray(f.eval(states[r]), dtype=float) for r in range(2 * m)]
        )
        g = (vals[0::2] - vals[1::2]) / (2.0 * delta)  # (m, size)
        sums += g.sum(axis=1)
        cross += g @ g.T
    means = sums / paths
    cov = cross / paths - np.outer(means, means)
    if paths > 1:
        cov *= paths / (paths - 1)
    cov_mean = cov / paths
    value = float(means @ means - np.trace(cov_mean))
    var = float(4.0 * means @ cov_mean @ means + 2.0 * np.sum(cov_mean**2))
    return GradientEstimate(
        value=value,
        std_error=float(np.sqrt(max(var, 0.0))),
        directional=means.tolist(),
        which=which,
        t=t,
        x=x.tolist(),
        paths=paths,
        steps=steps,
        seed=seed,
        delta=delta,
    )


def mc_gamma_mixed(
    model: LieModel,
    f,
    x,
    t: float,
    l: float,
    paths: int,
    steps: int,
    seed: int,
    delta: float = 1e-3,
) -> tuple[float, float]:
    """Gamma^h(P_t f) + l Gamma^v(P_t f) at x, with combined error bar."""
    gh = mc_gradient(model, f, x, t, "h", paths, steps, seed, delta)
    gv = mc_gradient(model, f, x, t, "v", paths, steps, seed, delta)
    val = gh.value + l * gv.value
    err = float(np.hypot(gh.std_error, l * gv.std_error))
    return val, err


class FrameGammaIntegrand:
    """Pathwise evaluator of Gamma^which(f), usable as an MC integrand."""

    def __init__(self, model: LieModel, f, which: str = "h", l: float = 1.0,
                 transform=None):
        self.model = model
        self.f = f
        self.which = which
        self.l = l
        self.transform = transform

    def eval(self, points: np.ndarray) -> np.ndarray:
        if self.which == "mixed":
            v = frames.gamma_numeric(self.model, self.f, points, "h") + (
                self.l * frames.gamma_numeric(self.model, self.f, points, "v")
            )
        else:
            v = frames.gamma_numeric(self.model, self.f, points, self.which)
        if self.transform is not None:
            v = self.transform(v)
        return v
