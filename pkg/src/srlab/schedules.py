"""Weight schedules for semigroup interpolation bounds.

Each gradient or entropy bound comes from a pair (or triple) of time
weights (a, l, b) on [0, T] satisfying two differential inequalities
tied to the curvature-dimension constants:

    gradient kind:  da/dt + (rho1 - 1/l - 2b) a + C >= 0
                    dl/dt + rho20 + (rho21 + (da/dt)/a) l >= 0
    entropy kind:   same first condition,
                    dl/dt + rho20 + ((da/dt)/a) l >= 0

The entropy kind is used with the commuting-gradient form of the
inequality where the weight multiplies log-gradients and rho21 plays
no role.  Builders below attach exact derivative samples; the checker
combines them with central differences and grid refinement so that a
wrong analytic derivative cannot go unnoticed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_GRID = 2048


@dataclass
class Schedule:
    """Sampled weight functions with optional exact derivatives."""

    label: str
    kind: str                    # "gradient" or "entropy"
    T: float
    t: np.ndarray
    a: np.ndarray
    l: np.ndarray
    b: np.ndarray
    C: float
    provenance: str
    da: np.ndarray | None = None
    dl: np.ndarray | None = None
    db: np.ndarray | None = None
    degenerate: bool = False

    def interior(self) -> slice:
        return slice(1, len(self.t) - 1)


@dataclass
class ScheduleCheck:
    """Admissibility margins of one schedule for one constant set."""

    label: str
    margin: float                # min over both conditions, interior grid
    margin_first: float
    margin_second: float
    fd_deviation: float          # analytic vs central-difference margins
    refine_delta: float          # margin change under grid doubling
    grid: int
    issues: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.issues and self.margin >= -1e-8


def _fd(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Central differences on the interior, same length as interior grid."""
    return (y[2:] - y[:-2]) / (t[2:] - t[:-2])


def _margins(
    s: Schedule,
    constants,
    use_analytic: bool,
) -> tuple[np.ndarray, np.ndarray]:
    n, rho1, rho20, rho21 = (
        constants.as_tuple() if hasattr(constants, "as_tuple") else constants
    )
    it = s.interior()
    t, a, l, b = s.t[it], s.a[it], s.l[it], s.b[it]
    if np.any(a <= 0) or np.any(l <= 0):
        raise ValueError(f"schedule {s.label!r} must be positive on the open interval")
    if use_analytic:
        da, dl, db = s.da[it], s.dl[it], s.db[it]
    else:
        da, dl = _fd(s.t, s.a), _fd(s.t, s.l)
    first = da + (rho1 - 1.0 / l - 2.0 * b) * a + s.C
    if s.kind == "gradient":
        second = dl + rho20 + rho21 * l + da * l / a
    elif s.kind == "entropy":
        second = dl + rho20 + da * l / a
    else:
        raise ValueError(f"unknown schedule kind {s.kind!r}")
    return first, second


def admissibility_margins(
    s: Schedule,
    constants,
    rebuild=None,
) -> ScheduleCheck:
    """Minimum slack of both conditions over the interior grid.

    When the schedule carries analytic derivatives they give the
    reported margins and central differences act as a consistency
    check away from the interval ends; otherwise the margins come from
    central differences directly.  `rebuild`, when given, produces the
    same schedule on a doubled grid for a refinement stability
    estimate.
    """
    issues: list[str] = []
    analytic = s.da is not None and s.dl is not None
    first, second = _margins(s, constants, use_analytic=analytic)
    margin_first = float(first.min())
    margin_second = float(second.min())

    fd_dev = 0.0
    if analytic:
        f_fd, s_fd = _margins(s, constants, use_analytic=False)
        # compare away from the ends, where central differences of the
        # possibly singular weights are trustworthy
        k = max(len(f_fd) // 50, 2)
        sl = slice(k, len(f_fd) - k)
        fd_dev = float(
            max(np.max(np.abs(first[sl] - f_fd[sl])), np.max(np.abs(second[sl] - s_fd[sl])))
        )
        scale = 1.0 + float(np.max(np.abs(first[sl]))) + float(np.max(np.abs(second[sl])))
        if fd_dev > 1e-3 * scale:
            issues.append(f"analytic and difference derivatives disagree by {fd_dev:g}")

    refine_delta = 0.0
    if rebuild is not None:
        s2 = rebuild(2 * (len(s.t) - 1))
        f2, s2m = _margins(s2, constants, use_analytic=s2.da is not None)
        refine_delta = float(
            max(abs(margin_first - f2.min()), abs(margin_second - s2m.min()))
        )
    return ScheduleCheck(
        label=s.label,
        margin=min(margin_first, margin_second),
        margin_first=margin_first,
        margin_second=margin_second,
        fd_deviation=fd_dev,
        refine_delta=refine_delta,
        grid=len(s.t),
        issues=issues,
    )


def ratio_monotonicity(s: Schedule) -> float:
    """Min of d/dt (a / l) on the interior grid (central differences)."""
    r = s.a / np.where(s.l == 0, np.nan, s.l)
    d = _fd(s.t, r)
    return float(np.nanmin(d))


# ----------------------------------------------------------------------
# Builders
# ----------------------------------------------------------------------


def _grid(T: float, n: int) -> np.ndarray:
    return np.linspace(0.0, T, n + 1)


def gradient_constant_weight(
    constants, T: float, l: float = 1.0, n: int = DEFAULT_GRID
) -> Schedule:
    """Constant l with exponentially decaying a; always admissible."""
    _, rho1, rho20, rho21 = _astuple(constants)
    alpha = min(rho1 - 1.0 / l, rho21 + rho20 / l)
    t = _grid(T, n)
    a = np.exp(-alpha * t)
    return Schedule(
        label=f"grad-a(l={l:g})",
        kind="gradient",
        T=T,
        t=t,
        a=a,
        l=np.full_like(t, l),
        b=np.zeros_like(t),
        C=0.0,
        provenance="constant-weight gradient decay",
        da=-alpha * a,
        dl=np.zeros_like(t),
        db=np.zeros_like(t),
    )


def gradient_variance_linear(constants, T: float, n: int = DEFAULT_GRID) -> Schedule:
    """Linear a and l vanishing at T; yields the variance bound."""
    _, rho1, rho20, rho21 = _astuple(constants)
    if rho20 <= 0:
        raise ValueError("variance schedule needs rho20 > 0")
    k1 = max(0.0, -rho1)
    k2 = max(0.0, -rho21)
    t = _grid(T, n)
    slope = rho20 / (T * k2 + 2.0)
    return Schedule(
        label="grad-b",
        kind="gradient",
        T=T,
        t=t,
        a=T - t,
        l=slope * (T - t),
        b=np.zeros_like(t),
        C=1.0 + k1 * T + (T * k2 + 2.0) / rho20,
        provenance="linear-vanishing variance bound",
        da=np.full_like(t, -1.0),
        dl=np.full_like(t, -slope),
        db=np.zeros_like(t),
    )


def gradient_variance_exponential(
    constants, T: float, n: int = DEFAULT_GRID
) -> Schedule:
    """Saturating a = (1 - e^(-rho1 (T-t))) / rho1 with matched l.

    Degenerates to the linear schedule when rho1 = 0, in which case the
    schedule is flagged and equals grad-b with k1 = k2 = 0.
    """
    _, rho1, rho20, rho21 = _astuple(constants)
    if rho1 < 0 or rho21 < 0 or rho20 <= 0:
        raise ValueError("exponential schedule needs rho1, rho21 >= 0 and rho20 > 0")
    t = _grid(T, n)
    tau = T - t
    if rho1 == 0:
        return Schedule(
            label="grad-c",
            kind="gradient",
            T=T,
            t=t,
            a=tau,
            l=0.5 * rho20 * tau,
            b=np.zeros_like(t),
            C=1.0 + 2.0 / rho20,
            provenance="exponential weight (flat-curvature limit)",
            da=np.full_like(t, -1.0),
            dl=np.full_like(t, -0.5 * rho20),
            db=np.zeros_like(t),
            degenerate=True,
        )
    em = np.exp(-rho1 * tau)
    a = (1.0 - em) / rho1
    da = -em
    with np.errstate(invalid="ignore", divide="ignore"):
        l = rho20 * (em - 1.0 + rho1 * tau) / (rho1 * (1.0 - em))
        l = np.where(tau <= 0, 0.0, l)
        dl = np.where(a > 0, -rho20 - l * da / np.where(a > 0, a, 1.0), 0.0)
    return Schedule(
        label="grad-c",
        kind="gradient",
        T=T,
        t=t,
        a=a,
        l=l,
        b=np.zeros_like(t),
        C=1.0 + 2.0 / rho20,
        provenance="exponential weight with integral-matched l",
        da=da,
        dl=dl,
        db=np.zeros_like(t),
    )


def gradient_reverse(
    constants, T: float, l0: float = 1.0, n: int = DEFAULT_GRID
) -> Schedule:
    """Increasing a = t with negative C; bounds variance from below."""
    _, rho1, rho20, rho21 = _astuple(constants)
    if rho1 < 0 or rho20 < 0 or rho21 < 0:
        raise ValueError("reverse schedule needs nonnegative constants")
    t = _grid(T, n)
    slope = (l0 + T) / T
    return Schedule(
        label=f"grad-d(l0={l0:g})",
        kind="gradient",
        T=T,
        t=t,
        a=t.copy(),
        l=slope * t,
        b=np.zeros_like(t),
        C=-l0 / (l0 + T),
        provenance="increasing weight, reverse variance bound",
        da=np.ones_like(t),
        dl=np.full_like(t, slope),
        db=np.zeros_like(t),
    )


def entropy_schedule(constants, T: float, n: int = DEFAULT_GRID) -> Schedule:
    """Entropy-kind schedule with b = 0; pairs with log-gradient bounds."""
    g = gradient_variance_exponential(constants, T, n)
    return Schedule(
        label="entropy",
        kind="entropy",
        T=T,
        t=g.t,
        a=g.a,
        l=g.l,
        b=g.b,
        C=g.C,
        provenance="entropy bound weight",
        da=g.da,
        dl=g.dl,
        db=g.db,
        degenerate=g.degenerate,
    )


def liyau_schedule(
    constants, T: float, alpha: float, n: int = DEFAULT_GRID
) -> Schedule:
    """Power-law family behind the dimensional gradient-Laplacian bound.

    alpha > 0 maps to the exponent beta = (alpha+2)/(alpha+1) in (1, 2);
    both conditions hold with equality, so the margins here are a pure
    probe of the checker's numerical floor.
    """
    _, rho1, rho20, rho21 = _astuple(constants)
    if rho20 <= 0 or alpha <= 0:
        raise ValueError("power schedule needs rho20 > 0 and alpha > 0")
    t = _grid(T, n)
    tau = T - t
    a = tau ** (alpha + 1.0)
    l = rho20 * tau / (alpha + 2.0)
    coef = alpha + 1.0 + (alpha + 2.0) / rho20
    with np.errstate(divide="ignore"):
        b = 0.5 * (rho1 - coef / np.where(tau > 0, tau, np.nan))
        db = -0.5 * coef / np.where(tau > 0, tau, np.nan) ** 2
    return Schedule(
        label=f"liyau(alpha={alpha:g})",
        kind="entropy",
        T=T,
        t=t,
        a=a,
        l=l,
        b=np.nan_to_num(b, nan=0.0, posinf=0.0, neginf=0.0),
        C=0.0,
        provenance="power-law weight of the dimensional bound",
        da=-(alpha + 1.0) * tau**alpha,
        dl=np.full_like(t, -rho20 / (alpha + 2.0)),
        db=np.nan_to_num(db, nan=0.0, posinf=0.0, neginf=0.0),
    )


def _astuple(constants):
    return constants.as_tuple() if hasattr(constants, "as_tuple") else tuple(constants)


def builtin_schedules(
    constants,
    T: float,
    l_values=(1.0,),
    alpha_values=(0.5, 1.0, 2.0),
    n: int = DEFAULT_GRID,
) -> tuple[list[Schedule], dict[str, str]]:
    """All built-in schedules whose hypotheses the constants satisfy.

    Returns (schedules, skipped) where skipped maps labels of omitted
    schedules to the hypothesis they violate.
    """
    out: list[Schedule] = []
    skipped: dict[str, str] = {}
    for l in l_values:
        out.append(gradient_constant_weight(constants, T, l, n))
    for label, builder in [
        ("grad-b", lambda: gradient_variance_linear(constants, T, n)),
        ("grad-c", lambda: gradient_variance_exponential(constants, T, n)),
        ("grad-d", lambda: gradient_reverse(constants, T, 1.0, n)),
        ("entropy", lambda: entropy_schedule(constants, T, n)),
    ]:
        try:
            out.append(builder())
        except ValueError as err:
            skipped[label] = str(err)
    for alpha in alpha_values:
        try:
            out.append(liyau_schedule(constants, T, alpha, n))
        except ValueError as err:
            skipped[f"liyau(alpha={alpha:g})"] = str(err)
    return out, skipped
