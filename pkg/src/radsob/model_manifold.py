"""Rotationally symmetric model spaces with radial curvature control.

A model here is R^m with the metric dt^2 + h(t)^2 dtheta^2 where the
warping function solves h'' = G(t) h, h(0) = 0, h'(0) = 1 for a
nonnegative decaying curvature coefficient G.  The moment
b = integral(t G(t) dt) measures the total amount of negative curvature;
when it is finite the model is trapped between Euclidean space and a
bounded dilation of it, which is exactly what verify_volume_chain checks
on a grid.  Models can also be built directly from a closed-form warping
function, which is how nonnegatively curved examples (conical spaces)
enter the test matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .numerics import (
    DEFAULT_QUADRATURE,
    IvpSolution,
    QuadratureConfig,
    integrate_finite,
    solve_h_ivp,
)
from .talenti import sphere_area, unit_ball_volume


def _exp_or_inf(x: float) -> float:
    return math.inf if x > 700.0 else math.exp(x)


class CurvatureProfile:
    """Radial curvature coefficient G(t) >= 0 with cached moment b."""

    kind = "abstract"

    def g(self, t: float) -> float:
        raise NotImplementedError

    @property
    def b(self) -> float:
        raise NotImplementedError

    def moment_tail(self, t_from: float) -> float:
        """integral of t G(t) over [t_from, inf)."""
        raise NotImplementedError

    def spec_string(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec_string()}>"


class ZeroCurvature(CurvatureProfile):
    kind = "zero"

    def g(self, t):
        return 0.0

    @property
    def b(self):
        return 0.0

    def moment_tail(self, t_from):
        return 0.0

    def spec_string(self):
        return "zero"


class ConstantCutoff(CurvatureProfile):
    """G = a on [0, t_cut], zero beyond.  t_cut may be math.inf."""

    kind = "constant_cutoff"

    def __init__(self, a: float, t_cut: float):
        if a < 0.0 or not math.isfinite(a):
            raise ValueError("curvature level a must be finite and >= 0")
        if t_cut < 0.0:
            raise ValueError("cutoff radius must be >= 0")
        self.a = a
        self.t_cut = t_cut

    def g(self, t):
        return self.a if t <= self.t_cut else 0.0

    @property
    def b(self):
        if self.a == 0.0:
            return 0.0
        if math.isinf(self.t_cut):
            return math.inf
        return 0.5 * self.a * self.t_cut**2

    def moment_tail(self, t_from):
        if self.a == 0.0 or t_from >= self.t_cut:
            return 0.0
        if math.isinf(self.t_cut):
            return math.inf
        return 0.5 * self.a * (self.t_cut**2 - t_from**2)

    def spec_string(self):
        cut = "inf" if math.isinf(self.t_cut) else f"{self.t_cut:g}"
        return f"const:{self.a:g}:{cut}"


class RationalDecay(CurvatureProfile):
    """G(t) = 2 b0 / (1 + t^2)^2, whose moment is exactly b0."""

    kind = "rational_decay"

    def __init__(self, b0: float):
        if b0 < 0.0 or not math.isfinite(b0):
            raise ValueError("moment b0 must be finite and >= 0")
        self.b0 = b0

    def g(self, t):
        return 2.0 * self.b0 / (1.0 + t * t) ** 2

    @property
    def b(self):
        return self.b0

    def moment_tail(self, t_from):
        return self.b0 / (1.0 + t_from**2)

    def spec_string(self):
        return f"rational:{self.b0:g}"


class Tabulated(CurvatureProfile):
    """Piecewise-linear G on a grid with a declared power-law tail.

    Beyond the last node the profile continues as
    values[-1] * (grid[-1] / t)^tail_power; the tail power must exceed 2
    so the moment converges.
    """

    kind = "tabulated"

    def __init__(self, grid, values, tail_power: float):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or len(grid) < 2:
            raise ValueError("tabulated profile needs matching 1-d grid and values, length >= 2")
        if grid[0] < 0.0 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("tabulated grid must be nonnegative and strictly increasing")
        if np.any(values < 0.0):
            raise ValueError("curvature values must be >= 0")
        if not (tail_power > 2.0):
            raise ValueError(
                f"tail_power must exceed 2 so the curvature moment converges, got {tail_power!r}"
            )
        self.grid = grid
        self.values = values
        self.tail_power = float(tail_power)
        self._b = self._segment_moment(grid[0]) + self.moment_tail(grid[-1])
        if grid[0] > 0.0:
            # The profile is taken constant at values[0] on [0, grid[0]].
            self._b += 0.5 * values[0] * grid[0] ** 2

    def g(self, t):
        if t <= self.grid[0]:
            return float(self.values[0])
        if t >= self.grid[-1]:
            return float(self.values[-1] * (self.grid[-1] / t) ** self.tail_power)
        return float(np.interp(t, self.grid, self.values))

    def _segment_moment(self, t_from: float) -> float:
        # t * G is piecewise quadratic where G is piecewise linear, so a
        # per-segment Simpson rule is exact.
        total = 0.0
        for a, b in zip(self.grid[:-1], self.grid[1:]):
            lo = max(float(a), t_from)
            if lo >= b:
                continue
            mid = 0.5 * (lo + b)
            total += (b - lo) / 6.0 * (
                lo * self.g(lo) + 4.0 * mid * self.g(mid) + b * self.g(b)
            )
        return total

    @property
    def b(self):
        return self._b

    def moment_tail(self, t_from):
        t_last = float(self.grid[-1])
        v_last = float(self.values[-1])
        q = self.tail_power
        start = max(t_from, t_last)
        tail = v_last * t_last**q * start ** (2.0 - q) / (q - 2.0)
        if t_from >= t_last:
            return tail
        inner = self._segment_moment(t_from)
        if t_from < self.grid[0]:
            inner += 0.5 * self.values[0] * (self.grid[0] ** 2 - t_from**2)
        return inner + tail

    def spec_string(self):
        return f"table:<{len(self.grid)} nodes, tail_power={self.tail_power:g}>"


def load_tabulated(path: str | Path) -> Tabulated:
    """Read a tabulated profile from a two-column text file.

    Rows hold "t value" pairs; a directive line "# tail_power=<q>" declares
    the tail decay exponent and is required.
    """
    grid, values = [], []
    tail_power = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("tail_power"):
                try:
                    tail_power = float(body.split("=", 1)[1])
                except (IndexError, ValueError):
                    raise ValueError(f"malformed tail_power directive: {raw!r}") from None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected 't value' pairs in {path}, got {raw!r}")
        grid.append(float(parts[0]))
        values.append(float(parts[1]))
    if tail_power is None:
        raise ValueError(f"profile table {path} is missing the '# tail_power=<q>' directive")
    return Tabulated(grid, values, tail_power)


def parse_curvature(spec: str) -> CurvatureProfile:
    """Parse a curvature description of the form used on the command line.

    Grammar: "zero" | "const:<a>:<t_cut>" | "rational:<b0>" | "table:<path>"
    where <t_cut> may be "inf".
    """
    spec = spec.strip()
    if spec == "zero":
        return ZeroCurvature()
    head, _, rest = spec.partition(":")
    try:
        if head == "const":
            a_str, _, cut_str = rest.partition(":")
            if not a_str or not cut_str:
                raise ValueError
            return ConstantCutoff(float(a_str), float(cut_str))
        if head == "rational":
            if not rest:
                raise ValueError
            return RationalDecay(float(rest))
        if head == "table":
            if not rest:
                raise ValueError
            return load_tabulated(rest)
    except ValueError as exc:
        detail = f": {exc}" if str(exc) else ""
        raise ValueError(f"malformed curvature spec {spec!r}{detail}") from None
    raise ValueError(
        f"unknown curvature spec {spec!r}; expected zero | const:<a>:<t_cut> | "
        "rational:<b0> | table:<path>"
    )


@dataclass(eq=False)
class ModelManifold:
    """A warped-product model with cached area and volume along the radius.

    Depending on how it was built the warping function comes either from
    the curvature IVP (with a dense fourth-order interpolant) or from
    closed-form callables.  Ball volumes are cached on the uniform grid by
    a derivative-corrected trapezoid sweep, so volume lookups are O(1).
    """

    m: int
    t_max: float
    step: float
    profile: CurvatureProfile | None
    name: str
    sol: IvpSolution | None
    h_call: Callable[[float], float] | None
    hp_call: Callable[[float], float] | None
    hpp_call: Callable[[float], float] | None
    is_euclidean: bool = False

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("model dimension must be at least 2")
        self.omega_sphere = sphere_area(self.m)
        self.omega_m = unit_ball_volume(self.m)
        n = max(1, round(self.t_max / self.step))
        self._nodes = np.linspace(0.0, self.t_max, n + 1)
        if self.sol is not None:
            h_nodes = self.sol.values
            hp_nodes = self.sol.derivs
        else:
            h_nodes = np.array([self.h_call(t) for t in self._nodes])
            hp_nodes = np.array([self.hp_call(t) for t in self._nodes])
        self._h_nodes = h_nodes
        self._hp_nodes = hp_nodes
        f = self.omega_sphere * h_nodes ** (self.m - 1)
        fp = self.omega_sphere * (self.m - 1) * h_nodes ** (self.m - 2) * hp_nodes
        dt = self._nodes[1] - self._nodes[0]
        dv = 0.5 * dt * (f[:-1] + f[1:]) + dt * dt / 12.0 * (fp[:-1] - fp[1:])
        self._vol_nodes = np.concatenate(([0.0], np.cumsum(dv)))
        self._grid_dt = dt

    # -- warping function --------------------------------------------------

    def _check_window(self, t: float):
        if not (0.0 <= t <= self.t_max * (1.0 + 1e-12)):
            raise ValueError(f"t={t:g} outside the model window [0, {self.t_max:g}]")

    def h(self, t: float) -> float:
        self._check_window(t)
        if self.sol is not None:
            return self.sol.value(t)
        return self.h_call(t)

    def h_prime(self, t: float) -> float:
        self._check_window(t)
        if self.sol is not None:
            return self.sol.deriv(t)
        return self.hp_call(t)

    def h_second(self, t: float) -> float:
        self._check_window(t)
        if self.profile is not None:
            return self.profile.g(t) * self.h(t)
        return self.hpp_call(t)

    # -- geometry ----------------------------------------------------------

    def area(self, t: float) -> float:
        """Area of the geodesic sphere of radius t."""
        if self.is_euclidean:
            self._check_window(t)
            return self.omega_sphere * t ** (self.m - 1)
        return self.omega_sphere * self.h(t) ** (self.m - 1)

    def volume(self, t: float) -> float:
        """Volume of the geodesic ball of radius t."""
        self._check_window(t)
        if self.is_euclidean:
            return self.omega_m * t**self.m
        i = min(int(t / self._grid_dt), len(self._nodes) - 2)
        t_i = self._nodes[i]
        if t == t_i:
            return float(self._vol_nodes[i])
        h_t = self.h(t)
        hp_t = self.h_prime(t)
        f_i = self.omega_sphere * self._h_nodes[i] ** (self.m - 1)
        fp_i = self.omega_sphere * (self.m - 1) * self._h_nodes[i] ** (self.m - 2) * self._hp_nodes[i]
        f_t = self.omega_sphere * h_t ** (self.m - 1)
        fp_t = self.omega_sphere * (self.m - 1) * h_t ** (self.m - 2) * hp_t
        dt = t - t_i
        return float(
            self._vol_nodes[i] + 0.5 * dt * (f_i + f_t) + dt * dt / 12.0 * (fp_i - fp_t)
        )

    def radial_ricci(self, t: float) -> float:
        """Ricci curvature in the radial direction, -(m-1) h''/h.

        For profile-built models the IVP identity gives -(m-1) G(t)
        exactly, which is also valid at t = 0.
        """
        self._check_window(t)
        if self.profile is not None:
            return -(self.m - 1) * self.profile.g(t)
        if t == 0.0:
            raise ValueError("radial Ricci at the apex needs a curvature profile")
        return -(self.m - 1) * self.h_second(t) / self.h(t)

    def laplacian_radial(self, t: float) -> float:
        """Laplacian of the distance function, (m-1) h'(t)/h(t), for t > 0."""
        if not (t > 0.0):
            raise ValueError("the distance Laplacian is singular at t = 0")
        self._check_window(t)
        return (self.m - 1) * self.h_prime(t) / self.h(t)

    # -- controlled continuation beyond the window -------------------------

    def area_extended(self) -> Callable[[float], float]:
        """Area as a function on all of [0, inf).

        Closed-form models evaluate exactly.  IVP-built models continue h
        linearly from the window edge; the matching uncertainty factor is
        available from tail_factor().
        """
        if self.sol is None:
            m1 = self.m - 1
            om = self.omega_sphere
            h_call = self.h_call
            return lambda t: om * h_call(t) ** m1
        h_end = float(self.sol.values[-1])
        hp_end = float(self.sol.derivs[-1])
        t_end = self.t_max
        om = self.omega_sphere
        m1 = self.m - 1
        sol = self.sol

        def ext(t: float) -> float:
            if t <= t_end:
                return om * sol.value(t) ** m1
            return om * (h_end + hp_end * (t - t_end)) ** m1

        return ext

    def tail_factor(self) -> float:
        """Upper bound for area_extended underestimation beyond the window.

        The true warping function h satisfies w <= h <= w * F past the
        window edge, where w is the linear continuation and
        F = exp(kappa * integral of s G(s) over [t_max, inf)) with
        kappa = 1 + h(T)/(T h'(T)).  The area factor is F^(m-1).  Closed
        form models return exactly 1.
        """
        if self.sol is None:
            return 1.0
        remaining = self.profile.moment_tail(self.t_max) if self.profile else math.inf
        if remaining == 0.0:
            return 1.0
        h_end = float(self.sol.values[-1])
        hp_end = float(self.sol.derivs[-1])
        kappa = 1.0 + h_end / (hp_end * self.t_max)
        return _exp_or_inf((self.m - 1) * kappa * remaining)

    def __repr__(self):
        return f"<ModelManifold {self.name} m={self.m} t_max={self.t_max:g}>"


def build_model(
    m: int,
    profile: CurvatureProfile,
    t_max: float = 50.0,
    step: float = 1e-3,
    with_error_estimate: bool = True,
) -> ModelManifold:
    """Solve the warping IVP for a curvature profile and assemble the model."""
    if isinstance(profile, ZeroCurvature):
        model = euclidean_model(m, t_max, step)
        return model
    sol = solve_h_ivp(profile.g, t_max, step, with_error_estimate=with_error_estimate)
    return ModelManifold(
        m=m,
        t_max=t_max,
        step=sol.step,
        profile=profile,
        name=profile.spec_string(),
        sol=sol,
        h_call=None,
        hp_call=None,
        hpp_call=None,
    )


def euclidean_model(m: int, t_max: float = 50.0, step: float = 1e-3) -> ModelManifold:
    """Flat R^m as a model: h(t) = t with exact area and volume."""
    return ModelManifold(
        m=m,
        t_max=t_max,
        step=step,
        profile=ZeroCurvature(),
        name="euclidean",
        sol=None,
        h_call=lambda t: t,
        hp_call=lambda t: 1.0,
        hpp_call=lambda t: 0.0,
        is_euclidean=True,
    )


def model_from_warping(
    m: int,
    h: Callable[[float], float],
    h_prime: Callable[[float], float],
    h_second: Callable[[float], float],
    t_max: float = 50.0,
    step: float = 1e-3,
    name: str = "custom",
) -> ModelManifold:
    """Model from a closed-form warping function with h(0)=0, h'(0)=1."""
    if abs(h(0.0)) > 1e-9 or abs(h_prime(0.0) - 1.0) > 1e-9:
        raise ValueError("warping function must satisfy h(0)=0 and h'(0)=1")
    return ModelManifold(
        m=m,
        t_max=t_max,
        step=step,
        profile=None,
        name=name,
        sol=None,
        h_call=h,
        hp_call=h_prime,
        hpp_call=h_second,
    )


def conical_model(m: int, c: float, t_max: float = 50.0, step: float = 1e-3) -> ModelManifold:
    """Nonnegatively curved model opening onto a cone of slope c in (0, 1].

    h(t) = c t + (1-c)(1 - e^-t) interpolates between the Euclidean apex
    (h ~ t near zero) and linear growth with slope c; its radial Ricci
    curvature (m-1)(1-c) e^-t / h is nonnegative.
    """
    if not (0.0 < c <= 1.0):
        raise ValueError("cone slope c must lie in (0, 1]")
    d = 1.0 - c
    return model_from_warping(
        m,
        h=lambda t: c * t + d * (1.0 - math.exp(-t)),
        h_prime=lambda t: c + d * math.exp(-t),
        h_second=lambda t: -d * math.exp(-t),
        t_max=t_max,
        step=step,
        name=f"conical:{c:g}",
    )


@dataclass(frozen=True)
class ChainCheck:
    name: str
    t: float
    lhs: float
    rhs: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class VolumeChainReport:
    rows: tuple
    b_used: float
    slack: float

    @property
    def all_pass(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self):
        return [row for row in self.rows if not row.passed]


def verify_volume_chain(
    model: ModelManifold,
    t_grid,
    b: float | None = None,
    inner: ModelManifold | None = None,
    slack: float = 1e-8,
) -> VolumeChainReport:
    """Check the two-sided area and volume comparison along a radius grid.

    Verified per grid point, with relative slack:
      * lower_area / lower_volume: the model dominates Euclidean space;
      * upper_area: area <= e^(b (m-1)) * Euclidean area;
      * upper_volume: volume <= e^(b m) * Euclidean volume;
      * with an inner model: its area stays below the model's, and the
        area ratio inner/model is nonincreasing along the grid.

    The moment b defaults to the model's own profile moment; passing a
    finite override is how an infinite-moment control is shown to break
    the upper chain.
    """
    m = model.m
    if b is None:
        if model.profile is None:
            raise ValueError("model has no curvature profile; pass the moment b explicitly")
        b = model.profile.b
    area_factor = _exp_or_inf(b * (m - 1))
    vol_factor = _exp_or_inf(b * m)
    om_s = model.omega_sphere
    om_m = model.omega_m

    def check(name, t, lhs, rhs):
        lhs = float(lhs)
        rhs = float(rhs)
        scale = max(abs(lhs), abs(rhs), 1.0)
        return ChainCheck(name, float(t), lhs, rhs, rhs - lhs, bool(lhs <= rhs + slack * scale))

    rows = []
    prev_ratio = None
    for t in t_grid:
        a_euc = om_s * t ** (m - 1)
        v_euc = om_m * t**m
        a_h = model.area(t)
        v_h = model.volume(t)
        rows.append(check("lower_area", t, a_euc, a_h))
        rows.append(check("lower_volume", t, v_euc, v_h))
        rows.append(check("upper_area", t, a_h, area_factor * a_euc))
        rows.append(check("upper_volume", t, v_h, vol_factor * v_euc))
        if inner is not None:
            a_in = inner.area(t)
            rows.append(check("inner_area", t, a_in, a_h))
            if t > 0.0:
                ratio = a_in / a_h
                if prev_ratio is not None:
                    rows.append(check("inner_ratio_monotone", t, ratio, prev_ratio))
                prev_ratio = ratio
    return VolumeChainReport(rows=tuple(rows), b_used=b, slack=slack)


def curvature_moment(g: Callable[[float], float], t_max: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Quadrature of the curvature moment integral of t g(t) over [0, t_max].

    Utility for checking cached b values of profile objects against direct
    integration (the analytic tail beyond t_max is not included).
    """
    return integrate_finite(lambda t: t * g(t), 0.0, t_max, cfg)
