"""Function models, integration domains, energy parameters, and the
catalog of test functions used by the experiment suite.

A :class:`FunctionModel` evaluates a scalar function on ``(..., n)`` point
arrays (analytic closures or multilinear grid interpolation); a
:class:`Domain` is an axis-aligned box, a ball, or a bounding box standing
in for all of R^n (test functions must then be supported inside it, and
the support margin is recorded).  :class:`EnergyParams` carries ``(n, s, p)``
and the derived exponent ``q`` that makes the graph energy comparable to
the second-difference seminorm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import _mc


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def derive_q(n: int, s: float, p: float, strict: bool = True) -> float:
    """Exponent q = n(n+1)/(n+2) + p(n+1+s)/(n+2).

    ``strict=False`` evaluates the bare formula without range validation
    (used only for formula edge checks).
    """
    if strict:
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise ValueError("n must be a positive integer")
        if not 0.0 < s < 1.0:
            raise ValueError("s must lie in (0, 1)")
        if not (1.0 < p < math.inf):
            raise ValueError("p must lie in (1, inf)")
    return n * (n + 1) / (n + 2) + p * (n + 1 + s) / (n + 2)


@dataclass(frozen=True)
class EnergyParams:
    """Dimension and exponents (n, s, p); q is always derived, never free."""

    n: int
    s: float
    p: float

    def __post_init__(self):
        derive_q(self.n, self.s, self.p)  # validates ranges

    @property
    def q(self) -> float:
        return derive_q(self.n, self.s, self.p)

    @property
    def hypothesis_ok(self) -> bool:
        """Whether the theorem hypothesis n/p < 1 + s holds."""
        return self.n / self.p < 1.0 + self.s


@dataclass(frozen=True)
class HRegion:
    """The set of offsets h with x+h and x-h both inside the domain.

    For box domains this is the exact centered box; for balls a symmetric
    lens, reported through its inscribed/outer radii plus an exact
    membership predicate for rejection sampling.  Symmetric under h -> -h
    by construction.
    """

    kind: str                      # "box" or "lens"
    halfwidths: np.ndarray | None  # box kind
    excenter: np.ndarray | None    # lens kind: x - center
    ball_radius: float | None      # lens kind
    outer_radius: float
    inscribed_radius: float

    def contains(self, h: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(np.asarray(h, dtype=float))
        if self.kind == "box":
            ok = np.all(np.abs(h) <= self.halfwidths, axis=-1)
        else:
            e, r = self.excenter, self.ball_radius
            ok = (np.linalg.norm(h + e, axis=-1) < r) & \
                 (np.linalg.norm(h - e, axis=-1) < r)
        return ok


@dataclass(frozen=True)
class Domain:
    """Open integration domain: box, ball, or truncated full space."""

    kind: str            # "box", "ball", "rn"
    lower: np.ndarray    # bounding box
    upper: np.ndarray
    center: np.ndarray | None = None
    radius: float | None = None
    support_margin: float | None = None  # rn kind: recorded requirement

    @staticmethod
    def box(bounds) -> "Domain":
        b = np.asarray(bounds, dtype=float)
        if b.ndim == 1:
            b = b[None, :]
        if b.shape[-1] != 2 or np.any(b[:, 1] <= b[:, 0]):
            raise ValueError("box bounds must be (n, 2) with positive edges")
        return Domain("box", b[:, 0].copy(), b[:, 1].copy())

    @staticmethod
    def ball(center, radius: float) -> "Domain":
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        return Domain("ball", c - radius, c + radius, center=c, radius=float(radius))

    @staticmethod
    def truncated_rn(bounds, support_margin: float = 0.0) -> "Domain":
        base = Domain.box(bounds)
        return Domain("rn", base.lower, base.upper,
                      support_margin=float(support_margin))

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def volume(self) -> float:
        if self.kind == "ball":
            return unit_ball_volume(self.n) * self.radius ** self.n
        return float(np.prod(self.widths))

    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return float(np.linalg.norm(self.widths))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.linalg.norm(x - self.center, axis=-1) < self.radius
        return np.all((x > self.lower) & (x < self.upper), axis=-1)

    def interval(self) -> tuple[float, float]:
        """The domain as an interval; one-dimensional domains only."""
        if self.n != 1:
            raise ValueError("interval() requires a 1-d domain")
        return float(self.lower[0]), float(self.upper[0])

    # -- uniform sampling from counter-based draws --------------------------

    @property
    def draws_per_point(self) -> int:
        if self.kind == "ball":
            return _mc.normals_needed(self.n) + 1
        return self.n

    def points_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Map (..., draws_per_point) uniforms to uniform points of the domain."""
        if self.kind == "ball":
            g = _mc.standard_normals(u, self.n)
            return self.center + self.radius * _mc.ball_points(g, u[:, -1])
        return self.lower + u * self.widths

    def describe(self) -> str:
        if self.kind == "ball":
            c = ",".join(repr(v) for v in self.center)
            return f"ball:{c}:{self.radius!r}"
        body = "x".join(f"{lo!r},{hi!r}" for lo, hi in zip(self.lower, self.upper))
        return f"rn:{body}" if self.kind == "rn" else body


def h_box(domain: Domain, x) -> HRegion:
    """The centered admissible-offset set at x (exact box for box domains;
    inscribed ball + exact predicate for ball domains)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not bool(domain.contains(x)):
        raise ValueError("h_box requires x inside the domain")
    if domain.kind == "ball":
        e = x - domain.center
        de = float(np.linalg.norm(e))
        outer = math.sqrt(max(domain.radius ** 2 - de ** 2, 0.0))
        return HRegion("lens", None, e, domain.radius,
                       outer_radius=outer,
                       inscribed_radius=domain.radius - de)
    m = np.minimum(x - domain.lower, domain.upper - x)
    return HRegion("box", m, None, None,
                   outer_radius=float(np.linalg.norm(m)),
                   inscribed_radius=float(m.min()))


@dataclass(frozen=True)
class FunctionModel:
    """Evaluatable scalar function on R^n with optional analytic gradient.

    ``support`` is an (n, 2) box outside which the function vanishes
    (exactly, or below numerical noise for rapidly decaying models);
    ``None`` means no compact support is claimed.
    """

    name: str
    n: int
    fn: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    smoothness: str = ""
    support: np.ndarray | None = None
    sup_bound: float | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise ValueError(f"expected points of R^{self.n}, got shape {x.shape}")
        return self.fn(x)

    def gradient(self, x) -> np.ndarray:
        if self.grad is None:
            raise NotImplementedError(f"{self.name} has no analytic gradient")
        return self.grad(np.asarray(x, dtype=float))

    @property
    def has_gradient(self) -> bool:
        return self.grad is not None

    def support_diameter(self) -> float:
        if self.support is None:
            raise ValueError(f"{self.name} has no recorded compact support")
        return float(np.linalg.norm(self.support[:, 1] - self.support[:, 0]))


def _vec_param(value, n: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if v.shape == (1,) and n > 1:
        v = np.full(n, v[0])
    if v.shape != (n,):
        raise ValueError(f"expected a scalar or length-{n} vector, got {v.shape}")
    return v


def _bump_profile(u: np.ndarray) -> np.ndarray:
    # exp(1 - 1/(1-u)) on u < 1, zero outside; C^inf with support {u <= 1}
    out = np.zeros_like(u)
    inside = u < 1.0 - 1e-14
    ui = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui))
    return out


def _make_affine(n, a=0.0, b=0.0):
    bv = _vec_param(b, n)
    return FunctionModel(
        "affine", n,
        fn=lambda x: a + x @ bv,
        grad=lambda x: np.broadcast_to(bv, x.shape).copy(),
        smoothness="affine", params={"a": a, "b": bv.tolist()})


def _make_quadratic(n, amplitude=1.0, center=0.0):
    c = _vec_param(center, n)
    return FunctionModel(
        "quadratic", n,
        fn=lambda x: amplitude * np.sum((x - c) ** 2, axis=-1),
        grad=lambda x: 2.0 * amplitude * (x - c),
        smoothness="polynomial",
        params={"amplitude": amplitude, "center": c.tolist()})


def _make_gaussian(n, amplitude=1.0, center=0.0, sigma=0.1):
    c = _vec_param(center, n)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    # Nominal support: 8 sigma, below which the tails are < 1.3e-14 relative.
    supp = np.stack([c - 8.0 * sigma, c + 8.0 * sigma], axis=-1)

    def f(x):
        return amplitude * np.exp(-np.sum((x - c) ** 2, axis=-1) / (2 * sigma ** 2))

    return FunctionModel(
        "gaussian-bump", n, fn=f,
        grad=lambda x: (f(x) / sigma ** 2)[..., None] * (c - x),
        smoothness="smooth, rapidly decaying", support=supp,
        sup_bound=abs(amplitude),
        params={"amplitude": amplitude, "center": c.tolist(), "sigma": sigma})


def _make_compact_bump(n, amplitude=1.0, center=0.0, radius=0.5):
    c = _vec_param(center, n)
    if radius <= 0:
        raise ValueError("radius must be positive")
    r2 = radius ** 2

    def f(x):
        return amplitude * _bump_profile(np.sum((x - c) ** 2, axis=-1) / r2)

    def g(x):
        u = np.sum((x - c) ** 2, axis=-1) / r2
        out = np.zeros_like(x)
        inside = u < 1.0 - 1e-14
        ui = u[inside]
        scale = amplitude * np.exp(1.0 - 1.0 / (1.0 - ui)) / (1.0 - ui) ** 2
        out[inside] = (-2.0 / r2) * scale[..., None] * (x[inside] - c)
        return out

    return FunctionModel(
        "compact-bump", n, fn=f, grad=g,
        smoothness="smooth, compactly supported",
        support=np.stack([c - radius, c + radius], axis=-1),
        sup_bound=abs(amplitude),
        params={"amplitude": amplitude, "center": c.tolist(), "radius": radius})


def _make_sine_pack(n, amplitude=1.0, center=0.0, radius=0.6,
                    frequency=6.0, phase=0.0):
    c = _vec_param(center, n)
    w = _vec_param(frequency, n)
    window = _make_compact_bump(n, 1.0, center, radius)

    def f(x):
        return amplitude * np.sin(x @ w + phase) * window(x)

    def g(x):
        s = np.sin(x @ w + phase)
        return amplitude * (np.cos(x @ w + phase)[..., None] * w * window(x)[..., None]
                            + s[..., None] * window.gradient(x))

    return FunctionModel(
        "sine-pack", n, fn=f, grad=g,
        smoothness="smooth, compactly supported oscillation",
        support=window.support, sup_bound=abs(amplitude),
        params={"amplitude": amplitude, "center": c.tolist(),
                "radius": radius, "frequency": w.tolist(), "phase": phase})


def _make_power_cusp(n, alpha=0.3, center=0.0, amplitude=1.0):
    c = _vec_param(center, n)
    if not 0.0 < alpha:
        raise ValueError("alpha must be positive")

    def f(x):
        return amplitude * np.linalg.norm(x - c, axis=-1) ** alpha

    return FunctionModel(
        "power-cusp", n, fn=f, grad=None,
        smoothness=f"cusp |x-c|^{alpha} (no integrable classical gradient model)",
        params={"alpha": alpha, "center": c.tolist(), "amplitude": amplitude})


def grid_model(axes, values, name="grid") -> FunctionModel:
    """Multilinear interpolation of samples on a uniform rectangular grid.

    Defined only inside the grid hull; evaluation outside raises.
    Interpolation error is the caller's responsibility; the grid spacing is
    echoed through ``params`` into every report.
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    values = np.asarray(values, dtype=float)
    n = len(axes)
    for a in axes:
        if a.ndim != 1 or a.size < 2:
            raise ValueError("each grid axis needs at least 2 points")
        steps = np.diff(a)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps[0]:
            raise ValueError("grid axes must be strictly increasing and uniform")
    if values.shape != tuple(a.size for a in axes):
        raise ValueError("values shape must match the axes")
    interp = RegularGridInterpolator(axes, values, method="linear",
                                     bounds_error=True)
    supp = np.array([[a[0], a[-1]] for a in axes])

    def f(x):
        x = np.asarray(x, dtype=float)
        return interp(x.reshape(-1, n)).reshape(x.shape[:-1])

    spacing = [float(a[1] - a[0]) for a in axes]
    return FunctionModel(
        name, n, fn=f, grad=None, smoothness="piecewise multilinear",
        support=supp, params={"grid_shape": list(values.shape),
                              "grid_spacing": spacing})


def grid_from_csv(path) -> FunctionModel:
    """Read grid samples: header ``x_1,...,x_n,f``, one sample per row,
    row-major over a uniform grid (last coordinate varies fastest)."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    cols = list(data.dtype.names)
    if cols[-1] != "f":
        raise ValueError("grid CSV must end with an 'f' column")
    n = len(cols) - 1
    expected = [f"x_{i + 1}" for i in range(n)]
    if cols[:-1] != expected:
        raise ValueError(f"grid CSV columns must be {expected + ['f']}, got {cols}")
    coords = np.stack([np.asarray(data[c], dtype=float) for c in expected], axis=1)
    values = np.asarray(data["f"], dtype=float)
    axes = [np.unique(coords[:, i]) for i in range(n)]
    shape = tuple(a.size for a in axes)
    if values.size != int(np.prod(shape)):
        raise ValueError("grid CSV rows do not fill a full rectangular grid")
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    if not np.allclose(coords, mesh, rtol=0, atol=1e-9):
        raise ValueError("grid CSV rows must be row-major (last axis fastest)")
    return grid_model(axes, values.reshape(shape), name="grid")


_BUILDERS = {
    "affine": _make_affine,
    "quadratic": _make_quadratic,
    "gaussian-bump": _make_gaussian,
    "compact-bump": _make_compact_bump,
    "sine-pack": _make_sine_pack,
    "power-cusp": _make_power_cusp,
}


def test_function(name: str, n: int = 1, **params) -> FunctionModel:
    """Catalog constructor for the named analytic test function."""
    if name == "grid":
        if "csv" in params:
            return grid_from_csv(params["csv"])
        return grid_model(params["axes"], params["values"])
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(
            f"unknown test function {name!r}; choose from "
            f"{sorted(_BUILDERS) + ['grid']}") from None
    return builder(n, **params)


def from_json_descriptor(source) -> FunctionModel:
    """Build a model from a JSON descriptor: ``{"name": ..., "params": {...}}``
    or ``{"grid_csv": path}``.  ``source`` is a path, a JSON string, or a dict."""
    if isinstance(source, dict):
        desc = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            desc = json.loads(text)
        else:
            with open(text) as fh:
                desc = json.load(fh)
    if "grid_csv" in desc:
        return grid_from_csv(desc["grid_csv"])
    params = dict(desc.get("params", {}))
    n = int(params.pop("n", desc.get("n", 1)))
    return test_function(desc["name"], n=n, **params)


def default_catalog(n: int = 1) -> list[FunctionModel]:
    """The four-function smooth compactly supported catalog used by the
    equivalence experiments; all supports sit inside [-0.85, 0.85]^n."""
    e1 = np.zeros(n)
    e1[0] = 1.0
    return [
        _make_gaussian(n, amplitude=1.0, center=0.0 * e1, sigma=0.1),
        _make_compact_bump(n, amplitude=1.0, center=0.15 * e1, radius=0.5),
        _make_sine_pack(n, amplitude=1.0, center=0.0 * e1, radius=0.6,
                        frequency=6.0),
        _make_gaussian(n, amplitude=0.6, center=-0.25 * e1, sigma=0.07),
    ]


def scale_model(f: FunctionModel, lam: float, s: float) -> FunctionModel:
    """The anisotropic rescale f_lam(x) = lam^(1+s) f(x/lam); the natural
    scaling under which the energy and the seminorms transform by powers
    of lam."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    amp = lam ** (1.0 + s)
    supp = None if f.support is None else f.support * lam
    grad = None
    if f.grad is not None:
        grad = lambda x: lam ** s * f.grad(x / lam)
    return FunctionModel(
        f"{f.name}@lam={lam:g}", f.n,
        fn=lambda x: amp * f.fn(x / lam),
        grad=grad, smoothness=f.smoothness, support=supp,
        sup_bound=None if f.sup_bound is None else amp * f.sup_bound,
        params={**f.params, "lam": lam, "s": s})


def add_affine(f: FunctionModel, a: float, b) -> FunctionModel:
    """f plus the affine function a + b.x (shear of the graph)."""
    bv = _vec_param(b, f.n)
    grad = None
    if f.grad is not None:
        grad = lambda x: f.grad(x) + bv
    return FunctionModel(
        f"{f.name}+affine", f.n,
        fn=lambda x: f.fn(x) + a + x @ bv,
        grad=grad, smoothness=f.smoothness, support=None,
        params={**f.params, "shear_a": a, "shear_b": bv.tolist()})


def scale_amplitude(f: FunctionModel, c: float) -> FunctionModel:
    grad = None
    if f.grad is not None:
        grad = lambda x: c * f.grad(x)
    return FunctionModel(
        f"{c:g}*{f.name}", f.n,
        fn=lambda x: c * f.fn(x),
        grad=grad, smoothness=f.smoothness, support=f.support,
        sup_bound=None if f.sup_bound is None else abs(c) * f.sup_bound,
        params={**f.params, "amplitude_factor": c})
