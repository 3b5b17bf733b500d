"""Oscillatory-integral evaluation and norms.

The one evaluation core handles both the plain frequency-domain operator
(f integrated against e^{i lambda x . curve(t)}) and chart-side phases
(graph embeddings of the sphere or of integral submanifolds).  Panels are
sized from a sampled bound on the t-derivative of the total phase so a
16-point Gauss-Legendre rule per panel is spectrally accurate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .curves import Curve
from .errors import ResolutionError
from .measures import GraphPatch, QuadMeasure, SubmanifoldPatch, gauss_legendre

PANEL_CAP = 0.5 * np.pi     # max phase increment per panel
PANEL_ORDER = 16            # Gauss-Legendre points per panel
MIN_PANELS = 4
DERIV_SAMPLES = 64          # t-samples for the phase-derivative bound
DERIV_SAFETY = 2.0
_Y_CHUNK = 512
_T_BLOCK = 2048


# ----------------------------------------------------------------------
# inputs
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """One interval of a piecewise input.

    ``modulation`` is None or a pair (x0, lam) standing for the factor
    e^{-i lam x0 . curve(t)}; ``sign`` is the Rademacher factor kept
    separate from the amplitude so random draws stay visible.
    """

    start: float
    end: float
    amplitude: complex = 1.0 + 0.0j
    modulation: tuple | None = None
    sign: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError("segment endpoints must be finite")
        if self.end < self.start:
            raise ValueError("segment must have end >= start")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +-1")
        if not np.isfinite(complex(self.amplitude)):
            raise ValueError("amplitude must be finite")
        if self.modulation is not None:
            x0, lam = self.modulation
            x0 = tuple(float(v) for v in np.atleast_1d(x0))
            object.__setattr__(self, "modulation", (x0, float(lam)))

    @property
    def length(self) -> float:
        return self.end - self.start

    @property
    def coefficient(self) -> complex:
        return self.sign * complex(self.amplitude)


@dataclass(frozen=True)
class TestFunction:
    """Piecewise input on the parameter interval: disjoint segments."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        ivals = sorted((s.start, s.end) for s in segs)
        for (a0, b0), (a1, b1) in zip(ivals, ivals[1:]):
            if a1 < b0 - 1e-14:
                raise ValueError("segments must be pairwise disjoint")
        object.__setattr__(self, "segments", segs)

    @property
    def support_length(self) -> float:
        return sum(s.length for s in self.segments)

    def scaled(self, factor: complex) -> "TestFunction":
        return TestFunction(tuple(
            Segment(s.start, s.end, factor * s.amplitude, s.modulation, s.sign)
            for s in self.segments
        ))


def indicator(start: float, end: float, amplitude: complex = 1.0,
              modulation: tuple | None = None, sign: int = 1) -> TestFunction:
    return TestFunction((Segment(start, end, amplitude, modulation, sign),))


# ----------------------------------------------------------------------
# amplitude windows
# ----------------------------------------------------------------------

def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for u <= 0, 0 for u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        b = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class AmplitudeWindow:
    """Product bump: 1 inside |y_i| <= r_i, 0 outside |y_i| >= 2 r_i."""

    radii: tuple

    def __post_init__(self):
        r = tuple(float(v) for v in np.atleast_1d(self.radii))
        if any(v <= 0 for v in r):
            raise ValueError("window radii must be positive")
        object.__setattr__(self, "radii", r)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = np.ones(y.shape[0])
        for i, r in enumerate(self.radii):
            out *= _smooth_step(np.abs(y[:, i]) / r - 1.0)
        return out

    @property
    def support_radii(self) -> tuple:
        return tuple(2.0 * r for r in self.radii)


# ----------------------------------------------------------------------
# phases
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseSpec:
    """Phase Psi(y, t) of the chart-side operator.

    kind "extension": y is an ambient point x, Psi = x . curve(t).
    kind "graph": Psi = (patch_value(y) - offset, y) . curve(t); the
        sphere chart takes offset 1 (its height enters as phi(y) - 1),
        integral graphs take offset 0.
    kind "custom": bivariate polynomial Psi = sum c[m, n] y^m t^n for
        scalar y, mostly for stress-testing the solvers.
    """

    kind: str
    curve: Curve | None = None
    patch: object | None = None          # GraphPatch | SubmanifoldPatch
    offset: float = 0.0
    window: AmplitudeWindow | None = None
    table: tuple | None = None           # custom polynomial coefficients

    def __post_init__(self):
        if self.kind not in ("extension", "graph", "custom"):
            raise ValueError(f"unknown phase kind {self.kind!r}")
        if self.kind in ("extension", "graph") and self.curve is None:
            raise ValueError("curve required")
        if self.kind == "graph" and self.patch is None:
            raise ValueError("patch required for graph phase")
        if self.kind == "custom":
            if self.table is None:
                raise ValueError("table required for custom phase")
            tab = tuple(tuple(float(v) for v in row) for row in self.table)
            object.__setattr__(self, "table", tab)

    @property
    def base_dim(self) -> int:
        if self.kind == "extension":
            return self.curve.dim
        if self.kind == "graph":
            return self.patch.base_dim
        return 1

    def embed(self, y: np.ndarray) -> np.ndarray:
        """Map chart points to ambient frequency points."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if self.kind == "extension":
            if y.shape[1] != self.curve.dim:
                raise ValueError("point dimension mismatch")
            return y
        if self.kind == "graph":
            return self.patch.embed(y, offset=self.offset)
        raise ValueError("custom phases have no ambient embedding")

    def values(self, y: np.ndarray, ts: np.ndarray, order: int = 0) -> np.ndarray:
        """d_t^order Psi on the product grid, shape (n_y, n_t)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if self.kind == "custom":
            y = np.atleast_2d(np.asarray(y, dtype=float))[:, 0]
            out = np.zeros((y.size, ts.size))
            for m, row in enumerate(self.table):
                tpart = np.zeros_like(ts)
                for n, cmn in enumerate(row):
                    if n >= order and cmn != 0.0:
                        fall = math.perm(n, order)
                        tpart += cmn * fall * ts ** (n - order)
                out += (y ** m)[:, None] * tpart[None, :]
            return out
        emb = self.embed(y)
        return emb @ self.curve.eval_many(ts, order).T


def graph_phase(curve: Curve, patch, offset: float | None = None,
                window: AmplitudeWindow | None = None) -> PhaseSpec:
    """Chart phase for a graph patch; sphere caps default to offset 1."""
    if offset is None:
        offset = 1.0 if getattr(patch, "kind", "") == "sphere_cap" else 0.0
    return PhaseSpec(kind="graph", curve=curve, patch=patch, offset=offset,
                     window=window)


def extension_phase(curve: Curve) -> PhaseSpec:
    return PhaseSpec(kind="extension", curve=curve)


# ----------------------------------------------------------------------
# evaluation core
# ----------------------------------------------------------------------

def _as_phase(curve_or_phase) -> PhaseSpec:
    if isinstance(curve_or_phase, PhaseSpec):
        return curve_or_phase
    if isinstance(curve_or_phase, Curve):
        return extension_phase(curve_or_phase)
    raise TypeError("expected a Curve or a PhaseSpec")


def _modulation_row(phase: PhaseSpec, seg: Segment, ts: np.ndarray,
                    order: int = 0) -> np.ndarray | None:
    """lam_mod * x0 . curve^{(order)}(ts) for a modulated segment."""
    if seg.modulation is None:
        return None
    x0, lam_mod = seg.modulation
    curve = phase.curve
    if curve is None:
        raise ValueError("curve_phase modulation requires a curve-based phase")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (curve.dim,):
        raise ValueError("modulation point dimension mismatch")
    return lam_mod * (curve.eval_many(ts, order) @ x0)


def _panel_nodes(seg: Segment, n_panels: int):
    """Composite Gauss-Legendre nodes/weights over the segment."""
    gx, gw = gauss_legendre(PANEL_ORDER)
    edges = np.linspace(seg.start, seg.end, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    ts = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    ws = (half[:, None] * gw[None, :]).ravel()
    return ts, ws


def _segment_panel_count(phase: PhaseSpec, lam: float, seg: Segment,
                         ypts: np.ndarray) -> int:
    if seg.length == 0.0:
        return 0
    ts = np.linspace(seg.start, seg.end, DERIV_SAMPLES)
    dph = lam * phase.values(ypts, ts, order=1)
    mrow = _modulation_row(phase, seg, ts, order=1)
    if mrow is not None:
        dph = dph - mrow[None, :]
    sup = float(np.max(np.abs(dph)))
    need = DERIV_SAFETY * sup * seg.length / PANEL_CAP
    return max(MIN_PANELS, int(math.ceil(need)))


def eval_field(curve_or_phase, lam: float, f: TestFunction,
               ypts: np.ndarray, apply_window: bool = True) -> np.ndarray:
    """Evaluate the operator at chart points, shape (n,) complex.

    Work is chunked over points; each chunk shares one panel layout per
    segment, sized from the chunk-wide phase-derivative bound.
    """
    phase = _as_phase(curve_or_phase)
    ypts = np.atleast_2d(np.asarray(ypts, dtype=float))
    n = ypts.shape[0]
    out = np.zeros(n, dtype=complex)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    for lo in range(0, n, _Y_CHUNK):
        hi = min(n, lo + _Y_CHUNK)
        chunk = ypts[lo:hi]
        acc = np.zeros(hi - lo, dtype=complex)
        for seg in f.segments:
            if seg.length == 0.0:
                continue
            n_panels = _segment_panel_count(phase, lam, seg, chunk)
            ts, ws = _panel_nodes(seg, n_panels)
            coeff = seg.coefficient
            for blo in range(0, ts.size, _T_BLOCK):
                bhi = min(ts.size, blo + _T_BLOCK)
                tb, wb = ts[blo:bhi], ws[blo:bhi]
                ph = lam * phase.values(chunk, tb, order=0)
                mrow = _modulation_row(phase, seg, tb)
                if mrow is not None:
                    ph -= mrow[None, :]
                acc += coeff * (np.exp(1j * ph) @ wb)
        out[lo:hi] = acc
    if apply_window and phase.window is not None:
        out *= phase.window(ypts)
    return out


def extension_eval(curve: Curve, lam: float, f: TestFunction, x) -> complex:
    """T f at a single frequency point x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return complex(eval_field(curve, lam, f, x)[0])


def phase_eval(phase: PhaseSpec, lam: float, f: TestFunction, y) -> complex:
    """Chart-side operator at a single base point (0 outside the window)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if phase.window is not None and float(phase.window(y)[0]) == 0.0:
        return 0.0 + 0.0j
    return complex(eval_field(phase, lam, f, y)[0])


def field(curve_or_phase, lam: float, f: TestFunction, mu: QuadMeasure,
          strict: bool = False,
          required_spacing: float | None = None) -> np.ndarray:
    """Operator values on all measure nodes, in node order.

    Sphere measures are held to the frequency spacing rule (see
    sphere_spacing_rule); other measures are checked only when the caller
    supplies its own bound.  Violations warn, or raise under strict.
    """
    from .measures import sphere_spacing_rule

    phase = _as_phase(curve_or_phase)
    if required_spacing is None and mu.provenance == "sphere":
        required_spacing = sphere_spacing_rule(mu.dim, max(lam, 1.0))
    if required_spacing is not None and mu.max_spacing > required_spacing * (1 + 1e-9):
        msg = (f"measure spacing {mu.max_spacing:.3e} exceeds the "
               f"lambda rule {required_spacing:.3e} at lambda={lam:g}")
        if strict:
            raise ResolutionError(msg)
        warnings.warn(msg, stacklevel=2)
    return eval_field(phase, lam, f, mu.nodes)


# ----------------------------------------------------------------------
# norms
# ----------------------------------------------------------------------

def lq_norm(values: np.ndarray, mu: QuadMeasure, q: float) -> float:
    """(integral |F|^q dmu)^{1/q}; q = inf gives the max over nodes."""
    values = np.asarray(values)
    if values.shape[0] != mu.size:
        raise ValueError("field/measure size mismatch")
    if math.isinf(q):
        return float(np.max(np.abs(values)))
    if q < 1:
        raise ValueError("q >= 1 required")
    return float(np.sum(mu.weights * np.abs(values) ** q) ** (1.0 / q))


def lp_norm(f: TestFunction, p: float) -> float:
    """Exact L^p norm of a piecewise-constant-modulus input."""
    if p < 1:
        raise ValueError("p >= 1 required")
    lens = np.array([s.length for s in f.segments])
    mods = np.array([abs(s.coefficient) for s in f.segments])
    if math.isinf(p):
        return float(np.max(mods[lens > 0], initial=0.0))
    return float(np.sum(mods**p * lens) ** (1.0 / p))


def lorentz_norm(f: TestFunction, p: float, q: float) -> float:
    """L^{p,q} via the decreasing rearrangement, exact on step functions.

    ||f||_{p,q}^q = sum_j v_j^q (p/q)(T_j^{q/p} - T_{j-1}^{q/p}) where v_j
    are the distinct moduli in decreasing order and T_j the cumulative
    lengths; q = inf gives the weak-L^p functional sup v T^{1/p}.
    """
    if p < 1 or q < 1:
        raise ValueError("p, q >= 1 required")
    if math.isinf(p):
        if math.isinf(q):
            return lp_norm(f, math.inf)
        raise ValueError("p = inf requires q = inf")
    lens = np.array([s.length for s in f.segments])
    mods = np.array([abs(s.coefficient) for s in f.segments])
    keep = (lens > 0) & (mods > 0)
    lens, mods = lens[keep], mods[keep]
    if lens.size == 0:
        return 0.0
    order = np.argsort(-mods)
    lens, mods = lens[order], mods[order]
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    if math.isinf(q):
        return float(np.max(mods * cum[1:] ** (1.0 / p)))
    total = np.sum(mods**q * (p / q) * (cum[1:] ** (q / p) - cum[:-1] ** (q / p)))
    return float(total ** (1.0 / q))
