"""Oscillatory field evaluation: oracles, covariances, norms, resolution."""

import math

import mpmath
import numpy as np
import pytest

from rlab.curves import TypeTuple, dyadic_rescale, moment_curve, monomial_curve
from rlab.errors import ResolutionError
from rlab.measures import sphere_cap_graph, sphere_measure
from rlab.oscillatory import (
    AmplitudeWindow,
    PhaseSpec,
    Segment,
    TestFunction as StepFn,
    eval_field,
    extension_eval,
    extension_phase,
    field,
    graph_phase,
    indicator,
    lorentz_norm,
    lp_norm,
    lq_norm,
    phase_eval,
)

MC2 = moment_curve(2)


def test_dc_value_is_support_length():
    f = indicator(0.1, 0.7)
    assert abs(extension_eval(MC2, 50.0, f, np.zeros(2)) - 0.6) < 1e-12
    # lambda = 0 collapses every phase as well
    assert abs(extension_eval(MC2, 0.0, f, np.array([3.0, -2.0])) - 0.6) < 1e-12


def test_extension_against_adaptive_oracle():
    lam = 37.0
    xs = [np.array([0.31, -0.7]), np.array([-1.2, 0.44])]
    f = indicator(0.0, 1.0)
    for x in xs:
        got = extension_eval(MC2, lam, f, x)
        want = mpmath.quad(
            lambda t: mpmath.e ** (1j * lam * (x[0] * t + x[1] * t * t / 2)),
            [0, 1],
        )
        assert abs(got - complex(want)) < 1e-12


def test_high_frequency_against_dense_gauss():
    lam = 200.0
    x = np.array([0.8, 0.55])
    got = extension_eval(MC2, lam, indicator(0.0, 1.0), x)
    gt, gw = np.polynomial.legendre.leggauss(4000)
    ts = 0.5 * (gt + 1.0)
    ph = lam * (x[0] * ts + x[1] * ts * ts / 2)
    want = complex(np.sum(0.5 * gw * np.exp(1j * ph)))
    assert abs(got - want) < 1e-9 * abs(want)


def test_linearity():
    lam, x = 64.0, np.array([0.5, 0.2])
    fa = indicator(0.0, 0.4)
    fb = indicator(0.4, 1.0, amplitude=2.0 - 1.0j)
    both = StepFn(fa.segments + fb.segments)
    va = extension_eval(MC2, lam, fa, x)
    vb = extension_eval(MC2, lam, fb, x)
    assert abs(extension_eval(MC2, lam, both, x) - (va + vb)) < 1e-12
    assert abs(extension_eval(MC2, lam, fa.scaled(3.0j), x) - 3.0j * va) < 1e-12


def test_modulation_translates_field():
    """A segment modulation e^{-i lam x0.gamma} recenters the output."""
    lam = 48.0
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(100):
        x0 = rng.normal(size=2)
        x = rng.normal(size=2)
        f_mod = indicator(0.0, 0.8, modulation=(tuple(x0), lam))
        a = extension_eval(MC2, lam, f_mod, x)
        b = extension_eval(MC2, lam, indicator(0.0, 0.8), x - x0)
        worst = max(worst, abs(a - b))
    assert worst < 1e-9


def test_sign_flips_field():
    lam, x = 32.0, np.array([0.3, 0.3])
    plus = indicator(0.0, 0.5, sign=1)
    minus = indicator(0.0, 0.5, sign=-1)
    assert abs(extension_eval(MC2, lam, plus, x)
               + extension_eval(MC2, lam, minus, x)) < 1e-14


def test_anisotropic_rescaling_identity():
    """Zooming the curve trades frequency points for input dilation."""
    curve = monomial_curve([1, 2, 4])
    a = TypeTuple((1, 2, 4))
    for ell in (1, 2):
        zoom = dyadic_rescale(curve, a, ell)
        dmat = np.diag([2.0 ** (ell * ai) for ai in a])
        rng = np.random.default_rng(ell)
        for _ in range(5):
            x = rng.uniform(-0.5, 0.5, size=3)
            lam = 29.0
            lhs = extension_eval(zoom, lam, indicator(0.0, 1.0), x)
            rhs = 2.0**ell * extension_eval(
                curve, lam, indicator(0.0, 2.0**-ell), dmat @ x
            )
            assert abs(lhs - rhs) < 1e-10


def test_chart_field_equals_extension_at_embedded_point():
    phase = graph_phase(MC2, sphere_cap_graph(2))
    f = indicator(0.0, 1.0)
    for lam in (16.0, 64.0):
        for yv in (-0.4, 0.0, 0.23):
            y = np.array([[yv]])
            emb = phase.embed(y)[0]
            assert abs(np.linalg.norm(emb) - 1.0) < 1e-12
            va = eval_field(phase, lam, f, y)[0]
            vb = extension_eval(MC2, lam, f, emb)
            assert abs(va - vb) < 1e-12


def test_phase_eval_respects_window():
    win = AmplitudeWindow(radii=(0.25,))
    phase = graph_phase(MC2, sphere_cap_graph(2), window=win)
    f = indicator(0.0, 1.0)
    assert phase_eval(phase, 32.0, f, np.array([0.9])) == 0.0
    inner = phase_eval(phase, 32.0, f, np.array([0.05]))
    assert abs(inner) > 0.0


def test_custom_phase_polynomial():
    # Psi(y, t) = y t + 2 y^2 t^3 evaluated directly
    phase = PhaseSpec(kind="custom", table=((0.0, 0.0, 0.0, 0.0),
                                            (0.0, 1.0, 0.0, 0.0),
                                            (0.0, 0.0, 0.0, 2.0)))
    y = np.array([[0.5], [-1.0]])
    ts = np.array([0.2, 0.7])
    want = y[:, :1] * ts[None, :] + 2.0 * y[:, :1] ** 2 * ts[None, :] ** 3
    assert np.max(np.abs(phase.values(y, ts) - want)) < 1e-14
    dt = y[:, :1] + 6.0 * y[:, :1] ** 2 * ts[None, :] ** 2
    assert np.max(np.abs(phase.values(y, ts, order=1) - dt)) < 1e-14


def test_lp_norm_closed_forms():
    f = indicator(0.0, 0.5)
    assert abs(lp_norm(f, 2) - math.sqrt(0.5)) < 1e-15
    assert lp_norm(f, math.inf) == 1.0
    g = StepFn((Segment(0.0, 0.25, amplitude=2.0),
                      Segment(0.5, 1.0, amplitude=1.0j)))
    assert abs(lp_norm(g, 3) - (8.0 * 0.25 + 0.5) ** (1.0 / 3.0)) < 1e-15
    assert lp_norm(g, math.inf) == 2.0
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_lq_norm():
    mu = sphere_measure(2, 64)
    ones = np.ones(mu.size)
    assert abs(lq_norm(ones, mu, 3) - (2 * math.pi) ** (1 / 3)) < 1e-12
    assert lq_norm(2.5 * ones, mu, math.inf) == 2.5
    with pytest.raises(ValueError):
        lq_norm(ones[:-1], mu, 2)
    with pytest.raises(ValueError):
        lq_norm(ones, mu, 0.5)


def test_lorentz_norm():
    f = indicator(0.0, 0.7)
    # L^{p,p} collapses to L^p on step functions
    rng = np.random.default_rng(21)
    for _ in range(20):
        cuts = np.sort(rng.uniform(0.0, 1.0, size=4))
        amps = rng.uniform(0.2, 3.0, size=3)
        g = StepFn(tuple(
            Segment(a, b, amplitude=c)
            for a, b, c in zip(cuts[:-1], cuts[1:], amps)
        ))
        for p in (1.5, 2.0, 4.0):
            assert abs(lorentz_norm(g, p, p) - lp_norm(g, p)) < 1e-12
    # weak-L^p of an indicator equals its strong norm
    assert abs(lorentz_norm(f, 2, math.inf) - 0.7**0.5) < 1e-15
    # two-level function, hand-computed L^{2,1}
    h = StepFn((Segment(0.0, 1.0, amplitude=2.0),
                      Segment(1.0, 4.0, amplitude=1.0)))
    want = 2.0 * 2.0 * 1.0 + 1.0 * 2.0 * (2.0 - 1.0)  # v1 p sqrt(T1) + v2 p (sqrt(T2)-sqrt(T1))
    assert abs(lorentz_norm(h, 2, 1) - want) < 1e-12
    assert lorentz_norm(StepFn(()), 2, 1) == 0.0
    with pytest.raises(ValueError):
        lorentz_norm(f, math.inf, 2)


def test_field_resolution_guard():
    f = indicator(0.0, 1.0)
    coarse = sphere_measure(2, 32)
    with pytest.raises(ResolutionError):
        field(MC2, 200.0, f, coarse, strict=True)
    with pytest.warns(UserWarning):
        field(MC2, 200.0, f, coarse, strict=False)
    fine = sphere_measure(2, 2048)
    vals = field(MC2, 200.0, f, fine, strict=True)
    assert vals.shape == (fine.size,)


def test_segment_validation():
    with pytest.raises(ValueError):
        Segment(0.5, 0.2)
    with pytest.raises(ValueError):
        Segment(0.0, math.inf)
    with pytest.raises(ValueError):
        Segment(0.0, 1.0, sign=2)
    with pytest.raises(ValueError):
        StepFn((Segment(0.0, 0.6), Segment(0.5, 1.0)))
    seg = Segment(0.0, 1.0, amplitude=2.0, sign=-1)
    assert seg.coefficient == -2.0


def test_phase_spec_validation():
    with pytest.raises(ValueError):
        PhaseSpec(kind="nope")
    with pytest.raises(ValueError):
        PhaseSpec(kind="extension")
    with pytest.raises(ValueError):
        PhaseSpec(kind="graph", curve=MC2)
    with pytest.raises(ValueError):
        PhaseSpec(kind="custom")
    ext = extension_phase(MC2)
    pts = np.array([[0.1, 0.2]])
    assert np.array_equal(ext.embed(pts), pts)
