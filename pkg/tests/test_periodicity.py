import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctnn.errors import OutOfRange
from ctnn.periodicity import (comb_energy, comb_energy_direct, comb_energy_limit, comb_network,
                              golden_section, predict_period_candidates, scan_periods, stern_brocot)
from ctnn.signal import Signal, TimeGrid, from_function

from conftest import W1, W2
from netgen import smooth_signal


def cf_convergents(x: Fraction, max_q: int):
    """Independent oracle: continued-fraction expansion by the Euclidean algorithm."""
    out = []
    h0, h1, k0, k1 = 0, 1, 1, 0
    while True:
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_q:
            break
        out.append((h1, k1))
        frac = x - a
        if frac == 0:
            break
        x = 1 / frac
    return out


def test_comb_network_shape():
    net = comb_network(5.0, 50.0)
    assert [(e.weight, e.delay) for e in net.edges] == [(1.0, 0.0), (-1.0, 5.0)]
    assert net.units["comb"].tau == 50.0 and net.units["comb"].alpha is None


@pytest.mark.parametrize("T,window", [(1.0, 3.0), (2.0, 10.0), (3.0, 6.0)])
def test_periodic_signal_cancels(T, window):
    x = from_function(lambda t: math.cos(2 * math.pi * t) + 0.5 * math.sin(4 * math.pi * t),
                      TimeGrid(0, 20, 0.001))
    assert comb_energy(x, T, window) <= 1e-3


def test_two_tone_at_five(tritone):
    limit = math.sqrt(2 - math.cos(10 * math.pi) - math.cos(10 * math.sqrt(2) * math.pi))
    assert limit == pytest.approx(0.3134, abs=5e-4)
    assert comb_energy(tritone, 5.0, 50.0) == pytest.approx(limit, abs=1e-2)


def test_two_tone_twelve_below_five(tritone):
    e12 = comb_energy(tritone, 12.0, 50.0)
    assert e12 == pytest.approx(0.130, abs=1e-2)
    assert e12 < comb_energy(tritone, 5.0, 50.0)


def test_ctnn_matches_direct_quadrature():
    rng = np.random.default_rng(42)
    for _ in range(20):
        x = smooth_signal(rng, 0, 30, 0.01)
        T, W = rng.uniform(0.1, 5), rng.uniform(1, 20)
        assert comb_energy(x, T, W) == pytest.approx(comb_energy_direct(x, T, W), abs=1e-9)


def test_large_window_limit():
    w = (2 * math.pi, 2 * math.sqrt(2) * math.pi, 3.1)
    W = 200 * 2 * math.pi / min(w)
    x = from_function(lambda t: sum(math.cos(wi * t) for wi in w), TimeGrid(0, W + 20, 0.005))
    for T in (0.7, 3.3, 5.0, 12.0):
        assert comb_energy(x, T, W) == pytest.approx(float(comb_energy_limit(w, T)), abs=1e-2)


def test_anchor_independence(tritone):
    for T in (5.0, 7.0, 12.0):
        a = comb_energy(tritone, T, 50.0, t0=12.0)
        b = comb_energy(tritone, T, 50.0, t0=17.3)
        assert abs(a - b) <= 1e-2


def test_energy_nonnegative(tritone):
    for T in np.linspace(0.1, 14, 30):
        assert comb_energy(tritone, float(T), 20.0) >= 0


def test_out_of_range():
    x = from_function(math.sin, TimeGrid(0, 10, 0.01))
    with pytest.raises(OutOfRange):
        comb_energy(x, 3.0, 8.0)
    with pytest.raises(OutOfRange):
        comb_energy(x, 3.0, 5.0, t0=1.0)


def test_scan_pure_tone():
    x = from_function(lambda t: math.cos(2 * math.pi * t), TimeGrid(0, 30, 0.005))
    scan = scan_periods(x, 0.5, 2.5, 0.01, 20.0)
    T, E = scan.best
    assert T == pytest.approx(1.0, abs=0.01)
    assert E == pytest.approx(0.0, abs=0.01)


def test_scan_two_tone(tritone):
    scan = scan_periods(tritone, 1.0, 14.0, 0.01, 50.0)
    Ts = [T for T, _ in scan.minima]
    (T1, E1), (T2, E2) = scan.minima[:2]
    assert T1 == pytest.approx(12, abs=0.05) and T2 == pytest.approx(5, abs=0.05)
    assert E1 < E2
    for target in (7, 10):
        assert any(abs(T - target) <= 0.1 for T in Ts)


def test_scan_invariants(tritone):
    scan = scan_periods(tritone, 4.0, 6.0, 0.05, 10.0)
    assert np.all(scan.E >= 0)
    Es = [E for _, E in scan.minima]
    assert Es == sorted(Es)
    for T, E in scan.minima:
        i = int(np.argmin(np.abs(scan.T - T)))
        lo, hi = max(i - 1, 0), min(i + 1, len(scan.T) - 1)
        assert E <= scan.E[lo] and E <= scan.E[hi]


def test_scan_constant_signal_has_no_minima():
    x = Signal(np.linspace(0, 40, 401), np.full(401, 2.5))
    scan = scan_periods(x, 1, 10, 0.5, 20.0)
    assert np.all(scan.E == 0)
    assert scan.minima == []


def test_scan_threads_deterministic(tritone):
    a = scan_periods(tritone, 4.0, 6.0, 0.05, 10.0, threads=1)
    b = scan_periods(tritone, 4.0, 6.0, 0.05, 10.0, threads=4)
    assert a.E.tobytes() == b.E.tobytes() and a.minima == b.minima


def test_golden_section_parabola():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2 + 1, -2, 2, 1e-8)
    assert x == pytest.approx(0.3, abs=1e-7) and fx == pytest.approx(1.0)


# --- Stern-Brocot -----------------------------------------------------------------

def test_rational_target_exact():
    assert stern_brocot(1.5, 10).convergents[-1] == (3, 2)


def test_sqrt2_convergents():
    conv = stern_brocot(math.sqrt(2), 30).convergents
    assert conv == ((1, 1), (3, 2), (7, 5), (17, 12), (41, 29))
    for p, q in conv:
        assert abs(math.sqrt(2) - p / q) < 1 / q ** 2


def test_sqrt2_denominators_match_minima():
    qs = {q for _, q in stern_brocot(math.sqrt(2), 30).convergents}
    assert {5, 12} <= qs


def test_small_target():
    assert stern_brocot(0.3, 100).convergents == ((0, 1), (1, 3), (3, 10))
    # the binary value of 0.3 sits just below 3/10 and has 2/7 as a convergent
    assert stern_brocot(Fraction(0.3), 100).convergents == ((0, 1), (1, 3), (2, 7), (3, 10))


def test_pure_tone_ranks_fundamental_before_multiples():
    x = from_function(lambda t: math.cos(2 * math.pi * t), TimeGrid(0, 30, 0.005))
    Ts = [T for T, _ in scan_periods(x, 0.5, 3.5, 0.01, 20.0).minima[:3]]
    assert Ts == pytest.approx([1.0, 2.0, 3.0], abs=0.01)


@given(st.floats(1e-3, 1e3, allow_nan=False), st.integers(1, 2000))
@settings(max_examples=200, deadline=None)
def test_matches_continued_fraction_oracle(x, max_q):
    got = list(stern_brocot(x, max_q).convergents)
    exact = Fraction(repr(x))
    assert got == cf_convergents(exact, max_q)
    errs = [abs(exact - Fraction(p, q)) for p, q in got]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert all(math.gcd(p, q) == 1 for p, q in got)


def test_predict_candidates_two_tone():
    cands = predict_period_candidates(W1, W2, 12)
    assert any(abs(c - 5) < 1e-12 for c in cands) and any(abs(c - 12) < 1e-12 for c in cands)


def test_predict_octave_and_unison():
    assert predict_period_candidates(3.0, 6.0, 10)[0] == pytest.approx(2 * math.pi / 3.0)
    assert predict_period_candidates(3.0, 3.0, 10) == [pytest.approx(2 * math.pi / 3.0)]
