import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from dixmier.averaging import (a_curve, a_profile, block_windows,
                               connes_dixmier_bounds, distance_to_separable,
                               dixmier_verdict, envelope, liminf_estimate,
                               limsup_estimate, residual_lemma12,
                               squares_x_profile, tower_g, tower_x_profile,
                               uniform_cesaro_diagnostic)
from dixmier.errors import DomainError, PreconditionError, ResourceError
from dixmier.profile import CesaroProfile, ConstTerm, PiecewiseProfile, cesaro_log_mean
from dixmier.psi import psi_by_name
from dixmier.spectra import marcinkiewicz_norm
from dixmier.stepfn import indicator, pi_embed, squares_example, tower_example

LN2 = math.log(2.0)
LOG = psi_by_name("log")
SQRT2 = psi_by_name("sqrt2")
TWO_OVER_LN2 = 2.0 / LN2
CD_TOWER = 4.0 / (math.e * LN2)


@pytest.fixture(scope="module")
def tower_a():
    f = tower_example()
    a_win, c_win, u_max = block_windows(f)
    return a_curve(f, LOG, u_max), a_win, c_win


@pytest.fixture(scope="module")
def squares_a():
    f = squares_example()
    a_win, c_win, u_max = block_windows(f)
    return a_curve(f, SQRT2, u_max), a_win, c_win


# -- a-profile ------------------------------------------------------------


def test_tower_a_at_sixteen():
    # F(16) = 1/2 * 4 + 2**-2 * 12 = 5
    assert a_profile(tower_example(), LOG, 4.0) == pytest.approx(5 / math.log(17), rel=1e-12)


@pytest.mark.parametrize("n", [20, 25, 30, 35, 40])
def test_tower_a_at_block_edges(n):
    assert a_profile(tower_example(), LOG, 2.0 ** n) == pytest.approx(TWO_OVER_LN2, abs=1e-3)


def test_indicator_a_decays():
    for u in (10.0, 40.0, 200.0):
        expect = 1.0 / math.log1p(2.0 ** u)
        assert a_profile(indicator(), LOG, u) == pytest.approx(expect, rel=1e-12)
    assert a_profile(indicator(), LOG, 1000.0) < 2e-3


def test_a_curve_matches_cumulative_path(tower_a, squares_a):
    rng = np.random.default_rng(7)
    for prof, f, psi in ((tower_a[0], tower_example(), LOG),
                         (squares_a[0], squares_example(), SQRT2)):
        top = prof.edges[-1]
        us = np.sort(rng.uniform(0.5, min(top, 4e6), 40))
        assert np.asarray(prof(us)) == pytest.approx(a_profile(f, psi, us), rel=1e-12)


def test_a_curve_needs_nonincreasing_input():
    from dixmier.stepfn import StepFunction
    from dixmier.logscale import LogReal
    f = StepFunction([0.0, 1.0], [LogReal(1, 0), LogReal(1, 1)])
    with pytest.raises(DomainError):
        a_curve(f, LOG, 10.0)


@pytest.mark.parametrize("n", [200, 800, 2000])
def test_squares_a_at_critical_families(n):
    f = squares_example()
    assert a_profile(f, SQRT2, float(n * n)) == pytest.approx(2.0, abs=1e-3)
    assert a_profile(f, SQRT2, (n + 0.5) ** 2) == pytest.approx(math.sqrt(2.0), abs=1e-3)


# -- Cesaro means of the constructions -----------------------------------


@pytest.mark.parametrize("n", [20, 30, 40])
def test_tower_x_mean_at_critical_points(n):
    u = 2.0 ** (n + 1.0 / LN2 - 1.0)
    assert cesaro_log_mean(tower_x_profile(40), u) == pytest.approx(2 / (math.e * LN2), abs=1e-3)


def test_tower_g_peaks():
    n = np.arange(5, 40)
    peaks = tower_g(2.0 ** (n + 1.0 / LN2 - 1.0))
    assert peaks == pytest.approx(2 / (math.e * LN2), rel=1e-12)
    # and they are maxima on their block
    for k in (5, 12):
        grid = np.linspace(2.0 ** k, 2.0 ** (k + 1), 2001)[:-1]
        assert np.max(tower_g(grid)) <= peaks[0] + 1e-12


def test_squares_x_mean_limit():
    x = squares_x_profile(2000)
    assert cesaro_log_mean(x, 2000.0 ** 2) == pytest.approx(1 / (2 * LN2), abs=1e-3)


# -- residuals ------------------------------------------------------------


def _residual_oracle(f, psi_log2, U):
    """Per-piece mpmath quadrature of (1/U) * int_0^U c(v) 2**v / psi(2**v) dv."""
    mp.mp.dps = 30
    total = mp.mpf(0)
    lo = -math.inf
    for hi, c in f.pieces():
        a, b = max(lo, 0.0), min(hi, U)
        if b > a and c.sign:
            e = mp.mpf(c.exponent)
            total += mp.quad(lambda v: mp.power(2, e + v - psi_log2(v)), [a, b])
        lo = hi
        if hi >= U:
            break
    return float(total / U)


def _log2_psi_log(v):
    return mp.log(mp.log(1 + mp.power(2, v)), 2)


def _log2_psi_sqrt2(v):
    return mp.log(mp.power(2, mp.sqrt(mp.log(1 + mp.power(2, v), 2))) - 1, 2)


@pytest.mark.parametrize("U", [3.0, 50.0, 256.0])
def test_tower_residual_vs_quadrature(U):
    f = tower_example()
    got = residual_lemma12(f, LOG, U)
    assert got == pytest.approx(_residual_oracle(f, _log2_psi_log, U), rel=1e-9)


@pytest.mark.parametrize("U", [5.0, 400.0])
def test_squares_residual_vs_quadrature(U):
    f = squares_example()
    got = residual_lemma12(f, SQRT2, U)
    assert got == pytest.approx(_residual_oracle(f, _log2_psi_sqrt2, U), rel=1e-9)


def test_residual_examples():
    # the integrand of the indicator lives on (0, 1], below where the mean starts
    assert residual_lemma12(indicator(), LOG, 2.0 ** 10) <= 2e-2
    assert residual_lemma12(tower_example(), LOG, 2.0 ** 30) <= 1e-2
    assert residual_lemma12(squares_example(), SQRT2, 1e6) <= 1e-2


# -- extremum estimation --------------------------------------------------


def _const_profile(c, n=8):
    return PiecewiseProfile(np.arange(n + 1.0), [ConstTerm([c] * n)])


def test_constant_limsup():
    est = limsup_estimate(_const_profile(5.0), (0, 7))
    assert est.estimate == 5.0 and est.converged
    assert liminf_estimate(_const_profile(5.0), (0, 7)).estimate == 5.0


def test_window_checks(tower_a):
    with pytest.raises(DomainError):
        limsup_estimate(_const_profile(1.0), (0, 3))
    with pytest.raises(DomainError):
        limsup_estimate(_const_profile(1.0), (-1, 5))
    with pytest.raises(ResourceError):
        limsup_estimate(_const_profile(1.0), (2, 8))
    prof = tower_a[0]
    with pytest.raises(ResourceError):
        limsup_estimate(prof, (prof.n_pieces - 3, prof.n_pieces + 3))


def test_tail_budget_exhaustion():
    with pytest.raises(ResourceError):
        distance_to_separable(tower_example(), LOG, blocks=(20, 100))


def test_tower_limsup(tower_a):
    prof, a_win, _ = tower_a
    est = limsup_estimate(prof, a_win)
    assert est.converged
    assert est.estimate == pytest.approx(TWO_OVER_LN2, abs=1e-3)
    # maxima sit on the registered block edges u = 2**n
    assert np.log2(est.locations) == pytest.approx(np.arange(a_win[0] + 1, a_win[1] + 2))


def test_squares_envelope(squares_a):
    prof, a_win, _ = squares_a
    lo, hi = envelope(prof, a_win)
    assert hi.estimate == pytest.approx(2.0, abs=1e-3)
    # the dip between square edges goes below the sampled value at (n + 1/2)**2
    assert lo.estimate < math.sqrt(2.0) - 0.3
    u = lo.locations[-1]
    assert a_profile(squares_example(), SQRT2, u) == pytest.approx(lo.values[-1], rel=1e-12)


def test_envelope_matches_separate_estimates(tower_a):
    prof, a_win, _ = tower_a
    lo, hi = envelope(prof, a_win)
    assert hi.estimate == limsup_estimate(prof, a_win).estimate
    assert lo.estimate == liminf_estimate(prof, a_win).estimate


# -- verdicts -------------------------------------------------------------


def test_geometric_sequence_is_measurable():
    v = dixmier_verdict(pi_embed([2.0 ** -k for k in range(60)]), LOG)
    assert v.measurable
    assert v.value == pytest.approx(0.0, abs=1e-6)


def test_tower_verdicts():
    d = dixmier_verdict(tower_example(), LOG)
    assert not d.measurable and math.isnan(d.value)
    low, high = d.bounds
    assert low <= high and high - low > 0.5
    assert high == pytest.approx(TWO_OVER_LN2, abs=1e-3)
    assert d.evidence["residual"] < 1e-2
    cd = connes_dixmier_bounds(tower_example(), LOG)
    assert cd.bounds[1] == pytest.approx(CD_TOWER, abs=5e-3)
    assert distance_to_separable(tower_example(), LOG) == pytest.approx(TWO_OVER_LN2, abs=1e-3)


def test_squares_verdicts():
    d = dixmier_verdict(squares_example(), SQRT2)
    assert not d.measurable
    assert d.bounds[1] == pytest.approx(2.0, abs=1e-3)
    assert d.bounds[1] - d.bounds[0] >= 0.58
    cd = connes_dixmier_bounds(squares_example(), SQRT2)
    assert cd.measurable
    assert cd.value == pytest.approx(1 / LN2, abs=5e-3)
    assert distance_to_separable(squares_example(), SQRT2) == pytest.approx(2.0, abs=1e-3)


def test_indicator_verdicts():
    cd = connes_dixmier_bounds(indicator(), LOG)
    assert cd.measurable and cd.value == pytest.approx(0.0, abs=1e-6)
    assert distance_to_separable(indicator(), LOG) == pytest.approx(0.0, abs=1e-6)
    assert dixmier_verdict(indicator(), LOG).measurable


def test_identity_psi_is_rejected():
    with pytest.raises(PreconditionError):
        dixmier_verdict(indicator(), psi_by_name("identity"))


def test_block_window_checks():
    with pytest.raises(DomainError):
        block_windows(tower_example(), (10, 10))
    from dixmier.stepfn import StepFunction
    from dixmier.logscale import LogReal
    lazy = StepFunction(tail=lambda k: (float(k + 1), LogReal(1, -k)))
    with pytest.raises(DomainError):
        block_windows(lazy)


def test_gap_ordering(tower_a):
    prof, a_win, c_win = tower_a
    sup_a = limsup_estimate(prof, a_win).estimate
    sup_m = limsup_estimate(CesaroProfile(prof), c_win, tol=5e-3).estimate
    assert sup_a - sup_m >= 0
    assert sup_a - sup_m == pytest.approx(TWO_OVER_LN2 - CD_TOWER, abs=6e-3)


# -- uniform diagnostic ---------------------------------------------------


def test_indicator_uniform():
    rep = uniform_cesaro_diagnostic(indicator(), LOG, 0.0)
    assert rep.uniform
    assert rep.deviations.shape == (len(rep.shifts), len(rep.u_grid))


@pytest.mark.parametrize("A", [TWO_OVER_LN2, CD_TOWER])
def test_tower_never_uniform(A):
    rep = uniform_cesaro_diagnostic(tower_example(), LOG, A)
    assert not rep.uniform
    assert rep.sup_dev[-1] > 0.1


def test_squares_not_uniform():
    rep = uniform_cesaro_diagnostic(squares_example(), SQRT2, 1 / LN2)
    assert not rep.uniform
    # for the unshifted row the deviation does shrink
    row = rep.deviations[list(rep.shifts).index(0.0)]
    assert row[-1] < row[0] and row[-1] < 0.05
    assert rep.sup_dev[-1] > 0.1


def test_uniform_input_checks():
    with pytest.raises(DomainError):
        uniform_cesaro_diagnostic(indicator(), LOG, 0.0, shifts=[-1.0])
    with pytest.raises(DomainError):
        uniform_cesaro_diagnostic(indicator(), LOG, 0.0, u_grid=[0.0, 1.0])


# -- invariants -----------------------------------------------------------


@st.composite
def finite_spectra(draw):
    vals = draw(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=30))
    return sorted(vals, reverse=True)


@given(finite_spectra(), st.sampled_from(["log", "sqrt2"]))
def test_cesaro_values_between_liminf_and_norm(vals, name):
    psi = psi_by_name(name)
    f = pi_embed(vals)
    norm = marcinkiewicz_norm(f, psi, u_max=40.0).value
    a = a_curve(f, psi, 40.0)
    m = CesaroProfile(a)
    us = np.linspace(0.25, 40.0, 60)
    vals_m = np.asarray(m(us))
    # a tends to zero for finite input, so its lower limit is 0
    assert np.all(vals_m >= 0.0)
    assert np.all(vals_m <= norm * (1 + 1e-9))


def test_tower_cesaro_between_liminf_and_norm(tower_a):
    prof, a_win, c_win = tower_a
    low = liminf_estimate(prof, a_win).estimate
    norm = marcinkiewicz_norm(tower_example(), LOG).value
    m = CesaroProfile(prof)
    lo_u, hi_u = prof.edges[c_win[0]], prof.edges[c_win[1] + 1]
    us = np.exp2(np.linspace(np.log2(lo_u), np.log2(hi_u), 400))
    vals = np.asarray(m(us))
    assert np.all(vals >= low - 1e-3)
    assert np.all(vals <= norm + 1e-3)
