import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carpetdim import (
    DimParams,
    EntropyProfile,
    MalformedCarpet,
    ProbVector,
    bernoulli_dimension,
    carpet_from_counts,
    dim_functions,
    distinguished_measures,
    entropy,
    h_from_bernoulli,
    load_carpet,
    mcmullen_dimension,
    row_entropy,
    validate_carpet,
)
from carpetdim.carpet import dim_values

from conftest import carpets, random_prob

# frozen regression value: -sum (T_a/15) log(T_a/15) for T = (5, 2, 8)
HR_UNIFORM_528 = 0.9701157839869381


def test_torus_derived_quantities(torus):
    assert (torus.D, torus.R, torus.tau) == (8, 2, 2.0)


def test_fig5_derived_quantities(fig5):
    assert (fig5.D, fig5.R) == (15, 3)
    assert fig5.tau == pytest.approx(1.892789, abs=1e-6)


@pytest.mark.parametrize("raw", [
    {"N": 4, "M": 3, "rows": [{"column": 1, "fibers": [1]}]},
    {"N": 1, "M": 3, "rows": [{"column": 1, "fibers": [1]}]},
    {"N": 2, "M": 3, "rows": []},
    {"N": 2, "M": 3, "rows": [{"column": 1, "fibers": []}]},
    {"N": 2, "M": 3, "rows": [{"column": 3, "fibers": [1]}]},
    {"N": 2, "M": 3, "rows": [{"column": 1, "fibers": [4]}]},
    {"N": 2, "M": 3, "rows": [{"column": 1, "fibers": [1, 1]}]},
    {"N": 2, "M": 3, "rows": [{"column": 1, "fibers": [1]}, {"column": 1, "fibers": [2]}]},
    {"N": 2, "M": 3, "rows": [{"column": 2, "fibers": [1]}, {"column": 1, "fibers": [2]}]},
    {"N": 2.0, "M": 3, "rows": [{"column": 1, "fibers": [1]}]},
    {"M": 3, "rows": []},
    [1, 2],
])
def test_malformed_carpets(raw):
    with pytest.raises(MalformedCarpet):
        validate_carpet(raw)


def test_p_mapping_form_and_roundtrip(tmp_path):
    spec = validate_carpet({"N": 3, "M": 5, "P": {"1": [2, 4], "3": [1]}})
    assert spec.symbols == ((1, 2), (1, 4), (3, 1))
    path = tmp_path / "c.json"
    import json
    path.write_text(json.dumps(spec.to_dict()))
    assert load_carpet(path) == spec


def test_load_rejects_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{N: 3")
    with pytest.raises(MalformedCarpet):
        load_carpet(path)


def test_entropy_examples(torus):
    assert entropy(ProbVector.uniform(torus)) == pytest.approx(math.log(8), abs=1e-15)
    assert entropy(ProbVector.point_mass(torus, (2, 3))) == 0.0
    three = carpet_from_counts(2, 4, [2, 1])
    p = ProbVector(three, [0.5, 0.25, 0.25])
    assert entropy(p) == pytest.approx(1.5 * math.log(2), abs=1e-15)


def test_row_entropy_examples(torus, fig5):
    assert row_entropy(ProbVector.uniform(torus)) == pytest.approx(math.log(2), abs=1e-15)
    assert row_entropy(ProbVector.point_mass(torus, (1, 1))) == 0.0
    assert row_entropy(ProbVector.uniform(fig5)) == pytest.approx(HR_UNIFORM_528, abs=1e-14)


def test_bernoulli_dimension_examples(torus, fig5):
    assert bernoulli_dimension(torus, ProbVector.uniform(torus)) == pytest.approx(2.0, abs=1e-15)
    assert bernoulli_dimension(torus, ProbVector.point_mass(torus, (1, 1))) == 0.0
    _, _, p_d = distinguished_measures(fig5)
    closed = math.log(5 ** (1 / fig5.tau) + 2 ** (1 / fig5.tau) + 3) / math.log(3)
    assert bernoulli_dimension(fig5, p_d) == pytest.approx(closed, abs=1e-10)
    assert mcmullen_dimension(fig5) == pytest.approx(closed, abs=1e-12)
    assert closed == pytest.approx(1.7425256855, abs=1e-9)


def test_distinguished_measures(torus, fig5):
    p_D, p_R, p_d = distinguished_measures(torus)
    assert p_D.allclose(p_R, 1e-15) and p_D.allclose(p_d, 1e-15)
    p_D, p_R, p_d = distinguished_measures(fig5)
    assert 8 ** (1 / fig5.tau) == pytest.approx(3.0, abs=1e-14)
    pw = np.array([5 ** (1 / fig5.tau), 2 ** (1 / fig5.tau), 3.0])
    np.testing.assert_allclose(pw[:2], [2.340, 1.442], atol=1e-3)
    np.testing.assert_allclose(p_d.rows, pw / pw.sum(), atol=1e-15)
    assert p_D.h == pytest.approx(math.log(15), abs=1e-15)
    np.testing.assert_allclose(p_R.rows, 1 / 3, atol=1e-15)


def test_probvector_validation(torus):
    with pytest.raises(ValueError):
        ProbVector(torus, np.full(8, 0.1))
    with pytest.raises(ValueError):
        ProbVector(torus, [-0.1, 1.1] + [0] * 6)
    with pytest.raises(ValueError):
        ProbVector(torus, [1.0])
    with pytest.raises(ValueError):
        ProbVector.from_mapping(torus, {(3, 1): 1.0})
    ProbVector(torus, [1.0 + 5e-13] + [0] * 7)


def test_dim_functions_torus_example(torus):
    u = ProbVector.uniform(torus).profile()
    bd = dim_functions(torus, DimParams.ball(1.0, math.log(4)), [u] * 4)
    np.testing.assert_allclose(bd.d, [2, 1.5, 4 / 3, 1.5, 5 / 3, 2], atol=1e-14)
    assert bd.dj == pytest.approx(4 / 3, abs=1e-15)
    assert bd.active == {3}


def test_dim_params_contract(fig5):
    with pytest.raises(ValueError):
        DimParams(-1.0)
    with pytest.raises(ValueError):
        DimParams(1.0, 0.5, "cylinder")
    with pytest.raises(ValueError):
        DimParams(1.0, 0.5, "disk")
    with pytest.raises(ValueError):
        DimParams.ball(1.0, 3.0).check(fig5)
    DimParams.ball(1.0, math.log(2)).check(fig5)


def test_infeasible_profile_rejected(torus):
    bad = EntropyProfile(0.1, 0.5)
    good = ProbVector.uniform(torus).profile()
    with pytest.raises(ValueError):
        dim_functions(torus, DimParams.cylinder(1), [bad, good, good, good])


def test_h_from_bernoulli(fig5):
    p_D = ProbVector.uniform(fig5)
    assert h_from_bernoulli(fig5, p_D) == pytest.approx(
        (5 * math.log(5) + 2 * math.log(2) + 8 * math.log(8)) / 15, abs=1e-15)


# ---- properties

@settings(max_examples=60, deadline=None)
@given(carpets(), st.integers(0, 2 ** 32 - 1))
def test_entropy_chain(spec, seed):
    rng = np.random.default_rng(seed)
    p = ProbVector(spec, random_prob(rng, spec.D))
    h, hr = p.h, p.h_r
    assert -1e-15 <= hr <= h + 1e-12
    assert h <= hr + float(p.rows @ spec.log_T) + 1e-12
    assert hr + float(p.rows @ spec.log_T) <= math.log(spec.D) + 1e-12


@settings(max_examples=60, deadline=None)
@given(carpets(), st.integers(0, 2 ** 32 - 1), st.floats(0, 1))
def test_concavity_of_entropies(spec, seed, t):
    rng = np.random.default_rng(seed)
    p, q = random_prob(rng, spec.D), random_prob(rng, spec.D)
    mix = ProbVector(spec, t * p + (1 - t) * q)
    P, Q = ProbVector(spec, p), ProbVector(spec, q)
    for f in (entropy, row_entropy, lambda v: bernoulli_dimension(spec, v)):
        assert f(mix) >= t * f(P) + (1 - t) * f(Q) - 1e-12


@settings(max_examples=60, deadline=None)
@given(carpets())
def test_distinguished_orderings(spec):
    p_D, p_R, p_d = distinguished_measures(spec)
    eps = 1e-12
    assert p_D.h_r <= p_d.h_r + eps and p_d.h_r <= p_R.h_r + eps
    assert p_R.h_r == pytest.approx(math.log(spec.R), abs=1e-14)
    assert p_R.h <= p_d.h + eps and p_d.h <= p_D.h + eps
    equal = spec.uniform_fibers
    strict = p_D.h_r < p_d.h_r - 1e-12 and p_d.h_r < p_R.h_r - 1e-12
    assert equal or strict
    if equal:
        assert p_D.allclose(p_R) and p_D.allclose(p_d)


@settings(max_examples=60, deadline=None)
@given(carpets(), st.integers(0, 2 ** 32 - 1))
def test_pd_maximizes_bernoulli_dimension(spec, seed):
    rng = np.random.default_rng(seed)
    p = ProbVector(spec, random_prob(rng, spec.D))
    assert bernoulli_dimension(spec, p) <= mcmullen_dimension(spec) + 1e-12
    assert 0 <= bernoulli_dimension(spec, p) <= 2 + 1e-12


def _random_profiles(rng, spec, k=4):
    out = []
    for _ in range(k):
        p = ProbVector(spec, random_prob(rng, spec.D))
        out.append(p.profile())
    return out


@settings(max_examples=80, deadline=None)
@given(carpets(), st.integers(0, 2 ** 32 - 1), st.floats(0, 10), st.floats(0, 1), st.integers(0, 7))
def test_dim_monotone_in_each_entropy(spec, seed, alpha, frac, k):
    rng = np.random.default_rng(seed)
    lo, hi = float(spec.log_T.min()), float(spec.log_T.max())
    H = lo + frac * (hi - lo)
    v = np.array([x for pr in _random_profiles(rng, spec) for x in (pr.h, pr.h_r)])
    w = v.copy()
    w[k] += 0.1
    d0 = dim_values(spec, alpha, H, *v)
    d1 = dim_values(spec, alpha, H, *w)
    assert np.all(d1 >= d0 - 1e-14)


@settings(max_examples=60, deadline=None)
@given(carpets(), st.integers(0, 2 ** 32 - 1), st.floats(0, 10))
def test_dj_within_unit_square_bounds(spec, seed, alpha):
    rng = np.random.default_rng(seed)
    bd = dim_functions(spec, DimParams.cylinder(alpha), _random_profiles(rng, spec))
    assert 0 <= bd.dj <= 2 + 1e-12
    assert bd.dj == min(bd.d)
    assert min(bd.active) >= 1 and all(bd.d[i - 1] - bd.dj <= 1e-9 for i in bd.active)


def test_alpha_zero_equal_profiles(fig5):
    rng = np.random.default_rng(7)
    p = ProbVector(fig5, random_prob(rng, fig5.D))
    bd = dim_functions(fig5, DimParams.cylinder(0.0), [p.profile()] * 4)
    assert bd.d[0] == pytest.approx(bd.d[5], abs=1e-15)
    assert bd.dj <= bernoulli_dimension(fig5, p) + 1e-15


def test_d2_dominated_by_d1_for_large_alpha():
    rng = np.random.default_rng(3)
    from carpetdim.frontier import lift, reference_row_entropies
    for T in ([5, 2, 8], [2, 1], [1, 4, 2]):
        spec = carpet_from_counts(len(T) + 1, 9, T)
        hr_D, hr_d, _ = reference_row_entropies(spec)
        for _ in range(20):
            alpha = spec.tau - 1 + rng.exponential(1.0)
            z = rng.uniform(hr_D, hr_d)
            pm = lift(spec, z).profile()
            p1 = ProbVector(spec, random_prob(rng, spec.D)).profile()
            d = dim_values(spec, alpha, 0.0, pm.h, pm.h_r, p1.h, p1.h_r, 0, 0, 0, 0)
            assert d[0] > d[1]
