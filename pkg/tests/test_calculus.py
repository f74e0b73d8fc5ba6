import math
from fractions import Fraction

import pytest

from cartanforms.algebra import build_algebra, invariant_form, killing_form
from cartanforms.calculus import (
    CalculusError,
    DegreeError,
    LieForm,
    ScalarForm,
    TrigPoly,
    beta_pair,
    covariant_d,
    exterior_d,
    integrate,
    lie_bracket_forms,
    load_fields,
    random_form,
    random_scalar_form,
    save_fields,
    wedge,
)


# ---------------------------------------------------------------------------
# TrigPoly
# ---------------------------------------------------------------------------

def test_hermitian_enforced():
    with pytest.raises(CalculusError, match="Hermitian"):
        TrigPoly(2, {(1, 0): (Fraction(1), Fraction(0))})
    with pytest.raises(CalculusError, match="zero mode"):
        TrigPoly.harmonic(2, (0, 0), 1, 1)


def test_product_is_exact_convolution():
    cosx = TrigPoly.cosine(3, (1, 0, 0))
    sq = cosx * cosx
    assert sq == TrigPoly.constant(3, Fraction(1, 2)) \
        + TrigPoly.cosine(3, (2, 0, 0), Fraction(1, 2))
    sinx = TrigPoly.sine(3, (1, 0, 0))
    assert sinx * sinx == TrigPoly.constant(3, Fraction(1, 2)) \
        - TrigPoly.cosine(3, (2, 0, 0), Fraction(1, 2))


def test_deriv_spectral():
    p = TrigPoly.sine(3, (2, 0, 1))
    # d/dx0 sin(2x+z) = 2 cos(2x+z)
    assert p.deriv(0) == TrigPoly.cosine(3, (2, 0, 1), 2)


def test_evaluation_matches_exact_sum():
    # float evaluation vs per-term exact-coefficient sums at rational
    # multiples of pi
    rng_points = [(math.pi * p / q, math.pi * (p + 1) / q, math.pi / (q + 1))
                  for p in range(3) for q in (2, 3, 5)]
    poly = (TrigPoly.cosine(3, (1, 0, 0), Fraction(2, 3))
            + TrigPoly.sine(3, (0, 2, -1), Fraction(1, 7))
            + TrigPoly.constant(3, Fraction(5, 11)))
    for x in rng_points:
        direct = sum(
            float(re) * math.cos(sum(k * xi for k, xi in zip(key, x)))
            - float(im) * math.sin(sum(k * xi for k, xi in zip(key, x)))
            for key, (re, im) in poly.fraction_coeffs().items())
        assert abs(poly.evaluate(x) - direct) < 1e-12


# ---------------------------------------------------------------------------
# wedge
# ---------------------------------------------------------------------------

def test_wedge_antisymmetry_of_coordinate_forms():
    dx = ScalarForm.dx(3, 0)
    dy = ScalarForm.dx(3, 1)
    assert wedge(dx, dy) == wedge(dy, dx).scale(-1)


def test_wedge_exact_convolution_component():
    cosx = TrigPoly.cosine(3, (1, 0, 0))
    f = ScalarForm(3, 1, {(0,): cosx})
    g = ScalarForm(3, 1, {(1,): cosx})
    comp = wedge(f, g).component((0, 1))
    assert comp == TrigPoly.constant(3, Fraction(1, 2)) \
        + TrigPoly.cosine(3, (2, 0, 0), Fraction(1, 2))


def test_scalar_one_form_squares_to_zero():
    for seed in range(5):
        w = random_scalar_form(seed, 1, 3, cutoff=2)
        assert wedge(w, w).is_zero()


def test_wedge_degree_overflow():
    a = random_scalar_form(0, 2, 3)
    b = random_scalar_form(1, 2, 3)
    with pytest.raises(DegreeError):
        wedge(a, b)


def test_wedge_lie_scalar():
    alg = build_algebra("so31")
    w = random_form(0, 1, alg)
    s = random_scalar_form(1, 1, 3)
    left = wedge(s, w)
    right = wedge(w, s)
    assert left == right.scale((-1) ** (1 * 1))
    with pytest.raises(CalculusError, match="ambiguous"):
        wedge(w, w)


# ---------------------------------------------------------------------------
# bracket of Lie-valued forms
# ---------------------------------------------------------------------------

def test_graded_commutativity_all_degree_pairs():
    alg = build_algebra("so22")
    for p, q in ((1, 1), (1, 2), (2, 1)):
        for seed in range(10):
            w = random_form(seed, p, alg, cutoff=2)
            m = random_form(seed + 50, q, alg, cutoff=2)
            sign = (-1) ** (p * q + 1)
            assert lie_bracket_forms(w, m) == lie_bracket_forms(m, w).scale(sign)


def test_translation_valued_cubic_bracket_vanishes():
    # [e, [e, e]] = 0 by the graded Jacobi identity for odd forms
    for name in ("so31", "so22", "so41"):
        alg = build_algebra(name)
        dim = alg.spacetime_dim
        for seed in range(10):
            e = random_form(seed, 1, alg, dim=dim, support="p")
            assert lie_bracket_forms(e, lie_bracket_forms(e, e)).is_zero()


def test_constant_coefficient_bracket_reduces_to_algebra():
    from cartanforms.algebra import bracket
    alg = build_algebra("so31")
    i, j = alg.h_indices[0], alg.h_indices[1]
    w = LieForm(alg, 3, 1, {(i, (0,)): TrigPoly.constant(3, 1)})
    m = LieForm(alg, 3, 1, {(j, (1,)): TrigPoly.constant(3, 1)})
    br = lie_bracket_forms(w, m)
    expected = bracket(alg.basis_element(i), alg.basis_element(j))
    for gamma, c in enumerate(expected.coeffs):
        assert br.component(gamma, (0, 1)) == TrigPoly.constant(3, c)


# ---------------------------------------------------------------------------
# exterior differential
# ---------------------------------------------------------------------------

def test_d_of_constant_vanishes():
    alg = build_algebra("so31")
    w = LieForm(alg, 3, 1, {(0, (0,)): TrigPoly.constant(3, 7)})
    assert exterior_d(w).is_zero()


def test_d_spectral_example():
    sf = ScalarForm(3, 1, {(1,): TrigPoly.sine(3, (1, 0, 0))})
    assert exterior_d(sf) == ScalarForm(
        3, 2, {(0, 1): TrigPoly.cosine(3, (1, 0, 0))})


def test_d_squared_zero_batch():
    alg = build_algebra("so22")
    for seed in range(200):
        w = random_form(seed, 1, alg, cutoff=2, density=0.4)
        assert exterior_d(exterior_d(w)).is_zero()


def test_d_top_degree_errors():
    w = random_scalar_form(0, 3, 3)
    with pytest.raises(DegreeError):
        exterior_d(w)


# ---------------------------------------------------------------------------
# covariant differential
# ---------------------------------------------------------------------------

def test_covariant_d_zero_connection():
    alg = build_algebra("so31")
    a = LieForm.zero(alg, 3, 1)
    w = random_form(0, 1, alg)
    assert covariant_d(a, w) == exterior_d(w)


def test_covariant_d_graded_derivation():
    alg = build_algebra("iso21")
    for seed in range(20):
        a = random_form(seed, 1, alg)
        w = random_form(seed + 100, 1, alg)
        m = random_form(seed + 200, 1, alg)
        lhs = covariant_d(a, lie_bracket_forms(w, m))
        rhs = lie_bracket_forms(covariant_d(a, w), m) \
            - lie_bracket_forms(w, covariant_d(a, m))
        assert lhs == rhs


def test_covariant_d_commutes_with_star():
    alg = build_algebra("so31")
    for seed in range(20):
        a = random_form(seed, 1, alg, support="h")
        w = random_form(seed + 100, 1, alg)
        assert covariant_d(a, w.star()) == covariant_d(a, w).star()


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------

def test_beta_graded_invariance():
    alg = build_algebra("so22")
    form = invariant_form(alg, 1, Fraction(2, 3))
    for seed in range(20):
        lam = random_form(seed, 1, alg)
        w = random_form(seed + 100, 1, alg)
        m = random_form(seed + 200, 1, alg)
        lhs = beta_pair(form, lie_bracket_forms(lam, w), m)
        rhs = beta_pair(form, w, lie_bracket_forms(lam, m))
        assert lhs == rhs  # (-1)^{pr+1} = +1 for p = r = 1


def test_covariant_integration_by_parts():
    alg = build_algebra("so31")
    form = killing_form(alg)
    for seed in range(20):
        a = random_form(seed, 1, alg)
        w = random_form(seed + 100, 1, alg)
        m = random_form(seed + 200, 1, alg)
        lhs = beta_pair(form, w, m).d()
        rhs = beta_pair(form, covariant_d(a, w), m) \
            - beta_pair(form, w, covariant_d(a, m))
        assert lhs == rhs


def test_constant_pairing_reduces_to_gram():
    alg = build_algebra("so31")
    form = killing_form(alg)
    w = LieForm(alg, 3, 1, {(0, (0,)): TrigPoly.constant(3, 1)})
    m = LieForm(alg, 3, 1, {(1, (1,)): TrigPoly.constant(3, 1)})
    s = beta_pair(form, w, m)
    assert s.component((0, 1)) == TrigPoly.constant(3, form.gram[0][1])


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def test_volume_integral():
    assert integrate(ScalarForm.volume(3, Fraction(5, 7))) == Fraction(5, 7)


def test_stokes_batch():
    for seed in range(200):
        alpha = random_scalar_form(seed, 2, 3, cutoff=2)
        assert integrate(exterior_d(alpha)) == 0


def test_sin_squared_integral():
    s2 = TrigPoly.sine(3, (1, 0, 0)) * TrigPoly.sine(3, (1, 0, 0))
    vol = ScalarForm(3, 3, {(0, 1, 2): s2})
    assert integrate(vol) == Fraction(1, 2)


def test_integrate_requires_top_degree():
    with pytest.raises(DegreeError):
        integrate(random_scalar_form(0, 2, 3))


# ---------------------------------------------------------------------------
# random forms
# ---------------------------------------------------------------------------

def test_random_form_deterministic():
    alg = build_algebra("so22")
    assert random_form(12, 1, alg, cutoff=2) == random_form(12, 1, alg, cutoff=2)
    assert random_form(12, 1, alg, cutoff=2) != random_form(13, 1, alg, cutoff=2)


def test_random_form_support_restriction():
    alg = build_algebra("so31")
    e = random_form(0, 1, alg, support="p")
    assert all(key[0] in alg.p_indices for key in e.comps)
    w = random_form(0, 1, alg, support="h")
    assert all(key[0] in alg.h_indices for key in w.comps)


def test_random_form_cutoff_bound():
    alg = build_algebra("so31")
    for seed in range(20):
        assert random_form(seed, 1, alg, cutoff=2).max_abs_freq() <= 2


def test_no_silent_truncation():
    # products of cutoff-K inputs have cutoff <= 2K and keep every mode
    alg = build_algebra("so22")
    for seed in range(20):
        w = random_form(seed, 1, alg, cutoff=2)
        m = random_form(seed + 10, 1, alg, cutoff=2)
        br = lie_bracket_forms(w, m)
        assert br.max_abs_freq() <= 4
        k = killing_form(alg)
        sp = beta_pair(k, w, m)
        assert sp.max_abs_freq() <= 4


# ---------------------------------------------------------------------------
# field files
# ---------------------------------------------------------------------------

def test_field_file_round_trip(tmp_path):
    alg = build_algebra("so22")
    forms = {
        "A": random_form(3, 1, alg, cutoff=2),
        "e": random_form(4, 1, alg, support="p"),
    }
    path = tmp_path / "fields.json"
    save_fields(path, alg, forms)
    alg2, loaded = load_fields(path)
    assert alg2 is alg
    assert loaded["A"] == forms["A"]
    assert loaded["e"] == forms["e"]
