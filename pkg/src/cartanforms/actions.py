"""Gravity action functionals and their machine-checkable identities.

Everything polynomial in trig-poly fields evaluates exactly; only the
torsion-free-connection functionals (TMG) need quadrature, because the
spin connection determined by a coframe is a rational function of the
field and leaves the trig-poly ring.

Resolved coefficient conventions (full table in CONVENTIONS.md):

    S_CS^beta(A)      = 1/2 Int beta(A ^ dA) + 1/6 Int beta(A ^ [A,A])
    S_Pal(omega, e)   = Int S(e ^ R) + 1/6 Int S(e ^ [e,e])      (S = star form)
    S_CS(omega)       = S_CS^K on the stabilizer connection alone
    torsion term      = 1/2 Int K(e ^ d_omega e)
    S_TMG(e)          = -S_Pal(omega(e), e) + (1/mu) S_CS(omega(e))

with these, the split identities hold exactly:

    S_CS^beta(A) = c1 S_Pal + c0 S_CS(omega) + c0 * torsion term
    (1/2)(S_CS^beta(A) + S_CS^beta(~A)) = c0 (S_CS(omega) + torsion term)
    (1/2)(S_CS^beta(A) - S_CS^beta(~A)) = c1 S_Pal
    S_TMG(e) = S_CS^beta(A(e))  with  beta = (c0, c1) = (1/mu, -1)
    S_TMG(e) = -1/2 (1 - 1/(mu c0)) S_CS^b'(A(e))
               + 1/2 (1 + 1/(mu c0)) S_CS^b'(~A(e)),   b' = (c0, 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import invariant_form, killing_form, star_form
from .calculus import (
    LieForm,
    TrigPoly,
    beta_pair,
    covariant_d,
    exterior_d,
    integrate,
    lie_bracket_forms,
    random_form,
    _rng_for,
)
from .cartan import CartanConnection, CartanError, coframe_check, curvature

HALF = Fraction(1, 2)
SIXTH = Fraction(1, 6)


class IdentityError(ValueError):
    """Identity requested with an algebra or coupling it does not cover."""


# ---------------------------------------------------------------------------
# value and coupling containers
# ---------------------------------------------------------------------------

@dataclass
class ActionValue:
    """Action value in units of (2 pi)^n.

    `exact` is the rational multiple of (2 pi)^n when the whole pipeline is
    polynomial; `numeric` always carries the float value in the same units.
    """

    torus_dim: int
    mode: str                    # "exact" | "numeric"
    exact: Fraction | None
    numeric: float
    quadrature_grid: int | None = None

    @property
    def absolute(self):
        return self.numeric * (2.0 * math.pi) ** self.torus_dim

    def render(self):
        if self.mode == "exact":
            return f"{self.exact} x (2pi)^{self.torus_dim}"
        return (f"{self.numeric:.15g} x (2pi)^{self.torus_dim} "
                f"(grid {self.quadrature_grid}^{self.torus_dim})")


def _exact_value(dim, fraction):
    return ActionValue(torus_dim=dim, mode="exact", exact=fraction,
                       numeric=float(fraction))


@dataclass(frozen=True)
class CouplingConstants:
    """(c0, c1) of the invariant form plus the TMG and Immirzi couplings."""

    c0: Fraction = Fraction(1)
    c1: Fraction = Fraction(0)
    mu: Fraction | None = None
    gamma: Fraction | None = None
    lambda_sign: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "c0", Fraction(self.c0))
        object.__setattr__(self, "c1", Fraction(self.c1))
        if self.mu is not None:
            object.__setattr__(self, "mu", Fraction(self.mu))
            if self.mu == 0:
                raise ValueError("topological mass mu must be nonzero")
        if self.gamma is not None:
            object.__setattr__(self, "gamma", Fraction(self.gamma))
            if self.gamma == 0:
                raise ValueError("Immirzi parameter gamma must be nonzero")

    def as_dict(self):
        return {
            "c0": str(self.c0),
            "c1": str(self.c1),
            "mu": None if self.mu is None else str(self.mu),
            "gamma": None if self.gamma is None else str(self.gamma),
        }


def couplings_from_immirzi(gamma):
    """The generalized 4d form labeling (c0, c1) = (1, 1/gamma)."""
    gamma = Fraction(gamma)
    return CouplingConstants(c0=Fraction(1), c1=1 / gamma, gamma=gamma)


@dataclass
class IdentityReport:
    identity_id: str
    algebra: str
    seed: int
    couplings: CouplingConstants
    residual: Fraction | float
    passed: bool
    mode: str                   # "exact" | "numeric"
    tolerance: float | None
    inputs_digest: str

    def residual_str(self):
        if self.mode == "exact":
            return str(self.residual)
        return f"{self.residual:.6e}"


EXACT_IDENTITIES = ("CS_NULL", "CS_PERP", "EINSTEIN_CS", "TWO_CS_SUM",
                    "TWO_CS_DIFF", "QUARTIC_ZERO", "MM_EXPANSION")
NUMERIC_IDENTITIES = ("CS_TMG", "TWO_CS_TMG")
IDENTITY_IDS = EXACT_IDENTITIES + NUMERIC_IDENTITIES

_3D_ALGEBRAS = ("so31", "iso21", "so22", "so4", "iso3")
_4D_ALGEBRAS = ("so41", "so32")
_TMG_ALGEBRAS = ("so31", "so22", "so4")


# ---------------------------------------------------------------------------
# exact action functionals
# ---------------------------------------------------------------------------

def cs_action(a, form):
    """S_CS^beta(A) = 1/2 Int beta(A ^ dA) + 1/6 Int beta(A ^ [A,A])."""
    if a.degree != 1:
        raise CartanError("Chern-Simons argument must be a 1-form")
    if a.dim != 3:
        raise CartanError("Chern-Simons action lives on a 3-torus")
    quad = integrate(beta_pair(form, a, exterior_d(a)))
    cubic = integrate(beta_pair(form, a, lie_bracket_forms(a, a)))
    return _exact_value(3, HALF * quad + SIXTH * cubic)


def _curvature_of(omega):
    return exterior_d(omega) + lie_bracket_forms(omega, omega).scale(HALF)


def palatini_action(omega, e):
    """Int S(e ^ R) + 1/6 Int S(e ^ [e,e]) with the pure star form S."""
    s = star_form(omega.algebra)
    r = _curvature_of(omega)
    val = integrate(beta_pair(s, e, r))
    val += SIXTH * integrate(beta_pair(s, e, lie_bracket_forms(e, e)))
    return _exact_value(e.dim, val)


def torsion_pairing(omega, e):
    """1/2 Int K(e ^ d_omega e)."""
    k = killing_form(omega.algebra)
    val = integrate(beta_pair(k, e, covariant_d(omega, e)))
    return _exact_value(e.dim, HALF * val)


def cs_omega_torsion_action(omega, e):
    """S_CS(omega) + torsion pairing; the involution-even half of S_CS^K."""
    k = killing_form(omega.algebra)
    quad = integrate(beta_pair(k, omega, exterior_d(omega)))
    cubic = integrate(beta_pair(k, omega, lie_bracket_forms(omega, omega)))
    val = HALF * quad + SIXTH * cubic
    val += torsion_pairing(omega, e).exact
    return _exact_value(e.dim, val)


def mm_action(conn, form_h):
    """-1/2 Int beta_h(F_h ^ F_h) on a 4-torus."""
    alg = conn.algebra
    if alg.name not in _4D_ALGEBRAS:
        raise IdentityError(f"the 4d action needs so41 or so32, got {alg.name}")
    if conn.dim != 4:
        raise CartanError("the 4d action lives on a 4-torus")
    if form_h.support != "h_block":
        raise IdentityError("the 4d action takes a stabilizer-block form")
    f_h = curvature(conn).F_h
    val = -HALF * integrate(beta_pair(form_h, f_h, f_h))
    return _exact_value(4, val)


def cs_variation(a, da, form, h=Fraction(1, 10000)):
    """Directional derivative of S_CS^beta at A along dA.

    Returns (exact value of Int beta(dA ^ F), central difference at the
    rational step h).  Both are exact rationals; the central difference
    picks up exactly the h^2 cubic remainder.
    """
    f = exterior_d(a) + lie_bracket_forms(a, a).scale(HALF)
    exact = integrate(beta_pair(form, da, f))
    h = Fraction(h)
    plus = cs_action(a + da.scale(h), form).exact
    minus = cs_action(a - da.scale(h), form).exact
    fd = (plus - minus) / (2 * h)
    return exact, fd


# ---------------------------------------------------------------------------
# 4d topological terms and MM expansion
# ---------------------------------------------------------------------------

def topological_terms(omega):
    """(Int K(R ^ R), Int K(R ^ star R)) for a stabilizer connection on T^4.

    Both are transgressions of exact forms on the torus, so both rationals
    are zero for every omega; they are computed, not assumed.
    """
    alg = omega.algebra
    if alg.name not in _4D_ALGEBRAS:
        raise IdentityError("topological terms are checked on so41/so32")
    k = killing_form(alg)
    r = _curvature_of(omega)
    t1 = integrate(beta_pair(k, r, r))
    t2 = integrate(beta_pair(k, r, r.h_block_star()))
    return t1, t2


def topological_variation_check(omega, delta, h=Fraction(1, 1000)):
    """Exact values and central-difference variations of both invariants."""
    h = Fraction(h)
    t1, t2 = topological_terms(omega)
    p1, p2 = topological_terms(omega + delta.scale(h))
    m1, m2 = topological_terms(omega - delta.scale(h))
    return {
        "tr_RR": t1,
        "tr_RstarR": t2,
        "d_tr_RR": (p1 - m1) / (2 * h),
        "d_tr_RstarR": (p2 - m2) / (2 * h),
    }


def _mm_pieces(conn, couplings):
    """Exact ingredients of the expansion of the generalized 4d action."""
    alg = conn.algebra
    k = killing_form(alg)
    omega, e = conn.omega, conn.coframe
    r = _curvature_of(omega)
    ee = lie_bracket_forms(e, e)
    c0, c1 = couplings.c0, couplings.c1
    t_rr, t_rsr = topological_terms(omega)
    top = -HALF * (c0 * t_rr + c1 * t_rsr)
    expansion = -(c1 * HALF * integrate(beta_pair(k, ee, r.h_block_star()))
                  + c1 * Fraction(1, 8) * integrate(beta_pair(k, ee, ee.h_block_star()))
                  + c0 * HALF * integrate(beta_pair(k, ee, r)))
    return top, expansion


# ---------------------------------------------------------------------------
# pointwise grid machinery (numeric pipeline)
# ---------------------------------------------------------------------------

_PAIRS3 = ((0, 1), (0, 2), (1, 2))
# (direction, complementary pair, sign) entering a top 3-form component
_TOP3 = ((0, 2, 1.0), (1, 1, -1.0), (2, 0, 1.0))


class _Grid3:
    """Uniform tensor grid on T^3 with vectorized pointwise Lie algebra."""

    def __init__(self, alg, n):
        self.alg = alg
        self.n = n
        ax = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        mesh = np.meshgrid(ax, ax, ax, indexing="ij")
        self.axes = [m.ravel() for m in mesh]
        self.npts = self.axes[0].size
        self.c = np.array([[[float(alg.structure[a][b][c])
                             for c in range(alg.dim)]
                            for b in range(alg.dim)]
                           for a in range(alg.dim)])

    def points(self):
        return np.stack(self.axes, axis=1)

    def eval_poly(self, poly):
        return poly.evaluate_mesh(self.axes)

    def eval_1form(self, w):
        out = np.zeros((self.npts, 3, self.alg.dim))
        for (alpha, idx), poly in w.comps.items():
            out[:, idx[0], alpha] = self.eval_poly(poly)
        return out

    def eval_2form(self, w):
        out = np.zeros((self.npts, 3, self.alg.dim))
        pair_pos = {p: i for i, p in enumerate(_PAIRS3)}
        for (alpha, idx), poly in w.comps.items():
            out[:, pair_pos[idx], alpha] = self.eval_poly(poly)
        return out

    def bracket(self, u, v):
        """Pointwise algebra bracket of coefficient arrays (..., dim)."""
        return np.einsum("abc,xa,xb->xc", self.c, u, v)

    def two_form_bracket(self, u, v):
        """[u, v] for 1-form arrays (npts, 3, dim) -> (npts, 3 pairs, dim)."""
        out = np.empty((self.npts, 3, self.alg.dim))
        for i, (mu, nu) in enumerate(_PAIRS3):
            out[:, i] = (self.bracket(u[:, mu], v[:, nu])
                         - self.bracket(u[:, nu], v[:, mu]))
        return out

    def pair_top(self, one, two, gram):
        """beta(1-form ^ 2-form) top component, shape (npts,)."""
        g = np.array([[float(x) for x in row] for row in gram])
        vals = np.zeros(self.npts)
        for mu, pair_idx, sign in _TOP3:
            vals += sign * np.einsum("xa,ab,xb->x", one[:, mu], g,
                                     two[:, pair_idx])
        return vals

    def mean(self, vals):
        """Grid quadrature, reported as a multiple of (2 pi)^3."""
        return float(vals.mean())


def _eval_forms_at(alg, w, pts_axes, degree):
    """Evaluate a LieForm on arbitrary points; (npts, ncomp, dim)."""
    from .calculus import multi_indices
    idx_list = multi_indices(w.dim, degree)
    pos = {idx: i for i, idx in enumerate(idx_list)}
    npts = pts_axes[0].size
    out = np.zeros((npts, len(idx_list), alg.dim))
    for (alpha, idx), poly in w.comps.items():
        out[:, pos[idx], alpha] = poly.evaluate_mesh(pts_axes)
    return out


# ---------------------------------------------------------------------------
# torsion-free spin connection
# ---------------------------------------------------------------------------

class LeviCivitaConnection:
    """Pointwise torsion-free stabilizer connection determined by a coframe.

    At each point the linear system (de)^a_{mu nu} + [w_mu, e_nu]^a
    - [w_nu, e_mu]^a = 0 is solved for the stabilizer coefficients of w;
    derivatives of w come from differentiating the same system, so no
    finite differencing enters anywhere.
    """

    def __init__(self, e):
        alg = e.algebra
        if alg.spacetime_dim != 3 or e.dim != 3:
            raise CartanError("torsion-free solve implemented on T^3")
        if any(k[0] not in set(alg.p_indices) for k in e.comps):
            raise CartanError("coframe must be translation-valued")
        self.e = e
        self.alg = alg
        self.de = exterior_d(e)
        # d(de)/dx_sigma arrives via exact spectral derivatives
        self._de_deriv = [self._deriv_form(self.de, s) for s in range(3)]
        self._e_deriv = [self._deriv_form(e, s) for s in range(3)]
        # C[h_i, p_b -> p_a] as float tensor
        h, p = alg.h_indices, alg.p_indices
        self.c_hpp = np.array([[[float(alg.structure[hi][pb][pa])
                                 for pa in p] for pb in p] for hi in h])
        self.c_hhh = np.array([[[float(alg.structure[ha][hb][hc])
                                 for hc in h] for hb in h] for ha in h])

    @staticmethod
    def _deriv_form(w, sigma):
        comps = {}
        for key, poly in w.comps.items():
            d = poly.deriv(sigma)
            if not d.is_zero():
                comps[key] = d
        out = LieForm.__new__(LieForm)
        out.algebra, out.dim, out.degree = w.algebra, w.dim, w.degree
        out.comps = comps
        return out

    def _eval_p_valued(self, w, axes, degree):
        """(npts, ncomp, 3) in translation coordinates."""
        full = _eval_forms_at(self.alg, w, axes, degree)
        return full[:, :, list(self.alg.p_indices)]

    def solve(self, axes):
        """Solve for w and its coordinate derivatives on given points.

        Returns dict with E (npts,3,3), w (npts,3,3  [mu, h-coeff]),
        dw (npts,3,3 [pair, h-coeff]), plus raw derivative arrays.
        """
        npts = axes[0].size
        e_arr = self._eval_p_valued(self.e, axes, 1)        # (npts, mu, a)
        de_arr = self._eval_p_valued(self.de, axes, 2)      # (npts, pair, a)
        e_d = [self._eval_p_valued(f, axes, 1) for f in self._e_deriv]
        de_d = [self._eval_p_valued(f, axes, 2) for f in self._de_deriv]

        # ad[x, i, nu, a] = [h_i, e_nu]^a
        def ad_of(earr):
            return np.einsum("iba,xnb->xina", self.c_hpp, earr)

        ad_e = ad_of(e_arr)
        mat = np.zeros((npts, 9, 9))
        for row, (mu, nu) in enumerate(_PAIRS3):
            for a in range(3):
                r = row * 3 + a
                # unknown ordering: w[rho, i] -> column rho*3 + i
                mat[:, r, mu * 3:mu * 3 + 3] += ad_e[:, :, nu, a]
                mat[:, r, nu * 3:nu * 3 + 3] -= ad_e[:, :, mu, a]
        rhs = np.zeros((npts, 9))
        for row in range(3):
            for a in range(3):
                rhs[:, row * 3 + a] = -de_arr[:, row, a]
        w_flat = np.linalg.solve(mat, rhs[..., None])[..., 0]
        w = w_flat.reshape(npts, 3, 3)

        # derivatives: mat . dw_sigma = -d_sigma(de) - d_sigma(mat) . w
        dw_sigma = []
        for s in range(3):
            ad_es = ad_of(e_d[s])
            rhs_s = np.zeros((npts, 9))
            for row, (mu, nu) in enumerate(_PAIRS3):
                for a in range(3):
                    r = row * 3 + a
                    rhs_s[:, r] = -de_d[s][:, row, a]
                    rhs_s[:, r] -= np.einsum("xi,xi->x", w[:, mu], ad_es[:, :, nu, a])
                    rhs_s[:, r] += np.einsum("xi,xi->x", w[:, nu], ad_es[:, :, mu, a])
            dw_sigma.append(np.linalg.solve(mat, rhs_s[..., None])[..., 0]
                            .reshape(npts, 3, 3))
        # curl -> dw as a 2-form (pair, i)
        dw = np.empty((npts, 3, 3))
        for row, (mu, nu) in enumerate(_PAIRS3):
            dw[:, row] = dw_sigma[mu][:, nu] - dw_sigma[nu][:, mu]
        return {"E": e_arr, "dE": de_arr, "w": w, "dw": dw}

    def omega_at(self, points):
        """Stabilizer coefficients of w at points, shape (npts, 3 mu, 3 i)."""
        axes = [np.asarray(points, dtype=float)[:, j] for j in range(3)]
        return self.solve(axes)["w"]

    def torsion_residual(self, points):
        """max |de + [w, e]| over probe points; solver self-check."""
        axes = [np.asarray(points, dtype=float)[:, j] for j in range(3)]
        sol = self.solve(axes)
        res = 0.0
        for row, (mu, nu) in enumerate(_PAIRS3):
            t = (sol["dE"][:, row]
                 + np.einsum("iba,xi,xb->xa", self.c_hpp, sol["w"][:, mu],
                             sol["E"][:, nu])
                 - np.einsum("iba,xi,xb->xa", self.c_hpp, sol["w"][:, nu],
                             sol["E"][:, mu]))
            res = max(res, float(np.abs(t).max()))
        return res


def levi_civita_connection(e, grid=16, tol=1e-8):
    """Torsion-free stabilizer connection for a nondegenerate coframe."""
    check = coframe_check(e, grid_size=grid, tol=tol)
    if not check["nondegenerate"]:
        raise CartanError(
            f"degenerate coframe: min |det e| = {check['min_abs_det']:.3e}")
    return LeviCivitaConnection(e)


# ---------------------------------------------------------------------------
# TMG and the numeric Chern-Simons pipeline
# ---------------------------------------------------------------------------

def _tmg_grid_data(lc, grid):
    """All pointwise fields entering the TMG-family functionals."""
    g3 = _Grid3(lc.alg, grid)
    sol = lc.solve(g3.axes)
    alg = lc.alg
    dim = alg.dim
    npts = g3.npts
    h_idx = list(alg.h_indices)
    p_idx = list(alg.p_indices)

    w_full = np.zeros((npts, 3, dim))
    w_full[:, :, h_idx] = sol["w"]
    e_full = np.zeros((npts, 3, dim))
    e_full[:, :, p_idx] = sol["E"]
    dw_full = np.zeros((npts, 3, dim))
    dw_full[:, :, h_idx] = sol["dw"]
    de_full = np.zeros((npts, 3, dim))
    de_full[:, :, p_idx] = sol["dE"]
    return g3, w_full, e_full, dw_full, de_full


def _cs_value_pointwise(g3, a, da, gram):
    aa = g3.two_form_bracket(a, a)
    vals = 0.5 * g3.pair_top(a, da, gram) + g3.pair_top(a, aa, gram) / 6.0
    return g3.mean(vals)


def tmg_action(e, mu, grid=32, lc=None):
    """S_TMG(e) by spectral-accuracy quadrature on a uniform grid."""
    mu = Fraction(mu)
    if mu == 0:
        raise ValueError("topological mass mu must be nonzero")
    lc = lc or levi_civita_connection(e)
    g3, w, e_arr, dw, de = _tmg_grid_data(lc, grid)
    alg = lc.alg
    s_gram = star_form(alg).gram
    k_gram = killing_form(alg).gram
    ww = g3.two_form_bracket(w, w)
    r = dw + 0.5 * ww
    ee = g3.two_form_bracket(e_arr, e_arr)
    pal = g3.mean(g3.pair_top(e_arr, r, s_gram)
                  + g3.pair_top(e_arr, ee, s_gram) / 6.0)
    cs_w = g3.mean(0.5 * g3.pair_top(w, dw, k_gram)
                   + g3.pair_top(w, ww, k_gram) / 6.0)
    val = -pal + float(1 / mu) * cs_w
    return ActionValue(torus_dim=3, mode="numeric", exact=None, numeric=val,
                       quadrature_grid=grid)


def tmg_refinement_report(e, mu, grids=(4, 8, 16), reference_grid=48):
    """Quadrature errors against a fine reference; spectral decay expected."""
    lc = levi_civita_connection(e)
    ref = tmg_action(e, mu, grid=reference_grid, lc=lc).numeric
    rows = []
    for g in grids:
        v = tmg_action(e, mu, grid=g, lc=lc).numeric
        rows.append({"grid": g, "value": v, "error": abs(v - ref)})
    return {"reference_grid": reference_grid, "reference": ref, "rows": rows}


def cs_action_numeric(a, form, grid=32):
    """Quadrature evaluation of the exact Chern-Simons pipeline."""
    if a.dim != 3:
        raise CartanError("numeric CS evaluation lives on T^3")
    g3 = _Grid3(a.algebra, grid)
    a_arr = g3.eval_1form(a)
    da_arr = g3.eval_2form(exterior_d(a))
    val = _cs_value_pointwise(g3, a_arr, da_arr, form.gram)
    return ActionValue(torus_dim=3, mode="numeric", exact=None, numeric=val,
                       quadrature_grid=grid)


def palatini_action_numeric(omega, e, grid=32):
    g3 = _Grid3(omega.algebra, grid)
    s_gram = star_form(omega.algebra).gram
    w = g3.eval_1form(omega)
    e_arr = g3.eval_1form(e)
    r = g3.eval_2form(_curvature_of(omega))
    ee = g3.two_form_bracket(e_arr, e_arr)
    val = g3.mean(g3.pair_top(e_arr, r, s_gram)
                  + g3.pair_top(e_arr, ee, s_gram) / 6.0)
    return ActionValue(torus_dim=3, mode="numeric", exact=None, numeric=val,
                       quadrature_grid=grid)


# ---------------------------------------------------------------------------
# bundled analytic coframes
# ---------------------------------------------------------------------------

def analytic_coframe(alg, seed=0, amplitude=Fraction(1, 10), cutoff=1):
    """Identity coframe plus a small seeded harmonic perturbation.

    Perturbation coefficients are bounded by `amplitude`, which keeps every
    grid determinant near 1 and the torsion-free solve well conditioned.
    """
    if alg.spacetime_dim != 3:
        raise CartanError("bundled coframes are 3d")
    rng = _rng_for(seed, "coframe", alg.name, cutoff)
    amplitude = Fraction(amplitude)
    comps = {}
    for a, lie_idx in enumerate(alg.p_indices):
        for mu in range(3):
            poly = TrigPoly.constant(3, 1) if a == mu else TrigPoly.zero(3)
            k = tuple(rng.randint(-cutoff, cutoff) for _ in range(3))
            re = amplitude * Fraction(rng.randint(-3, 3), 3)
            im = 0 if all(x == 0 for x in k) else amplitude * Fraction(rng.randint(-3, 3), 3)
            poly = poly + TrigPoly.harmonic(3, k, re, im)
            if not poly.is_zero():
                comps[(lie_idx, (mu,))] = poly
    return LieForm(alg, 3, 1, comps)


# ---------------------------------------------------------------------------
# identity reports
# ---------------------------------------------------------------------------

def _require(condition, message):
    if not condition:
        raise IdentityError(message)


def _gram_blocks_zero(form, rows, cols):
    return all(form.gram[i][j] == 0 for i in rows for j in cols)


def _random_connection(alg, seed, cutoff, density):
    omega = random_form(seed, 1, alg, cutoff=cutoff, support="h",
                        density=density)
    e = random_form(seed, 1, alg, cutoff=cutoff, support="p", density=density)
    return CartanConnection(omega, e)


def identity_residual(identity_id, alg, seed, couplings=None, cutoff=1,
                      grid=32):
    """Evaluate both sides of one named identity on seeded random fields.

    Exact identities return the rational residual (pass iff exactly zero);
    the TMG identities return a relative float residual against 1e-8.
    """
    couplings = couplings or CouplingConstants()
    if identity_id not in IDENTITY_IDS:
        raise IdentityError(f"unknown identity {identity_id!r}")
    digest = (f"{identity_id}/{alg.name}/seed={seed}"
              f"/c0={couplings.c0}/c1={couplings.c1}/mu={couplings.mu}"
              f"/K={cutoff}")

    if identity_id in ("CS_NULL", "CS_PERP", "EINSTEIN_CS", "TWO_CS_SUM",
                       "TWO_CS_DIFF"):
        _require(alg.name in _3D_ALGEBRAS,
                 f"{identity_id} needs a 3d algebra, got {alg.name}")
        form = invariant_form(alg, couplings.c0, couplings.c1)
        conn = _random_connection(alg, seed, cutoff, density=0.6)
        omega, e = conn.omega, conn.coframe
        a = conn.full()
        if identity_id == "CS_NULL":
            h, p = alg.h_indices, alg.p_indices
            _require(_gram_blocks_zero(form, h, h) and _gram_blocks_zero(form, p, p),
                     f"CS_NULL needs a form with h-h and p-p blocks zero; "
                     f"(c0, c1) = ({couplings.c0}, {couplings.c1}) on "
                     f"{alg.name} fails that hypothesis")
            r = _curvature_of(omega)
            rhs = integrate(beta_pair(form, e, r))
            rhs += SIXTH * integrate(beta_pair(form, e, lie_bracket_forms(e, e)))
            residual = cs_action(a, form).exact - rhs
        elif identity_id == "CS_PERP":
            h, p = alg.h_indices, alg.p_indices
            _require(_gram_blocks_zero(form, h, p),
                     f"CS_PERP needs a form with the h-p block zero; "
                     f"(c0, c1) = ({couplings.c0}, {couplings.c1}) on "
                     f"{alg.name} fails that hypothesis")
            quad = integrate(beta_pair(form, omega, exterior_d(omega)))
            cubic = integrate(beta_pair(form, omega,
                                        lie_bracket_forms(omega, omega)))
            tors = integrate(beta_pair(form, e, covariant_d(omega, e)))
            rhs = HALF * quad + SIXTH * cubic + HALF * tors
            residual = cs_action(a, form).exact - rhs
        elif identity_id == "EINSTEIN_CS":
            rhs = (couplings.c1 * palatini_action(omega, e).exact
                   + couplings.c0 * cs_action(omega, killing_form(alg)).exact
                   + couplings.c0 * torsion_pairing(omega, e).exact)
            residual = cs_action(a, form).exact - rhs
        elif identity_id == "TWO_CS_SUM":
            lhs = HALF * (cs_action(a, form).exact
                          + cs_action(conn.involute().full(), form).exact)
            residual = lhs - couplings.c0 * cs_omega_torsion_action(omega, e).exact
        else:  # TWO_CS_DIFF
            lhs = HALF * (cs_action(a, form).exact
                          - cs_action(conn.involute().full(), form).exact)
            residual = lhs - couplings.c1 * palatini_action(omega, e).exact
        return IdentityReport(identity_id, alg.name, seed, couplings,
                              residual, residual == 0, "exact", None, digest)

    if identity_id == "QUARTIC_ZERO":
        _require(alg.name in _4D_ALGEBRAS,
                 f"QUARTIC_ZERO needs so41 or so32, got {alg.name}")
        e = random_form(seed, 1, alg, dim=4, cutoff=cutoff, support="p",
                        density=0.5)
        ee = lie_bracket_forms(e, e)
        residual = integrate(beta_pair(killing_form(alg), ee, ee))
        return IdentityReport(identity_id, alg.name, seed, couplings,
                              residual, residual == 0, "exact", None, digest)

    if identity_id == "MM_EXPANSION":
        _require(alg.name in _4D_ALGEBRAS,
                 f"MM_EXPANSION needs so41 or so32, got {alg.name}")
        omega = random_form(seed, 1, alg, dim=4, cutoff=cutoff, support="h",
                            density=0.35)
        e = random_form(seed, 1, alg, dim=4, cutoff=cutoff, support="p",
                        density=0.5)
        conn = CartanConnection(omega, e)
        form_h = invariant_form(alg, couplings.c0, couplings.c1)
        lhs = mm_action(conn, form_h).exact
        top, expansion = _mm_pieces(conn, couplings)
        residual = lhs - top - expansion
        return IdentityReport(identity_id, alg.name, seed, couplings,
                              residual, residual == 0, "exact", None, digest)

    # numeric TMG identities
    _require(alg.name in _TMG_ALGEBRAS,
             f"{identity_id} needs so31, so22 or so4, got {alg.name}")
    _require(couplings.mu is not None, f"{identity_id} needs mu")
    mu = couplings.mu
    e = analytic_coframe(alg, seed=seed)
    lc = levi_civita_connection(e)
    g3, w, e_arr, dw, de = _tmg_grid_data(lc, grid)
    s_gram = star_form(alg).gram
    k_gram = killing_form(alg).gram
    ww = g3.two_form_bracket(w, w)
    r = dw + 0.5 * ww
    ee = g3.two_form_bracket(e_arr, e_arr)
    pal = g3.mean(g3.pair_top(e_arr, r, s_gram)
                  + g3.pair_top(e_arr, ee, s_gram) / 6.0)
    cs_w = g3.mean(0.5 * g3.pair_top(w, dw, k_gram)
                   + g3.pair_top(w, ww, k_gram) / 6.0)
    tmg = -pal + float(1 / mu) * cs_w
    digest += f"/grid={grid}"

    if identity_id == "CS_TMG":
        # S_TMG(e) = S_CS^beta(A(e)) for beta = (1/mu) K - S
        form = invariant_form(alg, 1 / mu, -1)
        a_arr = w + e_arr
        da_arr = dw + de
        rhs = _cs_value_pointwise(g3, a_arr, da_arr, form.gram)
    else:  # TWO_CS_TMG
        c0 = couplings.c0
        _require(c0 != 0, "TWO_CS_TMG needs c0 != 0 in the normalized form")
        form = invariant_form(alg, c0, 1)
        a_arr = w + e_arr
        at_arr = w - e_arr
        da_arr = dw + de
        dat_arr = dw - de
        coeff = float(1 / (mu * c0))
        rhs = (-0.5 * (1.0 - coeff) * _cs_value_pointwise(g3, a_arr, da_arr, form.gram)
               + 0.5 * (1.0 + coeff) * _cs_value_pointwise(g3, at_arr, dat_arr, form.gram))
    scale = max(abs(tmg), abs(rhs), 1e-12)
    residual = abs(tmg - rhs) / scale
    return IdentityReport(identity_id, alg.name, seed, couplings, residual,
                          residual < 1e-8, "numeric", 1e-8, digest)
