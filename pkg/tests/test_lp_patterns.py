"""lp geometry, exact difference identities, shell sets, and pattern search."""

from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cornerlab import (
    CostRefusalError,
    GridFunction,
    Lattice,
    LpExponent,
    ShellSet,
    WindowKernel,
    binomial_difference,
    bourgain_forbidden_intervals,
    find_aps,
    find_corners,
    general_forbidden_intervals,
    lift_ap_set_to_corners,
    lp_norm,
    lp_power_sum,
    max_corner_free,
    scalar_finite_difference,
    shell_membership,
    varnavides_corner_density,
)
from cornerlab.lp_patterns import as_lp_exponent, default_search_lattice


def on_integers(members):
    """Membership predicate for a finite integer set on the real line."""
    members = sorted(members)

    def pred(x):
        x = np.asarray(x, dtype=float)
        r = np.round(x[..., 0])
        return np.isin(r, members) & (np.abs(x[..., 0] - r) < 1e-9)

    return pred


# ---------------------------------------------------------------- lp norms

@given(
    v=st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=6),
    p=st.floats(min_value=1.0, max_value=8.0),
    c=st.floats(min_value=-4.0, max_value=4.0),
)
@settings(max_examples=150)
def test_lp_norm_homogeneous(v, p, c):
    v = np.asarray(v)
    assert lp_norm(c * v, p) == pytest.approx(abs(c) * lp_norm(v, p), rel=1e-9, abs=1e-9)


@given(
    a=st.lists(st.floats(-20, 20, allow_nan=False), min_size=3, max_size=3),
    b=st.lists(st.floats(-20, 20, allow_nan=False), min_size=3, max_size=3),
    p=st.floats(min_value=1.0, max_value=6.0),
)
@settings(max_examples=150)
def test_lp_norm_triangle_inequality(a, b, p):
    a, b = np.asarray(a), np.asarray(b)
    assert lp_norm(a + b, p) <= lp_norm(a, p) + lp_norm(b, p) + 1e-9


def test_lp_norm_infinity_is_max():
    v = np.array([1.0, -7.0, 3.0])
    assert lp_norm(v, np.inf) == 7.0
    assert lp_norm(v, LpExponent.sup()) == 7.0
    assert as_lp_exponent(np.inf).infinite


def test_lp_exponent_validates():
    with pytest.raises(ValueError):
        LpExponent(0.5)
    with pytest.raises(ValueError):
        LpExponent(float("nan"))


def test_lp_power_sum_consistency():
    v = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(lp_power_sum(v, 3.0), lp_norm(v, 3.0) ** 3)


# ------------------------------------------------- forbidden interval tables

def test_bourgain_intervals_exact_endpoints():
    ivs = bourgain_forbidden_intervals(4, power=True)
    expected = [((5 * n - 3) / 10, (5 * n - 2) / 10) for n in range(1, 5)]
    assert len(ivs) == 4
    for (a, b), (ea, eb) in zip(ivs, expected):
        assert a == pytest.approx(ea, rel=1e-14)
        assert b == pytest.approx(eb, rel=1e-14)


def test_bourgain_intervals_sqrt_relation():
    pow_ivs = bourgain_forbidden_intervals(3, power=True)
    rad_ivs = bourgain_forbidden_intervals(3)
    for (pa, pb), (ra, rb) in zip(pow_ivs, rad_ivs):
        assert ra == pytest.approx(pa ** 0.5, rel=1e-14)
        assert rb == pytest.approx(pb ** 0.5, rel=1e-14)


def test_general_intervals_endpoints_scale_with_factorial():
    ivs = general_forbidden_intervals(3, 2, power=True)
    assert ivs[0] == pytest.approx((1 / 24, 3 / 24), rel=1e-14)
    assert ivs[1] == pytest.approx((5 / 24, 7 / 24), rel=1e-14)
    rad = general_forbidden_intervals(3, 2)
    assert rad[0][0] == pytest.approx((1 / 24) ** (1 / 3), rel=1e-14)


def test_interval_tables_validate():
    with pytest.raises(ValueError):
        bourgain_forbidden_intervals(0)
    with pytest.raises(ValueError):
        general_forbidden_intervals(0, 3)


# ------------------------------------------------------ difference identities

@given(
    p=st.integers(min_value=1, max_value=4),
    d=st.integers(min_value=1, max_value=3),
    data=st.data(),
)
@settings(max_examples=200)
def test_binomial_difference_exact_closed_form(p, d, data):
    """The alternating p-th difference of ||.||_p^p along s is p! * sum_i s_i^p."""
    s = np.array(
        data.draw(
            st.lists(st.integers(-6, 6), min_size=d, max_size=d).filter(
                lambda v: any(c != 0 for c in v)
            )
        )
    )
    # keep every evaluation point x + j*s in the positive cone
    base = data.draw(st.lists(st.integers(0, 30), min_size=d, max_size=d))
    x = np.array(base) + np.maximum(0, -p * s)
    val = binomial_difference(x, s, p, exact=True)
    expected = factorial(p) * sum(Fraction(int(c)) ** p for c in s)
    assert val == expected
    if p % 2 == 0 or (s >= 0).all():
        assert val == factorial(p) * sum(abs(Fraction(int(c))) ** p for c in s)


def test_binomial_difference_float_route_matches_exact():
    x = np.array([3.0, 11.0])
    s = np.array([2.0, 1.0])
    ex = binomial_difference(x, s, 3, exact=True)
    fl = binomial_difference(x, s, 3)
    assert fl == pytest.approx(float(ex), rel=1e-10)


def test_binomial_difference_requires_positive_cone():
    # x + 2s leaves the cone, so the polynomial identity is unavailable
    with pytest.raises(ValueError):
        binomial_difference(np.array([1.0]), np.array([-1.0]), 2)


@given(
    alpha=st.integers(min_value=0, max_value=40),
    beta=st.integers(min_value=-9, max_value=9),
    p=st.integers(min_value=1, max_value=5),
)
@settings(max_examples=200)
def test_scalar_difference_annihilates_below_degree(alpha, beta, p):
    for l in range(p):
        assert scalar_finite_difference(alpha, beta, p, l, exact=True) == 0


def test_scalar_difference_top_order_is_factorial():
    assert scalar_finite_difference(2, 3, 3, 3, exact=True) == factorial(3) * Fraction(3) ** 3
    with pytest.raises(ValueError):
        scalar_finite_difference(2, 3, 3, 4)


# ----------------------------------------------------------------- shell sets

def test_shell_set_default_half_width():
    shell = ShellSet(p=2, d=2)
    assert shell.half_width == pytest.approx(2.0 ** (-4))


def test_shell_membership_near_integer_radii():
    shell = ShellSet(p=2, d=2, half_width=0.1)
    x = np.array([[3.0, 4.0], [3.01, 4.0], [3.3, 4.0], [-3.0, 4.0]])
    # |x|_2^2 = 25, 25.06, 26.89; the last point fails positivity
    assert shell(x).tolist() == [True, True, False, False]


def test_shell_membership_positivity_toggle():
    shell = ShellSet(p=2, d=2, half_width=0.1, positivity=False)
    assert shell(np.array([-3.0, 4.0]))
    assert shell_membership(np.array([-3.0, 4.0]), shell)


def test_shell_membership_checks_dimension():
    shell = ShellSet(p=2, d=2)
    with pytest.raises(ValueError):
        shell(np.zeros((4, 3)))


def test_shell_for_window_caps_reachable_index():
    shell = ShellSet.for_window(3, 2, 10.0)
    # largest power-sum inside the box: (10 * 2^(1/3))^3 = 2000
    assert shell.n_max == 2002


# -------------------------------------------------------------- lattice search

def test_lattice_axis_points():
    lat = Lattice(origin=(0.0, 1.0), spacing=0.5, counts=(3, 2))
    assert np.allclose(lat.axis_points(0), [0.0, 0.5, 1.0])
    assert np.allclose(lat.axis_points(1), [1.0, 1.5])
    with pytest.raises(ValueError):
        Lattice(origin=(0.0,), spacing=0.5, counts=(3, 2))


def test_default_search_lattice_spacing():
    lat = default_search_lattice(((-4.0, 4.0),), 8.0)
    assert lat.spacing == pytest.approx(0.25)
    pts = lat.axis_points(0)
    assert pts[0] == -4.0 and pts[-1] == pytest.approx(4.0)


def test_find_aps_on_hand_built_set():
    """Membership {0,1,2,5} on Z contains exactly the 3-AP 0,1,2."""
    mem = on_integers([0, 1, 2, 5])
    lat = Lattice(origin=(0.0,), spacing=1.0, counts=(7,))
    hits = find_aps(mem, lat, 3, norm_window=(0.5, 1.5))
    # the same progression is found from both ends (s and -s)
    assert sorted(h.x[0] for h in hits) == [0.0, 2.0]
    assert all(h.length == 3 for h in hits)
    assert all(h.side_norm == pytest.approx(1.0) for h in hits)


def test_find_aps_norm_window_is_open():
    mem = on_integers([0, 1, 2])
    lat = Lattice(origin=(0.0,), spacing=1.0, counts=(3,))
    assert find_aps(mem, lat, 3, norm_window=(1.0, 2.0)) == []


def test_find_corners_on_pair_lifted_set():
    """Corners of the pair set {y - x in A} project to 3-APs in A."""
    corner_mem = lift_ap_set_to_corners(on_integers([0, 1, 2]), d=1)
    lat = Lattice(origin=(0.0,), spacing=1.0, counts=(3,))
    hits = find_corners(corner_mem, lat, norm_window=(0.5, 1.5))
    # every vertex must stay on the lattice, which leaves one hit per sign of s
    assert len(hits) == 2
    assert sorted((h.x[0], h.y[0], h.s[0]) for h in hits) == [(0.0, 1.0, 1.0), (1.0, 2.0, -1.0)]
    for h in hits:
        assert h.side_norm == pytest.approx(1.0)
        assert (h.y[0] - h.x[0]) == pytest.approx(1.0)
        for v in (h.x + h.y,
                  tuple(np.add(h.x, h.s)) + h.y,
                  h.x + tuple(np.add(h.y, h.s))):
            assert corner_mem(np.array([v]))[0]


def test_find_corners_requires_exactly_one_scale_argument():
    mem = lambda x: np.ones(x.shape[:-1], dtype=bool)
    lat = Lattice(origin=(0.0,), spacing=1.0, counts=(2,))
    with pytest.raises(ValueError):
        find_corners(mem, lat)
    with pytest.raises(ValueError):
        find_corners(mem, lat, lam=1.0, norm_window=(0.5, 1.5))


def test_membership_mask_guard_refuses_huge_products():
    mem = lambda x: np.ones(x.shape[:-1], dtype=bool)
    lat = Lattice(origin=(0.0,), spacing=1.0, counts=(40000,))
    with pytest.raises(CostRefusalError):
        find_corners(mem, lat, norm_window=(0.5, 1.5))


def test_lift_validates_dimension():
    pred = lift_ap_set_to_corners(on_integers([0]), d=1)
    with pytest.raises(ValueError):
        pred(np.zeros((4, 3)))
    with pytest.raises(ValueError):
        lift_ap_set_to_corners(on_integers([0]), d=1, variant=2)


# ------------------------------------------------------- combinatorial oracles

def test_max_corner_free_small_values():
    assert [max_corner_free(n) for n in range(1, 5)] == [1, 3, 6, 10]
    with pytest.raises(ValueError):
        max_corner_free(5)


def test_varnavides_density_endpoints():
    full = GridFunction(np.ones((12, 12)), 1 / 12)
    empty = GridFunction(np.zeros((12, 12)), 1 / 12)
    assert varnavides_corner_density(full, 4, 0.5, samples=50, seed=1) == 1.0
    assert varnavides_corner_density(empty, 4, 0.5, samples=50, seed=1) == 0.0
    with pytest.raises(ValueError):
        varnavides_corner_density(full, 4, 1.5)
    with pytest.raises(ValueError):
        varnavides_corner_density(full, 1, 0.5)
