"""Graded local Floer ranks, the iteration shift law, and detection."""
import dataclasses

import numpy as np
import pytest

from localfloer.corpus import (
    direct_sum_germ,
    hyperbolic,
    linear_rotation,
    negative_hyperbolic,
    quartic,
    shear,
)
from localfloer.cubical import GradedRanks
from localfloer.errors import NotAdmissible, RouteUnavailable, ShiftAmbiguous
from localfloer.germs import HamiltonianGerm, fixed_point_record
from localfloer.invariants import (
    detect_sdm,
    fixed_point_index,
    kunneth,
    local_floer,
    total_ranks,
    verify_persistence,
)


def record_of(germ):
    return fixed_point_record(germ, np.zeros(2 * germ.n))


# --- single-order ranks per route


def test_small_maximum_has_rank_one_in_top_degree():
    germ = linear_rotation(0.05)
    lf = local_floer(germ, record_of(germ))
    assert lf.route == "nondegenerate"
    assert lf.ranks.as_dict() == {1: 1}
    assert abs(lf.delta - 0.1) < 1e-6


def test_hyperbolic_rank_sits_in_degree_zero():
    germ = hyperbolic(2.0)
    lf = local_floer(germ, record_of(germ))
    assert lf.ranks.as_dict() == {0: 1}


@pytest.mark.parametrize("k", [1, 2, 3])
def test_degenerate_maximum_rank_is_stable(k):
    germ = quartic(-1)
    lf = local_floer(germ, record_of(germ), k)
    assert lf.route == "strongly_degenerate"
    assert lf.ranks.as_dict() == {1: 1}
    assert lf.delta == 0.0
    assert lf.hypothesis["hessian_norm_at_zero"] < 2.0 * np.pi
    assert lf.hypothesis["kk_side_bounds_checked"] is False


def test_forced_route_matches_detected_route():
    germ = quartic(-1)
    rec = record_of(germ)
    auto = local_floer(germ, rec)
    forced = local_floer(germ, rec, route="strongly_degenerate")
    assert auto.ranks == forced.ranks


def test_split_route_convolves_factors():
    germ = direct_sum_germ(linear_rotation(0.3183), quartic(-1))
    lf = local_floer(germ, record_of(germ))
    assert lf.route == "split"
    assert lf.ranks.as_dict() == {2: 1}
    assert abs(lf.delta - 2.0 * 0.3183) < 1e-6


def test_split_of_two_rotations():
    germ = direct_sum_germ(linear_rotation(0.3183), linear_rotation(0.4142))
    lf = local_floer(germ, record_of(germ))
    assert lf.ranks.as_dict() == {2: 1}
    assert abs(lf.delta - 2.0 * (0.3183 + 0.4142)) < 1e-6


def test_mixed_spectrum_without_split_has_no_route():
    base = direct_sum_germ(hyperbolic(2.0), shear())
    opaque = dataclasses.replace(base, factors=None)
    with pytest.raises(RouteUnavailable):
        local_floer(opaque, record_of(opaque))


def test_nondegenerate_route_refused_on_unipotent_monodromy():
    germ = quartic(-1)
    with pytest.raises(RouteUnavailable):
        local_floer(germ, record_of(germ), route="nondegenerate")


def test_inadmissible_order_refused():
    germ = linear_rotation(1.0 / 3.0)
    with pytest.raises(NotAdmissible):
        local_floer(germ, record_of(germ), 3)


def test_kunneth_is_rank_convolution():
    a = GradedRanks.from_dict({1: 1, 2: 3})
    b = GradedRanks.from_dict({0: 2, 1: 1})
    assert kunneth(a, b).as_dict() == {1: 2, 2: 7, 3: 3}


def test_report_serializes():
    germ = linear_rotation(0.05)
    data = local_floer(germ, record_of(germ)).to_json()
    assert data["route"] == "nondegenerate"
    assert data["ranks"] == {"1": 1}


# --- persistence of ranks across iteration


def test_rotation_shift_sequence():
    germ = linear_rotation(0.3183)
    report = verify_persistence(germ, record_of(germ), range(1, 7))
    shifts = [row.s_k for row in report.rows]
    assert shifts == [0, 0, 0, 2, 2, 2]
    assert all(report.checks.values())


def test_degenerate_maximum_shifts_vanish():
    germ = quartic(-1)
    report = verify_persistence(germ, record_of(germ), range(1, 4))
    assert [row.s_k for row in report.rows] == [0, 0, 0]
    assert all(report.checks.values())
    assert all(row.ranks.as_dict() == {1: 1} for row in report.rows)


def test_reflected_saddle_odd_shift_at_bad_order():
    germ = negative_hyperbolic(2.0)
    report = verify_persistence(germ, record_of(germ), [1, 2, 3])
    rows = {row.k: row for row in report.rows}
    assert rows[2].s_k == 1 and not rows[2].good
    assert rows[3].s_k == 2 and rows[3].good
    # parity is only promised at good orders, so the checks still pass
    assert report.checks["even_shift_at_good_orders"]


def test_persistence_rejects_inadmissible_order():
    germ = linear_rotation(1.0 / 3.0)
    with pytest.raises(NotAdmissible):
        verify_persistence(germ, record_of(germ), [1, 2, 3])


def test_vanishing_ranks_cannot_be_aligned():
    # H = a x^3 + eps y^2: local homology of the inflection is zero in
    # every degree; a from the identity gate, eps small enough that the
    # cubic gradient clears the grid floor set by the y-curvature
    a, eps = 0.25, 0.01

    def value(t, z):
        return a * z[:, 0] ** 3 + eps * z[:, 1] ** 2

    def grad(t, z):
        return np.stack([3.0 * a * z[:, 0] ** 2, 2.0 * eps * z[:, 1]], axis=1)

    def hess(t, z):
        out = np.zeros((len(z), 2, 2))
        out[:, 0, 0] = 6.0 * a * z[:, 0]
        out[:, 1, 1] = 2.0 * eps
        return out

    germ = HamiltonianGerm(n=1, value=value, grad=grad, hess=hess, name="inflection")
    with pytest.raises(ShiftAmbiguous):
        verify_persistence(germ, record_of(germ), [1, 2])


def test_csv_rows_have_header_and_shifts():
    germ = linear_rotation(0.3183)
    rows = verify_persistence(germ, record_of(germ), [1, 2]).csv_rows()
    assert rows[0] == ["k", "admissible", "good", "support", "s_k", "even"]
    assert rows[1][4] == "0"


# --- degenerate-maximum detection


def test_degenerate_maximum_is_detected():
    germ = quartic(-1)
    result = detect_sdm(germ, record_of(germ))
    assert result["is_sdm"]
    assert result["evidence"]["strongly_degenerate"]
    assert result["evidence"]["crosscheck"]["consistent"]


def test_small_nondegenerate_maximum_is_not_detected():
    germ = linear_rotation(0.05)
    result = detect_sdm(germ, record_of(germ))
    assert not result["is_sdm"]
    assert result["evidence"]["delta"] > 1e-3


def test_degenerate_minimum_is_not_detected():
    germ = quartic(+1)
    result = detect_sdm(germ, record_of(germ))
    assert not result["is_sdm"]
    assert result["evidence"]["hf_n_rank"] == 0


# --- totals and the index oracle


def test_total_rank_constant_for_degenerate_maximum():
    germ = quartic(-1)
    totals = total_ranks(germ, record_of(germ), range(1, 4))
    assert totals == {1: 1, 2: 1, 3: 1}


def test_total_ranks_skips_resonant_orders():
    germ = linear_rotation(1.0 / 3.0)
    totals = total_ranks(germ, record_of(germ), range(1, 5))
    assert sorted(totals) == [1, 2, 4]


def test_fixed_point_index_oracle():
    quartic_max = quartic(-1)
    rotation = linear_rotation(0.05)
    assert fixed_point_index(quartic_max) == 1
    assert fixed_point_index(rotation) == 1
    assert fixed_point_index(hyperbolic(2.0)) == -1


def test_euler_characteristic_is_signed_index():
    # chi(HF) = (-1)^n deg(phi - id) for plane germs
    for germ in (quartic(-1), linear_rotation(0.05), hyperbolic(2.0)):
        rec = record_of(germ)
        lf = local_floer(germ, rec)
        assert lf.ranks.euler() == (-1) ** germ.n * fixed_point_index(germ)
