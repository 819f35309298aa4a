"""Generating functions of close-to-identity maps and their properties."""
import numpy as np
import pytest

from localfloer.corpus import linear_rotation, morse_triple, quartic, shear
from localfloer.errors import NotC1Small, NotInvertibleOnBox
from localfloer.fields import Box, SampledField
from localfloer.genfun import (
    OdeGermMap,
    SplineGermMap,
    conjugated_map,
    generating_function,
    gf_property_report,
    homotopy_isolation_scan,
    psi,
    reconstruction_residual,
    scaling_conjugation,
)

BOX2 = Box(center=(0.0, 0.0), radius=0.1)


def test_shear_generating_function_is_half_y_squared():
    phi = OdeGermMap(shear())
    box = Box(center=(0.0, 0.0), radius=0.5)
    gf = generating_function(phi, 1, box, 65, c1_gate=1.5)
    nodes = box.nodes(65)
    expected = 0.5 * nodes[:, 1] ** 2
    assert np.max(np.abs(gf.field.values.ravel() - expected)) < 1e-6


def test_shear_fails_default_c1_gate():
    # the Jacobian sits at distance 1 from the identity at every scale
    phi = OdeGermMap(shear())
    with pytest.raises(NotC1Small):
        generating_function(phi, 1, Box(center=(0.0, 0.0), radius=0.5), 33)


def test_closedness_defect_shrinks_under_refinement():
    phi = OdeGermMap(quartic(-1))
    coarse = generating_function(phi, 1, BOX2, 17)
    fine = generating_function(phi, 1, BOX2, 65)
    assert fine.closedness_defect <= coarse.closedness_defect + 1e-15
    assert fine.closedness_defect < 1e-8


def test_quarter_rotation_has_no_vertical_complement():
    # xx block of the Jacobian is cos(pi/2) = 0 at every radius
    phi = OdeGermMap(linear_rotation(0.25))
    with pytest.raises(NotInvertibleOnBox):
        psi(phi, 1, probe_box=BOX2)


def test_psi_inversion_roundtrip():
    phi = OdeGermMap(quartic(-1))
    pm = psi(phi, 2, probe_box=BOX2)
    rng = np.random.default_rng(7)
    z = 0.05 * rng.standard_normal((40, 2))
    w = pm(z)
    back = pm.invert(w)
    assert np.max(np.abs(back - z)) < 1e-10


def test_reconstruction_residual_of_exact_quadratic():
    phi = OdeGermMap(shear())
    box = Box(center=(0.0, 0.0), radius=0.5)
    gf = generating_function(phi, 1, box, 65, c1_gate=1.5)
    rng = np.random.default_rng(3)
    probe = 0.3 * rng.standard_normal((30, 2))
    assert reconstruction_residual(phi, 1, gf, probe) < 1e-6


def test_critical_points_match_fixed_points_for_three_well():
    phi = OdeGermMap(morse_triple())
    box = Box(center=(0.0, 0.0), radius=1.2)
    gf = generating_function(phi, 1, box, 65, c1_gate=0.5)
    report = gf_property_report(phi, gf)
    assert report["matched"]
    assert len(report["critical_points"]) >= 3
    assert report["ratio_bounded"]


def test_rotation_has_single_matched_critical_point():
    phi = OdeGermMap(linear_rotation(0.02))
    gf = generating_function(phi, 1, BOX2, 33)
    report = gf_property_report(phi, gf)
    assert report["matched"]
    assert report["hausdorff"] <= report["grid_tol"]


def test_homotopy_scan_passes_for_degenerate_maximum():
    phi = OdeGermMap(quartic(-1))
    gf1 = generating_function(phi, 1, BOX2, 33)
    gf2 = generating_function(phi, 2, BOX2, 33)
    scan = homotopy_isolation_scan(gf1.field, gf2.field, 2)
    assert scan.passed
    assert scan.margin > 3.0


def test_homotopy_scan_rejects_flat_field():
    zeros = SampledField(box=BOX2, values=np.zeros((17, 17)))
    scan = homotopy_isolation_scan(zeros, zeros, 2)
    assert not scan.passed


def test_spline_map_agrees_with_integrated_flow():
    germ = quartic(-1)
    spline = SplineGermMap(germ, BOX2, resolution=97, k=3)
    ode = OdeGermMap(germ, k=3)
    rng = np.random.default_rng(11)
    z = 0.05 * rng.standard_normal((50, 2))
    assert np.max(np.abs(spline(z) - ode(z))) < 1e-7


def test_conjugated_map_is_coordinate_change():
    phi = OdeGermMap(quartic(-1))
    s = scaling_conjugation(1, 0.5)
    conj = conjugated_map(phi, s)
    rng = np.random.default_rng(5)
    z = 0.05 * rng.standard_normal((20, 2))
    expected = (np.linalg.inv(s) @ phi(z @ s.T).T).T
    assert np.max(np.abs(conj(z) - expected)) < 1e-10
