"""Parabolic dilation, normalized blow-up sequences, and model fits."""

import numpy as np
import pytest

from mcfprof.errors import InsufficientDataError
from mcfprof.geometry import FlowSnapshot
from mcfprof.models import SPHERE, ModelSolution, model_snapshot, shrinker_radius
from mcfprof.rescale import (BlowupSequence, DilationParams, blowup_convergence_metric,
                             classify_tangent_flow, dilation_covariance_error,
                             fit_model, normalized_blowup, parabolic_dilate,
                             select_blowup_points, waist_node)
from mcfprof.shapes import cylinder_profile, dumbbell_profile, sphere_profile


def test_identity_dilation():
    snap = FlowSnapshot(sphere_profile(1.0, 2, 100), 0.3)
    out = parabolic_dilate(snap, DilationParams(1.0, 0.0, 0.0, 0.0))
    assert np.array_equal(out.surface.z, snap.surface.z)
    assert np.array_equal(out.surface.r, snap.surface.r)
    assert out.t == 0.3


def test_dilation_scales_sphere_and_curvature():
    snap = FlowSnapshot(sphere_profile(0.5, 2, 200), 0.7)
    out = parabolic_dilate(snap, DilationParams(2.0, 0.0, 0.0, 0.7))
    R = np.hypot(out.surface.z, out.surface.r)
    assert np.abs(R - 1.0).max() < 1e-12
    assert out.t == 0.0
    assert np.abs(out.curvature.H - 2.0).max() < 2e-3  # 4 -> 2


def test_dilation_composition():
    snap = FlowSnapshot(dumbbell_profile(1.0, 0.35, 8.0, 2, 200), 0.1)
    d_a = DilationParams(3.0, 0.2, 0.0, 0.1)
    d_b = DilationParams(5.0, 0.0, 0.0, 0.0)  # about the image of the center
    two = parabolic_dilate(parabolic_dilate(snap, d_a), d_b)
    one = parabolic_dilate(snap, DilationParams(15.0, 0.2, 0.0, 0.1))
    scale = np.abs(one.surface.z).max()
    assert np.abs(two.surface.z - one.surface.z).max() / scale < 1e-12
    assert np.abs(two.surface.r - one.surface.r).max() / scale < 1e-12
    assert abs(two.t - one.t) <= 1e-12 * max(1.0, abs(one.t))


def test_curvature_covariance():
    for surf in (sphere_profile(1.0, 2, 300), cylinder_profile(0.7, np.pi, 2, 300),
                 dumbbell_profile(1.0, 0.35, 8.0, 2, 300)):
        snap = FlowSnapshot(surf, 0.0)
        err = dilation_covariance_error(snap, DilationParams(7.3, 0.11, 0.0, 0.0))
        assert err < 1e-10


def test_fixed_point_of_shrinking_sphere():
    # rescaled about the extinction spacetime point: R~(s) = sqrt(-2 n s)
    model = ModelSolution(kind=SPHERE, n=2, R0=1.0)
    T = model.extinction_time
    for t in (0.1, 0.2, 0.24):
        snap = model_snapshot(model, t, nodes=200)
        a = 3.0
        out = parabolic_dilate(snap, DilationParams(a, 0.0, 0.0, T))
        s = out.t
        assert s < 0.0
        R = np.hypot(out.surface.z, out.surface.r)
        assert np.abs(R - np.sqrt(-4.0 * s)).max() < 1e-12


def test_fit_exact_cylinder():
    snap = FlowSnapshot(cylinder_profile(0.7, np.pi, 2, 200), 0.0)
    params, rms = fit_model(snap, "cylinder")
    assert abs(params["R"] - 0.7) < 1e-12
    assert rms < 1e-12


def test_fit_sphere_discriminates():
    snap = FlowSnapshot(sphere_profile(1.0, 2, 200), 0.0)
    params, rms = fit_model(snap, "sphere")
    assert abs(params["R"] - 1.0) < 1e-10 and abs(params["zc"]) < 1e-10
    assert rms < 1e-10
    _, rms_cyl = fit_model(snap, "cylinder")
    assert rms_cyl >= 0.1


def test_fit_plane_line():
    snap = FlowSnapshot(cylinder_profile(0.7, np.pi, 2, 200), 0.0)
    params, rms = fit_model(snap, "plane")
    assert rms < 1e-12
    assert abs(abs(params["normal"][1]) - 1.0) < 1e-12


def _sphere_trajectory(ctl_stop=2.0 / 0.05**2):
    from mcfprof.flow import StepControl, run_until
    return run_until(FlowSnapshot(sphere_profile(1.0, 2, 300), 0.0),
                     StepControl(A2_stop=ctl_stop))


def test_normalized_blowup_sphere_is_unit_H_sphere():
    traj = _sphere_trajectory()
    # pole points (on the axis) of the last few snapshots
    points = [(float(s.surface.z[0]), 0.0, s.t) for s in traj.snapshots[-4:]]
    seq = normalized_blowup(traj, points)
    assert seq.normalized and seq.scales_increasing
    for term in seq.terms:
        assert abs(term.H_origin - 1.0) <= 5.0 * term.center.surface.mean_spacing
        # unit-H sphere has radius n = 2
        fit, rms = fit_model(term.center, "sphere")
        assert abs(fit["R"] - 2.0) < 0.02
        assert rms / fit["R"] < 0.01


def test_normalized_blowup_decreasing_scales_flagged():
    traj = _sphere_trajectory()
    points = [(float(s.surface.z[0]), 0.0, s.t) for s in traj.snapshots[-4:]]
    seq = normalized_blowup(traj, points[::-1])  # decreasing curvature order
    assert not seq.scales_increasing  # accepted but flagged


def test_blowup_convergence_sphere_floor():
    traj = _sphere_trajectory()
    points = [(float(s.surface.z[0]), 0.0, s.t) for s in traj.snapshots[-5:]]
    seq = normalized_blowup(traj, points)
    conv = blowup_convergence_metric(seq, window_radius=2.0)
    h = seq.terms[-1].center.surface.mean_spacing
    # all terms are the same unit-H sphere up to discretization
    assert max(conv["hausdorff"]) < 20.0 * h
    assert max(conv["normal_angle"]) < 0.2


def test_blowup_convergence_needs_three_terms():
    traj = _sphere_trajectory()
    points = [(float(traj.snapshots[-1].surface.z[0]), 0.0, traj.snapshots[-1].t)]
    seq = normalized_blowup(traj, points)
    with pytest.raises(InsufficientDataError):
        blowup_convergence_metric(seq, 2.0)


def test_neck_blowup_classifies_cylinder(dumbbell_run):
    traj = dumbbell_run["traj"]
    points = select_blowup_points(traj, "neck", 4)
    seq = normalized_blowup(traj, points)
    fits = classify_tangent_flow(seq.terms[-1])
    assert fits["best"] == "cylinder"
    assert fits["cylinder"]["rms_over_R"] < 0.05
    assert fits["sphere"]["rms"] > 0.2  # > 20% of the ~unit fitted radius


def test_waist_node_finds_neck():
    db = FlowSnapshot(dumbbell_profile(1.0, 0.35, 8.0, 2, 400), 0.0)
    j = waist_node(db, 0.0)
    # the flat waist segment has its strict minima at its shoulders (~|z| = 0.5)
    assert abs(db.surface.r[j] - 0.35) < 0.01
    assert abs(db.surface.z[j]) < 0.8
