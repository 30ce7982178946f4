"""Explicit time integration of mean curvature flow with adaptive step control.

Each node of a profile curve moves by dt * H along the inward normal; graph
patches evolve by the quasilinear graph equation with frozen Dirichlet
boundary values.  The integrator detects the approach to the first singular
time via curvature blow-up and records a snapshot cascade accumulating there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InconclusiveRunError, NeckPinchError, NumericalBlowupError
from .geometry import (CLOSED, FlowSnapshot, GraphPatch, ProfileCurve,
                       graph_gradients, resample_arclength)

STOP_CURVATURE = "curvature-threshold"
STOP_EXTINCTION = "extinction"
STOP_T_END = "t-end"
STOP_UNDERFLOW = "step-underflow"

# snapshot cascade: record whenever max|A|^2 first crosses the next rung of a
# geometric ladder with this factor (type-I blow-up then makes T - t shrink
# geometrically between recorded snapshots)
CASCADE_FACTOR = np.sqrt(2.0)
MAX_CASCADE_SNAPSHOTS = 240


@dataclass
class StepControl:
    """Adaptive step-size and stopping parameters."""

    cfl: float = 0.8
    dt_min: float = 1e-13
    A2_stop: float = 1e4
    t_end: Optional[float] = None
    refine: bool = True
    refine_target: float = 0.15  # keep mean spacing <= refine_target / sqrt(max|A|^2)
    max_nodes: int = 20000
    resample_ratio: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("cfl must lie in (0, 1)")
        if self.dt_min <= 0.0:
            raise ValueError("dt_min must be positive")


@dataclass
class SingularEstimate:
    z: float
    rho: float
    T: float


@dataclass
class Trajectory:
    """Time-ordered snapshots plus singularity metadata."""

    snapshots: list
    stop_reason: str
    singular_estimate: Optional[SingularEstimate]
    scenario_meta: dict = field(default_factory=dict)
    step_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    step_maxA2: np.ndarray = field(default_factory=lambda: np.empty(0))
    underflow: bool = False

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def nearest_snapshot(self, t: float) -> FlowSnapshot:
        return self.snapshots[int(np.argmin(np.abs(self.times - t)))]


def adaptive_dt(state: FlowSnapshot, ctl: StepControl):
    """Stable explicit step: dt = cfl * min(h^2/(2n), 1/(2 max|A|^2)).

    h is the minimum node spacing.  Returns (dt, underflow_flag); when the
    bound falls below dt_min the floor is returned with the flag set.
    """
    curv = state.curvature
    maxA2 = float(np.max(curv.A2[curv.interior])) if np.any(curv.interior) else float(np.max(curv.A2))
    if isinstance(state.surface, ProfileCurve):
        h = float(state.surface.spacings().min())
        n = state.surface.n
    else:
        h = state.surface.h
        n = state.surface.n
    bound = min(h * h / (2.0 * n), np.inf if maxA2 == 0.0 else 1.0 / (2.0 * maxA2))
    dt = ctl.cfl * bound
    if dt < ctl.dt_min:
        return ctl.dt_min, True
    return dt, False


def step_axisymmetric(state: FlowSnapshot, dt: float) -> FlowSnapshot:
    """One explicit Euler step of dF/dt = H * nu for a profile curve."""
    curve = state.surface
    if curve.n < 2:
        raise ValueError("axisymmetric flow requires ambient dimension n >= 2")
    curv = state.curvature
    disp = dt * curv.H
    z = curve.z + disp * curv.normal[:, 0]
    r = curve.r + disp * curv.normal[:, 1]
    if curve.topology == CLOSED:
        # poles stay on the axis and move along it
        r[0] = 0.0
        r[-1] = 0.0
        if np.any(r[1:-1] <= 0.0):
            raise NeckPinchError("r <= 0 at an interior node after the step")
    else:
        if np.any(r <= 0.0):
            raise NeckPinchError("r <= 0 after the step")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(r))):
        raise NumericalBlowupError("NaN/overflow in step_axisymmetric")
    new = ProfileCurve(z, r, curve.n, curve.topology, curve.period)
    return FlowSnapshot(new, state.t + dt)


def step_graph(state: FlowSnapshot, dt: float) -> FlowSnapshot:
    """One explicit Euler step of the graph equation; boundary values frozen."""
    patch = state.surface
    grads, seconds = graph_gradients(patch)
    if patch.n == 1:
        up = grads[0]
        upp = seconds[0][0]
        rhs = upp / (1.0 + up**2)
    else:
        ux, uy = grads
        (uxx, uxy), (_, uyy) = seconds
        W2 = 1.0 + ux**2 + uy**2
        rhs = ((1.0 + uy**2) * uxx - 2.0 * ux * uy * uxy + (1.0 + ux**2) * uyy) / W2
    u = patch.u + dt * rhs
    # frozen Dirichlet boundary
    if patch.n == 1:
        u[0], u[-1] = patch.u[0], patch.u[-1]
    else:
        u[0, :], u[-1, :] = patch.u[0, :], patch.u[-1, :]
        u[:, 0], u[:, -1] = patch.u[:, 0], patch.u[:, -1]
    if not np.all(np.isfinite(u)):
        raise NumericalBlowupError("NaN/overflow in step_graph")
    return FlowSnapshot(GraphPatch(u, patch.h, patch.x0, patch.orientation), state.t + dt)


def _maybe_resample(snap: FlowSnapshot, ctl: StepControl) -> FlowSnapshot:
    curve = snap.surface
    if not isinstance(curve, ProfileCurve):
        return snap
    curv = snap.curvature
    maxA2 = float(np.max(curv.A2))
    num = None
    if ctl.refine and maxA2 > 0.0:
        target = ctl.refine_target / np.sqrt(maxA2)
        if curve.mean_spacing > 1.25 * target:
            total = curve.arclength[-1] + (curve.spacings()[-1] if curve.topology != CLOSED else 0.0)
            num = min(int(np.ceil(total / target)) + 1, ctl.max_nodes)
            num = max(num, curve.num_nodes)
    if num is None and curve.spacing_ratio() <= ctl.resample_ratio:
        return snap
    return FlowSnapshot(resample_arclength(curve, num=num), snap.t)


def _is_extinct(snap: FlowSnapshot) -> bool:
    curve = snap.surface
    if not isinstance(curve, ProfileCurve):
        return False
    return float(curve.r.max()) < 3.0 * curve.mean_spacing


def _fit_singular_time(times, maxA2) -> Optional[float]:
    """Least-squares affine fit of 1/max|A|^2 vs t over the final decade; root is T."""
    times = np.asarray(times)
    maxA2 = np.asarray(maxA2)
    if times.size < 8 or maxA2[-1] <= 0:
        return None
    mask = maxA2 >= maxA2[-1] / 10.0
    if mask.sum() < 4:
        mask = np.zeros_like(mask)
        mask[-4:] = True
    tt = times[mask]
    yy = 1.0 / maxA2[mask]
    A = np.column_stack((np.ones_like(tt), tt))
    (alpha, beta), *_ = np.linalg.lstsq(A, yy, rcond=None)
    if beta >= 0.0:
        return None
    return float(-alpha / beta)


def _axi_fields(z, r, n, closed, period):
    """Fused curvature/normal/spacing evaluation on raw profile arrays.

    Returns (H, nu_z, nu_r, maxA2, ds).  ds includes the wrap segment for
    periodic profiles.
    """
    if closed:
        zp = np.concatenate(([z[1]], z, [z[-2]]))
        rp = np.concatenate(([-r[1]], r, [-r[-2]]))
    else:
        zp = np.concatenate(([z[-1] - period], z, [z[0] + period]))
        rp = np.concatenate(([r[-1]], r, [r[0]]))
    dz = np.diff(zp)
    dr = np.diff(rp)
    seg = np.hypot(dz, dr)
    hm = seg[:-1]
    hp = seg[1:]
    denom = hm * hp * (hm + hp)
    hm2 = hm * hm
    hp2 = hp * hp
    z_s = (hm2 * zp[2:] + (hp2 - hm2) * zp[1:-1] - hp2 * zp[:-2]) / denom
    r_s = (hm2 * rp[2:] + (hp2 - hm2) * rp[1:-1] - hp2 * rp[:-2]) / denom
    z_ss = 2.0 * (hm * zp[2:] - (hm + hp) * zp[1:-1] + hp * zp[:-2]) / denom
    r_ss = 2.0 * (hm * rp[2:] - (hm + hp) * rp[1:-1] + hp * rp[:-2]) / denom
    w2 = z_s * z_s + r_s * r_s
    w = np.sqrt(w2)
    lam_axial = (z_ss * r_s - r_ss * z_s) / (w2 * w)
    lam_rot = np.empty_like(lam_axial)
    if closed:
        np.divide(z_s[1:-1], r[1:-1] * w[1:-1], out=lam_rot[1:-1])
        lam_rot[0] = lam_axial[0]
        lam_rot[-1] = lam_axial[-1]
        ds = seg[1:-1]
    else:
        np.divide(z_s, r * w, out=lam_rot)
        ds = seg[1:]
    H = lam_axial + (n - 1) * lam_rot
    A2 = lam_axial * lam_axial + (n - 1) * lam_rot * lam_rot
    return H, r_s / w, -z_s / w, float(A2.max()), ds


def run_until(initial: FlowSnapshot, ctl: StepControl,
              record_times: Sequence[float] = ()) -> Trajectory:
    """Integrate until a stop criterion fires.

    Snapshots are recorded at the requested times plus a geometric curvature
    cascade so that blow-up sequences have material to rescale.
    """
    if isinstance(initial.surface, ProfileCurve):
        return _run_profile(initial, ctl, record_times)
    return _run_graph(initial, ctl, record_times)


def _run_profile(initial: FlowSnapshot, ctl: StepControl,
                 record_times: Sequence[float]) -> Trajectory:
    curve0 = initial.surface
    if curve0.n < 2:
        raise ValueError("axisymmetric flow requires ambient dimension n >= 2")
    state = _maybe_resample(initial, ctl)
    curve = state.surface
    z, r = curve.z.copy(), curve.r.copy()
    n, closed, period = curve.n, curve.topology == CLOSED, curve.period
    topology = curve.topology
    t = state.t
    schedule = sorted(tt for tt in record_times if tt > t)

    def make_snapshot():
        return FlowSnapshot(ProfileCurve(z.copy(), r.copy(), n, topology, period), t)

    snapshots = [state]
    hist_t, hist_A2 = [], []
    stop_reason = None
    underflow = False
    cascade_level = None
    cascade_count = 0
    last_recorded_t = t

    while True:
        H, nu_z, nu_r, maxA2, ds = _axi_fields(z, r, n, closed, period)
        hist_t.append(t)
        hist_A2.append(maxA2)
        if cascade_level is None:
            cascade_level = max(maxA2, 1e-12) * CASCADE_FACTOR

        if maxA2 >= ctl.A2_stop:
            stop_reason = STOP_CURVATURE
            break
        if ctl.t_end is not None and t >= ctl.t_end - 1e-15:
            stop_reason = STOP_T_END
            break
        mean_ds = ds.mean()
        if r.max() < 3.0 * mean_ds:
            stop_reason = STOP_EXTINCTION
            break

        dt = ctl.cfl * min(ds.min() ** 2 / (2.0 * n),
                           np.inf if maxA2 == 0.0 else 1.0 / (2.0 * maxA2))
        if dt < ctl.dt_min:
            underflow = True
            stop_reason = STOP_UNDERFLOW
            break
        hit_schedule = False
        if ctl.t_end is not None and t + dt > ctl.t_end:
            dt = ctl.t_end - t
        if schedule and t + dt >= schedule[0] - 1e-15:
            dt = schedule[0] - t
            hit_schedule = True

        ok = False
        while True:
            disp = dt * H
            z_new = z + disp * nu_z
            r_new = r + disp * nu_r
            if closed:
                r_new[0] = 0.0
                r_new[-1] = 0.0
                pinched = bool(np.any(r_new[1:-1] <= 0.0))
            else:
                pinched = bool(np.any(r_new <= 0.0))
            if not pinched:
                ok = True
                break
            dt *= 0.5
            hit_schedule = False
            if dt <= ctl.dt_min:
                break
        if not ok:
            underflow = True
            stop_reason = STOP_UNDERFLOW
            break
        if not (np.all(np.isfinite(z_new)) and np.all(np.isfinite(r_new))):
            raise NumericalBlowupError("NaN/overflow during integration")
        z, r = z_new, r_new
        t += dt

        # resample / refine on the spacing contract and the curvature-resolution target
        num = None
        if ctl.refine and maxA2 > 0.0:
            target = ctl.refine_target / np.sqrt(maxA2)
            if mean_ds > 1.25 * target:
                total = ds.sum()
                num = min(int(np.ceil(total / target)) + 1, ctl.max_nodes)
                num = max(num, z.size)
        if num is not None or ds.max() > ctl.resample_ratio * ds.min():
            fresh = resample_arclength(ProfileCurve(z, r, n, topology, period), num=num)
            z, r = fresh.z, fresh.r

        record = False
        if hit_schedule:
            schedule.pop(0)
            record = True
        if maxA2 >= cascade_level and cascade_count < MAX_CASCADE_SNAPSHOTS:
            while cascade_level <= maxA2:
                cascade_level *= CASCADE_FACTOR
            record = True
            cascade_count += 1
        if record:
            snapshots.append(make_snapshot())
            last_recorded_t = t

    if last_recorded_t != t or len(snapshots) == 1:
        snapshots.append(make_snapshot())

    est = None
    T = _fit_singular_time(hist_t, hist_A2)
    if T is not None:
        final = snapshots[-1]
        curv = final.curvature
        i = int(np.argmax(curv.A2))
        # axisymmetric first singular points lie on the axis
        est = SingularEstimate(z=float(final.surface.z[i]), rho=0.0, T=T)

    traj = Trajectory(snapshots=snapshots, stop_reason=stop_reason,
                      singular_estimate=est,
                      step_times=np.array(hist_t), step_maxA2=np.array(hist_A2),
                      underflow=underflow)
    if stop_reason == STOP_UNDERFLOW and est is None:
        raise InconclusiveRunError(
            "time step underflowed before any singularity indicator", trajectory=traj)
    return traj


def _run_graph(initial: FlowSnapshot, ctl: StepControl,
               record_times: Sequence[float]) -> Trajectory:
    state = initial
    schedule = sorted(t for t in record_times if t > state.t)
    snapshots = [state]
    hist_t, hist_A2 = [], []
    stop_reason = None
    underflow = False

    while True:
        curv = state.curvature
        interior = curv.interior
        maxA2 = float(np.max(curv.A2[interior])) if np.any(interior) else float(np.max(curv.A2))
        hist_t.append(state.t)
        hist_A2.append(maxA2)

        if maxA2 >= ctl.A2_stop:
            stop_reason = STOP_CURVATURE
            break
        if ctl.t_end is not None and state.t >= ctl.t_end - 1e-15:
            stop_reason = STOP_T_END
            break
        dt, under = adaptive_dt(state, ctl)
        if under:
            underflow = True
            stop_reason = STOP_UNDERFLOW
            break
        hit_schedule = False
        if ctl.t_end is not None and state.t + dt > ctl.t_end:
            dt = ctl.t_end - state.t
        if schedule and state.t + dt >= schedule[0] - 1e-15:
            dt = schedule[0] - state.t
            hit_schedule = True
        state = step_graph(state, dt)
        if hit_schedule:
            schedule.pop(0)
            snapshots.append(state)

    if snapshots[-1] is not state:
        snapshots.append(state)

    est = None
    T = _fit_singular_time(hist_t, hist_A2)
    if T is not None:
        est = SingularEstimate(z=np.nan, rho=np.nan, T=T)

    traj = Trajectory(snapshots=snapshots, stop_reason=stop_reason,
                      singular_estimate=est,
                      step_times=np.array(hist_t), step_maxA2=np.array(hist_A2),
                      underflow=underflow)
    if stop_reason == STOP_UNDERFLOW and est is None:
        raise InconclusiveRunError(
            "time step underflowed before any singularity indicator", trajectory=traj)
    return traj


def verify_mean_convexity(traj: Trajectory, tol_factor: float = 10.0) -> dict:
    """Check that min H stays positive along a mean-convex run.

    Returns the min-H time series; ``scheme_failure`` is set if some snapshot
    dips below -tol_factor * h^2 (a discretization failure, not a violation of
    the continuum statement).
    """
    first = traj.snapshots[0]
    curv0 = first.curvature
    interior0 = curv0.interior
    if float(np.min(curv0.H[interior0])) < 0.0:
        raise ValueError("initial data is not mean-convex (min H < 0 at t = 0)")
    times, min_H = [], []
    scheme_failure = False
    for snap in traj.snapshots:
        c = snap.curvature
        m = float(np.min(c.H[c.interior])) if np.any(c.interior) else float(np.min(c.H))
        times.append(snap.t)
        min_H.append(m)
        if isinstance(snap.surface, ProfileCurve):
            h = snap.surface.mean_spacing
        else:
            h = snap.surface.h
        if snap.t > first.t and m < -tol_factor * h * h:
            scheme_failure = True
    positive = all(m > 0.0 for m, t in zip(min_H[1:], times[1:]))
    return {"t": times, "min_H": min_H, "all_positive": positive,
            "scheme_failure": scheme_failure}
