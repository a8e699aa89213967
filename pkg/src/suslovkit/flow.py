"""Time integration and flow-map machinery: dense scalar integration,
a vectorized batch integrator for Monte Carlo work, variational equations
for flow-map Jacobians, attitude reconstruction, attractor detection, and
measure transport checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import DOP853, OdeSolution, simpson

from .core import SuslovParams, divergence_analytic, energy, matrices, vector_field
from .equilibria import equilibrium_directions, scale_to_ellipsoid
from .fields import Array, DensitySpec, VectorFieldSpec


class IntegrationError(RuntimeError):
    """Raised when the integrator cannot continue (step-size underflow)."""

    def __init__(self, message: str, t_last: float | None = None):
        super().__init__(message)
        self.t_last = t_last


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution curve with integrator diagnostics.

    times are strictly increasing (backward runs are stored reversed), and
    dense interpolation covers the full integration span when present.
    """

    times: Array
    states: Array
    energy_drift: Optional[float]
    integrator_stats: dict
    dense: Optional[OdeSolution] = None

    def __post_init__(self) -> None:
        if not np.all(np.diff(self.times) > 0.0):
            raise ValueError("trajectory times must be strictly increasing")
        if not np.isfinite(self.states).all():
            raise ValueError("trajectory states must be finite")


@dataclass(frozen=True)
class AttitudeTrajectory:
    """Reconstructed carrier attitude (unit quaternions, scalar first) and
    rotor angle along a trajectory."""

    times: Array
    rotations: Array
    theta: Array
    theta_dot: Array


@dataclass(frozen=True)
class TransportReport:
    """Monte Carlo comparison of mu(A) and mu(phi_t(A)) for one box A."""

    box: Array
    t: float
    mu_A: float
    mu_phi_t_A: float
    relative_error: float
    sample_count: dict
    standard_error_estimate: float
    se_mu_A: float
    se_transport: float
    seed: int

    @property
    def within_3se(self) -> bool:
        return abs(self.mu_phi_t_A - self.mu_A) <= 3.0 * self.standard_error_estimate

    def to_dict(self) -> dict:
        return {
            "box": [[float(a), float(b)] for a, b in self.box],
            "t": self.t,
            "mu_A": self.mu_A,
            "mu_phi_t_A": self.mu_phi_t_A,
            "relative_error": self.relative_error,
            "sample_count": dict(self.sample_count),
            "standard_error_estimate": self.standard_error_estimate,
            "se_mu_A": self.se_mu_A,
            "se_transport": self.se_transport,
            "seed": self.seed,
            "within_3se": self.within_3se,
        }


def integrate(
    field: VectorFieldSpec,
    x0: Array,
    T: float,
    tol: float = 1e-10,
    atol: float = 1e-12,
    record_times: Optional[Sequence[float]] = None,
    energy_fn: Optional[Callable[[Array], Array]] = None,
    project: Optional[Callable[[Array], Array]] = None,
) -> Trajectory:
    """Integrate the field from x0 over [0, T] (T may be negative).

    Adaptive high-order Runge-Kutta stepping with dense output; samples are
    the accepted step points unless record_times supplies an explicit grid.
    An optional project hook is applied to the state after every accepted
    step (used for energy re-projection on long portrait runs); projection
    is a flagged correction, never silent default behavior.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (field.dim,):
        raise ValueError(f"x0 must have shape ({field.dim},)")
    if T == 0.0:
        raise ValueError("integration horizon T must be nonzero")

    ncalls = 0

    def rhs(t: float, y: Array) -> Array:
        nonlocal ncalls
        ncalls += 1
        return field.eval(y)

    solver = DOP853(rhs, 0.0, x0, T, rtol=tol, atol=atol)
    ts = [0.0]
    states = [x0.copy()]
    interps = []
    n_extra = 0
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(
                f"integration failed at t = {solver.t:.6g}: {msg}", t_last=solver.t
            )
        interps.append(solver.dense_output())
        if project is not None:
            solver.y = np.asarray(project(solver.y), dtype=float)
            solver.f = rhs(solver.t, solver.y)
            n_extra += 1
        ts.append(solver.t)
        states.append(solver.y.copy())

    n_acc = len(interps)
    # call budget: 2 startup evals, 12 per attempted step, 3 per dense output
    attempts = max(n_acc, round((ncalls - 2 - 3 * n_acc - n_extra) / 12))
    stats = {"n_accepted": n_acc, "n_rejected": int(attempts - n_acc), "nfev": ncalls}
    dense = OdeSolution(ts, interps)

    if record_times is not None:
        grid = np.asarray(record_times, dtype=float)
        lo, hi = min(0.0, T), max(0.0, T)
        if grid.size and (grid.min() < lo - 1e-12 or grid.max() > hi + 1e-12):
            raise ValueError("record_times must lie within the integration span")
        t_out = np.unique(np.concatenate([[0.0, T], grid]))
        x_out = dense(t_out).T
    else:
        t_out = np.array(ts)
        x_out = np.array(states)
        if T < 0.0:
            t_out = t_out[::-1].copy()
            x_out = x_out[::-1].copy()

    drift = None
    if energy_fn is not None:
        e0 = float(energy_fn(x0))
        e = np.asarray(energy_fn(x_out), dtype=float)
        drift = float(np.max(np.abs(e - e0)) / max(abs(e0), np.finfo(float).tiny))
    return Trajectory(
        times=t_out, states=x_out, energy_drift=drift,
        integrator_stats=stats, dense=dense,
    )


def simulate(
    params: SuslovParams,
    omega0: Array,
    T: float,
    tol: float = 1e-10,
    atol: float = 1e-12,
    record_times: Optional[Sequence[float]] = None,
    project_energy: bool = False,
) -> Trajectory:
    """Integrate the reduced system with energy-drift diagnostics attached."""
    field = vector_field(params)
    e_fn = lambda w: energy(params, w)
    project = None
    if project_energy:
        eta0 = float(energy(params, np.asarray(omega0, dtype=float)))

        def project(w: Array) -> Array:
            return w * np.sqrt(eta0 / float(energy(params, w)))

    return integrate(
        field, omega0, T, tol=tol, atol=atol, record_times=record_times,
        energy_fn=e_fn, project=project,
    )


# Dormand-Prince 5(4) tableau for the vectorized batch integrator.
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


def integrate_batch(
    field: VectorFieldSpec,
    x0: Array,
    T: float,
    tol: float = 1e-8,
    atol: float = 1e-10,
    record_times: Sequence[float] = (),
    max_steps: int = 1_000_000,
) -> tuple[Array, list[tuple[float, Array]]]:
    """Integrate a batch of initial states with one shared adaptive step.

    Embedded 5(4) pair; the error norm is the worst per-sample RMS, so the
    step honors the tolerance for every member of the batch. record_times
    are hit exactly by clamping the step. Returns the endpoint states and
    the recorded (time, states) snapshots.
    """
    Y = np.array(x0, dtype=float)
    if Y.ndim == 1:
        Y = Y[None, :]
    if T == 0.0:
        return Y.copy(), []
    s = 1.0 if T > 0.0 else -1.0
    rec = np.asarray(sorted(record_times, key=lambda r: s * r), dtype=float)
    if rec.size and (np.min(s * rec) <= 0.0 or np.max(s * rec) > s * T + 1e-12):
        raise ValueError("record_times must lie in (0, T]")

    t = 0.0
    h = s * abs(T) * 1e-3
    k1 = field.eval(Y)
    recorded: list[tuple[float, Array]] = []
    i_rec = 0
    tiny = 1e-14 * abs(T)
    for _ in range(max_steps):
        if s * (T - t) <= tiny:
            break
        if abs(h) < 1e-15 * max(1.0, abs(T)):
            raise IntegrationError(f"step size underflow at t = {t:.6g}", t_last=t)
        h_step = s * min(abs(h), abs(T - t))
        clamped = False
        if i_rec < rec.size and s * (t + h_step) >= s * rec[i_rec] - tiny:
            h_step = rec[i_rec] - t
            clamped = True

        K = [k1]
        for row in _DP_A[1:6]:
            acc = Y + h_step * sum(a * k for a, k in zip(row, K))
            K.append(field.eval(acc))
        y_new = Y + h_step * sum(b * k for b, k in zip(_DP_B[:6], K[:6]))
        # the last stage sits at y_new itself (FSAL), so it seeds the next step
        k7 = field.eval(y_new)
        err = h_step * (sum(e * k for e, k in zip(_DP_E[:6], K[:6])) + _DP_E[6] * k7)
        sc = atol + tol * np.maximum(np.abs(Y), np.abs(y_new))
        with np.errstate(invalid="ignore"):
            errnorm = float(np.max(np.sqrt(np.mean((err / sc) ** 2, axis=-1))))
        if not np.isfinite(errnorm):
            h *= 0.2
            continue
        if errnorm <= 1.0:
            t = rec[i_rec] if clamped else t + h_step
            Y = y_new
            k1 = k7
            if clamped:
                recorded.append((t, Y.copy()))
                i_rec += 1
        factor = min(5.0, max(0.2, 0.9 * errnorm ** -0.2 if errnorm > 0.0 else 5.0))
        if clamped:
            # a clamped step says nothing about the natural step size unless
            # it was rejected, in which case the trial step must shrink too
            if errnorm > 1.0:
                h = s * abs(h_step) * factor
        else:
            h = s * abs(h_step) * factor
    else:
        raise IntegrationError(f"exceeded {max_steps} steps at t = {t:.6g}", t_last=t)
    return Y, recorded


def _augmented_field(field: VectorFieldSpec) -> VectorFieldSpec:
    """Couple the field with its variational equations dD/dt = J(x) D."""
    if field.jac is None:
        raise ValueError("flow-map Jacobians require an analytic field Jacobian")
    dim = field.dim

    def evaluate(y: Array) -> Array:
        y = np.asarray(y, dtype=float)
        x = y[..., :dim]
        D = y[..., dim:].reshape(y.shape[:-1] + (dim, dim))
        dx = field.eval(x)
        dD = field.jac(x) @ D
        return np.concatenate(
            [dx, dD.reshape(y.shape[:-1] + (dim * dim,))], axis=-1
        )

    return VectorFieldSpec(dim=dim + dim * dim, eval=evaluate, jac=None)


def flow_map_with_jacobian(
    field: VectorFieldSpec,
    x0: Array,
    t: float,
    tol: float = 1e-10,
    atol: float = 1e-12,
) -> tuple[Array, Array]:
    """Endpoint phi_t(x0) and the flow-map Jacobian D phi_t(x0), computed
    jointly from the variational equations with D(0) = identity."""
    x0 = np.asarray(x0, dtype=float)
    dim = field.dim
    if t == 0.0:
        return x0.copy(), np.eye(dim)
    aug = _augmented_field(field)
    y0 = np.concatenate([x0, np.eye(dim).ravel()])
    solver = DOP853(lambda s, y: aug.eval(y), 0.0, y0, t, rtol=tol, atol=atol)
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(
                f"variational integration failed at t = {solver.t:.6g}: {msg}",
                t_last=solver.t,
            )
    return solver.y[:dim].copy(), solver.y[dim:].reshape(dim, dim).copy()


def liouville_residual(
    params: SuslovParams,
    omega0: Array,
    t: float,
    tol: float = 1e-10,
    atol: float = 1e-12,
    quad_points: int = 2001,
) -> dict:
    """Two independent routes to the volume growth log det D phi_t: the
    variational Jacobian versus quadrature of the analytic divergence along
    the orbit. Their difference is the reported residual."""
    field = vector_field(params)
    _, D = flow_map_with_jacobian(field, omega0, t, tol=tol, atol=atol)
    sign, logdet = np.linalg.slogdet(D)
    traj = integrate(field, omega0, t, tol=tol, atol=atol)
    ts = np.linspace(0.0, t, quad_points)
    div_vals = divergence_analytic(params, traj.dense(ts).T)
    quad = float(simpson(div_vals, x=ts))
    return {
        "det_sign": float(sign),
        "log_det_jacobian": float(logdet),
        "divergence_quadrature": quad,
        "residual": abs(float(logdet) - quad),
    }


def quat_mul(q: Array, r: Array) -> Array:
    """Hamilton product of scalar-first quaternions."""
    w1, x1, y1, z1 = q
    w2, x2, y2, z2 = r
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_to_matrix(q: Array) -> Array:
    """Rotation matrix of a unit quaternion (scalar first)."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def _trajectory_matches_field(field: VectorFieldSpec, traj: Trajectory) -> bool:
    """Check that the dense trajectory solves this field (guards against
    reconstructing with mismatched parameters)."""
    if traj.dense is None:
        return True
    t0, t1 = traj.times[0], traj.times[-1]
    span = t1 - t0
    delta = 1e-6 * max(span, 1.0)
    probes = t0 + span * np.array([0.21, 0.43, 0.58, 0.71, 0.88])
    for t in probes:
        x = traj.dense(t)
        fd = (traj.dense(t + delta) - traj.dense(t - delta)) / (2.0 * delta)
        X = field.eval(x)
        if np.linalg.norm(fd - X) > 1e-5 * (np.linalg.norm(X) + 1.0):
            return False
    return True


def reconstruct(
    params: SuslovParams,
    traj: Trajectory,
    g0: Array = (1.0, 0.0, 0.0, 0.0),
    theta0: float = 0.0,
    tol: float = 1e-10,
    atol: float = 1e-12,
) -> AttitudeTrajectory:
    """Reconstruct the carrier attitude and rotor angle along a trajectory,

        dg/dt = g hat(Omega),   dtheta/dt = -<a, Omega>,

    integrating quaternions against the dense angular-velocity history with
    per-step renormalization. g0 is the attitude at the first stored time.
    """
    if traj.dense is None:
        raise ValueError("reconstruction needs a trajectory with dense output")
    if not _trajectory_matches_field(vector_field(params), traj):
        raise ValueError("trajectory is inconsistent with the supplied parameters")
    g0 = np.asarray(g0, dtype=float)
    if g0.shape != (4,):
        raise ValueError("g0 must be a quaternion (4 components, scalar first)")
    nrm = np.linalg.norm(g0)
    if nrm == 0.0:
        raise ValueError("g0 must be a nonzero quaternion")
    a1, a2 = params.a1, params.a2
    dense_omega = traj.dense

    def rhs(t: float, y: Array) -> Array:
        w = dense_omega(t)
        dq = 0.5 * quat_mul(y[:4], np.array([0.0, w[0], w[1], w[2]]))
        dth = -(a1 * w[0] + a2 * w[1] + w[2])
        return np.append(dq, dth)

    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    y0 = np.append(g0 / nrm, float(theta0))
    solver = DOP853(rhs, t0, y0, t1, rtol=tol, atol=atol)
    ts = [t0]
    interps = []
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(
                f"attitude integration failed at t = {solver.t:.6g}: {msg}",
                t_last=solver.t,
            )
        interps.append(solver.dense_output())
        q = solver.y[:4]
        solver.y[:4] = q / np.linalg.norm(q)
        solver.f = rhs(solver.t, solver.y)
        ts.append(solver.t)
    dense_att = OdeSolution(ts, interps)
    samples = dense_att(traj.times).T
    quats = samples[:, :4]
    quats = quats / np.linalg.norm(quats, axis=1, keepdims=True)
    omega_samples = traj.states
    theta_dot = -(
        a1 * omega_samples[:, 0] + a2 * omega_samples[:, 1] + omega_samples[:, 2]
    )
    return AttitudeTrajectory(
        times=traj.times.copy(),
        rotations=quats,
        theta=samples[:, 4],
        theta_dot=theta_dot,
    )


def sample_ellipsoid(params: SuslovParams, eta: float, count: int, seed: int) -> Array:
    """Seeded samples on the energy ellipsoid E = eta.

    Standard Gaussians g are normalized and mapped through L^{-T} (Ka = L L^T),
    which lands exactly on the ellipsoid; the counter-based generator keeps the
    draw reproducible and independent of any worker partitioning.
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    L = np.linalg.cholesky(matrices(params).Ka)
    rng = np.random.Generator(np.random.Philox(key=seed))
    g = rng.standard_normal((count, 3))
    y = np.sqrt(2.0 * eta) * g / np.linalg.norm(g, axis=1, keepdims=True)
    return np.linalg.solve(L.T, y.T).T


@dataclass(frozen=True)
class CaptureReport:
    """Capture statistics of endpoint classification against candidate
    attractor points."""

    labels: tuple[str, ...]
    fractions: dict
    none_fraction: float
    assignments: Array
    initial_states: Array
    endpoint_distances: Array
    samples: int
    T: float
    capture_radius: float

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "fractions": {k: float(v) for k, v in self.fractions.items()},
            "none_fraction": float(self.none_fraction),
            "assignments": [int(a) for a in self.assignments],
            "initial_states": self.initial_states.tolist(),
            "endpoint_distances": self.endpoint_distances.tolist(),
            "samples": int(self.samples),
            "T": float(self.T),
            "capture_radius": float(self.capture_radius),
        }


def _candidate_distances(states: Array, points: Array, metric: str) -> Array:
    """Distances from each state to each candidate, shape (n_candidates, N)."""
    if metric == "euclidean":
        return np.linalg.norm(states[None, :, :] - points[:, None, :], axis=-1)
    if metric == "angular":
        sn = states / np.linalg.norm(states, axis=-1, keepdims=True)
        pn = points / np.linalg.norm(points, axis=-1, keepdims=True)
        cosang = np.clip(sn[None, :, :] * pn[:, None, :], -1.0, 1.0).sum(axis=-1)
        return np.arccos(np.clip(cosang, -1.0, 1.0))
    raise ValueError("metric must be 'euclidean' or 'angular'")


def detect_attractor(
    field: VectorFieldSpec,
    candidates: Sequence[tuple[str, Array]],
    sampler: Callable[[int, int], Array],
    samples: int,
    T: float,
    capture_radius: float = 0.05,
    seed: int = 0,
    metric: str = "euclidean",
    tail_fraction: float = 0.1,
    tail_checks: int = 8,
    tol: float = 1e-8,
    atol: float = 1e-10,
) -> CaptureReport:
    """Empirical attractor probe: integrate seeded samples to time T and
    classify endpoints against the candidate points.

    A sample counts as captured only if its endpoint lies within
    capture_radius of a candidate and the distance to that candidate keeps
    decreasing over the last tail_fraction of the run.  Spiraling approach
    makes checkpoint distances oscillate, so the trend is judged on the
    oscillation envelope: the peak distance over the late checkpoints must
    not exceed the peak over the early ones.  Slow transit near a saddle
    shows a growing envelope and fails.
    """
    labels = tuple(lbl for lbl, _ in candidates)
    points = np.array([np.asarray(p, dtype=float) for _, p in candidates])
    x0 = np.asarray(sampler(samples, seed), dtype=float)
    checks = np.linspace(T * (1.0 - tail_fraction), T, tail_checks + 1)
    _, recorded = integrate_batch(
        field, x0, T, tol=tol, atol=atol, record_times=checks
    )
    dists = np.stack(
        [_candidate_distances(states, points, metric) for _, states in recorded],
        axis=1,
    )  # (n_candidates, n_checks+1, N)
    d_end = dists[:, -1, :]
    nearest = np.argmin(d_end, axis=0)
    N = x0.shape[0]
    idx = np.arange(N)
    within = d_end[nearest, idx] <= capture_radius
    tail = dists[nearest, :, idx]  # (N, n_checks+1)
    head_len = max(2, (tail.shape[1] + 1) // 3)
    early = np.max(tail[:, :head_len], axis=1)
    late = np.max(tail[:, -head_len:], axis=1)
    decreasing = late <= early * (1.0 + 1e-6) + 1e-12
    captured = within & decreasing
    assignments = np.where(captured, nearest, -1)
    fractions = {
        lbl: float(np.mean(assignments == i)) for i, lbl in enumerate(labels)
    }
    return CaptureReport(
        labels=labels,
        fractions=fractions,
        none_fraction=float(np.mean(assignments < 0)),
        assignments=assignments,
        initial_states=x0,
        endpoint_distances=d_end[nearest, idx],
        samples=N,
        T=float(T),
        capture_radius=float(capture_radius),
    )


def suslov_attractor_probe(
    params: SuslovParams,
    eta: float = 1.0,
    samples: int = 500,
    T: float = 200.0,
    seed: int = 0,
    capture_radius: float = 0.05,
    tol: float = 1e-8,
    atol: float = 1e-10,
) -> CaptureReport:
    """Attractor probe for the reduced system: candidates are the six
    equilibria +-v_i scaled onto the energy ellipsoid, samples are drawn
    uniformly on the ellipsoid, and distances are angular."""
    dirs = equilibrium_directions(params)
    candidates = []
    for i, v in enumerate(dirs, start=1):
        for sign, tag in ((1, "+"), (-1, "-")):
            candidates.append(
                (f"{tag}v{i}", scale_to_ellipsoid(params, v, eta, sign=sign))
            )
    sampler = lambda count, sd: sample_ellipsoid(params, eta, count, sd)
    return detect_attractor(
        vector_field(params), candidates, sampler, samples, T,
        capture_radius=capture_radius, seed=seed, metric="angular",
        tol=tol, atol=atol,
    )


def measure_transport_check(
    field: VectorFieldSpec,
    density: DensitySpec,
    A: Array,
    t: float,
    N: int,
    seed: int,
    transport_samples: Optional[int] = None,
    tol: float = 1e-8,
    atol: float = 1e-10,
) -> TransportReport:
    """Monte Carlo check of measure invariance mu(phi_t(A)) = mu(A).

    mu(A) is estimated directly from N uniform samples in the box A; the
    transported measure uses the change of variables
    mu(phi_t(A)) = integral over A of M(phi_t(x)) |det D phi_t(x)| dx,
    pushing a (possibly smaller) batch through the variational equations.
    """
    A = np.asarray(A, dtype=float)
    dim = field.dim
    if A.shape != (dim, 2):
        raise ValueError(f"box must have shape ({dim}, 2)")
    widths = A[:, 1] - A[:, 0]
    if np.any(widths <= 0.0):
        raise ValueError("box must have positive widths")
    vol = float(np.prod(widths))
    rng = np.random.Generator(np.random.Philox(key=seed))
    pts = A[:, 0] + rng.uniform(size=(N, dim)) * widths
    m_vals = np.asarray(density.eval(pts), dtype=float)
    mu_A = vol * float(np.mean(m_vals))
    se_A = vol * float(np.std(m_vals, ddof=1)) / np.sqrt(N)

    if t == 0.0:
        n_t = N
        mu_T, se_T = mu_A, se_A
        rel = 0.0
    else:
        n_t = int(transport_samples) if transport_samples else min(N, 100_000)
        x_T = pts[:n_t]
        aug0 = np.concatenate(
            [x_T, np.broadcast_to(np.eye(dim).ravel(), (n_t, dim * dim))], axis=1
        )
        y_end, _ = integrate_batch(_augmented_field(field), aug0, t, tol=tol, atol=atol)
        x_end = y_end[:, :dim]
        D_end = y_end[:, dim:].reshape(n_t, dim, dim)
        weights = np.asarray(density.eval(x_end), dtype=float) * np.abs(
            np.linalg.det(D_end)
        )
        mu_T = vol * float(np.mean(weights))
        se_T = vol * float(np.std(weights, ddof=1)) / np.sqrt(n_t)
        rel = (mu_T - mu_A) / mu_A if mu_A != 0.0 else np.inf
    return TransportReport(
        box=A,
        t=float(t),
        mu_A=mu_A,
        mu_phi_t_A=mu_T,
        relative_error=float(rel),
        sample_count={"mu_A": int(N), "transport": int(n_t)},
        standard_error_estimate=float(np.hypot(se_A, se_T)),
        se_mu_A=se_A,
        se_transport=se_T,
        seed=int(seed),
    )
