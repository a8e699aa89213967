"""Invariant-measure machinery: the stationarity residual div(M X) at a
point, smooth-measure existence predicates, and the explicit stationary
density available when a2 = 0.

For a2 = 0 the planes pi+-: O1 - xi_pm O3 = 0 are flow invariant and

    M(Omega) = (O1 - xi_+ O3)^(n-1) |O1 - xi_- O3|^(n gamma - 1)

is stationary: div(M X) = 0 away from the planes. n is the smallest odd
integer making both exponents >= 1, so M is C1 and vanishes only on pi+-.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SuslovParams, divergence_analytic, matrices, vector_field
from .fields import (
    Array,
    DensitySpec,
    FD_STEP_UNIT,
    VectorFieldSpec,
    example2d,
    example2d_density,
    fd_gradient,
    fd_jacobian,
)


@dataclass(frozen=True)
class ClassADensityParams:
    """Parameters (R, xi_pm, gamma, n) of the explicit stationary density."""

    R: float
    xi_plus: float
    xi_minus: float
    gamma: float
    n: int

    def __post_init__(self) -> None:
        if self.R <= 0.0 or self.gamma <= 0.0:
            raise ValueError("R and gamma must be positive")
        if self.xi_plus <= self.xi_minus:
            raise ValueError("xi_plus must exceed xi_minus")
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError("n must be odd and at least 3")
        if self.n - 1 < 1 or self.n * self.gamma - 1 < 1:
            raise ValueError("exponents n-1 and n*gamma-1 must be at least 1")

    @property
    def exp_plus(self) -> float:
        """Exponent n - 1 of the pi+ factor (even, so that factor is >= 0)."""
        return float(self.n - 1)

    @property
    def exp_minus(self) -> float:
        """Exponent n*gamma - 1 of the pi- factor."""
        return self.n * self.gamma - 1.0


def positive_c1_measure_exists(params: SuslovParams) -> bool:
    """Whether an invariant measure with strictly positive C1 density exists:
    exactly when the divergence vanishes identically, i.e. a1 = a2 = 0."""
    return params.a1 == 0.0 and params.a2 == 0.0


def classA_measure_exists(params: SuslovParams) -> bool:
    """Whether an invariant measure with a.e.-positive density exists: exactly
    when a2 = 0 (the explicit density above realizes it)."""
    return params.a2 == 0.0


def density_params(params: SuslovParams) -> ClassADensityParams:
    """Compute (R, xi_pm, gamma, n) for the stationary density; needs a2 = 0."""
    if params.a2 != 0.0:
        raise ValueError("the explicit stationary density requires a2 = 0")
    l1, l2, l3 = params.lam
    a1, K3 = params.a1, params.K3
    A = a1 * K3 * l3
    R = float(np.sqrt(A * A + 4.0 * (l1 + a1 * a1 * K3) * l3 * (l1 - l2) * (l2 - l3)))
    den = 2.0 * (l1 - l2) * (l1 + a1 * a1 * K3)
    gamma = (R - A) / (R + A)
    n = 3
    while n * gamma - 1.0 < 1.0:
        n += 2
    return ClassADensityParams(
        R=R, xi_plus=(A + R) / den, xi_minus=(A - R) / den, gamma=gamma, n=n
    )


def _plane_factors(dp: ClassADensityParams, omega: Array) -> tuple[Array, Array]:
    omega = np.asarray(omega, dtype=float)
    u_plus = omega[..., 0] - dp.xi_plus * omega[..., 2]
    u_minus = omega[..., 0] - dp.xi_minus * omega[..., 2]
    return u_plus, u_minus


def density_M(params: SuslovParams, dp: ClassADensityParams, omega: Array) -> Array:
    """Evaluate the stationary density M; exactly zero on the planes pi+-."""
    u_plus, u_minus = _plane_factors(dp, omega)
    return u_plus ** dp.exp_plus * np.abs(u_minus) ** dp.exp_minus


def first_integral_F(params: SuslovParams, dp: ClassADensityParams, omega: Array) -> Array:
    """The first integral F = (O1 - xi_+ O3) |O1 - xi_- O3|^gamma (a2 = 0).

    Homogeneous of degree 1 + gamma: F(c Omega) = c^(1+gamma) F(Omega), c > 0.
    """
    u_plus, u_minus = _plane_factors(dp, omega)
    return u_plus * np.abs(u_minus) ** dp.gamma


def density_spec(
    params: SuslovParams, dp: ClassADensityParams, extra_power: int = 0
) -> DensitySpec:
    """Wrap M |F|^k as a DensitySpec; any integer k >= 0 is again stationary
    since F is conserved, and the exponents only grow."""
    if extra_power < 0:
        raise ValueError("extra_power must be a nonnegative integer")
    k = int(extra_power)

    def evaluate(omega: Array) -> Array:
        u_plus, u_minus = _plane_factors(dp, omega)
        return (
            np.abs(u_plus) ** (dp.exp_plus + k)
            * np.abs(u_minus) ** (dp.exp_minus + k * dp.gamma)
        )

    return DensitySpec(
        eval=evaluate,
        zero_set_description=(
            "invariant planes O1 - xi_plus O3 = 0 and O1 - xi_minus O3 = 0"
        ),
        differentiability_class="C1",
    )


def plane_invariance_defect(
    params: SuslovParams, dp: ClassADensityParams, omega: Array
) -> float:
    """Time derivative of the plane function at an on-plane point,
    d/dt (O1 - xi O3) = X1 - xi X3, which plane invariance forces to zero.

    The point must lie on pi+ or pi-; off-plane inputs are rejected.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1:
        raise ValueError("plane_invariance_defect takes a single point")
    u_plus, u_minus = _plane_factors(dp, omega)
    nrm = np.linalg.norm(omega)
    d_plus = abs(u_plus) / (1.0 + abs(dp.xi_plus))
    d_minus = abs(u_minus) / (1.0 + abs(dp.xi_minus))
    tol = 1e-9 * max(1.0, nrm)
    if d_plus > tol and d_minus > tol:
        raise ValueError("point does not lie on either invariant plane")
    xi = dp.xi_plus if d_plus <= d_minus else dp.xi_minus
    X = vector_field(params).eval(omega)
    return float(X[0] - xi * X[2])


def pde_residual(field: VectorFieldSpec, density: DensitySpec, x: Array) -> Array:
    """Stationarity residual sum_i d(M X_i)/dx_i at x.

    Split by the product rule as <grad M, X> + M div X, with the density
    gradient by central finite differences and the field divergence from the
    analytic Jacobian when available (halves the finite-difference error).
    """
    x = np.asarray(x, dtype=float)
    grad_M = fd_gradient(density.eval, x)
    X = field.eval(x)
    if field.jac is not None:
        div_X = np.trace(field.jac(x), axis1=-2, axis2=-1)
    else:
        div_X = np.trace(fd_jacobian(field.eval, x), axis1=-2, axis2=-1)
    return np.sum(grad_M * X, axis=-1) + density.eval(x) * div_X


def residual_scale(field: VectorFieldSpec, density: DensitySpec, x: Array) -> Array:
    """Local magnitude of grad(M X) used to normalize the residual:
    |X| |grad M| + |M| |J|_F, with a floor to keep ratios finite."""
    x = np.asarray(x, dtype=float)
    grad_M = fd_gradient(density.eval, x)
    X = field.eval(x)
    J = field.jac(x) if field.jac is not None else fd_jacobian(field.eval, x)
    scale = (
        np.linalg.norm(X, axis=-1) * np.linalg.norm(grad_M, axis=-1)
        + np.abs(density.eval(x)) * np.linalg.norm(J, axis=(-2, -1))
    )
    return np.maximum(scale, np.finfo(float).tiny * 1e20)


def exclusion_radius(
    dp: ClassADensityParams, tol: float = 1e-6, safety: float = 10.0
) -> float:
    """Normalized distance from the planes inside which the finite-difference
    residual is not trusted.

    A factor |u|^q differentiated centrally at distance d carries relative
    truncation error about (h/d)^2 |(q-1)(q-2)| / 6; near the intersection
    line of the planes the exponents add. Solving for d at the target
    tolerance (with a safety margin) gives the radius, in units of the
    finite-difference step at unit scale.
    """
    q_plus, q_minus = dp.exp_plus, dp.exp_minus
    C = max(
        abs((q - 1.0) * (q - 2.0)) for q in (q_plus, q_minus, q_plus + q_minus)
    )
    return FD_STEP_UNIT * float(np.sqrt(C * safety / (6.0 * tol)))


def sample_off_plane(
    params: SuslovParams,
    dp: ClassADensityParams,
    count: int,
    seed: int,
    norm_range: tuple[float, float] = (0.3, 2.0),
    excl: float | None = None,
) -> Array:
    """Sample points in a norm annulus, rejecting the exclusion neighborhood
    of the planes pi+- (distances normalized by |Omega| (1 + |xi|))."""
    if excl is None:
        excl = exclusion_radius(dp)
    rng = np.random.Generator(np.random.Philox(key=seed))
    lo, hi = norm_range
    out: list[Array] = []
    have = 0
    while have < count:
        w = rng.uniform(-hi, hi, size=(4 * count, 3))
        nrm = np.linalg.norm(w, axis=1)
        u_plus, u_minus = _plane_factors(dp, w)
        keep = (nrm > lo) & (nrm < hi)
        keep &= np.abs(u_plus) > excl * nrm * (1.0 + abs(dp.xi_plus))
        keep &= np.abs(u_minus) > excl * nrm * (1.0 + abs(dp.xi_minus))
        out.append(w[keep])
        have += int(keep.sum())
    return np.concatenate(out)[:count]


def residual_sweep(
    params: SuslovParams,
    n_points: int = 10000,
    seed: int = 0,
    tol: float = 1e-6,
    extra_power: int = 0,
) -> dict:
    """Monte Carlo stationarity check of M |F|^k for the reduced field.

    Evaluates the residual at off-plane sample points and reports the worst
    ratio to the local scale; pass means max ratio <= tol.
    """
    dp = density_params(params)
    field = vector_field(params)
    dens = density_spec(params, dp, extra_power=extra_power)
    excl = exclusion_radius(dp, tol=tol)
    pts = sample_off_plane(params, dp, n_points, seed, excl=excl)
    rel = np.abs(pde_residual(field, dens, pts)) / residual_scale(field, dens, pts)
    worst = float(np.max(rel))
    return {
        "claim": "div(M X) = 0 off the invariant planes",
        "params": params.to_dict(),
        "density": {
            "R": dp.R, "xi_plus": dp.xi_plus, "xi_minus": dp.xi_minus,
            "gamma": dp.gamma, "n": dp.n, "extra_power": int(extra_power),
        },
        "sample_count": int(n_points),
        "exclusion_radius": excl,
        "max_residual": worst,
        "tolerance": tol,
        "pass": bool(worst <= tol),
    }


def plane_defect_sweep(
    params: SuslovParams,
    n_points: int = 1000,
    seed: int = 0,
    tol: float = 1e-10,
) -> dict:
    """Check flow invariance of pi+- at on-plane sample points: the defect
    |X1 - xi X3| must stay below tol * |X|."""
    dp = density_params(params)
    field = vector_field(params)
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst = 0.0
    for xi in (dp.xi_plus, dp.xi_minus):
        t = rng.uniform(-2.0, 2.0, size=(n_points // 2 + 1, 2))
        pts = np.stack([xi * t[:, 1], t[:, 0], t[:, 1]], axis=-1)
        X = field.eval(pts)
        defect = np.abs(X[..., 0] - xi * X[..., 2])
        denom = np.maximum(np.linalg.norm(X, axis=-1), np.finfo(float).tiny * 1e20)
        worst = max(worst, float(np.max(defect / denom)))
    return {
        "claim": "planes pi+- are flow invariant",
        "params": params.to_dict(),
        "sample_count": 2 * (n_points // 2 + 1),
        "max_defect": worst,
        "tolerance": tol,
        "pass": bool(worst <= tol),
    }


def fixture2d_residual_sweep(n_points: int = 4096, seed: int = 0, tol: float = 1e-6) -> dict:
    """Stationarity sweep for the plane fixture, M = |x1|^5 x2^2 against
    (dx1, dx2) = (-x1, 2 x2); same exclusion policy as the main density,
    with exponents 5 and 2 on the axes (joint degree 7 at the origin)."""
    field = example2d()
    dens = example2d_density()
    C = max(abs((q - 1.0) * (q - 2.0)) for q in (5.0, 2.0, 7.0))
    excl = FD_STEP_UNIT * float(np.sqrt(C * 10.0 / (6.0 * tol)))
    rng = np.random.Generator(np.random.Philox(key=seed))
    out: list[Array] = []
    have = 0
    while have < n_points:
        x = rng.uniform(-2.0, 2.0, size=(4 * n_points, 2))
        guard = excl * np.maximum(1.0, np.linalg.norm(x, axis=1))
        keep = (np.abs(x[:, 0]) > guard) & (np.abs(x[:, 1]) > guard)
        out.append(x[keep])
        have += int(keep.sum())
    pts = np.concatenate(out)[:n_points]
    rel = np.abs(pde_residual(field, dens, pts)) / residual_scale(field, dens, pts)
    worst = float(np.max(rel))
    return {
        "claim": "div(M X) = 0 off the coordinate axes (plane fixture)",
        "sample_count": int(n_points),
        "exclusion_radius": excl,
        "max_residual": worst,
        "tolerance": tol,
        "pass": bool(worst <= tol),
    }


def divergence_witness(params: SuslovParams, n_points: int = 4096, seed: int = 0) -> dict:
    """Largest sampled |div X| over the unit ball: positive exactly when a
    positive C1 stationary density is obstructed ((a1, a2) != (0, 0)).

    The divergence is linear in Omega, so its true supremum over the unit
    ball is the norm of its coefficient vector; the sampled maximum is
    checked against that bound.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    w = rng.uniform(-1.0, 1.0, size=(n_points, 3))
    w = w[np.linalg.norm(w, axis=1) <= 1.0]
    vals = np.abs(divergence_analytic(params, w))
    l1, l2, l3 = params.lam
    a1, a2 = params.a1, params.a2
    pref = l3 * params.K3 / matrices(params).detKa
    coef = pref * np.array([-a2 * l1, a1 * l2, a1 * a2 * (l1 - l2)])
    return {
        "claim": "div X vanishes identically iff a1 = a2 = 0",
        "params": params.to_dict(),
        "sample_count": int(len(w)),
        "max_divergence": float(np.max(vals)),
        "supremum_unit_ball": float(np.linalg.norm(coef)),
        "divergence_free": bool(np.linalg.norm(coef) == 0.0),
        "positive_c1_measure_exists": positive_c1_measure_exists(params),
        "classA_measure_exists": classA_measure_exists(params),
    }
