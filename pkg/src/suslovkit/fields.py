"""Generic autonomous vector fields, candidate measure densities, and the
small fixture systems used to validate the verification machinery.

Field evaluations are vectorized: ``eval`` maps arrays of shape (..., dim)
to arrays of the same shape, and ``jac`` maps (..., dim) to (..., dim, dim).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

#: cube root of machine epsilon, the central-difference sweet spot for C^2 functions
FD_STEP_UNIT = float(np.cbrt(np.finfo(float).eps))


@dataclass(frozen=True)
class VectorFieldSpec:
    """Autonomous vector field on R^dim with an optional analytic Jacobian."""

    dim: int
    eval: Callable[[Array], Array]
    jac: Optional[Callable[[Array], Array]] = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("field dimension must be positive")


@dataclass(frozen=True)
class DensitySpec:
    """Candidate measure density: nonnegative, vanishing at most on the
    declared zero set."""

    eval: Callable[[Array], Array]
    zero_set_description: str
    differentiability_class: str = "C1"

    def __post_init__(self) -> None:
        if self.differentiability_class not in ("C1", "measurable-only"):
            raise ValueError(
                "differentiability_class must be 'C1' or 'measurable-only'"
            )


def fd_step(x: Array) -> Array:
    """Per-coordinate central-difference step h = cbrt(eps) * max(1, |x_i|)."""
    return FD_STEP_UNIT * np.maximum(1.0, np.abs(x))


def fd_jacobian(f: Callable[[Array], Array], x: Array, h: Array | None = None) -> Array:
    """Central-difference Jacobian of a vectorized map at points x.

    Returns shape (..., dim_out, dim) with entry [..., i, j] = df_i/dx_j.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = fd_step(x)
    dim = x.shape[-1]
    cols = []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        hj = h[..., j:j + 1]
        cols.append((f(x + hj * e) - f(x - hj * e)) / (2.0 * h[..., j:j + 1]))
    return np.stack(cols, axis=-1)


def fd_gradient(f: Callable[[Array], Array], x: Array, h: Array | None = None) -> Array:
    """Central-difference gradient of a scalar-valued vectorized map."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = fd_step(x)
    dim = x.shape[-1]
    parts = []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        hj = h[..., j]
        parts.append((f(x + hj[..., None] * e) - f(x - hj[..., None] * e)) / (2.0 * hj))
    return np.stack(parts, axis=-1)


def fd_divergence(spec: VectorFieldSpec, x: Array) -> Array:
    """Central-difference divergence (trace of the finite-difference Jacobian)."""
    J = fd_jacobian(spec.eval, x)
    return np.trace(J, axis1=-2, axis2=-1)


def divergence(spec: VectorFieldSpec, x: Array) -> Array:
    """Divergence of the field, analytic when a Jacobian is available."""
    if spec.jac is not None:
        return np.trace(spec.jac(np.asarray(x, dtype=float)), axis1=-2, axis2=-1)
    return fd_divergence(spec, x)


def example2d() -> VectorFieldSpec:
    """The linear plane field (dx1, dx2) = (-x1, 2 x2)."""

    def evaluate(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.stack([-x[..., 0], 2.0 * x[..., 1]], axis=-1)

    J = np.array([[-1.0, 0.0], [0.0, 2.0]])

    def jacobian(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(J, x.shape[:-1] + (2, 2)).copy()

    return VectorFieldSpec(dim=2, eval=evaluate, jac=jacobian)


def example2d_density() -> DensitySpec:
    """Stationary density M(x1, x2) = |x1|^5 x2^2 for the linear plane field."""

    def evaluate(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.abs(x[..., 0]) ** 5 * x[..., 1] ** 2

    return DensitySpec(
        eval=evaluate,
        zero_set_description="coordinate axes x1 = 0 and x2 = 0",
        differentiability_class="C1",
    )


def example1d() -> VectorFieldSpec:
    """The scalar field dx1 = sin^2(x1); every multiple of pi is an equilibrium."""

    def evaluate(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.sin(x) ** 2

    def jacobian(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.sin(2.0 * x)[..., None]

    return VectorFieldSpec(dim=1, eval=evaluate, jac=jacobian)
