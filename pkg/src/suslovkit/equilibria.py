"""Relative equilibria of the reduced system.

The equilibrium set is the union of the three eigenlines V_i of Ba. On a
fixed energy ellipsoid each line contributes an antipodal pair +-v_i whose
stability is read off the characteristic polynomial

    p(z) = det(z Ka - G_{v_i}) = det(Ka) z^3 + alpha z^2 + beta z,

where G_{v_i} is the linearization of (Ba Omega) x Omega at v_i. The zero
root corresponds to motion along the equilibrium line; the signs of alpha
and beta classify the restricted equilibria.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import SuslovParams, energy, matrices, vector_field
from .fields import Array


class Classification(str, Enum):
    SADDLE = "Saddle"
    LINEAR_CENTER_PAIR = "LinearCenterPair"
    SOURCE_SINK_PAIR = "SourceSinkPair"


@dataclass(frozen=True)
class EquilibriumReport:
    """Stability data for one equilibrium line, at the fixed representative
    v_i below. The antipode -v_i swaps the source/sink roles (alpha changes
    sign under v -> -v while beta does not)."""

    index: int
    lambda_i: float
    direction: Array
    alpha: float
    beta: float
    classification: Classification
    source_sign: int | None = None
    sink_sign: int | None = None
    annotation: str = ""

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "lambda": self.lambda_i,
            "direction": [float(c) for c in self.direction],
            "alpha": self.alpha,
            "beta": self.beta,
            "classification": self.classification.value,
            "source_sign": self.source_sign,
            "sink_sign": self.sink_sign,
            "annotation": self.annotation,
        }


def equilibrium_directions(params: SuslovParams) -> tuple[Array, Array, Array]:
    """Representatives v_1, v_2, v_3 of the three equilibrium lines.

    v_i spans the lambda_i eigenline of Ba; each is checked to be a zero of
    the reduced field.
    """
    l1, l2, l3 = params.lam
    v1 = np.array([l3 - l1, 0.0, params.a1 * params.K3])
    v2 = np.array([0.0, l3 - l2, params.a2 * params.K3])
    v3 = np.array([0.0, 0.0, 1.0])
    X = vector_field(params).eval
    for v in (v1, v2, v3):
        nrm = np.linalg.norm(v)
        if np.linalg.norm(X(v)) > 1e-10 * max(1.0, nrm * nrm):
            raise AssertionError("equilibrium direction fails the field zero check")
    return v1, v2, v3


def scale_to_ellipsoid(params: SuslovParams, v: Array, eta: float, sign: int = 1) -> Array:
    """Scale v onto the energy ellipsoid E = eta; sign selects the antipode."""
    v = np.asarray(v, dtype=float)
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    e = float(energy(params, v))
    if e == 0.0:
        raise ValueError("cannot scale the zero vector onto an ellipsoid")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign * np.sqrt(eta / e) * v


def _match_eigenline(params: SuslovParams, v: Array) -> int:
    """Index i of the eigenline of Ba containing v, or raise if none does."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("zero vector is not an equilibrium direction")
    Ba = matrices(params).Ba
    resid = [np.linalg.norm(Ba @ v - lam * v) for lam in params.lam]
    i = int(np.argmin(resid))
    if resid[i] > 1e-9 * np.linalg.norm(Ba, 2) * nrm:
        raise ValueError("not an equilibrium direction (no eigenline of Ba matches)")
    return i + 1


def linearization(params: SuslovParams, v: Array) -> Array:
    """Linearization G of Omega -> (Ba Omega) x Omega at the equilibrium v,
    with columns g_j = (b_j - lambda_i e_j) x v. Satisfies Ka J(v) = G for
    the field Jacobian J."""
    i = _match_eigenline(params, v)
    lam_i = params.lam[i - 1]
    Ba = matrices(params).Ba
    v = np.asarray(v, dtype=float)
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        cols.append(np.cross(Ba[:, j] - lam_i * e, v))
    return np.stack(cols, axis=-1)


def _coefficient_tolerance(params: SuslovParams, v: Array) -> float:
    """Scale-aware zero threshold for alpha; alpha and beta are homogeneous
    in v so the threshold must track the representative."""
    nrm2 = float(np.dot(v, v))
    return 1e-10 * matrices(params).detKa * nrm2 * max(params.lam)


def stability_coefficients(params: SuslovParams, i: int) -> tuple[float, float]:
    """Coefficients (alpha, beta) of det(z Ka - G_{v_i}).

    The cubic is recovered by interpolation: the determinant is evaluated at
    four z values and the coefficients solved from the Vandermonde system.
    The constant term must vanish (zero root along the line V_i); a violation
    signals an implementation bug.
    """
    if i not in (1, 2, 3):
        raise ValueError("equilibrium index must be 1, 2 or 3")
    v = equilibrium_directions(params)[i - 1]
    G = linearization(params, v)
    mats = matrices(params)
    s = 1.0 + np.linalg.norm(mats.Ka_inv @ G, 2)
    zs = s * np.array([-2.0, -1.0, 1.0, 2.0])
    ps = np.array([np.linalg.det(z * mats.Ka - G) for z in zs])
    V = np.vander(zs, 4)  # columns z^3, z^2, z, 1
    c3, alpha, beta, c0 = np.linalg.solve(V, ps)
    scale = max(np.max(np.abs(ps)), mats.detKa * s ** 3)
    if abs(c0) > 1e-10 * scale:
        raise AssertionError("constant term of det(z Ka - G) does not vanish")
    if abs(c3 - mats.detKa) > 1e-10 * scale:
        raise AssertionError("cubic term of det(z Ka - G) is not det(Ka)")
    return float(alpha), float(beta)


def stability_coefficients_closed_form(
    params: SuslovParams, i: int
) -> tuple[float | None, float]:
    """Closed forms of (alpha, beta) at the fixed representatives.

    For i = 2 only beta has a closed form (its sign alone settles the
    classification), so alpha is returned as None there.
    """
    l1, l2, l3 = params.lam
    a1, a2, K3 = params.a1, params.a2, params.K3
    if i == 1:
        beta = (l1 - l2) * (l1 - l3) * (
            (a1 * a1 * K3 + l1) * (l1 - l3) ** 2 + a1 * a1 * K3 * K3 * l3
        )
        alpha = -a2 * K3 * l3 * (a1 * a1 * K3 * (l1 - l2) + l1 * (l1 - l3))
        return alpha, beta
    if i == 2:
        beta = -(l1 - l2) * (l2 - l3) * (
            l2 * (l2 - l3) ** 2 + a2 * a2 * K3 * ((l2 - l3) ** 2 + K3 * l3)
        )
        return None, beta
    if i == 3:
        beta = (l1 - l3) * (l2 - l3) * l3
        alpha = -a1 * a2 * K3 * (l1 - l2) * l3
        return alpha, beta
    raise ValueError("equilibrium index must be 1, 2 or 3")


def classify(params: SuslovParams, i: int) -> EquilibriumReport:
    """Classify the equilibrium pair +-v_i from the signs of (alpha, beta)."""
    v = equilibrium_directions(params)[i - 1]
    alpha, beta = stability_coefficients(params, i)
    tol = _coefficient_tolerance(params, v)
    if abs(beta) <= tol * max(params.lam):
        raise ValueError(f"degenerate equilibrium line V_{i}: beta vanishes")
    lam_i = params.lam[i - 1]
    if beta < 0.0:
        cls = Classification.SADDLE
        src = snk = None
        note = ""
    elif abs(alpha) <= tol:
        cls = Classification.LINEAR_CENTER_PAIR
        src = snk = None
        note = "nonlinear center on the energy ellipsoid (known result, not verified here)"
    else:
        cls = Classification.SOURCE_SINK_PAIR
        # alpha < 0: v_i is the source and -v_i the sink; alpha > 0 swaps them
        src, snk = (1, -1) if alpha < 0.0 else (-1, 1)
        note = ""
    return EquilibriumReport(
        index=i,
        lambda_i=lam_i,
        direction=v,
        alpha=alpha,
        beta=beta,
        classification=cls,
        source_sign=src,
        sink_sign=snk,
        annotation=note,
    )
