"""Hilbert-Schmidt gate distance and its analytic parameter derivatives.

With ``z = Tr(T^dag U)`` and ``N = dim``, the distance is ``d = 1 - |z| / N``.
Writing ``z'`` and ``z''`` for parameter derivatives of the overlap,

    d'  = -Re(conj(z) z') / (N |z|)
    d'' = -(|z'|^2 + Re(conj(z) z'')) / (N |z|) + Re(conj(z) z')^2 / (N |z|^3)

Both are undefined where ``z = 0``; that case raises
:class:`SingularOverlapError` instead of returning a made-up value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzLayout, compile_stack
from .linalg import DimensionError, TargetGate, hs_overlap

EPS_SINGULAR = 1e-12
FD_STEP_FIRST = 1e-5
FD_STEP_SECOND = 1e-4


class SingularOverlapError(ArithmeticError):
    """The overlap with the target vanishes, so the distance is not differentiable."""


def _target_matrix(t) -> np.ndarray:
    return t.matrix if isinstance(t, TargetGate) else np.asarray(t, dtype=complex)


def distance(u: np.ndarray, t) -> float:
    """1 - |Tr(t^dag u)| / dim, clipped to [0, 1] against rounding."""
    tm = _target_matrix(t)
    if u.shape != tm.shape:
        raise DimensionError(f"shape mismatch {u.shape} vs {tm.shape}")
    return float(np.clip(1.0 - abs(hs_overlap(tm, u)) / tm.shape[0], 0.0, 1.0))


def distance_from_overlap(z, dim: int):
    return np.clip(1.0 - np.abs(z) / dim, 0.0, 1.0)


def gradient_from_overlaps(z, dz, dim: int, eps: float = EPS_SINGULAR):
    """Vectorised first derivative; ``z`` has batch shape, ``dz`` one extra axis."""
    mag = np.abs(z)
    if np.any(mag <= eps):
        raise SingularOverlapError(f"|Tr(T^dag U)| = {np.min(mag):.3e} <= {eps}")
    re = np.real(np.conj(z)[..., None] * dz)
    return -re / (dim * mag[..., None])


def hessian_diag_from_overlaps(z, dz, d2z, dim: int, eps: float = EPS_SINGULAR):
    mag = np.abs(z)
    if np.any(mag <= eps):
        raise SingularOverlapError(f"|Tr(T^dag U)| = {np.min(mag):.3e} <= {eps}")
    zc = np.conj(z)[..., None]
    m = mag[..., None]
    re1 = np.real(zc * dz)
    return -(np.abs(dz) ** 2 + np.real(zc * d2z)) / (dim * m) + re1**2 / (dim * m**3)


@dataclass(frozen=True)
class CostReport:
    value: float
    gradient: np.ndarray
    overlap: complex
    overlap_magnitude: float
    hessian_diag: np.ndarray | None = None


def _setup(layout: AnsatzLayout, layers: int, params, frozen_prefix, t):
    circ = compile_stack(layout, layers)
    params = np.asarray(params, dtype=float)
    if params.shape != (circ.num_params,):
        raise ValueError(f"expected {circ.num_params} parameters, got {params.shape}")
    tm = _target_matrix(t)
    if tm.shape != (circ.dim, circ.dim):
        raise DimensionError(f"target dim {tm.shape[0]} != circuit dim {circ.dim}")
    if frozen_prefix is not None and np.shape(frozen_prefix) != tm.shape:
        raise DimensionError("frozen prefix has the wrong dimension")
    return circ, params, tm


def cost_report(layout: AnsatzLayout, layers: int, params, frozen_prefix, t,
                hessian: bool = False, eps: float = EPS_SINGULAR) -> CostReport:
    """Distance, gradient and optionally the Hessian diagonal in one pass.

    The circuit is ``stack(params) @ frozen_prefix``: the trainable stack runs
    after the frozen prefix.
    """
    circ, params, tm = _setup(layout, layers, params, frozen_prefix, t)
    dim = circ.dim
    if hessian:
        z, dz, d2z = circ.overlaps(params, tm, frozen_prefix, second=True)
        hd = hessian_diag_from_overlaps(z, dz, d2z, dim, eps)
    else:
        z, dz = circ.overlaps(params, tm, frozen_prefix)
        hd = None
    grad = gradient_from_overlaps(z, dz, dim, eps)
    return CostReport(
        value=float(distance_from_overlap(z, dim)),
        gradient=grad,
        overlap=complex(z),
        overlap_magnitude=float(abs(z)),
        hessian_diag=hd,
    )


def circuit_distance(layout: AnsatzLayout, layers: int, params, frozen_prefix, t) -> float:
    circ, params, tm = _setup(layout, layers, params, frozen_prefix, t)
    u = circ.unitary(params)
    if frozen_prefix is not None:
        u = u @ frozen_prefix
    return distance(u, tm)


def distance_gradient(layout: AnsatzLayout, layers: int, params, frozen_prefix, t,
                      eps: float = EPS_SINGULAR) -> np.ndarray:
    """Analytic gradient of the distance for ``stack(params) @ frozen_prefix``."""
    return cost_report(layout, layers, params, frozen_prefix, t, eps=eps).gradient


def distance_hessian_diag(layout: AnsatzLayout, layers: int, params, frozen_prefix, t,
                          eps: float = EPS_SINGULAR) -> np.ndarray:
    """Analytic second derivative of the distance along each parameter axis."""
    return cost_report(layout, layers, params, frozen_prefix, t, hessian=True,
                       eps=eps).hessian_diag


def directional_second_derivative(layout: AnsatzLayout, layers: int, params, direction,
                                  frozen_prefix, t, eps: float = EPS_SINGULAR) -> float:
    """Second derivative of the distance along ``direction`` (need not be unit)."""
    circ, params, tm = _setup(layout, layers, params, frozen_prefix, t)
    v = np.asarray(direction, dtype=float)
    support = [int(i) for i in np.flatnonzero(v)]
    pre = np.eye(circ.dim) if frozen_prefix is None else np.asarray(frozen_prefix)
    tdag = tm.conj().T

    def ov(orders):
        return np.trace(tdag @ circ.derivative(params, orders) @ pre)

    z = ov({})
    dz = sum(v[i] * ov({i: 1}) for i in support)
    d2z = 0j
    for a in support:
        for b in support:
            orders = {a: 2} if a == b else {a: 1, b: 1}
            d2z += v[a] * v[b] * ov(orders)
    return float(hessian_diag_from_overlaps(np.asarray(z), np.asarray([dz]),
                                            np.asarray([d2z]), circ.dim, eps)[0])


def finite_diff(layout: AnsatzLayout, layers: int, params, frozen_prefix, t,
                order: int = 1, h: float | None = None) -> np.ndarray:
    """Central finite differences of the distance, one entry per parameter."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if h is None:
        h = FD_STEP_FIRST if order == 1 else FD_STEP_SECOND
    if h <= 0:
        raise ValueError("step must be positive")
    params = np.asarray(params, dtype=float)
    f0 = circuit_distance(layout, layers, params, frozen_prefix, t)
    out = np.empty(params.shape[0])
    for j in range(params.shape[0]):
        e = np.zeros_like(params)
        e[j] = h
        fp = circuit_distance(layout, layers, params + e, frozen_prefix, t)
        fm = circuit_distance(layout, layers, params - e, frozen_prefix, t)
        out[j] = (fp - fm) / (2 * h) if order == 1 else (fp - 2 * f0 + fm) / h**2
    return out
