"""Single-layer parameter points where the layer is the identity up to phase.

For the HEA the full set is known in closed form. Writing ``u, v, w`` for
integers, each wire ``i`` and CRY angle ``D`` satisfy either

* branch A: ``D = 2 pi w``, ``Y_i = pi u``, ``Z1_i + Z2_i = pi v``; or
* branch B: ``D = pi (2w - 1)``, ``Y_i = pi u``, ``Z1_i + Z2_i = pi (1/2 + v)``.

In branch B every CRY reduces to ``Z (x) I`` on its control, so each wire's
single-qubit block must itself be proportional to ``Z``.

For the checkerboard only the sufficient family "every angle is a multiple of
pi" is generated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .ansatz import AnsatzKind, AnsatzLayout, checkerboard, hea, stack_unitary
from .cost import (
    EPS_SINGULAR,
    cost_report,
    directional_second_derivative,
)
from .linalg import TargetGate

TOL_GRAD = 1e-9
TOL_VALLEY = 1e-9
TOL_IDENTITY = 1e-10
DEFAULT_BOUND = 3


class Branch(str, enum.Enum):
    HEA_A = "HEA_A"
    HEA_B = "HEA_B"
    CHECKERBOARD_PI = "CHECKERBOARD_PI"


class Verdict(str, enum.Enum):
    CONFIRMED = "EXTREMUM_CONFIRMED"
    VIOLATION = "VIOLATION"


class VarietyError(RuntimeError):
    """A generated point failed its identity-up-to-phase check."""


def is_identity_up_to_phase(u: np.ndarray, tol: float = TOL_IDENTITY) -> float | None:
    """Return ``alpha`` with ``max|u - e^{i alpha} I| < tol``, else ``None``.

    The phase is read off the first diagonal entry.
    """
    u = np.asarray(u)
    if abs(u[0, 0]) == 0.0:
        return None
    alpha = float(np.angle(u[0, 0]))
    dev = np.max(np.abs(u - np.exp(1j * alpha) * np.eye(u.shape[0])))
    return alpha if dev < tol else None


def identity_deviation(u: np.ndarray) -> float:
    """max|u - e^{i alpha} I| with alpha taken from ``u[0, 0]``."""
    u = np.asarray(u)
    ph = u[0, 0] / abs(u[0, 0]) if abs(u[0, 0]) > 0 else 1.0
    return float(np.max(np.abs(u - ph * np.eye(u.shape[0]))))


@dataclass(frozen=True)
class VarietyPoint:
    layout: AnsatzLayout
    params: np.ndarray
    branch: Branch
    phase: float
    witnesses: dict = field(default_factory=dict)
    perturbed: bool = False


def _cry_controls(layout: AnsatzLayout) -> list[int]:
    return [op.wires[0] for op in layout.ops if op.label.startswith("D[")]


def hea_variety_params(n: int, branch: Branch | str, z1, u, v, w, wrap: bool = True) -> np.ndarray:
    """Fill a HEA layer from free ``Z1`` angles and integer witnesses.

    ``z1``, ``u``, ``v`` have one entry per wire and ``w`` one per CRY gate.
    Wires that control no CRY (only possible without ``wrap``) always follow
    branch A, since nothing on them needs cancelling.
    """
    branch = Branch(branch)
    layout = hea(n, wrap)
    controls = set(_cry_controls(layout))
    theta = np.zeros(layout.params_per_layer)
    for i in range(n):
        shift = 0.5 if branch is Branch.HEA_B and i in controls else 0.0
        theta[3 * i] = z1[i]
        theta[3 * i + 1] = np.pi * u[i]
        theta[3 * i + 2] = np.pi * (shift + v[i]) - z1[i]
    w = np.asarray(w)
    if branch is Branch.HEA_A:
        theta[3 * n:] = 2 * np.pi * w
    else:
        theta[3 * n:] = np.pi * (2 * w - 1)
    return theta


def _finish(layout, params, branch, witnesses, tol) -> VarietyPoint:
    u = stack_unitary(layout, 1, params)
    alpha = is_identity_up_to_phase(u, tol)
    if alpha is None:
        raise VarietyError(f"{branch.value} point is not identity up to phase "
                           f"(deviation {identity_deviation(u):.3e})")
    return VarietyPoint(layout, params, branch, alpha, witnesses)


def sample_hea_variety(n: int, branch: Branch | str = Branch.HEA_A, bound: int = DEFAULT_BOUND,
                       seed=None, wrap: bool = True, tol: float = TOL_IDENTITY) -> VarietyPoint:
    """Random HEA layer that equals ``e^{i alpha} I``.

    Integers are drawn from ``[-bound, bound]`` and each free ``Z1`` angle
    uniformly from ``[0, 2 pi)``.
    """
    if n < 2:
        raise ValueError("HEA variety sampling needs n >= 2")
    branch = Branch(branch)
    if branch is Branch.CHECKERBOARD_PI:
        raise ValueError("use sample_checkerboard_variety")
    rng = np.random.default_rng(seed)
    layout = hea(n, wrap)
    ngates = len(_cry_controls(layout))
    z1 = rng.uniform(0, 2 * np.pi, n)
    u = rng.integers(-bound, bound + 1, n)
    v = rng.integers(-bound, bound + 1, n)
    w = rng.integers(-bound, bound + 1, ngates)
    params = hea_variety_params(n, branch, z1, u, v, w, wrap)
    witnesses = {"z1": z1.tolist(), "u": u.tolist(), "v": v.tolist(), "w": w.tolist()}
    return _finish(layout, params, branch, witnesses, tol)


def sample_checkerboard_variety(n: int, seed=None, bound: int = DEFAULT_BOUND,
                                tol: float = TOL_IDENTITY) -> VarietyPoint:
    """Checkerboard layer with every angle a random integer multiple of pi."""
    if n < 2:
        raise ValueError("checkerboard needs n >= 2")
    rng = np.random.default_rng(seed)
    layout = checkerboard(n)
    m = rng.integers(-bound, bound + 1, layout.params_per_layer)
    params = np.pi * m
    return _finish(layout, params, Branch.CHECKERBOARD_PI, {"m": m.tolist()}, tol)


def sample_variety(layout: AnsatzLayout, branch: Branch | str | None = None, seed=None,
                   bound: int = DEFAULT_BOUND) -> VarietyPoint:
    if layout.kind is AnsatzKind.HEA:
        return sample_hea_variety(layout.n, branch or Branch.HEA_A, bound, seed, layout.wrap)
    return sample_checkerboard_variety(layout.n, seed, bound)


def perturb(point: VarietyPoint, index: int, eps: float) -> VarietyPoint:
    params = point.params.copy()
    params[index] += eps
    return replace(point, params=params, perturbed=True)


def valley_directions(layout: AnsatzLayout) -> list[tuple[int, int]]:
    """(Z1, Z2) index pairs per wire; moving along e_Z1 - e_Z2 keeps the layer fixed."""
    if layout.kind is not AnsatzKind.HEA:
        return []
    return [(3 * i, 3 * i + 2) for i in range(layout.n)]


@dataclass(frozen=True)
class ExtremumReport:
    grad_max_abs: float
    hess_diag: np.ndarray
    valley_directions: list[dict]
    verdict: Verdict
    detail: str = ""
    branch: Branch | None = None
    n: int = 0
    distance: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "branch": self.branch.value if self.branch else None,
            "n": self.n,
            "distance": self.distance,
            "grad_max_abs": self.grad_max_abs,
            "hess_diag": self.hess_diag.tolist(),
            "valley_directions": self.valley_directions,
            "verdict": self.verdict.value,
            "detail": self.detail,
        }


def verify_extremum(point: VarietyPoint, t: TargetGate | np.ndarray,
                    tol_grad: float = TOL_GRAD, tol_valley: float = TOL_VALLEY,
                    eps: float = EPS_SINGULAR) -> ExtremumReport:
    """Check first and second order conditions of the distance at ``point``.

    Hessian entries of valley coordinates (the HEA RZ angles) are only
    required to be non-negative up to ``tol_valley``; every other diagonal
    entry too, and each valley direction must have a vanishing second
    derivative.
    """
    layout = point.layout
    rep = cost_report(layout, 1, point.params, None, t, hessian=True, eps=eps)
    gmax = float(np.max(np.abs(rep.gradient)))
    hd = rep.hessian_diag
    valleys = []
    for a, b in valley_directions(layout):
        v = np.zeros_like(point.params)
        v[a], v[b] = 1.0, -1.0
        d2 = directional_second_derivative(layout, 1, point.params, v, None, t, eps)
        valleys.append({"wire": a // 3, "indices": [a, b], "second_derivative": d2})

    problems = []
    if gmax >= tol_grad:
        problems.append(f"gradient max |g| = {gmax:.3e} >= {tol_grad:g}")
    neg = np.flatnonzero(hd < -tol_valley)
    if neg.size:
        labels = [layout.ops[i].label for i in neg]
        problems.append(f"negative curvature along {labels}")
    flat = [vd for vd in valleys if abs(vd["second_derivative"]) >= tol_valley]
    if flat:
        problems.append(f"valley not flat on wires {[vd['wire'] for vd in flat]}")
    verdict = Verdict.VIOLATION if problems else Verdict.CONFIRMED
    return ExtremumReport(gmax, hd, valleys, verdict, "; ".join(problems),
                          point.branch, layout.n, rep.value)


def realign(m: np.ndarray) -> np.ndarray:
    """Realignment of a 4x4 two-qubit operator; its rank is the operator Schmidt rank."""
    return m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def operator_schmidt_rank(m: np.ndarray, tol: float = 1e-10) -> int:
    s = np.linalg.svd(realign(m), compute_uv=False)
    return int(np.sum(s > tol * s[0]))
