"""Layer-stack training: optimise ``j`` layers, freeze them, append the next ``j``.

The circuit after ``m`` stacks is ``S_m ... S_2 S_1``: each new stack runs
after (left-multiplies) the frozen prefix. Each stack is optimised with Adam
from several random starts, all restarts advancing together as one batch.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .ansatz import AnsatzLayout, compile_stack
from .cost import EPS_SINGULAR, distance
from .linalg import TargetGate
from .variety import Branch, identity_deviation, sample_variety

log = logging.getLogger(__name__)


class InitMode(str, enum.Enum):
    RANDOM_UNIFORM = "RANDOM_UNIFORM"
    IDENTITY_VARIETY = "IDENTITY_VARIETY"


class Method(str, enum.Enum):
    ADAM = "adam"
    GD = "gd"


@dataclass(frozen=True)
class OptimizerSettings:
    method: Method = Method.ADAM
    step_size: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-12
    max_iter: int = 2000
    grad_tol: float = 1e-10
    # a restart stops once its best cost moved less than ftol over `patience` steps
    patience: int = 300
    ftol: float = 1e-14

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))


@dataclass(frozen=True)
class StackSchedule:
    j: int = 1
    q_max: int = 10
    restarts: int = 8
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    init: InitMode = InitMode.RANDOM_UNIFORM
    variety_branch: Branch = Branch.HEA_A
    seed: int = 0
    success_tol: float = 1e-2
    tol_id: float = 1e-3
    stall_window: int = 3
    stop_on_success: bool = True
    stop_on_stall: bool = True
    tie_tol: float = 1e-9
    eps_singular: float = EPS_SINGULAR

    def __post_init__(self):
        object.__setattr__(self, "init", InitMode(self.init))
        object.__setattr__(self, "variety_branch", Branch(self.variety_branch))
        if self.j < 1 or self.q_max < 1 or self.restarts < 1:
            raise ValueError("j, q_max and restarts must all be >= 1")

    @property
    def depth(self) -> int:
        return self.j * self.q_max

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init"] = self.init.value
        d["variety_branch"] = self.variety_branch.value
        d["optimizer"]["method"] = self.optimizer.method.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StackSchedule":
        d = dict(d)
        d["optimizer"] = OptimizerSettings(**d.get("optimizer", {}))
        return cls(**d)


@dataclass(frozen=True)
class StackResult:
    index: int
    params: np.ndarray
    start_cost: float
    best_cost: float
    trace: np.ndarray
    restart_costs: np.ndarray
    identity_restarts: int
    identity_deviation: float
    near_identity: bool
    stalled: bool
    fallback: bool
    singular_resets: int
    unitary: np.ndarray = field(repr=False)

    @property
    def improvement(self) -> float:
        return self.start_cost - self.best_cost

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "params": self.params.tolist(),
            "start_cost": self.start_cost,
            "best_cost": self.best_cost,
            "trace": self.trace.tolist(),
            "restart_costs": self.restart_costs.tolist(),
            "identity_restarts": self.identity_restarts,
            "identity_deviation": self.identity_deviation,
            "near_identity": self.near_identity,
            "stalled": self.stalled,
            "fallback": self.fallback,
            "singular_resets": self.singular_resets,
        }


@dataclass(frozen=True)
class TrainRecord:
    layout: AnsatzLayout
    schedule: StackSchedule
    target_k: int
    target_name: str
    stacks: tuple[StackResult, ...]
    stop_reason: str
    wall_time: float

    @property
    def final_cost(self) -> float:
        return self.stacks[-1].best_cost if self.stacks else float("nan")

    @property
    def stacks_used(self) -> int:
        return len(self.stacks)

    @property
    def costs(self) -> list[float]:
        return [s.best_cost for s in self.stacks]

    def to_dict(self) -> dict:
        return {
            "layout": self.layout.to_dict(),
            "schedule": self.schedule.to_dict(),
            "target": {"k": self.target_k, "name": self.target_name},
            "final_cost": self.final_cost,
            "stacks_used": self.stacks_used,
            "stop_reason": self.stop_reason,
            "wall_time": self.wall_time,
            "stacks": [s.to_dict() for s in self.stacks],
        }


def _init_params(layout, j, schedule, count, rng) -> np.ndarray:
    p = layout.num_params(j)
    if schedule.init is InitMode.RANDOM_UNIFORM:
        return rng.uniform(0.0, 2 * np.pi, (count, p))
    rows = []
    for _ in range(count):
        layers = [sample_variety(layout, schedule.variety_branch, seed=rng).params
                  for _ in range(j)]
        rows.append(np.concatenate(layers))
    return np.array(rows)


def minimize_batch(circ, target: np.ndarray, prefix: np.ndarray, theta0: np.ndarray,
                   opt: OptimizerSettings, rng=None, eps_singular: float = EPS_SINGULAR):
    """Run Adam (or plain gradient descent) on every row of ``theta0``.

    Returns ``(theta, costs, traces, singular_resets)``; ``traces[r]`` is the
    per-iteration cost of row ``r``, starting with the initial cost.
    """
    rng = np.random.default_rng() if rng is None else rng
    theta = np.array(theta0, dtype=float, copy=True)
    nrow = theta.shape[0]
    dim = circ.dim
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    step = np.zeros(nrow, dtype=int)
    traces = [[] for _ in range(nrow)]
    active = np.arange(nrow)
    best = np.full(nrow, np.inf)
    best_at = np.zeros(nrow, dtype=int)
    resets = 0
    it = 0
    while active.size:
        z, dz = circ.overlaps(theta[active], target, prefix)
        mag = np.abs(z)
        cost = np.clip(1.0 - mag / dim, 0.0, 1.0)
        singular = mag <= eps_singular
        if np.any(singular):
            rows = active[singular]
            theta[rows] = rng.uniform(0.0, 2 * np.pi, (rows.size, theta.shape[1]))
            m[rows] = v[rows] = 0.0
            step[rows] = 0
            resets += rows.size
            mag = np.where(singular, 1.0, mag)
        grad = -np.real(np.conj(z)[:, None] * dz) / (dim * mag[:, None])
        grad[singular] = 0.0
        for r, c in zip(active, cost):
            traces[r].append(float(c))
        improved = cost < best[active] - opt.ftol
        best[active] = np.minimum(best[active], cost)
        best_at[active[improved]] = it

        done = (np.max(np.abs(grad), axis=1) < opt.grad_tol) & ~singular
        done |= (it - best_at[active]) >= opt.patience
        if it >= opt.max_iter:
            done[:] = True
        keep = ~done
        active, grad = active[keep], grad[keep]
        if not active.size:
            break
        if opt.method is Method.GD:
            theta[active] -= opt.step_size * grad
        else:
            step[active] += 1
            t = step[active][:, None]
            m[active] = opt.beta1 * m[active] + (1 - opt.beta1) * grad
            v[active] = opt.beta2 * v[active] + (1 - opt.beta2) * grad**2
            mhat = m[active] / (1 - opt.beta1**t)
            vhat = v[active] / (1 - opt.beta2**t)
            theta[active] -= opt.step_size * mhat / (np.sqrt(vhat) + opt.epsilon)
        it += 1
    costs = np.array([tr[-1] for tr in traces])
    return theta, costs, [np.array(tr) for tr in traces], resets


def train_stack(frozen_prefix: np.ndarray, layout: AnsatzLayout, j: int, t: TargetGate,
                schedule: StackSchedule, rng=None, index: int = 0) -> StackResult:
    """Optimise one stack of ``j`` layers on top of ``frozen_prefix``.

    Among restarts whose final cost is within ``tie_tol`` of the best, the one
    closest to the identity (up to phase) is kept. If no restart beats the
    prefix alone, the all-zero stack (exactly the identity) is kept instead and
    ``fallback`` is set.
    """
    rng = np.random.default_rng(schedule.seed) if rng is None else rng
    circ = compile_stack(layout, j)
    tm = t.matrix if isinstance(t, TargetGate) else np.asarray(t)
    prefix = np.asarray(frozen_prefix, dtype=complex)
    if prefix.shape != tm.shape:
        raise ValueError("frozen prefix and target dimensions differ")
    start_cost = distance(prefix, tm)
    theta0 = _init_params(layout, j, schedule, schedule.restarts, rng)
    theta, costs, traces, resets = minimize_batch(
        circ, tm, prefix, theta0, schedule.optimizer, rng, schedule.eps_singular)

    unitaries = circ.unitary(theta)
    devs = np.array([identity_deviation(u) for u in unitaries])
    best_cost = float(np.min(costs))
    tied = np.flatnonzero(costs <= best_cost + schedule.tie_tol)
    pick = int(tied[np.argmin(devs[tied])])
    params, cost, trace, u = theta[pick], float(costs[pick]), traces[pick], unitaries[pick]
    fallback = False
    if cost > start_cost + schedule.tie_tol:
        fallback = True
        params = np.zeros(circ.num_params)
        u = circ.unitary(params)
        cost = start_cost
    dev = identity_deviation(u)
    near = dev < schedule.tol_id
    return StackResult(
        index=index,
        params=params,
        start_cost=start_cost,
        best_cost=cost,
        trace=trace,
        restart_costs=costs,
        identity_restarts=int(np.sum(devs < schedule.tol_id)),
        identity_deviation=dev,
        near_identity=bool(near),
        stalled=bool(near and abs(start_cost - cost) < schedule.tol_id),
        fallback=fallback,
        singular_resets=resets,
        unitary=u,
    )


def detect_identity_stall(record: TrainRecord | Sequence[StackResult], k: int | None = None,
                          tol_id: float = 1e-3, window: int = 3) -> bool:
    """Whether the last ``window`` stacks left the circuit unchanged.

    Each of those stacks must move the cost by less than ``tol_id`` and be the
    identity up to phase within ``tol_id``. With ``k`` given the stall must
    additionally sit at ``2^-k``, the distance of the k-Toffoli from the
    identity.
    """
    stacks = record.stacks if isinstance(record, TrainRecord) else tuple(record)
    if window < 1 or len(stacks) < window:
        return False
    for s in stacks[-window:]:
        if abs(s.improvement) >= tol_id or s.identity_deviation >= tol_id:
            return False
        if k is not None and abs(s.best_cost - 2.0**-k) >= tol_id:
            return False
    return True


def train_layerwise(layout: AnsatzLayout, j: int, t: TargetGate,
                    schedule: StackSchedule) -> TrainRecord:
    """Train stacks until success, an identity stall or ``q_max`` stacks."""
    if schedule.j != j:
        schedule = replace(schedule, j=j)
    t0 = time.perf_counter()
    seeds = np.random.SeedSequence(schedule.seed).spawn(schedule.q_max)
    prefix = np.eye(layout.dim, dtype=complex)
    stacks: list[StackResult] = []
    reason = "max_stacks"
    for m in range(schedule.q_max):
        res = train_stack(prefix, layout, j, t, schedule, np.random.default_rng(seeds[m]), m)
        stacks.append(res)
        prefix = res.unitary @ prefix
        log.info("j=%d stack %d: cost %.6g (start %.6g, identity dev %.2e)",
                 j, m, res.best_cost, res.start_cost, res.identity_deviation)
        if schedule.stop_on_success and res.best_cost < schedule.success_tol:
            reason = "success"
            break
        if schedule.stop_on_stall and detect_identity_stall(
                stacks, None, schedule.tol_id, schedule.stall_window):
            reason = "stall"
            break
    return TrainRecord(layout, schedule, t.k, t.name, tuple(stacks), reason,
                       time.perf_counter() - t0)


@dataclass(frozen=True)
class CriticalDepth:
    c: int | None
    records: dict[int, TrainRecord]
    j_max: int

    @property
    def verdict(self) -> str:
        return str(self.c) if self.c is not None else f">{self.j_max}"


def find_critical_depth(layout: AnsatzLayout, t: TargetGate, j_range: Sequence[int],
                        schedule: StackSchedule, stop_at_first: bool = False) -> CriticalDepth:
    """Smallest ``j`` whose layer-wise run ends below ``schedule.success_tol``."""
    js = list(j_range)
    if not js:
        raise ValueError("empty j range")
    if any(b <= a for a, b in zip(js, js[1:])):
        raise ValueError("j range must be strictly ascending")
    records: dict[int, TrainRecord] = {}
    c = None
    for j in js:
        rec = train_layerwise(layout, j, t, replace(schedule, j=j))
        records[j] = rec
        if c is None and rec.final_cost < schedule.success_tol:
            c = j
            if stop_at_first:
                break
    return CriticalDepth(c, records, js[-1])
