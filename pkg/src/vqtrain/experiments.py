"""Experiment drivers behind the command-line interface."""

from __future__ import annotations

import numpy as np

from .ansatz import AnsatzKind, AnsatzLayout, checkerboard, compile_stack, hea
from .cost import distance_gradient, distance_hessian_diag, finite_diff
from .io import histogram2d, params_hash
from .linalg import TargetGate, toffoli
from .trainer import StackSchedule, detect_identity_stall, find_critical_depth
from .variety import (
    Branch,
    Verdict,
    perturb,
    sample_checkerboard_variety,
    sample_hea_variety,
    verify_extremum,
)


def sample_single_layer(layout: AnsatzLayout, t: TargetGate, count: int, seed: int = 0,
                        inject: int = 0, chunk: int = 4096):
    """Distances of random single layers to the identity and to ``t``.

    Draws ``count`` uniform parameter vectors in ``[0, 2 pi)`` and then appends
    ``inject`` identity-variety points. Returns ``(d_identity, d_target, hashes)``.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    circ = compile_stack(layout, 1)
    dim = circ.dim
    params = rng.uniform(0.0, 2 * np.pi, (count, circ.num_params))
    if inject:
        extra = [_variety_point(layout, i, rng).params for i in range(inject)]
        params = np.vstack([params, extra])
    tdag = t.matrix.conj().T
    d_id = np.empty(params.shape[0])
    d_t = np.empty(params.shape[0])
    for lo in range(0, params.shape[0], chunk):
        u = circ.unitary(params[lo:lo + chunk])
        d_id[lo:lo + chunk] = 1.0 - np.abs(np.trace(u, axis1=-2, axis2=-1)) / dim
        d_t[lo:lo + chunk] = 1.0 - np.abs(np.einsum("ab,nba->n", tdag, u)) / dim
    np.clip(d_id, 0.0, 1.0, out=d_id)
    np.clip(d_t, 0.0, 1.0, out=d_t)
    return d_id, d_t, [params_hash(p) for p in params]


def _variety_point(layout, i, rng):
    if layout.kind is AnsatzKind.HEA:
        branch = Branch.HEA_A if i % 2 == 0 else Branch.HEA_B
        return sample_hea_variety(layout.n, branch, seed=rng, wrap=layout.wrap)
    return sample_checkerboard_variety(layout.n, seed=rng)


def sample_histogram(d_identity, d_target) -> np.ndarray:
    return histogram2d(d_identity, d_target)


def verify_extrema_batch(kind: AnsatzKind, n_values, points: int, seed: int = 0,
                         base_target=toffoli, perturb_eps: float = 0.0) -> dict:
    """Sample variety points per branch and qubit count and verify each one.

    With ``perturb_eps`` set, the first RY angle (HEA) or the first angle
    (checkerboard) of every point is shifted before verification.
    """
    rng = np.random.default_rng(seed)
    kind = AnsatzKind(kind)
    summary: dict = {"ansatz": kind.value, "points_per_branch": points,
                     "perturb": perturb_eps, "groups": [], "violations": []}
    branches = [Branch.HEA_A, Branch.HEA_B] if kind is AnsatzKind.HEA else [Branch.CHECKERBOARD_PI]
    confirmed = violated = 0
    max_grad = 0.0
    min_hess = np.inf
    max_valley = 0.0
    for n in n_values:
        t = base_target(n - 1)
        for br in branches:
            group = {"n": n, "branch": br.value, "confirmed": 0, "violation": 0,
                     "max_grad": 0.0, "min_hess": np.inf, "max_valley": 0.0}
            for _ in range(points):
                if br is Branch.CHECKERBOARD_PI:
                    pt = sample_checkerboard_variety(n, seed=rng)
                    idx = 0
                else:
                    pt = sample_hea_variety(n, br, seed=rng)
                    idx = 1
                if perturb_eps:
                    pt = perturb(pt, idx, perturb_eps)
                rep = verify_extremum(pt, t)
                ok = rep.verdict is Verdict.CONFIRMED
                group["confirmed" if ok else "violation"] += 1
                group["max_grad"] = max(group["max_grad"], rep.grad_max_abs)
                group["min_hess"] = min(group["min_hess"], float(np.min(rep.hess_diag)))
                vmax = max((abs(v["second_derivative"]) for v in rep.valley_directions), default=0.0)
                group["max_valley"] = max(group["max_valley"], vmax)
                if not ok:
                    summary["violations"].append(
                        {"n": n, "branch": br.value, "params": pt.params.tolist(),
                         "detail": rep.detail})
            confirmed += group["confirmed"]
            violated += group["violation"]
            max_grad = max(max_grad, group["max_grad"])
            min_hess = min(min_hess, group["min_hess"])
            max_valley = max(max_valley, group["max_valley"])
            summary["groups"].append(group)
    summary.update(confirmed=confirmed, violation=violated, max_grad=max_grad,
                   min_hess=float(min_hess), max_valley=max_valley)
    return summary


def relative_error(analytic, reference, floor: float = 1e-3) -> float:
    """max|a - r| / max(max|r|, floor)."""
    analytic = np.asarray(analytic)
    reference = np.asarray(reference)
    return float(np.max(np.abs(analytic - reference)) / max(np.max(np.abs(reference)), floor))


def gradcheck(cases: int = 200, seed: int = 0, h: float = 1e-5, tol: float = 1e-6,
              n_values=(2, 3, 4), strict: bool = False, second_h: float = 1e-4) -> dict:
    """Compare analytic gradients with central finite differences.

    Cases alternate between the two ansatze, cycle through ``n_values`` and
    use one or two layers; every third case also has a random frozen prefix.
    Case 0 is the all-zero parameter point. With ``strict`` the Hessian
    diagonal is checked against second differences (step ``second_h``) too.
    """
    from scipy.stats import unitary_group

    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_hess = 0.0
    rows = []
    for c in range(cases):
        layout = (hea if c % 2 == 0 else checkerboard)(n_values[(c // 2) % len(n_values)])
        layers = 1 + (c // 6) % 2
        p = layout.num_params(layers)
        params = np.zeros(p) if c == 0 else rng.uniform(0, 2 * np.pi, p)
        prefix = unitary_group.rvs(layout.dim, random_state=rng) if c % 3 == 2 else None
        t = toffoli(layout.n - 1)
        g = distance_gradient(layout, layers, params, prefix, t)
        fd = finite_diff(layout, layers, params, prefix, t, order=1, h=h)
        err = relative_error(g, fd)
        row = {"case": c, "ansatz": layout.kind.value, "n": layout.n, "layers": layers,
               "rel_err": err}
        if strict:
            hd = distance_hessian_diag(layout, layers, params, prefix, t)
            fd2 = finite_diff(layout, layers, params, prefix, t, order=2, h=second_h)
            row["hess_abs_err"] = float(np.max(np.abs(hd - fd2)))
            worst_hess = max(worst_hess, row["hess_abs_err"])
        worst = max(worst, err)
        rows.append(row)
    passed = worst < tol and (not strict or worst_hess < tol)
    out = {"cases": cases, "h": h, "tol": tol, "max_rel_err": worst, "passed": passed,
           "strict": strict, "details": rows}
    if strict:
        out["max_hess_abs_err"] = worst_hess
    return out


def sweep(layout_kind: AnsatzKind, k_values, j_values, schedule: StackSchedule,
          base_target=toffoli, wrap: bool = True):
    """Layer-wise runs for every (k, j). Returns ``(rows, {k: CriticalDepth})``."""
    rows = []
    results = {}
    for k in k_values:
        layout = AnsatzLayout(layout_kind, k + 1, wrap)
        t = base_target(k)
        cd = find_critical_depth(layout, t, j_values, schedule)
        results[k] = cd
        for j in j_values:
            rec = cd.records[j]
            stalled = detect_identity_stall(rec, None, schedule.tol_id, schedule.stall_window)
            rows.append((k, k + 1, j, schedule.seed, rec.final_cost,
                         rec.final_cost / 2.0**-k, stalled, cd.verdict))
    return rows, results
