import numpy as np
import pytest

from vqtrain.ansatz import checkerboard, hea, stack_unitary
from vqtrain.cost import distance
from vqtrain.linalg import GateKind, GateSpec, make_gate, toffoli
from vqtrain.variety import (
    Branch,
    Verdict,
    hea_variety_params,
    identity_deviation,
    is_identity_up_to_phase,
    operator_schmidt_rank,
    perturb,
    sample_checkerboard_variety,
    sample_hea_variety,
    valley_directions,
    verify_extremum,
)


@pytest.mark.parametrize("branch", [Branch.HEA_A, Branch.HEA_B])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_hea_variety_points_are_identity(branch, n, rng):
    for _ in range(10):
        pt = sample_hea_variety(n, branch, seed=rng)
        assert is_identity_up_to_phase(stack_unitary(hea(n), 1, pt.params)) is not None


def test_branch_b_cry_is_local():
    # CRY at an odd multiple of pi acts as Z on the control: operator Schmidt rank 1
    g = make_gate(GateSpec(GateKind.CRY, -np.pi, (0, 1)))
    assert operator_schmidt_rank(g) == 1
    np.testing.assert_allclose(g, np.kron(np.diag([1, -1]), np.eye(2)), atol=1e-15)
    assert operator_schmidt_rank(make_gate(GateSpec(GateKind.CRY, 0.3, (0, 1)))) == 2


def test_hea_variety_without_wrap():
    params = hea_variety_params(3, Branch.HEA_B, [0.1, 0.2, 0.3], [1, 0, -1], [0, 1, 2], [0, 1],
                                wrap=False)
    assert identity_deviation(stack_unitary(hea(3, wrap=False), 1, params)) < 1e-12


def test_checkerboard_variety(rng):
    for n in (2, 3, 4, 5):
        pt = sample_checkerboard_variety(n, seed=rng)
        assert np.allclose(np.mod(pt.params, np.pi), 0) | np.allclose(np.mod(pt.params, np.pi), np.pi)
        assert identity_deviation(stack_unitary(checkerboard(n), 1, pt.params)) < 1e-12


def test_identity_up_to_phase():
    assert is_identity_up_to_phase(1j * np.eye(4)) == pytest.approx(np.pi / 2)
    assert is_identity_up_to_phase(np.diag([1, -1])) is None
    assert is_identity_up_to_phase(np.zeros((2, 2))) is None


def test_valley_directions_leave_layer_unchanged(rng):
    pt = sample_hea_variety(3, Branch.HEA_A, seed=rng)
    u0 = stack_unitary(hea(3), 1, pt.params)
    for a, b in valley_directions(hea(3)):
        p = pt.params.copy()
        p[a] += 0.7
        p[b] -= 0.7
        np.testing.assert_allclose(stack_unitary(hea(3), 1, p), u0, atol=1e-12)
    assert valley_directions(checkerboard(3)) == []


@pytest.mark.parametrize("branch", [Branch.HEA_A, Branch.HEA_B])
def test_hea_points_confirmed(branch, rng):
    for n in (2, 3, 4):
        pt = sample_hea_variety(n, branch, seed=rng)
        rep = verify_extremum(pt, toffoli(n - 1))
        assert rep.verdict is Verdict.CONFIRMED, rep.detail
        assert rep.distance == pytest.approx(2.0 ** -(n - 1), abs=1e-12)
        if n > 2:
            lay = hea(n)
            strict = lay.indices("Y[") + lay.indices("D[")
            assert np.all(rep.hess_diag[strict] > 0)


def test_two_qubit_flat_directions(rng):
    # with a CNOT target some single-parameter directions are exactly flat,
    # so the curvature there is zero rather than positive
    t = toffoli(1)
    pt = sample_hea_variety(2, Branch.HEA_B, seed=rng)
    i = hea(2).indices("D[0->1]")[0]
    pc = sample_checkerboard_variety(2, seed=rng)
    j = checkerboard(2).indices("Z[0|")[0]
    for point, idx, lay in ((pt, i, hea(2)), (pc, j, checkerboard(2))):
        for s in (0.3, 1.1, 2.5):
            p = point.params.copy()
            p[idx] += s
            assert distance(stack_unitary(lay, 1, p), t) == pytest.approx(0.5, abs=1e-14)
        assert abs(verify_extremum(point, t).hess_diag[idx]) < 1e-14


def test_checkerboard_points_confirmed(rng):
    pt = sample_checkerboard_variety(4, seed=rng)
    rep = verify_extremum(pt, toffoli(3))
    assert rep.verdict is Verdict.CONFIRMED
    assert np.all(rep.hess_diag > 0)


def test_perturbed_point_is_violation(rng):
    pt = sample_hea_variety(3, Branch.HEA_A, seed=rng)
    rep = verify_extremum(perturb(pt, 1, 1e-3), toffoli(2))
    assert rep.verdict is Verdict.VIOLATION
    assert "gradient" in rep.detail
    assert rep.to_dict()["verdict"] == "VIOLATION"


def test_sampling_is_seeded():
    a = sample_hea_variety(3, Branch.HEA_B, seed=7)
    b = sample_hea_variety(3, Branch.HEA_B, seed=7)
    np.testing.assert_array_equal(a.params, b.params)
