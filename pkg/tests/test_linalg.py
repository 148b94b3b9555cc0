import numpy as np
import pytest
from scipy.linalg import expm

from vqtrain.linalg import (
    CNOT,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionError,
    GateKind,
    GateSpec,
    InvalidGateError,
    embed_gate,
    generator,
    hs_overlap,
    is_unitary,
    make_gate,
    make_target,
    num_qubits,
    target_from_name,
    toffoli,
)


@pytest.mark.parametrize("kind", [GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ, GateKind.CRY])
def test_rotation_matches_matrix_exponential(kind, rng):
    h = generator(kind)
    np.testing.assert_allclose(h @ h @ h, h, atol=1e-15)
    for theta in rng.uniform(-7, 7, 5):
        g = make_gate(GateSpec(kind, theta, tuple(range(h.shape[0] // 2))))
        np.testing.assert_allclose(g, expm(-1j * theta * h), atol=1e-13)


def test_full_angle_convention():
    # R_X(pi/2) is -iX with the full-angle convention
    g = make_gate(GateSpec(GateKind.RX, np.pi / 2, (0,)))
    np.testing.assert_allclose(g, -1j * PAULI_X, atol=1e-15)


def test_cry_block_structure():
    theta = 0.37
    g = make_gate(GateSpec(GateKind.CRY, theta, (0, 1)))
    np.testing.assert_allclose(g[:2, :2], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(g[2:, 2:], expm(-1j * theta * PAULI_Y), atol=1e-15)
    np.testing.assert_allclose(g[:2, 2:], 0, atol=1e-15)


def test_cry_equals_cnot_decomposition():
    # CRY(t) = RY(t/2)_b CNOT RY(-t/2)_b CNOT in full-angle units
    t = 1.234
    ry = lambda a: expm(-1j * a * PAULI_Y)
    i2 = np.eye(2)
    ref = np.kron(i2, ry(t / 2)) @ CNOT @ np.kron(i2, ry(-t / 2)) @ CNOT
    np.testing.assert_allclose(make_gate(GateSpec(GateKind.CRY, t, (0, 1))), ref, atol=1e-14)


def test_missing_angle_raises():
    with pytest.raises(InvalidGateError):
        make_gate(GateSpec(GateKind.RY, None, (0,)))


def _embed_oracle(g, wires, n):
    # element-wise construction over computational basis states
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    k = len(wires)
    for r in range(dim):
        rb = [(r >> (n - 1 - q)) & 1 for q in range(n)]
        for c in range(dim):
            cb = [(c >> (n - 1 - q)) & 1 for q in range(n)]
            if any(rb[q] != cb[q] for q in range(n) if q not in wires):
                continue
            gi = sum(rb[w] << (k - 1 - i) for i, w in enumerate(wires))
            gj = sum(cb[w] << (k - 1 - i) for i, w in enumerate(wires))
            out[r, c] = g[gi, gj]
    return out


@pytest.mark.parametrize("wires", [(0,), (2,), (0, 1), (1, 0), (2, 0), (0, 3), (3, 1)])
def test_embed_gate_against_elementwise_oracle(wires, rng):
    n = 4
    k = len(wires)
    g = rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k))
    np.testing.assert_allclose(embed_gate(g, wires, n), _embed_oracle(g, wires, n), atol=1e-14)


def test_embed_wire_zero_is_most_significant():
    np.testing.assert_allclose(embed_gate(PAULI_Z, (0,), 2), np.kron(PAULI_Z, np.eye(2)))


def test_embed_rejects_bad_wires():
    with pytest.raises(DimensionError):
        embed_gate(PAULI_X, (3,), 2)
    with pytest.raises(DimensionError):
        embed_gate(CNOT, (1, 1), 3)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_toffoli_flips_last_bit_when_controls_set(k):
    n = k + 1
    t = toffoli(k).matrix
    dim = 2**n
    perm = np.zeros((dim, dim))
    for b in range(dim):
        out = b ^ 1 if (b >> 1) == (1 << k) - 1 else b
        perm[out, b] = 1
    np.testing.assert_array_equal(t.real, perm)
    assert is_unitary(t)


def test_controlled_targets():
    cz = target_from_name("Z", 1).matrix
    np.testing.assert_allclose(cz, np.diag([1, 1, 1, -1]))
    np.testing.assert_allclose(make_target(PAULI_Y, 2).matrix[-2:, -2:], PAULI_Y)
    with pytest.raises(InvalidGateError):
        make_target(2 * PAULI_X, 1)
    with pytest.raises(InvalidGateError):
        target_from_name("H", 1)


def test_hs_overlap_is_trace(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_allclose(hs_overlap(a, b), np.trace(a.conj().T @ b))


def test_num_qubits():
    assert num_qubits(8) == 3
    with pytest.raises(DimensionError):
        num_qubits(6)
