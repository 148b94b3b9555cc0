from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from vqtrain.ansatz import (
    AnsatzLayout,
    LayoutError,
    checkerboard,
    checkerboard_layer,
    checkerboard_pairs,
    compile_stack,
    hea,
    hea_layer,
    param_derivative,
    param_mixed_derivative,
    param_second_derivative,
    stack_unitary,
)
from vqtrain.linalg import is_unitary

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def on(n, **ops):
    mats = [ops.get(f"w{q}", I2) for q in range(n)]
    return reduce(np.kron, mats)


def r(p, t):
    return expm(-1j * t * p)


def naive_hea(n, th, wrap=True):
    u = np.eye(2**n, dtype=complex)
    for w in range(n):
        z1, y, z2 = th[3 * w: 3 * w + 3]
        u = on(n, **{f"w{w}": r(Z, z2) @ r(Y, y) @ r(Z, z1)}) @ u
    chain = [(i, i + 1) for i in range(n - 1)] + ([(n - 1, 0)] if wrap and n > 1 else [])
    for m, (c, t) in enumerate(chain):
        g = on(n, **{f"w{c}": P0}) + on(n, **{f"w{c}": P1, f"w{t}": r(Y, th[3 * n + m])})
        u = g @ u
    return u


def naive_checkerboard(n, om):
    u = np.eye(2**n, dtype=complex)
    pairs = [(a, a + 1) for a in range(0, n - 1, 2)] + [(a, a + 1) for a in range(1, n - 1, 2)]
    for b, (a, c) in enumerate(pairs):
        xa, xb, zz, za, zb = om[5 * b: 5 * b + 5]
        u = on(n, **{f"w{a}": r(X, xa), f"w{c}": r(X, xb)}) @ u
        u = expm(-1j * zz * on(n, **{f"w{a}": Z, f"w{c}": Z})) @ u
        u = on(n, **{f"w{a}": r(Z, za), f"w{c}": r(Z, zb)}) @ u
    return u


def test_parameter_counts():
    assert hea(3).params_per_layer == 12
    assert hea(3, wrap=False).params_per_layer == 11
    assert hea(1).params_per_layer == 3
    assert checkerboard(3).params_per_layer == 10
    assert checkerboard(4).params_per_layer == 15
    assert hea(3).num_params(4) == 48


def test_checkerboard_pair_order():
    assert checkerboard_pairs(5) == [(0, 1), (2, 3), (1, 2), (3, 4)]
    assert checkerboard_pairs(2) == [(0, 1)]


def test_layout_validation():
    with pytest.raises(LayoutError):
        checkerboard(1)
    with pytest.raises(LayoutError):
        hea(0)


def test_layout_roundtrip():
    lay = hea(4, wrap=False)
    assert AnsatzLayout.from_dict(lay.to_dict()) == lay
    table = lay.param_table()
    assert table[1]["label"] == "Y[0]"
    assert lay.indices("D[") == list(range(12, 15))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("wrap", [True, False])
def test_hea_layer_matches_naive(n, wrap, rng):
    lay = hea(n, wrap)
    for _ in range(3):
        th = rng.uniform(0, 2 * np.pi, lay.params_per_layer)
        np.testing.assert_allclose(hea_layer(n, th, wrap), naive_hea(n, th, wrap), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_checkerboard_layer_matches_naive(n, rng):
    om = rng.uniform(0, 2 * np.pi, checkerboard(n).params_per_layer)
    np.testing.assert_allclose(checkerboard_layer(n, om), naive_checkerboard(n, om), atol=1e-12)


def test_stack_composes_later_layers_on_the_left(rng):
    lay = hea(3)
    p = rng.uniform(0, 2 * np.pi, lay.num_params(3))
    q = lay.params_per_layer
    ref = hea_layer(3, p[2 * q:]) @ hea_layer(3, p[q:2 * q]) @ hea_layer(3, p[:q])
    np.testing.assert_allclose(stack_unitary(lay, 3, p), ref, atol=1e-12)


def test_wrong_parameter_length():
    with pytest.raises(ValueError):
        hea_layer(3, np.zeros(11))


def test_batched_unitary_matches_single(rng):
    lay = checkerboard(3)
    circ = compile_stack(lay, 2)
    th = rng.uniform(0, 2 * np.pi, (5, circ.num_params))
    batch = circ.unitary(th)
    for b in range(5):
        np.testing.assert_allclose(batch[b], stack_unitary(lay, 2, th[b]), atol=1e-13)


@pytest.mark.parametrize("lay", [hea(2), hea(3), checkerboard(3), checkerboard(4)])
def test_unitarity_random_draws(lay, rng):
    th = rng.uniform(-10, 10, (20, lay.num_params(2)))
    for u in compile_stack(lay, 2).unitary(th):
        assert is_unitary(u, 1e-12)


@pytest.mark.parametrize("lay", [hea(3), checkerboard(3)])
def test_first_derivative_finite_difference(lay, rng):
    p = rng.uniform(0, 2 * np.pi, lay.num_params(2))
    h = 1e-6
    for j in range(0, p.size, 3):
        e = np.zeros_like(p)
        e[j] = h
        fd = (stack_unitary(lay, 2, p + e) - stack_unitary(lay, 2, p - e)) / (2 * h)
        np.testing.assert_allclose(param_derivative(lay, 2, p, j), fd, atol=1e-8)


@pytest.mark.parametrize("lay", [hea(3), checkerboard(3)])
def test_derivative_is_u_times_anti_hermitian(lay, rng):
    p = rng.uniform(0, 2 * np.pi, lay.num_params(1))
    u = stack_unitary(lay, 1, p)
    for j in range(p.size):
        a = u.conj().T @ param_derivative(lay, 1, p, j)
        np.testing.assert_allclose(a, -a.conj().T, atol=1e-12)


def test_checkerboard_second_derivative_is_minus_unitary(rng):
    # every checkerboard generator squares to the identity
    lay = checkerboard(4)
    p = rng.uniform(0, 2 * np.pi, lay.num_params(1))
    u = stack_unitary(lay, 1, p)
    for j in range(p.size):
        np.testing.assert_allclose(param_second_derivative(lay, 1, p, j), -u, atol=1e-12)


def test_second_and_mixed_derivatives_finite_difference(rng):
    lay = hea(2)
    p = rng.uniform(0, 2 * np.pi, lay.num_params(1))
    h = 1e-4
    i, j = 1, 6
    ei = np.zeros_like(p)
    ej = np.zeros_like(p)
    ei[i] = h
    ej[j] = h
    f = lambda x: stack_unitary(lay, 1, x)
    fd2 = (f(p + ej) - 2 * f(p) + f(p - ej)) / h**2
    np.testing.assert_allclose(param_second_derivative(lay, 1, p, j), fd2, atol=1e-6)
    fdm = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4 * h * h)
    np.testing.assert_allclose(param_mixed_derivative(lay, 1, p, i, j), fdm, atol=1e-6)


def test_zero_parameters_give_identity():
    np.testing.assert_allclose(hea_layer(3, np.zeros(12)), np.eye(8), atol=1e-15)
    np.testing.assert_allclose(checkerboard_layer(3, np.zeros(10)), np.eye(8), atol=1e-15)
