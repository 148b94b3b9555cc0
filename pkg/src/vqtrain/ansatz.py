"""Hardware-efficient and checkerboard ansatz layers as dense unitaries.

A layout describes one layer as an ordered list of parameterised gates, in
circuit-time order. Parameter ``i`` of a layer always drives gate ``i``, so the
canonical parameter order and the time order coincide:

* HEA: for each wire ``(Z1, Y, Z2)``, then the CRY chain
  ``0->1, 1->2, ..., (n-2)->(n-1)`` and, with ``wrap``, ``(n-1)->0``.
* Checkerboard: blocks on pairs ``(0,1), (2,3), ...`` then ``(1,2), (3,4), ...``;
  each block is ``RX a, RX b, RZZ ab, RZ a, RZ b``.

Stacks multiply layers in circuit time: layer ``i+1`` left-multiplies layer ``i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .linalg import GateKind, embed_gate, generator


class AnsatzKind(str, enum.Enum):
    HEA = "hea"
    CHECKERBOARD = "checkerboard"


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Op:
    """One parameterised gate of a layer."""

    kind: GateKind
    wires: tuple[int, ...]
    label: str


def _hea_ops(n: int, wrap: bool) -> tuple[Op, ...]:
    ops = []
    for w in range(n):
        ops.append(Op(GateKind.RZ, (w,), f"Z1[{w}]"))
        ops.append(Op(GateKind.RY, (w,), f"Y[{w}]"))
        ops.append(Op(GateKind.RZ, (w,), f"Z2[{w}]"))
    chain = [(i, i + 1) for i in range(n - 1)]
    if wrap and n >= 2:
        chain.append((n - 1, 0))
    for c, t in chain:
        ops.append(Op(GateKind.CRY, (c, t), f"D[{c}->{t}]"))
    return tuple(ops)


def checkerboard_pairs(n: int) -> list[tuple[int, int]]:
    """Block pairs of one checkerboard layer in time order."""
    first = [(a, a + 1) for a in range(0, n - 1, 2)]
    second = [(a, a + 1) for a in range(1, n - 1, 2)]
    return first + second


def _checkerboard_ops(n: int) -> tuple[Op, ...]:
    ops = []
    for a, b in checkerboard_pairs(n):
        ops.append(Op(GateKind.RX, (a,), f"X[{a}|{a}{b}]"))
        ops.append(Op(GateKind.RX, (b,), f"X[{b}|{a}{b}]"))
        ops.append(Op(GateKind.RZZ, (a, b), f"ZZ[{a}{b}]"))
        ops.append(Op(GateKind.RZ, (a,), f"Z[{a}|{a}{b}]"))
        ops.append(Op(GateKind.RZ, (b,), f"Z[{b}|{a}{b}]"))
    return tuple(ops)


@dataclass(frozen=True)
class AnsatzLayout:
    """Declarative description of one layer of an ansatz family."""

    kind: AnsatzKind
    n: int
    wrap: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", AnsatzKind(self.kind))
        if self.kind is AnsatzKind.HEA and self.n < 1:
            raise LayoutError("HEA needs n >= 1")
        if self.kind is AnsatzKind.CHECKERBOARD and self.n < 2:
            raise LayoutError("checkerboard needs n >= 2")

    @cached_property
    def ops(self) -> tuple[Op, ...]:
        if self.kind is AnsatzKind.HEA:
            return _hea_ops(self.n, self.wrap)
        return _checkerboard_ops(self.n)

    @property
    def params_per_layer(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return 2**self.n

    def num_params(self, layers: int) -> int:
        return layers * self.params_per_layer

    def param_table(self) -> list[dict]:
        """Per-parameter metadata: index, gate kind, generator name and wires."""
        gen_names = {
            GateKind.RX: "X",
            GateKind.RY: "Y",
            GateKind.RZ: "Z",
            GateKind.RZZ: "ZZ",
            GateKind.CRY: "|1><1|Y",
        }
        return [
            {"index": i, "label": op.label, "kind": op.kind.value,
             "generator": gen_names[op.kind], "wires": list(op.wires)}
            for i, op in enumerate(self.ops)
        ]

    def indices(self, prefix: str) -> list[int]:
        """Layer-local indices of parameters whose label starts with ``prefix``."""
        return [i for i, op in enumerate(self.ops) if op.label.startswith(prefix)]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n": self.n, "wrap": self.wrap,
                "params_per_layer": self.params_per_layer}

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzLayout":
        return cls(AnsatzKind(d["kind"]), int(d["n"]), bool(d.get("wrap", True)))


def hea(n: int, wrap: bool = True) -> AnsatzLayout:
    return AnsatzLayout(AnsatzKind.HEA, n, wrap)


def checkerboard(n: int) -> AnsatzLayout:
    return AnsatzLayout(AnsatzKind.CHECKERBOARD, n)


class CompiledCircuit:
    """A fixed sequence of ``exp(-i theta H)`` gates lifted to 2^n dimensions.

    Holds the embedded generators ``H`` and ``H^2`` of every gate, so that a
    gate is ``I + (cos t - 1) H^2 - i sin t H`` and its derivatives are obtained
    by inserting ``(-i H)^order`` next to it.
    """

    def __init__(self, n: int, ops: Sequence[Op]):
        self.n = n
        self.dim = 2**n
        self.ops = tuple(ops)
        if not self.ops:
            raise LayoutError("empty circuit")
        self.h = np.stack([embed_gate(generator(op.kind), op.wires, n) for op in self.ops])
        self.h2 = self.h @ self.h
        self.eye = np.eye(self.dim, dtype=complex)
        for arr in (self.h, self.h2):
            arr.setflags(write=False)

    @property
    def num_params(self) -> int:
        return len(self.ops)

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.num_params:
            raise LayoutError(f"expected {self.num_params} parameters, got {theta.shape[-1]}")
        return theta

    def gates(self, theta) -> np.ndarray:
        """Gate matrices, shape ``theta.shape + (dim, dim)``."""
        theta = self._check(theta)
        c = np.cos(theta)[..., None, None]
        s = np.sin(theta)[..., None, None]
        return self.eye + (c - 1.0) * self.h2 - 1j * s * self.h

    def unitary(self, theta) -> np.ndarray:
        g = self.gates(theta)
        u = g[..., 0, :, :]
        for i in range(1, self.num_params):
            u = g[..., i, :, :] @ u
        return u

    def derivative(self, theta, orders: dict[int, int]) -> np.ndarray:
        """Unitary with ``(-i H_j)^k`` inserted after gate ``j`` for each ``j: k``."""
        theta = self._check(theta)
        g = self.gates(theta)
        u = np.broadcast_to(self.eye, g.shape[:-3] + (self.dim, self.dim)).copy()
        for i in range(self.num_params):
            u = g[..., i, :, :] @ u
            k = orders.get(i, 0)
            if k:
                u = np.linalg.matrix_power(-1j * self.h[i], k) @ u
        return u

    def overlaps(self, theta, target: np.ndarray, prefix: np.ndarray | None = None,
                 second: bool = False):
        """Overlap ``z = Tr(T^dag C L)`` and its per-parameter derivatives.

        ``C`` is this circuit at ``theta`` (any leading batch shape) and ``L`` a
        fixed unitary applied before it. Returns ``(z, dz)`` or
        ``(z, dz, d2z)`` with ``dz[..., j] = Tr(T^dag dC/dtheta_j L)``.
        """
        theta = self._check(theta)
        g = self.gates(theta)
        batch = g.shape[:-3]
        p = self.num_params
        f = np.empty((p,) + batch + (self.dim, self.dim), dtype=complex)
        cur = self.eye if prefix is None else np.asarray(prefix, dtype=complex)
        for i in range(p):
            cur = g[..., i, :, :] @ cur
            f[i] = cur
        k = np.empty_like(f)
        cur = np.broadcast_to(np.asarray(target, dtype=complex).conj().T, f.shape[1:])
        for i in range(p - 1, -1, -1):
            k[i] = cur
            cur = cur @ g[..., i, :, :]
        z = np.einsum("...ab,...ba->...", k[-1], f[-1])
        hshape = (p,) + (1,) * len(batch) + (self.dim, self.dim)
        kt = np.swapaxes(k, -1, -2)
        dz = -1j * np.einsum("p...ab,p...ab->p...", kt, self.h.reshape(hshape) @ f)
        dz = np.moveaxis(dz, 0, -1)
        if not second:
            return z, dz
        d2z = -np.einsum("p...ab,p...ab->p...", kt, self.h2.reshape(hshape) @ f)
        return z, dz, np.moveaxis(d2z, 0, -1)


@lru_cache(maxsize=64)
def compile_stack(layout: AnsatzLayout, layers: int) -> CompiledCircuit:
    """Compiled circuit of ``layers`` repetitions of ``layout``."""
    if layers < 1:
        raise LayoutError("need at least one layer")
    return CompiledCircuit(layout.n, layout.ops * layers)


def _check_len(params, expected: int) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.ndim != 1 or params.shape[0] != expected:
        raise LayoutError(f"expected {expected} parameters, got shape {params.shape}")
    return params


def hea_layer(n: int, theta, wrap: bool = True) -> np.ndarray:
    layout = hea(n, wrap)
    theta = _check_len(theta, layout.params_per_layer)
    return compile_stack(layout, 1).unitary(theta)


def checkerboard_layer(n: int, omega) -> np.ndarray:
    if n < 2:
        raise LayoutError("checkerboard needs n >= 2")
    layout = checkerboard(n)
    omega = _check_len(omega, layout.params_per_layer)
    return compile_stack(layout, 1).unitary(omega)


def stack_unitary(layout: AnsatzLayout, layers: int, params) -> np.ndarray:
    params = _check_len(params, layout.num_params(layers))
    return compile_stack(layout, layers).unitary(params)


def _check_index(layout, layers, j):
    if not 0 <= j < layout.num_params(layers):
        raise IndexError(f"parameter index {j} out of range")


def param_derivative(layout: AnsatzLayout, layers: int, params, j: int) -> np.ndarray:
    """Exact dU/dtheta_j of the stack."""
    params = _check_len(params, layout.num_params(layers))
    _check_index(layout, layers, j)
    return compile_stack(layout, layers).derivative(params, {j: 1})


def param_second_derivative(layout: AnsatzLayout, layers: int, params, j: int) -> np.ndarray:
    """Exact d^2U/dtheta_j^2 of the stack."""
    params = _check_len(params, layout.num_params(layers))
    _check_index(layout, layers, j)
    return compile_stack(layout, layers).derivative(params, {j: 2})


def param_mixed_derivative(layout: AnsatzLayout, layers: int, params, i: int, j: int) -> np.ndarray:
    """Exact d^2U/(dtheta_i dtheta_j)."""
    params = _check_len(params, layout.num_params(layers))
    _check_index(layout, layers, i)
    _check_index(layout, layers, j)
    orders = {i: 1} if i != j else {i: 2}
    if i != j:
        orders[j] = 1
    return compile_stack(layout, layers).derivative(params, orders)
