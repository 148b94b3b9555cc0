"""Dense complex matrices and the primitive gate kit.

Conventions used everywhere in the package:

* Rotations are full-angle, ``R_sigma(theta) = exp(-i * theta * sigma)``.
  There is no factor of one half.
* Wire 0 is the most significant tensor factor, so ``embed_gate(X, [0], 2)``
  equals ``kron(X, I2)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PROJ_0 = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ_1 = np.array([[0, 0], [0, 1]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

UNITARY_TOL = 1e-10


class InvalidGateError(ValueError):
    """Raised for gate specs that cannot be turned into a matrix."""


class DimensionError(ValueError):
    """Raised when matrix shapes do not fit together."""


class GateKind(str, enum.Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    RZZ = "RZZ"
    CRY = "CRY"
    CNOT = "CNOT"
    PAULI_X = "PAULI_X"
    PAULI_Y = "PAULI_Y"
    PAULI_Z = "PAULI_Z"
    CONTROLLED = "CONTROLLED"


PARAMETRIC_KINDS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ, GateKind.CRY})


@dataclass(frozen=True)
class GateSpec:
    """A single gate: its kind, optional angle and the wires it acts on.

    For ``CONTROLLED`` the 2x2 ``base`` matrix is required and ``wires`` lists
    the controls followed by the target.
    """

    kind: GateKind
    angle: float | None = None
    wires: tuple[int, ...] = ()
    base: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))


def generator(kind: GateKind) -> np.ndarray:
    """Hermitian ``H`` with ``gate(theta) = exp(-i * theta * H)``.

    Every generator here satisfies ``H^3 = H``, which is what makes the closed
    form in :func:`rotation` exact.
    """
    kind = GateKind(kind)
    if kind is GateKind.RX:
        return PAULI_X
    if kind is GateKind.RY:
        return PAULI_Y
    if kind is GateKind.RZ:
        return PAULI_Z
    if kind is GateKind.RZZ:
        return np.kron(PAULI_Z, PAULI_Z)
    if kind is GateKind.CRY:
        return np.kron(PROJ_1, PAULI_Y)
    raise InvalidGateError(f"{kind.value} has no rotation generator")


def rotation(h: np.ndarray, theta: float) -> np.ndarray:
    """exp(-i theta h) for a Hermitian h with h^3 = h."""
    h2 = h @ h
    eye = np.eye(h.shape[0], dtype=complex)
    return eye + (np.cos(theta) - 1.0) * h2 - 1j * np.sin(theta) * h


def make_gate(spec: GateSpec) -> np.ndarray:
    """Return the 2x2 / 4x4 (or 2^(k+1) for ``CONTROLLED``) unitary of a gate."""
    kind = spec.kind
    if kind in PARAMETRIC_KINDS:
        if spec.angle is None:
            raise InvalidGateError(f"{kind.value} needs an angle")
        return rotation(generator(kind), float(spec.angle))
    if kind is GateKind.CNOT:
        return CNOT.copy()
    if kind is GateKind.PAULI_X:
        return PAULI_X.copy()
    if kind is GateKind.PAULI_Y:
        return PAULI_Y.copy()
    if kind is GateKind.PAULI_Z:
        return PAULI_Z.copy()
    if kind is GateKind.CONTROLLED:
        if spec.base is None or len(spec.wires) < 2:
            raise InvalidGateError("CONTROLLED needs a base matrix and >= 2 wires")
        return make_target(spec.base, len(spec.wires) - 1).matrix
    raise InvalidGateError(f"unknown gate kind {kind!r}")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def embed_gate(g: np.ndarray, wires: Sequence[int], n: int) -> np.ndarray:
    """Lift ``g`` acting on ``wires`` (in that order) to the full 2^n space.

    Wires need not be adjacent or sorted; ``wires[0]`` is the most significant
    qubit of ``g``'s own basis.
    """
    wires = [int(w) for w in wires]
    k = len(wires)
    if g.shape != (2**k, 2**k):
        raise DimensionError(f"gate of shape {g.shape} cannot act on {k} wires")
    if len(set(wires)) != k or any(w < 0 or w >= n for w in wires):
        raise DimensionError(f"wires {wires} invalid for n={n}")
    rest = [w for w in range(n) if w not in wires]
    # Act as g (x) I on the permuted order wires + rest, then undo the permutation.
    order = wires + rest
    big = np.kron(g, np.eye(2 ** (n - k), dtype=complex))
    t = big.reshape([2] * (2 * n))
    inv = np.argsort(order)
    axes = list(inv) + [n + i for i in inv]
    return t.transpose(axes).reshape(2**n, 2**n)


def hs_overlap(a: np.ndarray, b: np.ndarray) -> complex:
    """Tr(a^dagger b), unnormalised."""
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < tol)


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class TargetGate:
    """A k-controlled single-qubit operation, ``I_{2^(k+1)-2} (+) base``."""

    matrix: np.ndarray
    k: int
    base: np.ndarray
    name: str = ""

    @property
    def n(self) -> int:
        return self.k + 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def make_target(base: np.ndarray, k: int, name: str = "") -> TargetGate:
    """Build the k-controlled version of ``base`` (controls on wires 0..k-1)."""
    base = np.asarray(base, dtype=complex)
    if k < 1:
        raise InvalidGateError("need at least one control")
    if base.shape != (2, 2) or not is_unitary(base):
        raise InvalidGateError("base must be a 2x2 unitary")
    dim = 2 ** (k + 1)
    m = np.eye(dim, dtype=complex)
    m[-2:, -2:] = base
    m.setflags(write=False)
    return TargetGate(matrix=m, k=k, base=base, name=name)


def toffoli(k: int) -> TargetGate:
    """The k-Toffoli gate, i.e. the k-controlled X."""
    return make_target(PAULI_X, k, name=f"{k}-toffoli")


def identity_target(k: int) -> TargetGate:
    return make_target(I2, k, name="identity")


BASE_GATES = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z, "I": I2}


def target_from_name(base: str, k: int) -> TargetGate:
    try:
        b = BASE_GATES[base.upper()]
    except KeyError:
        raise InvalidGateError(f"unknown base gate {base!r}") from None
    return make_target(b, k, name=f"{k}-toffoli" if base.upper() == "X" else f"C{k}-{base.upper()}")
