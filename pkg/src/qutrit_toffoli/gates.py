"""Gate set and circuits for the qutrit-assisted Toffoli sequence.

The register holds three transmons A, B, C operated as three-level sites.
Two primitives generate everything here:

* single-site rotations exp(-i angle sigma_axis / 2) acting on levels
  {0, 1} and leaving level 2 untouched (8 ns for x/y pulses, 0 ns for
  virtual z rotations);

* an exchange rotation on the ordered two-level subspace {|11>, |20>} of an
  adjacent pair, R(theta) = cos(theta/2) 1 + i sin(theta/2) X, so a theta=pi
  pulse maps |11> -> +i|20>.  A full period costs 14 ns on pair (A, B) and
  23 ns on pair (B, C).

The doubly-controlled phase circuit is the three-pulse sequence
theta=pi on (A, B), theta=2*pi on (B, C), theta=3*pi on (A, B); conjugating
the last site with y-rotations of -+ pi/2 turns it into a Toffoli that acts
as an exact X on C when A and B are in |0> and |1> respectively.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import pi

import numpy as np

from .register import (
    ATOL,
    PAULI,
    DensityOperator,
    LocalOperator,
    RegisterLayout,
    StateVector,
    computational_indices,
    embed,
    site_index,
)

QUTRIT3 = RegisterLayout.qutrits(3)
QUBIT3 = RegisterLayout.qubits(3)

XY_PULSE_NS = 8.0
# Duration of a theta = pi exchange pulse per adjacent pair.
EXCHANGE_PI_NS = {(0, 1): 7.0, (1, 2): 11.5}


def rotation_matrix_qubit(axis: str, angle: float) -> np.ndarray:
    """2x2 rotation exp(-i angle sigma_axis / 2)."""
    axis = axis.lower()
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    sigma = PAULI[axis.upper()]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * sigma


def rotation_matrix_qutrit(axis: str, angle: float) -> np.ndarray:
    """3x3 embedding of the qubit rotation: identity on level 2."""
    mat = np.eye(3, dtype=complex)
    mat[:2, :2] = rotation_matrix_qubit(axis, angle)
    return mat


def exchange_matrix(pair: tuple[int, int], theta: float) -> np.ndarray:
    """9x9 rotation of the {|11>, |20>} subspace of an adjacent qutrit pair."""
    pair_layout = RegisterLayout.qutrits(2)
    i11 = pair_layout.basis_index((1, 1))
    i20 = pair_layout.basis_index((2, 0))
    mat = np.eye(9, dtype=complex)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    mat[i11, i11] = c
    mat[i20, i20] = c
    mat[i11, i20] = 1j * s
    mat[i20, i11] = 1j * s
    return mat


@dataclass(frozen=True, eq=False)
class GateOp:
    """One pulse: a unitary on its target sites plus its wall-clock cost."""

    label: str
    unitary: LocalOperator
    duration_ns: float
    angle: float | None = None

    def __post_init__(self) -> None:
        mat = self.unitary.matrix
        if np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))) >= ATOL:
            raise ValueError(f"gate {self.label!r} is not unitary")
        if self.duration_ns < 0:
            raise ValueError("duration must be non-negative")

    @property
    def targets(self) -> tuple[int, ...]:
        return self.unitary.targets


def rotation_single(site: int | str, axis: str, angle: float) -> GateOp:
    """Single-site rotation pulse; z rotations are virtual and take no time."""
    axis = axis.lower()
    op = LocalOperator((site_index(site),), rotation_matrix_qutrit(axis, angle))
    duration = 0.0 if axis == "z" else XY_PULSE_NS
    return GateOp(label=f"r{axis}", unitary=op, duration_ns=duration, angle=float(angle))


def subspace_rotation(pair, theta: float) -> GateOp:
    """Exchange pulse R(theta) on the {|11>, |20>} subspace of ``pair``.

    ``pair`` may be given as site indices or letters; only the adjacent
    pairs (A, B) and (B, C) are driven on this device.
    """
    sites = tuple(site_index(s) for s in pair)
    if sites not in EXCHANGE_PI_NS:
        raise ValueError(f"exchange pulses exist only for adjacent pairs, got {pair!r}")
    if theta < 0:
        raise ValueError("rotation angle must be non-negative")
    op = LocalOperator(sites, exchange_matrix(sites, theta))
    duration = EXCHANGE_PI_NS[sites] * theta / pi
    name = "AB" if sites == (0, 1) else "BC"
    return GateOp(label=f"xx{name}", unitary=op, duration_ns=duration, angle=float(theta))


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ordered pulse sequence on a fixed register layout."""

    layout: RegisterLayout
    ops: tuple[GateOp, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            for t in op.targets:
                self.layout.site(t)

    @property
    def duration_ns(self) -> float:
        return float(sum(op.duration_ns for op in self.ops))

    def unitary(self) -> np.ndarray:
        total = np.eye(self.layout.dim, dtype=complex)
        for op in self.ops:
            total = embed(op.unitary, self.layout) @ total
        return total

    def trajectory(self, initial: StateVector) -> tuple[StateVector, ...]:
        """States after each pulse, starting from ``initial`` (not included)."""
        if initial.layout != self.layout:
            raise ValueError("initial state layout does not match circuit layout")
        states = []
        state = initial
        for op in self.ops:
            state = state.apply(op.unitary)
            states.append(state)
        return tuple(states)

    def to_json_dict(self) -> dict:
        return {
            "dims": list(self.layout.dims),
            "total_duration_ns": self.duration_ns,
            "ops": [
                {
                    "label": op.label,
                    "targets": [self.layout.labels[t] for t in op.targets],
                    "angle": op.angle,
                    "duration_ns": op.duration_ns,
                }
                for op in self.ops
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def ccphase_circuit() -> Circuit:
    """Three exchange pulses realizing diag(1,1,1,-1,1,1,1,1) on the qubit block."""
    return Circuit(
        QUTRIT3,
        (
            subspace_rotation((0, 1), pi),
            subspace_rotation((1, 2), 2 * pi),
            subspace_rotation((0, 1), 3 * pi),
        ),
    )


def toffoli_circuit() -> Circuit:
    """Doubly-controlled X on site C, active when A=0 and B=1."""
    phase = ccphase_circuit()
    ops = (
        rotation_single(2, "y", -pi / 2),
        *phase.ops,
        rotation_single(2, "y", pi / 2),
    )
    return Circuit(QUTRIT3, ops)


def computational_block(unitary27: np.ndarray) -> np.ndarray:
    """8x8 block of a 27x27 operator on the all-qubit basis kets."""
    if unitary27.shape != (27, 27):
        raise ValueError("expected a 27x27 matrix")
    idx = computational_indices(QUTRIT3)
    return np.ascontiguousarray(unitary27[np.ix_(idx, idx)])


def ideal_toffoli_unitary() -> np.ndarray:
    """Exact 8x8 target: X on qubit C conditioned on A=0, B=1."""
    mat = np.eye(8, dtype=complex)
    i010 = QUBIT3.basis_index((0, 1, 0))
    i011 = QUBIT3.basis_index((0, 1, 1))
    mat[np.ix_([i010, i011], [i010, i011])] = np.array([[0, 1], [1, 0]])
    return mat


def align_global_phase(matrix: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rephase ``matrix`` to maximize overlap with ``reference``."""
    overlap = complex(np.trace(reference.conj().T @ matrix))
    if abs(overlap) < 1e-12:
        raise ValueError("matrices are orthogonal; no phase alignment exists")
    return matrix * (overlap.conjugate() / abs(overlap))


@dataclass(frozen=True, eq=False)
class TruthTable:
    """Column-stochastic map of computational populations.

    ``matrix[i, j]`` is the population of output ket i given input ket j of
    the qubit register; columns may sum to less than one when weight leaks
    out of the computational subspace.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=float)
        if mat.shape != (8, 8):
            raise ValueError("truth table must be 8x8")
        if mat.min() <= -1e-9 or mat.max() >= 1 + 1e-9:
            raise ValueError("populations must lie in [0, 1]")
        sums = mat.sum(axis=0)
        if sums.max() >= 1 + 1e-9:
            raise ValueError("column populations must sum to at most 1")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def column_labels(self) -> tuple[str, ...]:
        return QUBIT3.all_basis_labels()


def truth_table(channel) -> TruthTable:
    """Populate the table by sending every computational ket through ``channel``.

    ``channel`` maps a 27x27 density matrix to a 27x27 density matrix.
    """
    idx = computational_indices(QUTRIT3)
    cols = []
    for j in range(8):
        rho_in = np.zeros((27, 27), dtype=complex)
        rho_in[idx[j], idx[j]] = 1.0
        rho_out = channel(rho_in)
        cols.append(np.real(np.diag(rho_out)[idx]).clip(min=0.0))
    return TruthTable(np.stack(cols, axis=1))


def ideal_truth_table() -> np.ndarray:
    """Permutation matrix of the target gate on populations."""
    return np.abs(ideal_toffoli_unitary()) ** 2


def truth_table_fidelity(table: TruthTable) -> float:
    """Mean correct-output population over the eight computational inputs."""
    return float(np.trace(table.matrix @ ideal_truth_table()) / 8.0)
