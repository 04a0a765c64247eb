"""Fusion-tree engine for a three-charge non-Abelian toy model.

Charges take values in {0, 1, 2}; two subsystems with charges x and y fuse
into a total charge z drawn from ``FUSION_OUTCOMES[(x, y)]``.  The pair
(1, 1) is the only one with two outcomes, {0, 2}, which is the sole source of
the hidden coupling degree of freedom exploited by the protocol.  Composition
is non-associative: the two association orders of three subsystems give
isomorphic but distinct bases related by a recoupling move (``f_move``) that
acts as a relabeling except on the all-charge-1 block, where it is the 2x2
Hadamard.

Protocol sector
---------------
The mediation protocol acts on five subsystems grouped as Q1 = (x1, y1),
M = m, Q2 = (x2, y2) and restricted to the sector with pair charges
z1 = z2 = 1 (so y_i = 1 - x_i with x_i in {0, 1}), mediator charge m = 1 and
global charge g = 1.  In this sector a state, per association order, is an
8-dimensional amplitude vector over (x1, x2, internal) with the internal
coupling label in {0, 2}:

* ``Partition.CENTER``  groups (Q1 Q2) M, internal label t,
* ``Partition.LEFT``    groups (Q1 M) Q2, internal label h1,
* ``Partition.RIGHT``   groups Q1 (M Q2), internal label h2.

Changing partition multiplies each (x1, x2) block's internal 2-vector by a
unitary 2x2 matrix: amplitude vectors transform as c_to = P(from->to) c_from.
The qubit encoding identifies |0> with pair charge labels (1, 0) and |1> with
(0, 1), with the matter coupling label t fixed to 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .statecore import EPS, dagger, is_hermitian
from .witness import LocalObservableSet, ProtocolStep, ProtocolTrace, purity, uncorrelated_test

CHARGES = (0, 1, 2)

#: Allowed total charges z for a fused pair (x, y); symmetric in x, y.
FUSION_OUTCOMES: dict[tuple[int, int], tuple[int, ...]] = {
    (0, 0): (0,),
    (0, 1): (1,),
    (0, 2): (2,),
    (1, 0): (1,),
    (1, 1): (0, 2),
    (1, 2): (1,),
    (2, 0): (2,),
    (2, 1): (1,),
    (2, 2): (0,),
}


def fusion_outcomes(x: int, y: int) -> tuple[int, ...]:
    try:
        return FUSION_OUTCOMES[(x, y)]
    except KeyError:
        raise ValueError(f"bad-fusion-tree: charges ({x}, {y}) outside {CHARGES}") from None


def fusion_allowed(x: int, y: int, z: int) -> bool:
    return (x, y) in FUSION_OUTCOMES and z in FUSION_OUTCOMES[(x, y)]


def pair_labels() -> list[tuple[int, int, int]]:
    """All valid (x, y, z) labels of a fused pair; 10 of them, 3/4/3 by z."""
    return [(x, y, z) for x in CHARGES for y in CHARGES for z in fusion_outcomes(x, y)]


# ---------------------------------------------------------------------------
# general three-leaf fusion trees and the recoupling move


@dataclass(frozen=True)
class LeftTreeLabel:
    """Basis label of ((x0, x1), x2): inner charge z01, total charge g."""

    x0: int
    x1: int
    x2: int
    z01: int
    g: int

    def is_valid(self) -> bool:
        return fusion_allowed(self.x0, self.x1, self.z01) and fusion_allowed(self.z01, self.x2, self.g)


@dataclass(frozen=True)
class RightTreeLabel:
    """Basis label of (x0, (x1, x2)): inner charge z12, total charge g."""

    x0: int
    x1: int
    x2: int
    z12: int
    g: int

    def is_valid(self) -> bool:
        return fusion_allowed(self.x1, self.x2, self.z12) and fusion_allowed(self.x0, self.z12, self.g)


def left_tree_labels() -> list[LeftTreeLabel]:
    out = []
    for x0 in CHARGES:
        for x1 in CHARGES:
            for x2 in CHARGES:
                for z01 in fusion_outcomes(x0, x1):
                    for g in fusion_outcomes(z01, x2):
                        out.append(LeftTreeLabel(x0, x1, x2, z01, g))
    return out


def right_tree_labels() -> list[RightTreeLabel]:
    out = []
    for x0 in CHARGES:
        for x1 in CHARGES:
            for x2 in CHARGES:
                for z12 in fusion_outcomes(x1, x2):
                    for g in fusion_outcomes(x0, z12):
                        out.append(RightTreeLabel(x0, x1, x2, z12, g))
    return out


def f_move(label: LeftTreeLabel) -> dict[RightTreeLabel, complex]:
    """Re-associate a left tree into the right-tree basis.

    Identity relabeling everywhere except the block x0 = x1 = x2 = g = 1,
    where the two inner charges {0, 2} mix through the Hadamard with
    coefficients +-1/sqrt(2).
    """
    if not isinstance(label, LeftTreeLabel) or not label.is_valid():
        raise ValueError(f"bad-fusion-tree: invalid left label {label}")
    x0, x1, x2, z01, g = label.x0, label.x1, label.x2, label.z01, label.g
    if (x0, x1, x2, g) == (1, 1, 1, 1):
        s = 1.0 / np.sqrt(2.0)
        sign = 1.0 if z01 == 0 else -1.0
        return {
            RightTreeLabel(1, 1, 1, 0, 1): s,
            RightTreeLabel(1, 1, 1, 2, 1): sign * s,
        }
    matches = [
        z12
        for z12 in fusion_outcomes(x1, x2)
        if fusion_allowed(x0, z12, g)
    ]
    if len(matches) != 1:
        raise ValueError(f"bad-fusion-tree: ambiguous re-association of {label}")
    return {RightTreeLabel(x0, x1, x2, matches[0], g): 1.0}


# ---------------------------------------------------------------------------
# the restricted protocol sector


class Partition(Enum):
    """Association order of the Q1 / M / Q2 chain."""

    CENTER = "center"  # (Q1 Q2) M, internal label t
    LEFT = "left"      # (Q1 M) Q2, internal label h1
    RIGHT = "right"    # Q1 (M Q2), internal label h2

    @property
    def internal_label(self) -> str:
        return {"center": "t", "left": "h1", "right": "h2"}[self.value]


INTERNAL_VALUES = (0, 2)

#: Sector basis labels in index order: (x1, x2, internal).
SECTOR_BASIS: tuple[tuple[int, int, int], ...] = tuple(
    (x1, x2, u) for x1 in (0, 1) for x2 in (0, 1) for u in INTERNAL_VALUES
)

SECTOR_DIM = len(SECTOR_BASIS)


def sector_index(x1: int, x2: int, internal: int) -> int:
    return (x1 * 2 + x2) * 2 + (0 if internal == 0 else 1)


class AnyonState:
    """Unit-norm amplitude vector over the restricted sector, tagged by partition.

    Amplitudes from different partitions must never be mixed; every operation
    that crosses association orders goes through ``change_partition``.
    """

    __slots__ = ("shape", "amps")

    def __init__(self, shape: Partition, amps):
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if amps.shape != (SECTOR_DIM,):
            raise ValueError(f"bad-fusion-tree: sector state needs {SECTOR_DIM} amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm {norm} differs from 1")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "amps", amps.copy())
        self.amps.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("AnyonState is immutable")

    def amplitude(self, x1: int, x2: int, internal: int) -> complex:
        return complex(self.amps[sector_index(x1, x2, internal)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


_SQ2 = np.sqrt(2.0)

#: Partition-change matrices on the internal {0, 2} support, rows = target label.
P_LEFT_TO_RIGHT = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / _SQ2
P_CENTER_TO_RIGHT = np.array([[1.0, 1.0], [-1.0j, 1.0j]], dtype=complex) / _SQ2

_TO_RIGHT = {
    Partition.LEFT: P_LEFT_TO_RIGHT,
    Partition.CENTER: P_CENTER_TO_RIGHT,
    Partition.RIGHT: np.eye(2, dtype=complex),
}


def partition_matrix(src: Partition, dst: Partition) -> np.ndarray:
    """2x2 unitary sending internal amplitudes of ``src`` to those of ``dst``.

    ``partition_matrix(a, a)`` is the identity; all other pairs compose
    through the right-hand partition, so every closed loop is the identity.
    """
    return dagger(_TO_RIGHT[dst]) @ _TO_RIGHT[src]


def change_partition(state: AnyonState, dst: Partition) -> AnyonState:
    """Re-express a sector state in another association order."""
    if state.shape is dst:
        return state
    p = partition_matrix(state.shape, dst)
    blocks = state.amps.reshape(4, 2)
    return AnyonState(dst, (blocks @ p.T).reshape(-1))


# ---------------------------------------------------------------------------
# system-local protocol unitaries (diagonal-in-one-partition actions)


def _phase_on_internal2(state: AnyonState, phase_for_x2: dict[int, complex]) -> AnyonState:
    amps = state.amps.copy()
    for x1 in (0, 1):
        for x2 in (0, 1):
            amps[sector_index(x1, x2, 2)] *= phase_for_x2[x2]
    return AnyonState(state.shape, amps)


def unitary_u_mq2(state: AnyonState) -> AnyonState:
    """Controlled phase local in M Q2: on internal = 2, multiply the x2 = 1
    branch by +i and the x2 = 0 branch by -i; identity on internal = 0."""
    original = state.shape
    s = change_partition(state, Partition.RIGHT)
    s = _phase_on_internal2(s, {1: 1.0j, 0: -1.0j})
    return change_partition(s, original)


def unitary_w_mq2(state: AnyonState) -> AnyonState:
    """Inverse of the controlled phase: conjugate phases on internal = 2."""
    original = state.shape
    s = change_partition(state, Partition.RIGHT)
    s = _phase_on_internal2(s, {1: -1.0j, 0: 1.0j})
    return change_partition(s, original)


def unitary_v_q1m(state: AnyonState) -> AnyonState:
    """Controlled flip local in Q1 M: swap x1 = 0 <-> 1 on internal = 2."""
    original = state.shape
    s = change_partition(state, Partition.LEFT)
    amps = s.amps.copy()
    for x2 in (0, 1):
        a, b = sector_index(0, x2, 2), sector_index(1, x2, 2)
        amps[a], amps[b] = amps[b], amps[a]
    return change_partition(AnyonState(Partition.LEFT, amps), original)


EMBEDDED_UNITARIES = {
    "U_MQ2": unitary_u_mq2,
    "V_Q1M": unitary_v_q1m,
    "W_MQ2": unitary_w_mq2,
}


def embedded_unitary(which: str):
    try:
        return EMBEDDED_UNITARIES[which]
    except KeyError:
        raise ValueError(f"unknown protocol unitary {which!r}") from None


# ---------------------------------------------------------------------------
# partial traces


def trace_mediator(state: AnyonState) -> np.ndarray:
    """Discard the mediator; density operator on the 8-dim matter sector.

    Expressed in the matter-mediator partition, a dyad survives only with
    matching mediator charge and matching matter coupling label t, so the
    result is t-block-diagonal on the (x1, x2, t) basis.
    """
    c = change_partition(state, Partition.CENTER).amps
    rho = np.outer(c, c.conj())
    for a, (_, _, ta) in enumerate(SECTOR_BASIS):
        for b, (_, _, tb) in enumerate(SECTOR_BASIS):
            if ta != tb:
                rho[a, b] = 0.0
    return rho


def trace_matter_to_mediator(state: AnyonState) -> np.ndarray:
    """Discard the matter; 3x3 density operator on the mediator charge basis.

    Mirror of ``trace_mediator``: dyads survive only with matching matter
    labels and matching t.  The mediator charge is pinned to 1 throughout the
    sector, so the result is the pure projector on charge 1.
    """
    c = change_partition(state, Partition.CENTER).amps
    rho = np.zeros((3, 3), dtype=complex)
    rho[1, 1] = np.vdot(c, c)
    return rho


def trace_q2(matter_op: np.ndarray) -> np.ndarray:
    """Reduce an (x1, x2, t) matter operator to the 2-dim x1 label space."""
    matter_op = np.asarray(matter_op, dtype=complex)
    if matter_op.shape != (SECTOR_DIM, SECTOR_DIM):
        raise ValueError("bad-partition: matter operator must be 8x8")
    out = np.zeros((2, 2), dtype=complex)
    for a, (x1a, x2a, ta) in enumerate(SECTOR_BASIS):
        for b, (x1b, x2b, tb) in enumerate(SECTOR_BASIS):
            if x2a == x2b and ta == tb:
                out[x1a, x1b] += matter_op[a, b]
    return out


def trace_q1(matter_op: np.ndarray) -> np.ndarray:
    """Reduce an (x1, x2, t) matter operator to the 2-dim x2 label space."""
    matter_op = np.asarray(matter_op, dtype=complex)
    if matter_op.shape != (SECTOR_DIM, SECTOR_DIM):
        raise ValueError("bad-partition: matter operator must be 8x8")
    out = np.zeros((2, 2), dtype=complex)
    for a, (x1a, x2a, ta) in enumerate(SECTOR_BASIS):
        for b, (x1b, x2b, tb) in enumerate(SECTOR_BASIS):
            if x1a == x1b and ta == tb:
                out[x2a, x2b] += matter_op[a, b]
    return out


# ---------------------------------------------------------------------------
# embedded matter observables (qubit encoding: |0> = charge pattern (1,0))


def local_x() -> np.ndarray:
    """Pair-charge flip |x=1><x=0| + h.c. on a single encoded qubit."""
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def local_z() -> np.ndarray:
    """+1 on the x = 1 pattern (encoded |0>), -1 on x = 0 (encoded |1>)."""
    return np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)


def _embed(op2: np.ndarray, sector: int) -> np.ndarray:
    out = np.zeros((SECTOR_DIM, SECTOR_DIM), dtype=complex)
    for a, (x1a, x2a, ta) in enumerate(SECTOR_BASIS):
        for b, (x1b, x2b, tb) in enumerate(SECTOR_BASIS):
            if ta != tb:
                continue
            if sector == 1 and x2a == x2b:
                out[a, b] = op2[x1a, x1b]
            elif sector == 2 and x1a == x1b:
                out[a, b] = op2[x2a, x2b]
    return out


def embedded_x(sector: int) -> np.ndarray:
    """Charge-pattern flip of one matter qubit, acting per (other, t) block."""
    return _embed(local_x(), sector)


def embedded_z(sector: int) -> np.ndarray:
    return _embed(local_z(), sector)


def matter_observable_set(sector: int) -> LocalObservableSet:
    """Spanning set {1, X, Z, i[X, Z]/2} of one qubit's embedded local algebra."""
    x = embedded_x(sector)
    z = embedded_z(sector)
    y = 0.5j * (x @ z - z @ x)
    eye = np.eye(SECTOR_DIM, dtype=complex)
    assert all(is_hermitian(m) for m in (x, z, y))
    return LocalObservableSet(f"Q{sector}", (eye, x, z, y))


# ---------------------------------------------------------------------------
# the mediation protocol


def initial_protocol_state() -> AnyonState:
    """Encoded |0> on Q1, even superposition on Q2, coupling label t = 0."""
    amps = np.zeros(SECTOR_DIM, dtype=complex)
    amps[sector_index(1, 1, 0)] = 1.0 / _SQ2
    amps[sector_index(1, 0, 0)] = 1.0 / _SQ2
    return AnyonState(Partition.CENTER, amps)


def bell_matter_state() -> np.ndarray:
    """Amplitudes of the encoded (|00> + |11>)/sqrt(2) on the matter basis."""
    amps = np.zeros(SECTOR_DIM, dtype=complex)
    amps[sector_index(1, 1, 0)] = 1.0 / _SQ2
    amps[sector_index(0, 0, 0)] = 1.0 / _SQ2
    return amps


def run_anyon_protocol(eps: float = EPS) -> ProtocolTrace:
    """Entangle the two encoded matter qubits with a mediator that stays pure.

    Applies the system-local sequence U (in M Q2), V (in Q1 M), W (in M Q2) to
    the encoded |0> (x) |+> state.  Each checkpoint records the state in its
    natural partition together with both reductions; the summary carries the
    state re-expressed in every partition for amplitude-level comparison.
    """
    psi0 = initial_protocol_state()

    def checkpoint(label: str, state: AnyonState) -> ProtocolStep:
        return ProtocolStep(label, state, trace_matter_to_mediator(state), trace_mediator(state))

    psi0_right = change_partition(psi0, Partition.RIGHT)
    after_u = unitary_u_mq2(psi0_right)
    after_u_left = change_partition(after_u, Partition.LEFT)
    after_v = unitary_v_q1m(after_u_left)
    after_v_right = change_partition(after_v, Partition.RIGHT)
    after_w = unitary_w_mq2(after_v_right)
    final_center = change_partition(after_w, Partition.CENTER)

    steps = [
        checkpoint("initial", psi0),
        checkpoint("u_mq2", after_u),
        checkpoint("v_q1m", after_v),
        checkpoint("w_mq2", after_w),
    ]

    matter_final = steps[-1].matter
    rho_q1 = trace_q2(matter_final)
    rho_q2 = trace_q1(matter_final)
    x1 = embedded_x(1)
    x2 = embedded_x(2)

    set_q1 = matter_observable_set(1)
    set_q2 = matter_observable_set(2)
    report = uncorrelated_test(matter_final, set_q1, set_q2, eps=eps)

    summary = {
        "displays": {
            "initial_center": psi0.amps,
            "initial_right": psi0_right.amps,
            "after_u_right": after_u.amps,
            "after_u_left": after_u_left.amps,
            "after_v_left": after_v.amps,
            "after_v_right": after_v_right.amps,
            "after_w_right": after_w.amps,
            "final_center": final_center.amps,
        },
        "mediator_purities": [purity(step.mediator, eps) for step in steps],
        "rho_q1": rho_q1,
        "rho_q2": rho_q2,
        "x1_expect": float(np.real(np.trace(local_x() @ rho_q1))),
        "x2_expect": float(np.real(np.trace(local_x() @ rho_q2))),
        "x1x2_expect": float(np.real(np.trace(x1 @ x2 @ matter_final))),
        "matter_purity": purity(matter_final, eps),
        "initial_report": uncorrelated_test(steps[0].matter, set_q1, set_q2, eps=eps),
    }
    return ProtocolTrace("anyon", steps, report, summary)
