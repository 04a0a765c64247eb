"""Model-agnostic entanglement certification for pure bipartite states.

A pure state of a bipartite system is *uncorrelated* when every product of
local observables has a factorizing expectation value,

    Tr(A rho) * Tr(B rho) == Tr(product(A, B) rho)

for all local observables A of the first sector and B of the second.  A pure
state that is not uncorrelated is entangled.  Quantifying over "all" local
observables reduces, by linearity of the trace, to checking a spanning set of
each local observable algebra; the protocol modules supply those spanning
sets, and the tests exercise the reduction by adding random span elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .statecore import EPS, close, is_density, is_hermitian

MatrixProduct = Callable[[np.ndarray, np.ndarray], np.ndarray]


def matmul_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Default composition of two embedded local observables."""
    return a @ b


@dataclass(frozen=True)
class LocalObservableSet:
    """Hermitian observables of one subsystem, embedded in the joint space."""

    subsystem: str
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        for m in self.matrices:
            if not is_hermitian(m):
                raise ValueError(f"observable set {self.subsystem!r} contains a non-Hermitian matrix")

    def __len__(self) -> int:
        return len(self.matrices)


@dataclass
class CorrelationRow:
    """Expectation data for one observable pair."""

    index_a: int
    index_b: int
    expect_a: float
    expect_b: float
    expect_product: float

    @property
    def violation(self) -> float:
        return abs(self.expect_a * self.expect_b - self.expect_product)


@dataclass
class WitnessReport:
    purity: float
    uncorrelated: bool
    violating_pair: tuple[int, int] | None
    lhs: float
    rhs: float
    max_violation: float
    correlations: list[CorrelationRow]

    @property
    def entangled(self) -> bool:
        """Pure and not uncorrelated."""
        return close(self.purity, 1.0, EPS * max(1.0, abs(self.purity))) and not self.uncorrelated


@dataclass
class ProtocolStep:
    """One checkpoint of a mediation protocol."""

    label: str
    state: object
    mediator: np.ndarray
    matter: np.ndarray


@dataclass
class ProtocolTrace:
    model: str
    steps: list[ProtocolStep]
    report: WitnessReport
    summary: dict = field(default_factory=dict)


def _expectation(op: np.ndarray, rho: np.ndarray) -> float:
    val = complex(np.trace(op @ rho))
    if abs(val.imag) > 1e-8 * max(1.0, abs(val)):
        raise ValueError(f"expectation value is not real: {val}")
    return float(val.real)


def purity(rho: np.ndarray, eps: float = EPS) -> float:
    """Tr(rho^2) of a density operator; lies in [1/dim, 1]."""
    rho = np.asarray(rho, dtype=complex)
    if not is_density(rho, eps):
        raise ValueError("not-density: purity requires a density operator")
    p = float(np.real(np.trace(rho @ rho)))
    dim = rho.shape[0]
    if not (1.0 / dim - eps <= p <= 1.0 + eps):
        raise ValueError(f"not-density: purity {p} outside [1/{dim}, 1]")
    return p


def uncorrelated_test(
    state: np.ndarray,
    set_a: LocalObservableSet,
    set_b: LocalObservableSet,
    product: MatrixProduct = matmul_product,
    eps: float = EPS,
) -> WitnessReport:
    """Check the factorization of expectations over all observable pairs.

    ``state`` is a pure state, given either as a vector or as a density
    operator with purity 1 (within eps); mixed inputs raise ``not-pure``.
    ``product`` composes one observable from each set into a joint observable
    (matrix product by default).  The report flags the state as uncorrelated
    iff every pair satisfies the factorization equality within eps; otherwise
    the maximal-violation pair is recorded, ties broken by lowest index pair.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        nrm = np.linalg.norm(state)
        if not close(nrm, 1.0, eps):
            raise ValueError("not-pure: state vector is not normalized")
        rho = np.outer(state, state.conj())
    else:
        rho = state
    if not is_density(rho, max(eps, 1e-12)):
        raise ValueError("not-pure: input is not a density operator")
    p = float(np.real(np.trace(rho @ rho)))
    if not close(p, 1.0, max(eps, 1e-9)):
        raise ValueError(f"not-pure: purity {p} differs from 1")

    rows: list[CorrelationRow] = []
    best: CorrelationRow | None = None
    for i, a in enumerate(set_a.matrices):
        ea = _expectation(a, rho)
        for j, b in enumerate(set_b.matrices):
            eb = _expectation(b, rho)
            eab = _expectation(product(a, b), rho)
            row = CorrelationRow(i, j, ea, eb, eab)
            rows.append(row)
            if best is None or row.violation > best.violation + eps:
                best = row

    max_violation = best.violation if best is not None else 0.0
    uncorrelated = max_violation <= eps
    if uncorrelated or best is None:
        return WitnessReport(p, True, None, 0.0, 0.0, max_violation, rows)
    return WitnessReport(
        purity=p,
        uncorrelated=False,
        violating_pair=(best.index_a, best.index_b),
        lhs=best.expect_a * best.expect_b,
        rhs=best.expect_product,
        max_violation=max_violation,
        correlations=rows,
    )


def schmidt_rank(state: np.ndarray, dim_a: int, dim_b: int, eps: float = EPS) -> int:
    """Number of nonzero Schmidt coefficients across the dim_a | dim_b cut."""
    state = np.asarray(state, dtype=complex)
    if state.size != dim_a * dim_b:
        raise ValueError("bad-partition: state length must equal dim_a * dim_b")
    sv = np.linalg.svd(state.reshape(dim_a, dim_b), compute_uv=False)
    return int(np.sum(sv > max(eps, 1e-12)))
