"""Acceptance checks: every headline claim of the three protocols, runnable
as one deterministic suite (also exposed through ``bmvsim verify-all``).

Each criterion compares computed values against pinned expectations at the
global tolerance; an exception inside a criterion is reported as a failure,
so tolerance overrides that break the numerics surface as red rows instead of
crashes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from . import bit_antibit as bab
from . import fermion_ssr as fer
from . import ising_anyon as ia
from .statecore import (
    EPS,
    commutator,
    dyad,
    in_span,
    mat_close,
    partial_trace,
    random_hermitian,
    random_state,
    tensor,
)
from .witness import ProtocolTrace, schmidt_rank

#: Regression value for the non-decomposable observable's span residual,
#: fixed by the least-squares oracle run (the target is Frobenius-orthogonal
#: to the local-product span, so the residual equals its Frobenius norm).
EXPECTED_SPAN_RESIDUAL = 4.0

_SQ2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# pinned expected values


def fermion_expected_mediator_sequence() -> list[np.ndarray]:
    empty = np.diag([0.0, 1.0]).astype(complex)
    mixed = np.diag([0.5, 0.5]).astype(complex)
    return [empty, mixed, mixed, empty]


def fermion_expected_matter_state() -> np.ndarray:
    """Final 4-mode matter state: (c1+c3)(c2+c4)|vac>/2 on the re-indexed modes."""
    c = {j: fer.creator_matrix(4, j) for j in range(1, 5)}
    return 0.5 * ((c[1] + c[3]) @ (c[2] + c[4]) @ fer.vacuum_state(4))


def anyon_expected_displays() -> dict[str, np.ndarray]:
    """Amplitude vectors of every protocol checkpoint, in each partition shown."""

    def vec(entries: dict[tuple[int, int, int], complex]) -> np.ndarray:
        v = np.zeros(ia.SECTOR_DIM, dtype=complex)
        for (x1, x2, u), a in entries.items():
            v[ia.sector_index(x1, x2, u)] = a
        return v

    h = 1.0 / _SQ2
    return {
        "initial_center": vec({(1, 1, 0): h, (1, 0, 0): h}),
        "initial_right": vec({(1, 1, 0): 0.5, (1, 1, 2): -0.5j, (1, 0, 0): 0.5, (1, 0, 2): -0.5j}),
        "after_u_right": vec({(1, 1, 0): 0.5, (1, 1, 2): 0.5, (1, 0, 0): 0.5, (1, 0, 2): -0.5}),
        "after_u_left": vec({(1, 1, 0): h, (1, 0, 2): h}),
        "after_v_left": vec({(1, 1, 0): h, (0, 0, 2): h}),
        "after_v_right": vec({(1, 1, 0): 0.5, (1, 1, 2): 0.5, (0, 0, 0): 0.5, (0, 0, 2): -0.5}),
        "after_w_right": vec({(1, 1, 0): 0.5, (1, 1, 2): -0.5j, (0, 0, 0): 0.5, (0, 0, 2): -0.5j}),
        "final_center": vec({(1, 1, 0): h, (0, 0, 0): h}),
    }


def anyon_expected_mediator() -> np.ndarray:
    m = np.zeros((3, 3), dtype=complex)
    m[1, 1] = 1.0
    return m


def bab_expected_matter_state() -> np.ndarray:
    """Final matter state on (A1, B1, B_last, A2): four equal basis terms."""
    v = np.zeros(16, dtype=complex)
    for idx in (0b0000, 0b1010, 0b0101, 0b1111):
        v[idx] = 0.5
    return v


# ---------------------------------------------------------------------------
# per-model expectation tables (shared by the CLI run command)


@dataclass
class Check:
    name: str
    passed: bool
    expected: str
    actual: str


def _check_close(name: str, actual: float, expected: float, eps: float) -> Check:
    return Check(name, abs(actual - expected) <= eps, f"{expected:g}", f"{actual:.12g}")


def _check_mat(name: str, actual: np.ndarray, expected: np.ndarray, eps: float) -> Check:
    dev = float(np.max(np.abs(np.asarray(actual) - np.asarray(expected))))
    return Check(name, dev <= eps, "deviation 0", f"deviation {dev:.3g}")


def model_checks(trace: ProtocolTrace, eps: float = EPS) -> list[Check]:
    """Pass/fail rows comparing one protocol run against its pinned values."""
    s = trace.summary
    checks: list[Check] = []
    if trace.model == "fermion":
        for step, med, exp in zip(trace.steps, s["mediator_sequence"], fermion_expected_mediator_sequence()):
            checks.append(_check_mat(f"mediator[{step.label}]", med, exp, eps))
        checks.append(_check_mat("rho_q1", s["rho_q1"], np.eye(4) / 4, eps))
        checks.append(_check_mat("rho_q2", s["rho_q2"], np.eye(4) / 4, eps))
        checks.append(_check_close("x1_expect", s["x1_expect"], 0.0, eps))
        checks.append(_check_close("x2_expect", s["x2_expect"], 0.0, eps))
        checks.append(_check_close("x1x2_expect", s["x1x2_expect"], -0.5, eps))
        checks.append(_check_mat("final_matter", trace.steps[-1].matter, dyad(fermion_expected_matter_state()), eps))
    elif trace.model == "anyon":
        expected = anyon_expected_displays()
        for key, vec in s["displays"].items():
            checks.append(_check_mat(f"display[{key}]", vec, expected[key], eps))
        med = anyon_expected_mediator()
        for step in trace.steps:
            checks.append(_check_mat(f"mediator[{step.label}]", step.mediator, med, eps))
        for step, p in zip(trace.steps, s["mediator_purities"]):
            checks.append(_check_close(f"mediator_purity[{step.label}]", p, 1.0, eps))
        checks.append(_check_mat("final_matter", trace.steps[-1].matter, dyad(ia.bell_matter_state()), eps))
        checks.append(_check_mat("rho_q1", s["rho_q1"], np.eye(2) / 2, eps))
        checks.append(_check_mat("rho_q2", s["rho_q2"], np.eye(2) / 2, eps))
        checks.append(_check_close("x1_expect", s["x1_expect"], 0.0, eps))
        checks.append(_check_close("x2_expect", s["x2_expect"], 0.0, eps))
        checks.append(_check_close("x1x2_expect", s["x1x2_expect"], 1.0, eps))
    elif trace.model == "bitantibit":
        checks.append(_check_mat("final_matter", trace.steps[-1].matter, dyad(bab_expected_matter_state()), eps))
        checks.append(_check_mat("mediator_start", trace.steps[0].mediator, _zero_projector(trace.steps[0].mediator.shape[0]), eps))
        checks.append(_check_mat("mediator_end", trace.steps[-1].mediator, _zero_projector(trace.steps[-1].mediator.shape[0]), eps))
        checks.append(Check("all_steps_valid", all(s["validities"]), "True", str(all(s["validities"]))))
        checks.append(_check_mat("rho_q1", s["rho_q1"], np.eye(4) / 4, eps))
        checks.append(_check_mat("rho_q2", s["rho_q2"], np.eye(4) / 4, eps))
        checks.append(_check_close("x1_expect*x2_expect", s["x1_expect"] * s["x2_expect"], 0.0, eps))
        checks.append(_check_close("x1x2_expect", s["x1x2_expect"], 0.5, eps))
    else:
        raise ValueError(f"unknown model {trace.model!r}")
    checks.append(Check("initial_uncorrelated", s["initial_report"].uncorrelated, "True", str(s["initial_report"].uncorrelated)))
    checks.append(Check("final_entangled", trace.report.entangled, "True", str(trace.report.entangled)))
    checks.append(_check_close("matter_purity", s["matter_purity"], 1.0, eps))
    return checks


def _zero_projector(dim: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=complex)
    m[0, 0] = 1.0
    return m


# ---------------------------------------------------------------------------
# the eleven acceptance criteria


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str


def _trace(ctx: dict, model: str, eps: float) -> ProtocolTrace:
    key = (model, eps)
    if key not in ctx:
        runner = {
            "fermion": fer.run_fermion_protocol,
            "anyon": ia.run_anyon_protocol,
            "bitantibit": bab.run_bit_antibit_protocol,
        }[model]
        ctx[key] = runner(eps=eps)
    return ctx[key]


def _crit_fermion_correlations(eps, ctx):
    s = _trace(ctx, "fermion", eps).summary
    ok = abs(s["x1_expect"]) <= eps and abs(s["x2_expect"]) <= eps and abs(s["x1x2_expect"] + 0.5) <= eps
    return ok, f"<X1>={s['x1_expect']:.3g} <X2>={s['x2_expect']:.3g} <X1.X2>={s['x1x2_expect']:.12g}"


def _crit_fermion_mediator(eps, ctx):
    seq = _trace(ctx, "fermion", eps).summary["mediator_sequence"]
    expected = fermion_expected_mediator_sequence()
    devs = [float(np.max(np.abs(a - b))) for a, b in zip(seq, expected)]
    return len(seq) == 4 and max(devs) <= eps, f"max deviation {max(devs):.3g}"


def _crit_fermion_marginals(eps, ctx):
    s = _trace(ctx, "fermion", eps).summary
    ok = mat_close(s["rho_q1"], np.eye(4) / 4, eps) and mat_close(s["rho_q2"], np.eye(4) / 4, eps)
    return ok, "rho_Q1 = rho_Q2 = I/4" if ok else "marginal deviates from I/4"


def _crit_observable_counting(eps, ctx):
    rows = fer.count_scaling_check(4)
    counts_ok = all(match for *_, match in rows)
    sets = {
        "Q1": fer.enumerate_physical_observables(5, (1, 2)).matrices,
        "M": fer.enumerate_physical_observables(5, (3,)).matrices,
        "Q2": fer.enumerate_physical_observables(5, (4, 5)).matrices,
    }
    worst = 0.0
    for a, b in (("Q1", "M"), ("Q1", "Q2"), ("M", "Q2")):
        for ma in sets[a]:
            for mb in sets[b]:
                worst = max(worst, float(np.max(np.abs(commutator(ma, mb)))))
    ok = counts_ok and worst <= eps
    return ok, f"counts {[r[1] for r in rows]}, max cross commutator {worst:.3g}"


def nondecomposable_target(n: int = 5) -> np.ndarray:
    """The pair annihilator + pair creator observable on modes 2 and 3."""
    return fer.word_matrix(n, ((2, False), (3, False))) + fer.word_matrix(n, ((3, True), (2, True)))


def local_product_basis(n: int = 5) -> list[np.ndarray]:
    """Products of single-mode physical observables of modes 2 and 3."""
    b2 = fer.enumerate_physical_observables(n, (2,)).matrices
    b3 = fer.enumerate_physical_observables(n, (3,)).matrices
    return [a @ b for a in b2 for b in b3]


def _crit_nondecomposability(eps, ctx):
    decomposable, residual = in_span(nondecomposable_target(), local_product_basis(), eps)
    ok = (not decomposable) and residual > 0.1 and abs(residual - EXPECTED_SPAN_RESIDUAL) <= 1e-9
    return ok, f"residual {residual:.12g} (pinned {EXPECTED_SPAN_RESIDUAL})"


def _crit_anyon_recoupling(eps, ctx):
    p_lr = ia.partition_matrix(ia.Partition.LEFT, ia.Partition.RIGHT)
    p_cr = ia.partition_matrix(ia.Partition.CENTER, ia.Partition.RIGHT)
    ok = mat_close(p_lr, np.array([[1, 1], [1, -1]]) / _SQ2, eps)
    ok = ok and mat_close(p_cr, np.array([[1, 1], [-1j, 1j]]) / _SQ2, eps)
    shapes = (ia.Partition.CENTER, ia.Partition.LEFT, ia.Partition.RIGHT)
    worst = 0.0
    for loop in list(permutations(shapes, 2)) + list(permutations(shapes, 3)):
        cycle = list(loop) + [loop[0]]
        m = np.eye(2, dtype=complex)
        for src, dst in zip(cycle, cycle[1:]):
            m = ia.partition_matrix(src, dst) @ m
        worst = max(worst, float(np.max(np.abs(m - np.eye(2)))))
    return ok and worst <= eps, f"matrices match, worst loop deviation {worst:.3g}"


def _crit_anyon_protocol(eps, ctx):
    trace = _trace(ctx, "anyon", eps)
    s = trace.summary
    expected = anyon_expected_displays()
    dev = max(float(np.max(np.abs(s["displays"][k] - expected[k]))) for k in expected)
    ok = dev <= eps
    ok = ok and mat_close(trace.steps[-1].matter, dyad(ia.bell_matter_state()), eps)
    ok = ok and abs(s["x1x2_expect"] - 1.0) <= eps and abs(s["x1_expect"]) <= eps and abs(s["x2_expect"]) <= eps
    return ok, f"display deviation {dev:.3g}, <X1.X2>={s['x1x2_expect']:.12g}"


def _crit_anyon_mediator_purity(eps, ctx):
    trace = _trace(ctx, "anyon", eps)
    med = anyon_expected_mediator()
    ok = all(mat_close(step.mediator, med, eps) for step in trace.steps)
    purities = trace.summary["mediator_purities"]
    ok = ok and all(abs(p - 1.0) <= eps for p in purities)
    return ok, f"purities {[f'{p:.12g}' for p in purities]}"


def _crit_bit_antibit(eps, ctx):
    trace = _trace(ctx, "bitantibit", eps)
    s = trace.summary
    expected = dyad(bab_expected_matter_state())
    ok = mat_close(trace.steps[-1].matter, expected, eps)
    ok = ok and abs(s["x1_expect"] * s["x2_expect"]) <= eps and abs(s["x1x2_expect"] - 0.5) <= eps
    ok = ok and mat_close(trace.steps[-1].mediator, _zero_projector(4), eps)
    ok = ok and all(s["validities"])
    for k in (3, 4):
        bigger = bab.run_bit_antibit_protocol(k, eps=eps)
        ok = ok and mat_close(bigger.steps[-1].matter, expected, eps) and all(bigger.summary["validities"])
    return ok, f"<X1><X2>={s['x1_expect'] * s['x2_expect']:.3g} vs <X1xX2>={s['x1x2_expect']:.12g}; k=3,4 agree"


def _crit_witness_coherence(eps, ctx):
    details = []
    ok = True
    for model in ("fermion", "anyon", "bitantibit"):
        trace = _trace(ctx, model, eps)
        initial_ok = trace.summary["initial_report"].uncorrelated
        final_ok = trace.report.entangled
        ok = ok and initial_ok and final_ok
        details.append(f"{model}: initial uncorrelated={initial_ok}, final entangled={final_ok}")
    trace = _trace(ctx, "bitantibit", eps)
    for label, matter, expect_entangled in (
        ("initial", trace.steps[0].matter, False),
        ("final", trace.steps[-1].matter, True),
    ):
        vals, vecs = np.linalg.eigh(matter)
        state = vecs[:, int(np.argmax(vals))]
        rank = schmidt_rank(state, 4, 4, eps)
        oracle_entangled = rank >= 2
        ok = ok and (oracle_entangled == expect_entangled)
        details.append(f"schmidt[{label}]={rank}")
    return ok, "; ".join(details)


def _crit_property_suites(eps, ctx):
    rng = np.random.default_rng(20240817)
    failures = []

    for trial in range(100):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        a = random_hermitian(da, rng)
        b = random_hermitian(db, rng)
        lhs = partial_trace(tensor(a, b), [da, db], [0])
        if not mat_close(lhs, a * np.trace(b), 1e-9):
            failures.append(f"trace-product trial {trial}")
        c = random_hermitian(2, rng)
        if not mat_close(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), 1e-9):
            failures.append(f"associativity trial {trial}")

    n = 5
    eye = np.eye(1 << n)
    for j, k in product(range(1, n + 1), repeat=2):
        aj = fer.annihilator_matrix(n, j)
        ak = fer.annihilator_matrix(n, k)
        if not mat_close(aj @ ak + ak @ aj, np.zeros_like(eye), eps):
            failures.append(f"{{a{j},a{k}}}")
        if not mat_close(aj @ ak.conj().T + ak.conj().T @ aj, eye * (j == k), eps):
            failures.append(f"{{a{j},c{k}}}")
        if not mat_close(aj @ aj, np.zeros_like(eye), eps):
            failures.append(f"a{j}^2")
        if float(np.max(np.abs(aj @ fer.vacuum_state(n)))) > eps:
            failures.append(f"a{j}|vac>")

    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            s = fer.fermionic_swap(n, i, j)
            if not (mat_close(s @ s, eye, eps) and mat_close(s, s.conj().T, eps)):
                failures.append(f"swap({i},{j})")

    for trial in range(100):
        state = ia.AnyonState(ia.Partition.CENTER, random_state(ia.SECTOR_DIM, rng))
        dst = (ia.Partition.CENTER, ia.Partition.LEFT, ia.Partition.RIGHT)[trial % 3]
        if abs(ia.change_partition(state, dst).norm() - 1.0) > 1e-9:
            failures.append(f"partition norm trial {trial}")

    return not failures, "no failures" if not failures else f"{len(failures)} failures: {failures[:3]}"


CRITERIA = (
    (1, "fermion-correlations", _crit_fermion_correlations),
    (2, "fermion-mediator-sequence", _crit_fermion_mediator),
    (3, "fermion-marginals", _crit_fermion_marginals),
    (4, "observable-counting-microcausality", _crit_observable_counting),
    (5, "non-decomposability", _crit_nondecomposability),
    (6, "anyon-recoupling", _crit_anyon_recoupling),
    (7, "anyon-protocol", _crit_anyon_protocol),
    (8, "anyon-mediator-purity", _crit_anyon_mediator_purity),
    (9, "bit-antibit-protocol", _crit_bit_antibit),
    (10, "witness-coherence", _crit_witness_coherence),
    (11, "property-suites", _crit_property_suites),
)


def run_all(eps: float = EPS) -> list[CriterionResult]:
    """Evaluate all acceptance criteria; exceptions become failed rows."""
    ctx: dict = {}
    results = []
    for index, name, fn in CRITERIA:
        try:
            passed, detail = fn(eps, ctx)
        except Exception as exc:  # tolerance overrides may break invariant gates
            passed, detail = False, f"error: {exc}"
        results.append(CriterionResult(index, name, bool(passed), detail))
    return results
