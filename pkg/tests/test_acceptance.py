"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they are
produced; they are also repeated in the terminal summary.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from quansal import io as mio
from quansal import matkernel as mk
from quansal.cesaro import (
    DichotomicPair,
    approx_behavior,
    approximant,
    cesaro_identity_residual,
    cesaro_sweep,
    noise_rate_23,
)
from quansal.cli import main, sweep_csv
from quansal.eraser import build_eraser
from quansal.models import (
    Scenario,
    behavior_of,
    behavior_of_commuting,
    chsh_value,
    embed,
    quansality_residual,
)
from quansal.scenarios import (
    brute_force_behavior,
    gen_block_sum,
    gen_chsh,
    gen_tensor_embedded,
)
from quansal.transforms import quansalize, tensorize

from conftest import ACCEPTANCE_LINES, random_density, random_projector_pair

N_LIST = (0, 1, 2, 4, 8, 16, 32, 64)
TSIRELSON = 2 * np.sqrt(2)


def record(k: int, passed: bool, detail: str):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {k:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line, flush=True)
    assert passed, line


# ----------------------------------------------------------------------------
# fixture set


def _tensor_fixture(seed: int):
    r = np.random.default_rng(1000 + seed)
    da, db = (int(v) for v in r.integers(1, 5, size=2))
    sa = tuple(int(v) for v in r.integers(2, 4, size=int(r.integers(1, 4))))
    sb = tuple(int(v) for v in r.integers(2, 4, size=int(r.integers(1, 3))))
    povm = seed % 3 == 0
    m = gen_tensor_embedded(da, db, Scenario(sa, sb), seed, povm=povm)
    return f"tensor[{seed}] {da}x{db} A{sa} B{sb}{' povm' if povm else ''}", m, "sqrt" if povm else "projective"


def _block_fixture(seed: int):
    r = np.random.default_rng(5000 + seed)
    n_blocks = int(r.integers(2, 4))
    blocks, total = [], 0
    for _ in range(n_blocks):
        da, db = (int(v) for v in r.integers(1, 4, size=2))
        if total + da * db > 16:
            break
        blocks.append((da, db))
        total += da * db
    if len(blocks) < 2:
        blocks = [(2, 2), (1, 2)]
    weights = r.dirichlet(np.ones(len(blocks)))
    if seed % 4 == 0:
        # a zero-weight block makes sigma singular
        weights[-1] = 0.0
        weights = weights / weights.sum()
    sa = tuple(int(v) for v in r.integers(2, 4, size=int(r.integers(1, 4))))
    sb = tuple(int(v) for v in r.integers(2, 4, size=int(r.integers(1, 3))))
    povm = seed % 5 == 2
    m = gen_block_sum(blocks, [float(w) for w in weights], Scenario(sa, sb), seed, povm=povm)
    return f"block[{seed}] {blocks} A{sa} B{sb}{' povm' if povm else ''}", m, "sqrt" if povm else "projective"


def build_fixtures():
    out = [_tensor_fixture(s) for s in range(64)]
    out += [_block_fixture(s) for s in range(48)]
    out.append(("chsh", embed(gen_chsh()), "projective"))
    out.append(("block zero-weight 2x2+2x1", gen_block_sum([(2, 2), (2, 1)], [1.0, 0.0], Scenario.uniform(2, 2, 2, 2), 77), "projective"))
    out.append(("block 4x4", gen_block_sum([(4, 4)], [1.0], Scenario.uniform(3, 3, 2, 2), 78), "projective"))
    return out


def _round_trip(m, mode):
    eraser = build_eraser(m.alice, mode)
    q = quansalize(m, mode, eraser=eraser)
    t = tensorize(q)
    return eraser, q, t


@pytest.fixture(scope="module")
def fixtures():
    return build_fixtures()


@pytest.fixture(scope="module")
def pipeline(fixtures):
    start = time.perf_counter()
    results = []
    for name, m, mode in fixtures:
        eraser, q, t = _round_trip(m, mode)
        results.append((name, m, eraser, q, t, behavior_of(m), behavior_of(t)))
    return results, time.perf_counter() - start


def _worst(items):
    """(value, name) of the largest value."""
    return max(items, key=lambda vn: vn[0])


# ----------------------------------------------------------------------------
# criteria


def test_criterion_01_round_trip(pipeline):
    results, elapsed = pipeline
    dist, name = _worst((p_out.max_abs_diff(p_in), n) for n, _, _, _, _, p_in, p_out in results)
    n_sqrt = sum(1 for n, *_ in results if "povm" in n)
    record(
        1,
        len(results) >= 100 and dist <= 1e-8 and elapsed < 60,
        f"{len(results)} models ({n_sqrt} sqrt-mode), max ||dP||_inf = {dist:.2e} ({name}), "
        f"tol 1e-8, {elapsed:.1f} s (limit 60 s)",
    )


def test_criterion_02_eraser_spectrum(pipeline):
    results, _ = pipeline
    herm = _worst((mk.hermiticity_residual(e.average.matrix), n) for n, _, e, *_ in results)
    lo = min(e.projector.spectrum[-1] for _, _, e, *_ in results)
    hi = max(e.projector.spectrum[0] for _, _, e, *_ in results)
    inv = _worst((e.invariance_residual(), n) for n, _, e, *_ in results)
    ok = herm[0] <= 1e-10 and lo >= -1e-9 and hi <= 1 + 1e-9 and inv[0] <= 1e-8
    record(
        2,
        ok,
        f"hermiticity {herm[0]:.2e} (tol 1e-10), min eigenvalue {lo:.2e}, max eigenvalue - 1 = {hi - 1:.2e} "
        f"(allowed [-1e-9, 1+1e-9]), invariance {inv[0]:.2e} (tol 1e-8)",
    )


def test_criterion_03_quansality(pipeline):
    results, _ = pipeline
    res, name = _worst((quansality_residual(q.sigma_family), n) for n, _, _, q, *_ in results)
    record(3, res <= 1e-8, f"max trace-norm quansality residual {res:.2e} ({name}), tol 1e-8")


def test_criterion_04_tensor_state(pipeline):
    results, _ = pipeline
    tr = rank = comp = 0.0
    singular = 0
    for _, _, _, q, t, _, _ in results:
        w = np.linalg.eigvalsh(mk.hermitian_part(t.rho_ab))
        tr = max(tr, abs(complex(np.trace(t.rho_ab)) - 1))
        rank = max(rank, float(np.sum(np.abs(w[:-1]))))
        comp = max(comp, max(mk.frobenius_norm(sum(a.operators) - np.eye(t.dim_a)) for a in t.alice))
        if np.linalg.eigvalsh(mk.hermitian_part(q.sigma))[0] < 1e-10:
            singular += 1
    ok = tr <= 1e-10 and rank <= 1e-10 and comp <= 1e-10 and singular > 0
    record(
        4,
        ok,
        f"|tr rho_AB - 1| {tr:.2e}, non-leading eigenvalue mass {rank:.2e}, "
        f"completeness {comp:.2e} (all tol 1e-10), {singular} singular-sigma fixtures",
    )


def test_criterion_05_chsh():
    source = gen_chsh()
    certified = chsh_value(brute_force_behavior(source))
    eraser, q, t = _round_trip(embed(source), "projective")
    value = chsh_value(brute_force_behavior(t))
    ok = abs(certified - TSIRELSON) <= 1e-12 and abs(value - TSIRELSON) <= 1e-8
    record(5, ok, f"round-tripped CHSH {value:.15f}, |S - 2sqrt2| = {abs(value - TSIRELSON):.2e}, tol 1e-8")


def test_criterion_06_cesaro_identity():
    rng = np.random.default_rng(606)
    worst, n_pairs = 0.0, 0
    for d in range(2, 13):
        for _ in range(3):
            P1, _ = random_projector_pair(rng, d, int(rng.integers(1, d)))
            P2, _ = random_projector_pair(rng, d, int(rng.integers(1, d)))
            pair = DichotomicPair(2 * P1 - np.eye(d), 2 * P2 - np.eye(d))
            rho = random_density(rng, d)
            worst = max(worst, max(cesaro_identity_residual(pair, n, rho) for n in N_LIST))
            n_pairs += 1
    record(6, worst <= 1e-10, f"{n_pairs} random pairs, dims 2..12, N in {list(N_LIST)}: max residual {worst:.2e}, tol 1e-10")


def _dichotomic_fixtures():
    yield "chsh", embed(gen_chsh()), None
    s = Scenario((2, 2), (2, 3))
    for seed in range(6):
        yield f"tensor[{seed}]", gen_tensor_embedded(2 + seed % 3, 2, s, seed), None
    yield "block", gen_block_sum([(2, 2), (3, 1)], [0.4, 0.6], s, 9), [[0.3, 0.7], [0.9, 0.1]]
    yield "block zero-weight", gen_block_sum([(2, 2), (2, 1)], [1.0, 0.0], s, 10), None


def test_criterion_07_pn_law():
    spread = closed = quans = 0.0
    for _, m, qa in _dichotomic_fixtures():
        rows = cesaro_sweep(m, N_LIST, qa)
        scaled = [r.scaled_distance for r in rows]
        spread = max(spread, max(scaled) - min(scaled))
        closed = max(closed, max(r.closed_form_residual for r in rows))
        quans = max(quans, max(r.quansality_residual for r in rows))
        # the distance itself is also checked against the formula built from P alone
        p = behavior_of_commuting(m)
        for n in (0, 64):
            closed = max(closed, approximant(m, qa, n).behavior_n.max_abs_diff(approx_behavior(p, qa, None, n)))
    ok = spread <= 1e-10 and closed <= 1e-10 and quans <= 1e-8
    record(
        7,
        ok,
        f"spread of (N+2)||P_N - P||_inf {spread:.2e}, closed-form mismatch {closed:.2e} (tol 1e-10), "
        f"approximant quansality {quans:.2e}",
    )


def test_criterion_08_noise_rate():
    exact = [noise_rate_23(n, exact=True) for n in range(0, 2001)]
    decreasing = all(a > b for a, b in zip(exact, exact[1:]))
    p0 = noise_rate_23(0, exact=True)
    far = noise_rate_23(10**4)
    limit_gap = abs(float(noise_rate_23(10**12, exact=True)) - 1 / 7)
    ok = p0 == Fraction(2, 5) and decreasing and abs(far - 1 / 7) <= 5e-5 and limit_gap < 1e-12
    record(8, ok, f"p_0 = {p0}, strictly decreasing to N=2000: {decreasing}, |p_1e4 - 1/7| = {abs(far - 1 / 7):.2e} (tol 5e-5)")


def test_criterion_09_oracle(fixtures):
    worst, name = _worst((brute_force_behavior(m).max_abs_diff(behavior_of_commuting(m)), n) for n, m, _ in fixtures)
    record(9, worst <= 1e-12, f"{len(fixtures)} fixtures, max |brute force - evaluator| {worst:.2e} ({name}), tol 1e-12")


def test_criterion_10_determinism(tmp_path, capsys):
    fixtures = build_fixtures()
    first = [mio.dumps(m) for _, m, _ in fixtures]
    second = [mio.dumps(m) for _, m, _ in build_fixtures()]
    fixtures_same = first == second

    reports_same = True
    for i in range(0, len(first), 8):
        src = tmp_path / f"m{i}.json"
        src.write_text(first[i])
        outs = []
        for k in range(2):
            rep = tmp_path / f"r{i}_{k}.json"
            code = main(["roundtrip", str(src), "--mode", fixtures[i][2], "--no-timing", "--report", str(rep)])
            outs.append((code, rep.read_bytes()))
        reports_same &= outs[0] == outs[1]

    sweeps_same = True
    for _, m, qa in _dichotomic_fixtures():
        base = sweep_csv(cesaro_sweep(m, N_LIST, qa, workers=1))
        sweeps_same &= all(sweep_csv(cesaro_sweep(m, N_LIST, qa, workers=w)) == base for w in (2, 4))
    capsys.readouterr()
    record(
        10,
        fixtures_same and reports_same and sweeps_same,
        f"fixtures byte-identical: {fixtures_same}, reports byte-identical: {reports_same}, "
        f"sweep independent of workers: {sweeps_same}",
    )
