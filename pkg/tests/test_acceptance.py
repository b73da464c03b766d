"""Exit criteria for the simulator, run at desk scale (256x256, 200 steps).

Each test records one PASS/FAIL line that is echoed in the pytest terminal
summary under "acceptance criteria".
"""
import functools
import itertools

import numpy as np
import pytest
from scipy import stats

from taxlattice.cli import main as cli_main
from taxlattice.dynamics import sweep
from taxlattice.feedback import field_delta
from taxlattice.lattice import SpinGrid, energy_by_bonds
from taxlattice.scenarios import SweepResult, SweepRow, SweepSpec, preset
from taxlattice.simulation import run, stationarity_distance

from conftest import ACCEPTANCE_LINES, uniform_society

SEEDS = range(5)


def report(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@functools.lru_cache(maxsize=None)
def preset_run(name, label, seed=0, steps=None, snapshots=()):
    cfg = preset(name).variants[label].replace(seed=seed)
    if steps is not None:
        cfg = cfg.replace(steps=steps)
    return run(cfg, snapshot_steps=snapshots)


def stationary(name, label, seed=0):
    return preset_run(name, label, seed).stationary_noncompliance(100, 200)


# 1 ---------------------------------------------------------------------------

def exact_boltzmann(field, temperature):
    weights = []
    for bits in itertools.product((-1, 1), repeat=4):
        energy = energy_by_bonds(SpinGrid(2, 2, bits), field)
        weights.append(np.exp(-energy / temperature))
    weights = np.array(weights)
    return weights / weights.sum()


def test_c01_boltzmann_equivalence():
    n_sweeps, temperature = 10**6, 5.0
    place = np.array([8, 4, 2, 1])
    details, ok = [], True
    for field in (-2.0, 0.0, 3.0):
        society = uniform_society(2, 2, temperature=temperature, field=field)
        grid, rng = SpinGrid.filled(2, 2, 1), np.random.default_rng(1)
        for _ in range(1000):
            sweep(grid, society, None, rng)
        counts = np.zeros(16, dtype=np.int64)
        for _ in range(n_sweeps):
            sweep(grid, society, None, rng)
            counts[int(((grid.spins > 0) * place).sum())] += 1
        pvalue = stats.chisquare(counts, exact_boltzmann(field, temperature) * n_sweeps).pvalue
        ok &= pvalue > 0.01
        details.append(f"B={field:+g}: p={pvalue:.3f}")
    report(1, ok, "2x2 chi-square vs enumeration, " + ", ".join(details))


# 2 ---------------------------------------------------------------------------

def test_c02_copying_equilibrium():
    values = [stationary("fig1b", "h5", seed) for seed in SEEDS]
    ok = all(0.03 <= v <= 0.06 for v in values)
    report(2, ok, "pure b-types p_noncp " + ", ".join(f"{v:.4f}" for v in values) + " in [0.03, 0.06]")


# 3, 4 ------------------------------------------------------------------------

def test_c03_random_agents_steady_state():
    h5, h10 = stationary("fig1d", "h5"), stationary("fig1d", "h10")
    ok = abs(h5 - 0.40) <= 0.03 and abs(h10 - 0.333) <= 0.03
    report(3, ok, f"pure d-types h=5: {h5:.4f} (0.40+-0.03), h=10: {h10:.4f} (0.333+-0.03)")


def test_c04_selfish_agents_without_feedback():
    h5, h10 = stationary("fig1a", "h5"), stationary("fig1a", "h10")
    ok = abs(h5 - 0.667) <= 0.03 and abs(h10 - 0.500) <= 0.03
    report(4, ok, f"pure a-types h=5: {h5:.4f} (0.667+-0.03), h=10: {h10:.4f} (0.500+-0.03)")


# 5 ---------------------------------------------------------------------------

def test_c05_ethical_agents():
    cfg = preset("fig1c").variants["h5"]
    audited = run(cfg).stationary_noncompliance(100, 200)
    unaudited = run(cfg.replace(audit_prob=0.0)).stationary_noncompliance(100, 200)
    ok = audited < 0.005 and unaudited < 0.005 and abs(audited - unaudited) <= 0.002
    report(5, ok, f"pure c-types p_noncp {audited:.5f} (p_a=0.1) vs {unaudited:.5f} (p_a=0)")


# 6 ---------------------------------------------------------------------------

def fig2_sweep(name):
    spec = SweepSpec("dB_max", [1, 2, 3, 4, 5], list(SEEDS), base=preset(name).variants["dBmax0"])
    rows = []
    for dbm, seed in itertools.product(spec.values, spec.seeds):
        result = preset_run(name, f"dBmax{int(dbm)}", seed)
        rows.append(SweepRow(dbm, seed, result.final_mean_a_field, result.stationary_noncompliance(100, 200)))
    return SweepResult(spec, rows)


def test_c06_feedback_regime_crossover():
    failures = []
    top = fig2_sweep("fig2-top")
    majority = top.majority_compliant()
    baseline = np.mean([stationary("fig2-top", "dBmax0", s) for s in SEEDS])
    for dbm in (1, 2):
        if majority[dbm]:
            failures.append(f"1%: dBmax={dbm} compliant")
    for dbm in (3, 4, 5):
        mean_p = np.mean([r.p_noncp_stationary for r in top.rows if r.param == dbm])
        if not majority[dbm]:
            failures.append(f"1%: dBmax={dbm} not compliant")
        if mean_p > 0.5 * baseline:
            failures.append(f"1%: dBmax={dbm} p_noncp {mean_p:.3f} > half of {baseline:.3f}")
    bottom = fig2_sweep("fig2-bottom")
    for name, result, target in (("1%", top, 2.5), ("5%", bottom, 4.5)):
        crit = result.critical
        if crit is None or abs(crit - target) > 1.0:
            failures.append(f"{name}: critical estimate {crit} vs {target}+-1")
    fields = {dbm: np.mean([r.mean_a_field for r in top.rows if r.param == dbm]) for dbm in (1, 2, 3, 4, 5)}
    detail = "mean a-field (1%) " + ", ".join(f"{k}:{v:.2f}" for k, v in fields.items())
    report(6, not failures, detail + ("; " + "; ".join(failures) if failures else ""))


# 7 ---------------------------------------------------------------------------

def test_c07_field_distribution_is_stationary():
    distances = {}
    for dbm in (1, 4):
        result = preset_run("fig2-top", f"dBmax{dbm}", 0, 1000, (200,))
        distances[dbm] = stationarity_distance(result.snapshots[200], result.histogram)
    ok = all(d < 0.05 for d in distances.values())
    report(7, ok, "TV(t=200, t=1000) " + ", ".join(f"dBmax={k}: {v:.4f}" for k, v in distances.items()))


# 8, 9 ------------------------------------------------------------------------

def reduction(name, share, seeds=range(3)):
    fb = np.mean([stationary(name, f"a{share}_feedback", s) for s in seeds])
    nofb = np.mean([stationary(name, f"a{share}_nofeedback", s) for s in seeds])
    return fb, nofb


def test_c08_mixed_society_feedback():
    fb50, nofb50 = reduction("fig3a", 50)
    fb0, nofb0 = reduction("fig3a", 0)
    ok = fb50 <= 0.5 * nofb50 and abs(fb0 - nofb0) < 0.02
    report(8, ok, f"a=50%: {fb50:.4f} with vs {nofb50:.4f} without (need <= half); "
                  f"a=0%: |diff|={abs(fb0 - nofb0):.4f} (< 0.02)")


def test_c09_weak_feedback():
    parts, ok = [], True
    for share in (30, 40, 50):
        fb1, nofb = reduction("fig3a", share)
        fb5, _ = reduction("fig3b", share)
        r1, r5 = nofb - fb1, nofb - fb5
        ok &= r5 < r1
        parts.append(f"a={share}%: 5% {r5:+.4f} < 1% {r1:+.4f}")
    report(9, ok, "; ".join(parts))


# 10 --------------------------------------------------------------------------

def test_c10_determinism_and_no_feedback_equivalence(tmp_path):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert cli_main(["run", "--dims", "256x256", "--seed", "7", "--out-dir", str(out)]) == 0
        outputs.append(b"".join((out / f).read_bytes() for f in ("timeseries.csv", "histogram.csv")))
    identical = outputs[0] == outputs[1]

    cfg = preset("fig2-top").variants["dBmax0"]
    zero = run(cfg)
    disabled = run(cfg.replace(feedback=False))
    equivalent = (zero.timeseries_csv() == disabled.timeseries_csv()
                  and np.array_equal(zero.society.fields, disabled.society.fields))
    report(10, identical and equivalent,
           f"byte-identical CSVs: {identical}; dBmax=0 == feedback off: {equivalent}")


# 11 --------------------------------------------------------------------------

TABLE = [
    # (provision condition, behaviour changes it applies to, field change in units of the step)
    (lambda dp, m: abs(dp) < m, (-2, 0, 2), 0),
    (lambda dp, m: abs(dp) > m, (0,), 0),
    (lambda dp, m: dp > m, (2,), +1),
    (lambda dp, m: dp < -m, (2,), -1),
    (lambda dp, m: dp > m, (-2,), -1),
    (lambda dp, m: dp < -m, (-2,), +1),
]


@pytest.mark.parametrize("threshold", [0.0, 0.01, 0.05])
def test_c11_rule_table(threshold):
    step = 1.75
    provisions = [s * f for s in (-1, 1) for f in (0.0, threshold / 2, threshold * 1.01 + 1e-6, 0.3)]
    rows_hit, checked, ok = set(), 0, True
    for dp, ds in itertools.product(provisions, (-2, 0, 2)):
        matches = [(k, sign) for k, (cond, behaviours, sign) in enumerate(TABLE)
                   if cond(dp, threshold) and ds in behaviours]
        if not matches:
            continue  # |dp| == threshold, not covered by the table
        assert len({sign for _, sign in matches}) == 1
        rows_hit.update(k for k, _ in matches)
        ok &= field_delta(dp, threshold, ds, step) == matches[0][1] * step
        checked += 1
    all_rows = rows_hit == set(range(len(TABLE))) if threshold > 0 else rows_hit >= {1, 2, 3, 4, 5}
    report(11, ok and all_rows, f"threshold {threshold}: {checked} cells exact, table rows hit {sorted(rows_hit)}")
