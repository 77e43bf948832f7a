"""Named experiments that regenerate the reference tables.

Each experiment writes ``<name>.csv`` and ``<name>.json`` into the output
directory.  The JSON summary carries ``passed`` plus the thresholds used.
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import fractal, khodak, qmc, refine, sequences
from .discrepancy import star_discrepancy_prefixes
from .errors import UnknownExperiment

SCHEMA = 1


def _vdc_bound(n_max: int = 2**16):
    scaled = star_discrepancy_prefixes(sequences.van_der_corput(n_max))
    rows, violations = [], 0
    for n, value in enumerate(scaled, start=1):
        bound = math.log(n + 1) / math.log(2)
        # log(N+1)/log 2 is an integer exactly at N = 2**j - 1; compare there in integers
        if (n + 1) & n == 0:
            ok = value <= (n + 1).bit_length() - 1
        else:
            ok = float(value) <= bound
        violations += not ok
        rows.append((n, float(value), bound))
    summary = {"n_max": n_max, "violations": violations, "max_ratio": max(r[1] / r[2] for r in rows)}
    return ["N", "N_Dstar", "log2_N_plus_1"], rows, summary, violations == 0


def _fibonacci(n_max: int = 25):
    rule = refine.ls_rule(1, 1)
    rows = []
    fib = [1, 2]
    while len(fib) <= n_max:
        fib.append(fib[-1] + fib[-2])
    for part in refine.rho_refine_steps(rule, n_max):
        rows.append((part.step, part.k, part.k * part.discrepancy()))
    counts_ok = all(k == fib[n] for n, k, _ in rows)
    band = [value for n, _, value in rows if 5 <= n <= n_max]
    ratio = max(band) / min(band)
    summary = {"n_max": n_max, "fibonacci_counts": counts_ok, "band_ratio": ratio, "band_limit": 10}
    return ["n", "k", "k_D"], rows, summary, counts_ok and ratio <= 10


def _khodak_rational(n_lo: int = 8, n_hi: int = 22):
    probs = [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]
    rule = refine.RefinementRule.rational(probs)
    sd = khodak.spectral_analysis(rule)
    thresholds = khodak.r_sequence(rule, n_hi)
    rows, ok = [], True
    for part in refine.rho_refine_steps(rule, n_hi):
        n = part.step
        if n < n_lo:
            continue
        m_r = khodak.m_of_r(rule, thresholds[n - 1])
        predicted = khodak.predicted_mr_rational(sd, len(probs), thresholds[n - 1])
        rel = abs(m_r - predicted) / m_r
        bound = 5 * part.k ** (-min(sd.eta, 1.0)) * math.log(part.k) ** sd.d
        ok = ok and m_r == part.k and rel <= bound
        rows.append((n, part.k, m_r, predicted, rel, bound))
    summary = {"eta": sd.eta, "d": sd.d, "lambda": sd.lam, "c_prime": sd.c_prime}
    return ["n", "k", "M_r", "predicted", "rel_error", "bound"], rows, summary, ok


def _irrational(n_lo: int = 20, n_hi: int = 60, p: float = 0.3):
    rule = refine.alpha_rule(p)
    rows, ok = [], True
    last = None
    for part in refine.rho_refine_steps(rule, n_hi):
        if part.step < n_lo:
            continue
        predicted = khodak.predicted_kn_irrational(p, part.step)
        ratio = part.k / predicted
        ok = ok and 0.3 <= ratio <= 3
        last = part.discrepancy()
        rows.append((part.step, part.k, predicted, ratio, last))
    summary = {"p": p, "final_D": last, "D_limit": 0.02}
    return ["n", "k", "predicted", "ratio", "D"], rows, summary, ok and last < 0.02


def _fractal_elem(n_max: int = 10**4):
    rows, ok, summary = [], True, {}
    for name in ("sierpinski-right", "cantor"):
        fp = fractal.vdc_fractal_points(fractal.preset(name), n_max)
        sweep = fractal.elementary_discrepancy_sweep(fp)
        top = max(sweep)
        ok = ok and top <= 1 and top >= Fraction(9, 10)
        summary[name] = {"max_N_D": float(top)}
        rows.extend((name, n, float(v)) for n, v in enumerate(sweep, start=1))
    return ["preset", "N", "N_D"], rows, summary, ok


def _qmc_vs_mc(count: int = 2**12, seeds: int = 100):
    rows, ok, summary = [], True, {}
    points = sequences.van_der_corput(count)
    for name in ("id", "sq", "ramp"):
        f = qmc.INTEGRANDS[name]
        exact = float(f.exact_integral)
        q_err = abs(qmc.qmc_integrate(points, f) - exact)
        wins = 0
        for seed in range(seeds):
            m_err = abs(qmc.mc_baseline(count, seed, f) - exact)
            wins += q_err < m_err
            rows.append((name, seed, q_err, m_err))
        summary[name] = {"qmc_wins": wins}
        ok = ok and wins >= 0.9 * seeds
    return ["integrand", "seed", "qmc_error", "mc_error"], rows, summary, ok


EXPERIMENTS: dict[str, Callable] = {
    "vdc-bound": _vdc_bound,
    "fibonacci-discrepancy": _fibonacci,
    "khodak-rational": _khodak_rational,
    "irrational-p03": _irrational,
    "fractal-elem": _fractal_elem,
    "qmc-vs-mc": _qmc_vs_mc,
}


def run_experiment(name: str, out_dir) -> dict:
    """Run one experiment, write its CSV and JSON files, return the summary."""
    if name not in EXPERIMENTS:
        raise UnknownExperiment(name, EXPERIMENTS)
    header, rows, summary, passed = EXPERIMENTS[name]()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{name}.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    report = {"schema": SCHEMA, "experiment": name, "passed": bool(passed), "rows": len(rows), **summary}
    with open(out / f"{name}.json", "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=2, allow_nan=False, default=float)
    return report
