"""Deterministic and probabilistic thresholds of the built-in qubit scenarios against their closed forms.

    python3 scripts/reproduce_qubit_scenarios.py [--grid 2000] [--restarts 32]
"""

import argparse
import math
import time

import numpy as np

from cftbench import QubitScenario, closed_form_cft, deterministic_cft_qubit, probabilistic_cft, scenario_ensemble


def scenarios():
    angles = np.linspace(0.2, math.pi / 2, 4)
    for delta in (0.0, 0.3, 0.6):
        for a in angles:
            yield QubitScenario("pair", alpha=a, beta=math.pi / 3, delta=delta)
    for n in (3, 4, 6):
        for a in angles:
            yield QubitScenario("symmetric", alpha=a, beta=a, n=n)
    for a in (math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2):
        yield QubitScenario("mirror", alpha=a)
    for a, b in ((0.3, 0.5), (0.6, 0.8), (1.2, 0.2), (1.4, 0.5)):
        yield QubitScenario("two_pairs", alpha=a, beta=b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=2000)
    ap.add_argument("--restarts", type=int, default=32)
    args = ap.parse_args()
    print(f"{'scenario':<11}{'params':<34}{'det':>12}{'det ref':>12}{'prob':>12}{'prob ref':>12}{'s':>7}")
    worst = 0.0
    for s in scenarios():
        t0 = time.perf_counter()
        ens = scenario_ensemble(s)
        det = deterministic_cft_qubit(ens, grid=args.grid).value
        prob = probabilistic_cft(ens, restarts=args.restarts).value
        cf = closed_form_cft(s)
        worst = max(worst, abs(det - cf.det_value), abs(prob - cf.prob))
        params = ", ".join(f"{k}={v:.3f}" if isinstance(v, float) else f"{k}={v}" for k, v in s.params().items())
        print(f"{s.kind:<11}{params:<34}{det:12.8f}{cf.det_value:12.8f}{prob:12.8f}{cf.prob:12.8f}"
              f"{time.perf_counter() - t0:7.2f}")
    print(f"largest deviation from the closed forms: {worst:.2e}")


if __name__ == "__main__":
    main()
