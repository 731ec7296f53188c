#!/usr/bin/env python3
"""Refinement-convergence study on a discretized normal position.

Prints a curves CSV (level,value,l1_gap) per measure, plus the constructive
bounded-sequence gaps, suitable for external plotting.

Usage: python scripts/convergence_study.py [--atoms 1000] [--depth 10]
"""

import argparse
from statistics import NormalDist

import numpy as np

from scenrisk import (
    FiniteProbSpace,
    RandomVariable,
    RiskFunctional,
    cond_exp,
    discretization_slack,
    lemma21_sequence,
    refinement_convergence,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--atoms", type=int, default=1000)
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--n-max", type=int, default=15)
    args = ap.parse_args()

    nd = NormalDist()
    space = FiniteProbSpace.uniform(args.atoms)
    x = RandomVariable(
        space, np.array([nd.inv_cdf((i + 0.5) / args.atoms) for i in range(args.atoms)])
    )

    measures = [
        RiskFunctional.avar(0.25),
        RiskFunctional.avar(0.5),
        RiskFunctional.higher_order(2.0, 2.0),
    ]
    for rho in measures:
        print(f"# measure={rho.label} direct={rho(x):.12g}")
        print("level,value,l1_gap")
        for pt in refinement_convergence(rho, x, args.depth):
            print(f"{pt.level},{pt.value:.12g},{pt.l1_gap:.6g}")
        print()

    delta = discretization_slack(x)
    print(f"# constructive sequence (slack delta={delta:.6g})")
    print("n,k1,cells,l1_gap,l1_bound")
    for part, k1, eps in lemma21_sequence(x, args.n_max):
        gap = (cond_exp(x, part) - x).l1()
        print(f"{round(1/eps)},{k1:g},{part.n_cells},{gap:.6g},{eps*(3+2*k1)+delta:.6g}")


if __name__ == "__main__":
    main()
