"""Equilibrium success fraction at D=300, d_eq=297 across epsilon.

Shows where the all-eigenstates requirement starts to hold.
"""

import argparse

from qergodic.typicality import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.01, 0.015, 0.02, 0.03])
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    print("eps     success  wilson_lo  eig_all_pass  worst_case_pass")
    for eps in args.eps:
        cfg = ExperimentConfig.from_dict({"variant": "equilibrium", "D": 300, "dims": [297, 3],
                                          "trials": args.trials, "seed": {"master_seed": 7},
                                          "params": {"epsilon": eps, "delta_prime": 0.1}})
        est = run_experiment(cfg, workers=args.threads)
        dg = est.diagnostics
        print(f"{eps:<7} {est.success_fraction:<8.3f} {est.confidence_interval[0]:<10.3f} "
              f"{dg['eigenstates_all_pass_fraction']:<13.3f} {dg['worst_case_probe_pass_fraction']:.3f}")


if __name__ == "__main__":
    main()
