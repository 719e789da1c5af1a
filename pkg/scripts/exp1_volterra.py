"""Volterra IDE: forward problem for several kappa, inverse kappa recovery, baselines.

    python scripts/exp1_volterra.py --out results/exp1
"""

from _common import execute, parser, setup, write_table


def main():
    p = parser(__doc__)
    p.add_argument("--kappas", type=float, nargs="+", default=[0.3, 0.5, 0.8, 1.0])
    p.add_argument("--methods", nargs="+", default=["minpo-kan", "minpo-mlp", "apinn", "apikan"])
    args = p.parse_args()
    root = setup(args)
    budget = dict(adam_iters=args.adam_iters, lbfgs_iters=args.lbfgs_iters)
    rows = []
    for seed in args.seeds:
        for method in args.methods:
            for kappa in args.kappas:
                tag = f"forward-{method}-k{kappa}-s{seed}"
                rows.append(execute(root, tag, experiment="exp1-forward", method=method, kappa=kappa,
                                    seed=seed, **budget))
            tag = f"inverse-{method}-s{seed}"
            rows.append(execute(root, tag, experiment="exp1-inverse", method=method, kappa=0.8, seed=seed, **budget))
    write_table(root / "table.csv", rows)


if __name__ == "__main__":
    main()
