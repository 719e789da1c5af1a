"""Time-fractional diffusion: MINPO against discretized-residual networks over alpha and N_t.

    python scripts/exp3_fractional.py --out results/exp3 --seeds 0 1 2
"""

from _common import execute, parser, setup, write_table


def main():
    p = parser(__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=[0.5])
    p.add_argument("--n-t", type=int, nargs="+", default=[10])
    p.add_argument("--methods", nargs="+", default=["minpo-kan", "fpikan", "minpo-mlp", "fpinn"])
    args = p.parse_args()
    root = setup(args)
    rows = []
    for alpha in args.alphas:
        for n_t in args.n_t:
            for seed in args.seeds:
                for method in args.methods:
                    tag = f"{method}-a{alpha}-nt{n_t}-s{seed}"
                    rows.append(execute(root, tag, experiment="exp3", method=method, alpha=alpha, n_t=n_t,
                                        seed=seed, adam_iters=args.adam_iters, lbfgs_iters=args.lbfgs_iters))
    write_table(root / "table.csv", rows)


if __name__ == "__main__":
    main()
