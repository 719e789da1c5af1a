"""Nested 3D IDE: MINPO and auxiliary-field networks against the finite-difference solvers.

    python scripts/exp2_nested3d.py --out results/exp2
"""

from _common import execute, parser, setup, write_table


def main():
    p = parser(__doc__)
    p.add_argument("--methods", nargs="+", default=["minpo-kan", "minpo-mlp", "apinn", "apikan"])
    p.add_argument("--nx", type=int, nargs="+", default=[10, 15, 20, 25])
    args = p.parse_args()
    root = setup(args)
    rows = []
    for scheme in ("fd-forward", "fd-upwind"):
        for nx in args.nx:
            rows.append(execute(root, f"{scheme}-nx{nx}", experiment="exp2", method=scheme, nx=nx, n_i=20))
    for seed in args.seeds:
        for method in args.methods:
            rows.append(execute(root, f"{method}-s{seed}", experiment="exp2", method=method, seed=seed,
                                adam_iters=args.adam_iters, lbfgs_iters=args.lbfgs_iters))
    write_table(root / "table.csv", rows)


if __name__ == "__main__":
    main()
