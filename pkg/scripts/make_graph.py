"""Write a graph file: a random k-regular graph, or a cycle with --cycle.

    python scripts/make_graph.py --p 10 --k 3 --seed 1 --out g10.txt
    python scripts/make_graph.py --p 8 --cycle --out cycle8.txt
"""

import argparse

from suffstat.graphs import Graph, format_graph, random_regular_graph


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--p", type=int, required=True)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--cycle", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    g = Graph.cycle(args.p) if args.cycle else random_regular_graph(args.p, args.k, seed=args.seed)
    text = format_graph(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
