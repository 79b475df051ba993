"""Plot best objective against evaluations from one or more trace CSVs.

    python3 scripts/plot_trace.py runs/bland/trace.csv [more.csv ...] [-o out.png]
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from tabutruss.runner import read_trace  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("traces", nargs="+")
    ap.add_argument("-o", "--output", default="trace.png")
    args = ap.parse_args()
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in args.traces:
        rows = read_trace(path)
        ax.step([r.evaluations for r in rows], [r.best_objective for r in rows], where="post", label=path)
    ax.set_xlabel("evaluations")
    ax.set_ylabel("best objective")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
