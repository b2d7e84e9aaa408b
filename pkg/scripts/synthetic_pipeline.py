"""Generate a synthetic libraries.io-style export and run the full pipeline on it.

    python scripts/synthetic_pipeline.py --packages 300 --seed 7 --out runs/synthetic
"""

import argparse
import json
import sys
from pathlib import Path

from depstrat.cli import main as cli_main
from depstrat.synthetic import synthetic_ecosystem


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--packages", type=int, default=300)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--trees", type=int, default=500)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/synthetic"))
    args = ap.parse_args()

    paths = synthetic_ecosystem(args.out / "export", n_packages=args.packages, seed=args.seed)
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2), file=sys.stderr)
    return cli_main([
        "pipeline", "--projects", str(paths["projects"]), "--versions", str(paths["versions"]),
        "--dependencies", str(paths["dependencies"]), "--snapshot", "2020-01-12",
        "--seed", str(args.seed), "--trees", str(args.trees), "--threads", str(args.threads),
        "--out", str(args.out / "pipeline"),
    ])


if __name__ == "__main__":
    sys.exit(main())
