#!/usr/bin/env python3
"""
Plot a sweep CSV written by `rci-secrecy sweep`, `power-alloc` or `alpha-search`.

One curve per scheme (and per K when the CSV has a K column), mean rate
against SNR with standard-error bars. Needs the optional `plot` extra.
"""

import os
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from services.src.experiments.results import SweepResult  # noqa: E402


def plot_sweep(csv_path: Path, output: Path, per_antenna: bool = False) -> bool:
    """Render the sweep in csv_path to output; returns False on failure."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        from matplotlib import pyplot as plt
    except ImportError:
        print("❌ matplotlib not found. Install the plot extra: pip install -e '.[plot]'")
        return False

    result = SweepResult.from_csv(csv_path)
    if not result.per_point:
        print(f"❌ No data rows in {csv_path}")
        return False
    K = result.metadata.get("config", {}).get("K")

    curves = {}
    for point in result.per_point:
        label = point.scheme
        if "K" in point.extra:
            label = f"{label} (K={int(point.extra['K'])})"
        curves.setdefault(label, []).append(point)

    plt.figure()
    for label, points in curves.items():
        points = sorted(points, key=lambda p: p.snr_db)
        scale = 1.0
        if per_antenna:
            scale = 1.0 / (points[0].extra.get("K") or K or 1.0)
        plt.errorbar(
            [p.snr_db for p in points],
            [p.mean_rate_bits * scale for p in points],
            yerr=[p.std_err * scale for p in points],
            marker="o",
            capsize=3,
            label=label,
        )
    plt.xlabel("SNR (dB)")
    plt.ylabel("Secrecy rate per antenna (bits)" if per_antenna else "Secrecy sum-rate (bits)")
    plt.title(result.metadata.get("kind", csv_path.stem))
    plt.legend()
    plt.grid(True)
    plt.savefig(output, bbox_inches="tight")
    plt.close()
    print(f"✅ Plot saved to {output}")
    return True


def main():
    """Main entry point."""
    import argparse

    parser = argparse.ArgumentParser(description="Plot a rci-secrecy sweep CSV")
    parser.add_argument("csv", help="Sweep CSV file")
    parser.add_argument("--output", help="Image path (default: CSV name with .png)")
    parser.add_argument("--per-antenna", action="store_true", help="Divide rates by K")

    args = parser.parse_args()
    csv_path = Path(args.csv)
    output = Path(args.output) if args.output else csv_path.with_suffix(".png")

    print("📈 rci-secrecy Sweep Plotter")
    print("=" * 40)

    if not csv_path.exists():
        print(f"❌ File not found: {csv_path}")
        sys.exit(1)
    if not plot_sweep(csv_path, output, per_antenna=args.per_antenna):
        sys.exit(1)


if __name__ == "__main__":
    main()
