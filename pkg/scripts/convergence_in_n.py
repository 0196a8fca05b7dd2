"""How the discretized eraser statistics settle as the angle count N grows.

For each N prints the delayed/non-delayed residual, the D1 share of the
second experiment and the D1 fringe visibility of the exact (noise-free)
expected counts at the default histogram binning.

    python3 scripts/convergence_in_n.py --envelope fraunhofer_sinc2
"""

import argparse
import time

import numpy as np

from delayed_choice import eraser
from delayed_choice.eraser import EraserConfig
from delayed_choice.runs import DEFAULT_BINS, Histogram, binned, screen_bin_edges, visibility


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--envelope", choices=eraser.ENVELOPES, default="fraunhofer_sinc2")
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64, 128, 256, 512])
    args = ap.parse_args()

    print(f"{'N':>5} {'|A-A_prime|':>12} {'P(D1)':>9} {'V(D1) exact':>12} {'time s':>7}")
    for N in args.sizes:
        cfg = EraserConfig(N=N, envelope=args.envelope)
        t0 = time.perf_counter()
        diff = eraser.verify_eraser_identity(cfg).max_abs_diff if N <= 256 else float("nan")
        joint = eraser.joint_distribution(cfg, 2)
        elapsed = time.perf_counter() - t0
        edges = screen_bin_edges(joint.x, DEFAULT_BINS)
        expected = binned(joint.x, joint.probs[:, 0], edges)
        env = binned(joint.x, eraser.incoherent_envelope(cfg, 2).probs[:, 0], edges)
        # large constant scale so the integer histogram keeps the exact shape
        h = Histogram("D1", edges, np.round(expected * 1e12).astype(np.int64))
        v = visibility(h, env * 1e12).value
        print(f"{N:>5} {diff:>12.1e} {joint.detector_totals()['D1']:>9.5f} {v:>12.4f} {elapsed:>7.2f}")


if __name__ == "__main__":
    main()
