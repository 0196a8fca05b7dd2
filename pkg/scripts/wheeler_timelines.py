"""Print the state at every stage of the three Wheeler scenarios, and the
delayed/non-delayed operator comparison.

    python3 scripts/wheeler_timelines.py
"""

import numpy as np

from delayed_choice import wheeler


def ket(state) -> str:
    terms = [
        f"{a.real:+.4f}|{lab}⟩"
        for a, lab in zip(state.amplitudes, state.labels)
        if abs(a) > 1e-12
    ]
    return " ".join(terms) or "0"


def main() -> None:
    for scenario in (1, 2, 3):
        print(f"scenario {scenario}")
        for t, state in wheeler.scenario_states(scenario).states:
            print(f"  t={t}: {ket(state)}")
        dist = wheeler.detector_distribution(scenario)
        print("  P:", ", ".join(f"{k}={v:.4f}" for k, v in dist.items()))
    rep = wheeler.verify_identity()
    np.set_printoptions(precision=4, suppress=True)
    print("A =\n", rep.delayed.real)
    print(f"max|A - A'| = {rep.max_abs_diff:.1e}, commutator = {rep.commutator_norm:.1e}")


if __name__ == "__main__":
    main()
