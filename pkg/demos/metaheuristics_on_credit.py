"""Six budgeted solvers on the 27-feature credit QUBO.

The instance comes from the validation half of the German credit data. The
exact optimum is found by enumeration first, then every solver runs with its
tuned configuration and a 5000-evaluation budget.
"""

import numpy as np

from qubofs import harness, qubo
from qubofs.heuristics import tuned_config, run


def main(runs: int = 10):
    _, inst = harness.credit_instances()
    exact = qubo.exact_minmax(inst)
    print(f"n = {inst.n}, h_min = {exact.h_min:.6f}, optimum {qubo.bitstring(exact.z_min)}")

    trace = run(inst, tuned_config("SAEA", inst.n, 5000, seed=1))
    first = int(np.argmax(trace.cumulative_best <= exact.h_min)) + 1
    print(f"single SAEA run: optimum first seen after {first} evaluations")

    res = harness.validate(inst, exact=exact, runs=runs, seed=0)
    print(f"\n{runs} runs per solver")
    print("algo   hits  best@100 (median)  AR last 50 (median)")
    for row in res.summary_rows():
        print(f"{row['algorithm']:5s}  {row['hits']:2d}/{row['runs']}  {row['best_at_100_median']:17.5f}  {row['ar_last50_median']:19.4f}")

    print("\nmedian gap to the optimum at selected budgets")
    for name, val in res.algorithms.items():
        curve = val.gap_curves()
        print(f"{name:5s}", "  ".join(f"{curve[k - 1, 2]:.4f}" for k in (100, 500, 1000, 5000)))


if __name__ == "__main__":
    main()
