"""From a dataset to a selected feature subset.

Builds the dependency matrices for the breast cancer data, turns them into a
QUBO for a few values of phi, solves each instance exactly and scores the
selection with the logistic benchmark. The classical baselines follow.
"""

import numpy as np

from qubofs import harness, mleval, qubo
from qubofs.dataio import load_breast_cancer
from qubofs.measures import DependencyTuple, build_matrices


def main():
    ds = load_breast_cancer()
    print(f"{ds.label}: {ds.n_rows} rows, {ds.n_features} features")

    tup = DependencyTuple("Correl", "Anova")
    matrices = build_matrices(ds, tup)
    print(f"\ndependency tuple {tup}")
    print(" phi   h_min        subset      AUROC   ACC")
    for phi in (0.25, 0.5, 0.75, 0.9, 1.0):
        inst = qubo.build(matrices, phi, ds.label)
        sol = qubo.exact_minmax(inst)
        s = harness.score_subset(ds, sol.z_min)
        print(f"{phi:4.2f}  {sol.h_min:11.4f}  {qubo.bitstring(sol.z_min)}  {s.auroc:.4f}  {s.accuracy:.4f}")

    print("\nall eight tuples at phi = 0.75")
    for row in harness.compare_tuples(ds, 0.75):
        r = row.row()
        print(f"  {str(row.tuple):14s} value {r['value']:11.4f}  k={r['n_features']:2d}  AUROC {r['auroc']:.4f}")

    print("\nbaselines")
    for r in harness.selection_table(ds):
        print(f"  {r['method']:12s} AUROC {r['auroc']:.4f}  ACC {r['accuracy']:.4f}  k={r['n_features']}")

    elim = mleval.rfe(ds)
    print("\nRFE path (AUROC per step):", np.round([s.auroc for s in elim.scores], 4).tolist())


if __name__ == "__main__":
    main()
