"""QAOA layer by layer on a small instance, followed by VQE.

Each new layer starts from angles proposed by the previous optimum
(extrapolation, linear and quadratic fits, or a zero angle appended).
"""

from qubofs import qubo, quantum
from qubofs.dataio import make_lending_standin
from qubofs.measures import DependencyTuple, build_matrices


def main():
    ds = make_lending_standin()
    inst = qubo.build(build_matrices(ds, DependencyTuple("Correl", "Correl")), 0.75, ds.label)
    exact = qubo.exact_minmax(inst)
    print(f"{inst.n} qubits, optimum {qubo.bitstring(exact.z_min)} with h = {exact.h_min:.4f}")
    print(f"random sampling AR {qubo.random_baseline(inst, 1000, exact=exact):.3f}")

    res = quantum.optimize_qaoa(inst, 4, seed=0, exact=exact)
    print("\n p  start        <h>       AR(shots)  AR(exact)  top bit-string")
    for layer in res.layers:
        top, freq = layer.shots.top(1)[0]
        print(f"{layer.params.p:2d}  {layer.start:11s} {layer.expectation:9.4f}  {layer.ratio:9.4f}  {layer.exact_ratio:9.4f}  {top} ({freq:.2f})")
    print(f"simulator calls: {len(res.trace)}")

    for layers in (0, 1, 2):
        vqe = quantum.optimize_vqe(inst, layers=layers, seed=0, exact=exact)
        print(f"VQE L={layers}: <h> = {vqe.expectation:.4f}, AR = {vqe.ratio:.4f}")


if __name__ == "__main__":
    main()
