"""Compare the numpy and compiled kernels on representative problem sizes.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20]

Prints the mean time per call for each backend, the speedup and the largest
elementwise difference between the two results.
"""
import argparse
import math
import timeit

import numpy as np

from rabisim import kernels
from rabisim.core import ModelParams, build_window
from rabisim.qrm import operator_data
from rabisim.qrm_master import lindblad_rates


def wavefunction_case(alpha2, n_qubits, rng):
    params = ModelParams.from_pi_pulse(50.0, alpha=math.sqrt(alpha2), n_qubits=n_qubits)
    window = build_window(params.alpha, 1e-10)
    psi = rng.normal(size=(n_qubits + 1, window.width, 1)) + 1j * rng.normal(size=(n_qubits + 1, window.width, 1))
    ops = operator_data(params, window)
    return f"apply_h   N={n_qubits} alpha^2={alpha2} width={window.width}", "apply_h", (psi, *ops.args())


def master_case(alpha2, rng):
    params = ModelParams.from_pi_pulse(50.0, alpha=math.sqrt(alpha2), gamma=1e-4, gamma_phi=1e-4, kappa=1e-5,
                                      n_th=0.05, n_c=0.05)
    window = build_window(params.alpha, 1e-6)
    d = 2 * window.width
    v = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = v @ v.conj().T
    rho /= np.trace(rho).real
    ops = operator_data(params, window)
    args = (rho, ops.sq, ops.g, ops.detuning, ops.cr, ops.omega, lindblad_rates(params))
    return f"master_rhs alpha^2={alpha2} dim={d}", "master_rhs", args


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20, help="calls per timing (default 20)")
    args = parser.parse_args(argv)
    if kernels.compiled is None:
        parser.error("compiled kernels are not built; run `python3 setup.py build_ext --inplace`")

    rng = np.random.default_rng(0)
    cases = [wavefunction_case(5000, 1, rng), wavefunction_case(40000, 1, rng), wavefunction_case(5000, 3, rng),
             master_case(100, rng), master_case(400, rng)]
    print(f"{'case':48s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s} {'max |diff|':>11s}")
    for label, name, call_args in cases:
        results, times = {}, {}
        for backend in ("python", "compiled"):
            fn = getattr(kernels.get(backend), name)
            results[backend] = np.asarray(fn(0.7, *call_args))
            times[backend] = timeit.timeit(lambda: fn(0.7, *call_args), number=args.repeat) / args.repeat
        diff = float(np.max(np.abs(results["python"] - results["compiled"])))
        print(f"{label:48s} {1e3 * times['python']:12.3f} {1e3 * times['compiled']:14.3f} "
              f"{times['python'] / times['compiled']:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
