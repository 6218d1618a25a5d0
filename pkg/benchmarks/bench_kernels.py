#!/usr/bin/env python3
"""Benchmark the numba fast path against the pure-numpy fallback.

The workloads mirror the package's hot loops: end-to-end amplitude scans
over dense time grids and survival-record synthesis for tomography.
Run directly::

    python benchmarks/bench_kernels.py

Force the numpy path in the rest of the package with
``SPIN1CHAIN_NO_NUMBA=1``; here both implementations are timed explicitly.
"""

import time

import numpy as np

from spin1chain import kernels
from spin1chain.dynamics import evolution_cache
from spin1chain.hamiltonians import ChainSpec, chain_hamiltonian, pst_preset, up_block
from spin1chain.linalg import eig_hermitian
from spin1chain.spin_ops import basis_index


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def scan_workload():
    """Four-site end-to-end amplitude scan on [0, 40 pi], step 1e-3."""
    chain = chain_hamiltonian(ChainSpec(n=4, kind="heisenberg_squared_sum"))
    cache = evolution_cache(chain)
    src, tgt = basis_index("0001"), basis_index("1000")
    coeffs = cache.eigenvectors[tgt, :] * np.conj(cache.eigenvectors[src, :])
    keep = np.abs(coeffs) > 1e-16
    energies = np.ascontiguousarray(cache.eigenvalues[keep])
    coeffs = np.ascontiguousarray(coeffs[keep])
    times = np.arange(0.0, 40 * np.pi, 1e-3)
    return energies, coeffs, times


def record_workload():
    """Survival-amplitude record of a 24-site block on 100k time points."""
    block = up_block(pst_preset(24, "standard"))
    es = eig_hermitian(block)
    weights = (np.abs(es.eigenvectors[0, :]) ** 2).astype(complex)
    times = np.linspace(0.0, 200.0, 100_000)
    return np.ascontiguousarray(es.eigenvalues), weights, times


def main():
    workloads = {
        "amplitude scan (48 freqs x 125664 t)": scan_workload(),
        "record synthesis (24 freqs x 100000 t)": record_workload(),
    }
    print(f"active backend for the package: {kernels.backend_name()}")
    if not kernels._NUMBA_AVAILABLE:
        print("numba not importable: only the numpy path is timed")
    print()
    header = f"{'workload':42s} {'numpy':>10s} {'numba':>10s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for name, (energies, coeffs, times) in workloads.items():
        t_numpy = best_of(lambda: kernels._phase_series_numpy(energies, coeffs, times, 1.0))
        if kernels._NUMBA_AVAILABLE:
            kernels._phase_series_numba(energies, coeffs, times, 1.0)  # compile
            t_numba = best_of(lambda: kernels._phase_series_numba(energies, coeffs, times, 1.0))
            out_numpy = kernels._phase_series_numpy(energies, coeffs, times, 1.0)
            out_numba = kernels._phase_series_numba(energies, coeffs, times, 1.0)
            agreement = float(np.max(np.abs(out_numpy - out_numba)))
            assert agreement < 1e-10, f"backends disagree by {agreement}"
            print(f"{name:42s} {t_numpy * 1e3:8.1f}ms {t_numba * 1e3:8.1f}ms "
                  f"{t_numpy / t_numba:8.2f}x")
        else:
            print(f"{name:42s} {t_numpy * 1e3:8.1f}ms {'-':>10s} {'-':>9s}")


if __name__ == "__main__":
    main()
