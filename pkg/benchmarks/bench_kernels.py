"""Time the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each case is run once beforehand so numba compile time is excluded.
"""
import argparse
import time

import numpy as np

from trotterlab import kernels
from trotterlab._accel import HAVE_NUMBA
from trotterlab.matcore import HermitianOperator, unitary_exp


def _unitary(dim, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return unitary_exp(HermitianOperator.from_upper(X + X.conj().T), 0.3).matrix


def cases():
    rng = np.random.default_rng(0)
    for dim, n in ((6, 100_000), (32, 20_000), (400, 1000)):
        U = _unitary(dim, dim)
        X = (rng.standard_normal((dim, 1)) + 0j)
        yield f"power_apply dim={dim} n={n}", kernels.power_apply_numpy, kernels.power_apply_numba, (U, X, n)
    lam = 4 * np.pi ** 2 * np.arange(1, 200_001, dtype=float) ** 2
    w = lam ** -1.5
    ts = np.geomspace(1e-6, 1e-3, 64)
    yield "increment_norms modes=2e5 grid=64", kernels.increment_norms_numpy, kernels.increment_norms_numba, (lam, w, ts)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    AA = A.conj().T @ A
    G = np.diag([0.0, 1.0, 2.0, 3.0]).astype(complex)
    Z = rng.standard_normal((100_000, 4)) + 1j * rng.standard_normal((100_000, 4))
    yield "energy_samples samples=1e5 dim=4", kernels.energy_samples_numpy, kernels.energy_samples_numba, (AA, G, Z, 1.0)


def best_of(fn, args, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'case':40s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s}")
    for name, f_np, f_nb, a in cases():
        r_np = f_np(*a)
        r_nb = f_nb(*a)  # warm-up / compile
        assert np.allclose(r_np, r_nb, rtol=1e-9, atol=1e-12), name
        t_np = best_of(f_np, a, args.repeat)
        t_nb = best_of(f_nb, a, args.repeat)
        print(f"{name:40s} {t_np:11.4f} {t_nb:11.4f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
