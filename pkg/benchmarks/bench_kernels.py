"""Time the numba loops against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each case runs once per backend untimed (numba compilation, group
enumeration) and then ``--repeat`` times; the best wall time is reported
along with the largest relative disagreement between the two backends.
"""
import argparse
import time

from repelling import _accel
from repelling.energy import basis_for, energy_and_gradient_geometric, energy_spectral
from repelling.kernels import KernelPair
from repelling.manifolds import TorusModel, bolza
from repelling.optimize import uniform_random_configuration


def _cases():
    t2 = TorusModel((1.0, 1.0))
    k2 = KernelPair(0.05, dim=2)
    x64 = uniform_random_configuration(t2, 64, 1)
    x256 = uniform_random_configuration(t2, 256, 2)
    b256 = basis_for(t2, k2, 256, 1e-12)
    B = bolza()
    kb = KernelPair(0.2, dim=2)
    z4 = uniform_random_configuration(B, 4, 3)
    return [
        ("torus geometric N=64", lambda: energy_and_gradient_geometric(x64, t2, k2)[0].value),
        ("torus spectral N=256", lambda: energy_spectral(x256, b256).value),
        ("bolza geometric N=4", lambda: energy_and_gradient_geometric(z4, B, kb)[0].value),
    ]


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        times.append(time.perf_counter() - t0)
    return min(times), value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
    print(f"{'case':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'rel diff':>12}")
    for name, fn in _cases():
        row = {}
        for be in ("numba", "numpy"):
            if be == "numba" and not _accel.HAVE_NUMBA:
                continue
            _accel.set_backend(be)
            row[be] = _best(fn, args.repeat)
        _accel.set_backend("numba" if _accel.HAVE_NUMBA else "numpy")
        tn, vn = row.get("numba", (float("nan"), float("nan")))
        tp, vp = row["numpy"]
        rel = abs(vn - vp) / max(abs(vp), 1e-300)
        print(f"{name:<24}{tn:>12.4g}{tp:>12.4g}{tp / tn:>10.1f}{rel:>12.2e}")


if __name__ == "__main__":
    main()
