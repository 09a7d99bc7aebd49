"""Compare the compiled and pure-Python pointwise kernels.

Times the bare kernel on random samples and a full truncated right-hand-side
evaluation for each available backend, and checks that both backends agree.

    python benchmarks/bench_kernels.py [--n 64] [--eps 0.0625] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from fnslab import kernels
from fnslab.experiments import gen_initial
from fnslab.littlewood_paley import build_frame
from fnslab.physics import FriedrichRHS, get_laws
from fnslab.spectral import Grid


def kernel_inputs(d: int, npts: int, rng: np.random.Generator) -> dict:
    r = lambda *shape: rng.uniform(-0.3, 0.3, shape)  # noqa: E731
    return dict(
        rho=r(npts), theta=r(npts), u=r(d, npts), grad_rho=r(d, npts), grad_u=r(d, d, npts),
        grad_theta=r(d, npts), visc=r(d, npts), lap_theta=r(npts),
        mu_r=1 + r(npts), dmu_r=r(npts), dpe_r=1 + r(npts), kap_t=1 + r(npts), dkap_t=r(npts),
        mu1=1.0, kappa0=1.0,
        mass_out=np.empty((d, npts)), mom_out=np.empty((d, npts)), heat_out=np.empty(npts),
    )


def best_of(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--eps", type=float, default=1 / 16)
    p.add_argument("--points", type=int, default=128 * 128)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)

    backends = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(backends)} (default {kernels.DEFAULT_BACKEND})")

    rng = np.random.Generator(np.random.Philox(0))
    inp = kernel_inputs(args.d, args.points, rng)
    outputs, kernel_times = {}, {}
    for name in backends:
        fn = kernels.get_backend(name).nonlinear_terms
        kernel_times[name] = best_of(lambda: fn(**inp), args.repeat)
        outputs[name] = [inp[k].copy() for k in ("mass_out", "mom_out", "heat_out")]

    grid = Grid(args.d, args.n)
    state = gen_initial(1e-3, grid, 3.0, build_frame(grid), seed=0)
    rhs_times, rhs_out = {}, {}
    for name in backends:
        rhs = FriedrichRHS(grid, args.eps, get_laws("linear-mu"), backend=name)
        W = rhs.to_work(state.pack())
        rhs_times[name] = best_of(lambda: rhs(0.0, W), args.repeat)
        rhs_out[name] = rhs(0.0, W)

    print(f"\nkernel on {args.points} points (d={args.d}), best of {args.repeat}:")
    for name in backends:
        print(f"  {name:9s} {kernel_times[name] * 1e3:9.3f} ms")
    print(f"\ntruncated RHS, n={args.n}, eps={args.eps:g}, best of {args.repeat}:")
    for name in backends:
        print(f"  {name:9s} {rhs_times[name] * 1e3:9.3f} ms")
    if len(backends) == 2:
        ref, cmp_ = "python", "compiled"
        print(f"\nspeedup (python / compiled): kernel {kernel_times[ref] / kernel_times[cmp_]:.2f}x, "
              f"RHS {rhs_times[ref] / rhs_times[cmp_]:.2f}x")
        kdiff = max(float(np.max(np.abs(a - b))) for a, b in zip(outputs[ref], outputs[cmp_]))
        rdiff = float(np.max(np.abs(rhs_out[ref] - rhs_out[cmp_])) / np.max(np.abs(rhs_out[ref])))
        print(f"max backend difference: kernel {kdiff:.2e}, RHS (relative) {rdiff:.2e}")


if __name__ == "__main__":
    main()
