#!/usr/bin/env python3
"""Empirical size and power of the loading specification tests.

Size of the covariate-effect test (H0: G = 0) is measured on panels whose
loadings are independent of the covariates; size of the residual-loading
test (H0: Gamma = 0) on the additive-cubic design, which has Gamma = 0 by
construction.  Power uses the respective alternatives: the additive
design itself for the first test, and the same design plus a large
random Gamma for the second.
"""

import argparse

import numpy as np

import ppca
from ppca.simulate import FACTOR_VAR_A, VarProcess, simulate_var


def gen_no_covariate_effect(p, T, rng):
    x = rng.standard_normal((p, 1))
    lam = rng.standard_normal((p, 3))
    f = simulate_var(VarProcess(a=FACTOR_VAR_A, sigma_eps=np.eye(3)), T, rng)
    u = rng.standard_normal((p, T))
    return ppca.PanelData(y=lam @ f.T + u, x=x)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=300)
    ap.add_argument("--T", type=int, default=200)
    ap.add_argument("--J", type=int, default=8)
    ap.add_argument("--n-reps", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=0.05)
    args = ap.parse_args()

    spec = ppca.BasisSpec(J=args.J)
    n = args.n_reps

    def projector_for(x):
        basis = ppca.build_basis(x, spec)
        return ppca.make_projector(basis)

    rej = 0
    for rep in range(n):
        rng = np.random.default_rng([11, rep])
        data = gen_no_covariate_effect(args.p, args.T, rng)
        r = ppca.test_g_zero(data, projector_for(data.x), 3)
        rej += r.p_value_chisq < args.alpha
    print(f"size, covariate-effect test (H0: G=0):     {rej / n:.3f}")

    rej = 0
    for rep in range(n):
        panel = ppca.gen_design2(args.p, args.T, seed=rep)
        r = ppca.test_gamma_zero(panel.data, projector_for(panel.data.x), 3)
        rej += r.p_value_chisq < args.alpha
    print(f"size, residual-loading test (H0: Gamma=0): {rej / n:.3f}")

    rej = 0
    for rep in range(n):
        panel = ppca.gen_design2(args.p, args.T, seed=10_000 + rep)
        r = ppca.test_g_zero(panel.data, projector_for(panel.data.x), 3)
        rej += r.p_value_chisq < args.alpha
    print(f"power, covariate-effect test:              {rej / n:.3f}")

    rej = 0
    for rep in range(n):
        rng = np.random.default_rng([13, rep])
        panel = ppca.gen_design2(args.p, args.T, rng=rng)
        gamma = rng.normal(0, 0.5, size=panel.g_true.shape)
        data = ppca.PanelData(y=panel.data.y + gamma @ panel.f_true.T,
                              x=panel.data.x)
        r = ppca.test_gamma_zero(data, projector_for(data.x), 3)
        rej += r.p_value_chisq < args.alpha
    print(f"power, residual-loading test:              {rej / n:.3f}")


if __name__ == "__main__":
    main()
