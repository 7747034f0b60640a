"""Command-line interface: tables, solve, converge, check."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coeffs import coefficient_by_name
from .harness import build_reference, error_norm_H, load_config, sweep, write_outputs, _OperatorCache, solve_single
from .orthopoly import eval_orthonormal, gauss_rule, hermite, jacobi, laguerre, orthonormal_coeffs, apply_Q, sl_eigenvalue
from .pce import distribution, multi_index_set, triple_products
from .sgsystem import min_generalized_eigenvalue, pce_coefficient_matrices, assemble_block_operator
from .spatial import assemble_mass, assemble_stiffness, make_fe_space, make_mesh
from .timestep import Propagator, a_stability_probe, implicit_euler, crank_nicolson


def _family_from_args(args):
    if args.family == "hermite":
        return hermite()
    if args.family == "jacobi":
        return jacobi(args.alpha, args.beta)
    return laguerre(args.alpha)


def cmd_tables(args) -> int:
    family = _family_from_args(args)
    rule = gauss_rule(family, args.q)
    print(f"# {args.family} gauss rule, q = {args.q}")
    print("node weight")
    for x, w in zip(rule.nodes, rule.weights):
        print(f"{float(x)!r} {float(w)!r}")
    print(f"# eigenvalues k <= {args.k_max}")
    print(" ".join(repr(sl_eigenvalue(family, k)) for k in range(args.k_max + 1)))
    eps = triple_products(distribution(family), args.eps_n)
    text = eps.to_text()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"eps_{args.family}_n{args.eps_n}.txt").write_text(text)
        print(f"# wrote {out / f'eps_{args.family}_n{args.eps_n}.txt'}")
    else:
        print(f"# triple products, n = {args.eps_n}")
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    cache = _OperatorCache(cfg)
    n, m, n_k = (max(cfg.sweep[k]) for k in ("n", "m", "n_k"))
    state, space = solve_single(cache, n, m, n_k)
    reference = build_reference(cfg, cache, estimate_error=False)
    err = error_norm_H(cache.dist, state, space, reference, q=cfg.quad_order)
    print(f"n = {n}, m = {m}, n_k = {n_k}: error = {err:.6e}")
    if args.state_out:
        Path(args.state_out).parent.mkdir(parents=True, exist_ok=True)
        np.savez(args.state_out, coeffs=state.coeffs, time=state.time,
                 indices=np.array(state.mis.indices))
        print(f"wrote final state to {args.state_out}")
    return 0


def cmd_converge(args) -> int:
    cfg = load_config(args.config)
    report = sweep(cfg)
    for axis, result in report.axes.items():
        slope = f"{result.fit.slope:.3f}" if result.fit else "n/a"
        print(f"axis {axis}: errors {['%.3e' % e for e in result.errors]} slope {slope}")
    for name, ok in report.checks.items():
        print(f"check {name}: {'PASS' if ok else 'FAIL'}")
    paths = write_outputs(cfg, report)
    for p in paths:
        print(f"wrote {p}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


def invariant_suite(fast: bool = True) -> list[tuple[str, bool, str]]:
    """Library-wide invariant checks, printable as one line per item."""
    results = []

    def record(name, ok, detail=""):
        results.append((name, bool(ok), detail))

    for family, label in ((hermite(), "hermite"), (jacobi(1.0, 2.0), "jacobi"), (laguerre(0.5), "laguerre")):
        rule = gauss_rule(family, 12)
        h = eval_orthonormal(family, 8, rule.nodes)
        gram = (h * rule.weights) @ h.T
        record(f"orthonormality[{label}]", np.max(np.abs(gram - np.eye(9))) < 1e-10)
        ok = True
        for k in range(9):
            hk = orthonormal_coeffs(family, k)
            lhs = apply_Q(family, hk).coeffs
            rhs = sl_eigenvalue(family, k) * hk.coeffs
            diff = np.zeros(max(lhs.size, rhs.size))
            diff[: lhs.size] += lhs
            diff[: rhs.size] -= rhs
            scale = max(1.0, float(np.max(np.abs(rhs))))
            ok = ok and float(np.max(np.abs(diff))) <= 1e-10 * scale
        record(f"eigenrelation[{label}]", ok)

    for scheme, label in ((implicit_euler(), "implicit_euler"), (crank_nicolson(), "crank_nicolson")):
        bmax, imax = a_stability_probe(scheme)
        record(f"a_stability[{label}]", bmax <= 1.0 + 1e-12 and imax < 1.0, f"boundary {bmax:.3e}")

    dist = distribution(hermite())
    eps = triple_products(dist, 2)
    sym = all(eps.entries.get((a, c, b)) == v for (a, b, c), v in eps.entries.items())
    sparse_ok = all(sum(a) <= sum(b) + sum(c) for (a, b, c) in eps.entries)
    record("triple_product_symmetry", sym)
    record("triple_product_sparsity", sparse_ok)

    space = make_fe_space(make_mesh(1, 8), 2)
    field = coefficient_by_name("logistic_1d")
    mats = pce_coefficient_matrices(dist, 2, space, field, q=20)
    op = assemble_block_operator(mats, eps, multi_index_set(1, 2), space)
    record("block_symmetry", float(abs(op.matrix - op.matrix.T).max()) == 0.0)
    lam = min_generalized_eigenvalue(op.matrix, op.mass)
    record("resolvent_contractivity", lam >= -1e-10, f"min eig {lam:.3e}")

    mass = assemble_mass(space)
    stiff = assemble_stiffness(space, 1.0)
    prop = Propagator(implicit_euler(), mass, stiff)
    u = np.linspace(0.0, 1.0, space.ndof)
    ok = True
    for tau in (10.0, 1.0, 0.01):
        v = prop.step(u, tau)
        ok = ok and (v @ (mass @ v)) <= (u @ (mass @ u)) + 1e-10
    record("energy_decay[implicit_euler]", ok)
    return results


def cmd_check(args) -> int:
    results = invariant_suite(fast=not args.full)
    worst = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))
        worst = max(worst, 0 if ok else 1)
    return worst


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sgpde", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sgpde {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="print orthogonal-polynomial and triple-product tables")
    p.add_argument("--family", choices=["hermite", "jacobi", "laguerre"], default="hermite")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--eps-n", type=int, default=2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("solve", help="run a single configuration at the finest sweep point")
    p.add_argument("config")
    p.add_argument("--state-out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="run the full convergence sweep for a config")
    p.add_argument("config")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("check", help="run the library invariant suite")
    p.add_argument("--full", action="store_true")
    p.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
