"""Command-line entry point.

Subcommands: evolve, spin-measure, entangle-measure, phase, uncertainty,
ensemble, selftest.  Validation failures exit with code 2 and a message
naming the offending field; identical argv and seed give byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__, dynamics, ensembles, entangle, phase, selftest, spinors, stats
from .errors import GqmError, ValidationError
from .states import (
    ChartPoint,
    PureState,
    load_json,
    load_observable,
    load_state,
    set_default_hbar,
    state_from_dict,
    state_to_dict,
    symspinor_from_dict,
)


def _state_json(state: PureState) -> dict:
    return state_to_dict(state)


def density_matrix_to_dict(dm: ensembles.DensityMatrix) -> dict:
    out = {
        "dim": dm.dim,
        "matrix": [[[float(c.real), float(c.imag)] for c in row] for row in dm.matrix],
        "stderr": None,
    }
    if dm.stderr is not None:
        out["stderr"] = [[float(v) for v in row] for row in dm.stderr]
    return out


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _require_seed(args) -> int:
    if args.seed is None:
        raise ValidationError("seed: required for randomized commands (--seed)")
    return args.seed


def _load_hamiltonian_function(args) -> dynamics.HamiltonianFunction:
    obs = load_observable(args.hamiltonian)
    if getattr(args, "nonlinear_square", False):
        return dynamics.HamiltonianFunction.expectation_power(obs, 2)
    return dynamics.HamiltonianFunction.linear(obs)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_evolve(args) -> int:
    ham = _load_hamiltonian_function(args)
    psi0 = load_state(args.state)
    if ham.observable.dim != psi0.dim:
        raise ValidationError("state.dim: does not match hamiltonian dim")
    x0 = ChartPoint.from_state(psi0)
    traj = dynamics.flow_integrate(ham, x0, args.t, args.dt,
                                   record_stride=args.record_every)
    spec = dynamics.SpectralData.from_observable(ham.observable)
    n = traj.n
    dim = n + 1
    header = (["t", "pivot"]
              + [f"x_{k + 1}" for k in range(2 * n)]
              + ["energy", "delta_H"]
              + [f"p_{k + 1}" for k in range(dim)])
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        drift = traj.energy_drift()
        for i in range(len(traj.times)):
            psi = traj.state(i).components
            weights = np.abs(spec.eigenvectors.conj().T @ psi) ** 2
            writer.writerow(
                [repr(float(traj.times[i])), int(traj.pivots[i])]
                + [repr(float(v)) for v in traj.coords[i]]
                + [repr(float(traj.energies[i])), repr(float(drift[i]))]
                + [repr(float(w)) for w in weights]
            )
    print(f"wrote {len(traj.times)} rows to {args.out} "
          f"(max energy drift {traj.max_drift():.3e})")
    return 0


def cmd_spin_measure(args) -> int:
    data = load_json(args.state)
    if isinstance(data, dict) and "rank" in data:
        rank, coeffs = symspinor_from_dict(data)
        state = spinors.SymSpinor(rank, coeffs).to_pure_state()
    else:
        state = state_from_dict(data)
        rank = state.dim - 1
    if rank not in (2, 3):
        raise ValidationError("state.rank: spin measurements support ranks 2 and 3")
    axis_state = load_state(args.axis)
    if axis_state.dim != 2:
        raise ValidationError("axis.components: an axis spinor has 2 components")
    axis = spinors.Spinor(axis_state.components)
    family = spinors.spin_eigenstates(axis, rank)
    probs = spinors.measurement_probabilities(state, [s for _, s in family])
    payload = {
        "rank": rank,
        "eigenvalues": [ev for ev, _ in family],
        "probabilities": [float(p) for p in probs],
        "eigenstates": [_state_json(s) for _, s in family],
    }
    _emit(args, payload)
    return 0


def cmd_entangle_measure(args) -> int:
    psi = load_state(args.state)
    if psi.dim != 4:
        raise ValidationError("state.dim: entangle-measure expects a 2x2 state (dim 4)")
    report = entangle.entanglement_measure(psi)
    payload = {
        "delta": report.delta,
        "gamma": report.gamma,
        "rho": report.rho,
        "kappa": report.kappa,
        "lambda_abs": report.lambda_abs if np.isfinite(report.lambda_abs) else None,
        "nearest": _state_json(report.nearest),
        "farthest": _state_json(report.farthest),
    }
    if args.oracle:
        payload["oracle_delta"] = entangle.brute_force_delta(
            psi, seed=args.seed if args.seed is not None else 0
        )
    _emit(args, payload)
    return 0


def cmd_phase(args) -> int:
    data = load_json(args.loop)
    if not isinstance(data, list) or len(data) < 3:
        raise ValidationError("loop: expected a JSON array of at least 3 states")
    points = [state_from_dict(d) for d in data]
    loop = phase.Loop(points)
    beta = phase.holonomy_phase(loop)
    beta_ref, _ = phase.holonomy_phase_refined(loop)
    payload = {"holonomy": beta, "holonomy_refined": beta_ref}
    if args.base:
        payload["surface"] = phase.surface_phase(loop, load_state(args.base))
    if args.transport:
        obs = load_observable(args.transport)
        ham = (dynamics.HamiltonianFunction.expectation_power(obs, 2)
               if args.nonlinear_square
               else dynamics.HamiltonianFunction.linear(obs))
        before, after = phase.poincare_invariant_check(loop, ham, args.t, args.dt)
        payload["transported"] = {
            "before": before,
            "after": after,
            "difference": phase.angle_difference(before, after),
        }
    _emit(args, payload)
    return 0


def cmd_uncertainty(args) -> int:
    if len(args.obs) != 2:
        raise ValidationError("obs: pass exactly two observables (--obs F --obs G)")
    f = load_observable(args.obs[0])
    g = load_observable(args.obs[1])
    psi = load_state(args.state)
    if f.dim != psi.dim or g.dim != psi.dim:
        raise ValidationError("state.dim: does not match the observables")
    x = ChartPoint.from_state(psi)
    terms = stats.kahler_inequality_terms(f, g, x)
    moments = stats.central_moments(f, psi)
    bound = stats.generalized_heisenberg_bound(moments)
    payload = {
        "variance_f": stats.geometric_variance(f, x),
        "variance_g": stats.geometric_variance(g, x),
        "operator_variance_f": stats.operator_variance(f, x),
        "operator_variance_g": stats.operator_variance(g, x),
        "poisson_bracket": stats.poisson_bracket(f, g, x),
        "kahler": {
            "lhs": terms.lhs,
            "cross_g": terms.cross_g,
            "cross_omega": terms.cross_omega,
            "slack": terms.slack,
        },
        "heisenberg_bound": terms.heisenberg_bound,
        "moments_f": {"mean": moments.mean, "mu2": moments.mu2,
                      "mu4": moments.mu4, "mu6": moments.mu6},
        "generalized_bound": {"value": bound.value, "degenerate": bound.degenerate},
    }
    _emit(args, payload)
    return 0


def cmd_ensemble(args) -> int:
    obs = load_observable(args.hamiltonian)
    if args.beta < 0:
        raise ValidationError("beta: must be nonnegative")
    if args.kind == "gibbs":
        dm = ensembles.gibbs_density_matrix(obs, args.beta)
    else:
        seed = _require_seed(args)
        ens = ensembles.maxent_ensemble(obs, args.beta, samples=args.samples,
                                        seed=seed)
        dm = ensembles.density_matrix(ens)
    payload = density_matrix_to_dict(dm)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote density matrix ({args.kind}, beta={args.beta}) to {args.out}")
    return 0


def cmd_selftest(args) -> int:
    seed = _require_seed(args)
    tol_scale = 0.5 if args.tolerance_profile == "strict" else 1.0
    results = selftest.run_all(seed=seed, tol_scale=tol_scale)
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"[{status}] {r.index:2d} {r.name:<{width}}  {r.detail}")
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed "
          f"(seed={seed}, profile={args.tolerance_profile})")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqm",
        description="Geometric quantum mechanics on projective state spaces",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--hbar", type=float, default=1.0,
                        help="global hbar convention (default 1)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for randomized commands (required there)")
    common.add_argument("--tolerance-profile", choices=("default", "strict"),
                        default="default",
                        help="strict halves all numerical tolerances")

    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_parser("evolve", help="integrate a Hamiltonian flow to CSV")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--nonlinear-square", action="store_true",
                   help="flow of the squared expectation instead of the "
                        "expectation itself")
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = add_parser("spin-measure", help="spin eigenstates and outcome "
                                            "probabilities for an axis")
    p.add_argument("--state", required=True)
    p.add_argument("--axis", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spin_measure)

    p = add_parser("entangle-measure", help="geodesic entanglement report")
    p.add_argument("--state", required=True)
    p.add_argument("--oracle", action="store_true",
                   help="also run the brute-force oracle")
    p.add_argument("--out")
    p.set_defaults(func=cmd_entangle_measure)

    p = add_parser("phase", help="geometric phase of a loop of states")
    p.add_argument("--loop", required=True)
    p.add_argument("--base", help="apex state for the spanning-surface fan")
    p.add_argument("--transport", help="Hamiltonian file for loop transport")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--nonlinear-square", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_phase)

    p = add_parser("uncertainty", help="variances, bracket and bounds")
    p.add_argument("--obs", action="append", required=True,
                   help="observable file (pass twice: F then G)")
    p.add_argument("--state", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_uncertainty)

    p = add_parser("ensemble", help="canonical ensembles to a density matrix")
    p.add_argument("kind", choices=("gibbs", "maxent"))
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ensemble)

    p = add_parser("selftest", help="run the acceptance criteria")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_default_hbar(args.hbar)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GqmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
