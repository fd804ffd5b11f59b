"""
Command-line front end.

    modval <command> [problem.json] [--seed N] [--out PATH] [--format json|csv] [--plot]

Exit codes: 0 success, 2 invalid input, 3 domain error (orthogonal
selection, impossible post-selection, ill-conditioned readout, grid too
narrow).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import LocalObservable, OperatorMatrix, as_operator, fidelity, spectral_radius
from .errors import ModvalError
from .meters import (CouplingSpec, CouplingTerm, MultiQubitMeterSpec, QubitMeterState, SpinMeterState,
                     brute_force_evolve, evolve_multi_qubit_meter, evolve_qubit_meter,
                     evolve_spin_meter, multi_qubit_coupling, osaka_initial_state, osaka_meter,
                     spin_coupling)
from .pointer import (PointerGrid, default_grid, effective_shift, init_gaussian, momentum_distribution,
                      pointer_fidelity, rs_estimate, von_neumann_exact)
from .problem import ProblemSpec, ProblemSpecError
from .scenarios import SCENARIOS, ScenarioReport, osaka_experiment, projector_identities_check
from .tomography import (MeasurementPlan, extract_modular, extract_modular_multi, linear_inversion,
                         sample_counts)
from . import tomography
from .twostate import (ValueEstimate, modular_value, modular_value_combination, product_operator,
                       weak_value)


def _cx(z):
    return [float(np.real(z)), float(np.imag(z))]


# -- commands ------------------------------------------------------------------
# each returns (report, series) where series maps a name to an ordered column table

def cmd_weak_value(spec: ProblemSpec, args):
    spec.require_observables(1)
    tsv = spec.tsv()
    rep = ScenarioReport("weak-value")
    for obs in spec.observables:
        rep.add(f"({obs.name})_w", weak_value(tsv, spec.operator(obs)))
    local = [spec.operator(o) for o in spec.observables if o.site is not None]
    sites = [o.site for o in local]
    if len(local) >= 2 and len(set(sites)) == len(sites):
        names = " ".join(o.name for o in spec.observables if o.site is not None)
        rep.add(f"({names})_w", weak_value(tsv, product_operator(tsv.space, local)))
    return rep, {}


def cmd_modular_value(spec: ProblemSpec, args):
    spec.require_observables(1)
    tsv = spec.tsv()
    rep = ScenarioReport("modular-value", {"k": spec.k})
    for obs in spec.observables:
        rep.add(f"({obs.name})_m", modular_value(tsv, spec.operator(obs), spec.k))
    if spec.strengths is not None:
        terms = list(zip(spec.locals("strengths"), spec.strengths))
        label = " + ".join(f"{k:g}*{o.name}" for o, k in zip(spec.observables, spec.strengths))
        rep.add(f"({label})_m", modular_value_combination(tsv, terms))
    return rep, {}


def _amplitude_table(labels, effective, exact=None):
    table = {"basis": list(labels),
             "effective_re": [float(z.real) for z in effective],
             "effective_im": [float(z.imag) for z in effective]}
    if exact is not None:
        table["exact_re"] = [float(z.real) for z in exact]
        table["exact_im"] = [float(z.imag) for z in exact]
    return table


def _bits(n):
    return [format(i, f"0{n}b") for i in range(2 ** n)]


def cmd_meter_sim(spec: ProblemSpec, args):
    spec.require_observables(1)
    tsv = spec.tsv()
    kind = spec.meter["kind"]
    k = spec.k
    rep = ScenarioReport("meter-sim", {"kind": kind, "k": k, "oracle": bool(args.oracle)})
    degenerate = False
    if kind == "qubit":
        C = spec.operator(spec.observables[0])
        meter = QubitMeterState(spec.alpha, spec.beta)
        out = evolve_qubit_meter(tsv, C, k, meter)
        eff, degenerate, labels = out.as_state(), out.degenerate, ["0", "1"]
        if not degenerate:
            rep.add("C_m", modular_value(tsv, C, k))
        oracle = (lambda: brute_force_evolve(tsv, CouplingSpec((CouplingTerm(0, C, k),)), meter.as_state()))
    elif kind == "multi":
        locs = spec.locals()
        ms = MultiQubitMeterSpec(len(locs), spec.alpha, spec.beta, spec.meter["omega"])
        out = evolve_multi_qubit_meter(tsv, locs, k, ms)
        eff, degenerate, labels = out.state, out.degenerate, _bits(len(locs))
        oracle = (lambda: brute_force_evolve(tsv, multi_qubit_coupling(locs, k), ms.initial_state()))
    elif kind == "spin":
        C = spec.operator(spec.observables[0])
        spin = SpinMeterState.from_angles(spec.meter["theta"], spec.meter["phi"])
        out = evolve_spin_meter(tsv, C, k, spin)
        eff, labels = out.as_state(), ["up", "down"]
        rep.add("theta", out.theta)
        rep.add("phi", out.phi)
        rep.add("delta theta", out.theta - spin.theta)
        rep.add("delta phi", (out.phi - spin.phi + math.pi) % (2 * math.pi) - math.pi)
        oracle = (lambda: brute_force_evolve(tsv, spin_coupling(C, k), spin.as_state()))
    else:  # osaka
        spec.require_observables(2)
        locs = spec.locals()[:2]
        out = osaka_meter(tsv, locs, k, spec.beta)
        eff, labels = out.state, _bits(2)
        oracle = (lambda: brute_force_evolve(tsv, multi_qubit_coupling(locs, k), osaka_initial_state(spec.beta)))
    rep.add("degenerate", float(degenerate))
    for lab, z in zip(labels, eff.amps):
        rep.add(f"amp[{lab}]", ValueEstimate(z, "effective"))
    exact_amps = None
    if args.oracle:
        exact = oracle().state
        exact_amps = exact.amps
        for lab, z in zip(labels, exact_amps):
            rep.add(f"oracle amp[{lab}]", z)
        rep.add("oracle fidelity deficit", 1 - fidelity(eff, exact), 0, spec.tolerances["oracle_fidelity"])
    return rep, {"meter_amplitudes": _amplitude_table(labels, eff.amps, exact_amps)}


def _grid(spec: ProblemSpec, k: float, radius: float) -> PointerGrid:
    p = spec.pointer
    if p["q_min"] is not None:
        return PointerGrid(p["q_min"], p["q_max"], p["n"])
    return default_grid(p["delta"], k, radius, p["n"])


def cmd_pointer_sim(spec: ProblemSpec, args):
    spec.require_observables(1)
    tsv = spec.tsv()
    C = as_operator(spec.operator(spec.observables[0]), tsv.space)
    k, delta = spec.k, spec.pointer["delta"]
    grid = _grid(spec, k, spectral_radius(C))
    start = init_gaussian(grid, delta)
    cw = weak_value(tsv, C).value
    exact = von_neumann_exact(tsv, C, k, start)
    eff = effective_shift(start, cw, k)
    pe, pf = momentum_distribution(exact), momentum_distribution(eff)
    rep = ScenarioReport("pointer-sim", {"k": k, "delta": delta,
                                         "grid": [grid.q_min, grid.q_max, grid.n]})
    rep.add("C_w", cw)
    rep.add("effective Q mean", ValueEstimate(eff.q_mean(), "effective"), k * cw.real, 1e-8)
    rep.add("effective P mean", ValueEstimate(pf.mean(), "effective"), k * cw.imag / delta ** 2, 1e-8)
    rep.add("exact Q mean", exact.q_mean())
    rep.add("exact P mean", pe.mean())
    rep.add("exact/effective fidelity deficit", 1 - pointer_fidelity(exact, eff))
    series = {
        "q_density": {"q": grid.q.tolist(), "initial": start.q_density.tolist(),
                      "exact": exact.q_density.tolist(), "effective": eff.q_density.tolist()},
        "p_density": {"p": pe.p.tolist(), "initial": momentum_distribution(start).density.tolist(),
                      "exact": pe.density.tolist(), "effective": pf.density.tolist()},
    }
    return rep, series


RS_FLOOR = 1e-10


def cmd_rs_estimate(spec: ProblemSpec, args):
    spec.require_observables(2)
    tsv = spec.tsv()
    a, b = spec.locals()[:2]
    delta = spec.pointer["delta"]
    target = weak_value(tsv, product_operator(tsv.space, [a, b])).value.real
    rep = ScenarioReport("rs-estimate", {"delta": delta, "k_sweep": list(spec.k_sweep)})
    rep.add("Re(AB)_w", target)
    ks = sorted(spec.k_sweep, reverse=True)
    estimates, errors = [], []
    for k in ks:
        grid = None
        if spec.pointer["q_min"] is not None:
            grid = _grid(spec, k, 0)
        est = rs_estimate(tsv, a, b, k, delta, grid)
        estimates.append(est)
        errors.append(abs(est - target))
        rep.add(f"estimate k={k:g}", ValueEstimate(est, "effective"))
    mono = all(e1 <= e0 or e1 < RS_FLOOR for e0, e1 in zip(errors, errors[1:]))
    rep.add("monotone convergence", float(mono), 1.0, 0.0)
    series = {"convergence": {"k": ks, "estimate": estimates, "target": [target] * len(ks),
                              "abs_error": errors}}
    return rep, series


def _counts_table(counts) -> dict:
    rows = list(csv.DictReader(io.StringIO(counts.to_csv())))
    return {"basis_id": [r["basis_id"] for r in rows], "outcome_id": [int(r["outcome_id"]) for r in rows],
            "count": [int(r["count"]) for r in rows]}


def cmd_tomography(spec: ProblemSpec, args):
    spec.require_observables(1)
    tsv = spec.tsv()
    kind, k = spec.meter["kind"], spec.k
    tol = spec.tolerances
    floor_saved = tomography.CONDITIONING_FLOOR
    tomography.CONDITIONING_FLOOR = tol["conditioning_floor"]
    try:
        rep = ScenarioReport("tomography", {"kind": kind, "k": k, "shots_per_basis": spec.shots,
                                            "seed": spec.seed})
        if kind == "qubit":
            C = spec.operator(spec.observables[0])
            meter = QubitMeterState(spec.alpha, spec.beta)
            state = evolve_qubit_meter(tsv, C, k, meter).as_state()
            plan = MeasurementPlan.pauli(1, spec.shots, spec.seed)
            counts = sample_counts(state, plan)
            est = extract_modular(linear_inversion(counts), meter.a0, meter.a1, tol["bootstrap_resamples"])
            exact = modular_value(tsv, C, k).value
            rep.add("exact C_m", exact)
            rep.add("C_m", ValueEstimate(est.value, "tomographic", est.stderr), exact, 3 * est.stderr)
        elif kind in ("multi", "osaka"):
            if kind == "multi":
                locs = spec.locals()
                ms = MultiQubitMeterSpec(len(locs), spec.alpha, spec.beta, spec.meter["omega"])
                state, initial = evolve_multi_qubit_meter(tsv, locs, k, ms).state, ms.initial_state()
            else:
                spec.require_observables(2)
                locs = spec.locals()[:2]
                state, initial = osaka_meter(tsv, locs, k, spec.beta).state, osaka_initial_state(spec.beta)
            n = len(locs)
            plan = MeasurementPlan.pauli(n, spec.shots, spec.seed)
            counts = sample_counts(state, plan)
            ests = extract_modular_multi(linear_inversion(counts), initial.amps, tol["bootstrap_resamples"])
            for j, est in ests.items():
                digits = format(j, f"0{n}b")
                coupled = [locs[i] for i, d in enumerate(digits) if d == "1"]
                gen = OperatorMatrix(tsv.space, sum(as_operator(o, tsv.space).entries for o in coupled))
                exact = modular_value(tsv, gen, k).value
                names = "+".join(spec.observables[i].name for i, d in enumerate(digits) if d == "1")
                rep.add(f"exact ({names})_m", exact)
                rep.add(f"({names})_m", ValueEstimate(est.value, "tomographic", est.stderr), exact,
                        3 * est.stderr)
        else:
            raise ProblemSpecError("meter.kind", "tomography supports qubit, multi and osaka meters")
    finally:
        tomography.CONDITIONING_FLOOR = floor_saved
    return rep, {"counts": _counts_table(counts)}


def cmd_scenario(spec: ProblemSpec, args):
    name = args.name
    if name == "osaka":
        beta = complex(*spec.scenario["beta"])
        rep = osaka_experiment(beta, spec.shots, spec.seed, tuple(spec.scenario["modes"]))
    elif name == "projector-identities" and (spec.pre is not None or spec.tsv_preset is not None) \
            and len(spec.observables) >= 2:
        pa, pb = spec.locals()[:2]
        rep = projector_identities_check(spec.tsv(), pa, pb)
    else:
        rep = SCENARIOS[name]()
    return rep, {}


COMMANDS = {
    "weak-value": cmd_weak_value,
    "modular-value": cmd_modular_value,
    "meter-sim": cmd_meter_sim,
    "pointer-sim": cmd_pointer_sim,
    "rs-estimate": cmd_rs_estimate,
    "tomography": cmd_tomography,
    "scenario": cmd_scenario,
}


# -- output --------------------------------------------------------------------

def _series_csv(table: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(table)
    w.writerow(cols)
    for row in zip(*(table[c] for c in cols)):
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def results_document(command: str, spec: ProblemSpec, report: ScenarioReport, series_files: dict,
                     timestamp: str | None = None) -> dict:
    return {
        "tool": "modval",
        "version": __version__,
        "command": command,
        "seed": spec.seed,
        "spec": spec.to_dict(),
        "results": report.to_dict(),
        "series": series_files,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modval", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"modval {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", nargs="?", help="problem document (JSON); '-' reads stdin")
        p.add_argument("--seed", type=int, help="RNG seed (overrides the document)")
        p.add_argument("--out", type=Path, help="results file; CSV sidecars are written next to it")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--plot", action="store_true", help="also render PNG figures next to the sidecars")
        return p

    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "scenario":
            p.add_argument("name", choices=sorted(SCENARIOS))
        common(p)
        if name == "meter-sim":
            p.add_argument("--oracle", action="store_true",
                           help="also run the brute-force evolution and report the deviation")
    return parser


def load_spec(args) -> ProblemSpec:
    if args.input is None:
        doc = {}
        text = None
    elif args.input == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise ProblemSpecError(args.input, f"cannot read: {exc.strerror}") from None
    spec = ProblemSpec.from_json(text) if text is not None else ProblemSpec.from_dict(doc)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ProblemSpecError("--seed", "must be an unsigned 64-bit integer")
        spec.seed = args.seed
    return spec


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args)
        report, series = COMMANDS[args.command](spec, args)
    except ProblemSpecError as exc:
        print(f"modval: input error at {exc}", file=sys.stderr)
        return 2
    except ModvalError as exc:
        print(f"modval: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"modval: invalid input: {exc}", file=sys.stderr)
        return 2

    series_files = {}
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        stem = args.out.with_suffix("")
        for name, table in series.items():
            path = Path(f"{stem}.{name}.csv")
            path.write_text(_series_csv(table))
            series_files[name] = path.name
            if args.plot:
                from .plotting import render_series
                render_series(name, table, Path(f"{stem}.{name}.png"))
    else:
        series_files = {name: None for name in series}

    if args.format == "csv":
        text = report.to_csv()
    else:
        text = json.dumps(results_document(args.command, spec, report, series_files),
                          indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        args.out.write_text(text)
    else:
        stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
