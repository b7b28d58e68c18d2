"""Command-line front end.

Commands: parse, derive, solve, verify, example.  Output formats: text
(human-readable), json (stable machine format; expressions in prefix
notation), latex (math fragment).  Exit codes: 0 success, 1 a
verification check failed, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from fractions import Fraction

from .dsl import (DslError, bundled_source, parse, pretty_print,
                  validate_axioms)
from .expr import (DEFAULT_SEED, EQUALS_SAMPLES, EQUALS_TOL, Equivalence,
                   format_expr)
from .lie import constraints
from .printing import latex_expr, prefix_expr
from .solver import MAX_UNKNOWNS, build_ansatz, solve_family
from .verify import build_report

EXAMPLE_DEFAULTS = {
    "so2": {
        "deg_x": 1, "deg_g": (0, 0),
        "params": {"a1": Fraction(0), "a2": Fraction(1)},
        "numeric": True, "x0": (1.0, 0.0), "g_end": math.tau, "step": 1e-3,
    },
    "affine1": {
        "deg_x": 1, "deg_g": (-1, 0),
        "params": None,  # generic seeded assignment
        "numeric": False, "x0": None, "g_end": None, "step": 1e-3,
    },
}


def entry() -> None:
    sys.exit(run(sys.argv[1:]))


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DslError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, OSError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lagrforge",
        description="Derive and verify Lagrangians for finite-dimensional "
                    "Lie transformation groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "json", "latex"),
                       default="text", help="output format")
        p.add_argument("--seed", type=int, default=None,
                       help="sampling seed (default: LAGRFORGE_SEED or "
                            f"{DEFAULT_SEED})")
        p.add_argument("--samples", type=int, default=EQUALS_SAMPLES,
                       help="sample count for numeric equality checks")
        p.add_argument("--tol", type=float, default=EQUALS_TOL,
                       help="tolerance for numeric equality checks")

    def solve_flags(p, required_defaults=True):
        d = (lambda v: v) if required_defaults else (lambda v: None)
        p.add_argument("--deg-x", type=int, default=d(1),
                       help="max exponent per field variable in multipliers")
        p.add_argument("--deg-g-min", type=int, default=d(0),
                       help="min exponent per group parameter in multipliers")
        p.add_argument("--deg-g-max", type=int, default=d(0),
                       help="max exponent per group parameter in multipliers")
        p.add_argument("--max-unknowns", type=int, default=MAX_UNKNOWNS,
                       help="cap on ansatz unknowns")

    def verify_flags(p, required_defaults=True):
        d = (lambda v: v) if required_defaults else (lambda v: None)
        p.add_argument("--params", action="append", default=None,
                       metavar="NAME=VALUE,...",
                       help="free parameter values, exact rationals "
                            "(default: a generic seeded assignment)")
        p.add_argument("--numeric", action=argparse.BooleanOptionalAction,
                       default=d(False),
                       help="run the numeric orbit integration")
        p.add_argument("--x0", default=None, metavar="A,B,...",
                       help="initial point for the orbit integration")
        p.add_argument("--g-end", type=float, default=None,
                       help="final group parameter value for the orbit")
        p.add_argument("--step", type=float, default=d(1e-3),
                       help="orbit integration step")
        p.add_argument("--orbit-tol", type=float, default=1e-6,
                       help="max allowed orbit deviation")

    p = sub.add_parser("parse", help="parse a group file and check axioms")
    p.add_argument("input", help="path to a .grp file or a bundled name")
    common(p)
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("derive", help="derive the Lie structure")
    p.add_argument("input")
    common(p)
    p.set_defaults(handler=cmd_derive)

    p = sub.add_parser("solve", help="solve for the Lagrangian family")
    p.add_argument("input")
    common(p)
    solve_flags(p)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("verify", help="verify a family at parameter values")
    p.add_argument("input")
    common(p)
    solve_flags(p)
    verify_flags(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("example",
                       help="run the full pipeline with bundled defaults")
    p.add_argument("name", choices=sorted(EXAMPLE_DEFAULTS))
    common(p)
    solve_flags(p, required_defaults=False)
    verify_flags(p, required_defaults=False)
    p.set_defaults(handler=cmd_example)
    return parser


# ---------------------------------------------------------------------------
# Input and flag helpers.


def _load_source(name_or_path: str) -> str:
    if os.path.exists(name_or_path):
        with open(name_or_path, "r", encoding="utf-8") as fh:
            return fh.read()
    if "/" not in name_or_path and not name_or_path.endswith(".grp"):
        return bundled_source(name_or_path)
    raise FileNotFoundError(f"no such file: {name_or_path}")


def _seed_of(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("LAGRFORGE_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(
                f"LAGRFORGE_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _parse_params(chunks) -> dict:
    out = {}
    for chunk in chunks or ():
        for item in chunk.split(","):
            item = item.strip()
            if not item:
                continue
            name, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"expected NAME=VALUE, got '{item}'")
            try:
                out[name.strip()] = Fraction(value.strip())
            except (ValueError, ZeroDivisionError):
                raise ValueError(
                    f"'{value.strip()}' is not an exact rational") from None
    return out


def _parse_x0(text: str):
    return tuple(float(Fraction(part.strip())) for part in text.split(","))


def _generic_params(family, seed: int) -> dict:
    rng = random.Random(seed)
    return {p.name: Fraction(rng.randint(1, 9), rng.randint(1, 9))
            for p in family.free_params}


def _verdict(v: Equivalence) -> str:
    if v is None:
        return None
    return "Failed" if v == Equivalence.PROVED_UNEQUAL else v.value


def _emit(payload: dict, lines, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------------------
# Shared payload/text builders.


def _axioms_payload(report) -> dict:
    return {
        "group": report.group,
        "samples": report.samples,
        "seed": report.seed,
        "ok": report.ok,
        "checks": [
            {"axiom": c.axiom, "description": c.description,
             "verdict": c.verdict, "max_residual": c.max_residual,
             "witness": c.witness}
            for c in report.checks
        ],
    }


def _axioms_text(report) -> list:
    state = "ok" if report.ok else "FAILED"
    lines = [f"axioms: {state} ({report.samples} samples, seed {report.seed})"]
    for c in report.checks:
        detail = ""
        if c.max_residual is not None:
            detail = f"  (max residual {c.max_residual:.3e})"
        lines.append(f"  {c.axiom:<18} {c.verdict}{detail}")
        if c.witness:
            lines.append(f"    witness: {c.witness}")
    return lines


def _spec_payload(spec) -> dict:
    return {
        "name": spec.name,
        "params": [p.name for p in spec.params],
        "coords": [c.name for c in spec.coords],
        "identity": [prefix_expr(e) for e in spec.identity],
        "inverse": [prefix_expr(e) for e in spec.inverse],
        "multiply": [prefix_expr(e) for e in spec.multiply],
        "action": [prefix_expr(e) for e in spec.action],
    }


def _lie_payload(lie) -> dict:
    return {
        "fields": [f.name for f in lie.fields],
        "jets": [[j.name for j in row] for row in lie.jets],
        "S": [[prefix_expr(e) for e in row] for row in lie.S],
        "u": [[prefix_expr(e) for e in row] for row in lie.u],
        "phi": [[prefix_expr(e) for e in row] for row in lie.phi],
        "lie_equations": {j.name: prefix_expr(lie.onshell[j])
                          for j in lie.jet_list()},
        "on_action": [[v.value for v in row] for row in lie.on_action],
        "notes": list(lie.notes),
    }


def _lie_text(lie) -> list:
    lines = []
    lines.append("infinitesimal coefficients S[a][j]:")
    for a in range(lie.n):
        for j in range(lie.r):
            lines.append(f"  S[{a + 1}][{j + 1}] = {format_expr(lie.S[a][j])}")
    lines.append("auxiliary functions u[i][j]:")
    for i in range(lie.r):
        for j in range(lie.r):
            lines.append(f"  u[{i + 1}][{j + 1}] = {format_expr(lie.u[i][j])}")
    lines.append("constraints phi[a][j] = X'^a_j - sum_s u[s][j]*S[a][s]:")
    for a in range(lie.n):
        for j in range(lie.r):
            lines.append(
                f"  phi[{a + 1}][{j + 1}] = {format_expr(lie.phi[a][j])}")
    lines.append("lie equations (on-shell jet values):")
    for jet in lie.jet_list():
        lines.append(f"  {jet.name} = {format_expr(lie.onshell[jet])}")
    return lines


def _family_payload(ansatz, family) -> dict:
    lie = family.lie
    mult = {}
    for (k, a, s), e in sorted(family.multipliers.items()):
        mult[f"lambda[{k}][{a}][{s}]"] = prefix_expr(e)
    return {
        "ansatz": {
            "deg_x": ansatz.deg_x,
            "deg_g": list(ansatz.deg_g) if ansatz.deg_g else None,
            "basis": [prefix_expr(b) for b in ansatz.basis],
            "unknowns": len(ansatz.columns),
        },
        "system": {
            "rows": len(family.system.rows),
            "unknowns": len(family.system.columns),
            "rank": family.system.rank,
        },
        "family": {
            "dimension": family.dimension,
            "free_params": [p.name for p in family.free_params],
            "multipliers": mult,
            "lagrangians": [prefix_expr(L) for L in family.lagrangians],
        },
        "components": lie.r,
    }


def _family_text(ansatz, family) -> list:
    lines = []
    lo, hi = ansatz.deg_g if ansatz.deg_g else ("?", "?")
    lines.append(f"ansatz: deg_x={ansatz.deg_x}, deg_g=[{lo},{hi}], "
                 f"basis size {len(ansatz.basis)}, "
                 f"{len(ansatz.columns)} unknowns")
    lines.append(f"system: {len(family.system.rows)} equations, "
                 f"rank {family.system.rank}, "
                 f"nullspace dimension {family.dimension}")
    names = ", ".join(p.name for p in family.free_params) or "none"
    lines.append(f"free parameters: {names}")
    lines.append("multipliers:")
    for (k, a, s), e in sorted(family.multipliers.items()):
        lines.append(f"  lambda[{k}][{a}][{s}] = {format_expr(e)}")
    lines.append("lagrangians:")
    for k, L in enumerate(family.lagrangians, start=1):
        lines.append(f"  L_{k} = {format_expr(L)}")
    return lines


def _report_payload(report) -> dict:
    conv = report.converse
    out = {
        "ok": report.ok,
        "params": {k: str(v) for k, v in report.params.items()},
        "forward": [[_verdict(v) for v in row] for row in report.forward],
        "converse": {
            "status": conv.status,
            "equations": [
                {"component": k, "field": a, "expression": prefix_expr(e)}
                for k, a, e in conv.equations
            ],
            "solved": {j.name: prefix_expr(e) for j, e in conv.solved.items()},
            "unsolved": list(conv.unsolved),
            "comparisons": [[name, _verdict(v)] for name, v in conv.comparisons],
            "witness": conv.witness,
        },
        "notes": list(report.notes),
    }
    if report.degeneracy is not None:
        out["degeneracy"] = {
            "entries": [
                {"label": e.label,
                 "assignment": {k: str(v) for k, v in e.assignment.items()},
                 "status": e.status}
                for e in report.degeneracy.entries
            ],
            "degenerate": list(report.degeneracy.degenerate),
        }
    else:
        out["degeneracy"] = None
    if report.kinetic is not None:
        out["kinetic"] = {
            "verdict": _verdict(report.kinetic.verdict),
            "momentum_onshell": prefix_expr(report.kinetic.momentum_onshell),
            "energy_onshell": prefix_expr(report.kinetic.energy_onshell),
            "special_lagrangian": prefix_expr(report.kinetic.special_lagrangian),
            "family_match": _verdict(report.kinetic.family_match),
        }
    else:
        out["kinetic"] = None
    if report.orbit is not None:
        out["orbit"] = {
            "max_deviation": report.orbit.max_deviation,
            "steps": report.orbit.steps,
            "final_state": list(report.orbit.final_state),
            "final_exact": list(report.orbit.final_exact),
            "tolerance": report.orbit_tol,
            "ok": report.orbit.max_deviation <= report.orbit_tol,
        }
    else:
        out["orbit"] = None
    return out


def _report_text(report) -> list:
    conv = report.converse
    lines = []
    shown = ", ".join(f"{k}={v}" for k, v in sorted(report.params.items()))
    lines.append(f"verification at {shown or 'no parameters'}:")
    lines.append("forward check (strong E-L on shell, symbolic parameters):")
    for k, row in enumerate(report.forward, start=1):
        verdicts = ", ".join(_verdict(v) for v in row)
        lines.append(f"  L_{k}: {verdicts}")
    lines.append(f"converse check: {conv.status}")
    for j in sorted(conv.solved, key=lambda j: j.name):
        lines.append(f"  solved {j.name} = {format_expr(conv.solved[j])}")
    for name, v in conv.comparisons:
        lines.append(f"  against lie equation {name}: {_verdict(v)}")
    if conv.unsolved:
        lines.append(f"  undetermined jets: {', '.join(conv.unsolved)}")
    if conv.witness:
        lines.append(f"  witness: {conv.witness}")
    if report.degeneracy is not None:
        parts = "; ".join(f"{e.label} -> {e.status}"
                          for e in report.degeneracy.entries)
        lines.append(f"degeneracy scan: {parts}")
        if report.degeneracy.degenerate:
            lines.append("  degenerate directions: "
                         + ", ".join(report.degeneracy.degenerate))
    if report.kinetic is not None:
        kin = report.kinetic
        lines.append(f"kinetic identity: {_verdict(kin.verdict)}")
        lines.append(f"  on-shell momentum: {format_expr(kin.momentum_onshell)}")
        lines.append(f"  on-shell energy:   {format_expr(kin.energy_onshell)}")
        lines.append(f"  special Lagrangian: {format_expr(kin.special_lagrangian)}")
        if kin.family_match is not None:
            lines.append(f"  family specialization matches: "
                         f"{_verdict(kin.family_match)}")
    if report.orbit is not None:
        orb = report.orbit
        state = "ok" if orb.max_deviation <= report.orbit_tol else "FAILED"
        lines.append(f"orbit check: max deviation {orb.max_deviation:.3e} "
                     f"over {orb.steps} steps "
                     f"(tolerance {report.orbit_tol:g}): {state}")
    for note in report.notes:
        lines.append(f"note: {note}")
    lines.append(f"result: {'ok' if report.ok else 'FAILED'}")
    return lines


def _latex_lines(title_rows) -> list:
    lines = ["\\[", "\\begin{aligned}"]
    for label, body in title_rows:
        lines.append(f"{label} &= {body} \\\\")
    lines.append("\\end{aligned}")
    lines.append("\\]")
    return lines


def _lie_latex(lie) -> list:
    rows = []
    for a in range(lie.n):
        for j in range(lie.r):
            rows.append((f"S^{{{a + 1}}}_{{{j + 1}}}",
                         latex_expr(lie.S[a][j])))
    for i in range(lie.r):
        for j in range(lie.r):
            rows.append((f"u^{{{i + 1}}}_{{{j + 1}}}",
                         latex_expr(lie.u[i][j])))
    for a in range(lie.n):
        for j in range(lie.r):
            rows.append((f"\\varphi^{{{a + 1}}}_{{{j + 1}}}",
                         latex_expr(lie.phi[a][j])))
    return _latex_lines(rows)


def _family_latex(family) -> list:
    rows = []
    for (k, a, s), e in sorted(family.multipliers.items()):
        rows.append((f"\\lambda^{{{k}}}_{{{a}{s}}}", latex_expr(e)))
    for k, L in enumerate(family.lagrangians, start=1):
        rows.append((f"L_{{{k}}}", latex_expr(L)))
    return _latex_lines(rows)


# ---------------------------------------------------------------------------
# Command handlers.


def cmd_parse(args) -> int:
    source = _load_source(args.input)
    spec = parse(source)
    seed = _seed_of(args)
    axioms = validate_axioms(spec, seed=seed, tol=args.tol)
    payload = {"command": "parse", "group": _spec_payload(spec),
               "axioms": _axioms_payload(axioms), "ok": axioms.ok}
    lines = [f"group {spec.name}: {spec.r} parameter(s), "
             f"{spec.n} coordinate(s)", ""]
    lines.append(pretty_print(spec).rstrip())
    lines.append("")
    lines.extend(_axioms_text(axioms))
    if args.format == "latex":
        rows = [(f"(S_g X)^{{{a + 1}}}", latex_expr(e))
                for a, e in enumerate(spec.action)]
        lines = _latex_lines(rows)
    _emit(payload, lines, args.format)
    return 0 if axioms.ok else 1


def cmd_derive(args) -> int:
    source = _load_source(args.input)
    spec = parse(source)
    seed = _seed_of(args)
    axioms = validate_axioms(spec, seed=seed, tol=args.tol)
    lie = constraints(spec)
    payload = {"command": "derive", "group": _spec_payload(spec),
               "axioms": _axioms_payload(axioms), "lie": _lie_payload(lie),
               "ok": axioms.ok}
    lines = [f"group {spec.name}: {spec.r} parameter(s), "
             f"{spec.n} coordinate(s)"]
    lines.extend(_axioms_text(axioms))
    lines.extend(_lie_text(lie))
    if args.format == "latex":
        lines = _lie_latex(lie)
    _emit(payload, lines, args.format)
    return 0 if axioms.ok else 1


def cmd_solve(args) -> int:
    source = _load_source(args.input)
    spec = parse(source)
    seed = _seed_of(args)
    axioms = validate_axioms(spec, seed=seed, tol=args.tol)
    lie = constraints(spec)
    ansatz = build_ansatz(lie, deg_x=args.deg_x,
                          deg_g=(args.deg_g_min, args.deg_g_max),
                          max_unknowns=args.max_unknowns)
    family = solve_family(lie, ansatz)
    payload = {"command": "solve", "group": _spec_payload(spec),
               "axioms": _axioms_payload(axioms), "lie": _lie_payload(lie),
               "ok": axioms.ok}
    payload.update(_family_payload(ansatz, family))
    lines = [f"group {spec.name}: {spec.r} parameter(s), "
             f"{spec.n} coordinate(s)"]
    lines.extend(_axioms_text(axioms))
    lines.extend(_lie_text(lie))
    lines.extend(_family_text(ansatz, family))
    if args.format == "latex":
        lines = _family_latex(family)
    _emit(payload, lines, args.format)
    return 0 if axioms.ok else 1


def _run_verification(args, source, defaults=None) -> int:
    d = defaults or {}

    def pick(flag, key, fallback):
        return flag if flag is not None else d.get(key, fallback)

    deg_x = pick(args.deg_x, "deg_x", 1)
    base = d.get("deg_g", (0, 0))
    deg_g = (args.deg_g_min if args.deg_g_min is not None else base[0],
             args.deg_g_max if args.deg_g_max is not None else base[1])
    numeric = pick(args.numeric, "numeric", False)
    step = pick(args.step, "step", 1e-3)
    g_end = pick(args.g_end, "g_end", None)
    x0 = _parse_x0(args.x0) if args.x0 is not None else d.get("x0")

    spec = parse(source)
    seed = _seed_of(args)
    axioms = validate_axioms(spec, seed=seed, tol=args.tol)
    lie = constraints(spec)
    ansatz = build_ansatz(lie, deg_x=deg_x, deg_g=deg_g,
                          max_unknowns=args.max_unknowns)
    family = solve_family(lie, ansatz)

    if args.params is not None:
        params = _parse_params(args.params)
    elif d.get("params") is not None:
        params = dict(d["params"])
    else:
        params = _generic_params(family, seed)

    report = build_report(family, params, numeric=numeric, x0=x0,
                          g_end=g_end, step=step, orbit_tol=args.orbit_tol,
                          samples=args.samples, seed=seed, tol=args.tol)
    ok = axioms.ok and report.ok
    payload = {"command": args.command, "group": _spec_payload(spec),
               "axioms": _axioms_payload(axioms), "lie": _lie_payload(lie),
               "ok": ok, "report": _report_payload(report)}
    payload.update(_family_payload(ansatz, family))

    lines = [f"group {spec.name}: {spec.r} parameter(s), "
             f"{spec.n} coordinate(s)"]
    lines.extend(_axioms_text(axioms))
    lines.extend(_lie_text(lie))
    lines.extend(_family_text(ansatz, family))
    lines.extend(_report_text(report))
    if args.format == "latex":
        lines = _family_latex(family)
    _emit(payload, lines, args.format)
    return 0 if ok else 1


def cmd_verify(args) -> int:
    return _run_verification(args, _load_source(args.input))


def cmd_example(args) -> int:
    defaults = EXAMPLE_DEFAULTS[args.name]
    return _run_verification(args, bundled_source(args.name),
                             defaults=defaults)


if __name__ == "__main__":
    entry()
