"""Command-line entry point wiring every module together.

Subcommands build codes and gadgets from files, merge and certify surgery
instances, run the two simulators, and reproduce the case-study numbers end
to end.  All reports are line-oriented ``key: value`` text; tables land in
CSV files.  Every command is deterministic given its flags and seed, and a
nonzero exit status means a verification mismatch or an error — never a
merely interesting result.

``run(argv)`` is the library form: it never raises for usage or input
problems and never writes to the process streams, so the printed text and
exit status can be asserted directly.
"""

from __future__ import annotations

import argparse
import io
import sys
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import boost as boost_mod
from . import csscode, formats, gadgets, multicycle, surgery
from . import montecarlo as montecarlo_mod
from . import stabsim
from .homology import cosystole

__all__ = ["CommandResult", "run", "main"]

USAGE_STATUS = 2
FAILURE_STATUS = 1
CASE_STUDY_RATES = (3e-3, 5e-3, 1e-2)


@dataclass(frozen=True)
class CommandResult:
    """Exit status, the printed report, and any files written."""

    status: int
    report: str
    artifacts: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == 0


@dataclass
class _Report:
    """Accumulates ``key: value`` lines plus expected-vs-got mismatches."""

    lines: list[str] = field(default_factory=list)
    mismatches: list[str] = field(default_factory=list)

    def line(self, key: str, value: object) -> None:
        self.lines.append(f"{key}: {value}")

    def check(self, key: str, got: object, want: object) -> None:
        self.line(key, got)
        if str(got) != str(want):
            self.mismatches.append(f"{key}: expected {want}, got {got}")

    def done(self, artifacts: Sequence[str] = ()) -> CommandResult:
        lines = list(self.lines)
        if self.mismatches:
            lines.append("verdict: FAIL")
            lines.extend(f"mismatch {m}" for m in self.mismatches)
            status = FAILURE_STATUS
        else:
            lines.append("verdict: ok")
            status = 0
        return CommandResult(status, "\n".join(lines) + "\n", tuple(artifacts))


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: str, text: str) -> str:
    Path(path).write_text(text)
    return path


def _signed(values) -> str:
    return " ".join("+1" if v == 1 else "-1" for v in values)


def _min_exact_distance(p: csscode.CodeParams) -> str:
    """min(dx, dz) when that minimum is certified exact, else a lower bound."""
    exact = [b.value for b in (p.dx, p.dz) if b is not None and b.exact]
    floor = min(b.value for b in (p.dx, p.dz) if b is not None)
    if exact and min(exact) <= floor:
        return str(min(exact))
    return f">{floor}"


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------


def _cmd_code_build_multicycle(args) -> CommandResult:
    spec = multicycle.parse_spec(_read(args.spec))
    code = multicycle.build(spec)
    p = csscode.params(code, args.wmax)
    rep = _Report()
    rep.line("spec", multicycle.format_spec(spec))
    rep.line("n", p.n)
    rep.line("k", p.k)
    rep.line("dx", p.dx)
    rep.line("dz", p.dz)
    rep.line("omega", p.omega)
    rep.line("x checks", code.hx.rows)
    rep.line("z checks", code.hz.rows)
    rep.line("x metas", 0 if code.mx is None else code.mx.rows)
    artifacts = []
    if args.out:
        artifacts.append(_write(args.out, formats.dump_code(code)))
        rep.line("code written to", args.out)
    return rep.done(artifacts)


def _cmd_gadget_build(args) -> CommandResult:
    recipe = formats.load_recipe(_read(args.recipe))
    code = formats.load_code(_read(args.code))
    d, m = gadgets.build_gadget(code, recipe)
    plan = surgery.build_plan(m)
    rep = _Report()
    rep.line("kind", recipe.kind)
    rep.line("ancilla dims", " ".join(str(x) for x in d.degrees))
    rep.line("map shift", m.shift)
    rep.line("measured logicals", len(plan))
    rep.line("surviving logicals", plan.k_e)
    artifacts = []
    if args.out:
        artifacts.append(_write(args.out, formats.dump_chain_map(m)))
        rep.line("gadget written to", args.out)
    return rep.done(artifacts)


def _cmd_boost(args) -> CommandResult:
    m = formats.load_chain_map(_read(args.gadget))
    boosted = boost_mod.boost(m, args.length)
    rep = _Report()
    rep.line("length", boosted.l)
    rep.line("ancilla dims", " ".join(str(x) for x in m.source.degrees))
    rep.line("boosted dims", " ".join(str(x) for x in boosted.product.degrees))
    artifacts = []
    if args.out:
        artifacts.append(_write(args.out, formats.dump_chain_map(boosted.map)))
        rep.line("boosted gadget written to", args.out)
    return rep.done(artifacts)


def _load_or_case_study_merge(args):
    """(merged, plan, description) from --code/--gadget files or the
    built-in case-study fast gadget when neither flag is given."""
    if args.code or args.gadget:
        if not (args.code and args.gadget):
            raise formats.FormatError("--code and --gadget must be given together")
        code = formats.load_code(_read(args.code))
        m = formats.load_chain_map(_read(args.gadget))
        if m.target != csscode.to_complex(code):
            raise formats.FormatError(
                "gadget target complex does not match the code "
                f"(target dims {m.target.degrees}, "
                f"code complex dims {csscode.to_complex(code).degrees})"
            )
        return surgery.total_complex(m), surgery.build_plan(m), args.gadget
    code, recipe = multicycle.case_study()
    _, m = gadgets.build_gadget(code, recipe)
    return surgery.total_complex(m), surgery.build_plan(m), "case-study fast gadget"


def _cmd_surgery_build(args) -> CommandResult:
    code = formats.load_code(_read(args.code))
    m = formats.load_chain_map(_read(args.gadget))
    rep = _Report()
    target = csscode.to_complex(code)
    if m.target != target:
        rep.line("gadget target dims", " ".join(str(x) for x in m.target.degrees))
        rep.line("code complex dims", " ".join(str(x) for x in target.degrees))
        rep.mismatches.append("gadget target complex does not match the code")
        return rep.done()
    merged = surgery.total_complex(m)
    plan = surgery.build_plan(m)
    rep.line("merged n", merged.n)
    rep.line("merged x checks", merged.code.hx.rows)
    rep.line("merged z checks", merged.code.hz.rows)
    rep.line("measured logicals", len(plan))
    rep.line("k_e", plan.k_e)
    artifacts = [_write(args.out, formats.dump_code(merged.code))]
    rep.line("merged code written to", args.out)
    return rep.done(artifacts)


def _cmd_surgery_verify(args) -> CommandResult:
    merged, plan, description = _load_or_case_study_merge(args)
    rep = _Report()
    rep.line("instance", description)
    p = csscode.params(merged.code, args.wmax)
    rep.line("n", p.n)
    rep.line("k_e", plan.k_e)
    rep.line("dx", p.dx)
    rep.line("dz", p.dz)
    rep.line("d", _min_exact_distance(p))
    if p.k != plan.k_e:  # pragma: no cover - the two routes always agree
        rep.mismatches.append(f"k: homology says {p.k}, plan says {plan.k_e}")

    exceeded = f">{args.wmax}"
    per_logical = []
    for z in plan.preimages:
        ds = surgery.surgery_distance(merged, merged.x_check_functional(z), args.wmax)
        per_logical.append(exceeded if ds is surgery.EXCEEDED else str(ds))
    rep.line("d_s", " ".join(per_logical) if per_logical else "n/a")

    fd = surgery.fault_distance(merged, plan, args.wmax)
    rep.line("fault distance", exceeded if fd is surgery.EXCEEDED else fd)

    base_code = csscode.from_complex(merged.base, merged.qubit_degree)
    base_logicals = csscode.logical_basis(base_code, "X")
    for target_logical in plan.basis:
        def2 = surgery.check_def2(merged, target_logical, base_logicals)
        if not def2.ok:
            rep.mismatches.extend(def2.failures)
    rep.line("measures exactly the planned logicals", "yes")
    rep.line("merged checks commute", "yes")
    return rep.done()


def _cmd_simulate_surgery(args) -> CommandResult:
    code, recipe = multicycle.case_study()
    _, m = gadgets.build_gadget(code, recipe)
    merged = surgery.total_complex(m)
    plan = surgery.build_plan(m)

    locations = tuple(int(t) for t in args.faults.split(",") if t.strip() != "")
    faults = stabsim.FaultSet.from_locations(merged, locations)

    state = stabsim.prepare_code_state(code.hx, np.random.default_rng([args.seed, 0]))
    for h in plan.basis:
        state.measure_to(
            stabsim.x_pauli(h), 1, np.random.default_rng([args.seed, 1])
        )
    record = stabsim.run_fast_surgery(
        state, plan, merged, np.random.default_rng([args.seed, 2]), faults
    )
    rep = _Report()
    rep.line("instance", "case-study fast gadget")
    rep.line("seed", args.seed)
    rep.line("faults", ",".join(str(i) for i in locations) if locations else "none")
    rep.line("fault weight", faults.weight)
    rep.line("sigma", _signed(record.logical_outcomes))
    rep.line("check outcomes", _signed(record.check_outcomes))
    rep.line("verdict after run", stabsim.classify_run(record, merged))
    return rep.done()


def _cmd_simulate_montecarlo(args) -> CommandResult:
    settings = formats.load_experiment(_read(args.experiment))
    exp = montecarlo_mod.experiment_from_settings(settings)
    stats = montecarlo_mod.run(exp)
    rep = _Report()
    rep.line("scheme", exp.scheme)
    rep.line("rounds", exp.rounds)
    rep.line("shots", exp.shots)
    rep.line("seed", exp.seed)
    for s in stats:
        rep.line(
            f"p={s.p:g}",
            f"failures={s.failures} rate={s.rate:.8g} "
            f"ci99=[{s.ci_low:.8g}, {s.ci_high:.8g}]",
        )
    fit = montecarlo_mod.loglog_fit(stats)
    rep.line("fit slope", "insufficient data" if fit.insufficient else f"{fit.slope:.12g}")
    artifacts = [
        _write(args.out, formats.write_results_csv(montecarlo_mod.stats_rows(exp, stats)))
    ]
    rep.line("results written to", args.out)
    return rep.done(artifacts)


def _cmd_reproduce_case_study(args) -> CommandResult:
    rep = _Report()

    code, recipe = multicycle.case_study()
    base = csscode.params(code, args.wmax)
    rep.check("base n", base.n, 42)
    rep.check("base k", base.k, 6)
    rep.check("base dx", base.dx, 4)
    rep.check("base dz", base.dz, 4)

    d, m = gadgets.build_gadget(code, recipe)
    rep.check("gadget dims", " ".join(str(x) for x in d.degrees), "20 16 4")
    rep.check("gadget ancilla z distance", cosystole(d, 1, 3), 3)

    merged = surgery.total_complex(m)
    plan = surgery.build_plan(m)
    fast = csscode.params(merged.code, args.wmax)
    rep.check("fast merged n", fast.n, 62)
    rep.check("fast merged k", fast.k, 5)
    rep.check("fast merged d", _min_exact_distance(fast), 4)
    fd = surgery.fault_distance(merged, plan, 3)
    rep.check("fast fault distance", fd, 3)

    _, gauging = gadgets.gauging_gadget(code, multicycle.x_logical())
    std = csscode.params(surgery.total_complex(gauging).code, args.wmax)
    rep.check("standard merged n", std.n, 48)
    rep.check("standard merged k", std.k, 5)
    rep.check("standard merged d", _min_exact_distance(std), 4)

    rows: list[dict[str, object]] = []
    for exp in montecarlo_mod.case_study_experiments(
        CASE_STUDY_RATES, args.shots, args.seed
    ):
        stats = montecarlo_mod.run(exp)
        rows.extend(montecarlo_mod.stats_rows(exp, stats))
        fit = montecarlo_mod.loglog_fit(stats)
        for s in stats:
            rep.line(
                f"{exp.scheme} p={s.p:g}",
                f"failures={s.failures} rate={s.rate:.8g}",
            )
        rep.line(
            f"{exp.scheme} slope",
            "insufficient data" if fit.insufficient else f"{fit.slope:.12g}",
        )
    artifacts = [_write(args.out, formats.write_results_csv(rows))]
    rep.line("results written to", args.out)
    return rep.done(artifacts)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsurgery",
        description="Build, certify, and simulate fast generalized surgery "
        "on CSS codes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    code_p = sub.add_parser("code", help="build CSS codes")
    code_sub = code_p.add_subparsers(dest="action", required=True)
    bm = code_sub.add_parser(
        "build-multicycle", help="build a multi-cycle code from a spec file"
    )
    bm.add_argument("--spec", required=True, help="spec file, e.g. 'l=7; A=0,1; ...'")
    bm.add_argument("--wmax", type=int, default=4, help="distance search cutoff")
    bm.add_argument("--out", help="write the code file here")
    bm.set_defaults(handler=_cmd_code_build_multicycle)

    gadget_p = sub.add_parser("gadget", help="build measurement gadgets")
    gadget_sub = gadget_p.add_subparsers(dest="action", required=True)
    gb = gadget_sub.add_parser("build", help="build a gadget from a recipe file")
    gb.add_argument("--recipe", required=True, help="recipe file")
    gb.add_argument("--code", required=True, help="code file the gadget attaches to")
    gb.add_argument("--out", help="write the gadget (chain map file) here")
    gb.set_defaults(handler=_cmd_gadget_build)

    boost_p = sub.add_parser(
        "boost", help="thicken a gadget with a repetition complex"
    )
    boost_p.add_argument("--gadget", required=True, help="gadget chain map file")
    boost_p.add_argument("--length", type=int, required=True, help="repetition length")
    boost_p.add_argument("--out", help="write the boosted gadget here")
    boost_p.set_defaults(handler=_cmd_boost)

    surgery_p = sub.add_parser("surgery", help="merge codes and certify merges")
    surgery_sub = surgery_p.add_subparsers(dest="action", required=True)
    sb = surgery_sub.add_parser("build", help="merge a code with a gadget")
    sb.add_argument("--code", required=True, help="code file")
    sb.add_argument("--gadget", required=True, help="gadget chain map file")
    sb.add_argument("--out", required=True, help="write the merged code file here")
    sb.set_defaults(handler=_cmd_surgery_build)
    sv = surgery_sub.add_parser(
        "verify",
        help="certify a merge (defaults to the case-study fast gadget)",
    )
    sv.add_argument("--code", help="code file (with --gadget)")
    sv.add_argument("--gadget", help="gadget chain map file (with --code)")
    sv.add_argument("--wmax", type=int, default=4, help="search cutoff")
    sv.set_defaults(handler=_cmd_surgery_verify)

    sim_p = sub.add_parser("simulate", help="run the simulators")
    sim_sub = sim_p.add_subparsers(dest="action", required=True)
    ss = sim_sub.add_parser(
        "surgery", help="one stabilizer-simulated protocol run with faults"
    )
    ss.add_argument("--seed", type=int, default=0)
    ss.add_argument(
        "--faults",
        default="",
        help="comma-separated flat fault locations: check outcome flips, "
        "then ancilla-qubit Z, then data-qubit Z",
    )
    ss.set_defaults(handler=_cmd_simulate_surgery)
    sm = sim_sub.add_parser("montecarlo", help="sample a memory experiment")
    sm.add_argument("--experiment", required=True, help="key=value experiment file")
    sm.add_argument("--out", default="results.csv", help="CSV output path")
    sm.set_defaults(handler=_cmd_simulate_montecarlo)

    rep_p = sub.add_parser("reproduce", help="rebuild and re-verify studies")
    rep_sub = rep_p.add_subparsers(dest="action", required=True)
    rc = rep_sub.add_parser(
        "case-study",
        help="build both case-study gadgets, verify all golden parameters, "
        "and run the three experiments",
    )
    rc.add_argument("--shots", type=int, default=20000)
    rc.add_argument("--seed", type=int, default=7)
    rc.add_argument("--wmax", type=int, default=4)
    rc.add_argument("--out", default="case_study.csv", help="CSV output path")
    rc.set_defaults(handler=_cmd_reproduce_case_study)
    return parser


def run(argv: Sequence[str] | None = None) -> CommandResult:
    """Parse and execute; anything the parser prints lands in the report."""
    parser = _build_parser()
    captured = io.StringIO()
    try:
        with redirect_stdout(captured), redirect_stderr(captured):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else USAGE_STATUS
        return CommandResult(code, captured.getvalue())
    try:
        return args.handler(args)
    except (formats.FormatError, OSError, ValueError) as exc:
        action = getattr(args, "action", None)
        name = args.command + (f" {action}" if action else "")
        return CommandResult(
            USAGE_STATUS,
            f"error: {exc}\nrun `qsurgery {name} --help` for usage\n",
        )


def main(argv: Sequence[str] | None = None) -> int:
    result = run(argv)
    stream = sys.stdout if result.ok else sys.stderr
    stream.write(result.report)
    return result.status


if __name__ == "__main__":  # pragma: no cover - exercised via the console script
    raise SystemExit(main())
