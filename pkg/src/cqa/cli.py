"""Command-line interface.

Subcommands: check, repairs, answer, incremental, gadget
{twin|rhombus|block|encode}, bench. Exit codes: 0 for yes / non-empty
answers / consistent, 1 for no / empty / inconsistent, 2 for errors.
Output is deterministic byte for byte for fixed inputs and flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import bench as bench_mod
from .answer import (
    AnswerSet,
    certain_answers,
    parse_query_file,
    possible_answers,
)
from .denial import is_consistent, parse_constraint_file
from .errors import BaseInconsistent, CqaError, FormatError
from .gadgets import (
    block,
    format_graph,
    graph_to_database,
    parse_graph_text,
    rhombus_extension,
    twin_extension,
)
from .hypergraph import build_conflict_hypergraph
from .incremental import (
    IncrementalProblem,
    incremental_a_certain,
    incremental_certain,
    incremental_possible,
    incremental_s_certain,
    incremental_s_possible,
)
from .model import (
    Instance,
    apply_update,
    format_instance,
    parse_constant,
    parse_instance_text,
    parse_update_script,
    strip_comment,
)
from .repairs import (
    ARepair,
    BoundedA,
    TupleRepair,
    a_repairs_bounded,
    quadratic_weight,
    repairs_for,
    unit_weight,
)
from .solve import SolveBudget


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CqaError(f"{path}: {exc.strerror}") from exc


def _load_instance(path: str) -> Instance:
    try:
        return parse_instance_text(_read(path))
    except FormatError as exc:
        raise CqaError(f"{path}: {exc}") from exc


def _load_ics(path: str):
    try:
        return parse_constraint_file(_read(path))
    except FormatError as exc:
        raise CqaError(f"{path}: {exc}") from exc


def _load_semantics(args) -> object:
    if args.semantics != "A":
        return args.semantics
    if not getattr(args, "candidates", None):
        raise CqaError("--semantics A needs --candidates FILE")
    values = []
    for lineno, raw in enumerate(_read(args.candidates).splitlines(), start=1):
        line = strip_comment(raw).strip()
        if line:
            values.append(parse_constant(line, lineno))
    weight_fn = unit_weight() if args.weight_fn == "unit" else quadratic_weight()
    return BoundedA(frozenset(values), weight_fn)


def _budget(args) -> SolveBudget:
    return SolveBudget(max_vertices=getattr(args, "budget_vertices", None) or 10_000)


def _emit(lines: list[str], records: list[dict], fmt: str, out=None) -> None:
    stream = out or sys.stdout
    if fmt == "jsonl":
        for rec in records:
            stream.write(json.dumps(rec, sort_keys=True) + "\n")
    else:
        for line in lines:
            stream.write(line + "\n")


def _fraction_str(value) -> str:
    if isinstance(value, Fraction) and value.denominator == 1:
        return str(value.numerator)
    return str(value)


# --- subcommands -----------------------------------------------------------


def cmd_check(args) -> int:
    instance = _load_instance(args.instance)
    ics = _load_ics(args.ics)
    h = build_conflict_hypergraph(instance, ics)
    consistent = not h.edges
    lines = [f"status: {'consistent' if consistent else 'inconsistent'}",
             f"violations: {len(h.edges)}"]
    records = [{"status": "consistent" if consistent else "inconsistent",
                "violations": len(h.edges)}]
    for e in sorted(h.edges, key=lambda e: sorted(str(h.tuple_of(v)) for v in e)):
        ts = sorted((str(h.tuple_of(v)) for v in e))
        tags = ",".join(h.tags_of(e))
        lines.append("- {" + ", ".join(ts) + "}" + (f" [{tags}]" if tags else ""))
        records.append({"violation": ts, "constraints": list(h.tags_of(e))})
    _emit(lines, records, args.format)
    return 0 if consistent else 1


def _repair_lines(reps: list[TupleRepair]) -> tuple[list[str], list[dict]]:
    lines: list[str] = []
    records: list[dict] = []
    for i, rep in enumerate(reps, start=1):
        retained = sorted(str(t) for t in rep.retained)
        deleted = sorted(str(t) for t in rep.deleted)
        lines += [f"repair {i}:",
                  "retained: " + ", ".join(retained),
                  "deleted: " + ", ".join(deleted),
                  f"distance: {_fraction_str(rep.distance)}"]
        records.append({"repair": i, "retained": retained, "deleted": deleted,
                        "distance": _fraction_str(rep.distance)})
    return lines, records


def _arepair_lines(reps: list[ARepair]) -> tuple[list[str], list[dict]]:
    lines: list[str] = []
    records: list[dict] = []
    for i, rep in enumerate(reps, start=1):
        changes = sorted((str(c) for c in rep.changes))
        lines.append(f"repair {i}:")
        lines += changes
        lines.append(f"cost: {_fraction_str(rep.cost)}")
        records.append({"repair": i, "changes": changes,
                        "cost": _fraction_str(rep.cost)})
    return lines, records


def cmd_repairs(args) -> int:
    instance = _load_instance(args.instance)
    ics = _load_ics(args.ics)
    semantics = _load_semantics(args)
    header = [f"semantics: {args.semantics}"]
    if isinstance(semantics, BoundedA):
        reps = a_repairs_bounded(instance, ics, semantics)
        body, records = _arepair_lines(reps)
    else:
        reps = repairs_for(instance, ics, semantics, _budget(args))
        body, records = _repair_lines(reps)
    count = len(reps)
    _emit(header + [f"repairs: {count}"] + body,
          [{"semantics": args.semantics, "repairs": count}] + records,
          args.format)
    return 0 if count else 1


def _answer_output(answer: AnswerSet, mode: str, semantics_label: str, fmt: str) -> int:
    lines = [f"mode: {mode}", f"semantics: {semantics_label}"]
    record: dict = {"mode": mode, "semantics": semantics_label}
    if answer.vacuous:
        lines.append("vacuous: true")
        record["vacuous"] = True
    if answer.is_boolean:
        lines.append("yes" if answer.boolean else "no")
        record["answer"] = bool(answer.boolean)
        records = [record]
    else:
        rows = ["(" + ",".join(str(c) for c in row) + ")" for row in answer.sorted_rows()]
        lines += rows
        record["variables"] = list(answer.free_vars)
        records = [record] + [{"answer": r} for r in rows]
    _emit(lines, records, fmt)
    return 0 if answer.truthy() else 1


def _incremental_answer(base, seq, ics, query, semantics, mode,
                        k_max: int | None = None) -> AnswerSet:
    problem = IncrementalProblem(base=base, seq=seq, ics=ics, query=query,
                                 semantics=semantics, k_max=k_max)
    if isinstance(semantics, BoundedA):
        if mode == "possible":
            after = apply_update(base, seq)
            return possible_answers(after, ics, query, semantics)
        return incremental_a_certain(problem)
    if semantics == "S":
        return incremental_s_certain(problem) if mode == "certain" \
            else incremental_s_possible(problem)
    if semantics == "C":
        return incremental_certain(problem) if mode == "certain" \
            else incremental_possible(problem)
    # WC has no dedicated incremental path; answer statically
    after = apply_update(base, seq)
    fn = certain_answers if mode == "certain" else possible_answers
    return fn(after, ics, query, semantics)


def cmd_answer(args) -> int:
    instance = _load_instance(args.instance)
    ics = _load_ics(args.ics)
    query = parse_query_file(_read(args.query))
    semantics = _load_semantics(args)
    if args.updates:
        seq = parse_update_script(_read(args.updates))
        if args.force:
            after = apply_update(instance, seq)
            fn = certain_answers if args.mode == "certain" else possible_answers
            answer = fn(after, ics, query, semantics, _budget(args))
        elif not is_consistent(instance, ics):
            raise BaseInconsistent(
                "base instance is inconsistent; rerun with --force to "
                "answer statically over the updated instance")
        else:
            answer = _incremental_answer(instance, seq, ics, query, semantics,
                                         args.mode, args.kmax)
    else:
        fn = certain_answers if args.mode == "certain" else possible_answers
        answer = fn(instance, ics, query, semantics, _budget(args))
    return _answer_output(answer, args.mode, args.semantics, args.format)


def cmd_incremental(args) -> int:
    base = _load_instance(args.base)
    ics = _load_ics(args.ics)
    seq = parse_update_script(_read(args.updates))
    query = parse_query_file(_read(args.query))
    semantics = _load_semantics(args)
    answer = _incremental_answer(base, seq, ics, query, semantics, args.mode, args.kmax)
    return _answer_output(answer, args.mode, args.semantics, args.format)


def _write_out(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gadget(args) -> int:
    if args.gadget == "encode":
        g, _ = parse_graph_text(_read(args.graph))
        instance, constraint = graph_to_database(g)
        _write_out(format_instance(instance), args.instance_out)
        ics_text = str(constraint) + "\n"
        if args.ics_out:
            with open(args.ics_out, "w", encoding="utf-8") as fh:
                fh.write(ics_text)
        else:
            sys.stdout.write(ics_text)
        return 0
    g, _ = parse_graph_text(_read(args.graph))
    if args.gadget == "twin":
        out = twin_extension(g, args.v)
        _write_out(format_graph(out), args.out)
    elif args.gadget == "rhombus":
        out = rhombus_extension(g, args.v)
        _write_out(format_graph(out), args.out)
    else:
        blk = block(g, args.k)
        _write_out(format_graph(blk.graph, {"b": blk.b, "t": blk.t}), args.out)
    return 0


def cmd_bench(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(","))
    rows = bench_mod.run_benchmark(sizes, m=args.m, repeats=args.repeats)
    csv_text = bench_mod.rows_to_csv(rows)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    sys.stdout.write(csv_text)
    ratio = bench_mod.max_fit_ratio(rows)
    sys.stdout.write(f"# max measured/fit ratio: {ratio:.2f}\n")
    if args.figure:
        bench_mod.render_figure(rows, args.figure)
        sys.stdout.write(f"# figure written to {args.figure}\n")
    return 0 if ratio <= 2.0 else 1


# --- argument parsing ------------------------------------------------------


def _add_common(p, instance_flag="--instance"):
    p.add_argument(instance_flag, required=True, help="instance file")
    p.add_argument("--ics", required=True, help="denial constraint file")
    p.add_argument("--format", choices=("text", "jsonl"), default="text")


def _add_semantics(p):
    p.add_argument("--semantics", choices=("S", "C", "WC", "A"), default="C")
    p.add_argument("--candidates", help="candidate value file (A semantics)")
    p.add_argument("--weight-fn", dest="weight_fn", choices=("unit", "quadratic"),
                   default="unit", help="change-weight function (A semantics)")
    p.add_argument("--budget-vertices", dest="budget_vertices", type=int,
                   help="vertex cap for the exact solvers")
    p.add_argument("--kmax", type=int, help="depth cap override for hitting-set search")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqa",
        description="Consistent query answering under denial constraints")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="consistency check with violating sets")
    _add_common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("repairs", help="enumerate repairs")
    _add_common(p)
    _add_semantics(p)
    p.set_defaults(fn=cmd_repairs)

    p = sub.add_parser("answer", help="consistent answers, optionally after updates")
    _add_common(p)
    _add_semantics(p)
    p.add_argument("--query", required=True, help="query file")
    p.add_argument("--mode", choices=("certain", "possible"), default="certain")
    p.add_argument("--updates", help="update script applied before answering")
    p.add_argument("--force", action="store_true",
                   help="skip the base-consistency requirement; answer statically")
    p.set_defaults(fn=cmd_answer)

    p = sub.add_parser("incremental", help="incremental consistent answers")
    p.add_argument("--base", required=True, help="consistent base instance file")
    p.add_argument("--ics", required=True)
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    _add_semantics(p)
    p.add_argument("--updates", required=True, help="update script")
    p.add_argument("--query", required=True, help="query file")
    p.add_argument("--mode", choices=("certain", "possible"), default="certain")
    p.set_defaults(fn=cmd_incremental)

    p = sub.add_parser("gadget", help="graph constructions")
    gadget_sub = p.add_subparsers(dest="gadget", required=True)
    for name in ("twin", "rhombus"):
        q = gadget_sub.add_parser(name)
        q.add_argument("--graph", required=True)
        q.add_argument("--v", type=int, required=True)
        q.add_argument("-o", "--out")
        q.set_defaults(fn=cmd_gadget)
    q = gadget_sub.add_parser("block")
    q.add_argument("--graph", required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("-o", "--out")
    q.set_defaults(fn=cmd_gadget)
    q = gadget_sub.add_parser("encode")
    q.add_argument("--graph", required=True)
    q.add_argument("--instance-out", dest="instance_out")
    q.add_argument("--ics-out", dest="ics_out")
    q.set_defaults(fn=cmd_gadget)

    p = sub.add_parser("bench", help="incremental scaling benchmark (CSV + figure)")
    p.add_argument("--sizes", default=",".join(str(s) for s in bench_mod.DEFAULT_SIZES))
    p.add_argument("--m", type=int, default=3, help="update sequence length")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--csv", help="also write the table to this CSV file")
    p.add_argument("--figure", help="render the scaling figure to this image file")
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CqaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
