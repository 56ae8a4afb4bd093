"""Command-line front end: obfuscate, bench, check-rules, metrics.

Exit codes: 0 success (including the no-op case where nothing matched),
2 input error (bad expression, bad rule file, empty corpus), 3 resource
error (output size cap).  A --selfcheck counterexample exits 1, since it
can only mean an engine bug.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .egraph import CapacityExceededError
from .expansion import (ExpansionConfig, ExpansionReport, OutputTooLargeError,
                        UnextractableError, expand)
from .expr import ParseError, parse, to_text
from .metrics import aggregate, aggregate_csv, measure
from .rules import (RuleSyntaxError, UnboundRhsVarError, default_rules_text,
                    parse_rules)
from .verify import check_equivalence, check_rule, check_rule_random, \
    TooManyCasesError

EXIT_OK = 0
EXIT_SELFCHECK = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("-r", "--rules", metavar="PATH",
                   help="rule file (default: the shipped 14-rule set)")
    p.add_argument("--node-limit", type=int, default=3000)
    p.add_argument("--iter-limit", type=int, default=30)
    p.add_argument("--time-limit-ms", type=int, default=2000)
    p.add_argument("--target-size", type=int, default=None,
                   help="stop once the extracted size reaches this")
    p.add_argument("--rounds", type=int, default=64,
                   help="depth cap for the maximizing extractor")
    p.add_argument("--max-output-nodes", type=int, default=10_000,
                   help="AST size cap for the extracted output")
    p.add_argument("--bitwidth", type=int, default=64,
                   choices=(4, 8, 16, 32, 64))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-check", action="store_true",
                   help="skip the rule soundness check before running")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbaobf",
        description="Grow mixed boolean-arithmetic expressions via "
                    "semantics-preserving rewrite rules over an e-graph.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_obf = sub.add_parser("obfuscate", help="obfuscate one expression")
    p_obf.add_argument("-e", "--expr", required=True)
    _add_engine_flags(p_obf)
    p_obf.add_argument("--selfcheck", action="store_true",
                       help="verify input/output equivalence after the run")
    p_obf.add_argument("--json", action="store_true",
                       help="emit the full report as JSON")
    p_obf.add_argument("-o", "--output", metavar="PATH",
                       help="write the report here instead of stdout")

    p_bench = sub.add_parser("bench",
                             help="obfuscate a corpus and aggregate metrics")
    p_bench.add_argument("-f", "--corpus", required=True,
                         help="file with one expression per line")
    _add_engine_flags(p_bench)
    p_bench.add_argument("--selfcheck", action="store_true")
    p_bench.add_argument("-o", "--output", metavar="BASE", default="bench_out",
                         help="write BASE.jsonl and BASE.csv (default: "
                              "bench_out)")

    p_check = sub.add_parser("check-rules", help="soundness-check a rule file")
    p_check.add_argument("rulefile")
    p_check.add_argument("--trials", type=int, default=10_000,
                         help="random 64-bit trials per rule")
    p_check.add_argument("--seed", type=int, default=0)

    p_metrics = sub.add_parser("metrics",
                               help="print complexity metrics for an "
                                    "expression")
    p_metrics.add_argument("-e", "--expr", required=True)
    p_metrics.add_argument("--bitwidth", type=int, default=64,
                           choices=(4, 8, 16, 32, 64))
    p_metrics.add_argument("--json", action="store_true")

    return parser


def _load_rules(path: Optional[str]):
    if path is None:
        return parse_rules(default_rules_text())
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


def _admission_check(rules, seed: int) -> Optional[str]:
    """Exhaustive at 4 and 8 bits plus quick random 64-bit trials; returns
    an error message for the first failing rule, or None."""
    for rule in rules:
        for width in (4, 8):
            try:
                res = check_rule(rule, width)
            except TooManyCasesError:
                res = check_rule_random(rule, width, 4096, seed)
            if not res.passed:
                return _failure_line(rule.name, width, res)
        res = check_rule_random(rule, 64, 1000, seed)
        if not res.passed:
            return _failure_line(rule.name, 64, res)
    return None


def _failure_line(name: str, width: int, res) -> str:
    env, lv, rv = res.counterexample
    bindings = ", ".join(f"?{k}={v}" for k, v in sorted(env.items()))
    return (f"rule {name!r} is unsound at {width} bits: "
            f"{{{bindings}}} gives {lv} vs {rv}")


def _config_from_args(args) -> ExpansionConfig:
    return ExpansionConfig(
        node_limit=args.node_limit,
        iter_limit=args.iter_limit,
        time_limit=args.time_limit_ms / 1000.0,
        target_ast_size=args.target_size,
        extraction_rounds=args.rounds,
        max_output_nodes=args.max_output_nodes,
        seed=args.seed,
    )


def _report_json(expr_text: str, report: ExpansionReport) -> dict:
    return {
        "input": expr_text,
        "output": to_text(report.output),
        "stop": report.stop.value,
        "metrics_in": report.metrics_in.as_dict(),
        "metrics_out": report.metrics_out.as_dict(),
    }


def run_obfuscate(args) -> int:
    try:
        rules = _load_rules(args.rules)
        if not args.no_check:
            failure = _admission_check(rules, args.seed)
            if failure:
                print(failure, file=sys.stderr)
                return EXIT_INPUT
        expr = parse(args.expr, args.bitwidth)
    except (ParseError, RuleSyntaxError, UnboundRhsVarError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = expand(expr, rules, _config_from_args(args), args.bitwidth)
    except (OutputTooLargeError, CapacityExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except UnextractableError as exc:
        print(f"error: {exc} (raise --rounds)", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        payload = _report_json(args.expr, report)
        payload["iterations"] = report.iterations
        payload["final_node_count"] = report.final_node_count
        payload["elapsed_ms"] = round(report.elapsed * 1000.0, 3)
        text = json.dumps(payload, indent=2)
    else:
        text = to_text(report.output)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.selfcheck:
        res = check_equivalence(expr, report.output, args.bitwidth,
                                trials=1000, seed=args.seed)
        if not res.passed:
            env, lv, rv = res.counterexample
            print(f"selfcheck FAILED: {env} gives {lv} vs {rv}",
                  file=sys.stderr)
            return EXIT_SELFCHECK
        print(f"selfcheck ok ({res.cases_checked} environments)",
              file=sys.stderr)
    return EXIT_OK


def run_bench(args) -> int:
    try:
        rules = _load_rules(args.rules)
        if not args.no_check:
            failure = _admission_check(rules, args.seed)
            if failure:
                print(failure, file=sys.stderr)
                return EXIT_INPUT
        with open(args.corpus, encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
    except (RuleSyntaxError, UnboundRhsVarError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        print("error: empty corpus", file=sys.stderr)
        return EXIT_INPUT

    cfg = _config_from_args(args)
    rows = []
    pairs = []
    failures = 0
    for lineno, text in enumerate(lines, start=1):
        try:
            expr = parse(text, args.bitwidth)
            report = expand(expr, rules, cfg, args.bitwidth)
        except (ParseError, OutputTooLargeError, UnextractableError) as exc:
            print(f"line {lineno}: skipped ({exc})", file=sys.stderr)
            failures += 1
            continue
        if args.selfcheck:
            res = check_equivalence(expr, report.output, args.bitwidth,
                                    trials=1000, seed=args.seed)
            if not res.passed:
                env, lv, rv = res.counterexample
                print(f"line {lineno}: selfcheck FAILED: {env} gives "
                      f"{lv} vs {rv}", file=sys.stderr)
                return EXIT_SELFCHECK
        rows.append(_report_json(text, report))
        pairs.append((report.metrics_in, report.metrics_out))
    if not pairs:
        print("error: every corpus line failed to parse", file=sys.stderr)
        return EXIT_INPUT

    csv_text = aggregate_csv(aggregate(pairs))
    jsonl_path = args.output + ".jsonl"
    csv_path = args.output + ".csv"
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    sys.stdout.write(csv_text)
    print(f"{len(pairs)} expressions processed, {failures} skipped; "
          f"details in {jsonl_path}, aggregate in {csv_path}")
    return EXIT_OK


def run_check_rules(args) -> int:
    try:
        with open(args.rulefile, encoding="utf-8") as fh:
            rules = parse_rules(fh.read())
    except (RuleSyntaxError, UnboundRhsVarError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    failed = False
    for rule in rules:
        for width in (4, 8):
            try:
                res = check_rule(rule, width)
                label = f"exhaustive@{width}"
            except TooManyCasesError:
                res = check_rule_random(rule, width, args.trials, args.seed)
                label = f"random@{width}"
            if not res.passed:
                print(f"FAIL {rule.name} [{label}]: "
                      f"{_failure_line(rule.name, width, res)}")
                failed = True
                break
        else:
            res = check_rule_random(rule, 64, args.trials, args.seed)
            if not res.passed:
                print(f"FAIL {rule.name} [random@64]: "
                      f"{_failure_line(rule.name, 64, res)}")
                failed = True
            else:
                print(f"ok   {rule.name} (exhaustive@4, exhaustive@8, "
                      f"{args.trials} random@64)")
    return EXIT_INPUT if failed else EXIT_OK


def run_metrics(args) -> int:
    try:
        expr = parse(args.expr, args.bitwidth)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = measure(expr)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        for key, value in report.as_dict().items():
            print(f"{key}: {value}")
    return EXIT_OK


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "obfuscate": run_obfuscate,
        "bench": run_bench,
        "check-rules": run_check_rules,
        "metrics": run_metrics,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
