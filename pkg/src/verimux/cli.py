"""Command-line entry point: ``verify``, ``emit``, ``metamorphic``, ``check-spec``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import SpecError, VerimuxError
from .orchestrator.report import EXIT_ERROR, EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected ID=PATH, got {text!r}")
    k, v = text.split("=", 1)
    return k, v


def _dataset(text: str):
    if "=" in text and not Path(text).exists():
        return _pair(text)
    return "*", text


def _clamp(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    return lo, hi


def _inputs(p):
    p.add_argument("--spec", help="property file (.mls)")
    p.add_argument("--model", action="append", type=_pair, default=[], metavar="ID=PATH",
                   help="override the file of an imported model")
    p.add_argument("--dataset", action="append", type=_dataset, default=[], metavar="[GOAL=]PATH",
                   help="CSV rows anchoring sample-based goals")
    p.add_argument("--labels", action="store_true", default=None,
                   help="dataset rows end with an integer label")
    p.add_argument("--clamp", type=_clamp, metavar="LO,HI", help="intersect every input box with [LO, HI]")
    p.add_argument("--apply-normalization", action="store_true", default=None,
                   help="fold NNet normalization constants into the network")
    p.add_argument("--config", help="TOML or JSON file with run settings")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="verimux", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="check every goal with the selected engines")
    _inputs(v)
    v.add_argument("--engine", action="append", metavar="ID",
                   help="builtin-box, builtin-affine, metamorphic, or an adapter id (repeatable)")
    v.add_argument("--adapters", help="JSON registry of external solver adapters")
    v.add_argument("--domain", choices=("box", "affine"),
                   help="shorthand for --engine builtin-DOMAIN when no engine is given")
    v.add_argument("--split-budget", type=int)
    v.add_argument("--max-depth", type=int)
    v.add_argument("--samples", type=int)
    v.add_argument("--tolerance", type=float)
    v.add_argument("--timeout", type=float, help="per-engine time limit in seconds")
    v.add_argument("--parallel", type=int, dest="parallelism", metavar="N")
    v.add_argument("--seed", type=int)
    v.add_argument("--format", choices=("text", "json"))
    v.add_argument("--output", help="write the report here instead of stdout")
    v.add_argument("--figures", metavar="DIR", help="also write summary figures (PNG) to DIR")

    e = sub.add_parser("emit", help="write SMT-LIB or VNN-LIB files without solving")
    _inputs(e)
    e.add_argument("--format", choices=("smtlib", "vnnlib"), default="smtlib")
    e.add_argument("--out-dir", default=".", help="directory for the emitted files")

    m = sub.add_parser("metamorphic", help="decision agreement under an input transformation")
    m.add_argument("--model", required=True, help="model file")
    m.add_argument("--dataset", required=True, help="CSV of inputs")
    m.add_argument("--labels", action="store_true", help="dataset rows end with a label (ignored)")
    m.add_argument("--transform", required=True, help="transformation JSON file")
    m.add_argument("--class-names", help="comma-separated class names")
    m.add_argument("--apply-normalization", action="store_true")
    m.add_argument("--format", choices=("text", "json", "csv"), default="text")
    m.add_argument("--output")
    m.add_argument("--figures", metavar="DIR")

    c = sub.add_parser("check-spec", help="parse and sort-check a property file")
    c.add_argument("--spec", required=True)
    c.add_argument("--model", action="append", type=_pair, default=[], metavar="ID=PATH")
    return ap


def _write(text: str, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _run_config(args, verify: bool):
    from .orchestrator import build_config, load_config_file

    settings = load_config_file(args.config) if args.config else {}
    over = {
        "spec": args.spec,
        "models": tuple(args.model) or None,
        "datasets": tuple(args.dataset) or None,
        "labels": args.labels,
        "clamp": args.clamp,
        "apply_normalization": args.apply_normalization,
    }
    if verify:
        engines = tuple(args.engine) if args.engine else None
        if engines is None and args.domain:
            engines = (f"builtin-{args.domain}",)
        over.update(engines=engines, adapters=args.adapters, split_budget=args.split_budget,
                    max_depth=args.max_depth, samples=args.samples, tolerance=args.tolerance,
                    timeout=args.timeout, parallelism=args.parallelism, seed=args.seed,
                    format=args.format)
    cfg = build_config(settings, **over)
    if not cfg.spec:
        raise _Usage("--spec is required (on the command line or in --config)")
    return cfg


class _Usage(Exception):
    pass


def cmd_verify(args) -> int:
    from .orchestrator import render_report, verify

    cfg = _run_config(args, verify=True)
    report = verify(cfg)
    _write(render_report(report, cfg.format), args.output)
    if args.figures:
        from .orchestrator.plots import verdict_figure
        Path(args.figures).mkdir(parents=True, exist_ok=True)
        verdict_figure(report, Path(args.figures) / "verdicts.png")
    return report.exit_status


def _stem(p) -> str:
    return p.goal if p.sample is None else f"{p.goal}_{p.sample}"


def cmd_emit(args) -> int:
    from .dispatch import emit_files
    from .orchestrator import load_inputs
    from .problem import build_problems

    cfg = _run_config(args, verify=False)
    inputs = load_inputs(cfg)
    problems = build_problems(inputs.spec, inputs.models, inputs.datasets, cfg.clamp)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for p in problems:
        files = emit_files(p, args.format, out, _stem(p))
        print(files["problem"])
        if files.get("model"):
            print(files["model"])
    return 0


def cmd_metamorphic(args) -> int:
    from .metamorphic import agreement_table, load_transformation
    from .model import load_dataset, load_model
    from .orchestrator import render_agreement

    model = load_model(args.model, args.apply_normalization)
    data = load_dataset(args.dataset, args.labels)
    t = load_transformation(args.transform)
    names = args.class_names.split(",") if args.class_names else None
    table = agreement_table(model, data, t, names)
    _write(render_agreement(table, args.format), args.output)
    if args.figures:
        from .orchestrator.plots import agreement_figure
        Path(args.figures).mkdir(parents=True, exist_ok=True)
        agreement_figure(table, Path(args.figures) / "agreement.png")
    return 0


def cmd_check_spec(args) -> int:
    from .orchestrator import load_spec_models

    typed, models = load_spec_models(args.spec, args.model)
    m = typed.module
    print(f"{args.spec}: ok ({len(m.goals)} goal(s), {len(m.predicates)} predicate(s), "
          f"{len(models)} model(s))")
    return 0


COMMANDS = {"verify": cmd_verify, "emit": cmd_emit, "metamorphic": cmd_metamorphic,
            "check-spec": cmd_check_spec}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Usage as e:
        ap.print_usage(sys.stderr)
        print(f"verimux: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as e:
        where = getattr(args, "spec", None) or ""
        print(f"{where}:{e}" if e.line else f"{where}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (VerimuxError, OSError) as e:
        print(f"verimux: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        print(f"verimux: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
