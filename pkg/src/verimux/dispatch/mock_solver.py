"""Stand-in solver process: replays canned output or decides small problems
by ReLU phase enumeration.

    python -m verimux.dispatch.mock_solver problem.smt2
    python -m verimux.dispatch.mock_solver --dialect vnncomp --model net.nnet prop.vnnlib
    python -m verimux.dispatch.mock_solver --respond unsat problem.smt2
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from ..errors import VerimuxError
from .phase_oracle import decide_script
from .sexpr import float_decimal


def _decide_vnn(problem_text: str, model_path: str) -> str:
    from ..model import load_model
    from ..problem import FALSIFICATION, NormalizedGoal, VerificationProblem
    from .smtlib import emit_smtlib
    from .vnnlib import check_vnnlib

    prop = check_vnnlib(problem_text)
    model = load_model(model_path)
    goal = NormalizedGoal.true()
    for g in prop.assertions:
        goal = NormalizedGoal.of([a + b for a in goal.disjuncts for b in g.disjuncts])
    p = VerificationProblem(prop.input_box(), model, goal, FALSIFICATION)
    res = decide_script(emit_smtlib(p))
    if res.status != "sat":
        return res.status + "\n"
    names = [f"X_{i}" for i in range(model.input_dim)] + [f"Y_{j}" for j in range(model.output_dim)]
    body = "\n".join(f"({v} {float_decimal(res.assignment[v])})" for v in names)
    return "sat\n(" + body + ")\n"


def _decide_smt(problem_text: str) -> str:
    res = decide_script(problem_text)
    if res.status != "sat":
        return res.status + "\n"
    defs = "\n".join(f"  (define-fun {v} () Real {float_decimal(val)})"
                     for v, val in res.assignment.items())
    return "sat\n(\n" + defs + "\n)\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="mock_solver")
    ap.add_argument("problem")
    ap.add_argument("--dialect", choices=("smtlib", "vnncomp"), default="smtlib")
    ap.add_argument("--model")
    ap.add_argument("--respond", help="print this text instead of deciding")
    ap.add_argument("--replay", help="print the contents of this file instead of deciding")
    ap.add_argument("--sleep", type=float, default=0.0)
    ap.add_argument("--exit-code", type=int, default=0)
    args = ap.parse_args(argv)
    if args.sleep:
        time.sleep(args.sleep)
    if args.respond is not None:
        out = args.respond.replace("\\n", "\n") + "\n"
    elif args.replay is not None:
        out = Path(args.replay).read_text(encoding="utf-8")
    else:
        text = Path(args.problem).read_text(encoding="utf-8")
        try:
            if args.dialect == "vnncomp":
                if not args.model:
                    ap.error("--model is required with --dialect vnncomp")
                out = _decide_vnn(text, args.model)
            else:
                out = _decide_smt(text)
        except VerimuxError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    sys.stdout.write(out)
    sys.stdout.flush()
    return args.exit_code


if __name__ == "__main__":
    sys.exit(main())
