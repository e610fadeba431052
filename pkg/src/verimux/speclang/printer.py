"""Pretty-printer whose output reparses to a structurally identical AST."""

from __future__ import annotations

from . import ast as A


def show_sort(s: A.Sort) -> str:
    return str(s)


def show_term(t: A.Term) -> str:
    if isinstance(t, A.Var):
        return t.name
    if isinstance(t, A.RealLit):
        return t.text
    if isinstance(t, A.IntLit):
        return str(t.value) if t.value >= 0 else f"(-{-t.value})"
    if isinstance(t, A.VecLit):
        raise ValueError("constant vectors have no surface syntax")
    if isinstance(t, A.Add):
        return f"({show_term(t.left)} + {show_term(t.right)})"
    if isinstance(t, A.Sub):
        return f"({show_term(t.left)} - {show_term(t.right)})"
    if isinstance(t, A.Mul):
        return f"({show_term(t.left)} * {show_term(t.right)})"
    if isinstance(t, A.Neg):
        return f"(-{show_term(t.arg)})"
    if isinstance(t, A.ModelApply):
        return f"{t.model}({show_term(t.arg)})"
    if isinstance(t, A.Index):
        return f"{show_term(t.vec)}[{show_term(t.index)}]"
    if isinstance(t, A.ArgMax):
        return f"(argmax {show_term(t.arg)})"
    raise TypeError(f"not a term: {t!r}")


def show_formula(f: A.Formula) -> str:
    if isinstance(f, A.BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, (A.Forall, A.Exists)):
        q = "forall" if isinstance(f, A.Forall) else "exists"
        return f"({q} {f.var}: {show_sort(f.var_sort)}. {show_formula(f.body)})"
    if isinstance(f, A.And):
        return f"({show_formula(f.left)} /\\ {show_formula(f.right)})"
    if isinstance(f, A.Or):
        return f"({show_formula(f.left)} \\/ {show_formula(f.right)})"
    if isinstance(f, A.Implies):
        return f"({show_formula(f.left)} -> {show_formula(f.right)})"
    if isinstance(f, A.Not):
        return f"(not {show_formula(f.arg)})"
    if isinstance(f, A.Compare):
        return f"{show_term(f.left)} {f.op} {show_term(f.right)}"
    if isinstance(f, A.PredApply):
        return f"{f.name}({', '.join(show_term(a) for a in f.args)})"
    raise TypeError(f"not a formula: {f!r}")


def show_module(m: A.SpecModule) -> str:
    lines = []
    for imp in m.imports:
        lines.append(f'model {imp.name} from "{imp.path}";')
    for p in m.predicates:
        params = ", ".join(f"{n}: {show_sort(s)}" for n, s in p.params)
        lines.append(f"predicate {p.name}({params}) = {show_formula(p.body)};")
    for g in m.goals:
        lines.append(f"goal {g.name}: {show_formula(g.body)};")
    return "\n".join(lines) + ("\n" if lines else "")
