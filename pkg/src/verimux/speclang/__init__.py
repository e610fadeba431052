"""The ``.mls`` property language: lexer, parser, sort checker, expander."""

from . import ast
from .expand import expand_goal
from .parser import parse_formula, parse_spec, parse_term
from .printer import show_formula, show_module, show_term
from .typecheck import ModelSignature, TypedSpec, typecheck_spec

__all__ = [
    "ast", "expand_goal", "parse_formula", "parse_spec", "parse_term",
    "show_formula", "show_module", "show_term", "ModelSignature", "TypedSpec",
    "typecheck_spec",
]
