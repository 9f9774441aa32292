"""SMT-LIB2 (QF_LRA) emission and ``get-model`` parsing.

The emitted dialect is documented token by token in ``docs/smtlib.md``.
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from ..constraints import Clause, Formula, LinIneq, VarId
from .types import Assignment, ParseError

_NAME = re.compile(r"^([XYT])_(\d+)$")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q < 0:
        return f"(- {format_rational(-q)})"
    if q.denominator == 1:
        return str(q.numerator)
    return f"(/ {q.numerator} {q.denominator})"


def _term(v: VarId, c: Fraction) -> str:
    if c == 1:
        return v.name
    return f"(* {format_rational(c)} {v.name})"


def format_atom(atom: LinIneq) -> str:
    parts = [_term(v, c) for v, c in atom.coeffs]
    if atom.constant:
        parts.append(format_rational(atom.constant))
    lhs = parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"
    return f"({atom.relation} {lhs} 0)"


def format_clause(clause: Clause) -> str:
    atoms = [format_atom(a) for a in clause.disjuncts]
    if len(atoms) == 1:
        return atoms[0]
    return f"(or {' '.join(atoms)})"


def emit_smtlib(formula: Formula) -> str:
    lines = ["(set-logic QF_LRA)"]
    for v in formula.sorted_variables():
        lines.append(f"(declare-fun {v.name} () Real)")
    if formula.falsified:
        lines.append("(assert false)")
    for clause in formula.clauses:
        lines.append(f"(assert {format_clause(clause)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def _tokenize(text: str) -> list[str]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(ch)
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", text[i : i + 40])
            tokens.append(text[i + 1 : j])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def parse_sexprs(text: str) -> list:
    tokens = _tokenize(text)
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(tokens):
                    raise ParseError("unbalanced parentheses", text[-40:])
                if tokens[pos] == ")":
                    pos += 1
                    return items
                items.append(read())
        if tok == ")":
            raise ParseError("unexpected ')'", text[:40])
        return tok

    out = []
    while pos < len(tokens):
        out.append(read())
    return out


def _unparse(sx) -> str:
    if isinstance(sx, list):
        return "(" + " ".join(_unparse(s) for s in sx) + ")"
    return sx


def _value(sx) -> Fraction:
    if isinstance(sx, str):
        try:
            return Fraction(Decimal(sx))
        except (InvalidOperation, ValueError, OverflowError):
            raise ParseError("not a rational literal", sx) from None
    if len(sx) == 2 and sx[0] == "-":
        return -_value(sx[1])
    if len(sx) == 3 and sx[0] == "/":
        den = _value(sx[2])
        if den == 0:
            raise ParseError("division by zero", _unparse(sx))
        return _value(sx[1]) / den
    raise ParseError("unsupported value form", _unparse(sx))


def parse_model(text: str) -> Assignment:
    """Parse a ``get-model`` response into exact rationals.

    Accepts both ``((define-fun ...) ...)`` and the older ``(model ...)``
    wrapping.  Irrational values (``root-obj`` and friends) are rejected.
    """
    forms = parse_sexprs(text)
    if len(forms) != 1 or not isinstance(forms[0], list):
        raise ParseError("expected one parenthesised model", text[:80])
    body = forms[0]
    if body and body[0] == "model":
        body = body[1:]
    out: Assignment = {}
    for entry in body:
        if not (isinstance(entry, list) and len(entry) == 5 and entry[0] == "define-fun"):
            raise ParseError("expected (define-fun name () Real value)", _unparse(entry))
        _, name, args, sort, value = entry
        if args != [] or sort not in ("Real", "Int"):
            raise ParseError("unsupported definition", _unparse(entry))
        m = _NAME.match(name)
        if not m:
            raise ParseError("unknown variable name", name)
        out[VarId(m.group(1), int(m.group(2)))] = _value(value)
    return out
