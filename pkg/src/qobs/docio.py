"""Reading and writing the line-oriented text documents.

Every document is UTF-8, one directive per line, ``#`` starts a comment.

Structure documents (``.qsa``)::

    @kind omp                 # effect_algebra | mv_algebra | omp | boolean | fuzzy
    @elements 0 a a' b b' 1
    @plus a a' 1              # one-sided; the mirror row is implied

Rows ``0 + x = x`` are implied too.  Generated carriers replace the table:
``@chain n``, ``@powerset w1 w2 ...``, ``@mo k``, ``@product left.qsa
right.qsa``, or ``@omega w1 w2`` followed by ``@function v1 v2`` rows for
a fuzzy closure.

Observable documents use ``@structure <path>`` then ``@atom <t> <name>``;
spectral families ``@cum <t> <name>``; states ``@value <name> <p/q>``.
Matrix documents use ``@dim n`` followed by ``@effect <t>`` (POVM atom),
``@cum <t>`` (cumulative family value) or ``@rho`` blocks, each followed
by ``n`` rows of comma-separated entries such as ``0.5`` or ``0.1-0.2j``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DuplicateEntry, QobsError
from .intervals import format_number, to_rational
from .structure import (
    UNDEF,
    QuantumStructure,
    make_chain,
    make_fuzzy,
    make_mo,
    make_power_set,
    product,
)

KINDS = ("effect_algebra", "mv_algebra", "omp", "boolean", "fuzzy", "hilbert")
KIND_FLAG = {"mv_algebra": "mv", "omp": "orthomodular_poset", "boolean": "boolean"}


class DocumentError(QobsError):
    """Malformed document; ``line`` is 1-based."""

    code = "parse"

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class KindMismatch(QobsError):
    code = "kind-mismatch"


def _lines(path):
    text = Path(path).read_text(encoding="utf-8")
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _rational(path, no, tok) -> Fraction:
    try:
        return to_rational(tok)
    except (ValueError, ZeroDivisionError):
        raise DocumentError(path, no, f"not a rational number: {tok!r}") from None


def document_kind(path) -> str:
    """``structure``, ``observable``, ``family``, ``state`` or ``matrix``."""
    for no, toks in _lines(path):
        head = toks[0]
        if head == "@kind":
            return "matrix" if len(toks) > 1 and toks[1] == "hilbert" else "structure"
        if head == "@dim":
            return "matrix"
        if head in ("@atom", "@cum", "@value"):
            return {"@atom": "observable", "@cum": "family", "@value": "state"}[head]
    raise DocumentError(path, 0, "cannot tell what kind of document this is")


@dataclass
class Loader:
    """Reads documents, sharing one structure object per structure file."""

    cache: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)

    def structure(self, path) -> QuantumStructure:
        key = os.path.realpath(path)
        if key not in self.cache:
            s, kind = self._read_structure(path)
            self.cache[key] = s
            self.kinds[key] = kind
        return self.cache[key]

    def kind(self, path) -> str:
        self.structure(path)
        return self.kinds[os.path.realpath(path)]

    def _read_structure(self, path):
        path = Path(path)
        kind = None
        names = None
        rows = []
        generator = None
        omega = None
        functions = []
        for no, toks in _lines(path):
            head, args = toks[0], toks[1:]
            if head == "@kind":
                if kind is not None:
                    raise DocumentError(path, no, "duplicate @kind line")
                if len(args) != 1 or args[0] not in KINDS:
                    raise DocumentError(path, no, f"@kind must be one of {', '.join(KINDS)}")
                kind = args[0]
            elif head == "@elements":
                if names is not None:
                    raise DocumentError(path, no, "duplicate @elements line")
                names = args
            elif head == "@plus":
                if len(args) != 3:
                    raise DocumentError(path, no, "@plus needs three element names")
                rows.append((no, *args))
            elif head in ("@chain", "@mo"):
                if len(args) != 1 or not args[0].isdigit():
                    raise DocumentError(path, no, f"{head} needs one positive integer")
                generator = (no, head, int(args[0]))
            elif head == "@powerset":
                if not args:
                    raise DocumentError(path, no, "@powerset needs labels")
                generator = (no, head, args)
            elif head == "@product":
                if len(args) != 2:
                    raise DocumentError(path, no, "@product needs two structure paths")
                generator = (no, head, [path.parent / a for a in args])
            elif head == "@omega":
                omega = args
            elif head == "@function":
                functions.append([_rational(path, no, a) for a in args])
            else:
                raise DocumentError(path, no, f"unknown directive {head!r}")
        if kind is None:
            raise DocumentError(path, 1, "missing @kind line")
        if kind == "hilbert":
            raise DocumentError(path, 1, "hilbert documents are matrix documents")
        if kind == "fuzzy" or omega is not None:
            if omega is None:
                raise DocumentError(path, 1, "fuzzy structure needs an @omega line")
            _, s = make_fuzzy(omega, functions)
        elif generator is not None:
            no, head, arg = generator
            if head == "@chain":
                s = make_chain(arg)
            elif head == "@mo":
                s = make_mo(arg)
            elif head == "@powerset":
                s = make_power_set(arg)
            else:
                s = product(self.structure(arg[0]), self.structure(arg[1]))
        else:
            if names is None:
                raise DocumentError(path, 1, "missing @elements line")
            s = _table_structure(path, names, rows)
        flag = KIND_FLAG.get(kind)
        if flag is not None and flag not in s.flavor:
            raise KindMismatch(f"declared {kind} but structure lacks flag {flag}")
        return s, kind

    def _named(self, path):
        path = Path(path)
        s = None
        entries = []
        for no, toks in _lines(path):
            head, args = toks[0], toks[1:]
            if head == "@structure":
                if len(args) != 1:
                    raise DocumentError(path, no, "@structure needs one path")
                s = self.structure(path.parent / args[0])
            else:
                entries.append((no, head, args))
        if s is None:
            raise DocumentError(path, 1, "missing @structure line")
        return path, s, entries

    def _pairs(self, path, directive):
        path, s, entries = self._named(path)
        out = []
        for no, head, args in entries:
            if head != directive or len(args) != 2:
                raise DocumentError(path, no, f"expected '{directive} <t> <element>'")
            t = _rational(path, no, args[0])
            if args[1] not in s.names:
                raise DocumentError(path, no, f"unknown element {args[1]!r}")
            out.append((t, s.element(args[1])))
        return s, out

    def observable_atoms(self, path):
        return self._pairs(path, "@atom")

    def family_jumps(self, path):
        return self._pairs(path, "@cum")

    def state_values(self, path):
        path, s, entries = self._named(path)
        vals = {}
        for no, head, args in entries:
            if head != "@value" or len(args) != 2:
                raise DocumentError(path, no, "expected '@value <element> <p/q>'")
            if args[0] not in s.names:
                raise DocumentError(path, no, f"unknown element {args[0]!r}")
            if args[0] in vals:
                raise DocumentError(path, no, f"duplicate value for {args[0]!r}")
            vals[args[0]] = _rational(path, no, args[1])
        return s, vals


def _table_structure(path, names, rows) -> QuantumStructure:
    for req in ("0", "1"):
        if req not in names:
            raise DocumentError(path, 1, f"element {req!r} must be declared")
    if len(set(names)) != len(names):
        raise DuplicateEntry("element names must be unique")
    index = {x: i for i, x in enumerate(names)}
    n = len(names)
    plus = np.full((n, n), UNDEF, dtype=np.int32)
    zero = index["0"]

    def put(a, b, c, no):
        if plus[a, b] != UNDEF and plus[a, b] != c:
            raise DuplicateEntry(f"line {no}: {names[a]}+{names[b]} declared twice with different sums")
        plus[a, b] = c

    for i in range(n):
        put(zero, i, i, 0)
        put(i, zero, i, 0)
    for no, a, b, c in rows:
        for x in (a, b, c):
            if x not in index:
                raise DocumentError(path, no, f"unknown element {x!r}")
        put(index[a], index[b], index[c], no)
        put(index[b], index[a], index[c], no)
    return QuantumStructure(names, plus, zero, index["1"])


# ---------------------------------------------------------------------------
# matrix documents


def _complex_row(path, no, toks, dim):
    text = " ".join(toks)
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != dim:
        raise DocumentError(path, no, f"expected {dim} entries, got {len(parts)}")
    try:
        return [complex(p.replace(" ", "")) for p in parts]
    except ValueError:
        raise DocumentError(path, no, f"bad matrix entry in {text!r}") from None


def read_matrix_document(path) -> dict:
    """Returns ``{"dim", "effects", "cums", "rho"}`` with numpy matrices."""
    path = Path(path)
    dim = None
    out = {"effects": [], "cums": [], "rho": None}
    current = None
    rows = []

    def close(no):
        nonlocal current, rows
        if current is None:
            return
        if len(rows) != dim:
            raise DocumentError(path, no, f"block has {len(rows)} rows, expected {dim}")
        m = np.array(rows, dtype=complex)
        kind, t = current
        if kind == "rho":
            out["rho"] = m
        else:
            out[kind].append((t, m))
        current, rows = None, []

    last = 0
    for no, toks in _lines(path):
        last = no
        head = toks[0]
        if head.startswith("@"):
            close(no)
            if head == "@kind":
                if toks[1:] != ["hilbert"]:
                    raise DocumentError(path, no, "matrix documents have @kind hilbert")
            elif head == "@dim":
                if len(toks) != 2 or not toks[1].isdigit() or int(toks[1]) < 1:
                    raise DocumentError(path, no, "@dim needs a positive integer")
                dim = int(toks[1])
            elif head in ("@effect", "@cum"):
                if dim is None:
                    raise DocumentError(path, no, "@dim must come first")
                if len(toks) != 2:
                    raise DocumentError(path, no, f"{head} needs one outcome value")
                current = ("effects" if head == "@effect" else "cums", _rational(path, no, toks[1]))
            elif head == "@rho":
                if dim is None:
                    raise DocumentError(path, no, "@dim must come first")
                current = ("rho", None)
            else:
                raise DocumentError(path, no, f"unknown directive {head!r}")
        else:
            if current is None:
                raise DocumentError(path, no, "matrix row outside a block")
            rows.append(_complex_row(path, no, toks, dim))
    close(last + 1)
    if dim is None:
        raise DocumentError(path, 1, "missing @dim line")
    out["dim"] = dim
    return out


# ---------------------------------------------------------------------------
# writers


def format_real(x: float) -> str:
    """Twelve significant digits, no negative zero."""
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def format_complex(z: complex) -> str:
    re_, im = format_real(z.real), format_real(z.imag)
    if im == "0":
        return re_
    sign = "" if im.startswith("-") else "+"
    return f"{re_}{sign}{im}j"


def observable_document(x, structure_ref: str) -> str:
    s = x.structure
    lines = [f"@structure {structure_ref}"]
    lines += [f"@atom {format_number(t)} {s.names[a]}" for t, a in x.atoms]
    return "\n".join(lines) + "\n"


def family_document(f, structure_ref: str) -> str:
    s = f.structure
    lines = [f"@structure {structure_ref}"]
    lines += [f"@cum {format_number(t)} {s.names[c]}" for t, c in f.jumps]
    return "\n".join(lines) + "\n"


def _matrix_rows(m):
    return [", ".join(format_complex(complex(v)) for v in row) for row in m]


def povm_document(p, rho=None) -> str:
    lines = ["@kind hilbert", f"@dim {p.dim}"]
    for t, e in p.atoms:
        lines.append(f"@effect {format_number(Fraction(str(t)))}")
        lines += _matrix_rows(e.matrix)
    if rho is not None:
        lines.append("@rho")
        lines += _matrix_rows(rho)
    return "\n".join(lines) + "\n"


def structure_ref(doc_path, structure_path) -> str:
    """Path of ``structure_path`` relative to the directory of ``doc_path``."""
    return os.path.relpath(os.path.realpath(structure_path), os.path.dirname(os.path.realpath(doc_path)))


def declared_structure(path) -> Path:
    """The structure file named by a document's ``@structure`` line."""
    path = Path(path)
    for no, toks in _lines(path):
        if toks[0] == "@structure" and len(toks) == 2:
            return path.parent / toks[1]
    raise DocumentError(path, 1, "missing @structure line")
