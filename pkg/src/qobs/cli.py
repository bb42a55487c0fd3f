"""Command-line front-end.

Every command prints a report whose first line is ``OK`` or
``FAIL <reason>``.  Exit codes: 0 success, 1 validation failure, 2 parse
or I/O error, 3 usage error.  ``--json`` prints the same facts as one
JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import hilbert
from .docio import (
    DocumentError,
    Loader,
    declared_structure,
    document_kind,
    format_real,
    observable_document,
    povm_document,
    read_matrix_document,
    structure_ref,
)
from .errors import IntervalSyntaxError, QobsError
from .intervals import format_number, parse_interval_set
from .observables import (
    check_family_axioms,
    evaluate,
    jauch_piron_check,
    make_family,
    make_observable,
    range_of,
    reconstruct,
    spectrum,
    uniqueness_oracle,
)
from .states import distribution, expectation, moment, state_polytope, validate_state
from .structure import FLAGS, blocks, is_subalgebra, meet_failures, rdp_refine, sharp_elements

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Failure(Exception):
    """A validation failure carrying a reason code and report facts."""

    def __init__(self, code, facts=None, lines=()):
        self.code = code
        self.facts = facts or {}
        self.lines = list(lines)
        super().__init__(code)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _q(x) -> str:
    return str(Fraction(x))


def _set_text(s, members) -> str:
    return "{" + ", ".join(s.names[a] for a in sorted(members)) + "}"


# ---------------------------------------------------------------------------
# commands; each returns (facts, text lines)


def _validate_structure(loader, path):
    s = loader.structure(path)
    flags = [f for f in FLAGS if f in s.flavor]
    facts = {"kind": loader.kind(path), "elements": s.n, "flags": flags}
    lines = [f"kind: {facts['kind']}", f"elements: {s.n}", f"flags: {','.join(flags) or '-'}"]
    if s.undetermined:
        facts["undetermined"] = [f for f in FLAGS if f in s.undetermined]
        lines.append(f"undetermined: {','.join(facts['undetermined'])}")
    return facts, lines


def _family_failure(s, rep):
    lines = [f"{kind}: {msg}" for kind, _, msg in rep.problems]
    lines += [f"{k}: {str(getattr(rep, k)).lower()}" for k in ("increasing", "monotone", "normalized")]
    facts = {
        "increasing": rep.increasing,
        "monotone": rep.monotone,
        "normalized": rep.normalized,
        "problems": [msg for _, _, msg in rep.problems],
    }
    return Failure("family-invalid", facts, lines)


def _atoms_facts(x):
    s = x.structure
    atoms = [[format_number(t), s.names[a]] for t, a in x.atoms]
    return atoms, [f"{t}\t{a}" for t, a in atoms]


def _load_observable(loader, path):
    s, pairs = loader.observable_atoms(path)
    return make_observable(s, pairs)


def _validate_matrix(path):
    doc = read_matrix_document(path)
    facts = {"dim": doc["dim"]}
    lines = [f"dim: {doc['dim']}"]
    if doc["cums"]:
        f = hilbert.operator_family(doc["cums"])
        p = hilbert.reconstruct_povm(f)
        facts["family_jumps"] = len(f.jumps)
        facts["sum_residual"] = format_real(p.sum_residual)
        lines += [f"family jumps: {len(f.jumps)}", f"sum residual: {facts['sum_residual']}"]
    if doc["effects"]:
        p = hilbert.make_povm(doc["effects"])
        facts["povm_atoms"] = len(p.atoms)
        facts["povm_residual"] = format_real(p.sum_residual)
        lines += [f"povm atoms: {len(p.atoms)}", f"povm residual: {facts['povm_residual']}"]
    if doc["rho"] is not None:
        r = hilbert.density(doc["rho"])
        facts["rho_trace_residual"] = format_real(r.trace_residual)
        lines.append(f"rho trace residual: {facts['rho_trace_residual']}")
    return facts, lines


def cmd_validate(args, loader):
    kind = document_kind(args.path)
    if kind == "structure":
        return _validate_structure(loader, args.path)
    if kind == "matrix":
        return _validate_matrix(args.path)
    if kind == "observable":
        x = _load_observable(loader, args.path)
        atoms, lines = _atoms_facts(x)
        return {"atoms": atoms}, lines
    if kind == "family":
        s, jumps = loader.family_jumps(args.path)
        rep = check_family_axioms(s, jumps)
        if not rep.ok:
            raise _family_failure(s, rep)
        return {"jumps": len(jumps)}, [f"jumps: {len(jumps)}"]
    s, vals = loader.state_values(args.path)
    st = validate_state(s, vals)
    return {"values": [[s.names[i], _q(v)] for i, v in enumerate(st.values)]}, [
        f"{s.names[i]}\t{_q(v)}" for i, v in enumerate(st.values)
    ]


def cmd_build(args, loader):
    fam = args.family
    if document_kind(fam) == "matrix":
        doc = read_matrix_document(fam)
        if not doc["cums"]:
            raise UsageError("matrix document has no @cum blocks")
        p = hilbert.reconstruct_povm(hilbert.operator_family(doc["cums"]))
        if args.output:
            Path(args.output).write_text(povm_document(p, doc["rho"]), encoding="utf-8")
        facts = {"dim": p.dim, "atoms": len(p.atoms), "sum_residual": format_real(p.sum_residual)}
        lines = [f"dim: {p.dim}", f"atoms: {len(p.atoms)}", f"sum residual: {facts['sum_residual']}"]
        return facts, lines
    s, jumps = loader.family_jumps(fam)
    rep = check_family_axioms(s, jumps)
    if not rep.ok:
        raise _family_failure(s, rep)
    x = reconstruct(make_family(s, jumps))
    if args.output:
        ref = structure_ref(args.output, declared_structure(fam))
        Path(args.output).write_text(observable_document(x, ref), encoding="utf-8")
    atoms, lines = _atoms_facts(x)
    return {"atoms": atoms}, lines


def cmd_eval(args, loader):
    x = _load_observable(loader, args.observable)
    e = parse_interval_set(args.set)
    v = x.structure.names[evaluate(x, e)]
    return {"value": v}, [v]


def cmd_spectrum(args, loader):
    x = _load_observable(loader, args.observable)
    sig = str(spectrum(x))
    return {"spectrum": sig}, [sig]


def cmd_range(args, loader):
    x = _load_observable(loader, args.observable)
    s = x.structure
    r = range_of(x)
    sub = is_subalgebra(s, r)
    facts = {"range": [s.names[a] for a in sorted(r)], "subalgebra": sub}
    return facts, [_set_text(s, r), f"subalgebra: {str(sub).lower()}"]


def _parse_table(text):
    out = {}
    for item in text.split(","):
        if ":" not in item:
            raise UsageError(f"bad --f entry {item!r}; expected t:value")
        k, v = item.split(":", 1)
        try:
            out[Fraction(k.strip())] = Fraction(v.strip())
        except ValueError:
            raise UsageError(f"bad --f entry {item!r}") from None
    return out


def _exp_matrix(args):
    doc = read_matrix_document(args.observable)
    if doc["cums"]:
        p = hilbert.reconstruct_povm(hilbert.operator_family(doc["cums"]))
    elif doc["effects"]:
        p = hilbert.make_povm(doc["effects"])
    else:
        raise UsageError("matrix document has neither @effect nor @cum blocks")
    rho = doc["rho"]
    if args.rho:
        rho = read_matrix_document(args.rho)["rho"]
    if rho is None:
        raise UsageError("no density matrix: add an @rho block or pass --rho")
    k = args.moment or 2
    st = hilbert.povm_statistics(p, hilbert.density(rho), k)
    rows = [[format_real(t), format_real(q)] for t, q in st.probabilities]
    facts = {
        "distribution": rows,
        "expectation": format_real(st.expectation),
        "moments": {str(j + 1): format_real(m) for j, m in enumerate(st.moments)},
    }
    lines = [f"{'t':>20}{'p':>20}"] + [f"{t:>20}{q:>20}" for t, q in rows]
    lines.append(f"expectation: {facts['expectation']}")
    lines += [f"moment {j}: {m}" for j, m in facts["moments"].items()]
    return facts, lines


def cmd_exp(args, loader):
    if document_kind(args.observable) == "matrix":
        return _exp_matrix(args)
    x = _load_observable(loader, args.observable)
    s = x.structure
    if args.state:
        s2, vals = loader.state_values(args.state)
        st = validate_state(s2, vals)
    else:
        st = state_polytope(s).unique
        if st is None:
            raise UsageError("structure has no unique state; pass --state")
    dist = distribution(st, x)
    table = _parse_table(args.f) if args.f else None
    facts = {
        "distribution": [[format_number(t), _q(p)] for t, p in dist],
        "expectation": _q(expectation(st, x, table)),
    }
    lines = ["distribution:"] + [f"{t}\t{p}" for t, p in facts["distribution"]]
    lines.append(f"expectation: {facts['expectation']}")
    if args.moment:
        facts["moments"] = {str(args.moment): _q(moment(st, x, args.moment))}
        lines.append(f"moment {args.moment}: {facts['moments'][str(args.moment)]}")
    return facts, lines


def cmd_blocks(args, loader):
    s = loader.structure(args.structure)
    bl = blocks(s)
    return {"blocks": [[s.names[a] for a in sorted(b)] for b in bl]}, [_set_text(s, b) for b in bl]


def cmd_sharp(args, loader):
    s = loader.structure(args.structure)
    sh = sharp_elements(s)
    bad = meet_failures(s)
    facts = {"sharp": [s.names[a] for a in sorted(sh)], "meet_undefined": [s.names[a] for a in bad]}
    lines = [_set_text(s, sh)]
    if bad:
        lines.append("meet undefined: " + ", ".join(facts["meet_undefined"]))
    return facts, lines


def cmd_states(args, loader):
    s = loader.structure(args.structure)
    poly = state_polytope(s)
    verts = poly.vertices
    facts = {
        "empty": poly.is_empty,
        "dimension": poly.dimension if not poly.is_empty else None,
        "free_coordinates": [s.names[a] for a in poly.free_coordinates],
        "vertices": len(verts),
    }
    lines = [
        f"empty: {str(poly.is_empty).lower()}",
        f"dimension: {'-' if facts['dimension'] is None else facts['dimension']}",
        "free coordinates: " + (" ".join(facts["free_coordinates"]) or "-"),
        f"vertices: {len(verts)}",
    ]
    if args.extremal:
        facts["extremal"] = [[[s.names[i], _q(v)] for i, v in enumerate(st.values)] for st in verts]
        lines += [" ".join(f"{n}={v}" for n, v in vert) for vert in facts["extremal"]]
    return facts, lines


def cmd_refine(args, loader):
    s = loader.structure(args.structure)
    try:
        ids = [s.element(x) for x in (args.a1, args.a2, args.b1, args.b2)]
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    m = rdp_refine(s, *ids)
    names = dict(zip(("c11", "c12", "c21", "c22"), (s.names[c] for c in m.as_tuple())))
    return names, [f"{k}: {v}" for k, v in names.items()]


def cmd_check_unique(args, loader):
    x = _load_observable(loader, args.first)
    y = _load_observable(loader, args.second)
    res = uniqueness_oracle(x, y)
    if res:
        return {"agree": True}, ["agree: true"]
    facts = {"agree": False, "witness": str(res.witness)}
    raise Failure("disagree", facts, ["agree: false", f"witness: {facts['witness']}"])


def cmd_jauch_piron(args, loader):
    x = _load_observable(loader, args.observable)
    ok = jauch_piron_check(x)
    if not ok:
        raise Failure("jauch-piron", {"jauch_piron": False}, ["jauch-piron: false"])
    return {"jauch_piron": True}, ["jauch-piron: true"]


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qobs", description="Observables on finite quantum structures.")
    p.add_argument("--json", action="store_true", help="print a JSON report")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print a JSON report")
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "validate any document")
    sp.add_argument("path")
    sp = add("build", cmd_build, "reconstruct an observable from a spectral family")
    sp.add_argument("--family", required=True)
    sp.add_argument("-o", "--output")
    sp = add("eval", cmd_eval, "evaluate an observable on an interval set")
    sp.add_argument("observable")
    sp.add_argument("--set", required=True, dest="set")
    sp = add("spectrum", cmd_spectrum, "spectrum of an observable")
    sp.add_argument("observable")
    sp = add("range", cmd_range, "range of an observable")
    sp.add_argument("observable")
    sp = add("exp", cmd_exp, "distribution, mean and moments")
    sp.add_argument("observable")
    sp.add_argument("--state")
    sp.add_argument("--rho")
    sp.add_argument("--moment", type=int)
    sp.add_argument("--f", help="function table on the spectrum, e.g. '1:1,2:4'")
    sp = add("blocks", cmd_blocks, "maximal compatible subsets")
    sp.add_argument("structure")
    sp = add("sharp", cmd_sharp, "sharp elements")
    sp.add_argument("structure")
    sp = add("states", cmd_states, "the state polytope")
    sp.add_argument("structure")
    sp.add_argument("--extremal", action="store_true")
    sp = add("refine", cmd_refine, "Riesz refinement of a1+a2 = b1+b2")
    sp.add_argument("structure")
    for name in ("a1", "a2", "b1", "b2"):
        sp.add_argument(name)
    sp = add("check-unique", cmd_check_unique, "compare two observables exhaustively")
    sp.add_argument("first")
    sp.add_argument("second")
    sp = add("jauch-piron", cmd_jauch_piron, "check the Jauch-Piron property")
    sp.add_argument("observable")
    return p


def _render(status, facts, lines, as_json):
    if as_json:
        obj = {"status": status.split()[0]}
        if status.startswith("FAIL"):
            obj["reason"] = status.split(maxsplit=1)[1]
        obj.update(facts)
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"
    return "\n".join([status, *lines]) + "\n"


def run(argv=None) -> tuple[int, str]:
    """Execute a command line; returns ``(exit code, report text)``."""
    parser = build_parser()
    as_json = "--json" in (argv if argv is not None else sys.argv[1:])
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("no command given")
    except UsageError as exc:
        return EXIT_USAGE, _render("FAIL usage", {"message": str(exc)}, [str(exc)], as_json)
    loader = Loader()
    try:
        facts, lines = args.func(args, loader)
    except UsageError as exc:
        return EXIT_USAGE, _render("FAIL usage", {"message": str(exc)}, [str(exc)], as_json)
    except DocumentError as exc:
        facts = {"line": exc.line, "message": str(exc)}
        return EXIT_PARSE, _render("FAIL parse", facts, [str(exc)], as_json)
    except IntervalSyntaxError as exc:
        facts = {"position": exc.position, "message": str(exc)}
        return EXIT_PARSE, _render("FAIL syntax", facts, [str(exc)], as_json)
    except OSError as exc:
        return EXIT_PARSE, _render("FAIL io", {"message": str(exc)}, [str(exc)], as_json)
    except Failure as exc:
        return EXIT_FAIL, _render(f"FAIL {exc.code}", exc.facts, exc.lines, as_json)
    except QobsError as exc:
        return EXIT_FAIL, _render(f"FAIL {exc.code}", {"message": str(exc)}, [str(exc)], as_json)
    return EXIT_OK, _render("OK", facts, lines, as_json)


def main(argv=None) -> int:
    code, text = run(argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
