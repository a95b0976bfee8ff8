"""Command-line front end.

    xmodkit <verb> [names...] [--workspace DIR] [--convention paper|standard]
                   [--seed N] [--max-size N] [--emit json|text]

Exit status: 0 when the verdict passes, 1 when it fails (for instance a
nonzero obstruction class), 2 on malformed input or an unknown reference.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Callable

from . import corpus, lie, pbg, site
from . import documents as dm
from . import xmod as xm_
from .errors import (ObstructionNonzero, SchemaError, UnknownElement, UnknownReference,
                     XModKitError)

INPUT_ERRORS = (SchemaError, UnknownReference, UnknownElement)


class Report(dict):
    """verb, inputs (content hashes), verdict, pass flag, details and witnesses."""

    @classmethod
    def make(cls, verb: str, inputs: dict[str, str], verdict: str, ok: bool, **details: Any) -> "Report":
        return cls(verb=verb, inputs=inputs, verdict=verdict, ok=ok, details=details)

    def text(self) -> str:
        lines = [f"{self['verb']}: {self['verdict']} [{'PASS' if self['ok'] else 'FAIL'}]"]
        for k, v in self["details"].items():
            lines.append(f"  {k}: {v if not isinstance(v, (dict, list)) else json.dumps(v, sort_keys=True)}")
        for name, h in self["inputs"].items():
            lines.append(f"  input {name} sha256:{h[:16]}")
        return "\n".join(lines)


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {("-".join(map(str, k)) if isinstance(k, tuple) else str(k)): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    return str(v)


# --- verb handlers ---------------------------------------------------------------------

def _inputs(ws: dm.Workspace, *names: str) -> dict[str, str]:
    return {n: ws.digest(n) for n in names}


def _pbg_xmod(ws: dm.Workspace, name: str) -> pbg.PBGXMod:
    x, td, phihat = ws.get(name, "pbg-xmod")
    return pbg.build_pbg_xmod(x, td, phihat, name=name)


def _lifting_groupoid(x, nerve, tc) -> tuple[xm_.GroupoidXMod, xm_.TransitionCocycleWithLift]:
    gx = xm_.xmod_over(nerve.points, x)
    x0 = nerve.points[0]
    return gx, xm_.TransitionCocycleWithLift({k: f"{x0}:{v}:{x0}" for k, v in tc.s.items()}, tc.shat)


def do_validate(ws, args) -> Report:
    name = args.names[0]
    d = ws.doc(name)
    obj = ws.get(name)
    kind = d["kind"]
    problems: list = []
    extra: dict = {}
    if kind == "group-xmod":
        problems = obj.violations()
        extra = {"pair": obj.is_pair(), "coupling": obj.is_coupling(), "kernel_order": len(obj.kernel)}
    elif kind == "transition-data":
        cond, wit = obj.check_conditions()
        problems = [(k, wit.get(k)) for k, v in cond.items() if not v]
        extra = {"conditions": cond}
    elif kind == "pbg-xmod":
        rep = pbg.validate_pbg_xmod(_pbg_xmod(ws, name))
        problems = [k for k, v in rep.conditions.items() if not v]
        extra = {"conditions": rep.conditions}
    elif kind == "lifting-instance":
        x, nerve, tc = obj
        try:
            tc.check(x, nerve)
        except XModKitError as exc:
            problems = [(type(exc).__name__, str(exc))]
        gx = xm_.xmod_over(nerve.points, x)
        rep = xm_.validate_xmod(gx)
        problems += [k for k, v in rep.conditions.items() if not v]
        extra = {"pair": rep.pair, "coupling": rep.coupling}
    elif kind == "extension":
        from .groupoid import validate_extension
        rep = validate_extension(obj)
        problems = [k for k, v in rep.conditions.items() if not v]
    elif kind == "nerve":
        obj.check()
        extra = {"f_vector": obj.f_vector}
    elif kind == "cochain":
        extra = {"cocycle": obj.complex.coboundary(obj).is_zero()}
    ok = not problems
    return Report.make("validate", _inputs(ws, name), "valid" if ok else "invalid", ok,
                       kind=kind, problems=_jsonable(problems), **_jsonable(extra))


def do_obstruction(ws, args) -> Report:
    name = args.names[0]
    kind = ws.doc(name)["kind"]
    if kind == "lifting-instance":
        x, nerve, tc = ws.get(name)
        ob = xm_.lifting_obstruction(x, nerve, tc, convention=args.convention)
        return Report.make("obstruction", _inputs(ws, name), "class = 0" if ob.vanishes else "class ≠ 0",
                           ob.vanishes, convention=args.convention, cochain=_jsonable(ob.cochain.values),
                           closed=ob.closed, conventions_agree=ob.conventions_agree)
    if kind == "pbg-xmod":
        ld = pbg.lift_data(_pbg_xmod(ws, name))
        ob = pbg.equivariant_obstruction(ld)
        return Report.make("obstruction", _inputs(ws, name), "class = 0" if ob.vanishes else "class ≠ 0",
                           ob.vanishes, identity_sheet=_jsonable(ob.identity_sheet.values),
                           closed=ob.closed, conventions_agree=ob.conventions_agree, equivariant=ob.equivariant)
    raise SchemaError(f"obstruction needs a lifting-instance or pbg-xmod, got {kind}")


def do_extend(ws, args) -> Report:
    name = args.names[0]
    kind = ws.doc(name)["kind"]
    try:
        if kind == "lifting-instance":
            x, nerve, tc = ws.get(name)
            gx, vtc = _lifting_groupoid(x, nerve, tc)
            oe = xm_.opext_from_vanishing(gx, nerve, vtc)
            rep = xm_.validate_opext(oe)
            return Report.make("extend", _inputs(ws, name), "extension built", rep.valid,
                               arrows=len(oe.total), conditions=rep.conditions,
                               corrected_lifts=_jsonable(oe.shat))
        if kind == "pbg-xmod":
            oe = pbg.operator_extension(pbg.lift_data(_pbg_xmod(ws, name)))
            rep = pbg.validate_opext(oe)
            return Report.make("extend", _inputs(ws, name), "extension built", rep.valid,
                               arrows=len(oe.upsilon.groupoid), conditions=rep.conditions,
                               corrected_lifts=_jsonable(oe.lifts))
    except ObstructionNonzero:
        return Report.make("extend", _inputs(ws, name), "no extension: class ≠ 0", False)
    raise SchemaError(f"extend needs a lifting-instance or pbg-xmod, got {kind}")


def do_act(ws, args) -> Report:
    if len(args.names) < 2:
        raise SchemaError("act needs an instance and a cochain document")
    name, cname = args.names[:2]
    kind = ws.doc(name)["kind"]
    f = ws.get(cname, "cochain")
    if kind == "lifting-instance":
        x, nerve, tc = ws.get(name)
        gx, vtc = _lifting_groupoid(x, nerve, tc)
        e1 = xm_.opext_from_vanishing(gx, nerve, vtc)
        e2 = xm_.h1_action(e1, f)
        eq = xm_.opext_equivalent(e1, e2)
        cobound = f.complex.primitive(f) is not None
        return Report.make("act", _inputs(ws, name, cname),
                           "equivalent" if eq.equivalent else "inequivalent", eq.equivalent == cobound,
                           twist_is_coboundary=cobound, valid=xm_.validate_opext(e2).valid)
    if kind == "pbg-xmod":
        e1 = pbg.operator_extension(pbg.lift_data(_pbg_xmod(ws, name)))
        G = e1.x.atlas.group
        e2 = pbg.h1g_action(e1, {k: {g: f[k] for g in G} for k in e1.lifts})
        eq = pbg.opext_equivalent(e1, e2)
        return Report.make("act", _inputs(ws, name, cname), "equivalent" if eq.equivalent else "inequivalent",
                           pbg.validate_opext(e2).valid)
    raise SchemaError(f"act needs a lifting-instance or pbg-xmod, got {kind}")


def do_glue(ws, args) -> Report:
    name = args.names[0]
    td = ws.get(name, "transition-data")
    g = pbg.glue(td, name=name)
    rep = pbg.validate_pbg(g)
    return Report.make("glue", _inputs(ws, name), "PBG-groupoid" if rep.valid else "invalid", rep.valid,
                       objects=len(g.groupoid.objects), arrows=len(g.groupoid),
                       conditions=rep.conditions)


def do_extract(ws, args) -> Report:
    name = args.names[0]
    td = ws.get(name, "transition-data")
    g = pbg.glue(td, name=name)
    back = pbg.extract_transition_data(g, pbg.canonical_sections(g))
    eq = pbg.data_equivalent(td, back)
    return Report.make("extract", _inputs(ws, name), "equivalent to input" if eq.equivalent else "not equivalent",
                       eq.equivalent, sheets=_jsonable(back.sheets))


def do_equivalent(ws, args) -> Report:
    if len(args.names) < 2:
        raise SchemaError("equivalent needs two transition-data documents")
    a, b = args.names[:2]
    res = pbg.data_equivalent(ws.get(a, "transition-data"), ws.get(b, "transition-data"))
    return Report.make("equivalent", _inputs(ws, a, b), "equivalent" if res.equivalent else "inequivalent",
                       res.equivalent, r=_jsonable(res.r) if res.r else None)


def do_cohomology(ws, args) -> Report:
    if len(args.names) < 2:
        raise SchemaError("cohomology needs a nerve and a group document")
    n, g = args.names[:2]
    nerve, grp = ws.get(n, "nerve"), ws.get(g, "group")
    if not grp.is_abelian():
        raise SchemaError(f"coefficient group {g!r} is not abelian")
    cx = site.CechComplex(nerve, grp)
    orders = [cx.h_order(k) for k in range(3)]
    return Report.make("cohomology", _inputs(ws, n, g), f"|H^0..2| = {orders}", True, orders=orders)


def do_from_extension(ws, args) -> Report:
    name = args.names[0]
    ext = ws.get(name, "extension")
    pg = pbg.pbg_from_groupoid_extension(ext)
    ok = pbg.validate_pbg(pg).valid and pbg.round_trip_isomorphism(ext) is not None
    return Report.make("from-extension", _inputs(ws, name), "round trip isomorphic" if ok else "failed", ok,
                       structure_group=len(pg.atlas.group), arrows=len(pg.groupoid))


def do_corpus(ws, args) -> Report:
    docs = corpus.corpus_documents(args.seed, args.max_size)
    out = dm.Workspace()
    for d in docs.values():
        out.add(d, "corpus")
    kinds: dict[str, int] = {}
    for d in docs.values():
        kinds[d["kind"]] = kinds.get(d["kind"], 0) + 1
    if args.workspace:
        out.save(args.workspace)
        # not *.json, so loading the workspace skips it
        manifest = {"seed": args.seed, "max_size": args.max_size, "content_hash": corpus.content_hash(docs),
                    "documents": {n: dm.digest(d) for n, d in sorted(docs.items())}}
        with open(os.path.join(args.workspace, "MANIFEST"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return Report.make("corpus", {}, f"{len(docs)} documents", True, seed=args.seed,
                       content_hash=corpus.content_hash(docs), kinds=dict(sorted(kinds.items())))


def do_lie_cohomology(ws, args) -> Report:
    name = args.names[0]
    named = {"sl2": lie.sl2, "gl2": lie.gl2, "heisenberg": lie.heisenberg, "abelian2": lambda: lie.abelian(2),
             "filiform4": lie.filiform4}
    if ws is not None and name in ws.docs:
        g, inputs = ws.get(name, "lie-algebra"), _inputs(ws, name)
    elif name in named:
        g, inputs = named[name](), {}
    else:
        raise UnknownReference(f"unknown Lie algebra {name!r}")
    dims = lie.ce_cohomology_dims(g, lie.Module.trivial(g))
    return Report.make("lie-cohomology", inputs, f"dims {dims}", True, dims=dims)


def do_lie_check(ws, args) -> Report:
    laws = lie.law_corpus(args.seed, args.count)
    agree = jacobi = 0
    nonzero = 0
    for d in laws:
        ob = lie.coupling_obstruction(d)
        agree += ob.closed and ob.ad_zero and ob.vanishes == (lie.extension_exists_oracle(d) is not None)
        nonzero += not ob.vanishes
        try:
            jacobi += lie.construct_from_coupling(d).jacobi_ok
        except XModKitError:
            pass
    ok = agree == len(laws) == jacobi
    return Report.make("lie-check", {}, f"{agree}/{len(laws)} agree", ok, jacobi=jacobi, nonzero=nonzero,
                       seed=args.seed)


HANDLERS: dict[str, Callable] = {
    "validate": do_validate, "obstruction": do_obstruction, "extend": do_extend, "act": do_act,
    "glue": do_glue, "extract": do_extract, "equivalent": do_equivalent, "cohomology": do_cohomology,
    "corpus": do_corpus, "from-extension": do_from_extension,
    "lie-cohomology": do_lie_cohomology, "lie-check": do_lie_check,
}
# grouped spellings: `xmod obstruction NAME`, `pbg glue NAME`, ...
GROUPS = {"xmod": {"validate", "obstruction", "extend", "act"},
          "pbg": {"glue", "extract", "equivalent", "obstruction", "extend", "act", "from-extension"}}
NEEDS_WORKSPACE = set(HANDLERS) - {"corpus", "lie-check", "lie-cohomology"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xmodkit", description="Crossed modules, obstructions and operator extensions.")
    p.add_argument("verb", help="one of: " + ", ".join(sorted(HANDLERS)) + " (or 'xmod VERB', 'pbg VERB')")
    p.add_argument("names", nargs="*", help="document names in the workspace")
    p.add_argument("--workspace", default=None, help="directory of JSON documents")
    p.add_argument("--convention", choices=["paper", "standard"], default="paper",
                   help="order of the triple-overlap product for the lifting obstruction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100, help="number of laws for lie-check")
    p.add_argument("--max-size", type=int, default=None, help="cap on |H| and |P| for generated instances")
    p.add_argument("--emit", choices=["json", "text"], default="text")
    return p


def run(argv: list[str]) -> tuple[int, str]:
    parser = build_parser()
    args = parser.parse_args(argv)
    verb = args.verb
    if verb in GROUPS:
        if not args.names or args.names[0] not in GROUPS[verb]:
            return 2, f"error: '{verb}' takes one of {sorted(GROUPS[verb])}"
        verb, args.names = args.names[0], args.names[1:]
    if verb not in HANDLERS:
        return 2, f"error: unknown verb {verb!r}"
    try:
        ws = None
        if verb in NEEDS_WORKSPACE or (verb == "lie-cohomology" and args.workspace):
            if not args.workspace:
                raise SchemaError("--workspace is required for this verb")
            ws = dm.Workspace.load(args.workspace)
        if verb in NEEDS_WORKSPACE - {"corpus"} and not args.names:
            raise SchemaError(f"{verb} needs a document name")
        if verb == "lie-cohomology" and not args.names:
            raise SchemaError("lie-cohomology needs an algebra name")
        rep = HANDLERS[verb](ws, args)
    except INPUT_ERRORS as exc:
        return 2, f"error: {type(exc).__name__}: {exc}"
    except XModKitError as exc:
        rep = Report.make(verb, {}, f"{type(exc).__name__}: {exc}", False,
                          witness=_jsonable(exc.witness))
    body = json.dumps(rep, sort_keys=True, ensure_ascii=False, indent=1) if args.emit == "json" else rep.text()
    return (0 if rep["ok"] else 1), body


def main(argv: list[str] | None = None) -> int:
    code, out = run(sys.argv[1:] if argv is None else argv)
    print(out, file=sys.stderr if code == 2 else sys.stdout)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
