"""Structured-text documents and the workspace that resolves them by name.

Every document is a JSON object with a ``kind`` and a ``name``; other
documents are referenced by name.  The accepted fields of each kind are
listed in ``SCHEMAS`` and described in docs/format.md.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from . import lie, pbg
from . import xmod as xm_
from .algebra import FiniteGroup, GroupHom, GroupXMod, standard_group
from .errors import SchemaError, UnknownReference, XModKitError
from .site import CechComplex, CentralCochain, NAMED_NERVES, Nerve, PrincipalAtlas

# kind -> (required fields, optional fields, reference fields)
SCHEMAS: dict[str, tuple[set[str], set[str], set[str]]] = {
    "group": (set(), {"elements", "table", "identity", "standard"}, set()),
    "nerve": (set(), {"points", "charts", "named"}, set()),
    "group-xmod": ({"h", "d", "boundary", "action"}, set(), {"h", "d"}),
    "transition-data": ({"nerve", "group", "h", "phi", "sheets"}, set(), {"nerve", "group", "h"}),
    "pbg-xmod": ({"xmod", "data", "phihat"}, set(), {"xmod", "data"}),
    "lifting-instance": ({"xmod", "nerve", "s", "shat"}, set(), {"xmod", "nerve"}),
    "extension": ({"objects", "group", "kernel"}, set(), {"group"}),
    "cochain": ({"nerve", "group", "degree", "values"}, {"elements"}, {"nerve", "group"}),
    "lie-algebra": ({"basis", "brackets"}, set(), set()),
}


def canonical(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def digest(doc: Any) -> str:
    return hashlib.sha256(canonical(doc).encode()).hexdigest()


def check_schema(doc: Any, where: str = "") -> None:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: a document must be an object")
    kind, name = doc.get("kind"), doc.get("name")
    if kind not in SCHEMAS:
        raise SchemaError(f"{where}: unknown document kind {kind!r}")
    if not isinstance(name, str) or not name:
        raise SchemaError(f"{where}: document needs a non-empty string 'name'")
    req, opt, refs = SCHEMAS[kind]
    have = set(doc) - {"kind", "name", "note"}
    missing = req - have
    if missing:
        raise SchemaError(f"{where}: {kind} document {name!r} lacks {sorted(missing)}")
    extra = have - req - opt
    if extra:
        raise SchemaError(f"{where}: {kind} document {name!r} has unknown fields {sorted(extra)}")
    for r in refs:
        if not isinstance(doc[r], str):
            raise SchemaError(f"{where}: field {r!r} of {name!r} must be a document name")
    if kind == "group" and "standard" not in doc and not {"elements", "table", "identity"} <= have:
        raise SchemaError(f"{where}: group {name!r} needs 'standard' or 'elements', 'table' and 'identity'")
    if kind == "nerve" and "named" not in doc and not {"points", "charts"} <= have:
        raise SchemaError(f"{where}: nerve {name!r} needs 'named' or 'points' and 'charts'")


# --- encoders ------------------------------------------------------------------------------

def edge_key(nerve: Nerve, e: tuple[int, ...]) -> str:
    return "-".join(nerve.labels[i] for i in e)


def parse_edge(nerve: Nerve, key: str, where: str) -> tuple[int, ...]:
    pos = {lab: i for i, lab in enumerate(nerve.labels)}
    try:
        return tuple(pos[p] for p in key.split("-"))
    except KeyError as exc:
        raise UnknownReference(f"{where}: chart {exc} is not in nerve {nerve.name!r}") from None


def group_doc(g: FiniteGroup, name: str) -> dict:
    return {"kind": "group", "name": name, "elements": list(g.elements), "table": g.table_rows(),
            "identity": g.identity}


def nerve_doc(n: Nerve, name: str) -> dict:
    return {"kind": "nerve", "name": name, **n.to_doc()}


def group_xmod_doc(x: GroupXMod, name: str, h: str, d: str) -> dict:
    return {"kind": "group-xmod", "name": name, "h": h, "d": d,
            "boundary": dict(x.boundary.map), "action": {a: dict(f.map) for a, f in x.action.items()}}


def data_doc(td: pbg.TransitionData, name: str, nerve: str, group: str, h: str) -> dict:
    body = td.to_doc()
    return {"kind": "transition-data", "name": name, "nerve": nerve, "group": group, "h": h,
            "phi": body["phi"], "sheets": body["sheets"]}


def lie_doc(a: lie.LieAlgebra, name: str) -> dict:
    br = {}
    for i in range(a.dim):
        for j in range(i + 1, a.dim):
            v = {a.basis[k]: str(c) for k, c in enumerate(a.c[i][j]) if c}
            if v:
                br[f"{a.basis[i]},{a.basis[j]}"] = v
    return {"kind": "lie-algebra", "name": name, "basis": list(a.basis), "brackets": br}


# --- the workspace -------------------------------------------------------------------------

@dataclass
class Workspace:
    docs: dict[str, dict] = field(default_factory=dict)
    where: dict[str, str] = field(default_factory=dict)
    _cache: dict[str, Any] = field(default_factory=dict)
    _stack: list[str] = field(default_factory=list)

    @classmethod
    def load(cls, path: str) -> "Workspace":
        ws = cls()
        if not os.path.isdir(path):
            raise SchemaError(f"workspace {path!r} is not a directory")
        for fn in sorted(os.listdir(path)):
            if not fn.endswith(".json"):
                continue
            full = os.path.join(path, fn)
            try:
                with open(full, encoding="utf-8") as fh:
                    blob = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{fn}:{exc.lineno}: {exc.msg}") from None
            items = blob.get("documents") if isinstance(blob, dict) and "documents" in blob else [blob]
            if not isinstance(items, list):
                raise SchemaError(f"{fn}: 'documents' must be a list")
            for k, d in enumerate(items):
                ws.add(d, f"{fn}#{k}" if len(items) > 1 else fn)
        return ws

    def add(self, doc: dict, where: str = "<memory>") -> None:
        check_schema(doc, where)
        if doc["name"] in self.docs:
            raise SchemaError(f"{where}: duplicate document name {doc['name']!r} (first in {self.where[doc['name']]})")
        self.docs[doc["name"]] = doc
        self.where[doc["name"]] = where
        self._cache.clear()

    def save(self, path: str) -> None:
        os.makedirs(path, exist_ok=True)
        for name, doc in sorted(self.docs.items()):
            with open(os.path.join(path, safe_filename(name) + ".json"), "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True, ensure_ascii=False)
                fh.write("\n")

    def doc(self, name: str, kind: str | None = None, referrer: str = "") -> dict:
        if name not in self.docs:
            at = f" (referenced from {referrer})" if referrer else ""
            raise UnknownReference(f"unknown document {name!r}{at}")
        d = self.docs[name]
        if kind and d["kind"] != kind:
            raise SchemaError(f"{self.where[name]}: {name!r} is a {d['kind']}, expected {kind}")
        return d

    def get(self, name: str, kind: str | None = None, referrer: str = "") -> Any:
        """The parsed object for a document; references are resolved recursively."""
        d = self.doc(name, kind, referrer)
        if name in self._cache:
            return self._cache[name]
        if name in self._stack:
            raise SchemaError(f"reference cycle: {' -> '.join(self._stack + [name])}")
        self._stack.append(name)
        try:
            obj = self._parse(d)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"{self.where[name]}: malformed {d['kind']} document {name!r}: {exc}") from None
        except XModKitError as exc:
            if isinstance(exc, (SchemaError, UnknownReference)) or str(exc).startswith(self.where[name]):
                raise
            raise type(exc)(f"{self.where[name]}: {exc}", witness=exc.witness) from None
        finally:
            self._stack.pop()
        self._cache[name] = obj
        return obj

    def digest(self, name: str) -> str:
        """Hash of a document together with everything it references."""
        d = self.doc(name)
        refs = SCHEMAS[d["kind"]][2]
        return digest({"doc": d, "refs": {r: self.digest(d[r]) for r in sorted(refs)}})

    def _ref(self, d: dict, field_: str, kind: str) -> Any:
        return self.get(d[field_], kind, referrer=f"{self.where[d['name']]} field {field_!r}")

    def _parse(self, d: dict) -> Any:
        kind = d["kind"]
        if kind == "group":
            if "standard" in d:
                g = standard_group(str(d["standard"]))
                g.name = d["name"]
                return g
            return FiniteGroup([str(e) for e in d["elements"]], [[str(v) for v in row] for row in d["table"]],
                               str(d["identity"]), name=d["name"])
        if kind == "nerve":
            if "named" in d:
                if d["named"] not in NAMED_NERVES:
                    raise UnknownReference(f"no named nerve {d['named']!r}")
                return NAMED_NERVES[d["named"]]()
            return Nerve.from_doc(d, name=d["name"])
        if kind == "group-xmod":
            h, dd = self._ref(d, "h", "group"), self._ref(d, "d", "group")
            bd = GroupHom(h, dd, {str(a): str(b) for a, b in d["boundary"].items()})
            act = {str(a): GroupHom(h, h, {str(x): str(y) for x, y in m.items()}) for a, m in d["action"].items()}
            for a in (*bd.map.keys(), *bd.map.values()):
                (h if a in bd.map else dd).check(a)
            return GroupXMod(h, dd, bd, act, name=d["name"])
        if kind == "transition-data":
            nerve, G, h = self._ref(d, "nerve", "nerve"), self._ref(d, "group", "group"), self._ref(d, "h", "group")
            td = pbg.TransitionData.from_doc({"phi": d["phi"], "sheets": d["sheets"]}, PrincipalAtlas(nerve, G), h)
            td.name = d["name"]
            return td
        if kind == "pbg-xmod":
            x = self._ref(d, "xmod", "group-xmod")
            td = self._ref(d, "data", "transition-data")
            phihat = pbg.RepFamily.from_doc(d["phihat"], td.atlas.group, x.h)
            return x, td, phihat
        if kind == "lifting-instance":
            x = self._ref(d, "xmod", "group-xmod")
            nerve = self._ref(d, "nerve", "nerve")
            w = self.where[d["name"]]
            s = {parse_edge(nerve, k, w): x.d.check(str(v)) for k, v in d["s"].items()}
            shat = {parse_edge(nerve, k, w): x.h.check(str(v)) for k, v in d["shat"].items()}
            return x, nerve, xm_.TransitionCocycleWithLift(s, shat)
        if kind == "extension":
            e = self._ref(d, "group", "group")
            return xm_.extension_from_vertex_group([str(o) for o in d["objects"]], e,
                                                   [e.check(str(k)) for k in d["kernel"]])
        if kind == "cochain":
            nerve, g = self._ref(d, "nerve", "nerve"), self._ref(d, "group", "group")
            cx = CechComplex(nerve, g, d.get("elements"))
            w = self.where[d["name"]]
            vals = {parse_edge(nerve, k, w): str(v) for k, v in d["values"].items()}
            return CentralCochain(cx, int(d["degree"]), vals)
        if kind == "lie-algebra":
            items = []
            for key, v in d["brackets"].items():
                a, b = key.split(",")
                items.append((a.strip(), b.strip(), {k: Fraction(str(c)) for k, c in v.items()}))
            return lie.LieAlgebra(d["basis"], items, name=d["name"])
        raise SchemaError(f"unhandled kind {kind}")


def safe_filename(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)
