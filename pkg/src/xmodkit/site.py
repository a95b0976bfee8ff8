"""Finite covers, nerves and Čech cochains with finite abelian coefficients.

A cochain is constant on each overlap U_σ; the overlap is one component
whatever its point count.  Coefficients may form a local system: an
automorphism ``transport[(i, j)]`` (i < j) carries values from chart j's
trivialisation to chart i's, and the coboundary twists its first term by it.
For an equivariant cochain on P = M x G, values on the sheet U_σ x {e} are
stored and the sheet U_σ x {g} is read through ``phi[i](g)`` of the first
chart of σ.
"""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from . import linalg as la
from .algebra import AbelianCoordinates, FiniteGroup, GroupHom
from .errors import AxiomViolation, NotACocycle, SchemaError, UnknownReference

EXHAUSTIVE_LIMIT = 2 ** 16
MAX_SIMPLEX = 4


def _natural_key(s: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", str(s))]


class Nerve:
    """Charts over a finite point set; overlaps are derived, never given."""

    def __init__(self, points: Iterable, charts: Mapping[str, Iterable], name: str = ""):
        self.points = sorted({str(p) for p in points}, key=_natural_key)
        pts = set(self.points)
        self.labels = sorted((str(k) for k in charts), key=_natural_key)
        self.charts = [frozenset(str(p) for p in charts[k] if True) for k in
                       sorted(charts, key=lambda k: _natural_key(str(k)))]
        for lab, ch in zip(self.labels, self.charts):
            if not ch:
                raise SchemaError(f"chart {lab} is empty")
            missing = ch - pts
            if missing:
                raise UnknownReference(f"chart {lab} uses unknown points {sorted(missing)}")
        if set().union(*self.charts) != pts:
            raise SchemaError("charts do not cover the points")
        self.name = name
        n = len(self.charts)
        self.simplices: list[list[tuple[int, ...]]] = []
        self.sets: dict[tuple[int, ...], frozenset] = {}
        for k in range(1, min(n, MAX_SIMPLEX) + 1):
            level = []
            for s in itertools.combinations(range(n), k):
                inter = frozenset.intersection(*(self.charts[i] for i in s))
                if inter:
                    level.append(s)
                    self.sets[s] = inter
            self.simplices.append(level)
        while len(self.simplices) < MAX_SIMPLEX:
            self.simplices.append([])

    def __repr__(self) -> str:
        return f"Nerve({self.name or '?'}, charts={len(self.charts)}, f={self.f_vector()})"

    @property
    def n(self) -> int:
        return len(self.charts)

    def f_vector(self) -> list[int]:
        return [len(s) for s in self.simplices]

    def of_degree(self, k: int) -> list[tuple[int, ...]]:
        return self.simplices[k] if 0 <= k < len(self.simplices) else []

    def has(self, s: tuple[int, ...]) -> bool:
        return tuple(s) in self.sets

    def charts_of(self, point: str) -> list[int]:
        return [i for i, c in enumerate(self.charts) if point in c]

    def check(self) -> None:
        for level in self.simplices:
            for s in level:
                for face in itertools.combinations(s, len(s) - 1):
                    if face and face not in self.sets:
                        raise AxiomViolation("nerve not closed under faces", witness=s)

    def to_doc(self) -> dict:
        return {"points": list(self.points),
                "charts": {lab: sorted(c, key=_natural_key) for lab, c in zip(self.labels, self.charts)}}

    @classmethod
    def from_doc(cls, doc: Mapping, name: str = "") -> "Nerve":
        if "points" not in doc or "charts" not in doc:
            raise SchemaError("nerve document needs 'points' and 'charts'")
        return cls(doc["points"], doc["charts"], name=name or doc.get("name", ""))


# --- named nerves -----------------------------------------------------------------

def single_chart(points: int = 1) -> Nerve:
    pts = [f"p{i}" for i in range(points)]
    return Nerve(pts, {"1": pts}, name="single")


def triangle() -> Nerve:
    """Three charts sharing a common point: a filled 2-simplex."""
    return Nerve(["c", "a", "b", "d"], {"1": ["c", "a", "b"], "2": ["c", "a", "d"], "3": ["c", "b", "d"]},
                 name="triangle")


def circle(k: int = 3) -> Nerve:
    """k >= 3 charts around a circle, one point per overlap."""
    if k < 3:
        raise SchemaError("a circle nerve needs at least 3 charts")
    pts = [f"q{i}" for i in range(k)]
    charts = {str(i + 1): [pts[i - 1], pts[i]] for i in range(k)}
    return Nerve(pts, charts, name=f"circle{k}")


def tetrahedron() -> Nerve:
    """Hollow tetrahedron: all triple overlaps nonempty, the quadruple empty."""
    triples = list(itertools.combinations(range(1, 5), 3))
    pts = ["t" + "".join(map(str, t)) for t in triples]
    charts = {str(i): [p for p, t in zip(pts, triples) if i in t] for i in range(1, 5)}
    return Nerve(pts, charts, name="tetrahedron")


RP2_TRIANGLES = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
                 (2, 3, 5), (2, 4, 5), (2, 4, 6), (3, 4, 6), (3, 5, 6)]


def rp2() -> Nerve:
    """Six charts whose nerve is the 6-vertex triangulation of RP^2."""
    pts = ["r" + "".join(map(str, t)) for t in RP2_TRIANGLES]
    charts = {str(i): [p for p, t in zip(pts, RP2_TRIANGLES) if i in t] for i in range(1, 7)}
    return Nerve(pts, charts, name="rp2")


def path(k: int = 2) -> Nerve:
    """k charts in a row; contractible."""
    pts = [f"s{i}" for i in range(2 * k - 1)]
    charts = {str(i + 1): pts[2 * i:2 * i + 3] if i < k - 1 else pts[2 * i:2 * i + 1] for i in range(k)}
    return Nerve(pts, charts, name=f"path{k}")


NAMED_NERVES: dict[str, Callable[[], Nerve]] = {
    "single": single_chart, "triangle": triangle, "circle3": lambda: circle(3),
    "circle4": lambda: circle(4), "tetrahedron": tetrahedron, "rp2": rp2,
    "path2": lambda: path(2), "path3": lambda: path(3),
}


# --- principal atlases ------------------------------------------------------------

@dataclass
class PrincipalAtlas:
    """P = M x G with the right action (m, g).h = (m, gh) and charts U_i x G."""
    nerve: Nerve
    group: FiniteGroup
    basepoint: str = ""
    chart_basepoints: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.basepoint:
            self.basepoint = self.nerve.points[0]
        if not self.chart_basepoints:
            self.chart_basepoints = [min(c, key=_natural_key) for c in self.nerve.charts]
        for i, b in enumerate(self.chart_basepoints):
            if b not in self.nerve.charts[i]:
                raise AxiomViolation(f"chart basepoint {b} not in chart {self.nerve.labels[i]}")

    @property
    def points(self) -> list[tuple[str, str]]:
        return [(m, g) for m in self.nerve.points for g in self.group.elements]

    def act(self, u: tuple[str, str], g: str) -> tuple[str, str]:
        return (u[0], self.group.mul(u[1], g))

    def chart_points(self, i: int) -> list[tuple[str, str]]:
        return [(m, g) for m in sorted(self.nerve.charts[i], key=_natural_key) for g in self.group.elements]

    def orbit(self, u: tuple[str, str]) -> list[tuple[str, str]]:
        return [self.act(u, g) for g in self.group.elements]

    @staticmethod
    def label(u: tuple[str, str]) -> str:
        return f"{u[0]}@{u[1]}"

    @staticmethod
    def parse(label: str) -> tuple[str, str]:
        if "@" not in label:
            raise SchemaError(f"point label {label!r} is not of the form m@g")
        m, g = label.rsplit("@", 1)
        return (m, g)


# --- the Čech complex -----------------------------------------------------------------

class CechComplex:
    """C^k(N; A) for an abelian subgroup A of an ambient group, with an
    optional local system of automorphisms on the edges."""

    def __init__(self, nerve: Nerve, ambient: FiniteGroup, elements: Iterable[str] | None = None,
                 transport: Mapping[tuple[int, int], Mapping[str, str]] | None = None):
        self.nerve = nerve
        self.ambient = ambient
        self.coords = AbelianCoordinates(ambient, elements)
        self.elements = self.coords.elements
        self.orders = self.coords.orders
        self.zero = ambient.identity
        self.transport: dict[tuple[int, int], dict[str, str]] = {}
        elset = set(self.elements)
        for key, m in (transport or {}).items():
            i, j = key
            mm = {x: m[x] for x in self.elements}
            if set(mm.values()) != elset or any(
                    mm[ambient.mul(a, b)] != ambient.mul(mm[a], mm[b]) for a in self.elements for b in self.elements):
                raise AxiomViolation(f"transport on edge {key} is not an automorphism of the coefficients")
            if i < j:
                self.transport[(i, j)] = mm
            else:
                self.transport[(j, i)] = {v: k for k, v in mm.items()}
        # local system must be flat on triangles
        for s in nerve.of_degree(2):
            i, j, k = s
            for x in self.elements:
                if self.move(i, j, self.move(j, k, x)) != self.move(i, k, x):
                    raise AxiomViolation("local system is not flat", witness=s)
        self._mats: dict[int, list[list[int]]] = {}

    def move(self, i: int, j: int, x: str) -> str:
        """Transport a value from chart j's frame to chart i's frame."""
        if i == j:
            return x
        if i < j:
            t = self.transport.get((i, j))
            return t[x] if t else x
        t = self.transport.get((j, i))
        if not t:
            return x
        for a, b in t.items():
            if b == x:
                return a
        raise AxiomViolation("transport not invertible")

    # cochains
    def cochain(self, degree: int, values: Mapping | None = None) -> "CentralCochain":
        return CentralCochain(self, degree, dict(values or {}))

    def zero_cochain(self, degree: int) -> "CentralCochain":
        return self.cochain(degree, {s: self.zero for s in self.nerve.of_degree(degree)})

    def size(self, degree: int) -> int:
        return len(self.elements) ** len(self.nerve.of_degree(degree))

    def all_cochains(self, degree: int):
        simp = self.nerve.of_degree(degree)
        for vals in itertools.product(self.elements, repeat=len(simp)):
            yield self.cochain(degree, dict(zip(simp, vals)))

    def random_cochain(self, degree: int, rng: random.Random) -> "CentralCochain":
        return self.cochain(degree, {s: rng.choice(self.elements) for s in self.nerve.of_degree(degree)})

    def coboundary(self, c: "CentralCochain") -> "CentralCochain":
        g = self.ambient
        out = {}
        for s in self.nerve.of_degree(c.degree + 1):
            acc = self.zero
            for t in range(len(s)):
                face = s[:t] + s[t + 1:]
                v = c[face]
                if t == 0:
                    v = self.move(s[0], s[1], v)
                if t % 2:
                    v = g.inv(v)
                acc = g.mul(acc, v)
            out[s] = acc
        return self.cochain(c.degree + 1, out)

    # integer presentation
    def _flat(self, c: "CentralCochain") -> list[int]:
        return [x for s in self.nerve.of_degree(c.degree) for x in self.coords.coords(c[s])]

    def _unflat(self, degree: int, v: Sequence[int]) -> "CentralCochain":
        r = len(self.orders)
        simp = self.nerve.of_degree(degree)
        return self.cochain(degree, {s: self.coords.element(v[t * r:(t + 1) * r]) for t, s in enumerate(simp)})

    def _move_matrix(self, i: int, j: int) -> list[list[int]]:
        r = len(self.orders)
        cols = []
        for b, (elem, _) in enumerate(self.coords.basis):
            cols.append(list(self.coords.coords(self.move(i, j, elem))))
        return [[cols[b][a] for b in range(r)] for a in range(r)]

    def integer_matrix(self, degree: int) -> list[list[int]]:
        """Integer matrix of δ: C^degree -> C^(degree+1) in coordinates."""
        if degree in self._mats:
            return self._mats[degree]
        r = len(self.orders)
        src = {s: t for t, s in enumerate(self.nerve.of_degree(degree))}
        dst = self.nerve.of_degree(degree + 1)
        mat = [[0] * (len(src) * r) for _ in range(len(dst) * r)]
        for row, s in enumerate(dst):
            for t in range(len(s)):
                face = s[:t] + s[t + 1:]
                sign = -1 if t % 2 else 1
                col = src[face]
                block = self._move_matrix(s[0], s[1]) if t == 0 else \
                    [[int(a == b) for b in range(r)] for a in range(r)]
                for a in range(r):
                    for b in range(r):
                        if block[a][b]:
                            mat[row * r + a][col * r + b] += sign * block[a][b]
        self._mats[degree] = mat
        return mat

    def _moduli(self, degree: int) -> list[int]:
        return list(self.orders) * len(self.nerve.of_degree(degree))

    def image_order(self, degree: int) -> int:
        """|δ(C^degree)| inside C^(degree+1)."""
        mods = self._moduli(degree + 1)
        if not mods:
            return 1
        if not self._moduli(degree):
            return 1
        m = self.integer_matrix(degree)
        full = [row + [mods[i] if j == i else 0 for j in range(len(mods))] for i, row in enumerate(m)]
        total = 1
        for x in mods:
            total *= x
        coker = 1
        for d in la.smith_diagonal(full):
            coker *= d
        return total // coker

    def kernel_order(self, degree: int) -> int:
        return self.size(degree) // self.image_order(degree)

    def h_order(self, degree: int, method: str = "auto") -> int:
        if method == "exhaustive" or (method == "auto" and self._small(degree)):
            return self.h_order_exhaustive(degree)
        return self.kernel_order(degree) // (self.image_order(degree - 1) if degree > 0 else 1)

    def _small(self, degree: int) -> bool:
        return self.size(degree) <= EXHAUSTIVE_LIMIT and (degree == 0 or self.size(degree - 1) <= EXHAUSTIVE_LIMIT)

    def h_order_exhaustive(self, degree: int) -> int:
        z = sum(1 for c in self.all_cochains(degree) if self.coboundary(c).is_zero())
        if degree == 0:
            return z
        b = {self.coboundary(c).key() for c in self.all_cochains(degree - 1)}
        return z // len(b)

    def primitive(self, c: "CentralCochain", method: str = "auto") -> "CentralCochain | None":
        """Some r with δr = c, or None."""
        k = c.degree
        if k == 0:
            return None if not c.is_zero() else self.zero_cochain(-1)
        if method == "exhaustive" or (method == "auto" and self.size(k - 1) <= EXHAUSTIVE_LIMIT):
            target = c.key()
            for r in self.all_cochains(k - 1):
                if self.coboundary(r).key() == target:
                    return r
            return None
        m = self.integer_matrix(k - 1)
        mods = self._moduli(k)
        cols = len(self._moduli(k - 1))
        if not mods:
            return self.zero_cochain(k - 1)
        full = [row + [mods[i] if j == i else 0 for j in range(len(mods))] for i, row in enumerate(m)]
        x = la.solve_integer(full, self._flat(c), cols + len(mods))
        if x is None:
            return None
        r = self._unflat(k - 1, x[:cols])
        if self.coboundary(r).key() != c.key():
            raise AxiomViolation("integer solve returned a non-solution")
        return r

    def classes_equal(self, a: "CentralCochain", b: "CentralCochain", method: str = "auto"):
        """(equal, witness r with a - b = δr)."""
        if a.degree != b.degree or a.complex is not b.complex and a.complex.nerve is not b.complex.nerve:
            raise AxiomViolation("cochains live in different complexes")
        for c in (a, b):
            if not self.coboundary(c).is_zero():
                bad = next(s for s, v in self.coboundary(c).values.items() if v != self.zero)
                raise NotACocycle("not a cocycle", witness=bad)
        r = self.primitive(a - b, method=method)
        return (r is not None), r


@dataclass
class CentralCochain:
    complex: CechComplex
    degree: int
    values: dict[tuple[int, ...], str]
    phi: Mapping[int, Callable[[str], GroupHom]] | None = None

    def __post_init__(self):
        if self.degree < 0:
            return
        cx = self.complex
        allowed = set(cx.nerve.of_degree(self.degree))
        for s, v in list(self.values.items()):
            s2 = tuple(s)
            if s2 not in allowed:
                raise AxiomViolation(f"{s} is not a {self.degree}-simplex of the nerve")
            if v not in cx.coords._coord:
                raise AxiomViolation(f"value {v} not in the coefficient group", witness=s)
        for s in allowed:
            self.values.setdefault(s, cx.zero)

    def __getitem__(self, s) -> str:
        return self.values[tuple(s)]

    def value_at(self, s, g: str) -> str:
        """Equivariant read-out on the sheet U_s x {g}."""
        v = self[s]
        if self.phi is None:
            return v
        return self.phi[s[0]](g)(v)

    def key(self) -> tuple[str, ...]:
        return tuple(self.values[s] for s in self.complex.nerve.of_degree(self.degree))

    def is_zero(self) -> bool:
        return all(v == self.complex.zero for v in self.values.values())

    def __sub__(self, other: "CentralCochain") -> "CentralCochain":
        g = self.complex.ambient
        return CentralCochain(self.complex, self.degree,
                              {s: g.mul(v, g.inv(other[s])) for s, v in self.values.items()})

    def __add__(self, other: "CentralCochain") -> "CentralCochain":
        g = self.complex.ambient
        return CentralCochain(self.complex, self.degree, {s: g.mul(v, other[s]) for s, v in self.values.items()})

    def to_doc(self) -> dict:
        labels = self.complex.nerve.labels
        return {"degree": self.degree,
                "values": {"-".join(labels[i] for i in s): v for s, v in sorted(self.values.items())}}


def coboundary(c: CentralCochain) -> CentralCochain:
    return c.complex.coboundary(c)


def classes_equal(a: CentralCochain, b: CentralCochain, method: str = "auto"):
    return a.complex.classes_equal(a, b, method=method)


def h_group_order(nerve: Nerve, ambient: FiniteGroup, degree: int, elements: Iterable[str] | None = None,
                  transport=None, method: str = "auto") -> int:
    """|Z^k/B^k|.  Equivariant cochains on P = M x G stored on the identity
    sheet give the same count as the plain nerve complex."""
    return CechComplex(nerve, ambient, elements, transport).h_order(degree, method=method)
