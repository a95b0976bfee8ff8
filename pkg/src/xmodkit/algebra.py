"""Finite groups given by multiplication tables.

Element identifiers are strings, kept in lexicographic order so that every
derived choice (generators, coset representatives, serialisation) is
reproducible.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (AxiomViolation, NotCentral, SizeBoundExceeded, UnknownElement,
                     XModKitError)

DEFAULT_AUT_BOUND = 12


class FiniteGroup:
    """A group presented by its full multiplication table.

    ``table[a][b]`` is the product ``a*b``.  Construction checks closure,
    associativity, the identity and two-sided inverses.
    """

    def __init__(self, elements: Iterable[str], table, identity: str, name: str = "", check: bool = True):
        elems = [str(e) for e in elements]
        if len(set(elems)) != len(elems):
            raise AxiomViolation("duplicate element identifiers")
        order = sorted(elems)
        pos = {e: i for i, e in enumerate(elems)}
        if isinstance(table, Mapping):
            lookup = lambda a, b: str(table[a][b])
        elif callable(table):
            lookup = lambda a, b: str(table(a, b))
        else:
            lookup = lambda a, b: str(table[pos[a]][pos[b]])
        self.elements: tuple[str, ...] = tuple(order)
        self.index: dict[str, int] = {e: i for i, e in enumerate(order)}
        self.name = name
        n = len(order)
        rows = []
        for a in order:
            row = []
            for b in order:
                c = lookup(a, b)
                if c not in self.index:
                    raise AxiomViolation(f"table not closed: {a}*{b} = {c}")
                row.append(self.index[c])
            rows.append(row)
        self._t = rows
        if identity not in self.index:
            raise UnknownElement(identity)
        self.identity = str(identity)
        e = self.index[self.identity]
        self._inv = [0] * n
        if check:
            for i in range(n):
                if rows[e][i] != i or rows[i][e] != i:
                    raise AxiomViolation(f"{identity} is not an identity (fails at {order[i]})")
            for i, j, k in itertools.product(range(n), repeat=3):
                if rows[rows[i][j]][k] != rows[i][rows[j][k]]:
                    raise AxiomViolation(
                        f"associativity fails at ({order[i]}, {order[j]}, {order[k]})")
        for i in range(n):
            inv = [j for j in range(n) if rows[i][j] == e and rows[j][i] == e]
            if not inv:
                raise AxiomViolation(f"{order[i]} has no inverse")
            self._inv[i] = inv[0]

    # --- basic arithmetic ---------------------------------------------------
    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.index

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or '?'}, order={len(self)})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteGroup) and self.elements == other.elements
                and self.identity == other.identity and self._t == other._t)

    def __hash__(self) -> int:
        return hash((self.elements, self.identity))

    def mul(self, a: str, b: str) -> str:
        return self.elements[self._t[self.index[a]][self.index[b]]]

    def prod(self, *xs: str) -> str:
        out = self.identity
        for x in xs:
            out = self.mul(out, x)
        return out

    def inv(self, a: str) -> str:
        return self.elements[self._inv[self.index[a]]]

    def conj(self, h: str, x: str) -> str:
        """h x h^-1."""
        return self.mul(self.mul(h, x), self.inv(h))

    def power(self, a: str, k: int) -> str:
        if k < 0:
            a, k = self.inv(a), -k
        out = self.identity
        for _ in range(k):
            out = self.mul(out, a)
        return out

    def order_of(self, a: str) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def check(self, a: str) -> str:
        if a not in self.index:
            raise UnknownElement(f"{a!r} is not an element of {self.name or 'group'}")
        return a

    def table_rows(self) -> list[list[str]]:
        return [[self.elements[j] for j in row] for row in self._t]

    def is_abelian(self) -> bool:
        n = len(self)
        return all(self._t[i][j] == self._t[j][i] for i in range(n) for j in range(i + 1, n))

    # --- subgroups ------------------------------------------------------------
    def generated(self, gens: Iterable[str]) -> frozenset[str]:
        found = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in found:
                        found.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(found)

    def is_subgroup(self, s: Iterable[str]) -> bool:
        s = set(s)
        return (self.identity in s and all(self.mul(a, b) in s for a in s for b in s)
                and all(self.inv(a) in s for a in s))

    def is_normal(self, s: Iterable[str]) -> bool:
        s = set(s)
        return self.is_subgroup(s) and all(self.conj(g, x) in s for g in self for x in s)

    def generators(self) -> list[str]:
        """A small generating set, chosen greedily in canonical order."""
        gens: list[str] = []
        span = frozenset([self.identity])
        # prefer elements of large order: fewer generators, better pruning
        cands = sorted(self.elements, key=lambda a: (-self.order_of(a), a))
        for a in cands:
            if a not in span:
                gens.append(a)
                span = self.generated(gens)
                if len(span) == len(self):
                    break
        return gens

    def subgroup(self, s: Iterable[str], name: str = "") -> "FiniteGroup":
        s = sorted(set(s))
        if not self.is_subgroup(s):
            raise AxiomViolation("not a subgroup")
        return FiniteGroup(s, lambda a, b: self.mul(a, b), self.identity, name=name, check=False)

    def cosets(self, normal: Iterable[str]) -> list[frozenset[str]]:
        normal = set(normal)
        seen: set[str] = set()
        out = []
        for g in self.elements:
            if g in seen:
                continue
            c = frozenset(self.mul(g, n) for n in normal)
            seen |= c
            out.append(c)
        return out

    def quotient(self, normal: Iterable[str], name: str = "") -> tuple["FiniteGroup", "GroupHom"]:
        """Quotient group with cosets named by their least element."""
        normal = set(normal)
        if not self.is_normal(normal):
            raise AxiomViolation("subgroup is not normal")
        cos = self.cosets(normal)
        rep = {}
        for c in cos:
            r = min(c)
            for x in c:
                rep[x] = r
        reps = sorted(set(rep.values()))
        q = FiniteGroup(reps, lambda a, b: rep[self.mul(a, b)], rep[self.identity],
                        name=name or f"{self.name}/N", check=False)
        return q, GroupHom(self, q, {x: rep[x] for x in self.elements})

    def element_orders(self) -> dict[str, int]:
        return {a: self.order_of(a) for a in self.elements}


@dataclass(frozen=True)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    map: Mapping[str, str] = field(hash=False)

    def __call__(self, x: str) -> str:
        return self.map[x]

    def __hash__(self) -> int:
        return hash(self.key())

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupHom) and self.key() == other.key()

    def key(self) -> tuple[str, ...]:
        return tuple(self.map[x] for x in self.source.elements)

    def violations(self) -> list[tuple[str, str]]:
        s, t = self.source, self.target
        return [(a, b) for a in s for b in s
                if self.map[s.mul(a, b)] != t.mul(self.map[a], self.map[b])]

    def is_hom(self) -> bool:
        if set(self.map) != set(self.source.elements):
            return False
        if any(v not in self.target for v in self.map.values()):
            return False
        return not self.violations()

    def is_bijective(self) -> bool:
        return len(set(self.map.values())) == len(self.target) == len(self.source)

    def kernel(self) -> frozenset[str]:
        return frozenset(x for x in self.source if self.map[x] == self.target.identity)

    def image(self) -> frozenset[str]:
        return frozenset(self.map.values())

    def compose(self, other: "GroupHom") -> "GroupHom":
        """self ∘ other."""
        return GroupHom(other.source, self.target, {x: self.map[other.map[x]] for x in other.source})

    def inverse(self) -> "GroupHom":
        return GroupHom(self.target, self.source, {v: k for k, v in self.map.items()})

    @staticmethod
    def identity(g: FiniteGroup) -> "GroupHom":
        return GroupHom(g, g, {x: x for x in g})


@dataclass(frozen=True)
class CenterSubgroup:
    ambient: FiniteGroup
    elements: frozenset[str]

    def __contains__(self, x) -> bool:
        return x in self.elements

    def __len__(self) -> int:
        return len(self.elements)

    def as_group(self) -> FiniteGroup:
        return self.ambient.subgroup(self.elements, name=f"Z({self.ambient.name})")


@dataclass
class AutomorphismGroup:
    base: FiniteGroup
    autos: list[GroupHom]
    inn: list[GroupHom]

    def __len__(self) -> int:
        return len(self.autos)

    def as_group(self) -> FiniteGroup:
        """Aut as an abstract FiniteGroup; elements named a0, a1, ... in search order."""
        names = {a.key(): f"a{i}" for i, a in enumerate(self.autos)}
        by_name = {f"a{i}": a for i, a in enumerate(self.autos)}
        ident = names[GroupHom.identity(self.base).key()]
        return FiniteGroup(list(by_name), lambda x, y: names[by_name[x].compose(by_name[y]).key()],
                           ident, name=f"Aut({self.base.name})", check=False)

    def outer_order(self) -> int:
        return len(self.autos) // len(self.inn)


def center(g: FiniteGroup) -> CenterSubgroup:
    z = frozenset(a for a in g if all(g.mul(a, x) == g.mul(x, a) for x in g))
    return CenterSubgroup(g, z)


def inner_automorphism(g: FiniteGroup, h: str) -> GroupHom:
    g.check(h)
    return GroupHom(g, g, {x: g.conj(h, x) for x in g})


def homomorphisms(source: FiniteGroup, target: FiniteGroup,
                  bijective: bool = False) -> list[GroupHom]:
    """All homomorphisms source -> target by generator-image search."""
    gens = source.generators()
    # words expressing every element via a BFS over generators
    word: dict[str, tuple[int, ...]] = {source.identity: ()}
    frontier = [source.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for k, g in enumerate(gens):
                y = source.mul(x, g)
                if y not in word:
                    word[y] = word[x] + (k,)
                    nxt.append(y)
        frontier = nxt
    orders = [source.order_of(g) for g in gens]
    cands = [[t for t in target if orders[k] % target.order_of(t) == 0] for k in range(len(gens))]
    out = []
    for imgs in itertools.product(*cands):
        m = {}
        for x, w in word.items():
            m[x] = target.prod(*(imgs[k] for k in w))
        f = GroupHom(source, target, m)
        if bijective and len(set(m.values())) != len(source):
            continue
        if f.is_hom():
            out.append(f)
    return out


def automorphism_group(g: FiniteGroup, bound: int = DEFAULT_AUT_BOUND) -> AutomorphismGroup:
    if len(g) > bound:
        raise SizeBoundExceeded(f"|G| = {len(g)} exceeds automorphism search bound {bound}")
    autos = homomorphisms(g, g, bijective=True)
    autos.sort(key=lambda a: (a != GroupHom.identity(g), a.key()))
    inn_keys = {}
    for h in g:
        i = inner_automorphism(g, h)
        inn_keys.setdefault(i.key(), i)
    inn = sorted(inn_keys.values(), key=lambda a: (a != GroupHom.identity(g), a.key()))
    return AutomorphismGroup(g, autos, inn)


# --- standard groups -------------------------------------------------------

def cyclic(n: int) -> FiniteGroup:
    names = [str(i) for i in range(n)]
    return FiniteGroup(names, lambda a, b: str((int(a) + int(b)) % n), "0", name=f"Z{n}", check=False)


def trivial_group() -> FiniteGroup:
    return FiniteGroup(["e"], lambda a, b: "e", "e", name="1", check=False)


def symmetric(n: int) -> FiniteGroup:
    perms = ["".join(map(str, p)) for p in itertools.permutations(range(n))]

    def mul(a, b):  # (a*b)(i) = a(b(i))
        return "".join(a[int(b[i])] for i in range(n))

    return FiniteGroup(perms, mul, "".join(map(str, range(n))), name=f"S{n}", check=False)


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n: r<k> rotations, s<k> reflections."""
    names = [f"r{k}" for k in range(n)] + [f"s{k}" for k in range(n)]

    def mul(a, b):
        ka, kb = int(a[1:]), int(b[1:])
        if a[0] == "r" and b[0] == "r":
            return f"r{(ka + kb) % n}"
        if a[0] == "r":
            return f"s{(ka + kb) % n}"
        if b[0] == "r":
            return f"s{(ka - kb) % n}"
        return f"r{(ka - kb) % n}"

    return FiniteGroup(names, mul, "r0", name=f"D{n}", check=False)


def quaternion() -> FiniteGroup:
    units = ["1", "i", "j", "k"]
    base = {("1", x): (1, x) for x in units}
    base.update({(x, "1"): (1, x) for x in units})
    base.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
                 ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
                 ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})

    def split(a):
        return (-1, a[1:]) if a.startswith("-") else (1, a)

    def mul(a, b):
        sa, ua = split(a)
        sb, ub = split(b)
        s, u = base[(ua, ub)]
        s *= sa * sb
        return u if s == 1 else "-" + u

    names = units + ["-" + u for u in units]
    return FiniteGroup(names, mul, "1", name="Q8", check=False)


def direct_product(a: FiniteGroup, b: FiniteGroup) -> FiniteGroup:
    names = [f"{x}|{y}" for x in a for y in b]

    def mul(p, q):
        x1, y1 = p.split("|")
        x2, y2 = q.split("|")
        return f"{a.mul(x1, x2)}|{b.mul(y1, y2)}"

    return FiniteGroup(names, mul, f"{a.identity}|{b.identity}",
                       name=f"{a.name}x{b.name}", check=False)


STANDARD_GROUPS: dict[str, Callable[[], FiniteGroup]] = {
    "1": trivial_group,
    "S3": lambda: symmetric(3),
    "D4": lambda: dihedral(4),
    "Q8": quaternion,
    "V4": lambda: direct_product(cyclic(2), cyclic(2)),
}


def standard_group(name: str) -> FiniteGroup:
    """Resolve names like ``Z4``, ``S3``, ``D4``, ``Q8``, ``V4``, ``Z2xZ2``."""
    if "x" in name and name not in STANDARD_GROUPS:
        parts = name.split("x")
        g = standard_group(parts[0])
        for p in parts[1:]:
            g = direct_product(g, standard_group(p))
        return g
    if name in STANDARD_GROUPS:
        return STANDARD_GROUPS[name]()
    if name.startswith("Z") and name[1:].isdigit():
        return cyclic(int(name[1:]))
    if name.startswith("S") and name[1:].isdigit():
        return symmetric(int(name[1:]))
    if name.startswith("D") and name[1:].isdigit():
        return dihedral(int(name[1:]))
    raise XModKitError(f"unknown standard group {name!r}")


class AbelianCoordinates:
    """Explicit isomorphism of an abelian (sub)group with Z/n1 x ... x Z/nk.

    Built by splitting off cyclic subgroups of maximal order in each primary
    component; the basis is deterministic given the canonical element order.
    """

    def __init__(self, g: FiniteGroup, elements: Iterable[str] | None = None):
        elems = sorted(set(elements)) if elements is not None else list(g.elements)
        if any(g.mul(a, b) != g.mul(b, a) for a in elems for b in elems):
            raise AxiomViolation("coefficient group is not abelian")
        if not g.is_subgroup(elems):
            raise AxiomViolation("coefficient set is not a subgroup")
        self.group = g
        self.elements = elems
        basis: list[tuple[str, int]] = []
        n = len(elems)
        primes = [p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))]
        for p in primes:
            part = [x for x in elems if _is_p_power(g.order_of(x), p)]
            basis += _p_basis(g, part)
        self.basis = basis
        self.orders = [o for _, o in basis]
        self._coord: dict[str, tuple[int, ...]] = {}
        for exps in itertools.product(*(range(o) for o in self.orders)):
            x = g.prod(*(g.power(b, k) for (b, _), k in zip(basis, exps)))
            self._coord[x] = exps
        if len(self._coord) != n:
            raise XModKitError("abelian decomposition failed")

    def coords(self, x: str) -> tuple[int, ...]:
        return self._coord[x]

    def element(self, coords: Sequence[int]) -> str:
        g = self.group
        return g.prod(*(g.power(b, k % o) for (b, o), k in zip(self.basis, coords)))


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _p_basis(g: FiniteGroup, part: list[str]) -> list[tuple[str, int]]:
    if len(part) == 1:
        return []
    x = max(part, key=lambda a: (g.order_of(a), [-ord(c) for c in a]))
    ox = g.order_of(x)
    cyc = sorted(g.generated([x]))
    sub = g.subgroup(part)
    q, proj = sub.quotient(cyc)
    rest = _p_basis(q, list(q.elements))
    out = [(x, ox)]
    for ybar, oy in rest:
        # lift to an element of exact order oy
        y = min(a for a in part if proj(a) == ybar)
        m = next(k for k in range(ox) if g.power(x, k) == g.power(y, oy))
        y = g.mul(y, g.power(x, -(m // oy)))
        out.append((y, oy))
    return out


# --- crossed modules of groups ------------------------------------------------

@dataclass
class GroupXMod:
    """∂: H -> D with D acting on H by ``action[d]``."""
    h: FiniteGroup
    d: FiniteGroup
    boundary: GroupHom
    action: dict[str, GroupHom]
    name: str = ""

    def violations(self) -> list[tuple]:
        h, d, dd, act = self.h, self.d, self.boundary, self.action
        out = []
        if not dd.is_hom():
            out.append(("boundary_hom", dd.violations()[:1]))
        for x in d:
            if x not in act or not (act[x].is_hom() and act[x].is_bijective()):
                out.append(("action_automorphism", (x,)))
                return out
        for x in d:
            for y in d:
                if act[d.mul(x, y)] != act[x].compose(act[y]):
                    out.append(("action_hom", (x, y)))
                    return out
        for x in d:
            for a in h:
                if dd(act[x](a)) != d.conj(x, dd(a)):
                    out.append(("i", (x, a)))
                    return out
        for a in h:
            for b in h:
                if act[dd(a)](b) != h.conj(a, b):
                    out.append(("ii", (a, b)))
                    return out
        return out

    def check(self) -> "GroupXMod":
        bad = self.violations()
        if bad:
            raise AxiomViolation(f"crossed module condition {bad[0][0]} fails", witness=bad[0][1])
        return self

    @property
    def kernel(self) -> frozenset[str]:
        return self.boundary.kernel()

    @property
    def image(self) -> frozenset[str]:
        return self.boundary.image()

    def is_pair(self) -> bool:
        return len(self.image) == len(self.d)

    def is_coupling(self) -> bool:
        return self.kernel == center(self.h).elements

    def lift(self, x: str) -> str:
        """Some preimage of x under ∂."""
        for a in self.h:
            if self.boundary(a) == x:
                return a
        raise AxiomViolation(f"{x} is not in the image of the boundary")


def central_quotient_xmod(h: FiniteGroup, kernel: Iterable[str], name: str = "") -> GroupXMod:
    """H -> H/K for a central subgroup K, with D acting through lifts by conjugation."""
    k = frozenset(kernel)
    z = center(h).elements
    if not k <= z:
        raise NotCentral("kernel is not central", witness=sorted(k - z)[0])
    if not h.is_subgroup(k):
        raise AxiomViolation("kernel is not a subgroup")
    d, proj = h.quotient(k, name=f"{h.name}/{len(k)}")
    lifts = {}
    for a in h:
        lifts.setdefault(proj(a), a)
    action = {x: inner_automorphism(h, lifts[x]) for x in d}
    return GroupXMod(h, d, proj, action, name=name or f"{h.name}->{d.name}").check()
