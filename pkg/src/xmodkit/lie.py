"""Finite-dimensional Lie algebras over Q and their crossed modules.

The base manifold is a point throughout, so Lie algebroids are Lie algebras
and algebroid cohomology is Chevalley–Eilenberg cohomology.  Vectors are
lists of Fractions in the algebra's basis; a linear map is a matrix whose
columns are the images of basis vectors.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .errors import (AxiomViolation, DimensionMismatch, JacobiFailure,
                     NotAnIdeal, NotCentral, NotExact)

Vec = list[Fraction]
Mat = list[list[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)


def vzero(n: int) -> Vec:
    return [ZERO] * n


def unit(n: int, i: int) -> Vec:
    v = vzero(n)
    v[i] = ONE
    return v


def vadd(a: Vec, b: Vec) -> Vec:
    return [x + y for x, y in zip(a, b)]


def vsub(a: Vec, b: Vec) -> Vec:
    return [x - y for x, y in zip(a, b)]


def vscale(s, a: Vec) -> Vec:
    return [s * x for x in a]


def is_zero(v) -> bool:
    return all(x == 0 for x in v)


def columns_to_matrix(cols: Sequence[Vec], rows: int) -> Mat:
    if not cols:
        return [[] for _ in range(rows)]
    return [[c[r] for c in cols] for r in range(rows)]


def matrix_columns(m: Mat, ncols: int) -> list[Vec]:
    return [[row[j] for row in m] for j in range(ncols)]


def commutator(a: Mat, b: Mat) -> Mat:
    ab, ba = la.matmul(a, b), la.matmul(b, a)
    return [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(ab, ba)]


def mat_flat(m: Mat) -> Vec:
    return [x for row in m for x in row]


def mat_unflat(v: Vec, n: int) -> Mat:
    return [list(v[i * n:(i + 1) * n]) for i in range(n)]


def mat_add(a: Mat, b: Mat) -> Mat:
    return [vadd(r, s) for r, s in zip(a, b)]


def mat_scale(s, a: Mat) -> Mat:
    return [vscale(s, r) for r in a]


def mat_zero(n: int) -> Mat:
    return la.zeros(n, n)


class LieAlgebra:
    """Structure constants ``c[i][j]`` = coordinates of [e_i, e_j]."""

    def __init__(self, basis: Sequence[str], brackets, name: str = "", check: bool = True):
        self.basis = [str(b) for b in basis]
        self.dim = n = len(self.basis)
        self.name = name
        pos = {b: i for i, b in enumerate(self.basis)}
        c = [[vzero(n) for _ in range(n)] for _ in range(n)]
        if isinstance(brackets, dict):
            items = [(x, y, v) for (x, y), v in brackets.items()]
        else:
            items = list(brackets)
        for x, y, val in items:
            i, j = pos[x] if isinstance(x, str) else x, pos[y] if isinstance(y, str) else y
            if isinstance(val, dict):
                vec = vzero(n)
                for k, coef in val.items():
                    vec[pos[k] if isinstance(k, str) else k] += la.frac(coef)
            else:
                vec = [la.frac(t) for t in val]
            c[i][j] = vec
            if i != j:
                c[j][i] = vscale(-1, vec)
        self.c = c
        if check:
            self.check()

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name or '?'}, dim={self.dim})"

    def check(self) -> None:
        n = self.dim
        for i in range(n):
            if not is_zero(self.c[i][i]):
                raise AxiomViolation(f"[{self.basis[i]},{self.basis[i]}] != 0", witness=(i,))
            for j in range(n):
                if vadd(self.c[i][j], self.c[j][i]) != vzero(n):
                    raise AxiomViolation("antisymmetry fails", witness=(i, j))
        bad = self.jacobi_failure()
        if bad is not None:
            raise JacobiFailure(f"Jacobi fails on basis triple {bad}", witness=bad)

    def jacobi_failure(self):
        n = self.dim
        for i, j, k in itertools.combinations(range(n), 3):
            e = [unit(n, t) for t in (i, j, k)]
            s = vadd(vadd(self.bracket(self.bracket(e[0], e[1]), e[2]),
                          self.bracket(self.bracket(e[1], e[2]), e[0])),
                     self.bracket(self.bracket(e[2], e[0]), e[1]))
            if not is_zero(s):
                return (self.basis[i], self.basis[j], self.basis[k])
        return None

    def bracket(self, u: Vec, v: Vec) -> Vec:
        n = self.dim
        out = vzero(n)
        for i, a in enumerate(u):
            if not a:
                continue
            ci = self.c[i]
            for j, b in enumerate(v):
                if b:
                    ab = a * b
                    cij = ci[j]
                    for k in range(n):
                        if cij[k]:
                            out[k] += ab * cij[k]
        return out

    def ad(self, u: Vec) -> Mat:
        return columns_to_matrix([self.bracket(u, unit(self.dim, j)) for j in range(self.dim)], self.dim)

    def is_abelian(self) -> bool:
        return all(is_zero(v) for row in self.c for v in row)

    def center(self) -> list[Vec]:
        n = self.dim
        # z with [z, e_j] = 0 for all j: rows indexed by (j, k)
        rows = [[self.c[i][j][k] for i in range(n)] for j in range(n) for k in range(n)]
        return la.nullspace(rows, cols=n)

    def is_ideal(self, basis: Sequence[Vec]) -> bool:
        return all(la.in_span(basis, self.bracket(unit(self.dim, i), v))
                   for i in range(self.dim) for v in basis)

    def derivations(self) -> list[Mat]:
        """Basis of Der(L) as matrices."""
        n = self.dim
        rows = []
        # D[e_i,e_j] - [D e_i, e_j] - [e_i, D e_j] = 0; unknown D[r][s] at index r*n+s
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(n):
                    row = vzero(n * n)
                    for t in range(n):
                        row[k * n + t] += self.c[i][j][t]            # (D c_ij)_k
                    for t in range(n):
                        # [D e_i, e_j]_k = sum_t D[t][i] c[t][j][k]
                        row[t * n + i] -= self.c[t][j][k]
                        row[t * n + j] -= self.c[i][t][k]
                    rows.append(row)
        sols = la.nullspace(rows, cols=n * n) if rows else la.nullspace([], cols=n * n)
        return [mat_unflat(v, n) for v in sols]

    def is_derivation(self, d: Mat) -> bool:
        n = self.dim
        for i in range(n):
            for j in range(i + 1, n):
                lhs = la.matvec(d, self.c[i][j])
                di = [row[i] for row in d]
                dj = [row[j] for row in d]
                rhs = vadd(self.bracket(di, unit(n, j)), self.bracket(unit(n, i), dj))
                if lhs != rhs:
                    return False
        return True

    def to_doc(self) -> dict:
        br = []
        for i, j in itertools.combinations(range(self.dim), 2):
            v = self.c[i][j]
            if not is_zero(v):
                br.append([self.basis[i], self.basis[j],
                           {self.basis[k]: str(x) for k, x in enumerate(v) if x}])
        return {"basis": list(self.basis), "bracket": br}

    @classmethod
    def from_doc(cls, doc: dict, name: str = "") -> "LieAlgebra":
        return cls(doc["basis"], [(x, y, v) for x, y, v in doc.get("bracket", [])], name=name)

    def structure_equal(self, other: "LieAlgebra") -> bool:
        return self.basis == other.basis and self.c == other.c


# --- standard algebras -------------------------------------------------------

def abelian(n: int, prefix: str = "x") -> LieAlgebra:
    return LieAlgebra([f"{prefix}{i}" for i in range(n)], [], name=f"Q^{n}")


def sl2() -> LieAlgebra:
    return LieAlgebra(["e", "f", "h"], [("e", "f", {"h": 1}), ("h", "e", {"e": 2}),
                                        ("h", "f", {"f": -2})], name="sl2")


def gl2() -> LieAlgebra:
    # basis E11, E12, E21, E22 ; [Eij, Ekl] = d_jk Eil - d_li Ekj
    names = ["E11", "E12", "E21", "E22"]
    idx = {(1, 1): "E11", (1, 2): "E12", (2, 1): "E21", (2, 2): "E22"}
    br = []
    pairs = list(idx)
    for a, b in itertools.combinations(range(4), 2):
        (i, j), (k, l) = pairs[a], pairs[b]
        v: dict[str, int] = {}
        if j == k:
            v[idx[(i, l)]] = v.get(idx[(i, l)], 0) + 1
        if l == i:
            v[idx[(k, j)]] = v.get(idx[(k, j)], 0) - 1
        v = {key: val for key, val in v.items() if val}
        if v:
            br.append((idx[(i, j)], idx[(k, l)], v))
    return LieAlgebra(names, br, name="gl2")


def heisenberg() -> LieAlgebra:
    return LieAlgebra(["x", "y", "z"], [("x", "y", {"z": 1})], name="h3")


def filiform4() -> LieAlgebra:
    return LieAlgebra(["x1", "x2", "x3", "x4"], [("x1", "x2", {"x3": 1}), ("x1", "x3", {"x4": 1})],
                      name="n4")


def nonabelian2() -> LieAlgebra:
    return LieAlgebra(["a", "b"], [("a", "b", {"b": 1})], name="aff1")


def direct_sum(a: LieAlgebra, b: LieAlgebra) -> LieAlgebra:
    n, m = a.dim, b.dim
    br = []
    for i, j in itertools.combinations(range(n), 2):
        br.append((i, j, a.c[i][j] + vzero(m)))
    for i, j in itertools.combinations(range(m), 2):
        br.append((n + i, n + j, vzero(n) + b.c[i][j]))
    names = list(a.basis) + [x if x not in a.basis else x + "'" for x in b.basis]
    return LieAlgebra(names, br, name=f"{a.name}+{b.name}")


# --- subspaces and quotients ------------------------------------------------

def span_basis(vectors: Sequence[Vec], n: int) -> list[Vec]:
    """Reduced basis of the span (rows of the RREF)."""
    if not vectors:
        return []
    red, piv = la.rref([list(v) for v in vectors])
    return [red[r] for r in range(len(piv))]


@dataclass
class Quotient:
    """L / I with the complement spanned by standard vectors off the pivots of I."""
    algebra: LieAlgebra
    ideal: list[Vec]
    quotient: LieAlgebra
    complement: list[int]

    def project(self, v: Vec) -> Vec:
        n = self.algebra.dim
        cols = list(self.ideal) + [unit(n, c) for c in self.complement]
        x = la.solve(columns_to_matrix(cols, n), v)
        return x[len(self.ideal):]

    def lift(self, w: Vec) -> Vec:
        v = vzero(self.algebra.dim)
        for c, x in zip(self.complement, w):
            v[c] += x
        return v

    def projection_matrix(self) -> Mat:
        n = self.algebra.dim
        return columns_to_matrix([self.project(unit(n, i)) for i in range(n)], self.quotient.dim)


def quotient_algebra(lie: LieAlgebra, ideal: Sequence[Vec], name: str = "") -> Quotient:
    n = lie.dim
    ib = span_basis(ideal, n)
    if not lie.is_ideal(ib):
        raise NotAnIdeal("subspace is not an ideal")
    piv = la.rref(ib)[1] if ib else []
    comp = [c for c in range(n) if c not in piv]
    q = Quotient(lie, ib, None, comp)  # type: ignore[arg-type]
    br = []
    for a, b in itertools.combinations(range(len(comp)), 2):
        br.append((a, b, q.project(lie.c[comp[a]][comp[b]])))
    q.quotient = LieAlgebra([lie.basis[c] for c in comp], br, name=name or f"{lie.name}/I")
    return q


# --- maps ---------------------------------------------------------------------

@dataclass
class LieMap:
    source: LieAlgebra
    target: LieAlgebra
    matrix: Mat
    bracket_preserving: bool = True

    def __post_init__(self):
        if len(self.matrix) != self.target.dim or any(len(r) != self.source.dim for r in self.matrix):
            if self.target.dim and self.source.dim:
                raise DimensionMismatch("matrix shape does not match source/target dimensions")
        if self.bracket_preserving and not self.preserves_brackets():
            raise AxiomViolation("map flagged bracket-preserving does not preserve brackets")

    def __call__(self, v: Vec) -> Vec:
        if not self.target.dim:
            return []
        return la.matvec(self.matrix, v)

    def preserves_brackets(self) -> bool:
        s = self.source
        for i, j in itertools.combinations(range(s.dim), 2):
            lhs = self(s.c[i][j])
            rhs = self.target.bracket(self(unit(s.dim, i)), self(unit(s.dim, j)))
            if lhs != rhs:
                return False
        return True

    def kernel(self) -> list[Vec]:
        if not self.target.dim:
            return [unit(self.source.dim, i) for i in range(self.source.dim)]
        return la.nullspace(self.matrix, cols=self.source.dim)

    def image(self) -> list[Vec]:
        return span_basis(matrix_columns(self.matrix, self.source.dim), self.target.dim)


# --- outer derivations -------------------------------------------------------

class DerivationData:
    """Der(K), ad(K) and OutDer(K) = Der/ad with explicit coordinates.

    Der basis is ad(K)-basis first (``n_ad`` elements) then a complement;
    OutDer coordinates are the complement coefficients.
    """

    def __init__(self, k: LieAlgebra):
        self.k = k
        n = k.dim
        self.n = n
        ders = k.derivations()
        ads = [k.ad(unit(n, i)) for i in range(n)]
        # representatives V_b whose ad's form a basis of ad(K)
        self.ad_reps: list[int] = []
        acc: list[Vec] = []
        for i, a in enumerate(ads):
            if not la.in_span(acc, mat_flat(a)):
                acc.append(mat_flat(a))
                self.ad_reps.append(i)
        self.n_ad = len(acc)
        basis = list(acc)
        for d in ders:
            if not la.in_span(basis, mat_flat(d)):
                basis.append(mat_flat(d))
        self.basis = basis                       # flattened matrices
        self.dim = len(basis)
        self.n_out = self.dim - self.n_ad
        self._coeff_matrix = columns_to_matrix(basis, n * n)

    def coords(self, d: Mat) -> Vec:
        x = la.solve(self._coeff_matrix, mat_flat(d), cols=self.dim)
        if x is None:
            raise AxiomViolation("matrix is not a derivation")
        return x

    def matrix(self, coords: Vec) -> Mat:
        out = vzero(self.n * self.n)
        for c, b in zip(coords, self.basis):
            if c:
                out = vadd(out, vscale(c, b))
        return mat_unflat(out, self.n)

    def out_class(self, d: Mat) -> Vec:
        return self.coords(d)[self.n_ad:]

    def canonical_lift(self, out: Vec) -> Mat:
        return self.matrix(vzero(self.n_ad) + list(out))

    def ad_preimage(self, d: Mat) -> Vec | None:
        """Some V with ad_V = d (free variables zero), or None."""
        n = self.n
        cols = [mat_flat(self.k.ad(unit(n, i))) for i in range(n)]
        if not cols:
            return [] if is_zero(mat_flat(d)) else None
        return la.solve(columns_to_matrix(cols, n * n), mat_flat(d), cols=n)

    def ad_coords(self, d: Mat) -> Vec:
        """Coordinates of d in ad(K) w.r.t. ad(V_b), b in ad_reps."""
        x = self.coords(d)
        if not is_zero(x[self.n_ad:]):
            raise AxiomViolation("derivation is not inner")
        return x[:self.n_ad]

    def outder_algebra(self) -> LieAlgebra:
        br = []
        lifts = [self.canonical_lift(unit(self.n_out, a)) for a in range(self.n_out)]
        for a, b in itertools.combinations(range(self.n_out), 2):
            br.append((a, b, self.out_class(commutator(lifts[a], lifts[b]))))
        return LieAlgebra([f"o{a}" for a in range(self.n_out)], br, name=f"OutDer({self.k.name})")


# --- crossed modules -----------------------------------------------------------

@dataclass
class LieXMod:
    k: LieAlgebra
    g: LieAlgebra
    tau: LieMap
    rho: list[Mat]            # rho[i] = action of g-basis element i on k


@dataclass
class XModReport:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]
    kernel: list[Vec] = field(default_factory=list)
    image: list[Vec] = field(default_factory=list)
    coker_dim: int = 0
    kernel_rep: list[Mat] = field(default_factory=list)
    coupling: bool = False

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def _rho_apply(rho: list[Mat], x: Vec, kdim: int) -> Mat:
    out = mat_zero(kdim)
    for c, m in zip(x, rho):
        if c:
            out = mat_add(out, mat_scale(c, m))
    return out


def validate_liexmod(x: LieXMod) -> XModReport:
    k, g = x.k, x.g
    if len(x.rho) != g.dim or x.tau.source is not k and x.tau.source.dim != k.dim:
        raise DimensionMismatch("rho/tau shapes inconsistent with k and g")
    if x.tau.target.dim != g.dim:
        raise DimensionMismatch("tau target is not g")
    cond, wit = {}, {}
    # rho is a representation by derivations
    cond["rho_derivations"] = all(k.is_derivation(m) for m in x.rho)
    rep_bad = None
    for i, j in itertools.combinations(range(g.dim), 2):
        lhs = _rho_apply(x.rho, g.c[i][j], k.dim)
        if lhs != commutator(x.rho[i], x.rho[j]):
            rep_bad = (g.basis[i], g.basis[j])
            break
    cond["rho_representation"] = rep_bad is None
    if rep_bad:
        wit["rho_representation"] = rep_bad
    cond["tau_bracket_preserving"] = x.tau.preserves_brackets()
    # (i) rho(tau V)(W) = [V, W]
    bad = None
    for v in range(k.dim):
        act = _rho_apply(x.rho, x.tau(unit(k.dim, v)), k.dim)
        for w in range(k.dim):
            if la.matvec(act, unit(k.dim, w)) != k.c[v][w]:
                bad = (k.basis[v], k.basis[w])
                break
        if bad:
            break
    cond["peiffer_i"] = bad is None
    if bad:
        wit["peiffer_i"] = bad
    # (ii) tau(rho(X) V) = [X, tau V]
    bad = None
    for a in range(g.dim):
        for v in range(k.dim):
            lhs = x.tau(la.matvec(x.rho[a], unit(k.dim, v)))
            rhs = g.bracket(unit(g.dim, a), x.tau(unit(k.dim, v)))
            if lhs != rhs:
                bad = (g.basis[a], k.basis[v])
                break
        if bad:
            break
    cond["peiffer_ii"] = bad is None
    if bad:
        wit["peiffer_ii"] = bad
    rep = XModReport(cond, wit)
    rep.kernel = span_basis(x.tau.kernel(), k.dim)
    rep.image = x.tau.image()
    rep.coker_dim = g.dim - len(rep.image)
    zk = span_basis(k.center(), k.dim)
    rep.conditions["kernel_central"] = all(la.in_span(zk, v) for v in rep.kernel)
    if rep.valid:
        # induced representation of the cokernel on ker tau: action of each g-basis
        # element restricted to ker tau, and tau(k) acts trivially there
        kers = rep.kernel
        kr = []
        ok = True
        for a in range(g.dim):
            cols = []
            for v in kers:
                w = la.matvec(x.rho[a], v)
                if not la.in_span(kers, w):
                    ok = False
                    break
                cols.append(_coords_in(kers, w))
            kr.append(columns_to_matrix(cols, len(kers)))
        for v in range(k.dim):
            act = _rho_apply(x.rho, x.tau(unit(k.dim, v)), k.dim)
            if any(not is_zero(la.matvec(act, z)) for z in kers):
                ok = False
        rep.conditions["kernel_rep_well_defined"] = ok
        rep.kernel_rep = kr
        rep.coupling = len(rep.kernel) == len(zk)
    return rep


def _coords_in(basis: Sequence[Vec], v: Vec) -> Vec:
    if not basis:
        return []
    return la.solve(columns_to_matrix(list(basis), len(v)), v)


# --- couplings and derivation laws -----------------------------------------

@dataclass
class Coupling:
    gbar: LieAlgebra
    k: LieAlgebra
    xi: list[Vec]                      # OutDer coordinates of Xi(gbar basis i)
    der: DerivationData = None         # type: ignore[assignment]

    def __post_init__(self):
        if self.der is None:
            self.der = DerivationData(self.k)
        out = self.der.outder_algebra()
        for i, j in itertools.combinations(range(self.gbar.dim), 2):
            lhs = vzero(self.der.n_out)
            for c, v in zip(self.gbar.c[i][j], self.xi):
                if c:
                    lhs = vadd(lhs, vscale(c, v))
            if lhs != out.bracket(self.xi[i], self.xi[j]):
                raise AxiomViolation("Xi does not preserve brackets into OutDer",
                                     witness=(self.gbar.basis[i], self.gbar.basis[j]))


@dataclass
class DerivationLaw:
    coupling: Coupling
    nabla: list[Mat]

    def __post_init__(self):
        der = self.coupling.der
        for i, m in enumerate(self.nabla):
            if der.out_class(m) != list(self.coupling.xi[i]):
                raise AxiomViolation("nabla does not cover Xi", witness=(self.coupling.gbar.basis[i],))

    def at(self, x: Vec) -> Mat:
        return _rho_apply(self.nabla, x, self.coupling.k.dim)


def lift_coupling(c: Coupling) -> DerivationLaw:
    return DerivationLaw(c, [c.der.canonical_lift(v) for v in c.xi])


def shifted_law(d: DerivationLaw, beta: Sequence[Vec]) -> DerivationLaw:
    """nabla + ad o beta for a linear beta: gbar -> k (given on basis)."""
    k = d.coupling.k
    return DerivationLaw(d.coupling, [mat_add(m, k.ad(b)) for m, b in zip(d.nabla, beta)])


def central_representation(c: Coupling, second_lift: DerivationLaw | None = None) -> list[Mat]:
    """Restriction of a lift of Xi to ZK, in the reduced basis of ZK.

    When the inner part of the lift space is nontrivial, a second lift is
    used to confirm independence of the choice.
    """
    k = c.k
    zk = span_basis(k.center(), k.dim)
    d = lift_coupling(c)

    def restrict(law: DerivationLaw) -> list[Mat]:
        out = []
        for m in law.nabla:
            cols = []
            for z in zk:
                w = la.matvec(m, z)
                if not la.in_span(zk, w):
                    raise AxiomViolation("lift does not preserve ZK")
                cols.append(_coords_in(zk, w))
            out.append(columns_to_matrix(cols, len(zk)))
        return out

    r1 = restrict(d)
    if second_lift is None and c.der.n_ad:
        beta = [unit(k.dim, c.der.ad_reps[(i % len(c.der.ad_reps))]) for i in range(c.gbar.dim)]
        second_lift = shifted_law(d, beta)
    if second_lift is not None and restrict(second_lift) != r1:
        raise AxiomViolation("central representation depends on the lift")
    return r1


@dataclass
class Curvature:
    values: dict[tuple[int, int], Mat]      # R(e_i, e_j), i < j
    ad_preimages: dict[tuple[int, int], Vec]
    in_ad: bool
    rbar_is_ad_of_r: bool
    bianchi: bool

    def is_flat(self) -> bool:
        return all(is_zero(mat_flat(m)) for m in self.values.values())


def curvature(d: DerivationLaw) -> Curvature:
    """R(X,Y) = nabla_[X,Y] - [nabla_X, nabla_Y] on basis pairs."""
    g, k = d.coupling.gbar, d.coupling.k
    der = d.coupling.der
    vals, pre = {}, {}
    in_ad = True
    for i, j in itertools.combinations(range(g.dim), 2):
        r = [[a - b for a, b in zip(r1, r2)]
             for r1, r2 in zip(d.at(g.c[i][j]), commutator(d.nabla[i], d.nabla[j]))]
        vals[(i, j)] = r
        p = der.ad_preimage(r)
        if p is None:
            in_ad = False
        else:
            pre[(i, j)] = p
    rbar_ok = True
    bianchi = True
    if in_ad:
        # R_nablabar(X,Y)(ad_V) = ad_{nabla_[X,Y] V} - [nablabar_X, nablabar_Y](ad_V)
        for (i, j), lam in pre.items():
            for v in range(k.dim):
                vv = unit(k.dim, v)
                w = vsub(la.matvec(d.at(g.c[i][j]), vv),
                         vsub(la.matvec(d.nabla[i], la.matvec(d.nabla[j], vv)),
                              la.matvec(d.nabla[j], la.matvec(d.nabla[i], vv))))
                # compare ad_w with ad_{R(X,Y) V}
                if k.ad(w) != k.ad(la.matvec(vals[(i, j)], vv)):
                    rbar_ok = False
        for a, b, c in itertools.combinations(range(g.dim), 3):
            tot = _covariant_d2(d, lambda x, y: _form_on(vals, g, x, y, k.dim), a, b, c, matrix=True)
            if not is_zero(mat_flat(tot)):
                bianchi = False
    return Curvature(vals, pre, in_ad, rbar_ok, bianchi)


def _form_on(vals: dict, g: LieAlgebra, x: Vec, y: Vec, kdim: int, matrix: bool = True):
    """Evaluate a 2-form stored on basis pairs i<j at vectors x, y."""
    acc = None
    for (i, j), m in vals.items():
        coef = x[i] * y[j] - x[j] * y[i]
        if coef:
            term = mat_scale(coef, m) if matrix else vscale(coef, m)
            acc = term if acc is None else (mat_add(acc, term) if matrix else vadd(acc, term))
    if acc is None:
        return mat_zero(kdim) if matrix else vzero(kdim)
    return acc


def _covariant_d2(d: DerivationLaw, form, a: int, b: int, c: int, matrix: bool):
    """(d^nabla w)(X,Y,Z) for a 2-form w with values in k (vector) or Der(k) (matrix)."""
    g = d.coupling.gbar
    n = g.dim
    X, Y, Z = unit(n, a), unit(n, b), unit(n, c)

    def act(x_idx, val):
        if matrix:
            return commutator(d.nabla[x_idx], val)
        return la.matvec(d.nabla[x_idx], val)

    add = mat_add if matrix else vadd

    def neg(v):
        return mat_scale(-1, v) if matrix else vscale(-1, v)

    terms = [act(a, form(Y, Z)), neg(act(b, form(X, Z))), act(c, form(X, Y)),
             neg(form(g.bracket(X, Y), Z)), form(g.bracket(X, Z), Y), neg(form(g.bracket(Y, Z), X))]
    out = terms[0]
    for t in terms[1:]:
        out = add(out, t)
    return out


# --- construction principle ------------------------------------------------

@dataclass
class CouplingConstruction:
    algebra: LieAlgebra
    xmod: LieXMod
    induced_xi: list[Vec]
    jacobi_ok: bool


def construct_from_coupling(d: DerivationLaw) -> CouplingConstruction:
    """A = gbar + ad(k) with the bracket
    [X+ad_V, Y+ad_W] = [X,Y] + (ad_{nabla_X W} - ad_{nabla_Y V} + ad_{[V,W]} - R(X,Y)).
    """
    c = d.coupling
    g, k, der = c.gbar, c.k, c.der
    curv = curvature(d)
    if not curv.in_ad:
        raise AxiomViolation("curvature does not take values in ad(k)")
    gn, an = g.dim, der.n_ad
    reps = [unit(k.dim, r) for r in der.ad_reps]

    def adc(v: Vec) -> Vec:
        return der.ad_coords(k.ad(v))

    br = []
    for i, j in itertools.combinations(range(gn), 2):
        r = der.ad_coords(curv.values[(i, j)])
        br.append((i, j, g.c[i][j] + vscale(-1, r)))
    for i in range(gn):
        for b in range(an):
            br.append((i, gn + b, vzero(gn) + adc(la.matvec(d.nabla[i], reps[b]))))
    for b1, b2 in itertools.combinations(range(an), 2):
        br.append((gn + b1, gn + b2, vzero(gn) + adc(k.bracket(reps[b1], reps[b2]))))
    names = list(g.basis) + [f"ad_{k.basis[r]}" for r in der.ad_reps]
    a = LieAlgebra(names, br, name=f"{g.name}+ad({k.name})", check=False)
    bad = a.jacobi_failure()
    if bad is not None:
        raise JacobiFailure(f"Jacobi fails on {bad}", witness=bad)
    tau = LieMap(k, a, columns_to_matrix([vzero(gn) + adc(unit(k.dim, v)) for v in range(k.dim)],
                                         a.dim))
    rho = list(d.nabla) + [k.ad(rv) for rv in reps]
    x = LieXMod(k, a, tau, rho)
    # induced coupling: A/im tau = gbar, X -> class of rho(X)
    induced = [der.out_class(rho[i]) for i in range(gn)]
    return CouplingConstruction(a, x, induced, True)


# --- Chevalley–Eilenberg cohomology -------------------------------------------

@dataclass
class Module:
    """A g-module: dimension plus action matrices of the basis of g."""
    dim: int
    action: list[Mat]

    def act(self, i: int, v: Vec) -> Vec:
        if not self.dim:
            return []
        return la.matvec(self.action[i], v)

    @staticmethod
    def trivial(g: LieAlgebra, dim: int = 1) -> "Module":
        return Module(dim, [mat_zero(dim) for _ in range(g.dim)])


@dataclass
class CECochain:
    algebra: LieAlgebra
    module: Module
    degree: int
    values: dict[tuple[int, ...], Vec]      # keyed by increasing index tuples

    def at(self, idx: Sequence[int]) -> Vec:
        """Value on a tuple of basis indices, using alternation."""
        if len(set(idx)) < len(idx):
            return vzero(self.module.dim)
        order = sorted(range(len(idx)), key=lambda t: idx[t])
        sign = _perm_sign(order)
        v = self.values.get(tuple(sorted(idx)), vzero(self.module.dim))
        return v if sign > 0 else vscale(-1, v)

    def eval_first(self, first: Vec, rest: Sequence[int]) -> Vec:
        out = vzero(self.module.dim)
        for t, coef in enumerate(first):
            if coef:
                out = vadd(out, vscale(coef, self.at((t,) + tuple(rest))))
        return out

    def flat(self) -> Vec:
        out = []
        for s in itertools.combinations(range(self.algebra.dim), self.degree):
            out += self.values.get(s, vzero(self.module.dim))
        return out

    @classmethod
    def from_flat(cls, g: LieAlgebra, m: Module, degree: int, flat: Vec) -> "CECochain":
        vals = {}
        for t, s in enumerate(itertools.combinations(range(g.dim), degree)):
            vals[s] = list(flat[t * m.dim:(t + 1) * m.dim])
        return cls(g, m, degree, vals)

    def is_zero(self) -> bool:
        return all(is_zero(v) for v in self.values.values())


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    seen = list(order)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def ce_differential(c: CECochain) -> CECochain:
    g, m, k = c.algebra, c.module, c.degree
    vals = {}
    for s in itertools.combinations(range(g.dim), k + 1):
        tot = vzero(m.dim)
        for i in range(k + 1):
            rest = s[:i] + s[i + 1:]
            term = m.act(s[i], c.at(rest))
            tot = vadd(tot, term if i % 2 == 0 else vscale(-1, term))
        for i, j in itertools.combinations(range(k + 1), 2):
            rest = tuple(x for t, x in enumerate(s) if t not in (i, j))
            term = c.eval_first(g.c[s[i]][s[j]], rest)
            tot = vadd(tot, term if (i + j) % 2 == 0 else vscale(-1, term))
        vals[s] = tot
    return CECochain(g, m, k + 1, vals)


def ce_matrix(g: LieAlgebra, m: Module, degree: int) -> Mat:
    """Matrix of d: C^degree -> C^(degree+1) in the flat coordinates."""
    src = list(itertools.combinations(range(g.dim), degree))
    cols = []
    for t in range(len(src) * m.dim):
        flat = vzero(len(src) * m.dim)
        flat[t] = ONE
        cols.append(ce_differential(CECochain.from_flat(g, m, degree, flat)).flat())
    rows = len(list(itertools.combinations(range(g.dim), degree + 1))) * m.dim
    return columns_to_matrix(cols, rows)


def _rank_or_zero(mat: Mat) -> int:
    if not mat or not mat[0]:
        return 0
    return la.rank(mat)


def ce_cohomology_dims(g: LieAlgebra, m: Module, top: int | None = None) -> list[int]:
    top = g.dim if top is None else top
    dims = []
    ranks = {}
    for k in range(-1, top + 1):
        if 0 <= k <= g.dim:
            ranks[k] = _rank_or_zero(ce_matrix(g, m, k)) if k < g.dim else 0
        else:
            ranks[k] = 0
    for k in range(top + 1):
        ck = (len(list(itertools.combinations(range(g.dim), k))) * m.dim) if k <= g.dim else 0
        dims.append(ck - ranks[k] - ranks[k - 1])
    return dims


def is_coboundary(c: CECochain) -> Vec | None:
    """A primitive b with d b = c, or None."""
    if c.degree == 0:
        return None if not c.is_zero() else []
    mat = ce_matrix(c.algebra, c.module, c.degree - 1)
    cols = len(list(itertools.combinations(range(c.algebra.dim), c.degree - 1))) * c.module.dim
    return la.solve(mat, c.flat(), cols=cols) if mat and mat[0] else (
        [] if c.is_zero() else None)


# --- the lifting obstruction ---------------------------------------------------

@dataclass
class CouplingObstruction:
    cochain: CECochain                 # ZK-valued, coordinates in the ZK basis
    raw: dict[tuple[int, ...], Vec]    # k-valued lambda on basis triples
    lam: dict[tuple[int, int], Vec]    # the chosen lift Lambda of the curvature
    zk_basis: list[Vec]
    ad_zero: bool
    closed: bool
    primitive: Vec | None

    @property
    def vanishes(self) -> bool:
        return self.primitive is not None


def coupling_module(c: Coupling) -> tuple[Module, list[Vec]]:
    zk = span_basis(c.k.center(), c.k.dim)
    return Module(len(zk), central_representation(c)), zk


def coupling_obstruction(d: DerivationLaw, lam: dict | None = None) -> CouplingObstruction:
    """lambda = d^nabla Lambda where ad o Lambda = R_nabla."""
    c = d.coupling
    g, k = c.gbar, c.k
    curv = curvature(d)
    if not curv.in_ad:
        raise AxiomViolation("curvature does not take values in ad(k)")
    lam = dict(curv.ad_preimages) if lam is None else lam
    raw = {}
    for a, b, cc in itertools.combinations(range(g.dim), 3):
        raw[(a, b, cc)] = _covariant_d2(d, lambda x, y: _form_on(lam, g, x, y, k.dim, matrix=False),
                                        a, b, cc, matrix=False)
    ad_zero = all(is_zero(mat_flat(k.ad(v))) for v in raw.values())
    module, zk = coupling_module(c)
    vals = {}
    for key, v in raw.items():
        if not la.in_span(zk, v):
            raise NotCentral("obstruction cochain leaves ZK", witness=key)
        vals[key] = _coords_in(zk, v)
    co = CECochain(g, module, 3, vals)
    closed = ce_differential(co).is_zero()
    prim = is_coboundary(co) if module.dim else []
    return CouplingObstruction(co, raw, lam, zk, ad_zero, closed, prim)


def random_relift(d: DerivationLaw, rng: random.Random, scale: int = 3
                  ) -> tuple[DerivationLaw, dict[tuple[int, int], Vec]]:
    """A random other derivation law and curvature lift for the same coupling."""
    c = d.coupling
    k, g = c.k, c.gbar
    beta = [[Fraction(rng.randint(-scale, scale)) for _ in range(k.dim)] for _ in range(g.dim)]
    d2 = shifted_law(d, beta)
    curv = curvature(d2)
    zk = span_basis(k.center(), k.dim)
    lam = {}
    for key, v in curv.ad_preimages.items():
        z = vzero(k.dim)
        for b in zk:
            z = vadd(z, vscale(rng.randint(-scale, scale), b))
        lam[key] = vadd(v, z)
    return d2, lam


def classes_equal_ce(a: CECochain, b: CECochain) -> bool:
    diff = CECochain(a.algebra, a.module, a.degree,
                     {s: vsub(a.values.get(s, vzero(a.module.dim)), b.values.get(s, vzero(a.module.dim)))
                      for s in set(a.values) | set(b.values)})
    return a.module.dim == 0 or is_coboundary(diff) is not None


def extension_exists_oracle(d: DerivationLaw) -> Vec | None:
    """Independent check: solve for omega: /\\^2 gbar -> k making
    [X+V, Y+W] = [X,Y] + (nabla_X W - nabla_Y V + [V,W] + omega(X,Y))
    a Lie bracket on gbar + k.  Jacobi is affine in omega.
    """
    c = d.coupling
    g, k = c.gbar, c.k
    pairs = list(itertools.combinations(range(g.dim), 2))
    nvar = len(pairs) * k.dim

    def jacobiators(omega: Vec) -> Vec:
        om = {p: omega[t * k.dim:(t + 1) * k.dim] for t, p in enumerate(pairs)}
        alg = _extension_algebra(d, om)
        out = []
        n = alg.dim
        for i, j, l in itertools.combinations(range(n), 3):
            e = [unit(n, t) for t in (i, j, l)]
            s = vadd(vadd(alg.bracket(alg.bracket(e[0], e[1]), e[2]),
                          alg.bracket(alg.bracket(e[1], e[2]), e[0])),
                     alg.bracket(alg.bracket(e[2], e[0]), e[1]))
            out += s
        return out

    j0 = jacobiators(vzero(nvar))
    if nvar == 0:
        return [] if is_zero(j0) else None
    cols = [vsub(jacobiators(unit(nvar, t)), j0) for t in range(nvar)]
    mat = columns_to_matrix(cols, len(j0))
    if not mat:
        return vzero(nvar)
    return la.solve(mat, vscale(-1, j0), cols=nvar)


def _extension_algebra(d: DerivationLaw, omega: dict) -> LieAlgebra:
    c = d.coupling
    g, k = c.gbar, c.k
    gn = g.dim
    br = []
    for i, j in itertools.combinations(range(gn), 2):
        br.append((i, j, list(g.c[i][j]) + list(omega.get((i, j), vzero(k.dim)))))
    for i in range(gn):
        for v in range(k.dim):
            br.append((i, gn + v, vzero(gn) + la.matvec(d.nabla[i], unit(k.dim, v))))
    for v, w in itertools.combinations(range(k.dim), 2):
        br.append((gn + v, gn + w, vzero(gn) + k.c[v][w]))
    return LieAlgebra(list(g.basis) + [f"k_{b}" for b in k.basis], br, check=False)


# --- other constructions ---------------------------------------------------------

def adjoint_quotient_xmod(a: LieAlgebra, l_basis: Sequence[Vec]) -> tuple[LieXMod, XModReport, Quotient]:
    """<L, ad, A/ZL, rho> for an ideal L of A."""
    n = a.dim
    lb = span_basis(l_basis, n)
    if not a.is_ideal(lb):
        raise NotAnIdeal("L is not an ideal of A")
    # L as an algebra in the basis lb
    lbr = []
    for i, j in itertools.combinations(range(len(lb)), 2):
        lbr.append((i, j, _coords_in(lb, a.bracket(lb[i], lb[j]))))
    L = LieAlgebra([f"l{i}" for i in range(len(lb))], lbr, name="L")
    zl = [la.matvec(columns_to_matrix(lb, n), z) if lb else [] for z in L.center()]
    q = quotient_algebra(a, zl, name="A/ZL")
    qa = q.quotient
    tau = LieMap(L, qa, columns_to_matrix([q.project(v) for v in lb], qa.dim))
    rho = []
    for t in range(qa.dim):
        x = q.lift(unit(qa.dim, t))
        rho.append(columns_to_matrix([_coords_in(lb, a.bracket(x, v)) for v in lb], len(lb)))
    xm = LieXMod(L, qa, tau, rho)
    return xm, validate_liexmod(xm), q


@dataclass
class LieExtension:
    k: LieAlgebra
    a: LieAlgebra
    abar: LieAlgebra
    iota: LieMap
    pi: LieMap


def xmod_from_extension_with_ideal(ext: LieExtension, i_basis: Sequence[Vec]
                                   ) -> tuple[LieXMod, XModReport]:
    k, a = ext.k, ext.a
    inj = len(ext.iota.kernel()) == 0
    surj = len(ext.pi.image()) == ext.abar.dim
    imi = span_basis(matrix_columns(ext.iota.matrix, k.dim), a.dim)
    kerp = span_basis(ext.pi.kernel(), a.dim)
    if not (inj and surj and imi == kerp):
        raise NotExact("sequence is not exact")
    zk = span_basis(k.center(), k.dim)
    ib = span_basis(i_basis, k.dim)
    if not all(la.in_span(zk, v) for v in ib):
        raise NotCentral("I is not contained in ZK")
    ii = [ext.iota(v) for v in ib]
    q = quotient_algebra(a, ii, name="A/I") if ii else quotient_algebra(a, [], name="A")
    tau = LieMap(k, q.quotient, columns_to_matrix([q.project(ext.iota(unit(k.dim, v)))
                                                    for v in range(k.dim)], q.quotient.dim))
    imat = columns_to_matrix(matrix_columns(ext.iota.matrix, k.dim), a.dim)
    rho = []
    for t in range(q.quotient.dim):
        x = q.lift(unit(q.quotient.dim, t))
        cols = [la.solve(imat, a.bracket(x, ext.iota(unit(k.dim, v))), cols=k.dim)
                for v in range(k.dim)]
        rho.append(columns_to_matrix(cols, k.dim))
    xm = LieXMod(k, q.quotient, tau, rho)
    return xm, validate_liexmod(xm)


def extension_from_algebra(a: LieAlgebra, ideal: Sequence[Vec]) -> LieExtension:
    """The extension I >-> A ->> A/I for an ideal given by basis vectors."""
    ib = span_basis(ideal, a.dim)
    kbr = []
    for i, j in itertools.combinations(range(len(ib)), 2):
        kbr.append((i, j, _coords_in(ib, a.bracket(ib[i], ib[j]))))
    k = LieAlgebra([f"k{i}" for i in range(len(ib))], kbr, name="K")
    q = quotient_algebra(a, ib)
    iota = LieMap(k, a, columns_to_matrix(ib, a.dim))
    pi = LieMap(a, q.quotient, q.projection_matrix())
    return LieExtension(k, a, q.quotient, iota, pi)


# --- random couplings ----------------------------------------------------------

def random_coupling(rng: random.Random, gbar: LieAlgebra, k: LieAlgebra,
                    der: DerivationData | None = None, scale: int = 2) -> Coupling:
    """A random Lie morphism gbar -> OutDer(k).

    Images are chosen basis element by basis element; the constraints
    [X_i, X_j] = sum_k c_ij^k X_k with k <= j are linear in X_j.  The basis
    of gbar must be triangular in that sense (true for the standard
    solvable and abelian algebras used here).
    """
    der = der or DerivationData(k)
    out = der.outder_algebra()
    m = out.dim
    xs: list[Vec] = []
    for j in range(gbar.dim):
        rows, rhs = [], []
        for i in range(j):
            if any(gbar.c[i][j][t] for t in range(j + 1, gbar.dim)):
                raise AxiomViolation("gbar basis is not triangular")
            adx = out.ad(xs[i])
            cjj = gbar.c[i][j][j]
            for r in range(m):
                rows.append([adx[r][s] - (cjj if r == s else 0) for s in range(m)])
            target = vzero(m)
            for t in range(j):
                if gbar.c[i][j][t]:
                    target = vadd(target, vscale(gbar.c[i][j][t], xs[t]))
            rhs += target
        if not rows:
            xs.append([Fraction(rng.randint(-scale, scale)) for _ in range(m)])
            continue
        part = la.solve(rows, rhs, cols=m)
        if part is None:
            part = vzero(m)  # fall back to the zero image for this generator
            if not is_zero(rhs):
                xs.append(part)
                continue
        x = list(part)
        for b in la.nullspace(rows, cols=m):
            x = vadd(x, vscale(rng.randint(-scale, scale), b))
        xs.append(x)
    try:
        return Coupling(gbar, k, xs, der)
    except AxiomViolation:
        return Coupling(gbar, k, [vzero(m) for _ in range(gbar.dim)], der)


def random_law(rng: random.Random, c: Coupling, scale: int = 2) -> DerivationLaw:
    beta = [[Fraction(rng.randint(-scale, scale)) for _ in range(c.k.dim)] for _ in range(c.gbar.dim)]
    return shifted_law(lift_coupling(c), beta)


def coupling_into(rng: random.Random, gbar: LieAlgebra, k: LieAlgebra, targets: Sequence[Vec],
                  der: DerivationData | None = None, scale: int = 2) -> Coupling:
    """Random linear combinations of fixed OutDer vectors (spanning an abelian
    subalgebra) as the images of an abelian gbar."""
    der = der or DerivationData(k)
    xs = []
    for _ in range(gbar.dim):
        x = vzero(der.n_out)
        for t in targets:
            x = vadd(x, vscale(rng.randint(-scale, scale), t))
        xs.append(x)
    return Coupling(gbar, k, xs, der)


def law_corpus(seed: int = 0, count: int = 100) -> list[DerivationLaw]:
    """Deterministic mix of derivation laws with dim gbar <= 3, dim k <= 4.

    Every third law maps Q^3 into the abelian subalgebra of OutDer(h3 + Q)
    spanned by the derivations moving w into the centre and x, y into w; those
    typically carry a nonvanishing obstruction.
    """
    rng = random.Random(seed)
    ks = [heisenberg(), filiform4(), direct_sum(heisenberg(), abelian(1, "w")),
          direct_sum(nonabelian2(), abelian(2, "w"))]
    gs = [abelian(1), abelian(2), abelian(3), nonabelian2(),
          direct_sum(nonabelian2(), abelian(1, "w"))]
    ders = [DerivationData(k) for k in ks]
    hq, hq_der = ks[2], ders[2]
    special = _hq_targets(hq, hq_der)
    laws = []
    for n in range(count):
        if n % 3 == 2:
            c = coupling_into(rng, gs[2], hq, special, hq_der)
        else:
            i = n % len(ks)
            c = random_coupling(rng, gs[(n // 3) % len(gs)], ks[i], ders[i])
        laws.append(random_law(rng, c))
    return laws


def _hq_targets(k: LieAlgebra, der: DerivationData) -> list[Vec]:
    # basis x, y, z, w with [x, y] = z: D1 w = z, D2 x = w, D3 y = w
    def m(pairs):
        mat = mat_zero(4)
        for src, dst in pairs:
            mat[dst][src] = ONE
        return mat
    mats = [m([(3, 2)]), m([(0, 3)]), m([(1, 3)])]
    return [der.out_class(x) for x in mats]
