"""Semifree dg-modules over a cdga presentation.

A module ``R ⊗ V`` is stored through its generators ``v_j`` and their
differentials.  Elements are dicts ``{(ring_monomial, j): scalar}`` meaning
``Σ c · r v_j``.  The same labels form the Q-basis used by the Hochschild
layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rht.errors import InfiniteRank, NotAChainMap, UnsupportedModel, ValidationError
from rht.exactlin import (
    ONE,
    ZERO,
    SparseMatrix,
    homology,
    invert_homology_iso,
    kernel_basis,
    rank,
    rref_rows,
    scalar,
    solve,
    vadd,
)
from rht.gca import CdgaMorphism, CheckReport, Presentation


def _sgn(e) -> int:
    return -1 if e % 2 else 1


class SemifreeModule:
    """A semifree module ``R ⊗ V`` with a triangular differential.

    ``differential`` maps a generator (name or index) to an element, either as
    ``{(ring_monomial, index): c}`` or as ``{generator_name: polynomial}``.
    ``d(v_j)`` may only involve generators listed before ``v_j``.
    """

    is_ring = False

    def __init__(self, ring: Presentation, generators, differential=None, name="M"):
        self.ring = ring
        self.name = name
        self.gen_names = tuple(g for g, _ in generators)
        self.degs = tuple(int(d) for _, d in generators)
        self.rank = len(self.degs)
        if len(set(self.gen_names)) != self.rank:
            raise ValidationError(f"{name}: duplicate module generator names")
        self.index = {g: j for j, g in enumerate(self.gen_names)}
        diff = dict(differential or {})
        self.dgen = []
        for j, g in enumerate(self.gen_names):
            raw = diff.pop(g, None)
            if raw is None:
                raw = diff.pop(j, {})
            elem = self._coerce(raw)
            for (r, i), _c in elem.items():
                if i >= j:
                    raise ValidationError(f"{name}: d({g}) involves {self.gen_names[i]}, not an earlier generator")
                if ring.mono_degree(r) + self.degs[i] != self.degs[j] + 1:
                    raise ValidationError(f"{name}: d({g}) is not homogeneous of degree {self.degs[j] + 1}")
            self.dgen.append(elem)
        if diff:
            raise ValidationError(f"{name}: differential for unknown generators {sorted(map(str, diff))}")
        self.lo = min(self.degs) if self.rank else 0
        self.unit_mono = ring.unit
        self._actions: dict = {}
        self._basis: dict = {}
        self._bindex: dict = {}
        self._d: dict = {}
        self._act: dict = {}

    def _coerce(self, raw) -> dict:
        out: dict = {}
        for k, v in raw.items():
            if isinstance(k, str):
                j = self.index[k]
                for m, c in v.items():
                    vadd(out, {(tuple(m), j): scalar(c)})
            else:
                r, j = k
                vadd(out, {(tuple(r), j): scalar(v)})
        return out

    # -- bases -------------------------------------------------------------
    def gen_elem(self, j) -> dict:
        if isinstance(j, str):
            j = self.index[j]
        return {(self.unit_mono, j): ONE}

    def basis(self, n: int):
        hit = self._basis.get(n)
        if hit is None:
            out = []
            for j, dj in enumerate(self.degs):
                if n - dj >= 0:
                    out.extend((r, j) for r in self.ring.basis(n - dj))
            hit = tuple(out)
            self._basis[n] = hit
            self._bindex[n] = {b: i for i, b in enumerate(hit)}
        return hit

    def basis_index(self, n: int) -> dict:
        self.basis(n)
        return self._bindex[n]

    def degree(self, label) -> int:
        r, j = label
        return self.ring.mono_degree(r) + self.degs[j]

    def label_str(self, label) -> str:
        r, j = label
        rs = self.ring.mono_str(r)
        g = self.gen_names[j]
        if rs == "1":
            return g
        if g == "1":
            return rs
        return f"{rs}·{g}"

    def elem_str(self, elem) -> str:
        from rht.exactlin import fmt

        if not elem:
            return "0"
        parts = []
        for lab in sorted(elem, key=lambda b: (self.degree(b), b[1], tuple(-e for e in b[0]))):
            c = elem[lab]
            s = self.label_str(lab)
            parts.append(s if c == 1 else f"-{s}" if c == -1 else f"{fmt(c)}*{s}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- structure ---------------------------------------------------------
    def rmul(self, r, elem) -> dict:
        """``r · elem`` for a ring monomial ``r``."""
        out: dict = {}
        mul = self.ring.mul_mono
        for (r2, j), c in elem.items():
            res = mul(r, r2)
            if res is None:
                continue
            s, m = res
            vadd(out, {(m, j): c if s > 0 else -c})
        return out

    def rmul_poly(self, p: dict, elem) -> dict:
        out: dict = {}
        for r, c in p.items():
            vadd(out, self.rmul(r, elem), c)
        return out

    def d(self, label) -> dict:
        hit = self._d.get(label)
        if hit is not None:
            return hit
        r, j = label
        out: dict = {}
        for m, c in self.ring.d_mono(r).items():
            vadd(out, {(m, j): c})
        if self.dgen[j]:
            vadd(out, self.rmul(r, self.dgen[j]), scalar(_sgn(self.ring.mono_degree(r))))
        self._d[label] = out
        return out

    def d_elem(self, elem) -> dict:
        out: dict = {}
        for lab, c in elem.items():
            vadd(out, self.d(lab), c)
        return out

    def d_matrix(self, n: int) -> SparseMatrix:
        src = self.basis(n)
        self.basis(n + 1)
        idx = self._bindex[n + 1]
        return SparseMatrix(len(idx), len(src), [{idx[k]: v for k, v in self.d(b).items()} for b in src])

    def elem_vector(self, elem, n) -> dict:
        idx = self.basis_index(n)
        return {idx[k]: v for k, v in elem.items()}

    def vector_elem(self, vec, n) -> dict:
        b = self.basis(n)
        return {b[i]: v for i, v in vec.items()}

    # -- actions -----------------------------------------------------------
    def install_action(self, S: Presentation, phi: CdgaMorphism, table):
        """Strict left action of ``S``: ``table[g][j]`` is ``g · v_j``."""
        if phi.source is not self.ring or phi.target is not S:
            raise ValidationError(f"{self.name}: action map must go from {self.ring.name} to {S.name}")
        tab = []
        for g in range(S.ngens):
            row = []
            for j in range(self.rank):
                elem = self._coerce(table[g][j])
                for lab in elem:
                    if self.degree(lab) != S.degrees[g] + self.degs[j]:
                        raise ValidationError(f"{self.name}: action of {S.gen_names[g]} on {self.gen_names[j]} has wrong degree")
                row.append(elem)
            tab.append(row)
        self._actions[id(S)] = (S, phi, tab)

    def has_action(self, S) -> bool:
        return S is self.ring or id(S) in self._actions

    def _act_gen(self, tab, g, elem, gdeg) -> dict:
        out: dict = {}
        for (r, j), c in elem.items():
            img = tab[g][j]
            if not img:
                continue
            s = -c if (gdeg * self.ring.mono_degree(r)) % 2 else c
            vadd(out, self.rmul(r, img), s)
        return out

    def act(self, ring, a, label) -> dict:
        """Left action of the monomial ``a`` of ``ring`` on a basis label."""
        if ring is self.ring:
            return self.rmul(a, {label: ONE})
        key = (id(ring), a, label)
        hit = self._act.get(key)
        if hit is not None:
            return hit
        try:
            S, _phi, tab = self._actions[id(ring)]
        except KeyError:
            raise ValidationError(f"{self.name} carries no action of {ring.name}") from None
        elem = {label: ONE}
        for g in range(S.ngens - 1, -1, -1):
            for _ in range(a[g]):
                elem = self._act_gen(tab, g, elem, S.degrees[g])
                if not elem:
                    break
        self._act[key] = elem
        return elem

    def act_left(self, ring, a, label) -> dict:
        return self.act(ring, a, label)

    def act_right(self, ring, label, a) -> dict:
        """Right action induced by graded commutativity."""
        out = self.act(ring, a, label)
        if (ring.mono_degree(a) * self.degree(label)) % 2:
            return {k: -v for k, v in out.items()}
        return out

    def act_elem(self, ring, a, elem) -> dict:
        out: dict = {}
        for lab, c in elem.items():
            vadd(out, self.act(ring, a, lab), c)
        return out

    def act_poly(self, ring, p, elem) -> dict:
        out: dict = {}
        for a, c in p.items():
            vadd(out, self.act_elem(ring, a, elem), c)
        return out

    def check_action(self, S: Presentation) -> CheckReport:
        """Strictness of the installed ``S``-action on generators."""
        rep = CheckReport(f"{S.name}-action on {self.name}")
        _S, phi, _tab = self._actions[id(S)]
        R = self.ring
        for j in range(self.rank):
            v = self.gen_elem(j)
            for i in range(R.ngens):
                rep.checked += 1
                lhs = self.act_poly(S, phi.images[i], v)
                rhs = self.rmul(R.gen(i), v)
                if lhs != rhs:
                    rep.fail(f"{phi.name}({R.gen_names[i]}) and {R.gen_names[i]} act differently on {self.gen_names[j]}")
            for g in range(S.ngens):
                gv = self.act(S, S.gen(g), (self.unit_mono, j))
                for h in range(g, S.ngens):
                    rep.checked += 1
                    hg = self.act_elem(S, S.gen(h), gv)
                    gh = self.act_elem(S, S.gen(g), self.act(S, S.gen(h), (self.unit_mono, j)))
                    sign = _sgn(S.degrees[g] * S.degrees[h])
                    if vadd(dict(gh), hg, scalar(-sign)):
                        rep.fail(f"{S.gen_names[g]} and {S.gen_names[h]} do not graded-commute on {self.gen_names[j]}")
                rep.checked += 1
                lhs = self.d_elem(gv)
                rhs = self.act_poly(S, S.diff[g], v)
                vadd(rhs, self.act_elem(S, S.gen(g), self.d_elem(v)), scalar(_sgn(S.degrees[g])))
                if vadd(dict(lhs), rhs, -ONE):
                    rep.fail(f"Leibniz fails for {S.gen_names[g]} on {self.gen_names[j]}")
        return rep

    # -- checks ------------------------------------------------------------
    def check_d_squared(self, cutoff=None) -> CheckReport:
        rep = CheckReport(f"d^2 on {self.name}")
        for j in range(self.rank):
            if cutoff is not None and self.degs[j] + 2 > cutoff + 1:
                continue
            rep.checked += 1
            dd = self.d_elem(self.dgen[j])
            if dd:
                rep.fail(f"d(d({self.gen_names[j]})) != 0", self.elem_str(dd))
        return rep

    def is_triangular(self) -> bool:
        return all(i < j for j, e in enumerate(self.dgen) for (_r, i) in e)

    def is_minimal(self) -> bool:
        return all(self.ring.mono_degree(r) >= 1 for e in self.dgen for (r, _i) in e)

    def __repr__(self):
        gens = ", ".join(f"{g}:{d}" for g, d in zip(self.gen_names, self.degs))
        return f"SemifreeModule({self.name} over {self.ring.name}; {gens})"


def ring_module(R: Presentation) -> SemifreeModule:
    """``R`` as a free module of rank one on ``1``."""
    M = SemifreeModule(R, [("1", 0)], name=R.name)
    M.is_ring = True
    return M


def module_basis_in_degree(M: SemifreeModule, n: int):
    return list(M.basis(n))


# ---------------------------------------------------------------------------
# maps


class ModuleMap:
    """R-linear map of degree ``degree`` given on generators."""

    def __init__(self, source: SemifreeModule, target: SemifreeModule, images, degree=0, name="f"):
        if source.ring is not target.ring:
            raise ValidationError("module maps must be over one ring")
        self.source = source
        self.target = target
        self.degree = degree
        self.name = name
        self.images = [target._coerce(im) for im in images]

    def apply(self, elem) -> dict:
        out: dict = {}
        R = self.source.ring
        for (r, j), c in elem.items():
            if (self.degree * R.mono_degree(r)) % 2:
                c = -c
            vadd(out, self.target.rmul(r, self.images[j]), c)
        return out

    def matrix(self, n: int) -> SparseMatrix:
        src = self.source.basis(n)
        idx = self.target.basis_index(n + self.degree)
        cols = [{idx[k]: v for k, v in self.apply({b: ONE}).items()} for b in src]
        return SparseMatrix(len(idx), len(src), cols)

    def check_chain_map(self) -> CheckReport:
        rep = CheckReport(f"chain map {self.name}")
        sign = scalar(_sgn(self.degree))
        for j in range(self.source.rank):
            rep.checked += 1
            v = self.source.gen_elem(j)
            lhs = self.target.d_elem(self.apply(v))
            rhs = self.apply(self.source.d_elem(v))
            if vadd(dict(lhs), rhs, -sign):
                rep.fail(f"d {self.name}({self.source.gen_names[j]}) != {self.name}(d ...)")
        return rep

    def is_isomorphism(self) -> bool:
        """Invertible on generators (both sides finite free, degree 0)."""
        if self.degree or self.source.rank != self.target.rank:
            return False
        degs = sorted(set(self.source.degs) | set(self.target.degs))
        for n in degs:
            mat = self.matrix(n)
            if mat.rows != mat.cols or rank(mat) != mat.rows:
                return False
        return True


def tensor_over_R(M: SemifreeModule, N: SemifreeModule, name=None) -> SemifreeModule:
    if M.ring is not N.ring:
        raise ValidationError("tensor factors must share the ring")
    R = M.ring
    gens, diff = [], {}
    for i in range(M.rank):
        for j in range(N.rank):
            gens.append((f"{M.gen_names[i]}⊗{N.gen_names[j]}", M.degs[i] + N.degs[j]))
    for i in range(M.rank):
        for j in range(N.rank):
            out: dict = {}
            for (r, k), c in M.dgen[i].items():
                vadd(out, {(r, k * N.rank + j): c})
            for (r, l), c in N.dgen[j].items():
                s = _sgn(M.degs[i] + M.degs[i] * R.mono_degree(r))
                vadd(out, {(r, i * N.rank + l): c * s})
            diff[i * N.rank + j] = out
    T = SemifreeModule(R, gens, diff, name=name or f"{M.name}⊗{N.name}")
    T.factors = (M, N)
    return T


class HomModule(SemifreeModule):
    """``Hom_R(M, N)`` for finite free ``M``, free on the maps ``f_ij: v_i ↦ w_j``.

    Generators are ordered by ``i`` descending, then ``j`` ascending, which
    makes the differential ``d f = d ∘ f - (-1)^{|f|} f ∘ d`` triangular.
    Left actions come from ``N``, right actions from ``M``.
    """

    def __init__(self, M: SemifreeModule, N: SemifreeModule, name=None):
        if M.ring is not N.ring:
            raise ValidationError("Hom over different rings")
        R = M.ring
        self.source = M
        self.target = N
        pairs = [(i, j) for i in range(M.rank - 1, -1, -1) for j in range(N.rank)]
        self.pairs = pairs
        self.pair_index = {p: g for g, p in enumerate(pairs)}
        gens = []
        for i, j in pairs:
            if N.is_ring:
                nm = f"∨{M.gen_names[i]}"
            else:
                nm = f"{N.gen_names[j]}⊗∨{M.gen_names[i]}"
            gens.append((nm, N.degs[j] - M.degs[i]))
        diff = {}
        for g, (i, j) in enumerate(pairs):
            fdeg = N.degs[j] - M.degs[i]
            out: dict = {}
            for (r, l), c in N.dgen[j].items():
                vadd(out, {(r, self.pair_index[(i, l)]): c})
            for k in range(M.rank):
                for (r, i2), c in M.dgen[k].items():
                    if i2 != i:
                        continue
                    s = -_sgn(fdeg + fdeg * R.mono_degree(r))
                    vadd(out, {(r, self.pair_index[(k, j)]): c * s})
            diff[g] = out
        super().__init__(R, gens, diff, name=name or f"Hom({M.name},{N.name})")

    def values(self, f_elem) -> list:
        """``[f(v_i)]`` as elements of ``N``."""
        vals = [dict() for _ in range(self.source.rank)]
        for (r, g), c in f_elem.items():
            i, j = self.pairs[g]
            vadd(vals[i], {(r, j): c})
        return vals

    def from_values(self, vals) -> dict:
        out: dict = {}
        for i, v in enumerate(vals):
            for (r, j), c in v.items():
                vadd(out, {(r, self.pair_index[(i, j)]): c})
        return out

    def evaluate(self, f_elem, m_elem) -> dict:
        """``f(m)`` with ``f(r v) = (-1)^{|f||r|} r f(v)``."""
        vals = self.values(f_elem)
        out: dict = {}
        R = self.ring
        for lab, c in f_elem.items():
            fdeg = self.degree(lab)
            break
        else:
            return out
        for (r, i), c in m_elem.items():
            if vals[i]:
                s = _sgn(fdeg * R.mono_degree(r))
                vadd(out, self.target.rmul(r, vals[i]), c * s)
        return out

    def act(self, ring, a, label) -> dict:
        if ring is self.ring:
            return super().act(ring, a, label)
        key = (id(ring), a, label)
        hit = self._act.get(key)
        if hit is None:
            vals = self.values({label: ONE})
            hit = self.from_values([self.target.act_elem(ring, a, v) for v in vals])
            self._act[key] = hit
        return hit

    def act_right(self, ring, label, a) -> dict:
        if ring is self.ring:
            return super().act_right(ring, label, a)
        key = ("r", id(ring), a, label)
        hit = self._act.get(key)
        if hit is None:
            f = {label: ONE}
            M = self.source
            vals = [self.evaluate(f, M.act(ring, a, (M.unit_mono, k))) for k in range(M.rank)]
            hit = self.from_values(vals)
            self._act[key] = hit
        return hit


def hom_over_R(M: SemifreeModule, N: SemifreeModule, name=None) -> HomModule:
    return HomModule(M, N, name=name)


def dual(M: SemifreeModule) -> HomModule:
    """``∨M = Hom_R(M, R)`` on the dual generators ``∨v`` of degree ``-|v|``."""
    return HomModule(M, ring_module(M.ring), name=f"∨{M.name}")


def biduality_map(M: SemifreeModule):
    """Canonical ``M -> ∨∨M``, ``v ↦ (α ↦ (-1)^{|α||v|} α(v))``; returns ``(map, ∨∨M)``."""
    D = dual(M)
    DD = dual(D)
    images = []
    for i in range(M.rank):
        vals = []
        for g in range(D.rank):
            alpha = D.gen_elem(g)
            ev = D.evaluate(alpha, M.gen_elem(i))
            s = _sgn(D.degs[g] * M.degs[i])
            vals.append({k: v * s for k, v in ev.items()})
        images.append(DD.from_values(vals))
    return ModuleMap(M, DD, images, name="bidual"), DD


def hom_from_tensor(N: SemifreeModule, M: SemifreeModule):
    """``N ⊗_R ∨M -> Hom_R(M, N)``, ``n ⊗ α ↦ n · α(-)``; returns the map."""
    D = dual(M)
    src = tensor_over_R(N, D)
    tgt = HomModule(M, N)
    images = []
    for a in range(N.rank):
        for g in range(D.rank):
            alpha = D.gen_elem(g)
            vals = []
            for k in range(M.rank):
                ev = D.evaluate(alpha, M.gen_elem(k))  # element of R-as-module
                # n · r = (-1)^{|n||r|} r n
                out: dict = {}
                for (r, _z), c in ev.items():
                    s = _sgn(N.degs[a] * M.ring.mono_degree(r))
                    vadd(out, N.rmul(r, N.gen_elem(a)), c * s)
                vals.append(out)
            images.append(tgt.from_values(vals))
    return ModuleMap(src, tgt, images, name="hom_from_tensor")


def scalar_ext_compare(M: SemifreeModule, P: SemifreeModule):
    """``M ⊗_R P -> Hom_R(∨P, M)``, ``m ⊗ p ↦ (α ↦ (-1)^{|α||p|} m α(p))``."""
    D = dual(P)
    src = tensor_over_R(M, P)
    tgt = HomModule(D, M)
    R = M.ring
    images = []
    for a in range(M.rank):
        for j in range(P.rank):
            vals = []
            for g in range(D.rank):
                ev = D.evaluate(D.gen_elem(g), P.gen_elem(j))
                s0 = _sgn(D.degs[g] * P.degs[j])
                out: dict = {}
                for (r, _z), c in ev.items():
                    s = s0 * _sgn(M.degs[a] * R.mono_degree(r))
                    vadd(out, M.rmul(r, M.gen_elem(a)), c * s)
                vals.append(out)
            images.append(tgt.from_values(vals))
    return ModuleMap(src, tgt, images, name="scalar_ext")


# ---------------------------------------------------------------------------
# resolutions


@dataclass
class Resolution:
    """Minimal semifree model ``q: M -> S`` of ``S`` as an ``R``-module."""

    phi: CdgaMorphism
    module: SemifreeModule
    q: list
    unit_lift: dict
    cutoff: int
    finite: bool
    stabilization_degree: int
    added: list = field(default_factory=list)
    qiso_degrees: list = field(default_factory=list)

    @property
    def flag(self) -> str:
        return "FINITE" if self.finite else "NOT-FINITE-AT-CUTOFF"

    def q_label(self, label) -> dict:
        r, j = label
        return self.phi.target.multiply(self.phi.apply_mono(r), self.q[j])

    def q_elem(self, elem) -> dict:
        out: dict = {}
        for lab, c in elem.items():
            vadd(out, self.q_label(lab), c)
        return out

    def q_matrix(self, n: int) -> SparseMatrix:
        S = self.phi.target
        idx = {m: i for i, m in enumerate(S.basis(n))}
        src = self.module.basis(n)
        return SparseMatrix(len(idx), len(src), [{idx[k]: v for k, v in self.q_label(b).items()} for b in src])


def _s_slice(S: Presentation, n: int):
    d_in = S.d_matrix(n - 1) if n >= 1 else SparseMatrix(len(S.basis(n)), 0)
    return homology(d_in, S.d_matrix(n))


def _poly_of(S, vec, n):
    b = S.basis(n)
    return {b[i]: v for i, v in vec.items()}


def _vec_of(S, poly, n):
    idx = {m: i for i, m in enumerate(S.basis(n))}
    return {idx[m]: c for m, c in poly.items()}


def semifree_resolution(phi: CdgaMorphism, cutoff: int) -> Resolution:
    """Minimal semifree resolution of ``S`` over ``R`` built degree by degree."""
    R, S = phi.source, phi.target
    gens: list = []
    dgen: dict = {}
    q: list = []
    added: list = []
    qiso: list = []

    def build():
        return SemifreeModule(R, gens, dict(dgen), name=f"{S.name}/{R.name}")

    def name_for(poly):
        if len(poly) == 1:
            (m, c), = poly.items()
            if c == 1:
                nm = S.mono_str(m)
                if nm not in {g for g, _ in gens}:
                    return nm
        return f"v{len(gens)}"

    def add(deg, dv, qv, why):
        nm = name_for(qv)
        dgen[len(gens)] = dv
        gens.append((nm, deg))
        q.append(qv)
        added.append({"degree": deg, "name": nm, "kind": why})

    res = Resolution(phi, build(), q, {}, cutoff, False, 0)
    for n in range(cutoff + 1):
        # hit the homology of S not yet reached
        M = build()
        res.module = M
        HS = _s_slice(S, n)
        Zm = kernel_basis(M.d_matrix(n))
        rows = []
        for col in Zm.columns():
            qv = _vec_of(S, res.q_elem(M.vector_elem(col, n)), n)
            rows.append({i: v for i, v in enumerate(HS.project(qv)) if v})
        span = rref_rows(rows)
        for h in range(HS.dim):
            probe = {h: ONE}
            for p in sorted(span):
                c = probe.get(p)
                if c:
                    vadd(probe, span[p], -c)
            if probe:
                cyc = HS.cycle_basis.column(h)
                add(n, {}, _poly_of(S, cyc, n), "hit")
                span = rref_rows(list(span.values()) + [{h: ONE}])
        # kill classes of H^{n+1}(M) that die in S
        for _ in range(8):
            M = build()
            res.module = M
            HM = homology(M.d_matrix(n), M.d_matrix(n + 1))
            HS1 = _s_slice(S, n + 1)
            cols = []
            for col in HM.cycle_basis.columns():
                qv = _vec_of(S, res.q_elem(M.vector_elem(col, n + 1)), n + 1)
                cols.append({i: v for i, v in enumerate(HS1.project(qv)) if v})
            K = kernel_basis(SparseMatrix(HS1.dim, HM.dim, cols))
            if K.cols == 0:
                break
            for kv in K.columns():
                z: dict = {}
                for i, c in kv.items():
                    vadd(z, HM.cycle_basis.column(i), c)
                zel = M.vector_elem(z, n + 1)
                target = _vec_of(S, res.q_elem(zel), n + 1)
                sigma = solve(S.d_matrix(n), target)
                if sigma is None:  # pragma: no cover - guarded by the projection
                    raise NotAChainMap("kernel class does not bound in S")
                add(n, zel, _poly_of(S, sigma, n), "kill")
        M = build()
        res.module = M
        if n >= 1:
            HM = homology(M.d_matrix(n - 1), M.d_matrix(n))
        else:
            HM = homology(SparseMatrix(len(M.basis(0)), 0), M.d_matrix(0))
        HSn = _s_slice(S, n)
        ind = SparseMatrix(
            HSn.dim,
            HM.dim,
            [{i: v for i, v in enumerate(HSn.project(_vec_of(S, res.q_elem(M.vector_elem(c, n)), n))) if v} for c in HM.cycle_basis.columns()],
        )
        if HM.dim == HSn.dim and rank(ind) == HSn.dim:
            qiso.append(n)
    res.module = build()
    res.q = q
    res.added = added
    res.qiso_degrees = qiso
    last = max((a["degree"] for a in added), default=0)
    maxgen = max(list(R.degrees) + list(S.degrees) + [1])
    res.stabilization_degree = last + 1
    res.finite = cutoff - last >= maxgen + 1 and len(qiso) == cutoff + 1
    M = res.module
    u = solve(res.q_matrix(0), {S.basis(0).index(S.unit): ONE}) if M.basis(0) else None
    res.unit_lift = M.vector_elem(u, 0) if u is not None else {}
    return res


# ---------------------------------------------------------------------------
# strict module models


@dataclass
class ModuleModel:
    """A finite free ``R``-module with a strict ``S``-action modelling ``S``.

    ``kind`` is ``"free"`` when the minimal resolution is an isomorphism onto
    ``S`` (the action is transported) and ``"truncated"`` for ``R = Q`` with
    ``S`` replaced by a finite-dimensional quotient cdga.
    """

    phi: CdgaMorphism
    module: SemifreeModule
    unit: dict
    kind: str
    resolution: Resolution
    notes: list = field(default_factory=list)

    @property
    def R(self):
        return self.phi.source

    @property
    def S(self):
        return self.phi.target


def _transport_model(phi, res, bound):
    R, S = phi.source, phi.target
    M = res.module
    inverses = {}
    for n in range(bound + 1):
        qm = res.q_matrix(n)
        if qm.rows != qm.cols or (qm.rows and rank(qm) != qm.rows):
            return None
    table = []
    for g in range(S.ngens):
        row = []
        for j in range(M.rank):
            n = S.degrees[g] + M.degs[j]
            if n not in inverses:
                qm = res.q_matrix(n)
                inverses[n] = invert_homology_iso(qm) if qm.rows else qm
            img = S.multiply({S.gen(g): ONE}, res.q[j])
            vec = inverses[n].apply(_vec_of(S, img, n)) if img else {}
            row.append(M.vector_elem(vec, n))
        table.append(row)
    M.install_action(S, phi, table)
    return ModuleModel(phi, M, res.unit_lift, "free", res)


def _truncated_model(phi, res):
    R, S = phi.source, phi.target
    top = max((a["degree"] for a in res.added), default=0)
    # basis of the quotient: monomials below ``top``, cycles in degree ``top``
    Z = kernel_basis(S.d_matrix(top))
    levels = {}
    for n in range(top):
        levels[n] = [({m: ONE}, S.mono_str(m)) for m in S.basis(n)]
    zl = []
    for k, col in enumerate(Z.columns()):
        p = _poly_of(S, col, top)
        nm = S.poly_str(p)
        if len(p) > 1:
            nm = f"({nm})"
        zl.append((p, nm))
    levels[top] = zl
    # projection S^top -> span(Z) along a monomial complement
    nb = len(S.basis(top))
    chosen = [dict(c) for c in Z.columns()]
    span = rref_rows([dict(c) for c in chosen])
    for i in range(nb):
        probe = {i: ONE}
        for p in sorted(span):
            c = probe.get(p)
            if c:
                vadd(probe, span[p], -c)
        if probe:
            chosen.append({i: ONE})
            span = rref_rows(list(span.values()) + [{i: ONE}])
    change = invert_homology_iso(SparseMatrix(nb, nb, chosen)) if nb else None
    gens, where = [], {}
    for n in sorted(levels, reverse=True):
        for k, (_p, nm) in enumerate(levels[n]):
            where[(n, k)] = len(gens)
            gens.append((nm if nm not in {g for g, _ in gens} else f"{nm}#{n}.{k}", n))
    unit = R.unit

    def coords(poly, n):
        """Element of the quotient represented by the polynomial ``poly``."""
        if n > top or not poly:
            return {}
        if n < top:
            idx = {m: k for k, m in enumerate(S.basis(n))}
            return {(unit, where[(n, idx[m])]): c for m, c in poly.items()}
        v = change.apply(_vec_of(S, poly, n))
        return {(unit, where[(n, k)]): c for k, c in v.items() if k < len(zl)}

    diff = {}
    for n in levels:
        for k, (p, _nm) in enumerate(levels[n]):
            diff[where[(n, k)]] = coords(S.apply_d(p), n + 1)
    M = SemifreeModule(R, gens, diff, name=f"{S.name}≤{top}")
    table = []
    for g in range(S.ngens):
        row = [None] * len(gens)
        for n in levels:
            for k, (p, _nm) in enumerate(levels[n]):
                row[where[(n, k)]] = coords(S.multiply({S.gen(g): ONE}, p), n + S.degrees[g])
        table.append(row)
    M.install_action(S, phi, table)
    u = coords({S.unit: ONE}, 0)
    return ModuleModel(phi, M, u, "truncated", res, notes=[f"quotient by degrees > {top} and a complement of the top cycles"])


def build_module_model(phi: CdgaMorphism, cutoff: int) -> ModuleModel:
    """Strict finite model of ``S`` over ``R`` with its ``S``-action and unit."""
    R, S = phi.source, phi.target
    maxgen = max(list(R.degrees) + list(S.degrees) + [1])
    res = semifree_resolution(phi, max(cutoff, 2 * maxgen + 2))
    if not res.finite:
        raise InfiniteRank(f"{S.name} is not detected homotopically finite over {R.name} (resolution {res.flag})")
    M = res.module
    bound = max(res.cutoff, maxgen + max(M.degs, default=0))
    model = _transport_model(phi, res, bound)
    if model is None:
        if R.ngens:
            raise UnsupportedModel(
                f"{S.name} is not free over {R.name} through its minimal model; "
                "strict module models are only built for free extensions or over Q"
            )
        model = _truncated_model(phi, res)
    rep = model.module.check_action(S)
    if not rep.passed:
        raise ValidationError(f"module model action is not strict: {rep.failures[0]['what']}")
    if model.module.d_elem(model.unit):
        raise ValidationError("unit of the module model is not a cycle")
    return model


# ---------------------------------------------------------------------------
# the unit map S -> End_R(M)


class UnitMap:
    """``ν: S -> Hom_R(M, M)``, ``s ↦ (v ↦ s·v)``; ``ν(1) = id``."""

    def __init__(self, model: ModuleModel, End: HomModule = None):
        self.model = model
        self.End = End if End is not None else HomModule(model.module, model.module, name=f"End({model.module.name})")
        self._cache: dict = {}

    def apply_mono(self, s) -> dict:
        hit = self._cache.get(s)
        if hit is None:
            M = self.model.module
            S = self.model.S
            hit = self.End.from_values([M.act(S, s, (M.unit_mono, k)) for k in range(M.rank)])
            self._cache[s] = hit
        return hit

    def apply(self, poly) -> dict:
        out: dict = {}
        for s, c in poly.items():
            vadd(out, self.apply_mono(s), c)
        return out

    def check(self, cutoff: int) -> CheckReport:
        """Chain map and bimodule identities on monomials of degree ≤ cutoff."""
        S = self.model.S
        E = self.End
        rep = CheckReport("unit map")
        for n in range(cutoff + 1):
            for s in S.basis(n):
                rep.checked += 1
                lhs = E.d_elem(self.apply_mono(s))
                rhs = self.apply(S.d_mono(s))
                if vadd(dict(lhs), rhs, -ONE):
                    rep.fail(f"d ν({S.mono_str(s)}) != ν(d ...)")
                for g in range(S.ngens):
                    t = S.gen(g)
                    st = S.multiply({s: ONE}, {t: ONE})
                    left = {}
                    for lab, c in self.apply_mono(t).items():
                        vadd(left, E.act(S, s, lab), c)
                    right = {}
                    for lab, c in self.apply_mono(s).items():
                        vadd(right, E.act_right(S, lab, t), c)
                    want = self.apply(st)
                    if left != want or right != want:
                        rep.fail(f"ν is not bilinear at {S.mono_str(s)}, {S.gen_names[g]}")
        return rep


def unit_map_nu(model: ModuleModel) -> UnitMap:
    return UnitMap(model)
