"""Free graded-commutative algebras over Q and cdga presentations.

A monomial is a tuple of exponents indexed by generator position; odd
generators have exponent at most one.  Polynomials are plain dicts
``{monomial: scalar}`` without zero values.  Generator order is declaration
order, and the canonical monomial order within a degree is lexicographic with
the first generator dominant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from rht.errors import DegreeError, ValidationError
from rht.exactlin import ONE, ZERO, SparseMatrix, invert_homology_iso, rank, scalar, vadd


def koszul_sign(degrees, perm) -> int:
    """Sign of reordering homogeneous factors ``a_0..a_n`` into ``a_perm[0]..``.

    Each transposition of neighbours ``a, b`` costs ``(-1)^{|a||b|}``; only
    inversions between two odd factors contribute.
    """
    odd = [degrees[p] % 2 for p in perm]
    inv = 0
    seen_odd_keys: list = []
    for pos, p in enumerate(perm):
        if odd[pos]:
            inv += sum(1 for q in seen_odd_keys if q > p)
            seen_odd_keys.append(p)
    return -1 if inv % 2 else 1


def koszul_sign_bubble(degrees, perm) -> int:
    """Same sign computed by bubble-sorting adjacent transpositions."""
    seq = list(perm)
    target_pos = {p: i for i, p in enumerate(perm)}
    # start from the identity arrangement and bubble into ``perm``
    cur = sorted(seq)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(cur) - 1):
            a, b = cur[i], cur[i + 1]
            if target_pos[a] > target_pos[b]:
                cur[i], cur[i + 1] = b, a
                if degrees[a] % 2 and degrees[b] % 2:
                    sign = -sign
                changed = True
    return sign


# ---------------------------------------------------------------------------
# polynomial helpers (dicts monomial -> scalar)


def padd(*polys) -> dict:
    out: dict = {}
    for p in polys:
        vadd(out, p)
    return out


def pscale(p: dict, c) -> dict:
    c = scalar(c)
    if not c:
        return {}
    return {m: c * v for m, v in p.items()}


class Presentation:
    """A connected cdga ``(Λ V, d)`` on finitely many generators.

    ``base`` is an optional sub-presentation whose generators form a prefix of
    this one (models a semifree extension ``k -> R``).
    """

    def __init__(self, name, generators, differential=None, base=None):
        self.name = name
        self.gen_names = tuple(g for g, _ in generators)
        self.degrees = tuple(int(d) for _, d in generators)
        self.ngens = len(self.degrees)
        self._mdeg: dict = {}
        if len(set(self.gen_names)) != self.ngens:
            raise ValidationError(f"{name}: duplicate generator names")
        for g, d in generators:
            if d < 1:
                raise DegreeError(f"{name}: generator {g} has degree {d} < 1 (connected cdgas only)")
        self.index = {g: i for i, g in enumerate(self.gen_names)}
        self.unit = (0,) * self.ngens
        self.base = base
        self.nbase = base.ngens if base is not None else 0
        diff = dict(differential or {})
        self.diff = []
        for i, g in enumerate(self.gen_names):
            p = diff.pop(g, {})
            p = {tuple(m): scalar(c) for m, c in p.items() if scalar(c)}
            for m in p:
                if len(m) != self.ngens:
                    raise ValidationError(f"{name}: monomial {m} has wrong length")
                if self.mono_degree(m) != self.degrees[i] + 1:
                    raise DegreeError(
                        f"{name}: d {g} has a term of degree {self.mono_degree(m)}, "
                        f"expected {self.degrees[i] + 1}"
                    )
                self._check_odd(m)
            self.diff.append(p)
        if diff:
            raise ValidationError(f"{name}: differential given for unknown generators {sorted(diff)}")
        if base is not None:
            if self.gen_names[: self.nbase] != base.gen_names or self.degrees[: self.nbase] != base.degrees:
                raise ValidationError(f"{name}: base generators must form a prefix")
            for i in range(self.nbase):
                lifted = {m + (0,) * (self.ngens - self.nbase): c for m, c in base.diff[i].items()}
                if lifted != self.diff[i]:
                    raise ValidationError(f"{name}: differential of base generator {self.gen_names[i]} differs")
        self._basis: dict = {}
        self._fiber_basis: dict = {}
        self._mul: dict = {}
        self._dmono: dict = {}
        self.odd = tuple(d % 2 for d in self.degrees)

    # -- monomials ---------------------------------------------------------
    def _check_odd(self, m):
        for e, o in zip(m, self.degrees):
            if o % 2 and e > 1:
                raise ValidationError(f"{self.name}: odd generator with exponent {e}")

    def mono_degree(self, m) -> int:
        hit = self._mdeg.get(m)
        if hit is None:
            hit = sum(e * d for e, d in zip(m, self.degrees))
            self._mdeg[m] = hit
        return hit

    def gen(self, name_or_index, power=1):
        i = self.index[name_or_index] if isinstance(name_or_index, str) else name_or_index
        m = [0] * self.ngens
        m[i] = power
        return tuple(m)

    def mono_str(self, m) -> str:
        parts = []
        for g, e in zip(self.gen_names, m):
            if e == 1:
                parts.append(g)
            elif e > 1:
                parts.append(f"{g}^{e}")
        return "*".join(parts) if parts else "1"

    def poly_str(self, p: dict) -> str:
        from rht.exactlin import fmt

        if not p:
            return "0"
        out = []
        for m in self.sorted_monos(p):
            c = p[m]
            ms = self.mono_str(m)
            if ms == "1":
                out.append(fmt(c))
            elif c == 1:
                out.append(ms)
            elif c == -1:
                out.append("-" + ms)
            else:
                out.append(f"{fmt(c)}*{ms}")
        return " + ".join(out).replace("+ -", "- ")

    def sorted_monos(self, monos):
        return sorted(monos, key=lambda m: (self.mono_degree(m), tuple(-e for e in m)))

    def basis(self, n: int):
        """All monomials of degree ``n`` in canonical order."""
        if n in self._basis:
            return self._basis[n]
        out = []
        if n >= 0:
            self._enum(0, n, [], out)
        out.sort(key=lambda m: tuple(-e for e in m))
        out = tuple(out)
        self._basis[n] = out
        return out

    def _enum(self, i, rest, acc, out):
        if i == self.ngens:
            if rest == 0:
                out.append(tuple(acc))
            return
        d = self.degrees[i]
        top = 1 if d % 2 else rest // d
        for e in range(min(top, rest // d) + 1):
            acc.append(e)
            self._enum(i + 1, rest - e * d, acc, out)
            acc.pop()

    def fiber_basis(self, n: int):
        """Monomials of degree ``n`` with no base generator (a k-basis of R)."""
        if n not in self._fiber_basis:
            nb = self.nbase
            self._fiber_basis[n] = tuple(m for m in self.basis(n) if not any(m[:nb]))
        return self._fiber_basis[n]

    def split_base(self, m):
        """``m = base_part * fiber_part`` (no sign: base generators come first)."""
        nb = self.nbase
        z = (0,) * nb
        return m[:nb] + (0,) * (self.ngens - nb), z + m[nb:]

    def mul_mono(self, a, b):
        """Product of two monomials as ``(sign, monomial)`` or ``None`` if zero."""
        key = (a, b)
        hit = self._mul.get(key, False)
        if hit is not False:
            return hit
        res = []
        inv = 0
        odd_after = 0  # odd generators of ``a`` strictly after the current index
        odd = self.odd
        for i in range(self.ngens - 1, -1, -1):
            e = a[i] + b[i]
            if odd[i]:
                if e > 1:
                    self._mul[key] = None
                    return None
                if b[i]:
                    inv += odd_after
                if a[i]:
                    odd_after += 1
            res.append(e)
        res.reverse()
        out = (-1 if inv % 2 else 1, tuple(res))
        self._mul[key] = out
        return out

    def multiply(self, p: dict, q: dict) -> dict:
        out: dict = {}
        for a, ca in p.items():
            for b, cb in q.items():
                r = self.mul_mono(a, b)
                if r is None:
                    continue
                s, m = r
                nv = out.get(m, ZERO) + (ca * cb if s > 0 else -(ca * cb))
                if nv:
                    out[m] = nv
                else:
                    out.pop(m, None)
        return out

    def power(self, p: dict, e: int) -> dict:
        out = {self.unit: ONE}
        for _ in range(e):
            out = self.multiply(out, p)
        return out

    # -- differential ------------------------------------------------------
    def d_mono(self, m) -> dict:
        hit = self._dmono.get(m)
        if hit is not None:
            return hit
        out: dict = {}
        deg_before = 0
        for i, e in enumerate(m):
            if not e:
                continue
            dg = self.diff[i]
            if dg:
                left = list(m[: i + 1]) + [0] * (self.ngens - i - 1)
                left[i] -= 1
                right = [0] * (i + 1) + list(m[i + 1 :])
                term = self.multiply(self.multiply({tuple(left): scalar(e)}, dg), {tuple(right): ONE})
                vadd(out, term, -ONE if deg_before % 2 else ONE)
            deg_before += e * self.degrees[i]
        self._dmono[m] = out
        return out

    def apply_d(self, p: dict) -> dict:
        out: dict = {}
        for m, c in p.items():
            vadd(out, self.d_mono(m), c)
        return out

    def is_zero_differential(self) -> bool:
        return not any(self.diff)

    def d_matrix(self, n: int) -> SparseMatrix:
        src, tgt = self.basis(n), self.basis(n + 1)
        idx = {m: i for i, m in enumerate(tgt)}
        return SparseMatrix(len(tgt), len(src), [{idx[k]: v for k, v in self.d_mono(m).items()} for m in src])

    def poly(self, text: str) -> dict:
        from rht.dsl import parse_poly

        return parse_poly(text, self)

    def __repr__(self):
        gens = ", ".join(f"{g}:{d}" for g, d in zip(self.gen_names, self.degrees))
        return f"Presentation({self.name}; {gens})"


def point(name="Q") -> Presentation:
    """The ground field Q as a presentation with no generators."""
    return Presentation(name, [])


def multiply(P: Presentation, p: dict, q: dict) -> dict:
    return P.multiply(p, q)


def apply_d(P: Presentation, p: dict) -> dict:
    return P.apply_d(p)


def basis_in_degree(P: Presentation, n: int):
    return list(P.basis(n))


@dataclass
class CheckReport:
    """Outcome of a structural check; failures are entries, never exceptions."""

    subject: str
    failures: list = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, what, detail=""):
        self.failures.append({"what": what, "detail": detail})

    def as_dict(self):
        return {"subject": self.subject, "passed": self.passed, "checked": self.checked, "failures": self.failures}


def check_d_squared(P: Presentation, cutoff: int) -> CheckReport:
    rep = CheckReport(f"d^2 on {P.name}")
    for i, g in enumerate(P.gen_names):
        if P.degrees[i] + 2 > cutoff + 1:
            continue
        rep.checked += 1
        dd = P.apply_d(P.diff[i])
        if dd:
            rep.fail(f"d(d({g})) != 0", P.poly_str(dd))
    return rep


# ---------------------------------------------------------------------------
# morphisms


class CdgaMorphism:
    """Algebra map given by the images of the source generators."""

    def __init__(self, source: Presentation, target: Presentation, images, name="f"):
        self.name = name
        self.source = source
        self.target = target
        imgs = []
        for i, g in enumerate(source.gen_names):
            if isinstance(images, dict):
                if g in images:
                    p = images[g]
                elif i < source.nbase and g in target.index:
                    p = {target.gen(g): ONE}
                else:
                    raise ValidationError(f"{name}: no image for generator {g}")
            else:
                p = images[i]
            imgs.append({tuple(m): scalar(c) for m, c in p.items() if scalar(c)})
        if isinstance(images, dict):
            extra = set(images) - set(source.gen_names)
            if extra:
                raise ValidationError(f"{name}: images given for unknown generators {sorted(extra)}")
        self.images = imgs
        self._mono: dict = {}

    def apply_mono(self, m) -> dict:
        hit = self._mono.get(m)
        if hit is not None:
            return hit
        T = self.target
        out = {T.unit: ONE}
        for i, e in enumerate(m):
            for _ in range(e):
                out = T.multiply(out, self.images[i])
        self._mono[m] = out
        return out

    def apply(self, p: dict) -> dict:
        out: dict = {}
        for m, c in p.items():
            vadd(out, self.apply_mono(m), c)
        return out

    def matrix(self, n: int) -> SparseMatrix:
        src, tgt = self.source.basis(n), self.target.basis(n)
        idx = {m: i for i, m in enumerate(tgt)}
        return SparseMatrix(len(tgt), len(src), [{idx[k]: v for k, v in self.apply_mono(m).items()} for m in src])

    def compose(self, first: "CdgaMorphism") -> "CdgaMorphism":
        """``self ∘ first``."""
        return CdgaMorphism(first.source, self.target, [self.apply(p) for p in first.images], name=f"{self.name}.{first.name}")

    @classmethod
    def identity(cls, P: Presentation):
        return cls(P, P, [{P.gen(i): ONE} for i in range(P.ngens)], name=f"id_{P.name}")

    def homogeneous(self) -> bool:
        for i, p in enumerate(self.images):
            for m in p:
                if self.target.mono_degree(m) != self.source.degrees[i]:
                    return False
        return True


def augmentation(P: Presentation) -> CdgaMorphism:
    """The unique augmentation ``P -> Q`` (all generators to zero)."""
    return CdgaMorphism(P, point(), [{} for _ in range(P.ngens)], name=f"aug_{P.name}")


def check_morphism(f: CdgaMorphism, cutoff: int) -> CheckReport:
    S, T = f.source, f.target
    rep = CheckReport(f"morphism {f.name}: {S.name} -> {T.name}")
    degree_ok = True
    for i, g in enumerate(S.gen_names):
        rep.checked += 1
        for m in f.images[i]:
            if T.mono_degree(m) != S.degrees[i]:
                rep.fail(
                    f"degree of {f.name}({g})",
                    f"{T.poly_str(f.images[i])} has degree {T.mono_degree(m)}, expected {S.degrees[i]}",
                )
                degree_ok = False
                break
    if degree_ok:
        for i, g in enumerate(S.gen_names):
            if S.degrees[i] + 1 > cutoff + 1:
                continue
            rep.checked += 1
            lhs = T.apply_d(f.images[i])
            rhs = f.apply(S.diff[i])
            diff = vadd(dict(lhs), rhs, -ONE)
            if diff:
                rep.fail(f"d({f.name}({g})) != {f.name}(d({g}))", T.poly_str(diff))
    if S.base is not None and T.base is not None and S.base.gen_names == T.base.gen_names:
        for i in range(S.nbase):
            rep.checked += 1
            if f.images[i] != {T.gen(i): ONE}:
                rep.fail(f"{f.name} is not the identity on base generator {S.gen_names[i]}")
    return rep


# ---------------------------------------------------------------------------
# group actions


class GroupAction:
    """Finitely presented group acting on a presentation by cdga automorphisms.

    ``relations`` are words: lists of ``(automorphism_name, exponent)``; a word
    ``g h`` acts as ``g ∘ h``.
    """

    def __init__(self, name, presentation: Presentation, automorphisms: dict, relations=()):
        self.name = name
        self.presentation = presentation
        self.automorphisms = dict(automorphisms)
        self.relations = [list(w) for w in relations]
        for g, f in self.automorphisms.items():
            if f.source is not presentation or f.target is not presentation:
                raise ValidationError(f"{name}: automorphism {g} must be an endomorphism of {presentation.name}")
        self._inverse: dict = {}

    def inverse_on_generator(self, g, i) -> dict:
        """``g^{-1}`` applied to generator ``i`` (exact, via the degree slice)."""
        key = (g, i)
        if key not in self._inverse:
            P = self.presentation
            n = P.degrees[i]
            M = self.automorphisms[g].matrix(n)
            inv = invert_homology_iso(M)
            basis = P.basis(n)
            col = inv.column(basis.index(P.gen(i)))
            self._inverse[key] = {basis[r]: v for r, v in col.items()}
        return self._inverse[key]

    def apply_word(self, word, p: dict) -> dict:
        P = self.presentation
        for g, e in reversed(word):
            if e >= 0:
                for _ in range(e):
                    p = self.automorphisms[g].apply(p)
            else:
                inv = CdgaMorphism(P, P, [self.inverse_on_generator(g, i) for i in range(P.ngens)], name=f"{g}^-1")
                for _ in range(-e):
                    p = inv.apply(p)
        return p

    @classmethod
    def trivial(cls, P: Presentation):
        return cls(f"trivial_{P.name}", P, {"e": CdgaMorphism.identity(P)}, [])


def check_group_action(A: GroupAction, cutoff: int) -> CheckReport:
    P = A.presentation
    rep = CheckReport(f"action {A.name} on {P.name}")
    for g, f in A.automorphisms.items():
        sub = check_morphism(f, cutoff)
        rep.checked += sub.checked
        for fl in sub.failures:
            rep.fail(f"automorphism {g}: {fl['what']}", fl["detail"])
        if sub.passed:
            for n in range(cutoff + 1):
                M = f.matrix(n)
                rep.checked += 1
                if rank(M) != M.rows:
                    rep.fail(f"automorphism {g} is not invertible in degree {n}")
                    break
    if not rep.passed:
        return rep
    for w in A.relations:
        word = " ".join(f"{g}^{e}" for g, e in w)
        for i, x in enumerate(P.gen_names):
            rep.checked += 1
            img = A.apply_word(w, {P.gen(i): ONE})
            if img != {P.gen(i): ONE}:
                rep.fail(f"relation {word} moves {x}", P.poly_str(img))
    return rep
