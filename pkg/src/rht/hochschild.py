"""Finite degree windows of bar, Hochschild, HKR and Connes complexes.

Hochschild chains are pairs ``(x, w)``: a basis label ``x`` of the
coefficient bimodule and a word ``w`` of letters, each letter a non-unit
fiber monomial of the ring (normalized complex, relative to the base prefix).
The degree of ``x ⊗ sa_1 ⊗ ... ⊗ sa_n`` is ``|x| + Σ (|a_i| - 1)``.

With ``e_i = |x| + Σ_{j<=i} (|a_j| - 1)`` the differential is

* internal: ``dx ⊗ w + Σ_i (-1)^{e_{i-1}+1} x ⊗ ... ⊗ s(da_i) ⊗ ...``
* multiplications: ``(-1)^{e_0} (x a_1) ⊗ ...`` and ``(-1)^{e_i} ... ⊗ s(a_i a_{i+1}) ⊗ ...``
* wrap-around: ``-(-1)^{(|a_n|-1) e_{n-1}} (a_n x) ⊗ sa_1 ⊗ ... ⊗ sa_{n-1}``

Base monomials produced inside a letter are moved into the coefficient with
the Koszul sign of passing the suspension and the letters to their left.
"""

from __future__ import annotations

from itertools import product as _cartesian

from rht.errors import NonzeroDifferential, NotAChainMap, UnsafeTruncation, ValidationError
from rht.exactlin import ONE, ChainReduction, SparseMatrix, homology, vadd
from rht.gca import CdgaMorphism, Presentation


def _sgn(e) -> int:
    return -1 if e % 2 else 1


class ComplexWindow:
    """A cochain complex on degrees ``lo..hi``; homology is certified below ``hi``.

    ``d(n)`` is the matrix from degree ``n`` to ``n + 1``.
    """

    def __init__(self, name, lo, hi, basis_fn, d_fn, label_fn, stamps=()):
        self.name = name
        self.lo = lo
        self.hi = hi
        self.validity = hi - 1
        self.stamps = tuple(stamps)
        self._basis_fn = basis_fn
        self._d_fn = d_fn
        self._label_fn = label_fn
        self._bases: dict = {}
        self._index: dict = {}
        self._d: dict = {}
        self._hom: dict = {}
        self._reduction = None

    def basis(self, n):
        if n < self.lo or n > self.hi:
            return ()
        hit = self._bases.get(n)
        if hit is None:
            hit = tuple(self._basis_fn(n))
            self._bases[n] = hit
            self._index[n] = {b: i for i, b in enumerate(hit)}
        return hit

    def index(self, n):
        self.basis(n)
        return self._index.get(n, {})

    def dim(self, n):
        return len(self.basis(n))

    def label(self, chain) -> str:
        return self._label_fn(chain)

    def vector(self, elem, n) -> dict:
        idx = self.index(n)
        return {idx[k]: v for k, v in elem.items()}

    def element(self, vec, n) -> dict:
        b = self.basis(n)
        return {b[i]: v for i, v in vec.items()}

    def d_chain(self, chain):
        return self._d_fn(chain)

    def d(self, n) -> SparseMatrix:
        """Differential ``C^n -> C^{n+1}`` (zero outside the window)."""
        hit = self._d.get(n)
        if hit is not None:
            return hit
        src = self.basis(n)
        if n >= self.hi:
            if src:
                raise ValidationError(f"{self.name}: no differential out of the top degree {n}")
            hit = SparseMatrix(self.dim(n + 1), 0)
        else:
            idx = self.index(n + 1)
            cols = []
            for b in src:
                img = self._d_fn(b)
                try:
                    cols.append({idx[k]: v for k, v in img.items()})
                except KeyError as e:  # pragma: no cover - indicates a basis bug
                    raise ValidationError(f"{self.name}: d({self.label(b)}) leaves the basis: {e}") from None
            hit = SparseMatrix(self.dim(n + 1), len(src), cols)
        self._d[n] = hit
        return hit

    def d_squared_failures(self, top=None):
        """Degrees ``n`` with ``d_{n+1} d_n != 0`` inside the window."""
        top = self.hi - 2 if top is None else top
        return [n for n in range(self.lo, top + 1) if not (self.d(n + 1) @ self.d(n)).is_zero()]

    def homology(self, n):
        """Homology in degree ``n`` via reduction of the whole window."""
        if n > self.validity:
            raise ValidationError(f"{self.name}: degree {n} lies above the certified range {self.validity}")
        if self._reduction is None:
            self._reduction = ChainReduction(self.d, self.dim, self.lo, self.validity)
        return self._reduction.homology(n)

    def homology_dense(self, n):
        """Homology in degree ``n`` from row reduction of the two adjacent differentials."""
        if n > self.validity:
            raise ValidationError(f"{self.name}: degree {n} lies above the certified range {self.validity}")
        hit = self._hom.get(n)
        if hit is None:
            hit = homology(self.d(n - 1), self.d(n))
            self._hom[n] = hit
        return hit

    def homology_labels(self, n):
        H = self.homology(n)
        b = self.basis(n)
        return [self.label(b[c]) for c in H.hom_cols]

    def __repr__(self):
        return f"ComplexWindow({self.name}, {self.lo}..{self.hi})"


def hh_homology(window: ComplexWindow, degrees=None) -> dict:
    degrees = range(max(window.lo, 0), window.validity + 1) if degrees is None else degrees
    return {n: window.homology(n) for n in degrees}


class ChainMap:
    """Degree-preserving map between windows given on basis chains."""

    def __init__(self, name, source: ComplexWindow, target: ComplexWindow, fn):
        self.name = name
        self.source = source
        self.target = target
        self._fn = fn
        self._m: dict = {}

    def apply_chain(self, chain) -> dict:
        return self._fn(chain)

    def matrix(self, n) -> SparseMatrix:
        hit = self._m.get(n)
        if hit is None:
            idx = self.target.index(n)
            cols = [{idx[k]: v for k, v in self._fn(b).items()} for b in self.source.basis(n)]
            hit = SparseMatrix(len(idx), len(cols), cols)
            self._m[n] = hit
        return hit

    def chain_failures(self, lo=None, hi=None):
        lo = max(self.source.lo, self.target.lo) if lo is None else lo
        hi = min(self.source.hi, self.target.hi) - 1 if hi is None else hi
        bad = []
        for n in range(lo, hi + 1):
            if self.target.d(n) @ self.matrix(n) != self.matrix(n + 1) @ self.source.d(n):
                bad.append(n)
        return bad

    def check(self, lo=None, hi=None):
        bad = self.chain_failures(lo, hi)
        if bad:
            raise NotAChainMap(f"{self.name} does not commute with d in degrees {bad}")
        return self

    def apply_vector(self, vec, n) -> dict:
        src = self.source.basis(n)
        idx = self.target.index(n)
        out: dict = {}
        for i, c in vec.items():
            for k, v in self._fn(src[i]).items():
                vadd(out, {idx[k]: v}, c)
        return out

    def on_homology(self, n) -> SparseMatrix:
        """Induced map on homology: images of representatives, projected."""
        H0 = self.source.homology(n)
        H1 = self.target.homology(n)
        reps = H0.cycle_basis
        cols = []
        for j in range(reps.cols):
            img = self.apply_vector(reps._cols[j], n)
            coords = H1.project(img, check=True)
            cols.append({i: v for i, v in enumerate(coords) if v})
        return SparseMatrix(H1.dim, H0.dim, cols)


# ---------------------------------------------------------------------------
# words


class Letters:
    """Normalized letters of a ring relative to its base prefix."""

    def __init__(self, A: Presentation, length_cutoff=None, allow_base=True):
        self.A = A
        if A.nbase and not allow_base:
            raise ValidationError(f"{A.name}: this construction needs the ground field as base")
        low = [A.degrees[i] for i in range(A.nbase, A.ngens) if A.degrees[i] < 2]
        if low and length_cutoff is None:
            raise UnsafeTruncation(
                f"{A.name} has generators of degree 1; an explicit length cutoff is required"
            )
        self.length_cutoff = length_cutoff
        self.truncation_dependent = bool(low)
        self._by_sdeg: dict = {}
        self._words: dict = {}

    def sdeg(self, a) -> int:
        return self.A.mono_degree(a) - 1

    def letters(self, s):
        """Letters of suspended degree ``s``."""
        hit = self._by_sdeg.get(s)
        if hit is None:
            hit = self.A.fiber_basis(s + 1)
            hit = tuple(m for m in hit if m != self.A.unit)
            self._by_sdeg[s] = hit
        return hit

    def words(self, t, maxlen=None):
        """Words of total suspended degree ``t`` (and length ≤ the cutoff)."""
        if maxlen is None:
            maxlen = self.length_cutoff if self.length_cutoff is not None else t
        key = (t, maxlen)
        hit = self._words.get(key)
        if hit is not None:
            return hit
        out = []
        if t == 0:
            out.append(())
        if maxlen > 0:
            for s in range(0, t + 1):
                first = self.letters(s)
                if not first:
                    continue
                rest = self.words(t - s, maxlen - 1)
                for a in first:
                    for w in rest:
                        out.append((a,) + w)
        hit = tuple(out)
        self._words[key] = hit
        return hit

    def word_str(self, w) -> str:
        parts = []
        for a in w:
            m = self.A.mono_str(a)
            parts.append("s" + (m if "*" not in m else f"({m})"))
        return " ⊗ ".join(parts)


def _split(A: Presentation, mono):
    if not A.nbase:
        return None, mono
    kappa, fib = A.split_base(mono)
    if kappa == A.unit:
        return None, fib
    return kappa, fib


# ---------------------------------------------------------------------------
# Hochschild complex


class HochschildComplex(ComplexWindow):
    """Normalized Hochschild window ``HH_k(A, X)`` on degrees ``X.lo..hi``."""

    def __init__(self, A: Presentation, X, hi, length_cutoff=None, name=None, lo=None):
        self.A = A
        self.X = X
        self.L = Letters(A, length_cutoff)
        stamps = ("TRUNCATION-DEPENDENT",) if self.L.truncation_dependent else ()
        lo = X.lo if lo is None else lo
        super().__init__(name or f"HH({A.name},{getattr(X, 'name', '?')})", lo, hi, self._chains, self._d_chain, self._label, stamps)

    def _chains(self, n):
        X, L = self.X, self.L
        out = []
        for t in range(0, n - X.lo + 1):
            xs = X.basis(n - t)
            if not xs:
                continue
            for w in L.words(t):
                for x in xs:
                    out.append((x, w))
        xi = {}

        def key(c):
            x, w = c
            if x not in xi:
                xi[x] = X.basis_index(X.degree(x))[x]
            return (len(w), tuple(self.A.mono_degree(a) for a in w), w, xi[x])

        out.sort(key=key)
        return out

    def _label(self, chain):
        x, w = chain
        xs = self.X.label_str(x)
        return xs if not w else f"{xs} ⊗ {self.L.word_str(w)}"

    def _put(self, out, x, prefix, mono, suffix, coeff, pre=None):
        """Add ``coeff x ⊗ prefix ⊗ s(mono) ⊗ suffix``, normalizing the new letter.

        ``pre`` is the suspended degree of ``prefix`` when already known.
        """
        A = self.A
        kappa, fib = _split(A, mono)
        if fib == A.unit:
            return
        w = prefix + (fib,) + suffix
        if kappa is None:
            key = (x, w)
            nv = out.get(key, 0) + coeff
            if nv:
                out[key] = nv
            else:
                out.pop(key, None)
            return
        if pre is None:
            pre = sum(self.L.sdeg(a) for a in prefix)
        s = _sgn(A.mono_degree(kappa) * (1 + pre))
        for x2, c in self.X.act_right(A, x, kappa).items():
            vadd(out, {(x2, w): c}, coeff * s)

    def _d_chain(self, chain):
        A, X = self.A, self.X
        x, w = chain
        n = len(w)
        out: dict = {}
        xd = X.degree(x)
        md = A.mono_degree
        sd = [md(a) - 1 for a in w]
        # e[i] = |x| + suspended degree of the first i letters
        e = [xd]
        for v in sd:
            e.append(e[-1] + v)
        for x2, c in X.d(x).items():
            vadd(out, {(x2, w): c})
        put = self._put
        for i, a in enumerate(w):
            dm = A.d_mono(a)
            if dm:
                s = _sgn(e[i] + 1)
                for m, c in dm.items():
                    put(out, x, w[:i], m, w[i + 1 :], c * s, e[i] - xd)
        if n == 0:
            return out
        s0 = _sgn(xd)
        for x2, c in X.act_right(A, x, w[0]).items():
            vadd(out, {(x2, w[1:]): c}, s0)
        for i in range(1, n):
            res = A.mul_mono(w[i - 1], w[i])
            if res is not None:
                sg, m = res
                put(out, x, w[: i - 1], m, w[i + 1 :], ONE * (sg * _sgn(e[i])), e[i - 1] - xd)
        sw = -_sgn(sd[-1] * e[n - 1])
        for x2, c in X.act_left(A, w[-1], x).items():
            vadd(out, {(x2, w[:-1]): c}, sw)
        return out

    def expand(self, coeff_elem, letter_polys):
        """Chains of ``coeff ⊗ s p_1 ⊗ ... ⊗ s p_n`` for polynomials ``p_i``."""
        A = self.A
        states = {(x, ()): c for x, c in coeff_elem.items()}
        for p in letter_polys:
            new: dict = {}
            for (x, pre), c in states.items():
                for m, c2 in p.items():
                    self._put(new, x, pre, m, (), c * c2)
            states = new
            if not states:
                break
        return states


def hochschild_complex(A: Presentation, X, degree_cutoff, length_cutoff=None) -> HochschildComplex:
    """Window certified through ``degree_cutoff``."""
    return HochschildComplex(A, X, degree_cutoff + 1, length_cutoff)


def hh_functorial(src: HochschildComplex, tgt: HochschildComplex, f: CdgaMorphism = None, coeff=None, name="hh_map", check=True):
    """Letterwise ``f``, coefficientwise ``coeff`` (a function label -> element)."""
    if f is not None and (f.source is not src.A or f.target is not tgt.A):
        raise ValidationError("letter map does not match the windows")
    if f is None and src.A is not tgt.A:
        raise ValidationError("letter map required between different rings")
    coeff = coeff or (lambda x: {x: ONE})

    def fn(chain):
        x, w = chain
        polys = [f.apply_mono(a) for a in w] if f is not None else [{a: ONE} for a in w]
        return tgt.expand(coeff(x), polys)

    cm = ChainMap(name, src, tgt, fn)
    if check:
        cm.check()
    return cm


def compose_matrices(*maps_in_order):
    """Helper: product of matrices given first-applied first."""
    out = maps_in_order[0]
    for m in maps_in_order[1:]:
        out = m @ out
    return out


# ---------------------------------------------------------------------------
# ring coefficients, assembly and inclusion


def hochschild_of_ring(A: Presentation, degree_cutoff, length_cutoff=None):
    from rht.dgmod import ring_module

    return HochschildComplex(A, ring_module(A), degree_cutoff + 1, length_cutoff, name=f"HH({A.name})")


def assembly_and_inclusion(window: HochschildComplex):
    """``(ε, incl)`` as per-degree matrix functions: word-length-0 projection and section."""
    A = window.A
    X = window.X
    if not getattr(X, "is_ring", False) or X.ring is not A:
        raise ValidationError("assembly needs ring coefficients")

    def eps(n):
        idx = {m: i for i, m in enumerate(A.basis(n))}
        cols = []
        for x, w in window.basis(n):
            cols.append({idx[x[0]]: ONE} if not w else {})
        return SparseMatrix(len(idx), len(cols), cols)

    def incl(n):
        widx = window.index(n)
        cols = [{widx[((m, 0), ())]: ONE} for m in A.basis(n)]
        return SparseMatrix(window.dim(n), len(cols), cols)

    return eps, incl


def ring_complex(A: Presentation, hi) -> ComplexWindow:
    """``A`` itself as a window (its monomial basis and differential)."""
    return ComplexWindow(
        A.name, 0, hi, lambda n: A.basis(n), lambda m: dict(A.d_mono(m)), A.mono_str
    )


# ---------------------------------------------------------------------------
# two-sided bar construction


class BarModule:
    """``B(L, A, N)`` over the ground field, as a module-like basis object.

    Chains ``(l, w, r)``; the left action acts on ``L`` and the right action
    on ``N``.  ``L`` needs a right ``A``-action and ``N`` a left one.
    """

    def __init__(self, L, A: Presentation, N, length_cutoff=None, name=None):
        self.Lm = L
        self.A = A
        self.Nm = N
        self.letters = Letters(A, length_cutoff, allow_base=False)
        self.lo = L.lo + N.lo
        self.name = name or f"B({L.name},{A.name},{N.name})"
        self._basis: dict = {}
        self._bindex: dict = {}
        self._d: dict = {}
        self.is_ring = False

    def basis(self, n):
        hit = self._basis.get(n)
        if hit is None:
            out = []
            L, N, W = self.Lm, self.Nm, self.letters
            for dl in range(L.lo, n - N.lo + 1):
                ls = L.basis(dl)
                if not ls:
                    continue
                for t in range(0, n - dl - N.lo + 1):
                    rs = N.basis(n - dl - t)
                    if not rs:
                        continue
                    for w in W.words(t):
                        for l in ls:
                            for r in rs:
                                out.append((l, w, r))
            hit = tuple(out)
            self._basis[n] = hit
            self._bindex[n] = {b: i for i, b in enumerate(hit)}
        return hit

    def basis_index(self, n):
        self.basis(n)
        return self._bindex[n]

    def degree(self, c):
        l, w, r = c
        return self.Lm.degree(l) + sum(self.letters.sdeg(a) for a in w) + self.Nm.degree(r)

    def label_str(self, c):
        l, w, r = c
        mid = "|".join(("s" + self.A.mono_str(a)) for a in w)
        return f"{self.Lm.label_str(l)}[{mid}]{self.Nm.label_str(r)}"

    def d(self, c):
        hit = self._d.get(c)
        if hit is not None:
            return hit
        L, A, N, W = self.Lm, self.A, self.Nm, self.letters
        l, w, r = c
        out: dict = {}
        ld = L.degree(l)
        for l2, v in L.d(l).items():
            vadd(out, {(l2, w, r): v})
        e = ld
        for i, a in enumerate(w):
            s = _sgn(e + 1)
            for m, v in A.d_mono(a).items():
                if m != A.unit:
                    vadd(out, {(l, w[:i] + (m,) + w[i + 1 :], r): v * s})
            e += W.sdeg(a)
        for r2, v in N.d(r).items():
            vadd(out, {(l, w, r2): v * _sgn(e)})
        p = len(w)
        if p:
            for l2, v in L.act_right(A, l, w[0]).items():
                vadd(out, {(l2, w[1:], r): v * _sgn(ld)})
            e = ld + W.sdeg(w[0])
            for i in range(1, p):
                res = A.mul_mono(w[i - 1], w[i])
                if res is not None:
                    sg, m = res
                    vadd(out, {(l, w[: i - 1] + (m,) + w[i + 1 :], r): ONE * (sg * _sgn(e))})
                e += W.sdeg(w[i])
            e_last = -_sgn(e - W.sdeg(w[-1]))
            for r2, v in N.act_left(A, w[-1], r).items():
                vadd(out, {(l, w[:-1], r2): v * e_last})
        self._d[c] = out
        return out

    def act_left(self, ring, a, c):
        l, w, r = c
        return {(l2, w, r): v for l2, v in self.Lm.act_left(ring, a, l).items()}

    def act_right(self, ring, c, a):
        l, w, r = c
        return {(l, w, r2): v for r2, v in self.Nm.act_right(ring, r, a).items()}


def bar_complex(A: Presentation, degree_cutoff, length_cutoff=None):
    """``B(A, A, A)`` window with augmentation, section and contracting homotopy."""
    from rht.dgmod import ring_module

    Am = ring_module(A)
    B = BarModule(Am, A, Am, length_cutoff)
    W = ComplexWindow(B.name, 0, degree_cutoff + 1, B.basis, B.d, B.label_str,
                      ("TRUNCATION-DEPENDENT",) if B.letters.truncation_dependent else ())
    W.module = B
    return W


def bar_augmentation(W: ComplexWindow, n) -> SparseMatrix:
    """``ε(r0[]r1) = r0 r1``, zero on positive word length."""
    A = W.module.A
    idx = {m: i for i, m in enumerate(A.basis(n))}
    cols = []
    for (l, w, r) in W.basis(n):
        col = {}
        if not w:
            res = A.mul_mono(l[0], r[0])
            if res is not None:
                col = {idx[res[1]]: ONE * res[0]}
        cols.append(col)
    return SparseMatrix(len(idx), len(cols), cols)


def bar_section(W: ComplexWindow, n) -> SparseMatrix:
    """``σ(r) = 1[]r``."""
    A = W.module.A
    widx = W.index(n)
    cols = [{widx[((A.unit, 0), (), (m, 0))]: ONE} for m in A.basis(n)]
    return SparseMatrix(W.dim(n), len(cols), cols)


def bar_homotopy(W: ComplexWindow, n) -> SparseMatrix:
    """``s(r0[w]r1) = 1[r0|w]r1`` (zero for scalar ``r0``), degree ``n -> n-1``."""
    A = W.module.A
    tidx = W.index(n - 1)
    cols = []
    for (l, w, r) in W.basis(n):
        r0 = l[0]
        if r0 == A.unit:
            cols.append({})
            continue
        key = ((A.unit, 0), (r0,) + w, r)
        cols.append({tidx[key]: ONE} if key in tidx else {})
    return SparseMatrix(W.dim(n - 1), len(cols), cols)


# ---------------------------------------------------------------------------
# comparison of the direct formula with the bar construction


def bar_tensor_defects(A: Presentation, X, degree_cutoff=8, length_cutoff=4):
    """Compare the Hochschild differential with the one induced from ``B(A,A,A) ⊗ X``.

    ``(r0[w]r1) ⊗ x ↦ (-1)^{(|r1|+|x|)(|r0|+|w|)} (r1 x r0) ⊗ w``.  Returns the
    list of basis elements where the two differentials disagree.
    """
    from rht.dgmod import ring_module

    Am = ring_module(A)
    B = BarModule(Am, A, Am, length_cutoff)
    H = HochschildComplex(A, X, degree_cutoff + 1, length_cutoff=None if not B.letters.truncation_dependent else length_cutoff)
    W = B.letters

    def T(b, x):
        l, w, r = b
        sgn = _sgn((Am.degree(r) + X.degree(x)) * (Am.degree(l) + sum(W.sdeg(a) for a in w)))
        out: dict = {}
        for x1, c1 in X.act_right(A, x, l[0]).items():
            for x2, c2 in X.act_left(A, r[0], x1).items():
                vadd(out, {(x2, w): c1 * c2 * sgn})
        return out

    bad = []
    for n in range(X.lo, degree_cutoff + 1):
        for nb in range(0, n - X.lo + 1):
            for b in B.basis(nb):
                if len(b[1]) > length_cutoff:
                    continue
                for x in X.basis(n - nb):
                    lhs: dict = {}
                    for b2, c in B.d(b).items():
                        vadd(lhs, T(b2, x), c)
                    sb = _sgn(B.degree(b))
                    for x2, c in X.d(x).items():
                        vadd(lhs, T(b, x2), c * sb)
                    rhs: dict = {}
                    for ch, c in T(b, x).items():
                        vadd(rhs, H._d_chain(ch), c)
                    if vadd(lhs, rhs, -ONE):
                        bad.append((b, x))
    return bad


# ---------------------------------------------------------------------------
# HKR


class HKRComplex(ComplexWindow):
    """``ΛV ⊗ ΛsV`` with zero differential and the shuffle map into ``HH(A)``."""

    def __init__(self, A: Presentation, degree_cutoff):
        if not A.is_zero_differential():
            raise NonzeroDifferential(f"{A.name} has a nonzero differential")
        fib = list(range(A.nbase, A.ngens))
        if any(A.degrees[i] < 2 for i in fib):
            raise UnsafeTruncation(f"{A.name}: degree-1 generators give degree-0 suspensions")
        self.A = A
        self.fiber = fib
        self.SV = Presentation(f"s{A.name}", [("s" + A.gen_names[i], A.degrees[i] - 1) for i in fib])
        super().__init__(f"HKR({A.name})", 0, degree_cutoff + 1, self._chains, lambda c: {}, self._label)

    def _chains(self, n):
        out = []
        for t in range(0, n + 1):
            for b in self.SV.basis(t):
                for a in self.A.basis(n - t):
                    out.append((a, b))
        return out

    def _label(self, c):
        a, b = c
        bs = self.SV.mono_str(b)
        return self.A.mono_str(a) if bs == "1" else f"{self.A.mono_str(a)} ⊗ {bs}"

    def shuffle(self, c) -> list:
        """``[(sign * multiplicity, word)]`` for the chain ``a ⊗ sv_1 ∧ ... ∧ sv_n``."""
        _a, b = c
        seq = []
        for k, e in enumerate(b):
            seq.extend([k] * e)
        odd = [self.SV.degrees[k] % 2 for k in range(self.SV.ngens)]
        mult = 1
        for e in b:
            for j in range(2, e + 1):
                mult *= j
        out = []
        for perm in _distinct_perms(seq):
            inv = 0
            for p in range(len(perm)):
                if odd[perm[p]]:
                    for q in range(p + 1, len(perm)):
                        if odd[perm[q]] and perm[q] < perm[p]:
                            inv += 1
            word = tuple(self.A.gen(self.fiber[k]) for k in perm)
            out.append((mult * _sgn(inv), word))
        return out


def _distinct_perms(seq):
    counts: dict = {}
    for s in seq:
        counts[s] = counts.get(s, 0) + 1
    keys = sorted(counts)
    n = len(seq)
    cur: list = []

    def rec():
        if len(cur) == n:
            yield tuple(cur)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                cur.append(k)
                yield from rec()
                cur.pop()
                counts[k] += 1

    return list(rec())


def hkr_complex(A: Presentation, degree_cutoff):
    """``(HKR window, HH window, comparison chain map)``."""
    K = HKRComplex(A, degree_cutoff)
    H = hochschild_of_ring(A, degree_cutoff)

    def fn(c):
        a, _b = c
        out: dict = {}
        for coeff, word in K.shuffle(c):
            vadd(out, {((a, 0), word): ONE * coeff})
        return out

    return K, H, ChainMap("hkr", K, H, fn)


# ---------------------------------------------------------------------------
# Connes complex


class ConnesComplex(ComplexWindow):
    """``Q ⊕`` reduced cyclic words ``(sĀ)^{⊗ n+1}`` modulo signed rotation.

    Only ground-field bases are supported.  The unit class sits in degree 0
    under the label ``()``.
    """

    def __init__(self, A: Presentation, degree_cutoff, length_cutoff=None):
        if A.nbase:
            raise ValidationError("the Connes complex is built over the ground field only")
        self.A = A
        self.L = Letters(A, length_cutoff)
        self.H = hochschild_of_ring(A, degree_cutoff, length_cutoff)
        self._canon: dict = {}
        super().__init__(f"HC({A.name})", 0, degree_cutoff + 1, self._chains, self._d_cyc, self._label, self.H.stamps)

    def canonical(self, word):
        """``(sign, representative)`` with ``[word] = sign [representative]``; sign 0 if the class vanishes."""
        hit = self._canon.get(word)
        if hit is not None:
            return hit
        sd = self.L.sdeg
        cur, sign = word, 1
        best = (word, 1)
        out = None
        for _ in range(len(word)):
            s = _sgn(sd(cur[-1]) * sum(sd(a) for a in cur[:-1]))
            cur = (cur[-1],) + cur[:-1]
            sign *= s
            if cur == word:
                if sign != 1:
                    out = (0, None)
                break
            if cur < best[0]:
                best = (cur, sign)
        if out is None:
            # t^j word = sign_j rep, and [t^j word] = [word]
            out = (best[1], best[0])
        self._canon[word] = out
        return out

    def _chains(self, n):
        out = [()] if n == 0 else []
        t = n - 1
        if t >= 0:
            mx = self.L.length_cutoff + 1 if self.L.length_cutoff is not None else t + 1
            for w in self.L.words(t, mx):
                if not w:
                    continue
                s, rep = self.canonical(w)
                if s and rep == w:
                    out.append(w)
        return out

    def _label(self, c):
        if c == ():
            return "1"
        return "(" + " ⊗ ".join("s" + self.A.mono_str(a) for a in c) + ")"

    def project_chain(self, chain) -> dict:
        (a0, _z), w = chain
        if a0 == self.A.unit:
            return {(): ONE} if not w else {}
        s, rep = self.canonical((a0,) + w)
        return {rep: ONE * s} if s else {}

    def _d_cyc(self, c):
        if c == ():
            return {}
        out: dict = {}
        for ch, v in self.H._d_chain(((c[0], 0), c[1:])).items():
            vadd(out, self.project_chain(ch), v)
        return out

    def projection(self) -> ChainMap:
        return ChainMap("hh_to_hc", self.H, self, self.project_chain)


def connes_complex(A: Presentation, degree_cutoff, length_cutoff=None) -> ConnesComplex:
    return ConnesComplex(A, degree_cutoff, length_cutoff)


# ---------------------------------------------------------------------------
# rotation of coefficients


def rotate_coefficients(src: HochschildComplex, tgt: HochschildComplex, check=True) -> ChainMap:
    """``HH(S, M ⊗ B(R) ⊗ ∨M) -> HH(R, ∨M ⊗ B(S) ⊗ M)`` by cyclic permutation.

    ``(m[r]f) ⊗ [s] ↦ (-1)^{(|m|+|r|)(|f|+|s|)} (f[s]m) ⊗ [r]`` with suspended
    letter degrees.
    """
    X, Y = src.X, tgt.X
    Ls, Lr = src.L, tgt.L

    def fn(chain):
        (m, rw, f), sw = chain
        a = X.Lm.degree(m) + sum(Lr.sdeg(r) for r in rw)
        b = X.Nm.degree(f) + sum(Ls.sdeg(s) for s in sw)
        return {((f, sw, m), rw): ONE * _sgn(a * b)}

    cm = ChainMap("rotation", src, tgt, fn)
    if check:
        cm.check()
    return cm
