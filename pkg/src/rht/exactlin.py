"""Exact sparse linear algebra over the rationals.

Vectors are plain dicts ``{index: scalar}`` with no zero values.  Matrices are
immutable :class:`SparseMatrix` objects stored column-major.  Every routine is
exact; the scalar type is ``gmpy2.mpq`` when available and
``fractions.Fraction`` otherwise.
"""

from __future__ import annotations

from fractions import Fraction

from rht.errors import CompositionNotZero, NotAChainMap, NotInvertible

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

ZERO = Q(0)
ONE = Q(1)


def scalar(x) -> "Q":
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to the scalar type."""
    if isinstance(x, str):
        x = Fraction(x.strip())
    if isinstance(x, Fraction):
        return Q(x.numerator, x.denominator)
    return Q(x)


def fmt(x) -> str:
    x = scalar(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# vectors


def vadd(acc: dict, vec: dict, coeff=ONE) -> dict:
    """In-place ``acc += coeff * vec``; returns ``acc``."""
    if not coeff:
        return acc
    for k, v in vec.items():
        nv = acc.get(k, ZERO) + coeff * v
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)
    return acc


def vscale(vec: dict, coeff) -> dict:
    if not coeff:
        return {}
    return {k: coeff * v for k, v in vec.items()}


# ---------------------------------------------------------------------------
# matrices


class SparseMatrix:
    """Immutable sparse matrix with column-major storage.

    Equality is structural on the canonical row-major entry list.
    """

    __slots__ = ("rows", "cols", "_cols", "_entries")

    def __init__(self, rows: int, cols: int, columns=None):
        self.rows = int(rows)
        self.cols = int(cols)
        if columns is None:
            columns = [{} for _ in range(self.cols)]
        if len(columns) != self.cols:
            raise ValueError("column count mismatch")
        clean = []
        for col in columns:
            c = {}
            for r, v in col.items():
                if not 0 <= r < self.rows:
                    raise IndexError(f"row index {r} out of range {self.rows}")
                v = v if isinstance(v, type(ONE)) else scalar(v)
                if v:
                    c[r] = v
            clean.append(c)
        self._cols = tuple(clean)
        self._entries = None

    # constructors --------------------------------------------------------
    @classmethod
    def from_entries(cls, rows, cols, entries):
        columns = [{} for _ in range(cols)]
        for r, c, v in entries:
            if r in columns[c]:
                raise ValueError(f"duplicate entry at ({r}, {c})")
            columns[c][r] = v
        return cls(rows, cols, columns)

    @classmethod
    def from_dense(cls, data, cols=None):
        data = [list(row) for row in data]
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        columns = [{} for _ in range(cols)]
        for i, row in enumerate(data):
            for j, v in enumerate(row):
                if v:
                    columns[j][i] = scalar(v)
        return cls(rows, cols, columns)

    @classmethod
    def identity(cls, n: int):
        return cls(n, n, [{i: ONE} for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int):
        return cls(rows, cols)

    @classmethod
    def _trusted(cls, rows, cols, columns):
        m = cls.__new__(cls)
        m.rows, m.cols = rows, cols
        m._cols = tuple(columns)
        m._entries = None
        return m

    # accessors ------------------------------------------------------------
    def column(self, j: int) -> dict:
        return dict(self._cols[j])

    def columns(self):
        return [dict(c) for c in self._cols]

    def row_dicts(self):
        rows = [{} for _ in range(self.rows)]
        for j, col in enumerate(self._cols):
            for i, v in col.items():
                rows[i][j] = v
        return rows

    @property
    def entries(self):
        if self._entries is None:
            ent = [(i, j, v) for j, col in enumerate(self._cols) for i, v in col.items()]
            ent.sort(key=lambda t: (t[0], t[1]))
            self._entries = tuple(ent)
        return self._entries

    def __getitem__(self, key):
        i, j = key
        return self._cols[j].get(i, ZERO)

    def nnz(self) -> int:
        return sum(len(c) for c in self._cols)

    def is_zero(self) -> bool:
        return all(not c for c in self._cols)

    def to_dense(self):
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for j, col in enumerate(self._cols):
            for i, v in col.items():
                out[i][j] = v
        return out

    # arithmetic -----------------------------------------------------------
    def apply(self, vec: dict) -> dict:
        out: dict = {}
        for j, c in vec.items():
            if c:
                vadd(out, self._cols[j], c)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return SparseMatrix._trusted(self.rows, other.cols, [self.apply(c) for c in other._cols])

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SparseMatrix._trusted(
            self.rows, self.cols, [vadd(dict(a), b) for a, b in zip(self._cols, other._cols)]
        )

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SparseMatrix._trusted(
            self.rows, self.cols, [vadd(dict(a), b, -ONE) for a, b in zip(self._cols, other._cols)]
        )

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, c):
        c = scalar(c)
        return SparseMatrix._trusted(self.rows, self.cols, [vscale(col, c) for col in self._cols])

    def transpose(self):
        return SparseMatrix._trusted(self.cols, self.rows, self.row_dicts())

    T = property(transpose)

    def submatrix(self, row_idx, col_idx):
        rmap = {r: k for k, r in enumerate(row_idx)}
        cols = []
        for j in col_idx:
            cols.append({rmap[i]: v for i, v in self._cols[j].items() if i in rmap})
        return SparseMatrix._trusted(len(row_idx), len(col_idx), cols)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, self.entries))

    def __repr__(self):
        if self.rows * self.cols <= 64:
            body = "; ".join(" ".join(fmt(v) for v in row) for row in self.to_dense())
            return f"SparseMatrix({self.rows}x{self.cols}: [{body}])"
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def hstack(*mats: SparseMatrix) -> SparseMatrix:
    rows = mats[0].rows
    cols = []
    for m in mats:
        if m.rows != rows:
            raise ValueError("row mismatch in hstack")
        cols.extend(m._cols)
    return SparseMatrix._trusted(rows, len(cols), cols)


# ---------------------------------------------------------------------------
# elimination


def _components(rows):
    """Group row indices whose supports are connected through shared columns."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner = {}
    for i, row in enumerate(rows):
        if not row:
            continue
        parent[i] = i
        for c in row:
            if c in owner:
                a, b = find(i), find(owner[c])
                if a != b:
                    parent[a] = b
            else:
                owner[c] = i
    groups: dict = {}
    for i in parent:
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _rref_block(rows):
    """Fully reduce ``rows``; returns ``{pivot_col: row}`` with unit pivots."""
    pivots: dict = {}
    holders: dict = {}  # col -> set of pivot cols whose row has an entry there
    for src in rows:
        row = dict(src)
        for p in [c for c in row if c in pivots]:
            c = row.get(p)
            if c:
                vadd(row, pivots[p], -c)
        if not row:
            continue
        p = min(row)
        inv = ONE / row[p]
        if inv != ONE:
            row = {k: v * inv for k, v in row.items()}
        for q in list(holders.get(p, ())):
            prow = pivots[q]
            c = prow.get(p)
            if not c:
                continue
            for k, v in row.items():
                nv = prow.get(k, ZERO) - c * v
                if nv:
                    if k not in prow:
                        holders.setdefault(k, set()).add(q)
                    prow[k] = nv
                else:
                    del prow[k]
                    holders[k].discard(q)
        holders.pop(p, None)
        pivots[p] = row
        for k in row:
            if k != p:
                holders.setdefault(k, set()).add(p)
    return pivots


def rref_rows(rows):
    """Reduced row echelon form of a list of sparse rows.

    Returns ``{pivot_col: row}``; blocks that share no column are reduced
    independently, which leaves the (unique) result unchanged.
    """
    out = {}
    for group in _components(rows):
        out.update(_rref_block([rows[i] for i in group]))
    return out


def rref(A: SparseMatrix):
    """Exact reduced row-echelon form: ``(R, pivot_columns, rank)``."""
    piv = rref_rows(A.row_dicts())
    order = sorted(piv)
    columns = [{} for _ in range(A.cols)]
    for i, p in enumerate(order):
        for j, v in piv[p].items():
            columns[j][i] = v
    return SparseMatrix._trusted(A.rows, A.cols, columns), order, len(order)


def rank(A: SparseMatrix) -> int:
    if A.rows < A.cols:
        return len(rref_rows(A.row_dicts()))
    return len(rref_rows([dict(c) for c in A._cols]))


def _nullspace_from_pivots(piv, ncols):
    free = [j for j in range(ncols) if j not in piv]
    holders: dict = {}
    for p, row in piv.items():
        for k, v in row.items():
            if k != p:
                holders.setdefault(k, []).append((p, v))
    vecs = []
    for f in free:
        vec = {f: ONE}
        for p, v in holders.get(f, ()):
            vec[p] = -v
        vecs.append(vec)
    return free, vecs


def kernel_basis(A: SparseMatrix) -> SparseMatrix:
    """Columns form a basis of ``{v : A v = 0}`` (one per free column)."""
    piv = rref_rows(A.row_dicts())
    _, vecs = _nullspace_from_pivots(piv, A.cols)
    return SparseMatrix._trusted(A.cols, len(vecs), vecs)


def solve(A: SparseMatrix, b: dict):
    """Return one solution ``x`` of ``A x = b`` or ``None``."""
    rows = A.row_dicts()
    aug = A.cols
    for i, v in b.items():
        rows[i][aug] = v
    piv = rref_rows(rows)
    if aug in piv:
        return None
    return {p: row[aug] for p, row in piv.items() if aug in row}


# ---------------------------------------------------------------------------
# homology


class HomologySlice:
    """Homology ``ker(d_out) / im(d_in)`` at one spot of a complex.

    The homology basis is given by kernel vectors at a subset of the free
    columns of ``rref(d_out)``; ``project`` maps any cycle to coordinates in
    that basis and kills boundaries.
    """

    def __init__(self, ambient_dim, d_out, free, kernel_rows, bound_piv, hom_cols, boundary_basis):
        self.ambient_dim = ambient_dim
        self.d_out = d_out
        self._free = free
        self._kernel_rows = kernel_rows
        self._bound_piv = bound_piv
        self.hom_cols = hom_cols
        self._hom_index = {c: i for i, c in enumerate(hom_cols)}
        self.boundary_basis = boundary_basis
        reps = []
        for f in hom_cols:
            vec = {f: ONE}
            for p, v in kernel_rows.get(f, ()):
                vec[p] = -v
            reps.append(vec)
        self.cycle_basis = SparseMatrix._trusted(ambient_dim, len(reps), reps)

    @property
    def dim(self) -> int:
        return len(self.hom_cols)

    @property
    def kernel_dim(self) -> int:
        return len(self._free)

    @property
    def boundary_rank(self) -> int:
        return self.boundary_basis.cols

    def is_cycle(self, vec: dict) -> bool:
        return not self.d_out.apply(vec)

    def project(self, vec: dict, check: bool = True) -> list:
        """Coordinates of the class of a cycle in the homology basis."""
        if check and not self.is_cycle(vec):
            raise NotAChainMap("projection of a non-cycle")
        w = {k: v for k, v in vec.items() if k in self._free}
        for p in [k for k in w if k in self._bound_piv]:
            c = w.get(p)
            if c:
                vadd(w, self._bound_piv[p], -c)
        out = [ZERO] * self.dim
        for k, v in w.items():
            i = self._hom_index.get(k)
            if i is not None:
                out[i] = v
        return out

    def project_matrix(self, M: SparseMatrix, check: bool = True) -> SparseMatrix:
        cols = []
        for j in range(M.cols):
            coords = self.project(M._cols[j], check=check)
            cols.append({i: v for i, v in enumerate(coords) if v})
        return SparseMatrix._trusted(self.dim, M.cols, cols)

    def is_boundary(self, vec: dict) -> bool:
        return self.is_cycle(vec) and not any(self.project(vec, check=False))


def homology(d_in: SparseMatrix, d_out: SparseMatrix) -> HomologySlice:
    """Homology at the middle of ``C_prev --d_in--> C --d_out--> C_next``."""
    if d_in.rows != d_out.cols:
        raise ValueError(f"incompatible shapes {d_in.shape} then {d_out.shape}")
    comp = d_out @ d_in
    if not comp.is_zero():
        raise CompositionNotZero(f"d_out . d_in has {comp.nnz()} nonzero entries")
    n = d_out.cols
    kpiv = rref_rows(d_out.row_dicts())
    free = [j for j in range(n) if j not in kpiv]
    free_set = set(free)
    kernel_rows: dict = {}
    for p, row in kpiv.items():
        for k, v in row.items():
            if k != p:
                kernel_rows.setdefault(k, []).append((p, v))
    bpiv_full = rref_rows([dict(c) for c in d_in._cols])
    order = sorted(bpiv_full)
    boundary_basis = SparseMatrix._trusted(n, len(order), [bpiv_full[p] for p in order])
    # boundaries are cycles, hence determined by their free coordinates
    restricted = [{k: v for k, v in bpiv_full[p].items() if k in free_set} for p in order]
    bound_piv = rref_rows(restricted)
    hom_cols = [f for f in free if f not in bound_piv]
    return HomologySlice(n, d_out, free_set, kernel_rows, bound_piv, hom_cols, boundary_basis)


def induced_on_homology(f: SparseMatrix, src: HomologySlice, tgt: HomologySlice) -> SparseMatrix:
    """Matrix of the map induced by the chain-level ``f`` on homology."""
    if f.cols != src.ambient_dim or f.rows != tgt.ambient_dim:
        raise ValueError("map shape does not match the homology slices")
    images = f @ src.cycle_basis
    for j in range(images.cols):
        if not tgt.is_cycle(images._cols[j]):
            raise NotAChainMap(f"image of cycle {j} is not a cycle")
    bimg = f @ src.boundary_basis
    for j in range(bimg.cols):
        if not tgt.is_boundary(bimg._cols[j]):
            raise NotAChainMap(f"image of boundary {j} is not a boundary")
    return tgt.project_matrix(images, check=False)


def invert_homology_iso(m: SparseMatrix) -> SparseMatrix:
    """Exact inverse of a square invertible matrix."""
    n = m.rows
    if m.cols != n:
        raise NotInvertible(f"matrix is {m.rows}x{m.cols}, not square", defect=abs(m.rows - m.cols))
    rows = m.row_dicts()
    for i in range(n):
        rows[i][n + i] = ONE
    piv = rref_rows(rows)
    r = sum(1 for p in piv if p < n)
    if r < n:
        raise NotInvertible(f"rank {r} < {n}", defect=n - r)
    columns = [{} for _ in range(n)]
    for p, row in piv.items():
        for k, v in row.items():
            if k >= n:
                columns[k - n][p] = v
    return SparseMatrix._trusted(n, n, columns)


# ---------------------------------------------------------------------------
# homology by reduction of a whole complex


class _Step:
    __slots__ = ("a", "b", "lam", "row", "col")

    def __init__(self, a, b, lam, row, col):
        self.a = a
        self.b = b
        self.lam = lam
        self.row = row  # entries at b of the other live columns
        self.col = col  # d(a) without its b entry


def _eliminate(cols: dict):
    """Markowitz-ordered elimination of a sparse matrix ``{col: {row: v}}``.

    The matrix is reduced to zero by cancelling pivot pairs; returns the
    steps in order and the columns that end as zero.
    """
    import heapq

    rows: dict = {}
    for a, col in cols.items():
        for b in col:
            rows.setdefault(b, set()).add(a)
    # ties go to late columns and rows, so early basis elements tend to survive
    heap = [(len(c), -a) for a, c in cols.items()]
    heapq.heapify(heap)
    steps = []
    zero = []
    while heap:
        ln, a = heapq.heappop(heap)
        a = -a
        col = cols.get(a)
        if col is None or len(col) != ln:
            continue
        if not col:
            zero.append(a)
            del cols[a]
            continue
        b = min(col, key=lambda r: (len(rows[r]), abs(col[r]) != 1, -r))
        lam = col[b]
        others = [e for e in rows[b] if e != a]
        row = {e: cols[e][b] for e in others}
        del cols[a]
        for r in col:
            rows[r].discard(a)
        piv = {r: v for r, v in col.items() if r != b}
        for e in others:
            ce = cols[e]
            c = ce.pop(b) / lam
            for r, v in piv.items():
                nv = ce.get(r, ZERO) - c * v
                if nv:
                    if r not in ce:
                        rows[r].add(e)
                    ce[r] = nv
                else:
                    del ce[r]
                    rows[r].discard(e)
            heapq.heappush(heap, (len(ce), -e))
        del rows[b]
        steps.append(_Step(a, b, lam, row, piv))
    return steps, zero


class ReducedSlice:
    """Homology at one degree of a :class:`ChainReduction`.

    The basis is chosen greedily: the earliest basis elements that are
    cycles with independent classes, completed by reduction survivors.
    ``hom_cols`` holds the basis index labelling each class and
    ``cycle_basis`` the representing cycles.
    """

    SCAN_LIMIT = 256

    def __init__(self, red, n, survivors, zero_cols=()):
        self._red = red
        self.n = n
        self._surv = survivors
        self._surv_index = {c: i for i, c in enumerate(survivors)}
        self._b_step = {st.b: i for i, st in enumerate(red.steps.get(n - 1, ()))}
        self._raw_reps = None
        self._choose(zero_cols)

    @property
    def dim(self) -> int:
        return len(self._surv)

    def _survivor_reps(self):
        if self._raw_reps is None:
            steps = self._red.steps.get(self.n, ())
            reps = []
            for c in self._surv:
                v = {c: ONE}
                for st in reversed(steps):
                    t = ZERO
                    for e, x in v.items():
                        y = st.row.get(e)
                        if y is not None:
                            t += x * y
                    if t:
                        v[st.a] = -t / st.lam
                reps.append(v)
            self._raw_reps = reps
        return self._raw_reps

    def _raw_coords(self, vec: dict) -> dict:
        """Coordinates in the survivor basis (no cycle check)."""
        import heapq

        steps = self._red.steps.get(self.n - 1, ())
        bstep = self._b_step
        v = dict(vec)
        heap = [bstep[k] for k in v if k in bstep]
        heapq.heapify(heap)
        seen = set(heap)
        while heap:
            i = heapq.heappop(heap)
            st = steps[i]
            c = v.pop(st.b, None)
            if not c:
                continue
            f = -c / st.lam
            for r, x in st.col.items():
                nv = v.get(r, ZERO) + f * x
                if nv:
                    v[r] = nv
                    j = bstep.get(r)
                    if j is not None and j not in seen:
                        seen.add(j)
                        heapq.heappush(heap, j)
                else:
                    v.pop(r, None)
        si = self._surv_index
        return {si[k]: x for k, x in v.items() if k in si}

    def _choose(self, zero_cols):
        dim = self.dim
        chosen, labels, piv = [], [], {}
        if dim:
            scanned = 0
            for e in zero_cols:
                if len(chosen) == dim or scanned >= self.SCAN_LIMIT:
                    break
                scanned += 1
                coords = self._raw_coords({e: ONE})
                r = dict(coords)
                for p in sorted(piv):
                    c = r.get(p)
                    if c:
                        vadd(r, piv[p], -c)
                if not r:
                    continue
                p = min(r)
                piv[p] = vscale(r, ONE / r[p])
                for q in list(piv):
                    if q != p and piv[q].get(p):
                        vadd(piv[q], piv[p], -piv[q][p])
                chosen.append(({e: ONE}, coords))
                labels.append(e)
            if len(chosen) < dim:
                reps = self._survivor_reps()
                for i, c in enumerate(self._surv):
                    if len(chosen) == dim:
                        break
                    if i not in piv:
                        unit = {i: ONE}
                        r = dict(unit)
                        for p in sorted(piv):
                            cc = r.get(p)
                            if cc:
                                vadd(r, piv[p], -cc)
                        if not r:
                            continue
                        p = min(r)
                        piv[p] = vscale(r, ONE / r[p])
                        for q in list(piv):
                            if q != p and piv[q].get(p):
                                vadd(piv[q], piv[p], -piv[q][p])
                        chosen.append((reps[i], unit))
                        labels.append(c)
        self.hom_cols = labels
        self.cycle_basis = SparseMatrix._trusted(self._red.dim(self.n), len(chosen), [dict(v) for v, _ in chosen])
        P = SparseMatrix(dim, len(chosen), [c for _, c in chosen])
        self._change = invert_homology_iso(P) if dim else P

    def representative(self, i) -> dict:
        return dict(self.cycle_basis._cols[i])

    def is_cycle(self, vec: dict) -> bool:
        return not self._red.d(self.n).apply(vec)

    def project(self, vec: dict, check: bool = True) -> list:
        """Coordinates of the class of a cycle."""
        if check and not self.is_cycle(vec):
            raise NotAChainMap("projection of a non-cycle")
        c = self._change.apply(self._raw_coords(vec)) if self.dim else {}
        out = [ZERO] * self.dim
        for i, x in c.items():
            out[i] = x
        return out

    def project_matrix(self, M: SparseMatrix, check: bool = True) -> SparseMatrix:
        cols = []
        for j in range(M.cols):
            coords = self.project(M._cols[j], check=check)
            cols.append({i: v for i, v in enumerate(coords) if v})
        return SparseMatrix._trusted(self.dim, M.cols, cols)

    def is_boundary(self, vec: dict) -> bool:
        return self.is_cycle(vec) and not any(self.project(vec, check=False))


class ChainReduction:
    """Reduce a complex with differentials ``d(n): C^n -> C^{n+1}`` on ``lo..top``.

    Each ``d(n)`` (restricted to the columns not already cancelled from
    below) is eliminated completely, so the surviving basis elements in
    degree ``n <= top`` carry the homology.
    """

    def __init__(self, d, dim, lo, top):
        self._d = d
        self._dim = dim
        self.lo = lo
        self.top = top
        self.steps: dict = {}
        self._killed: dict = {}
        self._slices: dict = {}
        self._done = lo - 1

    def d(self, n) -> SparseMatrix:
        return self._d(n)

    def dim(self, n) -> int:
        return self._dim(n)

    def _advance(self, n):
        while self._done < n:
            m = self._done + 1
            killed = self._killed.get(m, set())
            D = self._d(m)
            cols = {j: dict(c) for j, c in enumerate(D._cols) if j not in killed}
            steps, zero = _eliminate(cols)
            self.steps[m] = steps
            self._killed[m + 1] = {st.b for st in steps}
            pivots = {st.a for st in steps}
            surv = [j for j in range(D.cols) if j not in killed and j not in pivots]
            zero_cols = [j for j in range(D.cols) if not D._cols[j]]
            self._slices[m] = ReducedSlice(self, m, surv, zero_cols)
            self._done = m

    def homology(self, n) -> ReducedSlice:
        if n > self.top:
            raise ValueError(f"degree {n} is above the reduced range {self.top}")
        if n < self.lo:
            return ReducedSlice(self, n, [])
        self._advance(n)
        return self._slices[n]


def induced_on_reduced(f: SparseMatrix, src, tgt) -> SparseMatrix:
    """Homology matrix of ``f`` from representatives of ``src`` projected in ``tgt``."""
    images = f @ src.cycle_basis
    return tgt.project_matrix(images, check=True)
