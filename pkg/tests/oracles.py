"""Independent brute-force oracles used by the tests (dense Fractions only)."""

from fractions import Fraction
from itertools import permutations


def dense_rank(rows):
    """Rank by textbook fraction Gaussian elimination on a list of lists."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def dense_matmul(a, b):
    return [[sum(Fraction(a[i][k]) * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def homology_dim(d_in, d_out, n):
    """``dim ker d_out - rank d_in`` for dense matrices on an ``n``-dim space."""
    k = n - (dense_rank(d_out) if d_out and d_out[0] else 0)
    b = dense_rank(d_in) if d_in and d_in[0] else 0
    return k - b


def to_dense(M):
    return [[Fraction(int(v.numerator), int(v.denominator)) for v in row] for row in M.to_dense()]


def koszul_by_transpositions(degrees, perm):
    """Sign of reordering homogeneous factors by adjacent swaps."""
    seq = list(range(len(degrees)))
    target = list(perm)
    sign = 1
    for i, t in enumerate(target):
        j = seq.index(t)
        while j > i:
            a, b = seq[j - 1], seq[j]
            if degrees[a] % 2 and degrees[b] % 2:
                sign = -sign
            seq[j - 1], seq[j] = b, a
            j -= 1
    return sign


def graded_basis_count(degrees, n):
    """Number of monomials of degree ``n`` (odd generators square to zero)."""
    counts = [1] + [0] * n
    for d in degrees:
        new = [0] * (n + 1)
        for k in range(n + 1):
            if not counts[k]:
                continue
            e = 0
            while k + e * d <= n:
                new[k + e * d] += counts[k]
                e += 1
                if d % 2:
                    if e > 1:
                        break
        counts = new
    return counts[n]


def all_perms(n):
    return list(permutations(range(n)))
