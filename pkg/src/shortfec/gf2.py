"""
Binary linear algebra and GF(2)[x] polynomial arithmetic.

Matrices and vectors are plain numpy arrays with entries in {0, 1}
(dtype uint8 preferred).  Permutations are integer index arrays.
Polynomials over GF(2) are Python integers: bit ``i`` of the integer is
the coefficient of ``x^i`` (lowest degree first), so e.g. ``0b1011``
is ``x^3 + x + 1``.  The leading set bit of a nonzero integer is the
leading coefficient, which is therefore always 1.

Also provides the algebraic code constructions built on this
arithmetic: extended BCH generator polynomials / matrices and the
GF(2^m) table machinery they need.
"""

from __future__ import annotations

import numpy as np


class RankDeficientError(ValueError):
    """Raised when a matrix expected to have full row rank does not.

    Attributes:
        row: index of the first row for which no pivot column exists.
    """

    def __init__(self, row: int, k: int):
        self.row = row
        super().__init__(
            f"matrix is rank deficient: no pivot available for row {row} "
            f"(rank {row} < {k} rows)"
        )


def as_bits(a) -> np.ndarray:
    """Coerce to a uint8 array of 0/1 values."""
    out = np.asarray(a, dtype=np.uint8)
    if out.size and out.max() > 1:
        raise ValueError("entries must be 0 or 1")
    return out


def gf2_rref(M, n_pivot_cols=None):
    """Reduced row-echelon form over GF(2).

    Args:
        M: binary matrix, shape (m, n).
        n_pivot_cols: restrict pivot search to the first so many columns
            (row operations still span the full width).

    Returns:
        (R, pivot_cols): the fully reduced matrix and the pivot column
        indices (length = GF(2) rank within the searched columns).
    """
    R = as_bits(M).copy()
    m, n = R.shape
    if n_pivot_cols is None:
        n_pivot_cols = n
    pivot_cols = []
    row = 0
    for col in range(n_pivot_cols):
        if row == m:
            break
        hits = np.nonzero(R[row:, col])[0]
        if hits.size == 0:
            continue
        pr = row + hits[0]
        if pr != row:
            R[[row, pr]] = R[[pr, row]]
        # eliminate everywhere else in this column
        others = np.nonzero(R[:, col])[0]
        others = others[others != row]
        R[others] ^= R[row]
        pivot_cols.append(col)
        row += 1
    return R, pivot_cols


def gf2_rank(M) -> int:
    return len(gf2_rref(M)[1])


def inverse_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def rref_systematic(G, preference):
    """Systematize a full-row-rank generator matrix over a preferred column order.

    Scans columns in ``preference`` order and greedily selects the first
    k linearly independent ones as the information set, i.e. the
    lexicographically-first independent set under the preference.  A
    column that is dependent on the already-selected ones is deferred
    to the parity section, preserving relative order.

    Args:
        G: binary (k, n) generator matrix with full row rank k.
        preference: permutation of range(n), most preferred column first.

    Returns:
        (Gsys, final_perm): ``Gsys`` equals ``G[:, final_perm]`` row reduced
        to ``[I_k | P]``; ``final_perm`` deviates from ``preference`` only
        where forced by linear dependence.

    Raises:
        RankDeficientError: if G has rank < k.
    """
    G = as_bits(G)
    k, n = G.shape
    preference = np.asarray(preference, dtype=np.int64)
    if preference.size != n or not np.array_equal(np.sort(preference), np.arange(n)):
        raise ValueError("preference must be a permutation of range(n)")

    R = G[:, preference].copy()
    chosen = []
    deferred = []
    row = 0
    for col in range(n):
        if row == k:
            deferred.extend(range(col, n))
            break
        hits = np.nonzero(R[row:, col])[0]
        if hits.size == 0:
            deferred.append(col)
            continue
        pr = row + hits[0]
        if pr != row:
            R[[row, pr]] = R[[pr, row]]
        others = np.nonzero(R[:, col])[0]
        others = others[others != row]
        R[others] ^= R[row]
        chosen.append(col)
        row += 1
    if row < k:
        raise RankDeficientError(row, k)

    order = np.array(chosen + deferred, dtype=np.int64)
    final_perm = preference[order]
    Gsys = R[:, order]
    return Gsys, final_perm


def encode(G, u) -> np.ndarray:
    """Encode message u with generator G over GF(2): returns u @ G mod 2."""
    G = as_bits(G)
    u = as_bits(u)
    if u.shape[-1] != G.shape[0]:
        raise ValueError(
            f"message length {u.shape[-1]} != generator rows {G.shape[0]}"
        )
    return (u.astype(np.uint32) @ G.astype(np.uint32) % 2).astype(np.uint8)


# ----------------------------------------------------------------------
# GF(2)[x] polynomials as integers (bit i = coefficient of x^i)
# ----------------------------------------------------------------------

def poly_degree(a: int) -> int:
    """Degree of the polynomial; -1 for the zero polynomial."""
    return a.bit_length() - 1


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divrem(a: int, b: int):
    """Quotient and remainder of a / b over GF(2)[x]."""
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = 0
    db = poly_degree(b)
    while poly_degree(a) >= db:
        shift = poly_degree(a) - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def poly_mod(a: int, b: int) -> int:
    return poly_divrem(a, b)[1]


def poly_from_coeffs(coeffs) -> int:
    """Build from a coefficient sequence, lowest degree first."""
    out = 0
    for i, c in enumerate(coeffs):
        if c & 1:
            out |= 1 << i
    return out


def poly_to_coeffs(a: int, length=None) -> np.ndarray:
    """Coefficient array, lowest degree first, optionally zero-padded."""
    n = max(a.bit_length(), 1) if length is None else length
    if a.bit_length() > n:
        raise ValueError("polynomial does not fit requested length")
    return np.array([(a >> i) & 1 for i in range(n)], dtype=np.uint8)


# ----------------------------------------------------------------------
# GF(2^m) and BCH construction
# ----------------------------------------------------------------------

# Fixed primitive polynomials (lowest-weight conventional choices).
# m = 7 is pinned to x^7 + x^3 + 1.
PRIMITIVE_POLY = {
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
}


def gf2m_exp_log(m: int):
    """Exponential/log tables for GF(2^m) w.r.t. the fixed primitive element."""
    if m not in PRIMITIVE_POLY:
        raise ValueError(f"no primitive polynomial configured for m={m}")
    prim = PRIMITIVE_POLY[m]
    size = 1 << m
    exp = np.zeros(2 * size, dtype=np.int64)
    log = np.zeros(size, dtype=np.int64)
    x = 1
    for i in range(size - 1):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & size:
            x ^= prim
    exp[size - 1: 2 * size - 2] = exp[: size - 1]  # wrap for cheap products
    return exp, log


def cyclotomic_coset(e: int, m: int):
    """The 2-cyclotomic coset of e modulo 2^m - 1, sorted."""
    n = (1 << m) - 1
    coset = set()
    x = e % n
    while x not in coset:
        coset.add(x)
        x = (2 * x) % n
    return sorted(coset)


def minimal_polynomial(e: int, m: int) -> int:
    """Minimal polynomial over GF(2) of alpha^e in GF(2^m)."""
    exp, log = gf2m_exp_log(m)
    n = (1 << m) - 1
    # product of (x - alpha^j) over the coset, with field-valued coefficients
    poly = [1]  # coefficient list in GF(2^m), lowest degree first
    for j in cyclotomic_coset(e, m):
        root = exp[j % n]
        new = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            new[i + 1] ^= c
            if c:
                new[i] ^= exp[(log[c] + log[root]) % n]
        poly = new
    if any(c not in (0, 1) for c in poly):
        raise AssertionError("minimal polynomial has non-binary coefficients")
    return poly_from_coeffs(poly)


def bch_extended_generator(m: int, target_dim: int):
    """Generator polynomial and extended generator matrix of a BCH code.

    Accumulates minimal polynomials of alpha, alpha^2, alpha^3, ... into
    g(x) until deg g = (2^m - 1) - target_dim, then extends the cyclic
    (2^m - 1, target_dim) generator matrix by an overall even-parity
    column, giving a (2^m, target_dim) code.

    Returns:
        (g, G): generator polynomial (int encoding) and the extended
        generator matrix of shape (target_dim, 2^m).

    Raises:
        ValueError: if no consecutive-root prefix achieves the requested
            dimension; the message lists the achievable dimensions.
    """
    n_cyc = (1 << m) - 1
    if not 0 < target_dim < n_cyc:
        raise ValueError(f"target_dim must be in (0, {n_cyc})")
    target_deg = n_cyc - target_dim

    g = 1
    seen = set()
    achievable = []
    e = 1
    while poly_degree(g) < target_deg and e < n_cyc:
        rep = min(cyclotomic_coset(e, m))
        if rep not in seen:
            seen.add(rep)
            g = poly_mul(g, minimal_polynomial(rep, m))
            achievable.append(n_cyc - poly_degree(g))
        e += 1
    if poly_degree(g) != target_deg:
        raise ValueError(
            f"dimension {target_dim} not achievable for m={m}; "
            f"achievable dimensions: {achievable}"
        )

    k = target_dim
    gc = poly_to_coeffs(g, poly_degree(g) + 1)
    G = np.zeros((k, n_cyc + 1), dtype=np.uint8)
    for j in range(k):
        G[j, j: j + gc.size] = gc
    G[:, n_cyc] = G[:, :n_cyc].sum(axis=1) % 2  # overall even parity
    return g, G
