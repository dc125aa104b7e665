"""
Binary LDPC codes: alist ingestion, flooding sum-product decoding, and
the BP-then-OSD hybrid.

The check-node update is the exact tanh/atanh rule computed with
prefix/suffix partial products (no divisions), with incoming messages
clamped to |L| <= 30 for numerical stability.  After every iteration
the syndrome of the current hard decision is tested; a zero syndrome
stops the decoder with detected_failure False, and exhausting the
iteration budget returns the hard decision with detected_failure True.

The alist interchange format is MacKay's: dimensions, max degrees,
degree lists, then 1-indexed adjacency lists zero-padded to the max
degree.  The writer emits that canonical padded form.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from . import gf2
from .codes import LinearCode, derive_generator
from .osd import OsdConfig, osd_decode_batch


@dataclass(frozen=True)
class SparseParityCheck:
    """Adjacency-list form of a binary parity-check matrix."""

    n: int
    m_rows: int
    col_adj: tuple  # per variable: sorted check indices
    row_adj: tuple  # per check: sorted variable indices

    def __post_init__(self):
        edges = sorted((c, v) for v, checks in enumerate(self.col_adj) for c in checks)
        edges2 = sorted((c, v) for c, vs in enumerate(self.row_adj) for v in vs)
        if edges != edges2:
            raise ValueError("column and row adjacency lists are inconsistent")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.col_adj)

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.m_rows, self.n), dtype=np.uint8)
        for v, checks in enumerate(self.col_adj):
            for c in checks:
                H[c, v] = 1
        return H

    @classmethod
    def from_dense(cls, H) -> "SparseParityCheck":
        H = gf2.as_bits(H)
        m, n = H.shape
        col_adj = tuple(tuple(np.nonzero(H[:, v])[0]) for v in range(n))
        row_adj = tuple(tuple(np.nonzero(H[c])[0]) for c in range(m))
        return cls(n=n, m_rows=m, col_adj=col_adj, row_adj=row_adj)


class AlistError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"alist line {line}: {message}")


def parse_alist(text: str) -> SparseParityCheck:
    """Parse MacKay-format alist text (1-indexed, zero-padded lists)."""
    rows = [ln.split() for ln in text.splitlines()]
    rows = [r for r in rows if r]

    def ints(i):
        if i >= len(rows):
            raise AlistError(i + 1, "unexpected end of file")
        try:
            return [int(x) for x in rows[i]]
        except ValueError as exc:
            raise AlistError(i + 1, f"non-integer token: {exc}") from None

    dims = ints(0)
    if len(dims) != 2:
        raise AlistError(1, "expected 'n m_rows'")
    n, m = dims
    if n < 1 or m < 1:
        raise AlistError(1, "dimensions must be positive")
    maxes = ints(1)
    if len(maxes) != 2:
        raise AlistError(2, "expected 'max_col_degree max_row_degree'")
    col_deg = ints(2)
    if len(col_deg) != n:
        raise AlistError(3, f"expected {n} column degrees")
    row_deg = ints(3)
    if len(row_deg) != m:
        raise AlistError(4, f"expected {m} row degrees")

    col_adj = []
    for v in range(n):
        entries = ints(4 + v)
        vals = [e for e in entries if e != 0]
        if len(vals) != col_deg[v]:
            raise AlistError(
                5 + v, f"column {v}: {len(vals)} entries, degree says {col_deg[v]}"
            )
        for e in vals:
            if not 1 <= e <= m:
                raise AlistError(5 + v, f"check index {e} out of range 1..{m}")
        col_adj.append(tuple(sorted(e - 1 for e in vals)))
    for c in range(m):
        entries = ints(4 + n + c)
        vals = [e for e in entries if e != 0]
        if len(vals) != row_deg[c]:
            raise AlistError(
                5 + n + c, f"row {c}: {len(vals)} entries, degree says {row_deg[c]}"
            )
        for e in vals:
            if not 1 <= e <= n:
                raise AlistError(5 + n + c, f"variable index {e} out of range 1..{n}")
    row_adj = tuple(
        tuple(sorted(e - 1 for e in ints(4 + n + c) if e != 0)) for c in range(m)
    )
    try:
        return SparseParityCheck(n=n, m_rows=m, col_adj=tuple(col_adj), row_adj=row_adj)
    except ValueError as exc:
        raise AlistError(5, str(exc)) from None


def write_alist(H: SparseParityCheck) -> str:
    """Canonical alist text: sorted adjacency, zero-padded, 1-indexed."""
    max_col = max(len(a) for a in H.col_adj)
    max_row = max(len(a) for a in H.row_adj)
    lines = [
        f"{H.n} {H.m_rows}",
        f"{max_col} {max_row}",
        " ".join(str(len(a)) for a in H.col_adj),
        " ".join(str(len(a)) for a in H.row_adj),
    ]
    for adj, width in ((H.col_adj, max_col), (H.row_adj, max_row)):
        for entries in adj:
            padded = [e + 1 for e in entries] + [0] * (width - len(entries))
            lines.append(" ".join(str(x) for x in padded))
    return "\n".join(lines) + "\n"


def load_builtin(name: str) -> SparseParityCheck:
    """Load a parity-check matrix shipped with the package."""
    text = (
        importlib.resources.files("shortfec").joinpath(f"data/{name}").read_text()
    )
    return parse_alist(text)


@dataclass(frozen=True)
class BpConfig:
    max_iters: int = 50

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


def _edge_arrays(H: SparseParityCheck):
    """CSR-style edge layout in check-major order plus per-variable view."""
    chk_ptr = np.zeros(H.m_rows + 1, dtype=np.int64)
    for c, vs in enumerate(H.row_adj):
        chk_ptr[c + 1] = chk_ptr[c] + len(vs)
    edge_var = np.empty(H.n_edges, dtype=np.int64)
    e = 0
    for vs in H.row_adj:
        for v in vs:
            edge_var[e] = v
            e += 1
    var_ptr = np.zeros(H.n + 1, dtype=np.int64)
    for v, cs in enumerate(H.col_adj):
        var_ptr[v + 1] = var_ptr[v] + len(cs)
    var_edges = np.empty(H.n_edges, dtype=np.int64)
    fill = var_ptr[:-1].copy()
    for e, v in enumerate(edge_var):
        var_edges[fill[v]] = e
        fill[v] += 1
    return chk_ptr, edge_var, var_ptr, var_edges


_CLAMP = 30.0


@njit(cache=True)
def _bp_frame(llr, chk_ptr, edge_var, var_ptr, var_edges, max_iters):
    n = llr.size
    m = chk_ptr.size - 1
    E = edge_var.size
    msg_cv = np.zeros(E, dtype=np.float64)  # check -> var, check-major
    q = np.empty(E, dtype=np.float64)  # var -> check
    tot = np.empty(n, dtype=np.float64)
    hard = np.empty(n, dtype=np.uint8)
    tanhbuf = np.empty(E, dtype=np.float64)

    for it in range(1, max_iters + 1):
        # variable update: q_e = channel + sum of other incoming messages
        for v in range(n):
            s = llr[v]
            for ei in range(var_ptr[v], var_ptr[v + 1]):
                s += msg_cv[var_edges[ei]]
            tot[v] = s
        for e in range(E):
            val = tot[edge_var[e]] - msg_cv[e]
            if val > _CLAMP:
                val = _CLAMP
            elif val < -_CLAMP:
                val = -_CLAMP
            q[e] = val
        # check update via prefix/suffix partial products of tanh(q/2)
        for e in range(E):
            tanhbuf[e] = np.tanh(0.5 * q[e])
        for c in range(m):
            lo = chk_ptr[c]
            hi = chk_ptr[c + 1]
            prefix = 1.0
            for e in range(lo, hi):
                msg_cv[e] = prefix
                prefix *= tanhbuf[e]
            suffix = 1.0
            for e in range(hi - 1, lo - 1, -1):
                prod = msg_cv[e] * suffix
                suffix *= tanhbuf[e]
                if prod > 0.999999999999:
                    prod = 0.999999999999
                elif prod < -0.999999999999:
                    prod = -0.999999999999
                msg_cv[e] = 2.0 * np.arctanh(prod)
        # posterior, hard decision, syndrome test
        for v in range(n):
            s = llr[v]
            for ei in range(var_ptr[v], var_ptr[v + 1]):
                s += msg_cv[var_edges[ei]]
            hard[v] = 1 if s < 0.0 else 0
        ok = True
        for c in range(m):
            parity = 0
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                parity ^= hard[edge_var[e]]
            if parity:
                ok = False
                break
        if ok:
            return hard, False, it
    return hard, True, max_iters


@njit(cache=True, parallel=True)
def _bp_batch(llrs, chk_ptr, edge_var, var_ptr, var_edges, max_iters):
    B, n = llrs.shape
    hards = np.empty((B, n), dtype=np.uint8)
    fails = np.empty(B, dtype=np.bool_)
    iters = np.empty(B, dtype=np.int64)
    for f in prange(B):
        h, bad, it = _bp_frame(
            llrs[f], chk_ptr, edge_var, var_ptr, var_edges, max_iters
        )
        hards[f] = h
        fails[f] = bad
        iters[f] = it
    return hards, fails, iters


class BpDecoder:
    """Flooding sum-product decoder bound to one parity-check matrix."""

    def __init__(self, H: SparseParityCheck, cfg: BpConfig = BpConfig()):
        self.H = H
        self.cfg = cfg
        self._edges = _edge_arrays(H)
        self._dense = H.to_dense()

    def decode(self, llrs):
        """Returns (codeword_estimate, detected_failure, iterations)."""
        llrs = np.ascontiguousarray(llrs, dtype=np.float64)
        if llrs.size != self.H.n:
            raise ValueError(f"expected {self.H.n} LLRs")
        hard, fail, iters = _bp_frame(llrs, *self._edges, self.cfg.max_iters)
        return hard, bool(fail), int(iters)

    def decode_batch(self, llrs):
        llrs = np.ascontiguousarray(llrs, dtype=np.float64)
        return _bp_batch(llrs, *self._edges, self.cfg.max_iters)


def bp_decode(H: SparseParityCheck, llrs, cfg: BpConfig = BpConfig()):
    """One-shot BP decode; returns (codeword_estimate, detected_failure)."""
    hard, fail, _ = BpDecoder(H, cfg).decode(llrs)
    return hard, fail


class BpOsdDecoder:
    """BP with an order-t OSD fallback on detected BP failures.

    The OSD stage sees the raw channel LLRs by default; set
    use_bp_llrs to rank reliabilities by the BP posteriors instead.
    """

    def __init__(
        self,
        H: SparseParityCheck,
        code: LinearCode | None = None,
        bp_cfg: BpConfig = BpConfig(),
        osd_cfg: OsdConfig = OsdConfig(order=4),
        use_bp_llrs: bool = False,
    ):
        self.bp = BpDecoder(H, bp_cfg)
        if code is None:
            G = derive_generator(H.to_dense())
            code = LinearCode.from_generator(G)
        if (code.G.astype(np.uint32) @ H.to_dense().T.astype(np.uint32) % 2).any():
            raise ValueError("generator inconsistent with the parity-check matrix")
        self.code = code
        self.osd_cfg = osd_cfg
        self.use_bp_llrs = use_bp_llrs

    def decode_batch(self, llrs, rho: float = 0.0):
        """Returns (codewords, detected_failure=all False)."""
        llrs = np.ascontiguousarray(llrs, dtype=np.float64)
        hard, fail, _ = self.bp.decode_batch(llrs)
        out = hard.copy()
        if fail.any():
            idx = np.nonzero(fail)[0]
            osd_in = llrs[idx]
            cw = osd_decode_batch(self.code, osd_in, self.osd_cfg, rho=rho)
            out[idx] = cw
        return out, np.zeros(llrs.shape[0], dtype=bool)


def bp_then_osd(H, G, llrs, bp_cfg: BpConfig, osd_cfg: OsdConfig, rho: float = 0.0):
    """One-shot hybrid decode of a single frame.

    Returns (codeword, detected_failure=False): on BP convergence the BP
    word, otherwise the order-t OSD decision on the channel LLRs.
    """
    code = LinearCode.from_generator(G)
    dec = BpOsdDecoder(H, code=code, bp_cfg=bp_cfg, osd_cfg=osd_cfg)
    cw, _ = dec.decode_batch(np.asarray(llrs, dtype=np.float64)[None, :], rho=rho)
    return cw[0], False


# ----------------------------------------------------------------------
# deterministic girth-aware PEG construction (test asset generator)
# ----------------------------------------------------------------------

def peg_construct(n: int, m_rows: int, col_degree: int, seed: int) -> SparseParityCheck:
    """Progressive edge growth for a regular code, deterministic per seed.

    For each variable (in index order) each new edge goes to a check at
    maximal BFS distance in the current graph; ties prefer the lowest
    current degree, then a seeded random choice.  Row degrees are capped
    at the regular value n * col_degree / m_rows.
    """
    if (n * col_degree) % m_rows:
        raise ValueError("row degree would not be integral")
    row_cap = n * col_degree // m_rows
    rng = np.random.default_rng(seed)
    col_adj = [[] for _ in range(n)]
    row_adj = [[] for _ in range(m_rows)]
    row_deg = np.zeros(m_rows, dtype=np.int64)

    for v in range(n):
        for _ in range(col_degree):
            dist = _check_distances(v, col_adj, row_adj, m_rows)
            # unreachable (inf) checks are the best candidates
            eligible = [
                c
                for c in range(m_rows)
                if row_deg[c] < row_cap and c not in col_adj[v]
            ]
            if not eligible:
                raise ValueError("no eligible check node; parameters infeasible")
            far = max(dist[c] for c in eligible)
            pool = [c for c in eligible if dist[c] == far]
            min_deg = min(row_deg[c] for c in pool)
            pool = [c for c in pool if row_deg[c] == min_deg]
            choice = pool[int(rng.integers(len(pool)))]
            col_adj[v].append(choice)
            row_adj[choice].append(v)
            row_deg[choice] += 1

    return SparseParityCheck(
        n=n,
        m_rows=m_rows,
        col_adj=tuple(tuple(sorted(a)) for a in col_adj),
        row_adj=tuple(tuple(sorted(a)) for a in row_adj),
    )


def _check_distances(v: int, col_adj, row_adj, m_rows) -> dict:
    """BFS distance from variable v to every check; inf if unreachable."""
    INF = float("inf")
    dist = {c: INF for c in range(m_rows)}
    frontier_checks = list(col_adj[v])
    seen_v = {v}
    seen_c = set(frontier_checks)
    d = 0
    for c in frontier_checks:
        dist[c] = 0
    while frontier_checks:
        next_vars = []
        for c in frontier_checks:
            for u in row_adj[c]:
                if u not in seen_v:
                    seen_v.add(u)
                    next_vars.append(u)
        frontier_checks = []
        d += 1
        for u in next_vars:
            for c in col_adj[u]:
                if c not in seen_c:
                    seen_c.add(c)
                    dist[c] = d
                    frontier_checks.append(c)
    return dist
