"""Backtracking search for short rank-1 decompositions of the 4x4 determinant over F2.

We look for nondecreasing tuples (A_1, ..., A_r) of rank-1 4x4 matrices over
F2 whose span contains the 6-dimensional space W of alternating symmetric
matrices (the antisymmetric subspace in characteristic 2).  The first
matrix is normalized to one of the two lexicographically smallest rank-1
matrices.  A branch at depth s dies once dim(span ∩ W) < 6 - r + s.

dim(span ∩ W) is tracked as rank(span) - rank(image in V/W), which needs
only two small XOR bases per node: one in the 16-bit matrix space and one
in the 10-bit quotient (diagonal entries plus M_ij + M_ji for i < j).

Completed tuples are optionally passed through the uniqueness-lemma filter
(no nonzero pair (u, v) is hit by exactly one index) and the pair
contraction check.  The search kernel is compiled with numba when
available; the same function runs as plain Python otherwise.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import zlib
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations
from multiprocessing import Pool
from typing import Iterable, Sequence

import numpy as np

from .errors import RunAborted, SchemaViolation
from .linalg import XorBasis

try:  # pragma: no cover - exercised implicitly
    import numba

    _njit = numba.njit(cache=True)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

    def _njit(f):
        return f


N = 4
NA = 225
MASK64 = (1 << 64) - 1
HASH_MULT = 0x9E3779B97F4A7C15
DEFAULT_SAMPLE_MOD = 1 << 12
NOSOLUTION = "NoSolution"
CANDIDATES = "Candidates"

# ---------------------------------------------------------------------------
# packed matrices


def entry(bits: int, i: int, j: int) -> int:
    """Entry (i, j), 1-based."""
    return (bits >> (4 * (i - 1) + (j - 1))) & 1


def from_rows(rows: Sequence[Sequence[int]]) -> int:
    bits = 0
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            if x & 1:
                bits |= 1 << (4 * i + j)
    return bits


def to_rows(bits: int) -> list[list[int]]:
    return [[(bits >> (4 * i + j)) & 1 for j in range(4)] for i in range(4)]


def outer(u: int, v: int) -> int:
    """u v^T for 4-bit vectors (bit k = coordinate k+1)."""
    bits = 0
    for i in range(4):
        if (u >> i) & 1:
            bits |= v << (4 * i)
    return bits


def row_of(bits: int, i: int) -> int:
    return (bits >> (4 * i)) & 0xF


def transpose(bits: int) -> int:
    out = 0
    for i in range(4):
        for j in range(4):
            if (bits >> (4 * i + j)) & 1:
                out |= 1 << (4 * j + i)
    return out


def is_rank1(bits: int) -> bool:
    rows = {row_of(bits, i) for i in range(4)} - {0}
    return len(rows) == 1


def rank1_factors(bits: int) -> tuple[int, int]:
    """(u, v) with bits = u v^T; raises ValueError if not rank 1."""
    if not is_rank1(bits):
        raise ValueError("matrix is not rank 1")
    v = next(row_of(bits, i) for i in range(4) if row_of(bits, i))
    u = sum(1 << i for i in range(4) if row_of(bits, i))
    return u, v


def lex_key(bits: int) -> int:
    """Integer whose order is the lexicographic order reading (1,1), (1,2), ..., (4,4)."""
    key = 0
    for k in range(16):
        key = (key << 1) | ((bits >> k) & 1)
    return key


def lex_leq(m1: int, m2: int) -> bool:
    return lex_key(m1) <= lex_key(m2)


def enum_rank1_f2() -> list[int]:
    """All 225 rank-1 4x4 matrices over F2 in lexicographic order."""
    mats = {outer(u, v) for u in range(1, 16) for v in range(1, 16)}
    return sorted(mats, key=lex_key)


ALPHABET = enum_rank1_f2()
INDEX = {m: t for t, m in enumerate(ALPHABET)}
CANONICAL_FIRST = (ALPHABET[0], ALPHABET[1])

PAIRS = [(i, j) for i in range(4) for j in range(i + 1, 4)]


def quotient(bits: int) -> int:
    """Image of a matrix in V/W as a 10-bit word."""
    q = 0
    for i in range(4):
        q |= entry(bits, i + 1, i + 1) << i
    for k, (i, j) in enumerate(PAIRS):
        q |= (entry(bits, i + 1, j + 1) ^ entry(bits, j + 1, i + 1)) << (4 + k)
    return q


def alternating_basis() -> list[int]:
    """Basis e_i e_j^T + e_j e_i^T (i < j) of W."""
    return [(1 << (4 * i + j)) | (1 << (4 * j + i)) for i, j in PAIRS]


def antisym_dim(mats: Iterable[int]) -> int:
    """dim(span(mats) ∩ W) computed as rank(S) + rank(W) - rank(S + W)."""
    mats = list(mats)
    w = alternating_basis()
    s = XorBasis(mats)
    both = XorBasis(mats + w)
    return len(s) + len(w) - len(both)


def alphabet_hash(alphabet: Sequence[int] = ALPHABET) -> str:
    """Git blob hash of the alphabet serialized as big-endian 16-bit words."""
    data = b"".join(m.to_bytes(2, "big") for m in alphabet)
    header = f"blob {len(data)}\0".encode()
    return hashlib.sha1(header + data).hexdigest()


# ---------------------------------------------------------------------------
# the determinant tensor and the post-search filters


def _perm_sign_f2() -> set[tuple[int, int, int, int]]:
    return set(permutations(range(4)))


DET4_SUPPORT = _perm_sign_f2()


def contraction(u: int, v: int) -> int:
    """Matrix C with C_lm = sum_{j,k} u_j v_k det(j, k, l, m) over F2."""
    out = 0
    for j, k, l, m in DET4_SUPPORT:
        if (u >> j) & 1 and (v >> k) & 1:
            out ^= 1 << (4 * l + m)
    return out


def bilinear(bits: int, u: int, v: int) -> int:
    """u^T M v over F2."""
    acc = 0
    for i in range(4):
        if (u >> i) & 1:
            acc ^= bin(row_of(bits, i) & v).count("1") & 1
    return acc


PAIR_UV = [(u, v) for u in range(1, 16) for v in range(1, 16)]


def hit_mask(bits: int) -> int:
    """225-bit mask of pairs (u, v) with u^T M v = 1."""
    m = 0
    for k, (u, v) in enumerate(PAIR_UV):
        if bilinear(bits, u, v):
            m |= 1 << k
    return m


def lemma_filter_check(mats: Sequence[int]) -> bool:
    """True when no pair (u, v) is hit by exactly one of the matrices."""
    once = many = 0
    for m in mats:
        h = hit_mask(m)
        many |= once & h
        once ^= h
        once &= ~many
    return once == 0


def rank1_splittings(C: int) -> list[int]:
    """Rank-1 X such that C + X is also rank 1."""
    return [x for x in ALPHABET if is_rank1(C ^ x)]


@dataclass
class PairReport:
    feasible: bool
    constraints: list = field(default_factory=list)
    conflict: int | None = None  # 0-based index with an empty candidate set


def pair_contraction_check(mats: Sequence[int]) -> PairReport:
    """Intersect the rank-1 candidates forced on each B_i by doubly-hit pairs."""
    allowed: dict[int, set[int]] = {}
    cons = []
    for u, v in PAIR_UV:
        hits = [i for i, m in enumerate(mats) if bilinear(m, u, v)]
        if len(hits) != 2:
            continue
        C = contraction(u, v)
        cand = set(rank1_splittings(C))
        cons.append(((u, v), tuple(hits), C))
        for i in hits:
            allowed[i] = allowed[i] & cand if i in allowed else set(cand)
            if not allowed[i]:
                return PairReport(False, cons, i)
    return PairReport(True, cons)


# ---------------------------------------------------------------------------
# kernel


def _tables():
    full = np.array(ALPHABET, dtype=np.int64)
    quot = np.array([quotient(m) for m in ALPHABET], dtype=np.int64)
    hits = np.zeros((NA, 4), dtype=np.uint64)
    for t, m in enumerate(ALPHABET):
        h = hit_mask(m)
        for w in range(4):
            hits[t, w] = (h >> (64 * w)) & MASK64
    return full, quot, hits


FULL, QUOT, HITS = _tables()


def mix_hash(h: int, t: int) -> int:
    """Rolling hash of a node's index tuple (plain-Python mirror of the kernel)."""
    return ((h ^ (t + 1)) * HASH_MULT) & MASK64


def sample_key(h: int) -> int:
    return (h ^ (h >> 29)) & MASK64


@_njit
def _reduce(v, basis, nbits):
    for b in range(nbits - 1, -1, -1):
        if (v >> b) & 1 and basis[b] != 0:
            v ^= basis[b]
    return v


@_njit
def _kernel(full, quot, hits, r, prefix, use_lemma, sample_mod, cand_out, sample_out, counters):
    """Depth-first search below a fixed prefix.

    counters: [nodes, pruned, span_candidates, lemma_eliminated, n_cand, n_sample, overflow]
    """
    na = full.shape[0]
    plen = prefix.shape[0]
    fb = np.zeros((r + 1, 16), dtype=np.int64)
    qb = np.zeros((r + 1, 10), dtype=np.int64)
    slack = np.zeros(r + 1, dtype=np.int64)
    hs = np.zeros(r + 1, dtype=np.uint64)
    cur = np.zeros(r + 1, dtype=np.int64)
    idx = np.zeros(r, dtype=np.int64)
    mult = np.uint64(HASH_MULT)

    # replay the prefix; the caller guarantees it was not pruned
    slack[0] = r - 6
    for s in range(plen):
        t = prefix[s]
        rf = _reduce(full[t], fb[s], 16)
        rq = _reduce(quot[t], qb[s], 10)
        dd = 1 if (rf != 0 and rq == 0) else 0
        for b in range(16):
            fb[s + 1, b] = fb[s, b]
        for b in range(10):
            qb[s + 1, b] = qb[s, b]
        if rf != 0:
            top = 0
            for b in range(16):
                if (rf >> b) & 1:
                    top = b
            fb[s + 1, top] = rf
        if rq != 0:
            top = 0
            for b in range(10):
                if (rq >> b) & 1:
                    top = b
            qb[s + 1, top] = rq
        slack[s + 1] = slack[s] + dd - 1
        hs[s + 1] = (hs[s] ^ np.uint64(t + 1)) * mult
        idx[s] = t
    if plen == r:
        return

    s = plen
    cur[s] = prefix[plen - 1]
    while True:
        t = cur[s]
        if t >= na:
            if s == plen:
                break
            s -= 1
            continue
        cur[s] = t + 1
        rf = _reduce(full[t], fb[s], 16)
        rq = _reduce(quot[t], qb[s], 10)
        dd = 1 if (rf != 0 and rq == 0) else 0
        ns = slack[s] + dd - 1
        h = (hs[s] ^ np.uint64(t + 1)) * mult
        if ns < 0:
            counters[1] += 1
            key = h ^ (h >> np.uint64(29))
            if key % np.uint64(sample_mod) == 0:
                k = counters[5]
                if k < sample_out.shape[0]:
                    for q in range(s):
                        sample_out[k, q] = idx[q]
                    sample_out[k, s] = t
                    for q in range(s + 1, r):
                        sample_out[k, q] = -1
                    counters[5] = k + 1
                else:
                    counters[6] = 1
            continue
        counters[0] += 1
        idx[s] = t
        if s + 1 == r:
            counters[2] += 1
            keep = True
            if use_lemma:
                for w in range(4):
                    once = np.uint64(0)
                    many = np.uint64(0)
                    for q in range(r):
                        hq = hits[idx[q], w]
                        many |= once & hq
                        once ^= hq
                        once &= ~many
                    if once != 0:
                        keep = False
                        break
                if not keep:
                    counters[3] += 1
            if keep:
                k = counters[4]
                if k < cand_out.shape[0]:
                    for q in range(r):
                        cand_out[k, q] = idx[q]
                    counters[4] = k + 1
                else:
                    counters[6] = 1
            continue
        for b in range(16):
            fb[s + 1, b] = fb[s, b]
        for b in range(10):
            qb[s + 1, b] = qb[s, b]
        if rf != 0:
            top = 0
            for b in range(16):
                if (rf >> b) & 1:
                    top = b
            fb[s + 1, top] = rf
        if rq != 0:
            top = 0
            for b in range(10):
                if (rq >> b) & 1:
                    top = b
            qb[s + 1, top] = rq
        slack[s + 1] = ns
        hs[s + 1] = h
        cur[s + 1] = t
        s += 1


_py_kernel = getattr(_kernel, "py_func", _kernel)


# ---------------------------------------------------------------------------
# driver


@dataclass
class SearchConfig:
    r: int = 9
    first_variants: tuple[int, ...] = (0, 1)  # alphabet indices of A_1
    workers: int | None = None
    lemma_filter: bool = True
    pair_check: bool = True
    allow_r11: bool = False
    sample_mod: int = DEFAULT_SAMPLE_MOD
    max_candidates: int = 1_000_000
    max_samples: int = 200_000
    jit: bool = True

    def validate(self) -> None:
        if self.r not in (9, 10, 11) and not 6 <= self.r <= 11:
            raise ValueError("r must lie in 6..11")
        if self.r == 11 and not self.allow_r11:
            raise ValueError("r = 11 needs the explicit long-run flag")
        if not set(self.first_variants) <= {0, 1} or not self.first_variants:
            raise ValueError("first_variants must be a subset of {0, 1}")


@dataclass
class SearchResult:
    r: int
    outcome: str
    nodes_visited: int
    pruned: int
    span_candidates: int
    lemma_eliminated: int
    pair_eliminated: int
    candidates: list[tuple[int, ...]]
    pruned_sample: list[tuple[int, ...]]
    wall_seconds: float
    config: dict


def default_workers() -> int:
    env = os.environ.get("DETBELL_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def prefixes(r: int, first_variants: Sequence[int]) -> list[tuple[int, ...]]:
    """Depth-2 prefixes that survive the prune rule, in canonical order."""
    out = []
    for a in first_variants:
        for t in range(a, NA):
            d = antisym_dim([ALPHABET[a], ALPHABET[t]])
            if d >= 6 - r + 2:
                out.append((a, t))
    return out


def _pruned_at_depth2(r: int, first_variants: Sequence[int], sample_mod: int) -> tuple[int, int, list]:
    """Nodes and prunes contributed by depths 1 and 2 (done in the driver)."""
    nodes = pruned = 0
    sample = []
    for a in first_variants:
        nodes += 1  # A_1 itself: d = 0 >= 6 - r + 1 for r >= 7
        h1 = mix_hash(0, a)
        for t in range(a, NA):
            d = antisym_dim([ALPHABET[a], ALPHABET[t]])
            if d >= 6 - r + 2:
                nodes += 1
            else:
                pruned += 1
                h = mix_hash(h1, t)
                if sample_key(h) % sample_mod == 0:
                    sample.append((a, t))
    return nodes, pruned, sample


def _run_prefix(args):
    prefix, r, use_lemma, sample_mod, max_cand, max_samples, jit = args
    kern = _kernel if jit and HAVE_NUMBA else _py_kernel
    cand = np.zeros((max_cand, r), dtype=np.int64)
    samp = np.zeros((max_samples, r), dtype=np.int64)
    counters = np.zeros(7, dtype=np.int64)
    with np.errstate(over="ignore"):  # the hash wraps mod 2^64 on purpose
        kern(FULL, QUOT, HITS, r, np.array(prefix, dtype=np.int64), use_lemma,
             sample_mod, cand, samp, counters)
    if counters[6]:
        raise RunAborted(f"output buffers overflowed below prefix {prefix}")
    cands = [tuple(int(x) for x in row) for row in cand[: counters[4]]]
    samples = [tuple(int(x) for x in row if x >= 0) for row in samp[: counters[5]]]
    return prefix, [int(c) for c in counters[:4]], cands, samples


def canonical_candidate(tup: Sequence[int]) -> tuple[int, ...]:
    """Representative of a tuple up to transposing every matrix."""
    a = tuple(sorted(tup))
    b = tuple(sorted(INDEX[transpose(ALPHABET[t])] for t in tup))
    return min(a, b)


def search(config: SearchConfig, progress=None) -> SearchResult:
    config.validate()
    r = config.r
    start = time.perf_counter()
    work = prefixes(r, config.first_variants)
    nodes, pruned, sample = _pruned_at_depth2(r, config.first_variants, config.sample_mod)
    span = lemma = 0
    raw: list[tuple[int, ...]] = []
    args = [
        (p, r, config.lemma_filter, config.sample_mod, config.max_candidates,
         config.max_samples, config.jit)
        for p in work
    ]
    workers = config.workers or default_workers()
    if workers > 1:
        with Pool(workers) as pool:
            results = pool.imap(_run_prefix, args, chunksize=1)
            results = list(_progress(results, len(args), progress))
    else:
        results = list(_progress(map(_run_prefix, args), len(args), progress))
    for _prefix, counts, cands, samples in results:
        nodes += counts[0]
        pruned += counts[1]
        span += counts[2]
        lemma += counts[3]
        raw.extend(cands)
        sample.extend(samples)
    pair_elim = 0
    survivors = []
    for tup in raw:
        if config.pair_check and config.lemma_filter:
            if not pair_contraction_check([ALPHABET[t] for t in tup]).feasible:
                pair_elim += 1
                continue
        survivors.append(tup)
    cands = sorted({canonical_candidate(t) for t in survivors})
    sample = sorted(set(sample), key=lambda tup: (_tuple_hash_key(tup), tup))
    return SearchResult(
        r=r,
        outcome=CANDIDATES if cands else NOSOLUTION,
        nodes_visited=nodes,
        pruned=pruned,
        span_candidates=span,
        lemma_eliminated=lemma,
        pair_eliminated=pair_elim,
        candidates=cands,
        pruned_sample=sample,
        wall_seconds=time.perf_counter() - start,
        config={
            "first_variants": list(config.first_variants),
            "lemma_filter": config.lemma_filter,
            "pair_check": config.pair_check,
            "sample_mod": config.sample_mod,
        },
    )


def _progress(it, total, callback):
    for k, item in enumerate(it, 1):
        if callback:
            callback(k, total)
        yield item


def _tuple_hash_key(tup: Sequence[int]) -> int:
    h = 0
    for t in tup:
        h = mix_hash(h, t)
    return sample_key(h)


# ---------------------------------------------------------------------------
# certificates

CERT_SAMPLE = 1000


def _content_hash(doc: dict) -> str:
    body = {k: v for k, v in doc.items() if k != "content_hash"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def certify(result: SearchResult, sample_size: int = CERT_SAMPLE) -> dict:
    doc = {
        "r": result.r,
        "outcome": result.outcome,
        "nodes_visited": result.nodes_visited,
        "pruned": result.pruned,
        "span_candidates": result.span_candidates,
        "lemma_eliminated": result.lemma_eliminated,
        "pair_eliminated": result.pair_eliminated,
        "candidates": [[ALPHABET[t] for t in tup] for tup in result.candidates],
        "wall_seconds": round(result.wall_seconds, 3),
        "alphabet_hash": alphabet_hash(),
        "config": result.config,
        "pruned_sample": [[ALPHABET[t] for t in tup] for tup in result.pruned_sample[:sample_size]],
    }
    doc["content_hash"] = _content_hash(doc)
    return doc


@dataclass
class CertificateReport:
    ok: bool
    problems: list[str]
    checked_nodes: int = 0


REQUIRED = ("r", "outcome", "nodes_visited", "pruned", "lemma_eliminated",
            "candidates", "wall_seconds", "alphabet_hash", "content_hash")


def check_pruned_node(mats: Sequence[int], r: int) -> bool:
    """A logged pruned node: its parent was alive and it fails the bound."""
    s = len(mats)
    if s < 1 or mats[0] not in CANONICAL_FIRST:
        return False
    if any(lex_key(a) > lex_key(b) for a, b in zip(mats, mats[1:])):
        return False
    if not all(is_rank1(m) for m in mats):
        return False
    parent_ok = all(antisym_dim(mats[:k]) >= 6 - r + k for k in range(1, s))
    return parent_ok and antisym_dim(mats) < 6 - r + s


def verify_certificate(doc: dict) -> CertificateReport:
    problems = []
    if not isinstance(doc, dict):
        raise SchemaViolation("certificate must be a JSON object")
    missing = [k for k in REQUIRED if k not in doc]
    if missing:
        raise SchemaViolation(f"missing fields: {missing}")
    if doc["content_hash"] != _content_hash(doc):
        problems.append("content hash mismatch")
    if doc["alphabet_hash"] != alphabet_hash():
        problems.append("alphabet hash mismatch")
    if doc["outcome"] not in (NOSOLUTION, CANDIDATES):
        problems.append(f"unknown outcome {doc['outcome']!r}")
    if (doc["outcome"] == NOSOLUTION) != (not doc["candidates"]):
        problems.append("outcome disagrees with candidate list")
    r = doc["r"]
    checked = 0
    for mats in doc.get("pruned_sample", []):
        if not check_pruned_node(mats, r):
            problems.append(f"logged node {mats} is not a valid pruned node")
        checked += 1
    for mats in doc["candidates"]:
        if len(mats) != r or antisym_dim(mats) != 6:
            problems.append(f"candidate {mats} does not contain W")
    return CertificateReport(not problems, problems, checked)


def completion_exists(mats: Sequence[int], r: int, alphabet: Sequence[int]) -> bool:
    """Brute force: can mats be extended to length r (from alphabet) with W in the span?"""
    last = lex_key(mats[-1])
    pool = sorted({m for m in alphabet if lex_key(m) >= last}, key=lex_key)
    k = r - len(mats)
    for ext in combinations_with_replacement(pool, k):
        if antisym_dim(list(mats) + list(ext)) == 6:
            return True
    return False


def pruned_node_sample(result: SearchResult, k: int) -> list[list[int]]:
    return [[ALPHABET[t] for t in tup] for tup in result.pruned_sample[:k]]


def crc_of(mats: Sequence[int]) -> int:
    return zlib.crc32(b"".join(m.to_bytes(2, "big") for m in mats))
