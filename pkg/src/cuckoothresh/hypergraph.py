"""Random k-uniform hypergraph models, degrees, densities and 2-core peeling.

Vertices are the integers ``0..n-1`` and model table slots; every edge is a
sorted k-tuple of vertices and models the location choices of one item.
Edges are stored as an ``(m, k)`` integer array so that generation and
degree counting stay vectorised at ``n = 10**5`` and beyond.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

import numpy as np

__all__ = [
    "Hypergraph",
    "CoreSubgraph",
    "DegreeSequence",
    "make_rng",
    "derive_seed",
    "gen_multigraph",
    "gen_simple",
    "gen_binomial",
    "gen_poisson_cloning",
    "gen_truncated_core_model",
    "peel_core",
    "degree_sequence",
    "subset_density",
    "count_duplicate_pairs",
    "read_hypergraph",
    "write_hypergraph",
]

# Above this many candidate edges the edge count of H_{n,p,k} is drawn from an
# approximating distribution instead of an exact binomial.
_EXACT_BINOMIAL_LIMIT = 2**62
# Below this many candidate edges gen_simple samples edge ranks directly.
_RANK_SAMPLING_LIMIT = 1 << 20


def make_rng(seed: int | None) -> np.random.Generator:
    """PCG64 generator; the single RNG family used by every model."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(master_seed: int, *index: int) -> int:
    """Stream-splitting rule: child seed for ``(master_seed, *index)``.

    Built on :class:`numpy.random.SeedSequence`, so the mapping is fixed
    across platforms and independent of scheduling order.
    """
    ss = np.random.SeedSequence([master_seed, *index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class Hypergraph:
    n: int
    k: int
    edges: np.ndarray
    multiset_edges: bool = False
    # clones left over by an imperfect k-matching (cloning models only)
    dropped_clones: int = 0

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, self.k)
        edges = np.sort(edges, axis=1)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        if self.k < 2:
            raise ValueError(f"edge arity must be >= 2, got k={self.k}")
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise ValueError("edge refers to a vertex outside 0..n-1")
        if not self.multiset_edges and self.k > 1 and edges.size:
            if np.any(edges[:, 1:] == edges[:, :-1]):
                raise ValueError("edge with a repeated vertex; pass multiset_edges=True")

    @classmethod
    def from_edges(cls, n: int, k: int, edges: Iterable[Iterable[int]], **kw) -> "Hypergraph":
        return cls(n, k, np.array([list(e) for e in edges], dtype=np.int64).reshape(-1, k), **kw)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def edge_list(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.edges]

    def is_simple(self) -> bool:
        if self.multiset_edges:
            return False
        return len(np.unique(self.edges, axis=0)) == self.m

    def subgraph(self, edge_indices) -> "Hypergraph":
        """Same vertex set, restricted to the given edges."""
        return Hypergraph(self.n, self.k, self.edges[np.asarray(edge_indices, dtype=np.int64)],
                          multiset_edges=self.multiset_edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n, self.k, self.multiset_edges) == (other.n, other.k, other.multiset_edges) \
            and np.array_equal(self.edges, other.edges)

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, k={self.k}, m={self.m}, multiset={self.multiset_edges})"


@dataclass(frozen=True)
class CoreSubgraph:
    vertices: list[int]
    edge_indices: list[int]

    @property
    def n2(self) -> int:
        return len(self.vertices)

    @property
    def m2(self) -> int:
        return len(self.edge_indices)

    @property
    def density(self) -> float:
        return self.m2 / self.n2 if self.n2 else 0.0


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray = field(repr=False)

    @property
    def total(self) -> int:
        return int(self.degrees.sum())

    def __len__(self) -> int:
        return len(self.degrees)


def _check_nk(n: int, k: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n < k:
        raise ValueError(f"need n >= k, got n={n}, k={k}")


def _uniform_k_subsets(rng: np.random.Generator, n: int, k: int, m: int) -> np.ndarray:
    """``m`` independent uniform k-subsets, rows sorted ascending.

    Each row is drawn as k independent uniform indices and redrawn whole
    until its entries are distinct.
    """
    out = rng.integers(0, n, size=(m, k), dtype=np.int64)
    out.sort(axis=1)
    bad = np.flatnonzero(np.any(out[:, 1:] == out[:, :-1], axis=1))
    while bad.size:
        redo = rng.integers(0, n, size=(bad.size, k), dtype=np.int64)
        redo.sort(axis=1)
        out[bad] = redo
        still = np.any(redo[:, 1:] == redo[:, :-1], axis=1)
        bad = bad[still]
    return out


def _unrank_combination(rank: int, n: int, k: int) -> list[int]:
    # lexicographic order of k-subsets of range(n)
    combo = []
    v = 0
    for slots in range(k, 0, -1):
        while True:
            c = math.comb(n - v - 1, slots - 1)
            if rank < c:
                break
            rank -= c
            v += 1
        combo.append(v)
        v += 1
    return combo


def gen_multigraph(n: int, m: int, k: int, seed: int | None = None) -> Hypergraph:
    """H*_{n,m,k}: m independent uniform k-subsets; repeated edges allowed."""
    _check_nk(n, k)
    if m < 0:
        raise ValueError("m must be nonnegative")
    rng = make_rng(seed)
    return Hypergraph(n, k, _uniform_k_subsets(rng, n, k, m))


def gen_simple(n: int, m: int, k: int, seed: int | None = None) -> Hypergraph:
    """H_{n,m,k}: m pairwise distinct uniform k-subsets, in random order."""
    _check_nk(n, k)
    total = math.comb(n, k)
    if m < 0 or m > total:
        raise ValueError(f"need 0 <= m <= C(n,k) = {total}, got m={m}")
    rng = make_rng(seed)
    if total <= _RANK_SAMPLING_LIMIT:
        ranks = rng.choice(total, size=m, replace=False)
        edges = np.array([_unrank_combination(int(r), n, k) for r in ranks], dtype=np.int64)
        return Hypergraph(n, k, edges.reshape(-1, k))

    edges = _uniform_k_subsets(rng, n, k, m)
    while True:
        _, first = np.unique(edges, axis=0, return_index=True)
        if len(first) == len(edges):
            break
        first.sort()
        kept = edges[first]
        edges = np.concatenate([kept, _uniform_k_subsets(rng, n, k, m - len(kept))])
    return Hypergraph(n, k, edges)


def gen_binomial(n: int, p: float, k: int, seed: int | None = None) -> Hypergraph:
    """H_{n,p,k}: every k-subset present independently with probability p.

    The edge count is drawn first and the edges are then a uniform simple
    graph with that many edges, which is the same distribution.
    """
    _check_nk(n, k)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    total = math.comb(n, k)
    rng = make_rng(seed)
    if total <= _EXACT_BINOMIAL_LIMIT:
        m = int(rng.binomial(total, p))
    else:
        mean = total * p
        if mean < 1e6:
            m = int(rng.poisson(mean))
        else:
            sd = math.sqrt(mean * (1.0 - p))
            m = int(max(0, round(rng.normal(mean, sd))))
    return gen_simple(n, m, k, seed=int(rng.integers(0, 2**63)))


def _match_clones(rng: np.random.Generator, degrees: np.ndarray, n: int, k: int) -> Hypergraph:
    clones = np.repeat(np.arange(len(degrees), dtype=np.int64), degrees)
    rng.shuffle(clones)
    leftover = len(clones) % k
    if leftover:
        clones = clones[: len(clones) - leftover]
    return Hypergraph(n, k, clones.reshape(-1, k), multiset_edges=True, dropped_clones=leftover)


def gen_poisson_cloning(n: int, lam: float, k: int, seed: int | None = None
                        ) -> tuple[Hypergraph, DegreeSequence]:
    """Poisson cloning model: i.i.d. Poisson(lam) degrees, random k-matching of clones.

    Returns the contracted multigraph (edges may repeat a vertex) together
    with the drawn degrees. Fewer than k clones may stay unmatched; their
    number is kept in ``Hypergraph.dropped_clones``.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if n < 1:
        raise ValueError("need n >= 1")
    rng = make_rng(seed)
    degrees = rng.poisson(lam, size=n).astype(np.int64)
    return _match_clones(rng, degrees, n, k), DegreeSequence(degrees)


def gen_truncated_core_model(n2: int, Lambda: float, k: int, seed: int | None = None
                             ) -> tuple[Hypergraph, DegreeSequence]:
    """Cloning model with 2-truncated Poisson(Lambda) degrees (the law of a core)."""
    if Lambda <= 0:
        raise ValueError("Lambda must be positive")
    if n2 < 1:
        raise ValueError("need n2 >= 1")
    rng = make_rng(seed)
    degrees = rng.poisson(Lambda, size=n2).astype(np.int64)
    low = np.flatnonzero(degrees < 2)
    while low.size:
        degrees[low] = rng.poisson(Lambda, size=low.size)
        low = low[degrees[low] < 2]
    return _match_clones(rng, degrees, n2, k), DegreeSequence(degrees)


def degree_sequence(H: Hypergraph) -> DegreeSequence:
    return DegreeSequence(np.bincount(H.edges.ravel(), minlength=H.n).astype(np.int64))


def _incidence(H: Hypergraph) -> tuple[np.ndarray, np.ndarray]:
    """CSR incidence: edges of vertex v are ``idx[ptr[v]:ptr[v+1]]`` (with multiplicity)."""
    flat = H.edges.ravel()
    order = np.argsort(flat, kind="stable")
    ptr = np.zeros(H.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat, minlength=H.n), out=ptr[1:])
    return ptr, order // H.k


def peel_core(H: Hypergraph, order: np.random.Generator | None = None) -> CoreSubgraph:
    """2-core: repeatedly delete a vertex of degree < 2 and every edge on it.

    The work queue is processed FIFO; passing a generator as ``order``
    shuffles the queue instead (the result must not change).
    """
    ptr, inc = _incidence(H)
    deg = np.diff(ptr).tolist()
    ptr = ptr.tolist()
    inc = inc.tolist()
    edges = H.edges.tolist()
    edge_alive = [True] * H.m
    vertex_alive = [True] * H.n

    low = [v for v in range(H.n) if deg[v] < 2]
    if order is not None:
        order.shuffle(low)
    queue = deque(low)
    while queue:
        v = queue.popleft() if order is None else queue.pop()
        if not vertex_alive[v]:
            continue
        vertex_alive[v] = False
        for j in range(ptr[v], ptr[v + 1]):
            e = inc[j]
            if not edge_alive[e]:
                continue
            edge_alive[e] = False
            for u in edges[e]:
                deg[u] -= 1
                if deg[u] == 1 and vertex_alive[u]:
                    if order is None:
                        queue.append(u)
                    else:
                        pos = int(order.integers(0, len(queue) + 1))
                        queue.insert(pos, u)
    return CoreSubgraph(
        vertices=[v for v in range(H.n) if vertex_alive[v]],
        edge_indices=[e for e in range(H.m) if edge_alive[e]],
    )


def _vertex_mask(n: int, U: Iterable[int]) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[np.fromiter(U, dtype=np.int64)] = True
    return mask


def internal_edge_count(H: Hypergraph, U: Iterable[int]) -> int:
    """Number of edges all of whose vertices lie in U."""
    mask = _vertex_mask(H.n, U)
    if H.m == 0:
        return 0
    return int(np.all(mask[H.edges], axis=1).sum())


def subset_density(H: Hypergraph, U: Iterable[int]) -> Fraction:
    """Exact density e_U / |U| of the subgraph induced by U."""
    U = set(int(u) for u in U)
    if not U:
        raise ValueError("density of an empty vertex set is undefined")
    return Fraction(internal_edge_count(H, U), len(U))


def count_duplicate_pairs(H: Hypergraph) -> int:
    """Unordered pairs of edges on exactly the same vertex set."""
    if H.m < 2:
        return 0
    _, counts = np.unique(H.edges, axis=0, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def read_hypergraph(fh: TextIO) -> Hypergraph:
    """Parse the text format: header ``n m k`` then m lines of k vertices; ``#`` comments."""
    rows = []
    for raw in fh:
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append([int(tok) for tok in line.split()])
    if not rows:
        raise ValueError("empty hypergraph file")
    header, body = rows[0], rows[1:]
    if len(header) != 3:
        raise ValueError(f"header must be 'n m k', got {header}")
    n, m, k = header
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    for i, row in enumerate(body):
        if len(row) != k:
            raise ValueError(f"edge {i} has {len(row)} vertices, expected {k}")
    edges = np.array(body, dtype=np.int64).reshape(-1, k)
    multiset = bool(edges.size) and bool(np.any(np.diff(np.sort(edges, axis=1), axis=1) == 0))
    return Hypergraph(n, k, edges, multiset_edges=multiset)


def write_hypergraph(H: Hypergraph, fh: TextIO) -> None:
    fh.write(f"{H.n} {H.m} {H.k}\n")
    for row in H.edges:
        fh.write(" ".join(str(int(v)) for v in row) + "\n")
