"""Graph families used by the engines: lollipop, clique, path, grid, hypercube, welded tree.

All graphs are undirected, simple and immutable. Vertices are dense integer ids
and adjacency is stored in CSR form (``indptr``/``indices``) so the numba
kernels can walk neighborhoods without Python objects.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

# 2**MAX_HYPERCUBE_DIM vertices is the largest hypercube we are willing to materialize.
MAX_HYPERCUBE_DIM = 22
MAX_WELDED_HEIGHT = 20


class ResourceCapError(ValueError):
    """Raised when a requested object would exceed a configured size cap."""


class Kind(str, enum.Enum):
    LOLLIPOP = "Lollipop"
    CLIQUE = "Clique"
    PATH = "Path"
    GRID = "Grid"
    HYPERCUBE = "Hypercube"
    WELDED_TREE = "WeldedTree"
    GENERAL = "General"


@dataclass(frozen=True)
class LollipopSpec:
    clique_size: int
    path_length: int

    @property
    def vertex_count(self) -> int:
        return self.clique_size + self.path_length

    @property
    def bridge(self) -> tuple[int, int] | None:
        """(clique vertex, first path vertex) joined by the single crossing edge."""
        if self.path_length == 0:
            return None
        return (0, self.clique_size)


@dataclass(frozen=True)
class WeldedTreeSpec:
    height: int
    entrance: int
    exit: int
    # weld[i] is the tree-2 leaf welded to the i-th tree-1 leaf (both as vertex ids)
    weld: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable undirected graph with CSR adjacency."""

    kind: Kind
    vertex_count: int
    indptr: np.ndarray
    indices: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.indices.size // 2)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as sorted (u, v) pairs with u < v, lexicographically ordered."""
        out = []
        for u in range(self.vertex_count):
            for v in self.neighbors(u):
                if u < v:
                    out.append((u, int(v)))
        out.sort()
        return out

    @property
    def lollipop(self) -> LollipopSpec | None:
        return self.meta.get("lollipop")

    def check(self) -> None:
        """Validate symmetry, absence of self-loops and duplicate neighbors."""
        seen = set()
        for u in range(self.vertex_count):
            nb = self.neighbors(u).tolist()
            if u in nb:
                raise ValueError(f"self-loop at vertex {u}")
            if len(set(nb)) != len(nb):
                raise ValueError(f"duplicate neighbor at vertex {u}")
            for v in nb:
                seen.add((u, v))
        for u, v in seen:
            if (v, u) not in seen:
                raise ValueError(f"asymmetric edge {u}->{v}")

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return True
        visited = np.zeros(self.vertex_count, dtype=bool)
        stack = [0]
        visited[0] = True
        while stack:
            u = stack.pop()
            for v in self.neighbors(u):
                if not visited[v]:
                    visited[v] = True
                    stack.append(int(v))
        return bool(visited.all())

    def to_json(self) -> str:
        doc = {
            "kind": self.kind.value,
            "vertex_count": self.vertex_count,
            "edges": [list(e) for e in self.edges()],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Topology":
        doc = json.loads(text)
        return from_edges(doc["vertex_count"], doc["edges"], kind=Kind(doc["kind"]))


def from_edges(vertex_count: int, edges: Iterable[tuple[int, int]], kind: Kind = Kind.GENERAL,
               meta: dict | None = None) -> Topology:
    if vertex_count < 1:
        raise ValueError("vertex_count must be positive")
    adj: list[list[int]] = [[] for _ in range(vertex_count)]
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise ValueError(f"edge ({u}, {v}) leaves the vertex range 0..{vertex_count - 1}")
        adj[u].append(v)
        adj[v].append(u)
    indptr = np.zeros(vertex_count + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.fromiter((v for a in adj for v in a), dtype=np.int64, count=int(indptr[-1]))
    return Topology(kind, vertex_count, indptr, indices, meta or {})


def _clique_edges(offset: int, size: int):
    for u in range(size):
        for v in range(u + 1, size):
            yield offset + u, offset + v


def _path_edges(offset: int, length: int):
    for i in range(length - 1):
        yield offset + i, offset + i + 1


def build_lollipop(clique_size: int, path_length: int) -> Topology:
    """Clique on vertices ``0..clique_size-1`` with a path hanging off vertex 0.

    Path vertices are ``clique_size..clique_size+path_length-1`` in path order and
    the bridge edge joins clique vertex 0 to path vertex ``clique_size``.
    """
    if clique_size < 1:
        raise ValueError("clique_size must be >= 1")
    if path_length < 0:
        raise ValueError("path_length must be >= 0")
    edges = list(_clique_edges(0, clique_size))
    if path_length:
        edges.append((0, clique_size))
        edges.extend(_path_edges(clique_size, path_length))
    spec = LollipopSpec(clique_size, path_length)
    return from_edges(clique_size + path_length, edges, Kind.LOLLIPOP, {"lollipop": spec})


def build_clique(size: int) -> Topology:
    if size < 1:
        raise ValueError("clique size must be >= 1")
    return from_edges(size, _clique_edges(0, size), Kind.CLIQUE)


def build_path(length: int) -> Topology:
    if length < 1:
        raise ValueError("path length must be >= 1")
    return from_edges(length, _path_edges(0, length), Kind.PATH)


def build_grid(rows: int, cols: int, diagonal: bool = False) -> Topology:
    """Non-toroidal grid; 4-neighborhood unless ``diagonal`` adds the Moore corners."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
            if diagonal and r + 1 < rows:
                if c + 1 < cols:
                    edges.append((v, v + cols + 1))
                if c > 0:
                    edges.append((v, v + cols - 1))
    return from_edges(rows * cols, edges, Kind.GRID, {"shape": (rows, cols)})


def build_hypercube(n: int, max_dim: int = MAX_HYPERCUBE_DIM) -> Topology:
    if n < 1:
        raise ValueError("hypercube dimension must be >= 1")
    if n > max_dim:
        raise ResourceCapError(f"hypercube dimension {n} exceeds cap {max_dim} (2^{n} vertices)")
    size = 1 << n
    labels = np.arange(size, dtype=np.int64)
    # neighbor of v across bit j is v ^ (1 << j); every row has exactly n entries
    indices = (labels[:, None] ^ (1 << np.arange(n, dtype=np.int64))[None, :]).ravel()
    indptr = np.arange(0, size * n + 1, n, dtype=np.int64)
    return Topology(Kind.HYPERCUBE, size, indptr, indices, {"dimension": n})


def build_welded_tree(height: int, seed=None,
                      max_height: int = MAX_WELDED_HEIGHT) -> tuple[Topology, WeldedTreeSpec]:
    """Two complete binary trees of ``height`` whose leaves are joined by a random bijection.

    Tree 1 occupies heap-ordered ids ``0..t-1`` (entrance = 0) and tree 2 occupies
    ``t..2t-1`` (exit = t), where ``t = 2**(height+1) - 1``.
    """
    if height < 1:
        raise ValueError("height must be >= 1")
    if height > max_height:
        raise ResourceCapError(f"welded tree height {height} exceeds cap {max_height}")
    rng = np.random.default_rng(seed)
    t = (1 << (height + 1)) - 1
    edges = []
    for offset in (0, t):
        for i in range(1, t):
            edges.append((offset + (i - 1) // 2, offset + i))
    first_leaf = (1 << height) - 1
    leaves1 = np.arange(first_leaf, t)
    leaves2 = t + rng.permutation(np.arange(first_leaf, t))
    edges.extend(zip(leaves1.tolist(), leaves2.tolist()))
    spec = WeldedTreeSpec(height, entrance=0, exit=t, weld=tuple(int(x) for x in leaves2))
    topo = from_edges(2 * t, edges, Kind.WELDED_TREE, {"welded_tree": spec})
    return topo, spec
