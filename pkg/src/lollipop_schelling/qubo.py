"""Classical QUBO encoding of the Schelling cross-edge cost, plus a brute-force minimizer.

Each vertex v uses two binary variables, ``x = bit 2v`` and ``y = bit 2v+1``:
vacant -> 00, A -> 01, B -> 11; the pattern 10 is invalid. On valid encodings
``[v is A] = y - x`` and ``[v is B] = x``, so the cross-type indicator of an edge
is the quadratic ``x_v*y_u + x_u*y_v - 2*x_u*x_v``.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .core import A, B, VACANT, Configuration, SchellingParams
from .topology import ResourceCapError, Topology

MAX_ENCODE_VERTICES = 1500
MAX_BRUTE_FORCE_QUBITS = 24
EDGE_COST = 4


@dataclass(frozen=True)
class QuboProblem:
    num_qubits: int
    terms: tuple[tuple[int, int, int], ...]  # (i, j, w) with i <= j; i == j is a linear term
    offset: int
    penalty: int = 0

    def matrix(self) -> np.ndarray:
        """Upper-triangular weight matrix (diagonal holds the linear terms)."""
        W = np.zeros((self.num_qubits, self.num_qubits), dtype=np.int64)
        for i, j, w in self.terms:
            W[i, j] = w
        return W

    def energy(self, bits) -> int:
        z = _as_bits(bits, self.num_qubits)
        e = self.offset
        for i, j, w in self.terms:
            if z[i] and z[j]:
                e += w
        return e

    def to_json(self) -> str:
        return json.dumps({"num_qubits": self.num_qubits, "offset": self.offset,
                           "terms": [list(t) for t in self.terms]})

    @classmethod
    def from_json(cls, text: str) -> "QuboProblem":
        doc = json.loads(text)
        return cls(doc["num_qubits"], tuple(tuple(t) for t in doc["terms"]), doc["offset"])


@dataclass(frozen=True)
class EncodingReport:
    num_qubits: int
    term_count: int
    encode_wall_time: float


def _as_bits(bits, n) -> np.ndarray:
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    z = np.asarray(bits, dtype=np.int64)
    if z.shape != (n,):
        raise ValueError(f"expected {n} bits, got shape {z.shape}")
    return z


def build_cost_function(topo: Topology, config: Configuration) -> int:
    """Sum over edges of ``-R(u) R(v) (R(u) - R(v))**2`` with R in {0, +1, -1}."""
    r = config.cells.astype(np.int64)
    total = 0
    for u, v in topo.edges():
        total += -r[u] * r[v] * (r[u] - r[v]) ** 2
    return int(total)


def encode_configuration(config: Configuration) -> str:
    code = {VACANT: "00", A: "01", B: "11"}
    return "".join(code[int(c)] for c in config.cells)


def decode_bits(bits) -> Configuration | None:
    """Inverse of :func:`encode_configuration`; ``None`` if any vertex holds the 10 pattern."""
    z = _as_bits(bits, len(bits)).reshape(-1, 2)
    cells = np.zeros(len(z), dtype=np.int8)
    for v, (x, y) in enumerate(z):
        if x and not y:
            return None
        cells[v] = B if x else (A if y else VACANT)
    return Configuration(cells)


def penalty_weight(topo: Topology) -> int:
    # the cost part spans [-8|E|, 4|E|] over all bitstrings, so any violation must cost more
    return 1 + 3 * EDGE_COST * topo.edge_count


def encode_qubo(topo: Topology, params: SchellingParams,
                max_vertices: int = MAX_ENCODE_VERTICES) -> tuple[QuboProblem, EncodingReport]:
    n = topo.vertex_count
    if n > max_vertices:
        raise ResourceCapError(f"QUBO over {n} vertices ({2 * n} qubits, ~{2 * n * n} terms) "
                               f"exceeds the {max_vertices}-vertex cap")
    params.validate_for(n)
    start = time.perf_counter()
    nq = 2 * n
    lam = penalty_weight(topo)
    W = np.zeros((nq, nq), dtype=np.int64)
    xs = np.arange(0, nq, 2)
    ys = xs + 1

    # cross-type edge cost
    for u, v in topo.edges():
        xu, yu, xv, yv = 2 * u, 2 * u + 1, 2 * v, 2 * v + 1
        W[min(xv, yu), max(xv, yu)] += EDGE_COST
        W[min(xu, yv), max(xu, yv)] += EDGE_COST
        W[xu, xv] += -2 * EDGE_COST

    # forbid the 10 pattern: lam * (x - x*y)
    W[xs, xs] += lam
    W[xs, ys] += -lam

    # lam * (sum(y - x) - a)^2 + lam * (sum(x) - b)^2, expanded with z^2 = z
    c_a = np.zeros(nq, dtype=np.int64)
    c_a[xs], c_a[ys] = -1, 1
    c_b = np.zeros(nq, dtype=np.int64)
    c_b[xs] = 1
    for coef, target in ((c_a, params.count_a), (c_b, params.count_b)):
        outer = np.triu(2 * np.outer(coef, coef), k=1)
        W += lam * outer
        W[np.arange(nq), np.arange(nq)] += lam * (coef * coef - 2 * target * coef)
    offset = lam * (params.count_a ** 2 + params.count_b ** 2)

    ii, jj = np.nonzero(W)
    terms = tuple(zip(ii.tolist(), jj.tolist(), W[ii, jj].tolist()))
    problem = QuboProblem(nq, terms, int(offset), int(lam))
    wall = time.perf_counter() - start
    return problem, EncodingReport(nq, len(terms), wall)


def brute_force_minimize(qubo: QuboProblem, max_qubits: int = MAX_BRUTE_FORCE_QUBITS,
                         chunk: int = 1 << 16) -> tuple[str, int]:
    """Exhaustive minimum; ties go to the lexicographically smallest bitstring."""
    n = qubo.num_qubits
    if n > max_qubits:
        raise ResourceCapError(f"{n} qubits exceeds brute-force cap {max_qubits}")
    # float64 matmul is exact here: every partial sum is an integer far below 2**53
    W = qubo.matrix().astype(np.float64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_e = None
    best_k = 0
    for lo in range(0, 1 << n, chunk):
        ks = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        Z = ((ks[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        E = np.einsum("ki,ki->k", Z @ W, Z)
        k = int(np.argmin(E))
        if best_e is None or E[k] < best_e:
            best_e, best_k = E[k], int(ks[k])
    bits = format(best_k, f"0{n}b") if n else ""
    return bits, int(round(best_e)) + qubo.offset
