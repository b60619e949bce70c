"""Chimera hardware graphs, heuristic minor embedding, and chain handling.

The hardware model is an m x n grid of K_{t,t} unit cells: shore-0 qubits
couple vertically to the same wire index in adjacent rows, shore-1 qubits
couple horizontally across columns, and the two shores of a cell are fully
connected. A logical QUBO node is mapped to a chain (connected set) of
physical qubits; every logical coupling must be realized by at least one
physical coupler between the two chains.

Two embedding strategies are combined:

* crossbar construction (used at scale): a spectral layout assigns every
  node a home cell; each chain is a vertical wire segment plus a
  horizontal wire segment crossing there. Two chains whose segments cross
  share an in-cell coupler, so local edges cost no extra qubits beyond
  the segment hulls. Nonlocal edges are routed individually as shortest
  paths through free qubits. Dense wire columns shed nodes to the routing
  stage instead of failing.

* negotiated routing (small problems, and fallback): chains grow along
  shortest paths that may overlap other chains at an escalating penalty;
  overlapped chains are evicted and rerouted (with history costs on
  contested qubits) until all chains are disjoint, then the longest
  chains are shortened in polish passes.

Both are deliberately simple members of the minorminer family of
heuristics, not a reimplementation of any particular tool.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .qubo import Qubo


class EmbeddingError(ValueError):
    pass


@dataclass
class ChimeraGraph:
    m: int
    n: int
    t: int
    indptr: np.ndarray  # CSR adjacency over qubit ids
    indices: np.ndarray

    @property
    def num_qubits(self) -> int:
        return 2 * self.m * self.n * self.t

    @property
    def num_couplers(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, qubit: int) -> np.ndarray:
        return self.indices[self.indptr[qubit]:self.indptr[qubit + 1]]

    def qubit_id(self, row: int, col: int, side: int, k: int) -> int:
        return ((row * self.n + col) * 2 + side) * self.t + k

    def coordinates(self, qubit: int) -> Tuple[int, int, int, int]:
        k = qubit % self.t
        side = (qubit // self.t) % 2
        cell = qubit // (2 * self.t)
        return cell // self.n, cell % self.n, side, k

    def has_coupler(self, a: int, b: int) -> bool:
        return b in self.neighbors(a)


def build_chimera(m: int, n: int, t: int) -> ChimeraGraph:
    """Chimera graph with m x n unit cells of shore size t."""
    if min(m, n, t) < 1:
        raise EmbeddingError(f"chimera dimensions must be >= 1, got {(m, n, t)}")
    num_qubits = 2 * m * n * t
    adjacency: List[List[int]] = [[] for _ in range(num_qubits)]

    def qid(row, col, side, k):
        return ((row * n + col) * 2 + side) * t + k

    for row in range(m):
        for col in range(n):
            for ka in range(t):
                a = qid(row, col, 0, ka)
                for kb in range(t):
                    b = qid(row, col, 1, kb)
                    adjacency[a].append(b)
                    adjacency[b].append(a)
            for k in range(t):
                if row + 1 < m:
                    a, b = qid(row, col, 0, k), qid(row + 1, col, 0, k)
                    adjacency[a].append(b)
                    adjacency[b].append(a)
                if col + 1 < n:
                    a, b = qid(row, col, 1, k), qid(row, col + 1, 1, k)
                    adjacency[a].append(b)
                    adjacency[b].append(a)

    indptr = np.zeros(num_qubits + 1, dtype=np.int64)
    for q in range(num_qubits):
        adjacency[q].sort()
        indptr[q + 1] = indptr[q] + len(adjacency[q])
    indices = np.concatenate([np.array(a, dtype=np.int64) for a in adjacency])
    return ChimeraGraph(m, n, t, indptr, indices)


@dataclass
class Embedding:
    chains: Dict[int, tuple]  # logical node -> sorted physical qubit ids
    hw_dims: Tuple[int, int, int]


def chain_stats(emb: Embedding) -> dict:
    lengths = sorted(len(c) for c in emb.chains.values())
    if not lengths:
        return {"physical_qubits": 0, "max_chain": 0, "median_chain": 0}
    return {
        "physical_qubits": sum(lengths),
        "max_chain": lengths[-1],
        "median_chain": lengths[(len(lengths) - 1) // 2],  # lower median
    }


def embedding_to_json(emb: Embedding) -> str:
    m, n, t = emb.hw_dims
    payload = {
        "chains": {str(v): list(chain) for v, chain in sorted(emb.chains.items())},
        "hw": {"m": m, "n": n, "t": t},
    }
    return json.dumps(payload, indent=2) + "\n"


def embedding_from_json(text: str) -> Embedding:
    payload = json.loads(text)
    chains = {int(v): tuple(sorted(q)) for v, q in payload["chains"].items()}
    hw = payload["hw"]
    return Embedding(chains, (hw["m"], hw["n"], hw["t"]))


def _logical_adjacency(logical: Qubo) -> List[List[int]]:
    adj: List[List[int]] = [[] for _ in range(logical.num_bits)]
    for i, j in sorted(logical.quadratic):
        adj[i].append(j)
        adj[j].append(i)
    return adj


def verify_embedding(logical: Qubo, hw: ChimeraGraph, emb: Embedding):
    """Independent validity check: disjointness, per-chain connectivity,
    and coverage of every logical edge by a physical coupler.

    Returns (ok, violations).
    """
    violations = []
    owner = {}
    for v in range(logical.num_bits):
        chain = emb.chains.get(v)
        if not chain:
            violations.append(f"node {v}: missing or empty chain")
            continue
        for q in chain:
            if not 0 <= q < hw.num_qubits:
                violations.append(f"node {v}: qubit {q} outside hardware graph")
            elif q in owner:
                violations.append(
                    f"disjointness: qubit {q} shared by nodes {owner[q]} and {v}"
                )
            else:
                owner[q] = v

    for v, chain in sorted(emb.chains.items()):
        chain_set = set(chain)
        if not chain_set or not all(0 <= q < hw.num_qubits for q in chain_set):
            continue
        seen = {min(chain_set)}
        frontier = [min(chain_set)]
        while frontier:
            q = frontier.pop()
            for nb in hw.neighbors(q):
                if nb in chain_set and nb not in seen:
                    seen.add(nb)
                    frontier.append(nb)
        if seen != chain_set:
            violations.append(f"connectivity: chain of node {v} is not connected")

    for i, j in sorted(logical.quadratic):
        ci, cj = emb.chains.get(i, ()), set(emb.chains.get(j, ()))
        if not ci or not cj:
            continue  # already reported as missing
        if not any(int(nb) in cj for q in ci for nb in hw.neighbors(q)):
            violations.append(f"edge coverage: no coupler joins chains {i} and {j}")

    return (not violations), violations


def _spectral_ranks(adj, rng):
    """Rank coordinates (0..N-1 per axis) from the two lowest nontrivial
    Laplacian eigenvectors; ties and degenerate graphs get random jitter."""
    n = len(adj)
    a = np.zeros((n, n))
    for i in range(n):
        for j in adj[i]:
            a[i, j] = 1.0
    lap = np.diag(a.sum(axis=1)) - a + 1e-9 * np.eye(n)
    _, vecs = np.linalg.eigh(lap)
    x = vecs[:, 1] if n > 1 else np.zeros(n)
    y = vecs[:, 2] if n > 2 else np.zeros(n)
    x = x + 1e-12 * rng.random(n)
    y = y + 1e-12 * rng.random(n)
    rank_x = np.empty(n, dtype=np.int64)
    rank_y = np.empty(n, dtype=np.int64)
    rank_x[np.argsort(x, kind="stable")] = np.arange(n)
    rank_y[np.argsort(y, kind="stable")] = np.arange(n)
    return rank_x, rank_y


def _virtual_source_dijkstra(hw, cost, source_sets):
    """Shortest paths from each source set (one virtual node per set, tied
    to its qubits by zero-weight edges). Edge weight into a qubit is that
    qubit's cost. Returns (dist over real qubits, predecessors)."""
    nq = hw.num_qubits
    data = [cost[hw.indices]]
    indices = [hw.indices]
    indptr = list(hw.indptr)
    for chain in source_sets:
        arr = np.array(sorted(chain), dtype=np.int64)
        indices.append(arr)
        data.append(np.zeros(len(arr)))
        indptr.append(indptr[-1] + len(arr))
    size = nq + len(source_sets)
    graph = csr_matrix(
        (np.concatenate(data), np.concatenate(indices), np.array(indptr)),
        shape=(size, size),
    )
    dist, pred = dijkstra(
        graph, indices=np.arange(nq, size), return_predecessors=True
    )
    return dist[:, :nq], pred


def _walk_path(pred, row, start, nq):
    """Follow predecessors from `start` back to the virtual source; returns
    the real qubits in walk order (ending at the source set's member)."""
    path = [start]
    cur = start
    while True:
        p = int(pred[row, cur])
        if p < 0 or p >= nq:
            break
        path.append(p)
        cur = p
    return path


class _CrossbarBuilder:
    """Wire-segment embedding: every node gets a vertical segment (shore 0)
    and a horizontal segment (shore 1) crossing at its home cell; segments
    of logically adjacent nodes are extended to cross each other. Edges too
    long to realize by segment growth, and nodes that lose the per-wire
    packing, are handed to a shortest-path routing stage."""

    def __init__(self, logical: Qubo, hw: ChimeraGraph, rng, local_budget: int = 2):
        self.logical = logical
        self.hw = hw
        self.rng = rng
        self.local_budget = local_budget
        self.adj = _logical_adjacency(logical)

    def build(self) -> Optional[Dict[int, set]]:
        hw = self.hw
        n = self.logical.num_bits
        m_rows, n_cols, t = hw.m, hw.n, hw.t
        rank_x, rank_y = _spectral_ranks(self.adj, self.rng)
        col = np.minimum(rank_x * n_cols // max(n, 1), n_cols - 1).astype(int)
        row = np.minimum(rank_y * m_rows // max(n, 1), m_rows - 1).astype(int)

        # segment hulls start at the home cell and grow per realized edge
        vlo, vhi = row.copy(), row.copy()
        hlo, hhi = col.copy(), col.copy()
        v_edges = [[] for _ in range(n)]  # edges realized via my vertical
        h_edges = [[] for _ in range(n)]
        deferred = []

        def extension(i, j):
            # cost of realizing (i, j) as i-vertical crossing j-horizontal
            return (
                max(0, vlo[i] - row[j]) + max(0, row[j] - vhi[i])
                + max(0, hlo[j] - col[i]) + max(0, col[i] - hhi[j])
            )

        edges = sorted(self.logical.quadratic)
        edges.sort(key=lambda e: (min(extension(*e), extension(e[1], e[0])), e))
        for i, j in edges:
            c1, c2 = extension(i, j), extension(j, i)
            if min(c1, c2) > self.local_budget:
                deferred.append((i, j))
                continue
            a, b = (i, j) if c1 <= c2 else (j, i)
            vlo[a] = min(vlo[a], row[b])
            vhi[a] = max(vhi[a], row[b])
            hlo[b] = min(hlo[b], col[a])
            hhi[b] = max(hhi[b], col[a])
            v_edges[a].append((i, j))
            h_edges[b].append((i, j))

        # pack segments onto the t wires of each column/row; nodes that do
        # not fit lose that segment and its edges go to the routing stage
        has_v = np.ones(n, dtype=bool)
        has_h = np.array([bool(h_edges[v]) for v in range(n)])
        v_wire = np.full(n, -1)
        h_wire = np.full(n, -1)
        for c in range(n_cols):
            members = sorted(
                (v for v in range(n) if has_v[v] and col[v] == c),
                key=lambda v: (vlo[v], vhi[v], v),
            )
            wire_end = [-1] * t
            for v in members:
                for k in range(t):
                    if wire_end[k] < vlo[v]:
                        v_wire[v] = k
                        wire_end[k] = vhi[v]
                        break
                else:
                    has_v[v] = False
                    deferred.extend(v_edges[v])
                    v_edges[v] = []
        for r in range(m_rows):
            members = sorted(
                (v for v in range(n) if has_h[v] and row[v] == r),
                key=lambda v: (hlo[v], hhi[v], v),
            )
            wire_end = [-1] * t
            for v in members:
                for h in range(t):
                    if wire_end[h] < hlo[v]:
                        h_wire[v] = h
                        wire_end[h] = hhi[v]
                        break
                else:
                    has_h[v] = False
                    deferred.extend(h_edges[v])
                    h_edges[v] = []

        nq = hw.num_qubits
        used = np.zeros(nq, dtype=bool)
        chains: Dict[int, set] = {}
        floating = []
        for v in range(n):
            qubits = set()
            if has_v[v]:
                for r in range(vlo[v], vhi[v] + 1):
                    qubits.add(hw.qubit_id(r, col[v], 0, int(v_wire[v])))
            if has_h[v]:
                for c in range(hlo[v], hhi[v] + 1):
                    qubits.add(hw.qubit_id(row[v], c, 1, int(h_wire[v])))
            if not qubits:
                floating.append(v)
                continue
            chains[v] = qubits
            for q in qubits:
                used[q] = True

        # nodes that lost both segments get a free qubit near home
        for v in floating:
            spot = self._free_near(used, row[v], col[v])
            if spot is None:
                return None
            chains[v] = {spot}
            used[spot] = True

        # route the remaining edges as shortest paths through free qubits
        neighbor_sets = [set(int(x) for x in hw.neighbors(q)) for q in range(nq)]
        for i, j in sorted(set(deferred)):
            ci, cj = chains[i], chains[j]
            if any(neighbor_sets[q] & cj for q in ci):
                continue
            # grow the currently smaller chain toward the other
            src, dst = (i, j) if (len(ci), i) <= (len(cj), j) else (j, i)
            cost = np.where(
                used, np.inf, 1.0 + 0.05 * self.rng.random(nq)
            )
            dist, pred = _virtual_source_dijkstra(hw, cost, [chains[src]])
            dist = dist[0]
            target = chains[dst]
            entry = np.full(nq, np.inf)
            for q in sorted(target):
                for nb in neighbor_sets[q]:
                    if not used[nb] and dist[nb] < entry[nb]:
                        entry[nb] = dist[nb]
            end = int(np.argmin(entry))
            if not np.isfinite(entry[end]):
                return None
            path = _walk_path(pred, 0, end, nq)
            for q in path:
                chains[src].add(q)
                used[q] = True
        return chains

    def _free_near(self, used, r0, c0):
        hw = self.hw
        for radius in range(hw.m + hw.n):
            for dr in range(-radius, radius + 1):
                dc = radius - abs(dr)
                for step in ({(dr, dc), (dr, -dc)} if dc else {(dr, 0)}):
                    rr, cc = r0 + step[0], c0 + step[1]
                    if not (0 <= rr < hw.m and 0 <= cc < hw.n):
                        continue
                    base = ((rr * hw.n + cc) * 2) * hw.t
                    for q in range(base, base + 2 * hw.t):
                        if not used[q]:
                            return q
        return None


class _NegotiationRouter:
    """Queue-based rip-up-and-reroute embedding.

    Chains are unions of shortest paths from a root to each embedded
    logical neighbor. Routes may claim qubits owned by other chains at a
    steep penalty; the displaced owners are evicted and requeued, and
    contested qubits accumulate history cost so repeated fights relocate.
    """

    OWNER_CAP = 4
    PENALTY = 2048.0

    def __init__(self, logical: Qubo, hw: ChimeraGraph, rng,
                 jitter: float = 0.15, history_step: float = 0.3):
        self.hw = hw
        self.rng = rng
        self.jitter = jitter
        self.history_step = history_step
        self.adj = _logical_adjacency(logical)
        nq = hw.num_qubits
        self.owners = np.zeros(nq, dtype=np.int64)
        self.history = np.zeros(nq)
        self.chains: Dict[int, set] = {}

    def claim(self, v, chain):
        self.chains[v] = chain
        for q in chain:
            self.owners[q] += 1

    def rip(self, v):
        if v in self.chains:
            for q in self.chains.pop(v):
                self.owners[q] -= 1

    def _costs(self, hard):
        base = (1.0 + self.history) * (
            1.0 + self.jitter * self.rng.random(self.hw.num_qubits)
        )
        if hard:
            return np.where(self.owners > 0, np.inf, base)
        exponent = np.minimum(self.owners, self.OWNER_CAP)
        return base * self.PENALTY ** exponent

    def route(self, v, hard: bool = False) -> Optional[set]:
        hw = self.hw
        nq = hw.num_qubits
        neighbor_chains = [self.chains[u] for u in self.adj[v] if u in self.chains]
        cost = self._costs(hard)
        if not neighbor_chains:
            free = np.flatnonzero(self.owners == 0)
            if not len(free):
                return None
            return {int(self.rng.choice(free))}
        dist, pred = _virtual_source_dijkstra(hw, cost, neighbor_chains)
        total = dist.sum(axis=0)
        candidate = (self.owners == 0) if hard else np.ones(nq, dtype=bool)
        for chain in neighbor_chains:
            candidate[list(chain)] = False
        score = np.full(nq, np.inf)
        score[candidate] = total[candidate] - (len(neighbor_chains) - 1) * cost[candidate]
        root = int(np.argmin(score))
        if not np.isfinite(score[root]):
            return None
        chain = {root}
        for r in range(len(neighbor_chains)):
            path = _walk_path(pred, r, root, nq)
            chain.update(path[:-1])  # final entry belongs to the neighbor
        return chain

    def run(self, budget_factor: int = 30) -> bool:
        n = len(self.adj)
        order = _connected_order(self.adj, self.rng)
        queue = deque(order)
        queued = set(order)
        budget = budget_factor * max(n, 1)
        steps = 0
        while queue:
            steps += 1
            if steps > budget:
                return False
            v = queue.popleft()
            queued.discard(v)
            self.rip(v)
            chain = self.route(v)
            if chain is None:
                return False
            self.claim(v, chain)
            contested = [q for q in chain if self.owners[q] > 1]
            if contested:
                for q in contested:
                    self.history[q] += self.history_step
                hit = set(contested)
                evicted = sorted(
                    u for u, cu in self.chains.items() if u != v and cu & hit
                )
                for u in evicted:
                    self.rip(u)
                    if u not in queued:
                        queue.append(u)
                        queued.add(u)
        return True

    def polish(self, passes: int = 2):
        for _ in range(passes):
            by_length = sorted(
                ((len(c), v) for v, c in self.chains.items() if len(c) > 1),
                reverse=True,
            )
            for _, v in by_length:
                old = self.chains[v]
                self.rip(v)
                new = self.route(v, hard=True)
                if new is None or len(new) >= len(old):
                    new = old
                self.claim(v, new)


def _connected_order(adj, rng):
    """Random-priority order in which every node after the first of its
    component has an already-ordered logical neighbor."""
    import heapq

    n = len(adj)
    rank = np.empty(n, dtype=np.int64)
    rank[rng.permutation(n)] = np.arange(n)
    order = []
    heap = []
    queued = set()
    remaining = set(range(n))
    while remaining:
        if heap:
            v = heapq.heappop(heap)[1]
            if v not in remaining:
                continue
        else:
            v = min(remaining, key=lambda u: rank[u])
        remaining.discard(v)
        order.append(v)
        for u in adj[v]:
            if u in remaining and u not in queued:
                heapq.heappush(heap, (rank[u], u))
                queued.add(u)
    return order


CROSSBAR_MIN_NODES = 24  # below this the routed embedder is better and fast


def embed(
    logical: Qubo,
    hw: ChimeraGraph,
    seed: int = 0,
    max_tries: int = 8,
    *,
    local_edge_budget: int = 2,
) -> Optional[Embedding]:
    """Heuristic minor embedding of a QUBO's coupling graph into Chimera.

    Large problems go through the crossbar construction first (with the
    routing stage for nonlocal edges); small problems, and any crossbar
    failure, use the negotiated rip-up-and-reroute embedder. Each attempt
    derives its own random stream; returns None once max_tries attempts
    are exhausted. Deterministic given (seed, max_tries).
    """
    if logical.num_bits > hw.num_qubits:
        raise EmbeddingError(
            f"{logical.num_bits} logical nodes exceed {hw.num_qubits} qubits"
        )
    if logical.num_bits == 0:
        return Embedding({}, (hw.m, hw.n, hw.t))

    use_crossbar = (
        logical.num_bits > CROSSBAR_MIN_NODES and hw.m * hw.n >= 16
    )
    for attempt in range(max_tries):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(attempt,))
        )
        chains = None
        if use_crossbar:
            chains = _CrossbarBuilder(
                logical, hw, rng, local_budget=local_edge_budget
            ).build()
        if chains is None:
            router = _NegotiationRouter(logical, hw, rng)
            if router.run():
                router.polish()
                chains = router.chains
        if chains is None:
            continue
        emb = Embedding(
            {v: tuple(sorted(int(q) for q in c)) for v, c in chains.items()},
            (hw.m, hw.n, hw.t),
        )
        ok, _ = verify_embedding(logical, hw, emb)
        if ok:
            return emb
    return None


def default_chain_strength(logical: Qubo) -> float:
    mags = logical.coefficient_magnitudes()
    return 1.0 + (max(mags) if mags else 0.0)


def flatten(logical: Qubo, hw: ChimeraGraph, emb: Embedding, chain_strength: float) -> Qubo:
    """Map an embedded logical QUBO onto physical qubits.

    Each node's bias is split uniformly across its chain; each logical
    coupling rides on one physical coupler between the chains; within a
    chain every induced coupler gets -2*chain_strength with a compensating
    +chain_strength*degree bias per qubit, so aligned chains contribute
    zero energy and each broken chain costs at least chain_strength.
    """
    if chain_strength <= 0:
        raise EmbeddingError(f"chain_strength must be > 0, got {chain_strength}")
    ok, violations = verify_embedding(logical, hw, emb)
    if not ok:
        raise EmbeddingError("invalid embedding: " + "; ".join(violations))

    linear: Dict[int, float] = {}
    quadratic: Dict[Tuple[int, int], float] = {}

    for v in range(logical.num_bits):
        chain = emb.chains[v]
        bias = logical.linear.get(v, 0.0) / len(chain)
        if bias:
            for q in chain:
                linear[q] = linear.get(q, 0.0) + bias

    for (i, j), c in sorted(logical.quadratic.items()):
        cj = set(emb.chains[j])
        couplers = [
            (min(q, int(nb)), max(q, int(nb)))
            for q in emb.chains[i]
            for nb in hw.neighbors(q)
            if int(nb) in cj
        ]
        a, b = min(couplers)
        quadratic[(a, b)] = quadratic.get((a, b), 0.0) + c

    for v in range(logical.num_bits):
        chain = set(emb.chains[v])
        for q in sorted(chain):
            for nb in hw.neighbors(q):
                nb = int(nb)
                if nb in chain and q < nb:
                    quadratic[(q, nb)] = quadratic.get((q, nb), 0.0) - 2.0 * chain_strength
                    linear[q] = linear.get(q, 0.0) + chain_strength
                    linear[nb] = linear.get(nb, 0.0) + chain_strength

    return Qubo.from_terms(hw.num_qubits, linear, quadratic)


def unembed(emb: Embedding, physical_bits, num_logical: int):
    """Majority vote per chain; ties go to 0 and the chain is reported as
    broken along with any chain whose qubits disagree."""
    logical_bits = []
    broken = []
    for v in range(num_logical):
        chain = emb.chains[v]
        ones = sum(physical_bits[q] for q in chain)
        if 0 < ones < len(chain):
            broken.append(v)
        logical_bits.append(1 if 2 * ones > len(chain) else 0)
    return tuple(logical_bits), broken
