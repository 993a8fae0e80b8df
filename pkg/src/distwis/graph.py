"""Vertex-weighted graph containers and the owner/ghost views of a 1D partition.

The global graph is an immutable adjacency-array structure built once from an
arc list.  For a run on ``p`` processing elements (PEs) it is split by a
vertex partition; each PE then works on a mutable :class:`LocalGraph` holding
its owned vertices plus read-only ghost replicas of remote neighbors.  Ghost
entries carry a weight upper bound and only the local slice of the remote
vertex's neighborhood; there are never ghost-to-ghost edges.

All mutating operations on a :class:`LocalGraph` go through audited methods
(`remove_vertex`, `decrease_weight`, `adopt_ghost`) so that every change to a
border vertex can be checked against the allowed set of modifications:
interface vertices may only be excluded, proposed for inclusion, moved, or
weight-decreased, and ghosts are only dropped in response to a proposal or a
remote status update.
"""

from __future__ import annotations

from dataclasses import dataclass

U64_MAX = 2**64 - 1

# Reasons accepted by the mutation audit, grouped by target class.
OWNED_REMOVE_REASONS = ("exclude", "propose", "include", "move")
GHOST_REMOVE_REASONS = (
    "neighbor-proposed",
    "remote-include",
    "remote-exclude",
    "adopt",
)


class GraphError(ValueError):
    """Malformed graph input: bad vertex id, weight, or file structure."""


class ProtocolError(RuntimeError):
    """Internal invariant violation in the distributed reduction protocol."""


@dataclass(frozen=True)
class GlobalGraph:
    """Immutable undirected vertex-weighted graph in adjacency-array form.

    Every undirected edge is stored as two directed arcs.  Adjacency lists are
    sorted ascending and contain no duplicates or self-loops.  Weights are
    non-negative and fit in 64 bits.
    """

    n: int
    weights: tuple[int, ...]
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def total_weight(self) -> int:
        return sum(self.weights)


def build_global(edges, weights) -> GlobalGraph:
    """Build a canonical :class:`GlobalGraph` from an arc list.

    The arc list may contain duplicates, both orientations, and self-loops;
    self-loops are dropped and the result is symmetrized and sorted.  Vertex
    count is ``len(weights)``.

    Raises:
        GraphError: on out-of-range vertex ids or weights outside [0, 2^64).
    """
    n = len(weights)
    for v, w in enumerate(weights):
        if w < 0 or w > U64_MAX:
            raise GraphError(f"weight of vertex {v} out of range: {w}")
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) references a vertex outside [0, {n})")
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    return GlobalGraph(
        n=n,
        weights=tuple(int(w) for w in weights),
        adjacency=tuple(tuple(sorted(a)) for a in adj),
    )


@dataclass(frozen=True)
class Partition:
    """1D vertex partition: ``assignment[v]`` is the owning PE rank."""

    p: int
    assignment: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    def rank_of(self, v: int) -> int:
        return self.assignment[v]


def _hash64(x: int) -> int:
    # splitmix64 finalizer; stable across processes, unlike built-in hash().
    x = (x + 0x9E3779B97F4A7C15) & U64_MAX
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & U64_MAX
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & U64_MAX
    return x ^ (x >> 31)


def partition(g: GlobalGraph, p: int, strategy: str = "contig-v", seed: int = 0) -> Partition:
    """Assign vertices to ``p`` PEs.

    Strategies:
      * ``contig-v``: contiguous id ranges with balanced vertex counts.
      * ``contig-e``: contiguous id ranges with balanced degree sums
        (within one vertex granule).
      * ``hash``: seeded pseudo-random assignment.

    Empty blocks are allowed when ``p > n``; ``p == 0`` is rejected.
    """
    if p < 1:
        raise GraphError(f"PE count must be >= 1, got {p}")
    n = g.n
    assignment = [0] * n
    if strategy == "contig-v":
        base, extra = divmod(n, p)
        v = 0
        for rank in range(p):
            size = base + (1 if rank < extra else 0)
            for _ in range(size):
                assignment[v] = rank
                v += 1
    elif strategy == "contig-e":
        total = sum(len(a) for a in g.adjacency)
        v = 0
        acc = 0
        for rank in range(p):
            target = (total * (rank + 1) + p - 1) // p
            remaining_ranks = p - rank - 1
            while v < n and (acc < target or remaining_ranks == 0):
                # Leave at least one vertex per remaining block while any are left.
                if remaining_ranks > 0 and n - v <= remaining_ranks:
                    break
                assignment[v] = rank
                acc += len(g.adjacency[v])
                v += 1
        while v < n:
            assignment[v] = p - 1
            v += 1
    elif strategy == "hash":
        for v in range(n):
            assignment[v] = _hash64(v ^ _hash64(seed)) % p
    else:
        raise GraphError(f"unknown partition strategy: {strategy!r}")

    blocks: list[list[int]] = [[] for _ in range(p)]
    for v in range(n):
        blocks[assignment[v]].append(v)
    return Partition(
        p=p,
        assignment=tuple(assignment),
        blocks=tuple(tuple(b) for b in blocks),
    )


class LocalGraph:
    """Mutable per-PE view: owned vertices plus ghost replicas.

    Removed vertices are tombstoned via the ``live`` set rather than
    compacted; ids stay valid for the whole run so that events and messages
    can refer to them.  ``orig_adj`` / ``orig_recv`` / ``orig_weight`` keep
    the pristine local view for reconstruction.
    """

    __slots__ = (
        "rank",
        "owned",
        "live",
        "weight",
        "adj",
        "ghost_rank",
        "orig_adj",
        "orig_recv",
        "orig_weight",
        "orig_owner",
        "audit_checks",
    )

    def __init__(self, rank: int):
        self.rank = rank
        self.owned: set[int] = set()
        self.live: set[int] = set()
        self.weight: dict[int, int] = {}
        self.adj: dict[int, set[int]] = {}
        self.ghost_rank: dict[int, int] = {}
        self.orig_adj: dict[int, tuple[int, ...]] = {}
        self.orig_recv: dict[int, tuple[int, ...]] = {}
        self.orig_weight: dict[int, int] = {}
        self.orig_owner: dict[int, int] = {}
        self.audit_checks = 0

    # -- predicates ---------------------------------------------------------

    def is_owned(self, v: int) -> bool:
        return v in self.owned

    def is_ghost(self, v: int) -> bool:
        return v in self.live and v not in self.owned

    def is_live(self, v: int) -> bool:
        return v in self.live

    def is_interface(self, v: int) -> bool:
        """Owned vertex with at least one live ghost neighbor."""
        return any(u not in self.owned for u in self.adj[v])

    def recv(self, v: int) -> tuple[int, ...]:
        """Sorted ranks of PEs owning live ghost neighbors of ``v``."""
        return tuple(sorted({self.ghost_rank[u] for u in self.adj[v] if u not in self.owned}))

    def live_neighbors(self, v: int) -> set[int]:
        return self.adj[v]

    # -- audited mutations --------------------------------------------------

    def remove_vertex(self, v: int, reason: str) -> list[int]:
        """Tombstone ``v`` and detach it from live neighbors.

        Returns the former live neighborhood (for dirty marking).  Raises
        :class:`ProtocolError` when the removal is not an allowed border
        modification for the vertex class.
        """
        if v not in self.live:
            raise ProtocolError(f"PE {self.rank}: removing dead vertex {v}")
        self.audit_checks += 1
        if v in self.owned:
            if self.is_interface(v) and reason not in OWNED_REMOVE_REASONS:
                raise ProtocolError(
                    f"PE {self.rank}: illegal removal of interface vertex {v} ({reason})"
                )
            if reason == "include" and self.is_interface(v):
                raise ProtocolError(
                    f"PE {self.rank}: interface vertex {v} must be proposed, not included"
                )
        else:
            if reason not in GHOST_REMOVE_REASONS:
                raise ProtocolError(
                    f"PE {self.rank}: illegal removal of ghost {v} ({reason})"
                )
        former = sorted(self.adj[v])
        for u in former:
            self.adj[u].discard(v)
        self.adj[v] = set()
        self.live.discard(v)
        return former

    def decrease_weight(self, v: int, new_weight: int, remote: bool = False) -> int:
        """Lower the weight (owned) or weight bound (ghost) of a live vertex."""
        if v not in self.live:
            raise ProtocolError(f"PE {self.rank}: weight change on dead vertex {v}")
        self.audit_checks += 1
        old = self.weight[v]
        if new_weight >= old or new_weight < 0:
            raise ProtocolError(
                f"PE {self.rank}: weight of {v} must strictly decrease ({old} -> {new_weight})"
            )
        if self.is_ghost(v) and not remote:
            raise ProtocolError(f"PE {self.rank}: local weight change on ghost {v}")
        self.weight[v] = new_weight
        return old

    def adopt_ghost(self, v: int, weight: int, anchor: int, orig_owner: int) -> None:
        """Turn live ghost ``v`` into an owned degree-one vertex next to ``anchor``."""
        if not self.is_ghost(v):
            raise ProtocolError(f"PE {self.rank}: cannot adopt non-ghost {v}")
        self.audit_checks += 1
        for u in sorted(self.adj[v]):
            if u != anchor:
                self.adj[u].discard(v)
        self.adj[v] = {anchor} if anchor in self.live else set()
        if anchor in self.live:
            self.adj[anchor].add(v)
        self.weight[v] = weight
        self.owned.add(v)
        self.ghost_rank.pop(v, None)
        self.orig_owner[v] = orig_owner

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        """Check the structural invariants of the local view (tests/debug)."""
        for v in self.live:
            for u in self.adj[v]:
                if u not in self.live:
                    raise ProtocolError(f"PE {self.rank}: live {v} adjacent to dead {u}")
                if v not in self.adj[u]:
                    raise ProtocolError(f"PE {self.rank}: asymmetric edge {v}-{u}")
                if v not in self.owned and u not in self.owned:
                    raise ProtocolError(f"PE {self.rank}: ghost-ghost edge {v}-{u}")
            if v not in self.owned and v not in self.ghost_rank:
                raise ProtocolError(f"PE {self.rank}: ghost {v} without owner rank")


def localize(g: GlobalGraph, part: Partition, rank: int) -> LocalGraph:
    """Build PE ``rank``'s local view of ``g`` under ``part``.

    Owned vertices carry exact weights; ghosts start with the owner's exact
    weight as their bound and list only their neighbors inside this block.
    """
    lg = LocalGraph(rank)
    block = part.blocks[rank]
    lg.owned = set(block)
    for v in block:
        lg.weight[v] = g.weights[v]
        lg.adj[v] = set(g.adjacency[v])
        lg.live.add(v)
        for u in g.adjacency[v]:
            if part.assignment[u] != rank and u not in lg.ghost_rank:
                lg.ghost_rank[u] = part.assignment[u]
    for u, owner in lg.ghost_rank.items():
        lg.weight[u] = g.weights[u]
        lg.adj[u] = {x for x in g.adjacency[u] if part.assignment[x] == rank}
        lg.live.add(u)
    for v in sorted(lg.live):
        lg.orig_adj[v] = tuple(sorted(lg.adj[v]))
        lg.orig_weight[v] = lg.weight[v]
        lg.orig_owner[v] = part.assignment[v]
    for v in block:
        lg.orig_recv[v] = lg.recv(v)
    return lg


def weight_of_set(lg: LocalGraph, vertices) -> int:
    """Sum of current weights (bounds, for ghosts) of the live members.

    Raises:
        GraphError: for a vertex the PE has never seen.
        OverflowError: if the sum leaves the unsigned 64-bit range.
    """
    total = 0
    for v in vertices:
        if v not in lg.weight:
            raise GraphError(f"PE {lg.rank} does not know vertex {v}")
        if v in lg.live:
            total += lg.weight[v]
            if total > U64_MAX:
                raise OverflowError("set weight exceeds 64-bit range")
    return total
