"""Data reduction rules for weighted independent sets on a partitioned graph.

Every rule inspects one owned live vertex of a :class:`ReductionState` and,
when applicable, mutates the local graph, banks offset weight, pushes an
undo event, and queues border messages.  Border effects are restricted to
the allowed modifications: interface vertices are only excluded, proposed
for inclusion, moved, or weight-decreased, and ghosts are only dropped when
a neighbor is proposed or a remote status arrives.

Include decisions on interface vertices are *proposals*: the closed
neighborhood is removed locally and conflicts with a remote proposal on a
cut-edge are detected when the remote status arrives, then resolved by PE
rank (lower rank wins; the loser's banked weight is taken back).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .exact import SubProblem, alpha
from .graph import LocalGraph, ProtocolError

ST_EXCLUDED = "excluded"
ST_MOVED = "moved"
ST_PROPOSED = "includedProposal"

RULE_ORDER = (
    "zero_weight",
    "degree_one",
    "neighborhood_removal",
    "simplicial_weight_transfer",
    "simplicial_vertex",
    "basic_single_edge",
    "extended_single_edge",
    # registered sequential rules (meta slots) run here, before heavy_vertex
    "heavy_vertex",
)

# Rules whose read set reaches two hops from the pivot.
TWO_HOP_RULES = frozenset(
    {
        "simplicial_weight_transfer",
        "simplicial_vertex",
        "basic_single_edge",
        "extended_single_edge",
        "heavy_vertex",
    }
)


@dataclass(slots=True)
class ReductionEvent:
    """One entry of a PE's undo stack.

    ``removed`` lists every vertex tombstoned by the application (for
    include-style events this includes the pivot and its neighborhood).
    ``fold_neighbors`` keeps the fold-time surviving neighborhood for folds,
    ``anchor`` the fold/move partner, and ``phase`` the peel round.
    """

    kind: str
    seq: int
    pivot: int
    removed: tuple[int, ...] = ()
    weight: int = 0
    weight_deltas: tuple[tuple[int, int, int], ...] = ()
    fold_neighbors: tuple[int, ...] = ()
    anchor: int = -1
    phase: int = 0


@dataclass
class ReductionState:
    """Mutable per-PE reduction context: graph, offset, stacks, and queues."""

    lg: LocalGraph
    max_subproblem: int = 10
    offset: int = 0
    events: list[ReductionEvent] = field(default_factory=list)
    proposals: dict[int, tuple[int, ...]] = field(default_factory=dict)
    proposal_weight: dict[int, int] = field(default_factory=dict)
    statuses: list[tuple] = field(default_factory=list)  # (v, status, recv, attach, seq)
    touched_weights: set[int] = field(default_factory=set)
    ghost_killer: dict[int, int] = field(default_factory=dict)
    ghost_kill_bound: dict[int, int] = field(default_factory=dict)
    ghost_dead_seq: dict[int, int] = field(default_factory=dict)
    conflicts: dict[int, tuple[int, int]] = field(default_factory=dict)
    remote_included: set[int] = field(default_factory=set)
    remote_excluded: set[int] = field(default_factory=set)
    moved_out: dict[int, tuple[int, int, int]] = field(default_factory=dict)  # v -> (dest, anchor, w)
    adopted: dict[int, int] = field(default_factory=dict)  # v -> original owner
    race_fates: dict[int, bool] = field(default_factory=dict)
    rule_counts: Counter = field(default_factory=Counter)
    phase: int = 0
    dq: object | None = None  # DirtyQueue attached by the engine

    @property
    def rank(self) -> int:
        return self.lg.rank

    def next_seq(self) -> int:
        return len(self.events)

    def push_event(self, **kw) -> ReductionEvent:
        ev = ReductionEvent(seq=self.next_seq(), phase=self.phase, **kw)
        self.events.append(ev)
        return ev

    # -- dirty bookkeeping ----------------------------------------------------

    def touch_removed(self, former_neighbors) -> None:
        if self.dq is not None:
            self.dq.context_changed(self.lg, former_neighbors)

    def touch_weight(self, v: int) -> None:
        if self.dq is not None:
            self.dq.context_changed(self.lg, (v, *self.lg.adj[v]))

    # -- shared mutation paths -------------------------------------------------

    def queue_status(self, v: int, status: str, recv: tuple[int, ...], attach=None) -> None:
        # seq ties the status to the event that was just pushed
        if recv:
            self.statuses.append((v, status, recv, attach, len(self.events) - 1))

    def exclude_vertices(self, vertices, pivot: int, kind: str = "exclude") -> ReductionEvent:
        """Remove owned vertices from the graph without banking weight."""
        lg = self.lg
        snaps = [(x, lg.recv(x)) for x in vertices]
        ev = self.push_event(kind=kind, pivot=pivot, removed=tuple(vertices))
        for x, recv in snaps:
            self.queue_status(x, ST_EXCLUDED, recv)
            former = lg.remove_vertex(x, "exclude")
            self.touch_removed(former)
        return ev

    def include_vertex(self, v: int) -> ReductionEvent:
        """Include (or propose, when ``v`` is interface) and drop N[v]."""
        lg = self.lg
        w = lg.weight[v]
        neighbors = sorted(lg.adj[v])
        ghosts = [u for u in neighbors if not lg.is_owned(u)]
        owned_nbrs = [u for u in neighbors if lg.is_owned(u)]
        self.offset += w
        if ghosts:
            recv_v = lg.recv(v)
            ev = self.push_event(
                kind="include_proposal", pivot=v, removed=(v, *neighbors), weight=w
            )
            self.proposals[v] = recv_v
            self.proposal_weight[v] = w
            self.queue_status(v, ST_PROPOSED, recv_v)
            owned_snaps = [(u, lg.recv(u)) for u in owned_nbrs]
            lg.remove_vertex(v, "propose")
            for g in ghosts:
                self.ghost_killer[g] = v
                self.ghost_kill_bound[g] = lg.weight[g]
                self.ghost_dead_seq[g] = ev.seq
                former = lg.remove_vertex(g, "neighbor-proposed")
                self.touch_removed(former)
            for u, recv in owned_snaps:
                self.queue_status(u, ST_EXCLUDED, recv)
                former = lg.remove_vertex(u, "exclude")
                self.touch_removed(former)
        else:
            ev = self.push_event(kind="include", pivot=v, removed=(v, *neighbors), weight=w)
            owned_snaps = [(u, lg.recv(u)) for u in owned_nbrs]
            lg.remove_vertex(v, "include")
            for u, recv in owned_snaps:
                self.queue_status(u, ST_EXCLUDED, recv)
                former = lg.remove_vertex(u, "exclude")
                self.touch_removed(former)
        self.touch_removed(neighbors)
        return ev


# ---------------------------------------------------------------------------
# Rule catalog.  try_<rule>(st, v) -> bool; v must be live and owned.
# ---------------------------------------------------------------------------


def try_zero_weight(st: ReductionState, v: int) -> bool:
    # Weight-zero vertices never help a solution; excluding them up-front
    # keeps equal-weight proposal conflicts to the provable cut-edge case.
    if st.lg.weight[v] != 0:
        return False
    st.exclude_vertices((v,), pivot=v)
    return True


def try_degree_one(st: ReductionState, v: int) -> bool:
    lg = st.lg
    if len(lg.adj[v]) != 1:
        return False
    (u,) = lg.adj[v]
    wv, wu = lg.weight[v], lg.weight[u]
    if wv >= wu:
        st.include_vertex(v)
        return True
    if lg.is_owned(u):
        old = lg.decrease_weight(u, wu - wv)
        st.offset += wv
        st.push_event(
            kind="deg1_fold",
            pivot=v,
            removed=(v,),
            weight=wv,
            anchor=u,
            weight_deltas=((u, old, wu - wv),),
        )
        st.touched_weights.add(u)
        former = lg.remove_vertex(v, "fold")
        st.touch_removed(former)
        st.touch_weight(u)
        return True
    # Single neighbor is a heavier ghost: hand v over to the neighbor's PE.
    dest = lg.ghost_rank[u]
    st.push_event(kind="move_out", pivot=v, removed=(v,), weight=wv, anchor=u)
    st.queue_status(v, ST_MOVED, (dest,), (wv, u))
    st.moved_out[v] = (dest, u, wv)
    former = lg.remove_vertex(v, "move")
    st.touch_removed(former)
    return True


def try_neighborhood_removal(st: ReductionState, v: int) -> bool:
    lg = st.lg
    total = 0
    for u in lg.adj[v]:
        total += lg.weight[u]
    if lg.weight[v] < total:
        return False
    st.include_vertex(v)
    return True


def try_heavy_vertex(st: ReductionState, v: int) -> bool:
    lg = st.lg
    neighbors = sorted(lg.adj[v])
    if len(neighbors) > st.max_subproblem:
        return False
    sp = neighborhood_subproblem(lg, neighbors)
    if lg.weight[v] < alpha(sp):
        return False
    st.include_vertex(v)
    return True


def neighborhood_subproblem(lg: LocalGraph, vertices) -> SubProblem:
    """Induced subgraph on ``vertices`` as seen by this PE (ghost bounds)."""
    vs = sorted(vertices)
    index = {x: i for i, x in enumerate(vs)}
    edges = []
    for a in vs:
        for b in lg.adj[a]:
            if a < b and b in index:
                edges.append((index[a], index[b]))
    return SubProblem(
        ids=tuple(vs),
        weights=tuple(lg.weight[x] for x in vs),
        edges=tuple(sorted(edges)),
    )


def _is_clique(lg: LocalGraph, vertices) -> bool:
    for i, a in enumerate(vertices):
        adj_a = lg.adj[a]
        for b in vertices[i + 1 :]:
            if b not in adj_a:
                return False
    return True


def try_simplicial_vertex(st: ReductionState, v: int) -> bool:
    lg = st.lg
    wv = lg.weight[v]
    neighbors = sorted(lg.adj[v])
    for u in neighbors:
        if lg.weight[u] > wv:
            return False
    if not _is_clique(lg, neighbors):
        return False
    st.include_vertex(v)
    return True


def try_simplicial_weight_transfer(st: ReductionState, v: int) -> bool:
    lg = st.lg
    neighbors = sorted(lg.adj[v])
    if not neighbors:
        return False
    for u in neighbors:
        if not lg.is_owned(u):
            return False
    wv = lg.weight[v]
    mx = max(lg.weight[u] for u in neighbors)
    if wv >= mx:
        return False  # simplicial-vertex case, handled by its own rule
    if not _is_clique(lg, neighbors):
        return False
    # v must carry the maximum weight among simplicial vertices around it
    for u in neighbors:
        if lg.weight[u] > wv and _is_clique(lg, sorted(lg.adj[u])):
            return False
    removed = [u for u in neighbors if lg.weight[u] <= wv]
    survivors = [u for u in neighbors if lg.weight[u] > wv]
    deltas = []
    snaps = [(u, lg.recv(u)) for u in removed]
    st.offset += wv
    ev = st.push_event(
        kind="st_fold",
        pivot=v,
        removed=(v, *removed),
        weight=wv,
        fold_neighbors=tuple(survivors),
    )
    former = lg.remove_vertex(v, "fold")
    st.touch_removed(former)
    for u, recv in snaps:
        st.queue_status(u, ST_EXCLUDED, recv)
        former = lg.remove_vertex(u, "exclude")
        st.touch_removed(former)
    for u in survivors:
        old = lg.decrease_weight(u, lg.weight[u] - wv)
        deltas.append((u, old, old - wv))
        st.touched_weights.add(u)
        st.touch_weight(u)
    ev.weight_deltas = tuple(deltas)
    return True


def _owned_neighbors_by_weight(lg: LocalGraph, v: int) -> list[int]:
    return sorted(
        (u for u in lg.adj[v] if lg.is_owned(u)),
        key=lambda u: (-lg.weight[u], u),
    )


def try_basic_single_edge(st: ReductionState, v: int) -> bool:
    lg = st.lg
    nbv = lg.adj[v]
    for u in _owned_neighbors_by_weight(lg, v):
        wu = lg.weight[u]
        total = 0
        fits = True
        for x in lg.adj[u]:
            if x in nbv:
                continue  # v itself is not in N(v), so it is counted
            total += lg.weight[x]
            if total > wu:
                fits = False
                break
        if fits:
            st.exclude_vertices((v,), pivot=v)
            return True
    return False


def try_extended_single_edge(st: ReductionState, v: int) -> bool:
    lg = st.lg
    nbv = lg.adj[v]
    wv = lg.weight[v]
    total = 0
    for x in nbv:
        total += lg.weight[x]
    for u in _owned_neighbors_by_weight(lg, v):
        if total - lg.weight[u] > wv:
            continue
        shared = sorted(x for x in lg.adj[u] if x in nbv and lg.is_owned(x))
        if not shared:
            continue
        st.exclude_vertices(tuple(shared), pivot=v)
        return True
    return False


RULES = {
    "zero_weight": try_zero_weight,
    "degree_one": try_degree_one,
    "neighborhood_removal": try_neighborhood_removal,
    "simplicial_weight_transfer": try_simplicial_weight_transfer,
    "simplicial_vertex": try_simplicial_vertex,
    "basic_single_edge": try_basic_single_edge,
    "extended_single_edge": try_extended_single_edge,
    "heavy_vertex": try_heavy_vertex,
}


# ---------------------------------------------------------------------------
# Meta rule: gate arbitrary sequential rules on a border-free read set.
# ---------------------------------------------------------------------------


class ReadProbe:
    """Read-logging view of a local graph handed to sequential rules."""

    def __init__(self, lg: LocalGraph):
        self._lg = lg
        self.reads: set[int] = set()

    def neighbors(self, v: int):
        self.reads.add(v)
        return self._lg.adj[v]

    def weight(self, v: int) -> int:
        self.reads.add(v)
        return self._lg.weight[v]

    def read_border(self) -> bool:
        lg = self._lg
        for v in self.reads:
            if not lg.is_live(v):
                continue
            if not lg.is_owned(v) or lg.is_interface(v):
                return True
        return False


def try_meta_rule(st: ReductionState, v: int, seq_rule) -> bool:
    """Apply a sequential rule only when its test read no border vertex.

    ``seq_rule`` needs ``applicable(probe, v) -> bool`` and
    ``apply(st, v) -> bool``.  This is the extension slot for sequential
    rules that have no distributed variant.
    """
    probe = ReadProbe(st.lg)
    if not seq_rule.applicable(probe, v):
        return False
    if probe.read_border():
        return False
    return seq_rule.apply(st, v)


class SequentialDegreeOne:
    """Classic pendant-vertex rule in sequential form (meta-rule demo)."""

    name = "seq_degree_one"

    def applicable(self, probe: ReadProbe, v: int) -> bool:
        nb = probe.neighbors(v)
        if len(nb) != 1:
            return False
        (u,) = nb
        probe.weight(v)
        probe.weight(u)
        return True

    def apply(self, st: ReductionState, v: int) -> bool:
        return try_degree_one(st, v)


# ---------------------------------------------------------------------------
# Remote status application.
# ---------------------------------------------------------------------------


def apply_remote_include(st: ReductionState, ghost: int) -> None:
    """Process a received include proposal for ``ghost``.

    If the ghost is still live its local neighbors are dominated and get
    excluded.  If it was already removed by one of this PE's own proposals,
    the pair is a cut-edge proposal conflict: both sides resolve it by rank
    (lower rank keeps its vertex) and the loser takes its banked weight back.
    """
    lg = st.lg
    if lg.is_live(ghost):
        st.remote_included.add(ghost)
        locals_ = sorted(lg.adj[ghost])
        former = lg.remove_vertex(ghost, "remote-include")
        st.touch_removed(former)
        if locals_:
            st.exclude_vertices(tuple(locals_), pivot=ghost)
        return
    killer = st.ghost_killer.get(ghost)
    if killer is None:
        raise ProtocolError(
            f"PE {st.rank}: proposal for ghost {ghost} that was never known live"
        )
    if killer in st.conflicts:
        raise ProtocolError(f"PE {st.rank}: second conflicting proposal for {killer}")
    other_rank = lg.ghost_rank[ghost]
    st.conflicts[killer] = (ghost, other_rank)
    if __debug__ and st.ghost_kill_bound.get(ghost) != st.proposal_weight.get(killer):
        raise ProtocolError(
            f"PE {st.rank}: conflicting proposals {killer}/{ghost} have unequal weights"
        )
    if st.rank > other_rank:
        # our proposal loses the tie; the banked weight goes back
        st.offset -= st.proposal_weight[killer]
    # Any still-live local neighbor of the ghost is already globally reduced
    # (or the remote winner dominates it); drop it.
    leftovers = [
        x
        for x in lg.orig_adj.get(ghost, ())
        if lg.is_live(x) and lg.is_owned(x)
    ]
    if leftovers:
        st.exclude_vertices(tuple(leftovers), pivot=ghost)


def apply_remote_exclude(st: ReductionState, ghost: int) -> None:
    """Drop a ghost whose owner reduced it without an include."""
    st.remote_excluded.add(ghost)
    lg = st.lg
    if lg.is_live(ghost):
        former = lg.remove_vertex(ghost, "remote-exclude")
        st.touch_removed(former)


def apply_remote_weight(st: ReductionState, ghost: int, new_weight: int) -> None:
    lg = st.lg
    if ghost in lg.owned:
        raise ProtocolError(f"PE {st.rank}: weight update for owned vertex {ghost}")
    if not lg.is_live(ghost):
        return  # stale update for a ghost we already dropped
    lg.decrease_weight(ghost, new_weight, remote=True)
    st.touch_weight(ghost)


def apply_move(st: ReductionState, v: int, weight: int, anchor: int, src: int) -> None:
    """Adopt a moved vertex, or resolve the symmetric isolated-edge race."""
    lg = st.lg
    mine = st.moved_out.get(anchor)
    if mine is not None and mine[0] == src and mine[1] == v:
        # both endpoints were moved towards each other; the edge is isolated
        # globally, both PEs pick the same endpoint without extra messages
        w_mine = mine[2]
        mine_wins = (w_mine, -anchor) > (weight, -v) if w_mine != weight else anchor < v
        if w_mine > weight or (w_mine == weight and anchor < v):
            st.offset += w_mine
            st.push_event(kind="race_include", pivot=anchor, weight=w_mine)
            lg.owned.add(anchor)
            st.race_fates[anchor] = True
            st.race_fates[v] = False
        else:
            st.race_fates[anchor] = False
            st.race_fates[v] = True
        st.moved_out.pop(anchor)
        return
    if lg.is_live(v):
        lg.adopt_ghost(v, weight, anchor, src)
        st.adopted[v] = src
        if st.dq is not None:
            st.dq.context_changed(lg, (v, *lg.adj[v]))
        return
    # The ghost fell to one of our proposals while in flight.
    st.push_event(kind="drop_adoption", pivot=v, anchor=src)
    st.race_fates[v] = False
