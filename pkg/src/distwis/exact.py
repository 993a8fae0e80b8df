"""Exact maximum-weight independent set solver for small subproblems.

Used inside the heavy-vertex rule (capped neighborhood subproblems) and as
the ground-truth oracle in tests and ``--verify`` runs.  The algorithm is
branch and bound on the highest-degree vertex with a weight-sum bound; for
the capped in-rule subproblems any exact method is fast, and the oracle stays
usable up to roughly 24 vertices.
"""

from __future__ import annotations

from dataclasses import dataclass


class SubProblemTooLarge(ValueError):
    """Raised when an in-rule subproblem exceeds its configured size cap."""


@dataclass(frozen=True)
class SubProblem:
    """An induced subgraph handed to the exact solver.

    Vertices are normalized to ascending global id so that local index order
    equals global id order; ``edges`` use local indices.
    """

    ids: tuple[int, ...]
    weights: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @staticmethod
    def from_vertices(vertices, weights, edges) -> "SubProblem":
        """Normalize arbitrary (id, weight) pairs plus an id-pair edge list."""
        order = sorted(range(len(vertices)), key=lambda i: vertices[i])
        ids = tuple(vertices[i] for i in order)
        ws = tuple(int(weights[i]) for i in order)
        index = {gid: i for i, gid in enumerate(ids)}
        es = tuple(sorted((min(index[a], index[b]), max(index[a], index[b]))) for a, b in edges)
        return SubProblem(ids=ids, weights=ws, edges=tuple(tuple(e) for e in sorted(set(es))))

    @property
    def n(self) -> int:
        return len(self.ids)


def _closed_masks(sp: SubProblem) -> list[int]:
    masks = [1 << i for i in range(sp.n)]
    for a, b in sp.edges:
        masks[a] |= 1 << b
        masks[b] |= 1 << a
    return masks


def alpha(sp: SubProblem) -> int:
    """Weight of a maximum-weight independent set of ``sp``.

    Faster than :func:`solve_exact` because ties are pruned aggressively.
    """
    n = sp.n
    if n == 0:
        return 0
    masks = _closed_masks(sp)
    weights = sp.weights
    order = sorted(range(n), key=lambda i: -weights[i])

    # Greedy initial lower bound.
    best = 0
    used = 0
    for i in order:
        if not used & (1 << i):
            best += weights[i]
            used |= masks[i]

    def search(mask: int, cur: int) -> None:
        nonlocal best
        rem = 0
        m = mask
        while m:
            lsb = m & -m
            rem += weights[lsb.bit_length() - 1]
            m ^= lsb
        if cur + rem <= best:
            return
        if mask == 0:
            best = max(best, cur)
            return
        # branch on highest-degree live vertex, smallest index on ties
        pick, pick_deg = -1, -1
        m = mask
        while m:
            lsb = m & -m
            i = lsb.bit_length() - 1
            d = (masks[i] & mask).bit_count()
            if d > pick_deg:
                pick, pick_deg = i, d
            m ^= lsb
        search(mask & ~masks[pick], cur + weights[pick])
        search(mask & ~(1 << pick), cur)

    search((1 << n) - 1, 0)
    return best


def solve_exact(sp: SubProblem, cap: int | None = None) -> tuple[int, tuple[int, ...]]:
    """Exact MWIS with a deterministic witness.

    Returns ``(weight, witness)`` where the witness is the lexicographically
    smallest maximum-weight independent set, compared as sorted global-id
    sequences.  ``cap`` is enforced for the in-rule entry point.

    Raises:
        SubProblemTooLarge: when ``cap`` is given and exceeded.
    """
    n = sp.n
    if cap is not None and n > cap:
        raise SubProblemTooLarge(f"subproblem has {n} vertices, cap is {cap}")
    if n == 0:
        return 0, ()
    masks = _closed_masks(sp)
    weights = sp.weights

    best_w = -1
    best_set: tuple[int, ...] = ()

    def search(mask: int, cur: int, picked: list[int]) -> None:
        nonlocal best_w, best_set
        rem = 0
        m = mask
        while m:
            lsb = m & -m
            rem += weights[lsb.bit_length() - 1]
            m ^= lsb
        # Equal-weight branches stay open so the lexicographic rule is exact.
        if cur + rem < best_w:
            return
        if mask == 0:
            cand = tuple(sorted(picked))
            if cur > best_w or (cur == best_w and cand < best_set):
                best_w, best_set = cur, cand
            return
        pick, pick_deg = -1, -1
        m = mask
        while m:
            lsb = m & -m
            i = lsb.bit_length() - 1
            d = (masks[i] & mask).bit_count()
            if d > pick_deg:
                pick, pick_deg = i, d
            m ^= lsb
        picked.append(pick)
        search(mask & ~masks[pick], cur + weights[pick], picked)
        picked.pop()
        search(mask & ~(1 << pick), cur, picked)

    search((1 << n) - 1, 0, [])
    witness = tuple(sp.ids[i] for i in best_set)
    if __debug__:
        _check_witness(sp, best_w, best_set)
    return best_w, witness


def _check_witness(sp: SubProblem, weight: int, picked: tuple[int, ...]) -> None:
    chosen = set(picked)
    assert sum(sp.weights[i] for i in chosen) == weight
    for a, b in sp.edges:
        assert not (a in chosen and b in chosen), "witness is not independent"


def alpha_upper_bound(sp: SubProblem) -> int:
    """Total vertex weight; a trivial upper bound on :func:`alpha`."""
    return sum(sp.weights)
