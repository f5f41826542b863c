"""Neighborhood graphs over support points and their connected components.

Support-set members are joined whenever their Euclidean distance falls
strictly below half the scale parameter ``eta``; the connected components
of that graph are the cluster candidates, each summarized by its density
mode.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .density import DensityField

__all__ = [
    "NeighborGraph",
    "Component",
    "build_eta_graph",
    "connected_components",
    "component_mode",
]


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected graph on a subset of sample indices.

    ``vertices`` are ascending sample indices; ``edges`` is an ``(E, 2)``
    array of index pairs (each stored once with the smaller index first)
    satisfying ``|x_i - x_j| < eta / 2`` strictly.
    """

    vertices: np.ndarray
    edges: np.ndarray
    eta: float


@dataclass(frozen=True)
class Component:
    """One connected component: sorted member indices, density mode, id."""

    members: np.ndarray
    mode: int
    id: int


def build_eta_graph(points, member_indices, eta: float) -> NeighborGraph:
    """Graph joining members closer than ``eta / 2`` (strict; ties excluded).

    Quadratic pair scan -- the candidate sets this runs on are already
    thresholded, and the cost is dominated by kernel evaluation elsewhere.
    """
    eta = float(eta)
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta!r}")
    pts = np.asarray(points, dtype=float)
    verts = np.unique(np.asarray(member_indices, dtype=int))
    if verts.size and (verts[0] < 0 or verts[-1] >= pts.shape[0]):
        raise ValueError("member indices out of range")
    sub = pts[verts]
    if verts.size:
        close = cdist(sub, sub) < eta / 2.0
        iu, ju = np.triu_indices(verts.size, k=1)
        hit = close[iu, ju]
        edges = np.column_stack([verts[iu[hit]], verts[ju[hit]]])
    else:
        edges = np.empty((0, 2), dtype=int)
    return NeighborGraph(vertices=verts, edges=edges, eta=eta)


class _UnionFind:
    def __init__(self, items):
        self.parent = {int(i): int(i) for i in items}

    def find(self, a):
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:      # path compression
            p[a], a = root, p[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # root the merged set at the smaller index for determinism
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            self.parent[hi] = lo


def connected_components(graph: NeighborGraph) -> list[Component]:
    """Maximal connected vertex sets, ordered by smallest member index.

    Component ids are their positions in that order.  The ``mode`` of each
    returned component is filled with the smallest member as a placeholder
    until a density field is consulted via :func:`component_mode`.
    """
    uf = _UnionFind(graph.vertices)
    for i, j in np.asarray(graph.edges, dtype=int).reshape(-1, 2):
        uf.union(int(i), int(j))
    groups: dict[int, list[int]] = {}
    for v in graph.vertices:
        groups.setdefault(uf.find(int(v)), []).append(int(v))
    ordered = sorted(groups.values(), key=lambda g: g[0])
    return [
        Component(members=np.array(sorted(g), dtype=int), mode=min(g), id=k)
        for k, g in enumerate(ordered)
    ]


def component_mode(component: Component, field: DensityField) -> int:
    """Member index maximizing the density; ties go to the lowest index.

    Members are scanned in ascending order and ``argmax`` keeps the first
    maximum, which is exactly the tie rule.
    """
    members = np.asarray(component.members, dtype=int)
    if members.size == 0:
        raise ValueError("component has no members")
    vals = field.values[members]
    return int(members[int(np.argmax(vals))])
