"""Small fixtures shared by the test modules."""
from __future__ import annotations

from collections import deque

import numpy as np

from percolab.triangulation import build_from_rotation


def wheel(k: int):
    """Hub 0 with a ``k``-cycle rim 1..k, CCW."""
    rim = list(range(1, k + 1))
    rot = [rim]
    for i, v in enumerate(rim):
        prev_v, nxt = rim[i - 1], rim[(i + 1) % k]
        rot.append([nxt, 0, prev_v])
    return build_from_rotation(rot, rim)


def triangle():
    return build_from_rotation([[1, 2], [2, 0], [0, 1]], [0, 1, 2])


def bfs_distances(adj, src: int) -> np.ndarray:
    dist = np.full(len(adj), -1, dtype=np.int64)
    dist[src] = 0
    q = deque([src])
    while q:
        v = q.popleft()
        for u in adj[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def bfs_components(adj, is_open) -> list[set[int]]:
    seen = set()
    comps = []
    for s in range(len(adj)):
        if not is_open[s] or s in seen:
            continue
        comp = {s}
        q = deque([s])
        seen.add(s)
        while q:
            v = q.popleft()
            for u in adj[v]:
                if is_open[u] and u not in seen:
                    seen.add(u)
                    comp.add(u)
                    q.append(u)
        comps.append(comp)
    return comps


def crosses(adj, is_open, src, dst) -> bool:
    dst = set(int(x) for x in dst)
    for comp in bfs_components(adj, is_open):
        if comp & set(int(x) for x in src) and comp & dst:
            return True
    return False
