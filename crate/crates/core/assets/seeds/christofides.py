"""Christofides tour construction.

MST (Prim), minimum-weight perfect matching on odd-degree vertices (exact
subset DP up to 16 vertices, greedy beyond), Euler circuit, shortcutting.
Reads one TSP instance document on stdin and writes {"tour": [...]}.
"""
import json
import sys

EXACT_LIMIT = 16
INF = float("inf")


def mst(n, d):
    in_tree = [False] * n
    key = [INF] * n
    parent = [-1] * n
    key[0] = 0.0
    edges = []
    for _ in range(n):
        u = -1
        for v in range(n):
            if not in_tree[v] and (u < 0 or key[v] < key[u]):
                u = v
        in_tree[u] = True
        if parent[u] >= 0:
            edges.append((parent[u], u))
        for v in range(n):
            if not in_tree[v] and d[u][v] < key[v]:
                key[v] = d[u][v]
                parent[v] = u
    return edges


def exact_matching(d, odd):
    m = len(odd)
    full = (1 << m) - 1
    cost = [INF] * (1 << m)
    choice = [(0, 0)] * (1 << m)
    cost[0] = 0.0
    for mask in range(1, full + 1):
        if bin(mask).count("1") % 2 == 1:
            continue
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        for j in range(i + 1, m):
            if not rest & (1 << j):
                continue
            c = cost[rest & ~(1 << j)] + d[odd[i]][odd[j]]
            if c < cost[mask]:
                cost[mask] = c
                choice[mask] = (i, j)
    pairs = []
    mask = full
    while mask:
        i, j = choice[mask]
        pairs.append((odd[i], odd[j]))
        mask &= ~((1 << i) | (1 << j))
    return pairs


def greedy_matching(n, d, odd):
    pairs = []
    for x, i in enumerate(odd):
        for j in odd[x + 1:]:
            pairs.append((d[i][j], i, j))
    pairs.sort()
    used = [False] * n
    out = []
    for _, i, j in pairs:
        if not used[i] and not used[j]:
            used[i] = used[j] = True
            out.append((i, j))
    return out


def solve(n, d):
    if n <= 3:
        return list(range(n))
    edges = mst(n, d)
    degree = [0] * n
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    odd = [v for v in range(n) if degree[v] % 2 == 1]
    if len(odd) <= EXACT_LIMIT:
        edges += exact_matching(d, odd)
    else:
        edges += greedy_matching(n, d, odd)
    adj = [[] for _ in range(n)]
    for eid, (u, v) in enumerate(edges):
        adj[u].append((v, eid))
        adj[v].append((u, eid))
    used = [False] * len(edges)
    ptr = [0] * n
    stack = [0]
    circuit = []
    while stack:
        v = stack[-1]
        while ptr[v] < len(adj[v]) and used[adj[v][ptr[v]][1]]:
            ptr[v] += 1
        if ptr[v] == len(adj[v]):
            circuit.append(v)
            stack.pop()
        else:
            w, eid = adj[v][ptr[v]]
            used[eid] = True
            stack.append(w)
    circuit.reverse()
    seen = [False] * n
    tour = []
    for v in circuit:
        if not seen[v]:
            seen[v] = True
            tour.append(v)
    return tour


def main():
    inst = json.loads(sys.stdin.readline())
    tour = solve(inst["n"], inst["matrix"])
    sys.stdout.write(json.dumps({"tour": tour}) + "\n")


if __name__ == "__main__":
    main()
