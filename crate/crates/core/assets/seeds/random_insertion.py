"""Random insertion tour construction.

Reads one TSP instance document on stdin and writes {"tour": [...]}.
"""
import json
import sys

MODE = "random"
MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)


def extreme_pair(n, d, farthest):
    best = (0, 1)
    for i in range(n):
        for j in range(i + 1, n):
            b = d[best[0]][best[1]]
            if (farthest and d[i][j] > b) or (not farthest and d[i][j] < b):
                best = (i, j)
    return best


def cheapest_position(d, tour, city):
    k = len(tour)
    best_p = 0
    best_cost = float("inf")
    for p in range(k):
        a = tour[p]
        b = tour[(p + 1) % k]
        cost = d[a][city] + d[city][b] - d[a][b]
        if cost < best_cost:
            best_cost = cost
            best_p = p
    return best_p


def solve(n, d):
    if n <= 2:
        return list(range(n))
    rng = SplitMix64(0x5EED if MODE == "random" else 0)
    a, b = extreme_pair(n, d, MODE != "nearest")
    tour = [a, b]
    reach = [min(d[c][a], d[c][b]) for c in range(n)]
    remaining = [c for c in range(n) if c != a and c != b]
    while remaining:
        if MODE == "random":
            pick = rng.next_u64() % len(remaining)
        else:
            pick = 0
            for idx in range(1, len(remaining)):
                c, bc = remaining[idx], remaining[pick]
                if MODE == "nearest":
                    better = reach[c] < reach[bc]
                else:
                    better = reach[c] > reach[bc]
                if better:
                    pick = idx
        city = remaining.pop(pick)
        p = cheapest_position(d, tour, city)
        tour.insert(p + 1, city)
        for c in remaining:
            if d[c][city] < reach[c]:
                reach[c] = d[c][city]
    return tour


def main():
    inst = json.loads(sys.stdin.readline())
    tour = solve(inst["n"], inst["matrix"])
    sys.stdout.write(json.dumps({"tour": tour}) + "\n")


if __name__ == "__main__":
    main()
