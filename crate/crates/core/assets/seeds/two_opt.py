"""2-opt improvement of the identity tour, best improvement per sweep.

Reads one TSP instance document on stdin and writes {"tour": [...]}.
"""
import json
import sys

EPS = 1e-10


def two_opt(d, tour):
    t = list(tour)
    n = len(t)
    if n < 4:
        return t
    while True:
        best_delta = -EPS
        best_move = None
        for i in range(n - 1):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                a, b, c, e = t[i], t[i + 1], t[j], t[(j + 1) % n]
                delta = d[a][c] + d[b][e] - d[a][b] - d[c][e]
                if delta < best_delta:
                    best_delta = delta
                    best_move = (i, j)
        if best_move is None:
            return t
        i, j = best_move
        t[i + 1:j + 1] = t[i + 1:j + 1][::-1]


def main():
    inst = json.loads(sys.stdin.readline())
    tour = two_opt(inst["matrix"], list(range(inst["n"])))
    sys.stdout.write(json.dumps({"tour": tour}) + "\n")


if __name__ == "__main__":
    main()
