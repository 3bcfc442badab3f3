"""Nearest neighbor tour construction.

Reads one TSP instance document on stdin and writes {"tour": [...]}.
"""
import json
import sys


def solve(n, d):
    start = 0
    visited = [False] * n
    visited[start] = True
    tour = [start]
    current = start
    for _ in range(1, n):
        best = -1
        for j in range(n):
            if visited[j]:
                continue
            if best < 0 or d[current][j] < d[current][best]:
                best = j
        visited[best] = True
        tour.append(best)
        current = best
    return tour


def main():
    inst = json.loads(sys.stdin.readline())
    tour = solve(inst["n"], inst["matrix"])
    sys.stdout.write(json.dumps({"tour": tour}) + "\n")


if __name__ == "__main__":
    main()
