"""Next fit bin packing over the input order.

Reads one BPP instance document on stdin and writes {"bins": [[...], ...]}.
"""
import json
import sys

POLICY = "next"
SLACK = 1e-9


def solve(sizes, capacity):
    limit = capacity * (1.0 + SLACK)
    bins = []
    loads = []
    for item, size in enumerate(sizes):
        target = -1
        if POLICY == "first":
            for b in range(len(bins)):
                if loads[b] + size <= limit:
                    target = b
                    break
        elif POLICY == "next":
            if bins and loads[-1] + size <= limit:
                target = len(bins) - 1
        else:
            for b in range(len(bins)):
                if loads[b] + size > limit:
                    continue
                if target < 0:
                    target = b
                elif POLICY == "best" and loads[b] > loads[target]:
                    target = b
                elif POLICY == "worst" and loads[b] < loads[target]:
                    target = b
        if target < 0:
            bins.append([item])
            loads.append(size)
        else:
            bins[target].append(item)
            loads[target] += size
    return bins


def main():
    inst = json.loads(sys.stdin.readline())
    bins = solve(inst["sizes"], inst["capacity"])
    sys.stdout.write(json.dumps({"bins": bins}) + "\n")


if __name__ == "__main__":
    main()
