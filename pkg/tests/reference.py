"""Straight-line reference implementations used as test oracles.

Deliberately plain Python (lists and loops), sharing no code with the package.
"""

import math


def sqdist(a, b):
    total = 0.0
    for x, y in zip(a, b):
        total += (x - y) * (x - y)
    return total


def uniform_spread(points, k):
    d = len(points[0])
    lo = [min(p[b] for p in points) for b in range(d)]
    hi = [max(p[b] for p in points) for b in range(d)]
    if k == 1:
        return [[(lo[b] + hi[b]) / 2.0 for b in range(d)]]
    return [[lo[b] + i * (hi[b] - lo[b]) / (k - 1) for b in range(d)] for i in range(k)]


def nearest(p, centroids):
    best, best_d = 0, sqdist(p, centroids[0])
    for j in range(1, len(centroids)):
        dj = sqdist(p, centroids[j])
        if dj < best_d:
            best, best_d = j, dj
    return best


def lloyd_trace(points, k, max_iter=100):
    """Lloyd's algorithm; returns one ``(labels, centroids_used)`` per assignment pass."""
    d = len(points[0])
    centroids = uniform_spread(points, k)
    prev = None
    rounds = []
    for _ in range(max_iter):
        labels = [nearest(p, centroids) for p in points]
        rounds.append((labels, [list(c) for c in centroids]))
        if labels == prev:
            break
        prev = labels
        new = []
        for j in range(k):
            members = [p for p, l in zip(points, labels) if l == j]
            if members:
                new.append([sum(m[b] for m in members) / len(members) for b in range(d)])
            else:
                new.append(None)
        dist = []
        for p, l in zip(points, labels):
            dist.append(sqdist(p, new[l]) if new[l] is not None else 0.0)
        for j in range(k):
            if new[j] is None:
                far = 0
                for i in range(1, len(points)):
                    if dist[i] > dist[far]:
                        far = i
                new[j] = list(points[far])
                dist[far] = -math.inf
        centroids = new
    return rounds


def tally(values, edges):
    """Histogram by direct interval tests: [e_i, e_i+1), last bin closed."""
    n = len(edges) - 1
    counts = [0] * n
    for v in values:
        for i in range(n):
            last = i == n - 1
            if edges[i] <= v < edges[i + 1] or (last and v == edges[n]):
                counts[i] += 1
                break
    return counts


def otsu_exhaustive(counts, edges):
    """Try every interior edge; keep the first one with the largest between-class variance."""
    n = len(counts)
    centers = [(edges[i] + edges[i + 1]) / 2.0 for i in range(n)]
    total = float(sum(counts))
    best_i, best_v = None, -1.0
    for i in range(1, n):
        n0 = float(sum(counts[:i]))
        n1 = float(sum(counts[j] for j in range(n - 1, i - 1, -1)))
        if n0 == 0 or n1 == 0:
            continue
        m0 = sum(counts[j] * centers[j] for j in range(i)) / n0
        m1 = sum(counts[j] * centers[j] for j in range(n - 1, i - 1, -1)) / n1
        gap = m0 - m1
        v = (n0 / total) * (n1 / total) * (gap * gap)
        if v > best_v:
            best_i, best_v = i, v
    return edges[best_i]


def mean_spectrum(cube, mask, row_start, row_end):
    rows, cols, bands = cube.shape
    acc = [0.0] * bands
    n = 0
    for r in range(row_start, row_end):
        for c in range(cols):
            if mask[r][c]:
                n += 1
                for b in range(bands):
                    acc[b] += float(cube[r][c][b])
    return [a / n for a in acc], n
