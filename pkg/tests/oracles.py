"""Brute-force reference implementations the tests compare against.

Everything here is written in plain-loop style on purpose: no shared code
with the package, no vectorization tricks, just the textbook definitions.
Slow is fine; these run on small inputs.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np


def flood_fill_components(labelmap, class_id, connectivity=4):
    """Connected components via explicit BFS. Returns lists of (x, y) pixels,
    each sorted in raster order, components sorted by first pixel."""
    h, w = labelmap.shape
    seen = [[False] * w for _ in range(h)]
    if connectivity == 4:
        steps = [(0, 1), (0, -1), (1, 0), (-1, 0)]
    else:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    components = []
    for y in range(h):
        for x in range(w):
            if seen[y][x] or labelmap[y][x] != class_id:
                continue
            queue = deque([(y, x)])
            seen[y][x] = True
            pixels = []
            while queue:
                cy, cx = queue.popleft()
                pixels.append((cx, cy))
                for dy, dx in steps:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and not seen[ny][nx] \
                            and labelmap[ny][nx] == class_id:
                        seen[ny][nx] = True
                        queue.append((ny, nx))
            pixels.sort(key=lambda p: (p[1], p[0]))
            components.append(pixels)
    components.sort(key=lambda c: (c[0][1], c[0][0]))
    return components


def slow_hull(points):
    """Convex hull by testing every directed edge against every point: an
    edge (a, b) is on the hull iff no point lies strictly to its left and
    no collinear point falls outside the segment. Returns the vertex set."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) == 1:
        return set(pts)
    if len(pts) == 2:
        return set(pts)

    def cross(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    hull_vertices = set()
    n = len(pts)
    collinear_all = all(cross(pts[0], pts[1], p) == 0 for p in pts)
    if collinear_all:
        return {pts[0], pts[-1]}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = pts[i], pts[j]
            is_edge = True
            for k in range(n):
                if k == i or k == j:
                    continue
                side = cross(a, b, pts[k])
                if side > 0:
                    is_edge = False
                    break
                if side == 0:
                    # collinear point outside the segment disqualifies the edge
                    lo0, hi0 = min(a[0], b[0]), max(a[0], b[0])
                    lo1, hi1 = min(a[1], b[1]), max(a[1], b[1])
                    p = pts[k]
                    if not (lo0 <= p[0] <= hi0 and lo1 <= p[1] <= hi1):
                        is_edge = False
                        break
            if is_edge:
                hull_vertices.add(a)
                hull_vertices.add(b)
    return hull_vertices


def slow_corners(points, map_size):
    """Exhaustive nearest point to each image corner; ties prefer smaller y,
    then smaller x."""
    w, h = map_size
    anchors = [(0.0, 0.0), (w - 1.0, 0.0), (w - 1.0, h - 1.0), (0.0, h - 1.0)]
    out = []
    for ax, ay in anchors:
        best = None
        best_key = None
        for x, y in points:
            d2 = (x - ax) ** 2 + (y - ay) ** 2
            key = (d2, y, x)
            if best_key is None or key < best_key:
                best_key = key
                best = (float(x), float(y))
        out.append(best)
    return out


def slow_confusion(pred, truth, num_classes):
    """Double-loop confusion counts, matrix[truth][pred]."""
    h = len(pred)
    w = len(pred[0])
    matrix = [[0] * num_classes for _ in range(num_classes)]
    for y in range(h):
        for x in range(w):
            matrix[int(truth[y][x])][int(pred[y][x])] += 1
    return matrix


def slow_scores(matrix):
    """Per-class accuracy and IoU plus totals from a confusion matrix.
    Absent classes map to None; mIoU averages classes present in truth."""
    n = len(matrix)
    total_pixels = sum(sum(row) for row in matrix)
    accuracy = {}
    iou = {}
    present = []
    correct = 0
    for c in range(n):
        tp = matrix[c][c]
        fn = sum(matrix[c][p] for p in range(n) if p != c)
        fp = sum(matrix[t][c] for t in range(n) if t != c)
        correct += tp
        if tp + fn == 0:
            accuracy[c] = None
            iou[c] = None
            continue
        present.append(c)
        accuracy[c] = tp / (tp + fn)
        union = tp + fp + fn
        iou[c] = tp / union if union else 0.0
    total_accuracy = correct / total_pixels if total_pixels else 0.0
    miou = sum(iou[c] for c in present) / len(present) if present else 0.0
    return accuracy, iou, total_accuracy, miou


def slow_cross_entropy(pred, truth, clamp=1e-12):
    total = 0.0
    flat_p = np.asarray(pred, dtype=float).reshape(-1)
    flat_t = np.asarray(truth, dtype=float).reshape(-1)
    for p, t in zip(flat_p, flat_t):
        if t != 0.0:
            total -= t * math.log(max(p, clamp))
    return total


def slow_focal(pred, truth, alpha, beta, num_instances):
    total = 0.0
    flat_p = np.asarray(pred, dtype=float).reshape(-1)
    flat_t = np.asarray(truth, dtype=float).reshape(-1)
    for p, t in zip(flat_p, flat_t):
        if t == 1.0:
            total += (1.0 - p) ** alpha * math.log(p)
        else:
            total += (1.0 - t) ** beta * p**alpha * math.log(1.0 - p)
    return -total / num_instances


def slow_single_linkage(values, threshold):
    """1-D single-linkage clusters: sort, split where the gap exceeds the
    threshold. Returns lists of member indices into the original order."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    clusters = []
    current = [order[0]]
    for prev, cur in zip(order, order[1:]):
        if values[cur] - values[prev] <= threshold:
            current.append(cur)
        else:
            clusters.append(current)
            current = [cur]
    clusters.append(current)
    return clusters


def slow_variance(values):
    n = len(values)
    mean = sum(values) / n
    return sum((v - mean) ** 2 for v in values) / n
