"""Slow, obviously-correct reference implementations used as test oracles."""
from __future__ import annotations

import math

import numpy as np


def brute_force_split(g, h, X, lam, gamma, min_leaf=1):
    """Enumerate every feature/midpoint, score with direct masked sums.

    Returns (feature, threshold, gain) of the best candidate with gain > 0,
    ties going to the lowest feature and then the smallest threshold, or None.
    """
    n, d = X.shape
    G, H = g.sum(), h.sum()
    parent = G * G / (H + lam)
    cands = []
    for f in range(d):
        vals = np.unique(X[:, f])
        for a, b in zip(vals[:-1], vals[1:]):
            t = 0.5 * (a + b)
            if t <= a or t > b:
                t = b
            left = X[:, f] < t
            nl = int(left.sum())
            if nl < min_leaf or n - nl < min_leaf:
                continue
            gl, hl = g[left].sum(), h[left].sum()
            gr, hr = g[~left].sum(), h[~left].sum()
            gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent) - gamma
            cands.append((gain, f, t))
    if not cands:
        return None
    top = max(c[0] for c in cands)
    if not top > 0:
        return None
    tol = 1e-12 * max(1.0, abs(top))
    tied = [c for c in cands if c[0] >= top - tol]
    gain, f, t = min(tied, key=lambda c: (c[1], c[2]))
    return f, t, gain


def _grow(X, g, idx, depth, max_depth, eta, lam, gamma, min_leaf):
    G = g[idx].sum()
    n = len(idx)
    if depth < max_depth and n >= 2:
        res = brute_force_split(g[idx], np.ones(n), X[idx], lam, gamma, min_leaf)
        if res is not None:
            f, t, _ = res
            go = X[idx, f] < t
            return (f, t,
                    _grow(X, g, idx[go], depth + 1, max_depth, eta, lam, gamma, min_leaf),
                    _grow(X, g, idx[~go], depth + 1, max_depth, eta, lam, gamma, min_leaf))
    return -eta * G / (n + lam)


def _eval(node, x):
    while isinstance(node, tuple):
        f, t, lo, hi = node
        node = lo if x[f] < t else hi
    return node


def reference_boost(X, y, is_train, n_trees, eta, max_depth, lam, gamma, min_leaf=1):
    """Plain recursive booster on the rows flagged by ``is_train``.

    Returns (base, trees, predictions on all rows).
    """
    Xt, yt = X[is_train], y[is_train]
    base = yt[0] + np.mean(yt - yt[0])
    pred = np.full(len(y), base)
    trees = []
    for _ in range(n_trees):
        g = pred[is_train] - yt
        tree = _grow(Xt, g, np.arange(len(yt)), 0, max_depth, eta, lam, gamma, min_leaf)
        if not isinstance(tree, tuple):
            break
        trees.append(tree)
        pred = pred + np.array([_eval(tree, x) for x in X])
    return base, trees, pred


def gaussian_moment(k: int, var: float) -> float:
    """E[Z**k] for Z ~ N(0, var)."""
    if k % 2:
        return 0.0
    return math.prod(range(k - 1, 0, -2)) * var ** (k // 2)
