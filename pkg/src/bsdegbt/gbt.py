"""Exact-greedy gradient-boosted regression trees.

Squared-error boosting with second-order leaf weights, gain-based split
selection, shrinkage and a hard depth limit. The hot loops are compiled with
numba; everything else is plain numpy.

Loss is ``l(y, p) = (p - y)**2 / 2`` so the per-sample statistics are
``g = p - y`` and ``h = 1``. A leaf holding instance set ``I`` gets the weight
``-eta * sum(g) / (sum(h) + lambda)`` and a split of ``I`` into ``L``/``R`` is
scored by::

    gain = 0.5 * (G_L**2/(H_L+lam) + G_R**2/(H_R+lam) - G**2/(H+lam)) - gamma

Candidate thresholds are midpoints between consecutive distinct sorted values
of a feature; a sample goes left iff ``x[feature] < threshold``. Ties in gain
go to the lowest feature index, then the smallest threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

LEAF = -1


@dataclass(frozen=True)
class GbtHyperParams:
    n_trees: int = 20
    learning_rate: float = 0.9
    max_depth: int = 2
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_samples_leaf: int = 1
    split_ratio: float = 0.75
    column_subsample: float = 1.0

    def __post_init__(self):
        if self.n_trees < 0:
            raise ValueError(f"n_trees must be >= 0, got {self.n_trees}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")
        if self.reg_lambda < 0.0:
            raise ValueError(f"reg_lambda must be >= 0, got {self.reg_lambda}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if not 0.0 < self.split_ratio <= 1.0:
            raise ValueError(f"split_ratio must lie in (0, 1], got {self.split_ratio}")
        if not 0.0 < self.column_subsample <= 1.0:
            raise ValueError(f"column_subsample must lie in (0, 1], got {self.column_subsample}")

    @property
    def max_nodes(self) -> int:
        return 2 ** (self.max_depth + 1) - 1


@dataclass(frozen=True)
class Tree:
    """One fitted tree as flat arrays; node 0 is the root.

    ``feature[k] == -1`` marks a leaf whose (already shrunk) weight is
    ``value[k]``. ``gain`` is the split gain of internal nodes, ``cover`` the
    number of training instances that reached the node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    cover: np.ndarray
    depth: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index reached by each row of ``X``."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _route(X, self.feature, self.threshold, self.left, self.right)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


@dataclass
class GbtModel:
    base_score: float
    trees: list[Tree]
    hyper: GbtHyperParams
    n_features: int
    train_curve: np.ndarray = field(default_factory=lambda: np.zeros(0))
    test_curve: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out += tree.predict(X)
        return out


@dataclass(frozen=True)
class SplitDecision:
    feature: int
    threshold: float
    gain: float
    left: np.ndarray
    right: np.ndarray


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True, nogil=True)
def _route(X, feature, threshold, left, right):
    out = np.empty(X.shape[0], dtype=np.int64)
    for s in range(X.shape[0]):
        k = 0
        while feature[k] != -1:
            if X[s, feature[k]] < threshold[k]:
                k = left[k]
            else:
                k = right[k]
        out[s] = k
    return out


@njit(cache=True, nogil=True)
def _midpoint(lo, hi):
    t = 0.5 * (lo + hi)
    if t <= lo or t > hi:
        t = hi
    return t


# a candidate must beat the incumbent by this relative margin; scores that
# differ only by summation-order rounding then count as ties, which go to the
# earlier (lower feature, smaller threshold) candidate
_TIE = 1.0 + 1e-13


@njit(cache=True, nogil=True)
def _scan_node(order, svals, g, h, G, H, lam, msl):
    """Best split of one node with arbitrary hessians.

    Returns ``(score, feature, threshold)`` where ``score`` is the sum of the
    two child terms of the gain (feature -1 if there is no candidate).
    """
    n_feat, n = order.shape
    best = -np.inf
    best_f = -1
    best_t = 0.0
    for f in range(n_feat):
        gl = 0.0
        hl = 0.0
        prev = svals[f, 0]
        for k in range(n):
            v = svals[f, k]
            if v > prev and k >= msl and n - k >= msl:
                gr = G - gl
                hr = H - hl
                if hl + lam > 0.0 and hr + lam > 0.0:
                    score = gl * gl * (1.0 / (hl + lam)) + gr * gr * (1.0 / (hr + lam))
                    if score > best * _TIE:
                        best = score
                        best_f = f
                        best_t = _midpoint(prev, v)
            s = order[f, k]
            gl += g[s]
            hl += h[s]
            prev = v
    return best, best_f, best_t


@njit(cache=True, nogil=True)
def _mse_curves(Y, pred, is_train, k, train_curve, test_curve):
    R, m = pred.shape
    for r in range(R):
        a = 0.0
        na = 0
        b = 0.0
        nb = 0
        for s in range(m):
            e = pred[r, s] - Y[s, r]
            if is_train[s]:
                a += e * e
                na += 1
            else:
                b += e * e
                nb += 1
        train_curve[r, k] = a / na
        test_curve[r, k] = b / nb if nb > 0 else np.nan


@njit(cache=True, nogil=True, error_model="numpy")
def _scan_root(order, svals, g, G, colmask, inv, msl, best, best_f, best_k):
    """Root scan for all targets at once; node counts are shared."""
    n_feat, n = order.shape
    R = g.shape[1]
    acc = np.empty(R)
    for f in range(n_feat):
        if not colmask[f]:
            continue
        acc[:] = 0.0
        prev = svals[f, 0]
        for k in range(n):
            v = svals[f, k]
            if v > prev and k >= msl and n - k >= msl:
                a = inv[k]
                b = inv[n - k]
                for r in range(R):
                    gl = acc[r]
                    gr = G[0, r] - gl
                    sc = gl * gl * a + gr * gr * b
                    ok = sc > best[0, r] * _TIE
                    best[0, r] = sc if ok else best[0, r]
                    best_f[0, r] = f if ok else best_f[0, r]
                    best_k[0, r] = k if ok else best_k[0, r]
            s = order[f, k]
            for r in range(R):
                acc[r] += g[s, r]
            prev = v


@njit(cache=True, nogil=True, error_model="numpy")
def _deep_score(gl, gr, cl, cr, lam):
    a = cl + lam
    b = cr + lam
    return (gl * gl * b + gr * gr * a) / (a * b)


@njit(cache=True, nogil=True, error_model="numpy")
def _scan_deep(order, svals, g, slot, G, C, colmask, lam, msl, best, best_f):
    """Best score and feature per (node slot, target) below the root.

    Candidates are evaluated at every boundary between distinct values of the
    whole training set. Within one node that visits each of its own boundaries
    plus exact repeats, which never win a strict comparison. Only the running
    maximum is kept here so the inner loops vectorize; :func:`_locate` recovers
    the position afterwards.
    """
    n_feat, n = order.shape
    S, R = G.shape
    acc = np.empty((S, R))
    cnt = np.empty((S, R))
    fb = np.empty((S, R))
    for f in range(n_feat):
        if not colmask[f]:
            continue
        acc[:, :] = 0.0
        cnt[:, :] = 0.0
        fb[:, :] = -np.inf
        prev = svals[f, 0]
        for k in range(n):
            v = svals[f, k]
            if v > prev:
                for j in range(S):
                    a_, c_, G_, C_, fb_ = acc[j], cnt[j], G[j], C[j], fb[j]
                    for r in range(R):
                        cl = c_[r]
                        cr = C_[r] - cl
                        sc = _deep_score(a_[r], G_[r] - a_[r], cl, cr, lam)
                        ok = (cl >= msl) & (cr >= msl)
                        sc = sc if ok else -np.inf
                        fb_[r] = sc if sc > fb_[r] else fb_[r]
            s = order[f, k]
            sl, gs = slot[s], g[s]
            for j in range(S):
                a_, c_ = acc[j], cnt[j]
                fj = float(j)
                for r in range(R):
                    mm = sl[r] == fj
                    a_[r] += gs[r] if mm else 0.0
                    c_[r] += 1.0 if mm else 0.0
            prev = v
        for j in range(S):
            for r in range(R):
                if fb[j, r] > best[j, r] * _TIE:
                    best[j, r] = fb[j, r]
                    best_f[j, r] = f


@njit(cache=True, nogil=True, error_model="numpy")
def _locate(order, svals, g, slot, j, r, f, Gj, Cj, lam, msl):
    """Largest left value of the first best split of slot ``j`` on feature ``f``."""
    n = order.shape[1]
    fj = float(j)
    gl = 0.0
    cl = 0.0
    last = -np.inf
    best = -np.inf
    lo = -np.inf
    prev = svals[f, 0]
    for k in range(n):
        v = svals[f, k]
        if v > prev:
            cr = Cj - cl
            if cl >= msl and cr >= msl:
                sc = _deep_score(gl, Gj - gl, cl, cr, lam)
                if sc > best * _TIE:
                    best = sc
                    lo = last
        s = order[f, k]
        if slot[s, r] == fj:
            gl += g[s, r]
            cl += 1.0
            last = v
        prev = v
    return lo


@njit(cache=True, nogil=True, error_model="numpy")
def _fit_batch(X, is_train, Xtr, order, svals, Y, colmasks, n_trees, max_depth, eta,
               lam, gamma, msl, feat, thr, left, right, value, gain, cover, depth,
               n_nodes, pred, train_curve, test_curve, base, kept):
    """Boost one ensemble per column of ``Y``, all trees grown in lockstep."""
    m = X.shape[0]
    ntr, n_feat = Xtr.shape
    R = Y.shape[1]
    tr_idx = np.flatnonzero(is_train)
    ytr = np.empty((ntr, R))
    for q in range(ntr):
        for r in range(R):
            ytr[q, r] = Y[tr_idx[q], r]
    for r in range(R):
        # y0 + mean(y - y0): exact for constant targets
        y0 = ytr[0, r]
        acc = 0.0
        for q in range(ntr):
            acc += ytr[q, r] - y0
        base[r] = y0 + acc / ntr
        for s in range(m):
            pred[r, s] = base[r]
    _mse_curves(Y, pred, is_train, 0, train_curve, test_curve)
    inv = np.empty(ntr + 1)
    inv[0] = np.inf
    for c in range(1, ntr + 1):
        inv[c] = 1.0 / (c + lam)
    g = np.empty((ntr, R))
    slot = np.empty((ntr, R))
    active = np.ones(R, dtype=np.bool_)
    kept[:] = 0
    for k in range(n_trees):
        if not active.any():
            break
        for q in range(ntr):
            for r in range(R):
                g[q, r] = pred[r, tr_idx[q]] - ytr[q, r]
                slot[q, r] = 0
        S = 1
        node_id = np.zeros((1, R), dtype=np.int64)
        count = np.ones(R, dtype=np.int64)
        for level in range(max_depth + 1):
            G = np.zeros((S, R))
            C = np.zeros((S, R), dtype=np.int64)
            for q in range(ntr):
                for r in range(R):
                    j = int(slot[q, r])
                    if j >= 0:
                        G[j, r] += g[q, r]
                        C[j, r] += 1
            best = np.full((S, R), -np.inf)
            best_f = np.full((S, R), -1, dtype=np.int64)
            best_lo = np.zeros((S, R))
            if level < max_depth:
                if level == 0:
                    best_k = np.zeros((1, R), dtype=np.int64)
                    _scan_root(order, svals, g, G, colmasks[k], inv, msl, best,
                               best_f, best_k)
                    for r in range(R):
                        if best_f[0, r] >= 0:
                            best_lo[0, r] = svals[best_f[0, r], best_k[0, r] - 1]
                else:
                    _scan_deep(order, svals, g, slot, G, C.astype(np.float64), colmasks[k],
                               lam, float(msl), best, best_f)
                    for j in range(S):
                        for r in range(R):
                            if best_f[j, r] >= 0 and active[r] and node_id[j, r] >= 0:
                                best_lo[j, r] = _locate(order, svals, g, slot, j, r,
                                                        best_f[j, r], G[j, r],
                                                        float(C[j, r]), lam, float(msl))
            # accept or close every node of this level
            split = np.zeros((S, R), dtype=np.bool_)
            n_split = 0
            for j in range(S):
                for r in range(R):
                    nd = node_id[j, r]
                    if nd < 0 or not active[r]:
                        continue
                    cover[r, k, nd] = C[j, r]
                    gn = -np.inf
                    if best_f[j, r] >= 0:
                        gn = 0.5 * (best[j, r] - G[j, r] * G[j, r] / (C[j, r] + lam)) - gamma
                    if gn > 0.0:
                        split[j, r] = True
                        n_split += 1
                        feat[r, k, nd] = best_f[j, r]
                        gain[r, k, nd] = gn
                        value[r, k, nd] = 0.0
                    else:
                        feat[r, k, nd] = -1
                        thr[r, k, nd] = 0.0
                        gain[r, k, nd] = 0.0
                        left[r, k, nd] = -1
                        right[r, k, nd] = -1
                        value[r, k, nd] = -eta * G[j, r] / (C[j, r] + lam)
            if n_split == 0:
                break
            # threshold = midpoint of best left value and the next node value
            hi = np.full((S, R), np.inf)
            for q in range(ntr):
                for r in range(R):
                    j = int(slot[q, r])
                    if j >= 0 and split[j, r]:
                        x = Xtr[q, best_f[j, r]]
                        if x > best_lo[j, r] and x < hi[j, r]:
                            hi[j, r] = x
            next_id = np.full((2 * S, R), -1, dtype=np.int64)
            for j in range(S):
                for r in range(R):
                    if split[j, r]:
                        nd = node_id[j, r]
                        t = _midpoint(best_lo[j, r], hi[j, r])
                        thr[r, k, nd] = t
                        a = count[r]
                        left[r, k, nd] = a
                        right[r, k, nd] = a + 1
                        depth[r, k, a] = level + 1
                        depth[r, k, a + 1] = level + 1
                        next_id[2 * j, r] = a
                        next_id[2 * j + 1, r] = a + 1
                        count[r] = a + 2
            for q in range(ntr):
                for r in range(R):
                    j = int(slot[q, r])
                    if j < 0:
                        continue
                    if split[j, r]:
                        nd = node_id[j, r]
                        if Xtr[q, feat[r, k, nd]] < thr[r, k, nd]:
                            slot[q, r] = 2 * j
                        else:
                            slot[q, r] = 2 * j + 1
                    else:
                        slot[q, r] = -1
            node_id = next_id
            S = 2 * S
        for r in range(R):
            if not active[r]:
                continue
            if count[r] == 1:
                # root refuses to split: the ensemble is final
                active[r] = False
                continue
            n_nodes[r, k] = count[r]
            kept[r] = k + 1
            lf = _route(X, feat[r, k], thr[r, k], left[r, k], right[r, k])
            for s in range(m):
                pred[r, s] += value[r, k, lf[s]]
        _mse_curves(Y, pred, is_train, k + 1, train_curve, test_curve)
    for r in range(R):
        for k in range(kept[r] + 1, n_trees + 1):
            train_curve[r, k] = train_curve[r, kept[r]]
            test_curve[r, k] = test_curve[r, kept[r]]


# ---------------------------------------------------------------------------
# python surface


def _check_features(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"features must be 2-d, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    return np.ascontiguousarray(X)


def presort(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature stable sort order and sorted values, shape (n_features, n)."""
    Xt = np.ascontiguousarray(X.T)
    order = np.argsort(Xt, axis=1, kind="stable")
    svals = np.take_along_axis(Xt, order, axis=1)
    return order, svals


def train_mask(m: int, split_ratio: float, seed: int) -> np.ndarray:
    """Boolean mask of training rows from a seeded shuffle."""
    n_train = min(m, max(1, int(round(split_ratio * m))))
    perm = np.random.default_rng(seed).permutation(m)
    mask = np.zeros(m, dtype=np.bool_)
    mask[perm[:n_train]] = True
    return mask


def _column_masks(n_features: int, hyper: GbtHyperParams, seed: int) -> np.ndarray:
    masks = np.ones((max(hyper.n_trees, 1), n_features), dtype=np.bool_)
    if hyper.column_subsample < 1.0:
        n_keep = max(1, int(math.floor(hyper.column_subsample * n_features)))
        rng = np.random.default_rng([seed, 1])
        for k in range(hyper.n_trees):
            masks[k] = False
            masks[k, rng.choice(n_features, n_keep, replace=False)] = True
    return masks


class BoostingData:
    """Features prepared once (train split + presort) for many fits.

    Every target fitted against the same ``BoostingData`` shares its train/test
    split, which is what lets the solver reuse one presort for all the
    regressions of a time step.
    """

    def __init__(self, X: np.ndarray, split_ratio: float = 0.75, seed: int = 0):
        self.X = _check_features(X)
        m = self.X.shape[0]
        if m < 2:
            raise ValueError(f"need at least 2 samples, got {m}")
        self.split_ratio = split_ratio
        self.seed = seed
        self.is_train = train_mask(m, split_ratio, seed)
        self.Xtr = np.ascontiguousarray(self.X[self.is_train])
        self.order, self.svals = presort(self.Xtr)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def fit_many(self, Y: np.ndarray, hyper: GbtHyperParams,
                 keep_models: bool = True) -> tuple[list[GbtModel] | None, np.ndarray]:
        """Fit one ensemble per column of ``Y``.

        Returns the models (or None) and the in-sample predictions on all rows,
        shape (n_targets, n_samples).
        """
        if hyper.split_ratio != self.split_ratio:
            raise ValueError("hyper.split_ratio differs from the prepared split")
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.shape[0] != self.X.shape[0]:
            raise ValueError(f"targets have {Y.shape[0]} rows, features {self.X.shape[0]}")
        if not np.all(np.isfinite(Y)):
            raise ValueError("targets contain non-finite values")
        Y = np.ascontiguousarray(Y)
        R, m, K, nn = Y.shape[1], Y.shape[0], hyper.n_trees, hyper.max_nodes
        Kb = max(K, 1)
        feat = np.full((R, Kb, nn), LEAF, dtype=np.int64)
        thr = np.zeros((R, Kb, nn))
        left = np.full((R, Kb, nn), -1, dtype=np.int64)
        right = np.full((R, Kb, nn), -1, dtype=np.int64)
        value = np.zeros((R, Kb, nn))
        gain = np.zeros((R, Kb, nn))
        cover = np.zeros((R, Kb, nn), dtype=np.int64)
        depth = np.zeros((R, Kb, nn), dtype=np.int64)
        n_nodes = np.zeros((R, Kb), dtype=np.int64)
        pred = np.empty((R, m))
        train_curve = np.empty((R, K + 1))
        test_curve = np.empty((R, K + 1))
        base = np.empty(R)
        kept = np.empty(R, dtype=np.int64)
        colmasks = _column_masks(self.n_features, hyper, self.seed)
        _fit_batch(self.X, self.is_train, self.Xtr, self.order, self.svals, Y,
                    colmasks, K, hyper.max_depth, hyper.learning_rate,
                    hyper.reg_lambda, hyper.gamma, hyper.min_samples_leaf, feat,
                    thr, left, right, value, gain, cover, depth, n_nodes, pred,
                    train_curve, test_curve, base, kept)
        if not keep_models:
            return None, pred
        models = []
        for r in range(R):
            trees = []
            for k in range(kept[r]):
                c = n_nodes[r, k]
                trees.append(Tree(feat[r, k, :c].copy(), thr[r, k, :c].copy(),
                                  left[r, k, :c].copy(), right[r, k, :c].copy(),
                                  value[r, k, :c].copy(), gain[r, k, :c].copy(),
                                  cover[r, k, :c].copy(), depth[r, k, :c].copy()))
            models.append(GbtModel(float(base[r]), trees, hyper, self.n_features,
                                   train_curve[r].copy(), test_curve[r].copy()))
        return models, pred


def fit(features: np.ndarray, targets: np.ndarray, hyper: GbtHyperParams,
        seed: int = 0) -> GbtModel:
    """Fit a boosted ensemble on a seeded train split of the data."""
    data = BoostingData(features, hyper.split_ratio, seed)
    models, _ = data.fit_many(np.asarray(targets, dtype=np.float64), hyper)
    return models[0]


def predict(model: GbtModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise ValueError(f"expected a vector of length {model.n_features}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite values")
    return float(model.predict(x[None, :])[0])


def learning_curve(features: np.ndarray, targets: np.ndarray, hyper: GbtHyperParams,
                   seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Train and test MSE after k = 0..K trees (k = 0 is the base score)."""
    model = fit(features, targets, hyper, seed)
    return model.train_curve, model.test_curve


def best_split(g: np.ndarray, h: np.ndarray, features: np.ndarray, reg_lambda: float,
               gamma: float, min_samples_leaf: int = 1) -> SplitDecision | None:
    """Best exact-greedy split of one node, or None if no split has gain > 0."""
    X = _check_features(features)
    g = np.ascontiguousarray(g, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    n = X.shape[0]
    if g.shape != (n,) or h.shape != (n,):
        raise ValueError("g, h and features disagree on the number of instances")
    if n < 2:
        return None
    order, svals = presort(X)
    G, H = float(g.sum()), float(h.sum())
    score, f, t = _scan_node(order, svals, g, h, G, H, float(reg_lambda),
                             int(min_samples_leaf))
    if f < 0:
        return None
    gain = 0.5 * (score - G * G / (H + reg_lambda)) - gamma
    if not gain > 0.0:
        return None
    goes_left = X[:, f] < t
    return SplitDecision(int(f), float(t), float(gain), np.flatnonzero(goes_left),
                         np.flatnonzero(~goes_left))


# ---------------------------------------------------------------------------
# text dump


def dumps(model: GbtModel) -> str:
    """Line-oriented dump; one ``tree k`` block per tree, nodes in preorder.

    Internal nodes print as ``(depth, feature, threshold)`` and leaves as
    ``leaf(weight)``, indented two spaces per depth level. Floats use
    ``repr`` so the dump round-trips exactly through :func:`loads`.
    """
    lines = [f"base_score={model.base_score!r}", f"n_features={model.n_features}"]
    for k, tree in enumerate(model.trees):
        lines.append(f"tree {k}")
        stack = [0]
        while stack:
            node = stack.pop()
            pad = "  " * (int(tree.depth[node]) + 1)
            if tree.feature[node] == LEAF:
                lines.append(f"{pad}leaf({float(tree.value[node])!r})")
            else:
                lines.append(f"{pad}({int(tree.depth[node])}, {int(tree.feature[node])}, "
                             f"{float(tree.threshold[node])!r})")
                stack.append(int(tree.right[node]))
                stack.append(int(tree.left[node]))
    return "\n".join(lines) + "\n"


def loads(text: str, hyper: GbtHyperParams | None = None) -> GbtModel:
    """Inverse of :func:`dumps` (gain and cover are not stored and come back 0)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    base = float(lines[0].split("=", 1)[1])
    n_features = int(lines[1].split("=", 1)[1])
    blocks: list[list[str]] = []
    for ln in lines[2:]:
        if ln.startswith("tree "):
            blocks.append([])
        else:
            blocks[-1].append(ln.strip())
    trees = [_parse_tree(b) for b in blocks]
    return GbtModel(base, trees, hyper or GbtHyperParams(), n_features)


def _parse_tree(body: list[str]) -> Tree:
    feat, thr, left, right, value, depth = [], [], [], [], [], []
    pos = 0

    def node(d: int) -> int:
        nonlocal pos
        line = body[pos]
        pos += 1
        k = len(feat)
        feat.append(LEAF), thr.append(0.0), left.append(-1), right.append(-1)
        value.append(0.0), depth.append(d)
        if line.startswith("leaf("):
            value[k] = float(line[5:-1])
        else:
            _, f, t = (s.strip() for s in line[1:-1].split(","))
            feat[k], thr[k] = int(f), float(t)
            left[k] = node(d + 1)
            right[k] = node(d + 1)
        return k

    node(0)
    n = len(feat)
    return Tree(np.array(feat, dtype=np.int64), np.array(thr), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), np.array(value), np.zeros(n),
                np.zeros(n, dtype=np.int64), np.array(depth, dtype=np.int64))
