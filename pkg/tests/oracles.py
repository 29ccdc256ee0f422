"""Brute-force reference implementations, independent of the package code paths."""

import itertools
import math

import numpy as np
import scipy.linalg

LEAK = 0.01
EPS = 1e-6


# --- combinatorics ---------------------------------------------------------


def brute_cliques(n, edges, size):
    es = {frozenset(e) for e in edges}
    return [
        c
        for c in itertools.combinations(range(n), size)
        if all(frozenset(p) in es for p in itertools.combinations(c, 2))
    ]


def brute_chordless_cycles(n, edges, max_len):
    """Vertex sets whose induced subgraph is a single cycle."""
    es = {frozenset(e) for e in edges}
    out = []
    for k in range(3, max_len + 1):
        for sub in itertools.combinations(range(n), k):
            induced = [p for p in itertools.combinations(sub, 2) if frozenset(p) in es]
            if len(induced) != k:
                continue
            deg = {v: 0 for v in sub}
            for a, b in induced:
                deg[a] += 1
                deg[b] += 1
            if any(d != 2 for d in deg.values()):
                continue
            # connected 2-regular graph is one cycle
            seen, stack = {sub[0]}, [sub[0]]
            while stack:
                u = stack.pop()
                for a, b in induced:
                    w = b if a == u else a if b == u else None
                    if w is not None and w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) == k:
                out.append(frozenset(sub))
    return out


def brute_incidence(cells, s, sigma):
    """cells: list of (frozenset, rank); sigma: index. Full scan per the set definition."""
    vs, t = cells[sigma]
    out = set()
    for i, (ws, rk) in enumerate(cells):
        if rk != s:
            continue
        if t < s and vs < ws:
            out.add(i)
        if t > s and ws < vs:
            out.add(i)
    return out


def brute_adjacency(cells, t, s, sigma):
    inc = brute_incidence(cells, s, sigma)
    out = set()
    for i, (_, rk) in enumerate(cells):
        if rk == t and i != sigma and inc & brute_incidence(cells, s, i):
            out.add(i)
    return out


# --- spectral / walk oracles -------------------------------------------------


def dense_laplacian(adj):
    n = adj.shape[0]
    lap = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                lap[i, j] = -adj[i, j]
        lap[i, i] = sum(adj[i, j] for j in range(n) if j != i)
    return lap


def components(adj):
    n = adj.shape[0]
    label = [-1] * n
    c = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = c
        stack = [s]
        while stack:
            u = stack.pop()
            for w in range(n):
                if adj[u, w] and label[w] < 0:
                    label[w] = c
                    stack.append(w)
        c += 1
    return c, np.array(label)


def rwse_oracle(adj, K):
    n = adj.shape[0]
    p = np.zeros((n, n))
    for i in range(n):
        d = adj[i].sum()
        if d == 0:
            p[i, i] = 1.0
        else:
            p[i] = adj[i] / d
    out = np.zeros((n, K))
    for t in range(1, K + 1):
        out[:, t - 1] = np.diag(np.linalg.matrix_power(p, t))
    return out


def hk_oracle(adj, K):
    lap = dense_laplacian(adj)
    return np.stack([np.diag(scipy.linalg.expm(-t * lap)) for t in range(1, K + 1)], axis=1)


def lap_eigs_oracle(adj, i):
    """Nontrivial eigenvalues (ascending) via a general (non-symmetric) eigensolver."""
    lap = dense_laplacian(adj)
    n_comp, _ = components(adj)
    w = np.sort(np.real(scipy.linalg.eig(lap, right=False)))
    return w[n_comp:][:i]


def elstatic_oracle(adj):
    n = adj.shape[0]
    n_comp, labels = components(adj)
    out = np.zeros((n, 7))
    for c in range(n_comp):
        idx = [v for v in range(n) if labels[v] == c]
        if len(idx) == 1:
            continue
        sub = adj[np.ix_(idx, idx)]
        m = np.linalg.pinv(dense_laplacian(sub), rcond=1e-10)
        k = len(idx)
        # Floyd-Warshall hop distances
        dist = np.where(sub > 0, 1.0, np.inf)
        np.fill_diagonal(dist, 0.0)
        for w in range(k):
            for a in range(k):
                for b in range(k):
                    if dist[a, w] + dist[w, b] < dist[a, b]:
                        dist[a, b] = dist[a, w] + dist[w, b]
        for a in range(k):
            f = [m[u, a] - m[a, a] for u in range(k)]
            far_d = max(dist[a])
            far = [f[u] for u in range(k) if dist[a, u] == far_d]
            mean = sum(f) / k
            out[idx[a]] = (
                min(f),
                max(f),
                mean,
                math.sqrt(sum((x - mean) ** 2 for x in f) / k),
                sum(abs(x) for x in f) / k,
                sum(far) / len(far),
                m[a, a],
            )
    return out


# --- neural oracles ------------------------------------------------------------


def _leaky(x):
    return x if x > 0 else LEAK * x


def scalar_mlp(block, x):
    """Row-by-row, scalar-by-scalar forward of an MlpBlock."""
    rows = []
    for row in np.asarray(x, dtype=float):
        h = list(row)
        if block.proj is not None:
            h = [sum(h[i] * block.proj[i, j] for i in range(len(h))) for j in range(block.proj.shape[1])]
        for w, b in zip(block.weights, block.biases):
            d = len(h)
            z = [sum(h[i] * w[i, j] for i in range(d)) + b[j] + h[j] for j in range(d)]
            mu = sum(z) / d
            var = sum((v - mu) ** 2 for v in z) / d
            h = [_leaky((v - mu) / math.sqrt(var + EPS)) for v in z]
        rows.append(h)
    return np.array(rows)


def dense_forward(model, bundle):
    """Re-implementation of the per-bundle forward pass from block parameters only."""

    def block(blk, x):
        h = x @ blk.proj if blk.proj is not None else x
        for w, b in zip(blk.weights, blk.biases):
            z = h @ w + b + h
            z = (z - z.mean(1, keepdims=True)) / np.sqrt(z.var(1, keepdims=True) + EPS)
            h = np.maximum(z, 0) + LEAK * np.minimum(z, 0)
        return h

    pooled = []
    for r in range(model.max_rank + 1):
        parts = [block(model.embed[r], bundle.init[r])]
        for tag in model.channels:
            if (r, tag) in model.proj:
                parts.append(block(model.proj[(r, tag)], bundle.features[(r, tag)]))
        h = block(model.mix[r], np.hstack(parts))
        pooled.append(h.mean(axis=0) if h.shape[0] else np.zeros(model.hidden))
    g = block(model.readout, np.concatenate(pooled)[None, :])
    return (g @ model.head_w + model.head_b)[0]


def lap_subspace_error(adj, vecs, vals, cluster_tol=1e-6):
    """Largest deviation between the returned eigenvectors and the oracle eigenspaces.

    Columns must lie in the span of the oracle eigenvectors of their eigenvalue
    cluster; clusters returned in full must span exactly that eigenspace.
    """
    lap = dense_laplacian(adj)
    w, v = scipy.linalg.eig(lap)
    w, v = np.real(w), np.real(v)
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    worst = 0.0
    kept = [j for j in range(vecs.shape[1]) if not np.isnan(vals[j])]
    for j in kept:
        members = np.abs(w - vals[j]) < cluster_tol
        q, _ = np.linalg.qr(v[:, members])
        col = vecs[:, j]
        worst = max(worst, np.linalg.norm(col - q @ (q.T @ col)))
        cluster_in_output = [k for k in kept if abs(vals[k] - vals[j]) < cluster_tol]
        if len(cluster_in_output) == members.sum():
            mine = vecs[:, cluster_in_output]
            worst = max(worst, np.abs(mine @ mine.T - q @ q.T).max())
    return worst
