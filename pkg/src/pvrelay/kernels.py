"""Hot numeric kernels.

Every kernel exists twice: a loop form compiled with numba and a vectorised
numpy form.  The module-level names (``ed_trace``, ``build_tree``, ...) are
bound to the numba form unless ``PVRELAY_DISABLE_NUMBA`` is set or numba is
missing.  Both forms evaluate the same floating-point expressions in the same
order wherever that matters for reproducibility (tree growth, fuzzy
centroids), so models trained under either path are identical.
"""
import numpy as np

from ._jit import USE_NUMBA, HAVE_NUMBA, njit

__all__ = [
    "USE_NUMBA",
    "ed_trace",
    "build_tree",
    "tree_apply",
    "fuzzy_infer_batch",
    "ct_flux_limit",
    "NUMPY_KERNELS",
    "NUMBA_KERNELS",
]


# ---------------------------------------------------------------------------
# event detector


def _ed_trace_loop(abs_x, m):
    n = abs_x.shape[0]
    # direct (not rolling) window sums keep periodic input exactly periodic
    sums = np.empty(n - m + 1)
    for s in range(n - m + 1):
        acc = 0.0
        for j in range(s, s + m):
            acc += abs_x[j]
        sums[s] = acc
    out = np.zeros(n - 2 * m + 1)
    for i in range(n - 2 * m + 1):
        cur = sums[i + m]
        if cur != 0.0:
            out[i] = (cur - sums[i]) / cur
    return out


def ed_trace_numpy(abs_x, m):
    abs_x = np.asarray(abs_x, dtype=np.float64)
    sums = np.lib.stride_tricks.sliding_window_view(abs_x, m).sum(axis=1)
    cur = sums[m:]
    prev = sums[:-m]
    out = np.zeros(cur.shape[0])
    nz = cur != 0.0
    out[nz] = (cur[nz] - prev[nz]) / cur[nz]
    return out


# ---------------------------------------------------------------------------
# CART tree growth


def _build_tree_loop(X, y, n_classes, max_depth, min_samples_split, k_feats, keys):
    n, d = X.shape
    max_nodes = 2 * n - 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    counts = np.zeros((max_nodes, n_classes), dtype=np.int64)
    wdelta = np.zeros(max_nodes)

    idx = np.arange(n)
    buf = np.empty(n, dtype=np.int64)
    st_node = np.empty(max_nodes, dtype=np.int64)
    st_start = np.empty(max_nodes, dtype=np.int64)
    st_end = np.empty(max_nodes, dtype=np.int64)
    st_depth = np.empty(max_nodes, dtype=np.int64)
    top = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    top = 1
    n_nodes = 1
    lc = np.zeros(n_classes, dtype=np.int64)

    while top > 0:
        top -= 1
        node = st_node[top]
        s = st_start[top]
        e = st_end[top]
        depth = st_depth[top]
        nn = e - s
        for i in range(s, e):
            counts[node, y[idx[i]]] += 1
        acc = 0.0
        for c in range(n_classes):
            p = counts[node, c] / nn
            acc += p * p
        g = 1.0 - acc
        if (max_depth >= 0 and depth >= max_depth) or nn < min_samples_split or g == 0.0:
            continue

        feats = np.sort(np.argsort(keys[node], kind="mergesort")[:k_feats])
        best = 0.0
        best_f = -1
        best_thr = 0.0
        for f in feats:
            vals = np.empty(nn)
            for i in range(nn):
                vals[i] = X[idx[s + i], f]
            order = np.argsort(vals, kind="mergesort")
            for c in range(n_classes):
                lc[c] = 0
            for i in range(nn - 1):
                lc[y[idx[s + order[i]]]] += 1
                a = vals[order[i]]
                b = vals[order[i + 1]]
                if not a < b:
                    continue
                nl = i + 1
                nr = nn - nl
                sl = 0.0
                sr = 0.0
                for c in range(n_classes):
                    pl = lc[c] / nl
                    sl += pl * pl
                    pr = (counts[node, c] - lc[c]) / nr
                    sr += pr * pr
                gl = 1.0 - sl
                gr = 1.0 - sr
                delta = g - (nl / nn) * gl - (nr / nn) * gr
                if delta > best:
                    best = delta
                    best_f = f
                    mid = (a + b) / 2.0
                    if mid >= b or mid < a:
                        mid = a
                    best_thr = mid
        if best_f < 0:
            continue

        nl = 0
        for i in range(s, e):
            if X[idx[i], best_f] <= best_thr:
                buf[nl] = idx[i]
                nl += 1
        k = nl
        for i in range(s, e):
            if not X[idx[i], best_f] <= best_thr:
                buf[k] = idx[i]
                k += 1
        for i in range(nn):
            idx[s + i] = buf[i]

        feature[node] = best_f
        threshold[node] = best_thr
        wdelta[node] = (nn / n) * best
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        st_node[top] = rnode
        st_start[top] = s + nl
        st_end[top] = e
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lnode
        st_start[top] = s
        st_end[top] = s + nl
        st_depth[top] = depth + 1
        top += 1

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], counts[:n_nodes], wdelta[:n_nodes])


def build_tree_numpy(X, y, n_classes, max_depth, min_samples_split, k_feats, keys):
    n, d = X.shape
    max_nodes = 2 * n - 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    counts = np.zeros((max_nodes, n_classes), dtype=np.int64)
    wdelta = np.zeros(max_nodes)
    eye = np.eye(n_classes, dtype=np.int64)

    idx = np.arange(n)
    stack = [(0, 0, n, 0)]
    n_nodes = 1
    while stack:
        node, s, e, depth = stack.pop()
        nn = e - s
        members = idx[s:e]
        counts[node] = np.bincount(y[members], minlength=n_classes)
        acc = 0.0
        for c in range(n_classes):
            p = counts[node, c] / nn
            acc += p * p
        g = 1.0 - acc
        if (max_depth >= 0 and depth >= max_depth) or nn < min_samples_split or g == 0.0:
            continue

        feats = np.sort(np.argsort(keys[node], kind="mergesort")[:k_feats])
        best = 0.0
        best_f = -1
        best_thr = 0.0
        nl = np.arange(1, nn)
        nr = nn - nl
        for f in feats:
            vals = X[members, f]
            order = np.argsort(vals, kind="mergesort")
            sv = vals[order]
            lc = np.cumsum(eye[y[members[order]]], axis=0)[:-1]
            rc = counts[node] - lc
            sl = np.zeros(nn - 1)
            sr = np.zeros(nn - 1)
            for c in range(n_classes):
                pl = lc[:, c] / nl
                sl = sl + pl * pl
                pr = rc[:, c] / nr
                sr = sr + pr * pr
            delta = g - (nl / nn) * (1.0 - sl) - (nr / nn) * (1.0 - sr)
            valid = sv[:-1] < sv[1:]
            if not valid.any():
                continue
            delta = np.where(valid, delta, -np.inf)
            i = int(np.argmax(delta))
            if delta[i] > best:
                best = float(delta[i])
                best_f = int(f)
                a, b = sv[i], sv[i + 1]
                mid = (a + b) / 2.0
                if mid >= b or mid < a:
                    mid = a
                best_thr = float(mid)
        if best_f < 0:
            continue

        go_left = X[members, best_f] <= best_thr
        n_left = int(go_left.sum())
        idx[s:e] = np.concatenate([members[go_left], members[~go_left]])
        feature[node] = best_f
        threshold[node] = best_thr
        wdelta[node] = (nn / n) * best
        lnode, rnode = n_nodes, n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        stack.append((rnode, s + n_left, e, depth + 1))
        stack.append((lnode, s, s + n_left, depth + 1))

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], counts[:n_nodes], wdelta[:n_nodes])


def _tree_apply_loop(feature, threshold, left, right, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def tree_apply_numpy(feature, threshold, left, right, X):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    active = feature[node] >= 0
    while active.any():
        r = rows[active]
        nd = node[r]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return node


# ---------------------------------------------------------------------------
# Mamdani inference


def _trap_scalar(x, a, b, c, d):
    if x < a or x > d:
        return 0.0
    if x < b:
        return (x - a) / (b - a)
    if x <= c:
        return 1.0
    return (d - x) / (d - c)


def trap_numpy(x, a, b, c, d):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros(x.shape)
    rise = (x >= a) & (x < b)
    flat = (x >= b) & (x <= c)
    fall = (x > c) & (x <= d)
    if b > a:
        out = np.where(rise, (x - a) / (b - a), out)
    out = np.where(flat, 1.0, out)
    if d > c:
        out = np.where(fall, (d - x) / (d - c), out)
    return out


def _fuzzy_loop(inputs, in_params, in_nsets, rule_ante, rule_cons, out_mu, grid):
    n, n_vars = inputs.shape
    n_rules = rule_ante.shape[0]
    n_out, n_grid = out_mu.shape
    max_sets = in_params.shape[1]
    res = np.empty(n)
    mu = np.zeros((n_vars, max_sets))
    act = np.zeros(n_out)
    for i in range(n):
        for v in range(n_vars):
            for s in range(in_nsets[v]):
                mu[v, s] = _trap_jit(inputs[i, v], in_params[v, s, 0], in_params[v, s, 1],
                                     in_params[v, s, 2], in_params[v, s, 3])
        for o in range(n_out):
            act[o] = 0.0
        for r in range(n_rules):
            w = 1.0
            for v in range(n_vars):
                lab = rule_ante[r, v]
                if lab >= 0:
                    m = mu[v, lab]
                    if m < w:
                        w = m
            o = rule_cons[r]
            if w > act[o]:
                act[o] = w
        num = 0.0
        den = 0.0
        for g in range(n_grid):
            agg = 0.0
            for o in range(n_out):
                m = out_mu[o, g]
                if act[o] < m:
                    m = act[o]
                if m > agg:
                    agg = m
            num += agg * grid[g]
            den += agg
        res[i] = num / den if den > 0.0 else 0.5
    return res


def fuzzy_infer_numpy(inputs, in_params, in_nsets, rule_ante, rule_cons, out_mu, grid):
    n, n_vars = inputs.shape
    mu = {}
    for v in range(n_vars):
        for s in range(int(in_nsets[v])):
            a, b, c, d = in_params[v, s]
            mu[v, s] = trap_numpy(inputs[:, v], a, b, c, d)
    n_out, n_grid = out_mu.shape
    act = [np.zeros(n) for _ in range(n_out)]
    for r in range(rule_ante.shape[0]):
        w = np.ones(n)
        for v in range(n_vars):
            lab = rule_ante[r, v]
            if lab >= 0:
                w = np.minimum(w, mu[v, int(lab)])
        o = int(rule_cons[r])
        act[o] = np.maximum(act[o], w)
    num = np.zeros(n)
    den = np.zeros(n)
    for g in range(n_grid):
        agg = np.zeros(n)
        for o in range(n_out):
            agg = np.maximum(agg, np.minimum(act[o], out_mu[o, g]))
        num = num + agg * grid[g]
        den = den + agg
    res = np.full(n, 0.5)
    nz = den > 0.0
    res[nz] = num[nz] / den[nz]
    return res


# ---------------------------------------------------------------------------
# CT core flux limit


def _ct_loop(current, dt, burden, knee, flux0):
    n = current.shape[0]
    out = np.empty(n)
    lam = flux0
    for i in range(n):
        cand = lam + burden * current[i] * dt
        if cand > knee:
            lam = knee
            out[i] = 0.0
        elif cand < -knee:
            lam = -knee
            out[i] = 0.0
        else:
            lam = cand
            out[i] = current[i]
    return out


def ct_flux_limit_numpy(current, dt, burden, knee, flux0):
    # sequential by nature; plain loop over a list is the fallback
    lam = float(flux0)
    vals = np.asarray(current, dtype=np.float64).tolist()
    out = [0.0] * len(vals)
    for i, v in enumerate(vals):
        cand = lam + burden * v * dt
        if cand > knee:
            lam = knee
        elif cand < -knee:
            lam = -knee
        else:
            lam = cand
            out[i] = v
    return np.array(out)


# ---------------------------------------------------------------------------
# binding

if HAVE_NUMBA:
    _trap_jit = njit(_trap_scalar)
    ed_trace_numba = njit(_ed_trace_loop)
    build_tree_numba = njit(_build_tree_loop)
    tree_apply_numba = njit(_tree_apply_loop)
    fuzzy_infer_numba = njit(_fuzzy_loop)
    ct_flux_limit_numba = njit(_ct_loop)
    NUMBA_KERNELS = {
        "ed_trace": ed_trace_numba,
        "build_tree": build_tree_numba,
        "tree_apply": tree_apply_numba,
        "fuzzy_infer_batch": fuzzy_infer_numba,
        "ct_flux_limit": ct_flux_limit_numba,
    }
else:  # pragma: no cover
    _trap_jit = _trap_scalar
    NUMBA_KERNELS = {}

NUMPY_KERNELS = {
    "ed_trace": ed_trace_numpy,
    "build_tree": build_tree_numpy,
    "tree_apply": tree_apply_numpy,
    "fuzzy_infer_batch": fuzzy_infer_numpy,
    "ct_flux_limit": ct_flux_limit_numpy,
}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

ed_trace = _ACTIVE["ed_trace"]
build_tree = _ACTIVE["build_tree"]
tree_apply = _ACTIVE["tree_apply"]
fuzzy_infer_batch = _ACTIVE["fuzzy_infer_batch"]
ct_flux_limit = _ACTIVE["ct_flux_limit"]
