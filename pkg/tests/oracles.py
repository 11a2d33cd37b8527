"""Independent reference implementations used by the tests.

Nothing here imports the package.  Each oracle follows the textbook formula
directly (exact rationals, numeric integration, brute-force enumeration) so
it shares no code path with the implementation it checks.
"""
import math
from fractions import Fraction

import numpy as np
from scipy import integrate


def regression_oracle(y):
    """Slope, intercept and r from the normal equations in exact arithmetic.

    Returns floats rounded once from exact rationals; r is the square root of
    the exact r squared with the sign of the covariance.
    """
    ys = [Fraction(float(v)) for v in y]
    n = len(ys)
    xs = [Fraction(i) for i in range(n)]
    sx = sum(xs)
    sy = sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * v for x, v in zip(xs, ys))
    syy = sum(v * v for v in ys)
    den = n * sxx - sx * sx
    cov = n * sxy - sx * sy
    var_y = n * syy - sy * sy
    if var_y == 0:
        return 0.0, float(sy / n), 0.0
    slope = cov / den
    intercept = (sy - slope * sx) / n
    r2 = cov * cov / (den * var_y)
    r = math.copysign(math.sqrt(float(r2)), float(cov)) if cov != 0 else 0.0
    return float(slope), float(intercept), r


def residual_stderr_oracle(y):
    """Standard error of the slope, exact up to the final square root."""
    ys = [Fraction(float(v)) for v in y]
    n = len(ys)
    xs = [Fraction(i) for i in range(n)]
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * v for x, v in zip(xs, ys))
    s = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    b = (sy - s * sx) / n
    ssr = sum((v - (s * x + b)) ** 2 for x, v in zip(xs, ys))
    xbar = sx / n
    sxx_c = sum((x - xbar) ** 2 for x in xs)
    return math.sqrt(float(ssr / (n - 2) / sxx_c)), float(s)


def t_pdf(t, df):
    logc = math.lgamma((df + 1) / 2.0) - math.lgamma(df / 2.0) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - (df + 1) / 2.0 * math.log1p(t * t / df))


def two_sided_p_oracle(t, df):
    """Two-sided Student-t tail by adaptive quadrature of the density."""
    t = abs(t)
    if t < 1.0:
        body, _ = integrate.quad(t_pdf, 0.0, t, args=(df,), epsabs=1e-14, epsrel=1e-13)
        return 1.0 - 2.0 * body
    tail, _ = integrate.quad(t_pdf, t, np.inf, args=(df,), epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * tail


def pearson_oracle(x, y):
    xs = [Fraction(float(v)) for v in x]
    ys = [Fraction(float(v)) for v in y]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = sum((a - mx) ** 2 for a in xs)
    syy = sum((b - my) ** 2 for b in ys)
    if sxx == 0 or syy == 0:
        return 0.0
    return math.copysign(math.sqrt(float(sxy * sxy / (sxx * syy))), float(sxy)) if sxy else 0.0


def gini_oracle(counts):
    total = sum(counts)
    acc = 0.0
    for c in counts:
        p = c / total
        acc += p * p
    return 1.0 - acc


def best_root_split_oracle(X, y, n_classes):
    """Maximum impurity decrease over every feature and every midpoint threshold."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n = X.shape[0]
    parent = [int(np.sum(y == c)) for c in range(n_classes)]
    g = gini_oracle(parent)
    best = 0.0
    for f in range(X.shape[1]):
        values = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(values[:-1], values[1:]):
            thr = (lo + hi) / 2.0
            left = X[:, f] <= thr
            nl = int(left.sum())
            nr = n - nl
            cl = [int(np.sum(y[left] == c)) for c in range(n_classes)]
            cr = [parent[c] - cl[c] for c in range(n_classes)]
            delta = g - (nl / n) * gini_oracle(cl) - (nr / n) * gini_oracle(cr)
            best = max(best, delta)
    return best


def walk_tree(tree, x):
    """Leaf reached by ``x`` following the stored node table in pure Python."""
    node = 0
    while tree.feature[node] >= 0:
        if x[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return node


def forest_vote_oracle(forest, x):
    """Majority vote over the trees, ties to the lowest class index."""
    counts = [0] * len(forest.classes)
    for tree in forest.trees:
        leaf = walk_tree(tree, x)
        leaf_counts = list(tree.counts[leaf])
        counts[leaf_counts.index(max(leaf_counts))] += 1
    winner = counts.index(max(counts))
    return forest.classes[winner], [c / len(forest.trees) for c in counts]


def ed_oracle(samples, m):
    """Cycle-over-cycle fractional increase by explicit summation."""
    a = [abs(float(v)) for v in samples]
    out = []
    for x in range(2 * m - 1, len(a)):
        cur = math.fsum(a[x - m + 1: x + 1])
        prev = math.fsum(a[x - 2 * m + 1: x - m + 1])
        out.append(0.0 if cur == 0 else (cur - prev) / cur)
    return np.array(out)


def grid_argmin(f, lo, hi, step):
    xs = np.arange(lo, hi + step / 2, step)
    vals = np.array([f(x) for x in xs])
    return float(xs[int(np.argmin(vals))])


def trapezoid_oracle(x, a, b, c, d):
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


def thd_oracle(signal, m):
    """Total harmonic distortion of whole cycles from DFT magnitudes."""
    n = (len(signal) // m) * m
    spec = np.abs(np.fft.rfft(np.asarray(signal[:n])))
    cycles = n // m
    fund = spec[cycles]
    harm = spec[2 * cycles::cycles]
    return float(np.sqrt(np.sum(harm ** 2)) / fund)
