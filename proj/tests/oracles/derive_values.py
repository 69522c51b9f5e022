"""Independent numpy oracles for the constants frozen into the unit tests.

Run: python3 tests/oracles/derive_values.py
"""
import itertools
import math

import numpy as np


def brute_ap(labels, scores):
    # average precision over distinct thresholds, ties grouped
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    P = labels.sum()
    ap, prev_recall = 0.0, 0.0
    for t in sorted(set(scores), reverse=True):
        flagged = scores >= t
        tp = (labels[flagged] == 1).sum()
        recall = tp / P
        ap += (recall - prev_recall) * tp / flagged.sum()
        prev_recall = recall
    return ap


def brute_auc(labels, scores):
    pos = [s for l, s in zip(labels, scores) if l == 1]
    neg = [s for l, s in zip(labels, scores) if l == 0]
    tot = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return tot / (len(pos) * len(neg))


def section(name):
    print(f"\n# {name}")


section("metrics hand example")
print("ap", repr(brute_ap([1, 0, 1, 0], [0.9, 0.8, 0.7, 0.1])))
print("auc", repr(brute_auc([1, 0, 1, 0], [0.9, 0.8, 0.7, 0.1])))
print("ap all ties prevalence 3/7", repr(brute_ap([1, 0, 1, 0, 0, 1, 0], [0.5] * 7)))

section("segment softmax [1, 2]")
w = np.exp([1.0, 2.0])
print(repr((w / w.sum()).tolist()))

section("class weights 10 illicit + 90 licit")
print(repr(100 / (2 * 10)), repr(100 / (2 * 90)))

section("weighted CE, labels [0,1,1] (0 = illicit), weights (2, 1)")
logits = np.array([[1.0, 0.0], [0.5, 2.0], [-1.0, 0.3]])
labels = np.array([0, 1, 1])
wts = np.array([2.0, 1.0])
ls = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
per = np.array([ls[i, labels[i]] for i in range(3)])
wi = wts[labels]
print(repr(float(-(wi * per).sum() / wi.sum())))

section("adam, p=1, g=1, lr=0.1, wd=0")
def adam(p, grads, lr, wd, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    for t, g in enumerate(grads, start=1):
        g = g + wd * p
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1**t)
        vh = v / (1 - b2**t)
        p = p - lr * mh / (math.sqrt(vh) + eps)
    return p
print("one step", repr(adam(1.0, [1.0], 0.1, 0.0)))
print("two steps g=0.3 lr=0.01 wd=0.1 from 0.5", repr(adam(0.5, [0.3, 0.3], 0.01, 0.1)))

section("gcn 2-node single edge, h=[1,3], W=1")
A = np.array([[1.0, 1.0], [1.0, 1.0]])  # with self loops
d = A.sum(1)
C = A / np.sqrt(np.outer(d, d))
print(repr((C @ np.array([1.0, 3.0])).tolist()))

section("sage path 0-1-2, h=[1,5,3]")
h = np.array([1.0, 5.0, 3.0])
nbrs = [[1], [0, 2], [1]]
print("mean", [float(np.mean(h[n])) for n in nbrs])
print("max", [float(np.max(h[n])) for n in nbrs])

section("gat 3-node star (centre 0), h=[1,2,3], W=2, a_src=0.5, a_dst=-1, slope 0.2")
h = np.array([1.0, 2.0, 3.0])
z = 2.0 * h
nb = [[0, 1, 2], [0, 1], [0, 2]]  # self loops included, sorted
out = []
for i, N in enumerate(nb):
    e = np.array([0.5 * z[i] + (-1.0) * z[j] for j in N])
    e = np.where(e > 0, e, 0.2 * e)
    a = np.exp(e - e.max())
    a /= a.sum()
    out.append(float((a * z[N]).sum()))
print(repr(out))

section("graphnorm 5x3, alpha=0.5, gamma=2, beta=1, eps=1e-5")
H = np.array([[0.3, -1.2, 2.0], [1.1, 0.4, -0.5], [-0.7, 2.2, 0.9], [0.05, -0.3, 1.7], [1.9, 0.8, -1.1]])
mu = H.mean(0)
c = H - 0.5 * mu
sig = np.sqrt((c**2).mean(0) + 1e-5)
G = 2.0 * c / sig + 1.0
print(repr(G.flatten().tolist()))

section("init bounds")
print("xavier (100,200)", repr(math.sqrt(6 / 300)))
print("kaiming fan_in 3", repr(math.sqrt(6 / 3)))
print("fan-in uniform 100", repr(1 / math.sqrt(100)))
print("xavier var (500,500)", repr(2 / 1000), "kaiming var fan_in 500", repr(2 / 500))

section("log-uniform median")
print(repr(math.sqrt(2e-6 * 1e-3)))

section("percentile (linear) of 1..100 / 100 at 90, 99, 99.9")
x = np.arange(1, 101) / 100
print([repr(float(np.percentile(x, p))) for p in (90, 99, 99.9)])

section("synth counts 500 nodes")
print("illicit", round(0.02 * 500), "unknown", round(0.77 * 500))

section("halving survivors 8 keep 0.5")
n, s = 8, [8]
for _ in range(3):
    n = max(1, math.ceil(0.5 * n))
    s.append(n)
print(s)
