#!/usr/bin/env python3
"""Log-log convergence plots from convergence.csv (matplotlib)."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = [r for r in csv.DictReader(open(os.path.join(here, "convergence.csv"))) if r["N"] != "slope"]
if not rows:
    sys.exit("no sweep rows")


def seed_means(column):
    acc = defaultdict(list)
    for r in rows:
        value = float(r[column])
        if value == value:
            acc[int(r["N"])].append(value)
    ns = sorted(acc)
    return ns, [sum(acc[n]) / len(acc[n]) for n in ns]


fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for column in ("coupling_mean", "w2_pooled_T", "w2_wninf_T"):
    ns, ys = seed_means(column)
    if ns:
        axes[0].loglog(ns, ys, "o-", label=column)
ns, ys = seed_means("coupling_mean")
if ns:
    axes[0].loglog(ns, [ys[0] * ns[0] / n for n in ns], "k--", label="1/N")
axes[0].set_xlabel("N")
axes[0].legend()
for column in ("dinf_drift", "dinf_noise"):
    ns, ys = seed_means(column)
    if ns:
        axes[1].loglog(ns, ys, "o-", label=column)
axes[1].set_xlabel("N")
axes[1].legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "convergence.png"), dpi=120)
