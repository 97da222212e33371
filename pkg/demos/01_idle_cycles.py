"""
Counting pipeline stalls of a layer schedule
============================================

A layered decoder reads each variable's soft value, updates it, and writes it
back ``t`` cycles later. When the next layer needs a variable that is still in
flight, the pipeline stalls. This script counts those idle cycles on a tiny
four-layer code and on the 5G NR base graph 1.
"""

from fractions import Fraction

import numpy as np

from qcsched.idle import idle_matrix, n_idle_cyclic, n_idle_linear, transition_idles
from qcsched.ldpc import data_path, layer_stats, load_base_graph, nr_base_graph, select_rate

# the toy code: four layers of degree 4 arranged in a ring
toy = load_base_graph(data_path("toy4.txt"))
stats = layer_stats(toy)
print("degrees   ", stats.degrees)
print("punctures ", stats.punctures)
print("common-degree table\n", stats.common)

# idle cycles of every ordered transition for a latency of 3 cycles
t = 3
print("pair idle counts, t=3\n", idle_matrix(stats, t))

# natural order vs one that alternates disjoint layers
for order in ([0, 1, 2, 3], [1, 2, 0, 3]):
    per = transition_idles(stats, t, order)
    print(order, "per transition (wrap first):", per.tolist(),
          "cyclic:", n_idle_cyclic(stats, t, order), "linear:", n_idle_linear(stats, t, order))

# the same count on BG1 truncated to rate 1/2 (24 layers)
bg1 = select_rate(nr_base_graph("bg1", 384), Fraction(1, 2))
stats = layer_stats(bg1)
natural = np.arange(stats.size)
for t in (4, 9):
    print(f"BG1 R=1/2 t={t}: natural order stalls {n_idle_cyclic(stats, t, natural)} cycles per iteration")
