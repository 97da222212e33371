"""
Finding low-stall schedules
===========================

Choosing the layer order that minimises idle cycles is an asymmetric
travelling-salesman problem: layers are cities and the stall count of a
transition is the travel cost. This script compares the natural order,
degree order and the two optimised policies on BG1.
"""

import time
from fractions import Fraction

from qcsched.idle import n_idle_cyclic
from qcsched.ldpc import layer_stats, nr_base_graph, select_rate
from qcsched.policies import satisfies_group_order, schedule_idle, schedule_idle_performance, schedule_ld, schedule_natural
from qcsched.tsp import atsp_to_stsp, build_plain_graph, held_karp, solve_exact

bg1 = nr_base_graph("bg1", 384)

# table of cyclic idle counts per policy, two latencies and two rates
print(f"{'rate':>5} {'t':>2} {'natural':>8} {'ld':>5} {'idle':>5} {'idle-perf':>10} {'seconds':>8}")
for rate in (Fraction(1, 3), Fraction(1, 2)):
    stats = layer_stats(select_rate(bg1, rate))
    for t in (4, 9):
        start = time.perf_counter()
        _, plain = schedule_idle(stats, t)
        order, perf = schedule_idle_performance(stats, t)
        elapsed = time.perf_counter() - start
        assert satisfies_group_order(stats, order)
        natural = n_idle_cyclic(stats, t, schedule_natural(stats.size))
        ld = n_idle_cyclic(stats, t, schedule_ld(stats))
        print(f"{str(rate):>5} {t:>2} {natural:>8} {ld:>5} {plain:>5} {perf:>10} {elapsed:>8.1f}")

# the idle-performance schedule keeps layers in (degree, punctures) order
stats = layer_stats(select_rate(bg1, Fraction(1, 2)))
order, _ = schedule_idle_performance(stats, 4)
print("idle-performance order:", order.tolist())
print("degrees along it:     ", stats.degrees[order].tolist())

# small graphs are solved exactly; the symmetric reformulation gives the same optimum
small = stats.subset(range(7))
g = build_plain_graph(small, 9)
sym = atsp_to_stsp(g)
print("exact optimum on 7 layers:", solve_exact(g).weight, "via symmetric form:", held_karp(sym.weight)[1] - sym.offset)
