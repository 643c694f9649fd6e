"""
Row proximal operators
======================

What the two group regularizers do to a single row of weights.
"""

import numpy as np

from autosize import project_l1_ball, prox_l2_row, prox_linf_row

np.set_printoptions(precision=4, suppress=True)

v = np.array([3.0, -1.0, 0.5, -2.5])
print("row v:", v)

# l2: keep the direction, shorten by delta, and stop at the origin
for delta in (0.5, 2.0, 5.0):
    print(f"prox_l2   delta={delta}:", prox_l2_row(v, delta))

# l-inf: lower the largest magnitudes to a common level. The mass cut away
# is delta until the row runs out, then the row is zero.
for delta in (0.5, 2.0, 7.0):
    print(f"prox_linf delta={delta}:", prox_linf_row(v, delta))

# what prox_linf removes is the projection of v onto the l1 ball of radius delta
delta = 2.0
w = prox_linf_row(v, delta)
cut = project_l1_ball(v, delta)
print("w + cut == v:", np.allclose(w + cut, v), " |cut|_1 =", np.abs(cut).sum())

# a row that dies is exactly zero, which is how units get pruned later
print("dead row is all 0.0:", np.all(prox_linf_row(v, 10.0) == 0.0))
