# coding: utf-8

# # Theta sums and the signature (2,2) completion
#
# The companion E1(tau / p) is also a lattice sum of M2 values, which is the route
# used near the real line.

# In[1]:

import numpy as np

from falsetheta import eichler as E
from falsetheta import thetasum as ts

for tau in (1j, 0.3 + 0.8j):
    a = ts.E1_theta_sum(3, tau)
    b = E.E1_full(3, tau / 3)
    print(tau, a, abs(a - b))


# Doubling the lattice cutoff does not move the value.

# In[2]:

a, info = ts.E1_theta_sum(3, 0.1 + 0.3j, full_output=True)
b, info2 = ts.E1_theta_sum(3, 0.1 + 0.3j, full_output=True, qcut_scale=2.0)
print(info["terms"], info2["terms"], abs(a - b))


# The M2 part of the four-variable theta function factors into the companion times
# a positive definite theta function.

# In[3]:

offsets = ts.admissible_offsets(3, count=3)
for a in offsets:
    print([str(x) for x in a], abs(ts.factorization_residual(a, 1j)))


# The full kernel P is summed two ways.

# In[4]:

spec = ts.IndefThetaSpec("A1", offsets[0], "P")
print(ts.indefinite_theta(spec, 1j), ts.indefinite_theta(spec, 1j, method="structured"))


# The smooth kernel P-hat solves the Vigneras equation; the residual falls off like h^4.

# In[5]:

x = np.array([0.3, -0.2, 0.1, 0.4])
print(ts.vigneras_sweep(0.1, x))
