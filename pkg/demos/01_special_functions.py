# coding: utf-8

# # Special functions
#
# The error-function family behind the companions: E, M, the incomplete
# gamma values at a = 1/2 and -1/2, and the two-dimensional E2 and M2.

# In[1]:

import math

import numpy as np

from falsetheta import specfun as sf

S3 = math.sqrt(3)


# E(u) is an odd function with E(u) -> sgn(u); M(u) = E(u) - sgn(u) decays like a Gaussian.

# In[2]:

u = np.linspace(-3, 3, 7)
print(np.round(sf.erf_E(u), 6))
print(np.round(sf.mordell_M(u), 8))
print("bound holds:", bool(np.all(np.abs(sf.mordell_M(u)) <= 2 * np.exp(-math.pi * u**2))))


# M2 is computed from a one-dimensional integral over [1, oo). The same value comes
# out of E2, once E2 is integrated as an honest double integral.

# In[3]:

for point in [(0.7, 0.3), (S3 * 0.4, 0.4), (1.5, 0.0)]:
    a = sf.M2(S3, point)
    b = sf.M2_from_E2(S3, point, route="2d")
    print(point, a, abs(a - b))


# Crossing the line u1 = sqrt3 u2 makes M2 jump by M of the other coordinate; the
# starred version picks the right-hand limit.

# In[4]:

x2 = 0.4
jump = sf.M2(S3, (S3 * x2, x2)) - sf.M2_star(S3, (1e-12, x2))
print(jump, sf.mordell_M(2 * x2))


# Bernoulli polynomials are exact rationals.

# In[5]:

from fractions import Fraction

print(sf.bernoulli_poly(5, Fraction(3, 7)), -sf.bernoulli_poly(5, Fraction(4, 7)))
