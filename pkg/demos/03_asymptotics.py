# coding: utf-8

# # Expansions at roots of unity
#
# F1(e^{2 pi i h/k - t}) ~ sum a(m) t^m. The coefficients come from Euler-Maclaurin
# expansions of Gaussian lattice sums, and the growing terms cancel because of
# exponential sums that vanish exactly in a cyclotomic field.

# In[1]:

import numpy as np

from falsetheta import asymptotics as asy
from falsetheta import qseries as qs
from falsetheta.qseries import Cusp

cusp = Cusp(1, 3, 2)
series = asy.asympt_F1(cusp, 3)
print(series.coeffs)


# The remainder after three terms shrinks like t^3, once t is small enough.
# The coefficients here grow fast, so at t = 0.1 the fit is still off.

# In[2]:

for tmax in (1e-1, 1e-2):
    t = np.geomspace(1e-3, tmax, 6)
    rem = [abs(qs.eval_F1(qs.radial_tau(1, 3, s), 2) - series(s, upto=2)) for s in t]
    print(tmax, np.polyfit(np.log(t), np.log(rem), 1)[0])


# The cancellation behind it is exact: the sum is the zero element of Z[zeta_N].

# In[3]:

s = asy.gauss_sum_main(cusp)
print(s.N, s.reduced(), s.is_zero())
print(asy.bernoulli_gauss_identity(Cusp(1, 1, 3), 0, "sumsmatch").is_zero())


# The two routes to the coefficients (every shift separately, or the paired shifts) agree.

# In[4]:

c = Cusp(1, 2, 3)
print(np.max(np.abs(np.array(asy.asympt_F2(c, 2).coeffs) - np.array(asy.asympt_F2(c, 2, method="paired").coeffs))))
