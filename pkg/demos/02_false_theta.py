# coding: utf-8

# # The false theta function and its pieces
#
# F is a sum over pairs of positive integers. It splits into F1 and F2 evaluated at p tau.

# In[1]:

from falsetheta import qseries as qs

tau = 0.1 + 0.3j
for p in (2, 3, 5):
    F = qs.eval_F(tau, p)
    split = (2 / p) * qs.eval_F1(p * tau, p) + 2 * qs.eval_F2(p * tau, p)
    print(p, F, abs(F - split))


# For p = 2 the weighted shift set contains a repeated shift with opposite weights,
# and F2 vanishes identically.

# In[2]:

print(abs(qs.eval_F2(0.37 + 0.2j, 2)))


# Radial limits: tau = h/k + i t / 2 pi. Near the cusp 1/3, F1 settles to a finite value.

# In[3]:

for t in (0.1, 0.03, 0.01, 0.003):
    print(t, qs.eval_F1(qs.radial_tau(1, 3, t), 2))


# Kontsevich's function is a finite sum at roots of unity.

# In[4]:

print([round(qs.kontsevich_K(1, k).real, 12) for k in range(1, 6)])
