# coding: utf-8

# # Double Eichler integrals
#
# Iterated integrals of unary theta functions from -conj(tau) to i oo, their
# modularity defects, and the companions E1, E2 built from them.

# In[1]:

from falsetheta import eichler as E

f12, f13 = E.false_theta_kernel(1, 2), E.false_theta_kernel(1, 3)
tau = 0.3 + 0.8j
print(E.eichler_single(f12, tau), E.eichler_double(f12, f13, tau))


# Shuffle relation: I_{f,g} + I_{g,f} = I_f I_g.

# In[2]:

print(abs(E.shuffle_residual(f12, f13, tau)))


# The companion E1 picks up an explicit error of modularity under Gamma matrices.

# In[3]:

M = E.Mat2Z(1, 0, 24, 1)
print(abs(E.cocycle_residual("E1", M, 2, 1j)))


# Lowering the double integral gives a multiple of the single one.

# In[4]:

print(E.lowering_residual(f12, f12, 1j))
