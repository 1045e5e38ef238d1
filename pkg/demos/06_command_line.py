# coding: utf-8

# # The command line
#
# The same computations from a shell; every command prints one JSON report.

# In[1]:

import json
import subprocess
import sys


def run(*args):
    out = subprocess.run([sys.executable, "-m", "falsetheta", *args], capture_output=True, text=True)
    return out.returncode, out.stdout.strip() or out.stderr.strip()


print(run("eval", "--what", "F1", "--p", "2", "--tau", "0.0+1.0i"))
print(run("eval", "--what", "K", "--cusp", "1/2"))


# Exact identities report a certificate; bad input exits with code 2.

# In[2]:

code, text = run("verify", "--identity", "sums", "--h", "1", "--k", "3", "--p", "2")
print(code, json.loads(text)["params"]["certificate"])
print(run("eval", "--what", "F1", "--p", "1", "--tau", "1i"))


# Coefficient tables as CSV.

# In[3]:

print(run("asympt", "--which", "F1", "--cusp", "1/3", "--p", "2", "--order", "3", "--format", "csv")[1])
