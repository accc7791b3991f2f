"""
Kernels and finite-rank feature maps
====================================

A finite-rank kernel built from a cosine basis has an explicit feature map,
so its Gram matrix can be checked against the feature product directly.
"""

# %%
import numpy as np

from gpucb import gram, matern, mercer_synthetic, squared_exponential

k, fmap = mercer_synthetic(rank=6, C=1.0, beta=2.0)
print("eigenvalues:", np.round(fmap.eigenvalues, 4))
print("sup |k| bound L =", round(k.L, 4), " eigenfunction bound B =", round(k.B, 4))

# %%
# The Gram matrix equals E E^T where E stacks the embedded points.
X = np.random.default_rng(0).uniform(0, 1, 20)
E = fmap.embed(X)
print("max |K - E E^T| =", np.abs(gram(k, X) - E @ E.T).max())

# %%
# Matérn kernels use closed forms for nu in {1/2, 3/2, 5/2}.
r = np.array([0.0, 0.1, 0.2, 0.5])
for nu in (0.5, 1.5, 2.5):
    print(f"Matern nu={nu}:", np.round(gram(matern(nu, 0.2), r)[0], 4))
print("squared exponential:", np.round(gram(squared_exponential(0.2), r)[0], 4))
