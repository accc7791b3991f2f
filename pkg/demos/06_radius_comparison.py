"""
Comparing confidence radii
==========================

On one trajectory, the regularised radius shrinks as rho grows while the
eta-parameterised comparison radius grows with eta. They meet at rho = 1,
eta -> 0.
"""

# %%
from gpucb.experiments import load_config, radius_compare

cfg = load_config({"kind": "radius_compare", "kernel": {"family": "matern", "nu": 2.5, "bandwidth": 0.1},
                   "T": 40, "design": "fixed"})
rows, report = radius_compare(cfg)
for t, rule, param, stat, radius in rows:
    if t == 40:
        print(f"{rule:9s} {param:8.1e}  stat={stat:.4f}  radius={radius:.4f}")
print(report.summary_line())
