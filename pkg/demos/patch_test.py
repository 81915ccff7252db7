"""Compression patch test: standard multipliers against coarse-grained ones.

A stiff patch (E = 1000) is tied onto a soft, distorted host (E = 1) and
pressed from the top.  The exact interface stress is the applied pressure,
so any wiggle in the recovered sigma_yy is an artefact of the tying.

    python3 demos/patch_test.py
"""
import numpy as np

from mortex.bench import KAPPA_SWEEP, PatchTestConfig, patch_test_setup

setup = patch_test_setup(PatchTestConfig(case=1, load="compression", host_type="distorted"))
print(f"N_m = {setup.n_mortar}, mesh contrast m_c = {setup.mesh_contrast:.2f}")

sli = setup.run("sli-p1")
print(f"SLI-p1: E_r = {sli.metrics['E_r']:.3e}, max |s_yy - s0| / s0 = {sli.metrics['max_rel_dev']:.3f}")

# coarse-graining: one master multiplier every kappa segments
for k in KAPPA_SWEEP:
    rep = setup.run("cgi", k)
    print(f"CGI kappa = {rep.config['kappa']:4d}: E_r = {rep.metrics['E_r']:.3e}")

# the interface profile, a few nodes from the left end
prof = sli.profiles["interface"]
cgi = setup.run("cgi", 12).profiles["interface"]
print("\n     x    lambda_y SLI   lambda_y CGI(12)")
for i in np.linspace(0, len(prof["x"]) - 1, 8).astype(int):
    print(f"{prof['x'][i]:6.3f}  {prof['lambda_y'][i]:12.4f}  {cgi['lambda_y'][i]:12.4f}")
