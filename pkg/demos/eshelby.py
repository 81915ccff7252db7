"""Stiff circular inclusion in a soft plate under remote tension.

The radial interface stress is compared with the closed-form solution on
the right half of the interface, for SLI and for CGI over a range of kappa.

    python3 demos/eshelby.py [N_m]
"""
import sys

from mortex.bench import EshelbyConfig, eshelby_setup

n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
setup = eshelby_setup(EshelbyConfig(n_mortar=n))
print(f"N_m = {setup.n_mortar}, m_c = {setup.mesh_contrast:.2f}")
print(f"SLI-p1     E_r = {setup.run('sli-p1').metrics['E_r']:.3e}")
k = 2
while k <= n // 2:
    print(f"CGI k={k:<4d} E_r = {setup.run('cgi', k).metrics['E_r']:.3e}")
    k *= 2
