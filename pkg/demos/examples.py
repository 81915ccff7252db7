"""Plate with a hole and the nested multi-level model.

Both compare the interface stress smoothness of SLI and CGI.

    python3 demos/examples.py
"""
from mortex.bench import run_multi_level, run_plate_with_hole

plate = run_plate_with_hole(kappa=3)
m = plate.metrics
print("plate with hole, sigma_xx on the top side of the patch against the monolithic mesh")
print(f"  N_m = {m['N_m']:.0f}, m_c = {m['m_c']:.2f}")
print(f"  max deviation: SLI {m['max_dev_sli_p1']:.4f}, CGI(3) {m['max_dev_cgi']:.4f}")

ml = run_multi_level(kappa=4)
m = ml.metrics
print("multi-level model, sigma_yy along the first-quadrant arc of each inclusion")
for name in ("inc3", "inc4"):
    print(f"  {name}: m_c = {m['m_c_' + name]:.2f}, largest node-to-node jump "
          f"SLI {m[f'max_jump_{name}_sli_p1']:.4f}, CGI(4) {m[f'max_jump_{name}_cgi']:.4f}")
