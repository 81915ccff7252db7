"""Interpolation order of cut bilinear elements.

A uniformly compressed patch sits on a host whose interface cuts a Q4
across both parent directions.  The bilinear host then carries a
quadratic trace along the cut and the tied interface displacement is no
longer uniform.  Splitting the blending quads into triangles restores
the uniform solution.

    python3 demos/pathology.py
"""
from mortex.bench import run_pathology

for tri in (False, True):
    rep = run_pathology(triangulate=tri)
    label = "triangulated" if tri else "bilinear    "
    print(f"{label}: max |u_y - u_exact| / |u_exact| = {rep.metrics['max_rel_dev']:.3e}")
