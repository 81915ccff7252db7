"""Legacy-VTK and CSV writers.

Only ASCII legacy VTK is produced; it opens in ParaView and needs no
extra dependency.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .bench import profile_columns, write_profile_csv
from .cut import CutState
from .mesh import Q4, T3, Mesh

Array = np.ndarray

_VTK_CELL = {T3: 5, Q4: 9}

OUTPUT_ENV = "MORTEX_OUTPUT_DIR"


def output_dir(default="out") -> Path:
    """Output directory, overridable through ``MORTEX_OUTPUT_DIR``."""
    p = Path(os.environ.get(OUTPUT_ENV) or default)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _num(v) -> str:
    return f"{float(v):.10e}"


def write_vtk_mesh(path, mesh: Mesh, point_data: Optional[Dict[str, Array]] = None,
                   cell_data: Optional[Dict[str, Array]] = None, title: str = "mortex") -> None:
    """Unstructured grid with scalar/vector point data and scalar cell data.

    Two-component vectors are padded with a zero z component; three-column
    arrays named like stresses are written as three scalars.
    """
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_nodes} double"]
    lines += [f"{_num(x)} {_num(y)} 0" for x, y in mesh.coords]
    n_ent = sum(len(el.nodes) + 1 for el in mesh.elements)
    lines.append(f"CELLS {mesh.n_elements} {n_ent}")
    lines += [" ".join(map(str, (len(el.nodes),) + tuple(el.nodes))) for el in mesh.elements]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += [str(_VTK_CELL[el.kind]) for el in mesh.elements]
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        lines += _data_block(point_data)
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_elements}")
        lines += _data_block(cell_data)
    Path(path).write_text("\n".join(lines) + "\n")


def _data_block(data: Dict[str, Array]):
    out = []
    for name, arr in data.items():
        a = np.nan_to_num(np.asarray(arr, dtype=float))
        if a.ndim == 1:
            out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            out += [_num(v) for v in a]
        elif a.shape[1] == 2:
            out.append(f"VECTORS {name} double")
            out += [f"{_num(x)} {_num(y)} 0" for x, y in a]
        else:
            for k, suffix in enumerate(("xx", "yy", "xy")[:a.shape[1]]):
                out += [f"SCALARS {name}_{suffix} double 1", "LOOKUP_TABLE default"]
                out += [_num(v) for v in a[:, k]]
    return out


def write_result_vtk(result, directory, prefix: str = "") -> list:
    """One ``.vtk`` file per domain with ``u`` and averaged nodal stress."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in result.problem.order:
        mesh, classes, _ = result.problem.computation_mesh(name)
        st = result.stress(name).nodal
        cd = {"element_class": np.asarray(classes, float)} if classes is not None else None
        p = directory / f"{prefix}{name}.vtk"
        write_vtk_mesh(p, mesh, {"u": result.u(name), "stress": st}, cd, title=name)
        paths.append(p)
    return paths


def write_cut_vtk(path, cut: CutState) -> None:
    """Clipped polygons as VTK polygons, tagged with element id and class."""
    pts, polys, elem, cls = [], [], [], []
    for e, plist in sorted(cut.polygons.items()):
        for poly in plist:
            V = np.asarray(poly.vertices, dtype=float)
            polys.append(list(range(len(pts), len(pts) + len(V))))
            pts.extend(V.tolist())
            elem.append(e)
            cls.append(int(cut.classes[e]))
    lines = ["# vtk DataFile Version 3.0", "mortex cut geometry", "ASCII",
             "DATASET POLYDATA", f"POINTS {len(pts)} double"]
    lines += [f"{_num(x)} {_num(y)} 0" for x, y in pts]
    lines.append(f"POLYGONS {len(polys)} {sum(len(p) + 1 for p in polys)}")
    lines += [" ".join(map(str, [len(p)] + p)) for p in polys]
    lines.append(f"CELL_DATA {len(polys)}")
    lines += ["SCALARS element int 1", "LOOKUP_TABLE default"] + [str(e) for e in elem]
    lines += ["SCALARS class int 1", "LOOKUP_TABLE default"] + [str(c) for c in cls]
    Path(path).write_text("\n".join(lines) + "\n")


def write_traction_csv(result, k: int, path, center=None) -> None:
    write_profile_csv(profile_columns(result, k, center), path)


def write_profiles(profiles: Dict[str, Dict[str, Array]], directory, prefix: str = "") -> list:
    directory = Path(directory)
    out = []
    for name, prof in profiles.items():
        p = directory / f"{prefix}{name}.csv"
        write_profile_csv(prof, p)
        out.append(p)
    return out
