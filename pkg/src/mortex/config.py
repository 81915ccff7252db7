"""Strict line-oriented run configuration.

Format::

    # comment
    run.dual = cgi
    run.kappa = auto
    domain.host.generator = structured
    domain.host.extents = [0, 0, 5, 1.25]
    domain.host.cells = [17, 4]
    domain.patch.mesh = patch.msh
    domain.patch.host = host
    tying.t1.patch = patch
    tying.t1.polyline = bottom
    bc.fix.kind = dirichlet_component
    ...

Unknown sections or keys are errors, reported with their line number.
A ``bench.*`` section instead describes a sweep over one of the built-in
benchmarks.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from .elasticity import Material
from .errors import ConfigError
from .mesh import (Q4, T3, Mesh, generate_disk_mesh, generate_ogrid_mesh, read_mesh,
                   structured_mesh)
from .model import SCHEMES, Domain, Problem, Tying, _host_order
from .solver import BC_KINDS, BoundaryCondition


# -- value converters ----------------------------------------------------------

def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _items(s: str) -> List[str]:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"expected a bracketed list, got {s!r}")
    body = s[1:-1].strip()
    return [t.strip() for t in body.split(",")] if body else []


def _list(conv):
    def f(s):
        return [conv(t) for t in _items(s)]
    f.__name__ = f"list of {conv.__name__}"
    return f


def _kappa(s: str):
    s = s.strip()
    if s == "auto":
        return "auto"
    k = int(s)
    if k < 1:
        raise ValueError("kappa must be >= 1")
    return k


def _choice(*options):
    def f(s):
        s = s.strip()
        if s not in options:
            raise ValueError(f"expected one of {options}, got {s!r}")
        return s
    f.__name__ = "choice"
    return f


def _str(s: str) -> str:
    return s.strip()


_RUN_KEYS: Dict[str, Callable] = {
    "dual": _choice(*SCHEMES), "kappa": _kappa, "triangulate": _bool,
    "local_kappa": _bool, "output": _str, "name": _str, "cell_rule": _choice("parent", "physical"),
}
_DOMAIN_KEYS: Dict[str, Callable] = {
    "mesh": _str, "generator": _choice("structured", "disk", "ogrid"), "host": _str,
    "E": float, "nu": float, "formulation": _choice("plane_strain", "plane_stress"),
    "extents": _list(float), "cells": _list(int), "kind": _choice(Q4, T3),
    "distortion": float, "seed": int, "radius": float, "n_boundary": int,
    "center": _list(float), "half_side": float, "n_rad": int,
}
_TYING_KEYS: Dict[str, Callable] = {"patch": _str, "polyline": _str, "center": _list(float)}
_BC_KEYS: Dict[str, Callable] = {
    "kind": _choice(*BC_KINDS), "domain": _str, "target": _str, "component": int,
    "value": float, "gradient": _list(float), "vector": _list(float),
}
_BENCH_KEYS: Dict[str, Callable] = {
    "kind": _choice("patch_test", "eshelby", "convergence", "example"),
    "case": _list(int), "load": _list(_choice("compression", "bending")),
    "host": _list(_choice("triangles", "aligned", "distorted")),
    "triangulate": _list(_bool), "contrast": _list(float), "schemes": _list(_choice(*SCHEMES)),
    "kappa": _list(_kappa), "n_mortar": _list(int), "mesh_contrast": float,
    "distortion": float, "seed": int, "name": _list(_str), "local_kappa": _bool,
}


@dataclass
class RunConfig:
    run: Dict[str, Any] = field(default_factory=dict)
    domains: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    tyings: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    bcs: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    bench: Dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")
    lines: Dict[Tuple[str, ...], int] = field(default_factory=dict)

    @property
    def dual(self) -> str:
        return self.run["dual"]

    @property
    def kappa(self):
        return self.run["kappa"]

    @property
    def triangulate(self) -> bool:
        return self.run["triangulate"]

    def host_order(self) -> List[str]:
        """Host before patch; raises on unknown hosts or cycles."""
        class _D:
            def __init__(self, host):
                self.host = host
        for name, d in self.domains.items():
            h = d.get("host")
            if h is not None and h not in self.domains:
                raise ConfigError(f"line {self.lines[('domain', name, 'host')]}: "
                                  f"domain {name!r} embedded in unknown domain {h!r}")
        return _host_order({n: _D(d.get("host")) for n, d in self.domains.items()})


_LINE = re.compile(r"^([A-Za-z_][\w-]*(?:\.[A-Za-z_0-9][\w-]*)+)\s*=\s*(.*)$")

_DEFAULT_RUN = {"dual": "sli-p1", "kappa": "auto", "triangulate": False, "local_kappa": False,
                "output": "out", "name": "run", "cell_rule": "physical"}


def parse_config(text: str, base_dir=".", check_files: bool = True) -> RunConfig:
    cfg = RunConfig(base_dir=Path(base_dir))
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ConfigError(f"line {ln}: expected 'section.key = value', got {raw.strip()!r}")
        parts, value = m.group(1).split("."), m.group(2).strip()
        section = parts[0]
        if section in ("run", "bench"):
            if len(parts) != 2:
                raise ConfigError(f"line {ln}: '{section}' keys take the form {section}.key")
            table = _RUN_KEYS if section == "run" else _BENCH_KEYS
            target = cfg.run if section == "run" else cfg.bench
            key = parts[1]
        elif section in ("domain", "tying", "bc"):
            if len(parts) != 3:
                raise ConfigError(f"line {ln}: '{section}' keys take the form {section}.<name>.key")
            table = {"domain": _DOMAIN_KEYS, "tying": _TYING_KEYS, "bc": _BC_KEYS}[section]
            store = {"domain": cfg.domains, "tying": cfg.tyings, "bc": cfg.bcs}[section]
            target = store.setdefault(parts[1], {})
            key = parts[2]
        else:
            raise ConfigError(f"line {ln}: unknown section {section!r}")
        if key not in table:
            raise ConfigError(f"line {ln}: unknown key {m.group(1)!r}")
        if key in target:
            raise ConfigError(f"line {ln}: duplicate key {m.group(1)!r}")
        try:
            target[key] = table[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {ln}: bad value for {m.group(1)!r}: {exc}") from None
        cfg.lines[tuple(parts)] = ln
    for k, v in _DEFAULT_RUN.items():
        cfg.run.setdefault(k, v)
    _validate(cfg, check_files)
    return cfg


def load_config(path, check_files: bool = True) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    return parse_config(p.read_text(), p.parent, check_files)


def _where(cfg: RunConfig, *key) -> str:
    ln = cfg.lines.get(tuple(key))
    return f"line {ln}: " if ln else ""


def _validate(cfg: RunConfig, check_files: bool) -> None:
    if cfg.bench and (cfg.domains or cfg.tyings or cfg.bcs):
        raise ConfigError("a bench configuration cannot also define domains, tyings or bcs")
    if cfg.bench:
        if "kind" not in cfg.bench:
            raise ConfigError("bench.kind is required")
        return
    if not cfg.domains:
        raise ConfigError("no domain defined")
    for name, d in cfg.domains.items():
        if ("mesh" in d) == ("generator" in d):
            raise ConfigError(f"domain {name!r} needs exactly one of 'mesh' or 'generator'")
        for req in ("E", "nu"):
            if req not in d:
                raise ConfigError(f"domain {name!r} is missing {req!r}")
        if "mesh" in d and check_files and not (cfg.base_dir / d["mesh"]).is_file():
            raise ConfigError(f"{_where(cfg, 'domain', name, 'mesh')}mesh file not found: "
                              f"{cfg.base_dir / d['mesh']}")
    cfg.host_order()
    for tid, t in cfg.tyings.items():
        for req in ("patch", "polyline"):
            if req not in t:
                raise ConfigError(f"tying {tid!r} is missing {req!r}")
        if t["patch"] not in cfg.domains:
            raise ConfigError(f"{_where(cfg, 'tying', tid, 'patch')}tying {tid!r} "
                              f"references unknown domain {t['patch']!r}")
        if cfg.domains[t["patch"]].get("host") is None:
            raise ConfigError(f"tying {tid!r}: domain {t['patch']!r} has no host")
    for bid, b in cfg.bcs.items():
        for req in ("kind", "domain", "target"):
            if req not in b:
                raise ConfigError(f"bc {bid!r} is missing {req!r}")
        if b["domain"] not in cfg.domains:
            raise ConfigError(f"{_where(cfg, 'bc', bid, 'domain')}bc {bid!r} "
                              f"references unknown domain {b['domain']!r}")


# -- building ------------------------------------------------------------------

def build_mesh(desc: Dict[str, Any], base_dir=".") -> Mesh:
    if "mesh" in desc:
        return read_mesh(Path(base_dir) / desc["mesh"])
    gen = desc["generator"]
    try:
        if gen == "structured":
            x0, y0, x1, y1 = desc["extents"]
            nx, ny = desc["cells"]
            return structured_mesh(np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1),
                                   desc.get("kind", Q4), desc.get("distortion", 0.0),
                                   desc.get("seed", 0))
        if gen == "disk":
            return generate_disk_mesh(desc["radius"], desc["n_boundary"],
                                      tuple(desc.get("center", (0.0, 0.0))))
        n_side, n_rad = desc["cells"]
        return generate_ogrid_mesh(desc["half_side"], desc["radius"], n_side, n_rad,
                                   tuple(desc.get("center", (0.0, 0.0))))
    except KeyError as exc:
        raise ConfigError(f"generator {gen!r} needs key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"generator {gen!r}: {exc}") from None


def build_problem(cfg: RunConfig) -> Problem:
    domains = []
    for name in cfg.host_order():
        d = cfg.domains[name]
        try:
            mat = Material(d["E"], d["nu"], d.get("formulation", "plane_strain"))
        except ValueError as exc:
            raise ConfigError(f"domain {name!r}: {exc}") from None
        domains.append(Domain(name, build_mesh(d, cfg.base_dir), mat, d.get("host")))
    meshes = {d.name: d.mesh for d in domains}
    tyings = []
    for tid, t in cfg.tyings.items():
        if t["polyline"] not in meshes[t["patch"]].polylines:
            raise ConfigError(f"{_where(cfg, 'tying', tid, 'polyline')}tying {tid!r}: "
                              f"unknown polyline {t['polyline']!r} on {t['patch']!r}")
        tyings.append(Tying(t["patch"], t["polyline"], t.get("center")))
    bcs = []
    for bid, b in cfg.bcs.items():
        bcs.append(BoundaryCondition(b["kind"], b["domain"], b["target"], b.get("component"),
                                     b.get("value", 0.0), tuple(b.get("gradient", (0.0, 0.0))),
                                     tuple(b.get("vector", (0.0, 0.0)))))
    return Problem(domains, tyings, bcs, triangulate=cfg.triangulate,
                   cell_rule=cfg.run["cell_rule"])


def bench_grid(bench: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Cartesian product of the list-valued bench keys."""
    keys = [k for k, v in bench.items() if isinstance(v, list)]
    fixed = {k: v for k, v in bench.items() if k not in keys}
    out = []
    for combo in itertools.product(*(bench[k] for k in keys)):
        d = dict(fixed)
        d.update(zip(keys, combo))
        out.append(d)
    return out
