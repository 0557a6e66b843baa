"""Catalog loading, cached per-group state, and the report-producing tasks."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path

from .grp import FiniteGroup, from_recipe
from .homology import betti_one_certified, euler_characteristic_poset, reduced_homology
from .lattice import (SubgroupLattice, chief_series, enumerate_subgroups, is_solvable,
                      lattice_report, mobius, prob_zeta)
from .pi1 import DEFAULT_TIETZE_BUDGET, certify_simple_connectivity
from .topo import (DEFAULT_SIMPLEX_BUDGET, Poset, coset_poset, crosscut_prime_complex,
                   minimal_cover_skeleton, order_complex)

THREADS_ENV = "COSET_TOPO_THREADS"


@dataclass
class CatalogEntry:
    name: str
    recipe: dict
    path: str = ""


def catalog_dir() -> Path:
    return Path(str(resources.files("coset_topo") / "catalog"))


def load_catalog(directory: str | Path | None = None) -> list[CatalogEntry]:
    """All recipe files (``*.json`` with ``name`` and ``recipe`` fields), sorted by name."""
    directory = Path(directory) if directory is not None else catalog_dir()
    out = []
    for path in sorted(directory.glob("*.json")):
        with open(path) as fh:
            data = json.load(fh)
        if "recipe" in data:
            out.append(CatalogEntry(data.get("name", path.stem), data["recipe"], str(path)))
        else:
            out.append(CatalogEntry(path.stem, data, str(path)))
    return out


def catalog_entry(name: str, directory: str | Path | None = None) -> CatalogEntry:
    for e in load_catalog(directory):
        if e.name == name:
            return e
    raise KeyError(f"no catalog entry named {name!r}")


@dataclass
class GroupContext:
    """A group plus lazily computed lattice data shared across tasks."""

    group: FiniteGroup
    recipe: dict = field(default_factory=dict)

    @classmethod
    def from_recipe(cls, recipe: dict) -> "GroupContext":
        return cls(from_recipe(recipe), recipe)

    @cached_property
    def lattice(self) -> SubgroupLattice:
        return enumerate_subgroups(self.group)

    @cached_property
    def mu(self) -> list[int]:
        return mobius(self.lattice)

    @cached_property
    def coset_poset(self) -> Poset:
        return coset_poset(self.group, self.lattice)

    @cached_property
    def solvable(self) -> bool:
        return is_solvable(self.group)

    def zeta(self, s: int) -> Fraction:
        return prob_zeta(self.lattice, self.mu, s)

    def chi_coset(self) -> int:
        return euler_characteristic_poset(self.coset_poset)


@dataclass
class Budgets:
    simplices: int = DEFAULT_SIMPLEX_BUDGET
    tietze_steps: int = DEFAULT_TIETZE_BUDGET
    threads: int = 1

    @classmethod
    def from_json(cls, data: dict | None) -> "Budgets":
        data = data or {}
        threads = data.get("threads", os.environ.get(THREADS_ENV, 1))
        b = cls(int(data.get("simplices", DEFAULT_SIMPLEX_BUDGET)),
                int(data.get("tietze_steps", DEFAULT_TIETZE_BUDGET)),
                int(threads))
        if b.simplices <= 0 or b.tietze_steps <= 0 or b.threads <= 0:
            raise ValueError("budgets must be positive")
        return b


def fraction_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def build_model(ctx: GroupContext, kind: str, dim: int | None, budget: int):
    if kind == "delta":
        return order_complex(ctx.coset_poset, max_dim=dim, budget=budget)
    if kind == "mcover":
        return minimal_cover_skeleton(ctx.group, ctx.lattice, dim, budget=budget)
    if kind == "crosscut":
        return crosscut_prime_complex(ctx.group, ctx.lattice, max_dim=dim, budget=budget)[0]
    raise ValueError(f"unknown model {kind!r}")


# -- tasks ----------------------------------------------------------------------

def task_analyze_lattice(ctx: GroupContext, budgets: Budgets, **_) -> dict:
    return lattice_report(ctx.lattice, ctx.mu)


def task_mobius(ctx: GroupContext, budgets: Budgets, **_) -> dict:
    lat = ctx.lattice
    by_tag: dict[str, list[int]] = {}
    for i, m in enumerate(ctx.mu):
        vals = by_tag.setdefault(lat.tag(i), [])
        if m not in vals:
            vals.append(m)
    return {
        "mu": ctx.mu,
        "orders": [lat.order(i) for i in range(len(lat))],
        "by_tag": {k: sorted(v) for k, v in sorted(by_tag.items())},
    }


def task_zeta(ctx: GroupContext, budgets: Budgets, s: int = -1, **_) -> dict:
    return {"s": int(s), "value": fraction_text(ctx.zeta(int(s)))}


def task_coset_homology(ctx: GroupContext, budgets: Budgets, up_to: int | None = None, **_) -> dict:
    max_dim = None if up_to is None else int(up_to) + 1
    k = order_complex(ctx.coset_poset, max_dim=max_dim, budget=budgets.simplices)
    prof = reduced_homology(k, None if up_to is None else int(up_to), model="delta")
    return prof.to_json()


def task_model(ctx: GroupContext, budgets: Budgets, kind: str = "delta", up_to: int | None = None, **_) -> dict:
    max_dim = None if up_to is None else int(up_to) + 1
    k = build_model(ctx, kind, max_dim, budgets.simplices)
    if kind == "mcover" and up_to is not None and int(up_to) == 1:
        b1, how = betti_one_certified(k)
        return {"model": kind, "degrees": [{"k": 1, "betti": b1, "method": how}],
                "f_vector": list(k.f_vector)}
    prof = reduced_homology(k, None if up_to is None else int(up_to), model=kind)
    return prof.to_json()


def task_pi1_certify(ctx: GroupContext, budgets: Budgets, **_) -> dict:
    return certify_simple_connectivity(ctx.group, ctx.lattice, budgets.tietze_steps).to_json()


def task_chief_series(ctx: GroupContext, budgets: Budgets, **_) -> dict:
    return chief_series(ctx.lattice).to_json(ctx.lattice)


TASKS = {
    "analyze-lattice": task_analyze_lattice,
    "mobius": task_mobius,
    "zeta": task_zeta,
    "coset-homology": task_coset_homology,
    "model": task_model,
    "pi1-certify": task_pi1_certify,
    "chief-series": task_chief_series,
}


def run_task(ctx: GroupContext, budgets: Budgets, spec: dict) -> dict:
    name = spec["task"]
    fn = TASKS[name]
    params = {k: v for k, v in spec.items() if k != "task"}
    start = time.perf_counter()
    out = fn(ctx, budgets, **params)
    return {"task": name, "params": params, "status": "completed", "result": out,
            "runtime_ms": round((time.perf_counter() - start) * 1000, 3)}
