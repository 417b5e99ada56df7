"""Experiment sweeps: a matrix of methods run over replicate datasets.

A config is a JSON object::

    {
      "datasets": {"generate": {"seeds": [1, 2, 3], "config": {"m": 101}}},
      "methods": [
        {"method": "goc", "oracle": "kmeans", "k0": [50], "lambda": [0, 0.01]},
        {"method": "baseline", "oracle": "kmeans", "k0": [50]},
        {"method": "ap", "kind": ["s2"], "quantile": [0.5, 0.9]}
      ],
      "max_iter": 100,
      "convergence": "exact",
      "oracle_seed": 0,
      "standardize": true,
      "output_dir": "results"
    }

``datasets`` may instead be ``{"load": ["dir1", "dir2"]}``.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .baselines import KINDS, SimilarityMatrix, affinity_propagation, baseline_cluster, set_discrepancies
from .datagen import GenConfig, generate_dataset
from .goc import CONSTANT, SHRINK, GocConfig, run_goc, run_gpc
from .metrics import f_measure, nmi
from .oracles import ORACLE_KINDS, OracleConfig
from .uncertainty import standardize

METHODS = ("goc", "gpc", "baseline", "ap")
RESULT_HEADER = [
    "row_type",
    "dataset_id",
    "method",
    "oracle",
    "K0",
    "lambda",
    "ap_kind",
    "quantile",
    "nmi",
    "f_measure",
    "n_clusters",
    "n_iterations",
]


@dataclass(frozen=True)
class Cell:
    method: str
    oracle: str = ""
    K0: Optional[int] = None
    lam: Optional[float] = None
    ap_kind: str = ""
    quantile: Optional[float] = None

    def sort_key(self):
        return (
            METHODS.index(self.method),
            self.oracle,
            -1 if self.K0 is None else self.K0,
            -1.0 if self.lam is None else self.lam,
            self.ap_kind,
            -1.0 if self.quantile is None else self.quantile,
        )

    def fields(self):
        return [
            self.method,
            self.oracle,
            "" if self.K0 is None else self.K0,
            "" if self.lam is None else io.fmt(self.lam),
            self.ap_kind,
            "" if self.quantile is None else io.fmt(self.quantile),
        ]


@dataclass
class ExperimentConfig:
    cells: list
    seeds: list = field(default_factory=list)
    load: list = field(default_factory=list)
    gen_overrides: dict = field(default_factory=dict)
    max_iter: int = 100
    tol: Optional[float] = None
    oracle_seed: int = 0
    k_schedule: str = SHRINK
    do_standardize: bool = True
    output_dir: str = "results"


def parse_convergence(text: str) -> Optional[float]:
    if text == "exact":
        return None
    if text.startswith("tol:"):
        eps = float(text[4:])
        if not eps > 0:
            raise ValueError("tolerance must be > 0")
        return eps
    raise ValueError(f"convergence must be 'exact' or 'tol:EPS', got {text!r}")


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def parse_config(obj: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    ds = obj.get("datasets")
    if not isinstance(ds, dict) or not ({"generate", "load"} & ds.keys()):
        raise ValueError("config needs datasets.generate or datasets.load")
    seeds, load, overrides = [], [], {}
    if "generate" in ds:
        seeds = [int(s) for s in ds["generate"].get("seeds", [])]
        overrides = dict(ds["generate"].get("config", {}))
        if len(set(seeds)) != len(seeds):
            raise ValueError("replicate seeds must be distinct")
        if not seeds:
            raise ValueError("datasets.generate.seeds is empty")
    if "load" in ds:
        load = [str(base_dir / p) for p in _as_list(ds["load"])]
    methods = obj.get("methods") or []
    if not methods:
        raise ValueError("method matrix is empty")
    cells = []
    for m in methods:
        name = m.get("method")
        if name not in METHODS:
            raise ValueError(f"unknown method {name!r}; choose from {METHODS}")
        if name == "ap":
            for kind, q in itertools.product(_as_list(m.get("kind", ["s2"])), _as_list(m.get("quantile", [0.5]))):
                if kind not in KINDS:
                    raise ValueError(f"unknown ap kind {kind!r}")
                cells.append(Cell("ap", ap_kind=kind, quantile=float(q)))
            continue
        oracle = m.get("oracle", "kmeans")
        if oracle not in ORACLE_KINDS:
            raise ValueError(f"unknown oracle {oracle!r}")
        for k0 in _as_list(m.get("k0", [50])):
            if int(k0) < 1:
                raise ValueError("k0 must be >= 1")
            if name == "baseline":
                cells.append(Cell(name, oracle, int(k0)))
            else:
                for lam in _as_list(m.get("lambda", [0.0])):
                    cells.append(Cell(name, oracle, int(k0), float(lam)))
    cells = sorted(set(cells), key=Cell.sort_key)
    return ExperimentConfig(
        cells=cells,
        seeds=seeds,
        load=load,
        gen_overrides=overrides,
        max_iter=int(obj.get("max_iter", 100)),
        tol=parse_convergence(obj.get("convergence", "exact")),
        oracle_seed=int(obj.get("oracle_seed", 0)),
        k_schedule=obj.get("k_schedule", SHRINK),
        do_standardize=bool(obj.get("standardize", True)),
        output_dir=str(base_dir / obj.get("output_dir", "results")),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return parse_config(obj, path.parent)


def run_cell(d, cell: Cell, cfg: ExperimentConfig, sims: dict):
    """Returns (nmi, f_measure, n_clusters, n_iterations) for one cell on one dataset."""
    truth = d.true_labels
    n_iter = ""
    if cell.method == "ap":
        if cell.ap_kind not in sims:
            sims.update(set_discrepancies(d))
        a = affinity_propagation(SimilarityMatrix(-sims[cell.ap_kind], cell.ap_kind), cell.quantile)
        n_iter = a.info["iterations"]
    else:
        oc = OracleConfig(kind=cell.oracle, rng_seed=cfg.oracle_seed)
        if cell.method == "baseline":
            a = baseline_cluster(d, cell.K0, oc)
        else:
            gc = GocConfig(K0=cell.K0, lam=cell.lam, k_schedule=cfg.k_schedule, tol=cfg.tol, T_max=cfg.max_iter, oracle=oc)
            a, trace = run_goc(d, None, gc) if cell.method == "goc" else run_gpc(d, gc)
            n_iter = trace.total_iterations
    n_clusters = int(np.unique(a.labels).size)
    return nmi(a.labels, truth), f_measure(a.labels, truth), n_clusters, n_iter


def _dataset_rows(args):
    source, cfg = args
    if isinstance(source, int):
        d = generate_dataset(GenConfig(seed=source, **cfg.gen_overrides))
        did = str(source)
    else:
        d = io.load_dataset(source)
        did = Path(source).name
    if d.true_labels is None:
        raise ValueError(f"dataset {did} has no truth.csv; cannot score")
    if cfg.do_standardize and not d.standardized:
        d = standardize(d)
    sims: dict = {}
    return did, [(cell, run_cell(d, cell, cfg, sims)) for cell in cfg.cells]


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> Path:
    """Run every cell on every dataset and write ``results.csv``.

    Per-replicate rows come first, then one ``mean`` and one ``sd`` (sample
    standard deviation) row per cell. Row order depends only on the config.
    """
    sources = list(cfg.seeds) + list(cfg.load)
    tasks = [(s, cfg) for s in sources]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_dataset_rows, tasks))
    else:
        results = [_dataset_rows(t) for t in tasks]

    per_cell: dict = {c: [] for c in cfg.cells}
    for did, rows in results:
        for cell, vals in rows:
            per_cell[cell].append((did, vals))
    out_rows = []
    for cell in cfg.cells:
        for did, (a, f, k, it) in per_cell[cell]:
            out_rows.append(["replicate", did] + cell.fields() + [io.fmt(a), io.fmt(f), k, it])
    for cell in cfg.cells:
        vals = np.array([[v[0], v[1], v[2]] for _, v in per_cell[cell]], dtype=float)
        iters = [v[3] for _, v in per_cell[cell] if v[3] != ""]
        it_arr = np.array(iters, dtype=float) if iters else None
        ddof = 1 if len(vals) > 1 else 0
        mean = vals.mean(axis=0)
        sd = vals.std(axis=0, ddof=ddof)
        it_mean = "" if it_arr is None else io.fmt(it_arr.mean())
        it_sd = "" if it_arr is None else io.fmt(it_arr.std(ddof=ddof))
        out_rows.append(["mean", "*"] + cell.fields() + [io.fmt(x) for x in mean] + [it_mean])
        out_rows.append(["sd", "*"] + cell.fields() + [io.fmt(x) for x in sd] + [it_sd])
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "results.csv"
    io.write_rows(path, RESULT_HEADER, out_rows)
    return path
