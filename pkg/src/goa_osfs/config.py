"""Experiment configuration and its INI file format.

Example::

    [data]
    path = wdbc_train.csv
    test = wdbc_test.csv
    label = diagnosis

    [scenario]
    kind = B1

    [algorithm]
    name = GOA
    delta = 0.3

    [eval]
    trials = 5

    [run]
    seed = 1
    output_dir = runs/wdbc_b1

Keys map one-to-one onto ``ExperimentConfig`` fields (see SECTIONS); any key
may be omitted. Command-line flags override file values.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields
from io import StringIO
from pathlib import Path
from typing import Optional

from .evaluation import EvalSettings
from .goa import GoaConfig
from .streaming import ScenarioSpec
from .xsaola import XsaolaConfig


@dataclass
class ExperimentConfig:
    data: Optional[str] = None
    test: Optional[str] = None
    label: str = "-1"
    header: bool = True
    sim_classes: Optional[int] = None
    sim_dims: Optional[int] = None
    sim_per_class: Optional[int] = None
    scenario: str = "A"
    spans: int = 2
    b2_min_fraction: float = 0.5
    min_per_class: int = 3
    shuffle_features: Optional[int] = None
    algorithm: str = "GOA"
    delta: float = 0.5
    bins: Optional[int] = None
    quantifier: str = "exists"
    knn_k: int = 3
    svm_epochs: int = 50
    svm_lr: float = 0.1
    svm_reg: float = 1e-4
    trials: int = 5
    train_fraction: float = 0.7
    grid: Optional[str] = None
    classifier: str = "knn"
    output_dir: str = "runs"
    seed: int = 0

    def scenario_spec(self) -> ScenarioSpec:
        return ScenarioSpec(self.scenario, 0, self.spans, self.b2_min_fraction,
                            self.min_per_class, self.shuffle_features)

    def eval_settings(self) -> EvalSettings:
        return EvalSettings(self.knn_k, self.svm_epochs, self.svm_lr, self.svm_reg,
                            self.trials, self.train_fraction, self.bins)

    def selector_config(self):
        if self.algorithm.upper() == "GOA":
            return GoaConfig(self.delta, self.seed, quantifier=self.quantifier)
        return XsaolaConfig(self.delta, self.bins, self.seed)

    def validate(self) -> "ExperimentConfig":
        self.scenario_spec()
        self.selector_config()
        if self.algorithm.upper() not in ("GOA", "XSAOLA"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.classifier not in ("knn", "svm"):
            raise ValueError("classifier must be knn or svm")
        if self.data is None and self.sim_classes is None:
            raise ValueError("no dataset: give a data path or simulation parameters")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for section, keys in SECTIONS.items():
            cp[section] = {}
            for key, name in keys.items():
                v = getattr(self, name)
                if v is not None:
                    cp[section][key] = repr(v) if isinstance(v, float) else str(v)
        buf = StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.read_string(text)
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for section in cp.sections():
            if section not in SECTIONS:
                raise ValueError(f"unknown config section [{section}]")
            for key, raw in cp[section].items():
                if key not in SECTIONS[section]:
                    raise ValueError(f"unknown key {key!r} in [{section}]")
                name = SECTIONS[section][key]
                values[name] = _coerce(raw, types[name])
        return cls(**values)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_ini(Path(path).read_text())


def _coerce(raw: str, type_name: str):
    t = str(type_name)
    if "bool" in t:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if "int" in t:
        return int(raw)
    if "float" in t:
        return float(raw)
    return raw


SECTIONS = {
    "data": {"path": "data", "test": "test", "label": "label", "header": "header",
             "sim_classes": "sim_classes", "sim_dims": "sim_dims",
             "sim_per_class": "sim_per_class"},
    "scenario": {"kind": "scenario", "spans": "spans", "b2_min_fraction": "b2_min_fraction",
                 "min_per_class": "min_per_class", "shuffle_features": "shuffle_features"},
    "algorithm": {"name": "algorithm", "delta": "delta", "bins": "bins",
                  "quantifier": "quantifier"},
    "eval": {"knn_k": "knn_k", "svm_epochs": "svm_epochs", "svm_lr": "svm_lr",
             "svm_reg": "svm_reg", "trials": "trials", "train_fraction": "train_fraction",
             "grid": "grid", "classifier": "classifier"},
    "run": {"output_dir": "output_dir", "seed": "seed"},
}
