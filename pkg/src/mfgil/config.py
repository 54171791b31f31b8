"""Experiment configuration: JSON document, schema check, defaults.

A config is a JSON object with sections env / solver / imitation /
evaluation plus seeds and an output directory. Missing keys fall back
to the per-environment defaults below, which reproduce the published
hyperparameter tables; unknown keys are rejected so typos fail fast.
"""

import copy
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .envs import build_env

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "two_state": {
        "env": {"name": "two_state",
                "params": {"alpha": 1.75, "eta": 0.75, "horizon": 30}},
        "solver": {"kind": "mann", "iterations": 50, "gamma": 0.05,
                   "grid_points": 50, "mc_batch": 10000,
                   "eval_every": 1, "eval_paths": 200},
        "imitation": {"method": "nw", "n_trajectories": 2000, "n_agents": 100,
                      "bandwidth": 0.05,
                      # interactive-method knobs (used when method=interactive)
                      "iters": 10000, "batch": 50, "agents": 1000, "lr": 1e-4,
                      "hidden": [64, 64], "cosine": False},
        "evaluation": {"proxy_paths": 2000, "value_mc": 2000,
                       "exploitability_mc": 1000, "lipschitz_probes": 2000,
                       "br_grid_points": 200, "br_mc_batch": 10000},
    },
    "beach_bar": {
        "env": {"name": "beach_bar",
                "params": {"x_half": 5, "alpha": 1.0, "beta": 0.1, "eta": 0.3,
                           "horizon": 50, "distance": "circular"}},
        "solver": {"kind": "fp", "iterations": 40, "br_iters": 1000,
                   "br_batch": 500, "br_lr": 1e-4, "hidden": [64, 64],
                   "noise_pool": 0, "eval_every": 0, "eval_paths": 100,
                   "distill_iters": 10000, "distill_batch": 200,
                   "distill_lr": 1e-4, "distill_cosine": False},
        "imitation": {"method": "interactive", "iters": 10000, "batch": 50,
                      "agents": 1000, "lr": 1e-4, "hidden": [64, 64],
                      "cosine": False},
        "evaluation": {"proxy_paths": 200, "value_mc": 200,
                       "exploitability_mc": 100, "lipschitz_probes": 1000,
                       "br_iters": 1000, "br_batch": 500, "br_lr": 1e-4,
                       "br_noise_pool": 0},
    },
    "night_clubs": {
        "env": {"name": "night_clubs",
                "params": {"x_half": 5, "alpha": 1.0, "beta": 0.1, "eta": 0.3,
                           "horizon": 30}},
        "solver": {"kind": "fp", "iterations": 40, "br_iters": 1000,
                   "br_batch": 500, "br_lr": 1e-4, "hidden": [64, 64],
                   "noise_pool": 0, "eval_every": 0, "eval_paths": 100,
                   "distill_iters": 20000, "distill_batch": 500,
                   "distill_lr": 5e-4, "distill_cosine": True},
        "imitation": {"method": "interactive", "iters": 20000, "batch": 50,
                      "agents": 1000, "lr": 1e-4, "hidden": [64, 64],
                      "cosine": False},
        "evaluation": {"proxy_paths": 200, "value_mc": 200,
                       "exploitability_mc": 100, "lipschitz_probes": 1000,
                       "br_iters": 1000, "br_batch": 500, "br_lr": 1e-4,
                       "br_noise_pool": 0},
    },
}

_TOP_KEYS = {"schema_version", "env", "solver", "imitation", "evaluation",
             "seeds", "output_dir", "sweep"}


def _merge(defaults, override, path):
    out = copy.deepcopy(defaults)
    for key, val in override.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path}.{key}")
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{path}.{key} must be an object")
            out[key] = _merge(defaults[key], val, f"{path}.{key}")
        else:
            out[key] = val
    return out


@dataclass
class ExperimentConfig:
    env: Dict
    solver: Dict
    imitation: Dict
    evaluation: Dict
    seeds: List[int]
    output_dir: str
    sweep: Optional[Dict] = None
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(doc) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        version = doc.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}")
        env = doc.get("env")
        if not isinstance(env, dict) or "name" not in env:
            raise ConfigError("config requires env.name")
        name = env["name"]
        if name not in DEFAULTS:
            raise ConfigError(f"unknown environment {name!r}")
        base = DEFAULTS[name]
        merged_env = _merge(base["env"], env, "env")
        solver = _merge(base["solver"], doc.get("solver", {}), "solver")
        imitation = _merge(base["imitation"], doc.get("imitation", {}),
                           "imitation")
        evaluation = _merge(base["evaluation"], doc.get("evaluation", {}),
                            "evaluation")
        seeds = doc.get("seeds", [0])
        if (not isinstance(seeds, list) or not seeds
                or not all(isinstance(s, int) for s in seeds)):
            raise ConfigError("seeds must be a nonempty list of integers")
        sweep = doc.get("sweep")
        if sweep is not None:
            if not isinstance(sweep, dict) or not sweep:
                raise ConfigError("sweep must be a nonempty object")
            bad = set(sweep) - set(merged_env["params"])
            if bad:
                raise ConfigError(
                    f"sweep keys must be env params, got {sorted(bad)}")
            for key, vals in sweep.items():
                if not isinstance(vals, list) or not vals:
                    raise ConfigError(f"sweep.{key} must be a nonempty list")
        cfg = cls(env=merged_env, solver=solver, imitation=imitation,
                  evaluation=evaluation, seeds=seeds,
                  output_dir=doc.get("output_dir", "out"), sweep=sweep,
                  schema_version=version)
        cfg.build_model()  # env parameter validation happens in the builders
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as f:
                doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        try:
            return cls.from_dict(doc)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def build_model(self, **param_overrides):
        params = dict(self.env["params"], **param_overrides)
        try:
            return build_env(self.env["name"], **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid env params: {exc}") from exc

    def to_dict(self):
        out = {"schema_version": self.schema_version, "env": self.env,
               "solver": self.solver, "imitation": self.imitation,
               "evaluation": self.evaluation, "seeds": self.seeds,
               "output_dir": self.output_dir}
        if self.sweep is not None:
            out["sweep"] = self.sweep
        return out

    def config_hash(self):
        """Short stable digest used in checkpoint file names."""
        import hashlib
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:10]
