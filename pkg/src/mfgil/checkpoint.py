"""Binary array container and policy checkpoints.

Format: magic ``MFGC``, one little-endian uint32 header length, a JSON
header, then the raw array bytes back to back. The header records the
container version, user metadata, and per-array name/dtype/shape in
write order, so files are self-describing and byte-stable for identical
inputs.
"""

import json
import struct

import numpy as np

from .mlp import Mlp
from .policies import (AdaptiveGrid, KernelNW, MixturePolicy, ParametricMlp,
                       Policy, UniformPolicy, VanillaTabular)

MAGIC = b"MFGC"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_arrays(path, arrays, meta=None):
    """Write named arrays plus a JSON metadata block to ``path``."""
    entries = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        entries.append({"name": name, "dtype": arr.dtype.str,
                        "shape": list(arr.shape)})
    header = json.dumps({"version": VERSION, "meta": meta or {},
                         "arrays": entries}, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        for name, arr in arrays.items():
            f.write(np.ascontiguousarray(arr).tobytes())


def load_arrays(path):
    """Read a container back; returns (arrays dict, meta dict)."""
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise CheckpointError(f"{path} is not a checkpoint container")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode())
        if header["version"] != VERSION:
            raise CheckpointError(
                f"unsupported container version {header['version']}")
        arrays = {}
        for entry in header["arrays"]:
            dt = np.dtype(entry["dtype"])
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            buf = f.read(count * dt.itemsize)
            arrays[entry["name"]] = np.frombuffer(buf, dtype=dt).reshape(
                entry["shape"]).copy()
    return arrays, header["meta"]


def _policy_payload(policy, prefix=""):
    """Flatten a policy into (arrays, meta); mixtures recurse with prefixes."""
    if isinstance(policy, VanillaTabular):
        return {prefix + "table": policy.table}, {"kind": "vanilla_tabular"}
    if isinstance(policy, AdaptiveGrid):
        return ({prefix + "grid": policy.grid, prefix + "table": policy.table},
                {"kind": "adaptive_grid"})
    if isinstance(policy, KernelNW):
        return ({prefix + "fields": policy.fields,
                 prefix + "counts": policy.counts},
                {"kind": "kernel_nw", "bandwidth": policy.bandwidth})
    if isinstance(policy, ParametricMlp):
        arrays = {prefix + k: v for k, v in policy.net.flat_arrays().items()}
        return arrays, {"kind": "parametric_mlp", "horizon": policy.horizon,
                        "n_states": policy.n_states,
                        "n_actions": policy.n_actions,
                        "adaptive": bool(policy.adaptive)}
    if isinstance(policy, UniformPolicy):
        return {}, {"kind": "uniform", "n_states": policy.n_states,
                    "n_actions": policy.n_actions}
    if isinstance(policy, MixturePolicy):
        arrays = {}
        comps = []
        for i, (w, p) in enumerate(policy.components):
            sub_arrays, sub_meta = _policy_payload(p, prefix=f"{prefix}c{i}_")
            arrays.update(sub_arrays)
            comps.append({"weight": w, "policy": sub_meta})
        return arrays, {"kind": "mixture", "components": comps}
    raise CheckpointError(f"cannot checkpoint policy type {type(policy).__name__}")


def _policy_from_payload(arrays, meta, prefix=""):
    kind = meta["kind"]
    if kind == "vanilla_tabular":
        return VanillaTabular(arrays[prefix + "table"])
    if kind == "adaptive_grid":
        return AdaptiveGrid(arrays[prefix + "grid"], arrays[prefix + "table"])
    if kind == "kernel_nw":
        return KernelNW(arrays[prefix + "fields"], arrays[prefix + "counts"],
                        meta["bandwidth"])
    if kind == "parametric_mlp":
        plen = len(prefix)
        net = Mlp.from_flat_arrays(
            {k[plen:]: v for k, v in arrays.items() if k.startswith(prefix)})
        return ParametricMlp(net, meta["horizon"], meta["n_states"],
                             meta["n_actions"], meta["adaptive"])
    if kind == "uniform":
        return UniformPolicy(meta["n_states"], meta["n_actions"])
    if kind == "mixture":
        comps = [(c["weight"],
                  _policy_from_payload(arrays, c["policy"],
                                       prefix=f"{prefix}c{i}_"))
                 for i, c in enumerate(meta["components"])]
        return MixturePolicy(comps)
    raise CheckpointError(f"unknown policy kind {kind!r}")


def save_policy(path, policy, meta=None):
    arrays, pmeta = _policy_payload(policy)
    save_arrays(path, arrays, {"policy": pmeta, "extra": meta or {}})


def load_policy(path):
    """Returns (policy, extra metadata)."""
    arrays, meta = load_arrays(path)
    return _policy_from_payload(arrays, meta["policy"]), meta.get("extra", {})
