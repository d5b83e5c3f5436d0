"""Model and posterior snapshots: JSON header plus flat float64 arrays.

A snapshot directory is self-contained: network architecture and weights,
kernel hyperparameters, and the Laplace posterior (training latents, mode,
prediction factors), so a trained model can be re-applied to a different
region with no access to the original session.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError
from .gp import KernelHyperparams, PosteriorState
from .network import Architecture, NetworkParams

_SNAPSHOT_VERSION = 1


def _write_f64(path: Path, arr: np.ndarray) -> None:
    path.write_bytes(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_f64(path: Path, count: int) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) != count * 8:
        raise FormatError(
            f"{path.name}: holds {len(raw)} bytes, header implies {count * 8}")
    return np.frombuffer(raw, dtype="<f8").copy()


def save_model(posterior: PosteriorState, window: int, path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    arrays = {
        "net_params": posterior.net.values,
        "latents": posterior.latents,
        "f_hat": posterior.f_hat,
        "alpha": posterior.alpha,
        "V": posterior.V,
        "W": posterior.W,
    }
    entries = {}
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype=np.float64)
        _write_f64(root / f"{name}.f64", arr.ravel())
        entries[name] = {"file": f"{name}.f64", "shape": list(arr.shape),
                         "count": int(arr.size), "dtype": "f64le"}
    header = {
        "version": _SNAPSHOT_VERSION,
        "window": int(window),
        "architecture": posterior.net.arch.to_dict(),
        "hyperparams": posterior.hyper.to_dict(),
        "train_ids": [int(i) for i in posterior.ids],
        "arrays": entries,
        "evidence": float(posterior.evidence),
        "loglik": float(posterior.loglik),
    }
    (root / "model.json").write_text(
        json.dumps(header, sort_keys=True, indent=1) + "\n")


def load_model(path):
    """Returns (PosteriorState, window)."""
    root = Path(path)
    header_path = root / "model.json"
    if not header_path.is_file():
        raise FormatError(f"no model.json under {path}")
    header = json.loads(header_path.read_text())
    arch = Architecture.from_dict(header["architecture"])
    hyper = KernelHyperparams.from_dict(header["hyperparams"])

    def arr(name):
        e = header["arrays"][name]
        return _read_f64(root / e["file"], e["count"]).reshape(e["shape"])

    net = NetworkParams(arch, arr("net_params"))
    posterior = PosteriorState(
        ids=np.asarray(header["train_ids"], dtype=np.intp),
        latents=arr("latents"), f_hat=arr("f_hat"), alpha=arr("alpha"),
        V=arr("V"), W=arr("W"), hyper=hyper, net=net,
        loglik=float(header.get("loglik", 0.0)),
        evidence=float(header.get("evidence", 0.0)),
        newton_iters=0, grad_norm=0.0)
    return posterior, int(header["window"])
