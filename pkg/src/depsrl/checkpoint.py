"""Model checkpoint archive: a zip holding a JSON manifest plus one binary
section per named parameter (row-major, little-endian IEEE-754 float64).

Loading rebuilds the weights from the manifest's configuration and
validates every stored shape against it, so a checkpoint can never be
resurrected under a conflicting configuration.
"""

from __future__ import annotations

import json
import zipfile
from dataclasses import dataclass

import numpy as np

from .conll import EmbeddingTable, Vocabulary
from .model import ModelConfig, ModelWeights
from .pairs import LabelSpace, PruningConfig

FORMAT_NAME = "depsrl-checkpoint"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable, truncated or inconsistent checkpoint file."""


class ModeMismatchError(CheckpointError):
    """Checkpoint was trained for a different task mode than requested."""


@dataclass
class Checkpoint:
    weights: ModelWeights
    mode: str = "conll2009"
    pruning: PruningConfig | None = None
    seed: int = 0
    best_f1: float | None = None
    step: int = 0


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    weights = ckpt.weights
    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "mode": ckpt.mode,
        "seed": ckpt.seed,
        "best_f1": ckpt.best_f1,
        "step": ckpt.step,
        "pruning": None if ckpt.pruning is None else
                   {"k": ckpt.pruning.k, "source": ckpt.pruning.source},
        "config": weights.config_dict(),
        "labels": weights.labels.to_json(),
        "vocab": weights.vocab.to_lists(),
        "params": {name: list(p.data.shape)
                   for name, p in weights.params.items()},
        "pretrained": None if weights.pretrained is None else {
            "dim": weights.pretrained.dim,
            "keys": sorted(weights.pretrained.vectors),
        },
    }
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json", json.dumps(manifest, indent=1))
        for name, p in weights.params.items():
            zf.writestr(f"params/{name}.bin",
                        np.ascontiguousarray(p.data, dtype="<f8").tobytes())
        if weights.pretrained is not None:
            table = weights.pretrained
            block = np.stack([table.vectors[k] for k in manifest["pretrained"]["keys"]]) \
                if table.vectors else np.zeros((0, table.dim))
            zf.writestr("pretrained.bin",
                        np.ascontiguousarray(block, dtype="<f8").tobytes())


def load_checkpoint(path, expect_mode: str | None = None) -> Checkpoint:
    try:
        zf = zipfile.ZipFile(path)
    except (zipfile.BadZipFile, OSError) as exc:
        raise CheckpointError(f"cannot open checkpoint {path}: {exc}") from exc
    with zf:
        try:
            manifest = json.loads(zf.read("manifest.json"))
        except KeyError:
            raise CheckpointError("archive has no manifest") from None
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"corrupt manifest: {exc}") from exc
        if manifest.get("format") != FORMAT_NAME:
            raise CheckpointError("not a model checkpoint")
        if manifest.get("version") != FORMAT_VERSION:
            raise CheckpointError(
                f"unsupported checkpoint version {manifest.get('version')!r}")
        mode = manifest["mode"]
        if expect_mode is not None and mode != expect_mode:
            raise ModeMismatchError(
                f"checkpoint was trained in {mode} mode, not {expect_mode}")

        try:
            config = ModelConfig(**manifest["config"])
        except TypeError as exc:
            raise CheckpointError(f"manifest configuration: {exc}") from exc
        labels = LabelSpace.from_json(manifest["labels"])
        vocab = Vocabulary.from_lists(manifest["vocab"])

        pretrained = None
        if manifest["pretrained"] is not None:
            dim = manifest["pretrained"]["dim"]
            keys = manifest["pretrained"]["keys"]
            raw = np.frombuffer(zf.read("pretrained.bin"), dtype="<f8")
            if raw.size != dim * len(keys):
                raise CheckpointError("pre-trained section is truncated")
            block = raw.reshape(len(keys), dim)
            pretrained = EmbeddingTable(
                dim, {k: block[i].astype(np.float64) for i, k in enumerate(keys)})

        weights = ModelWeights.build(config, vocab, labels, pretrained, rng=0)
        declared = manifest["params"]
        if set(declared) != set(weights.params):
            raise CheckpointError(
                "stored parameters do not match the manifest configuration")
        for name, shape in declared.items():
            expected = weights[name].data.shape
            if tuple(shape) != expected:
                raise CheckpointError(
                    f"parameter {name}: manifest shape {tuple(shape)} "
                    f"conflicts with configuration shape {expected}")
            raw = np.frombuffer(zf.read(f"params/{name}.bin"), dtype="<f8")
            if raw.size != int(np.prod(shape)):
                raise CheckpointError(f"parameter {name} is truncated")
            weights[name].data = raw.reshape(shape).astype(np.float64)

        pruning = None
        if manifest["pruning"] is not None:
            pruning = PruningConfig(manifest["pruning"]["k"],
                                    manifest["pruning"]["source"])
        return Checkpoint(weights, mode=mode, pruning=pruning,
                          seed=manifest["seed"], best_f1=manifest["best_f1"],
                          step=manifest["step"])
