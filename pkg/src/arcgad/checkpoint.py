"""Plain-text model checkpoints.

The document is JSON. Each parameter array is stored as its shape plus one
string of space-separated values printed with 17 significant digits, which
round-trips IEEE doubles exactly.
"""
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig
from .errors import DataIOError, ValidationError

FORMAT = "arcgad-checkpoint"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: TrainConfig
    params: dict
    log: dict = field(default_factory=dict)

    def encoder_names(self):
        return [k for k in self.params if k.startswith("encoder.")]

    def scorer_names(self):
        return [k for k in self.params if k.startswith("scorer.")]

    def to_text(self):
        doc = {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "params": {
                name: {
                    "shape": list(arr.shape),
                    "data": " ".join(format(float(v), ".17g") for v in arr.ravel()),
                }
                for name, arr in self.params.items()
            },
            "log": self.log,
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"

    @classmethod
    def from_text(cls, text, source="<checkpoint>"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{source}: not a checkpoint document ({exc})") from None
        if not isinstance(doc, dict) or doc.get("format") != FORMAT:
            raise ValidationError(f"{source}: unknown format {doc.get('format')!r}")
        if doc.get("version") != FORMAT_VERSION:
            raise ValidationError(f"{source}: unsupported checkpoint version {doc.get('version')!r}")
        try:
            cfg = TrainConfig.from_dict(doc["config"])
            params = {}
            for name, entry in doc["params"].items():
                shape = tuple(int(s) for s in entry["shape"])
                values = np.array(entry["data"].split(), dtype=np.float64)
                if values.size != int(np.prod(shape)):
                    raise ValidationError(
                        f"{source}: parameter {name} has {values.size} values for shape {shape}"
                    )
                params[name] = values.reshape(shape)
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"{source}: malformed checkpoint ({exc!r})") from None
        return cls(cfg, params, doc.get("log", {}))

    def digest(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def save_checkpoint(ckpt, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(ckpt.to_text())
    except OSError as exc:
        raise DataIOError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataIOError(f"cannot read checkpoint {path}: {exc}") from exc
    return Checkpoint.from_text(text, str(path))
