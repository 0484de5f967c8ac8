"""Run configuration shared by the CLI and pipeline, serialized into every
output artifact."""

import json
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    # inpainter training
    arch_id: str = "D1"
    learning_rate: float = 0.0002
    lam: float = 0.9
    batch_size: int = 16
    epochs: int = 20
    bottleneck: int = 4000
    base_channels: int = 64
    input_size: int = 64
    # codebook and encoding
    n_words: int = 160
    selector: str = "threshold"
    epsilon: float = 0.7
    patch_size: int = 64
    stride: int = 32
    # masks
    dilation_radius: int = 7
    shift: tuple = (10, 0)
    mask_fraction: float = 0.25
    compactness: float = 10.0
    # regression
    svr_c: float = 1.0
    svr_tube: float = 0.1
    # evaluation
    n_folds: int = 1000
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["shift"] = list(self.shift)
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("schema_version", None)
        if "shift" in d:
            d["shift"] = tuple(d["shift"])
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
