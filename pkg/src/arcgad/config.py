"""Training configuration and its INI-style file format.

A config file looks like::

    [arcgad]
    version = 1
    hidden = 256
    epochs = 200

Keys not given fall back to the :class:`TrainConfig` defaults.
"""
import configparser
from dataclasses import asdict, dataclass, fields

from .encoder import ENCODER_MODES, EncoderConfig
from .errors import DataIOError, ValidationError

CONFIG_VERSION = 1
SECTION = "arcgad"


@dataclass
class TrainConfig:
    d_u: int = 64
    L: int = 3
    hidden: int = 256
    mlp_layers: int = 2
    dropout: float = 0.2
    lr: float = 1e-3
    weight_decay: float = 1e-5
    epochs: int = 200
    eps: float = 0.0
    n_k: int = 10
    seed: int = 0
    init_sigma: float = 0.01
    encoder_mode: str = "residual"
    bias: bool = True

    def validate(self):
        self.encoder_config().validate()
        if self.lr <= 0 or self.weight_decay < 0:
            raise ValidationError("lr must be positive and weight_decay non-negative")
        if self.epochs < 0:
            raise ValidationError(f"epochs must be >= 0, got {self.epochs}")
        if not -1.0 <= self.eps <= 1.0:
            raise ValidationError(f"eps must be in [-1, 1], got {self.eps}")
        if self.n_k < 1:
            raise ValidationError(f"n_k must be >= 1, got {self.n_k}")
        if self.init_sigma < 0:
            raise ValidationError("init_sigma must be non-negative")
        if self.encoder_mode not in ENCODER_MODES:
            raise ValidationError(f"encoder_mode must be one of {ENCODER_MODES}")
        return self

    def encoder_config(self):
        return EncoderConfig(
            d_u=self.d_u,
            L=self.L,
            hidden=self.hidden,
            mlp_layers=self.mlp_layers,
            dropout=self.dropout,
            bias=self.bias,
            mode=self.encoder_mode,
        )

    @property
    def embed_dim(self):
        return self.L * self.hidden

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, raw):
        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        for key, value in raw.items():
            if key not in types:
                raise ValidationError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, value, types[key])
        return cls(**kwargs).validate()


def _coerce(key, value, typ):
    name = typ if isinstance(typ, str) else typ.__name__
    try:
        if name == "bool":
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if name == "int":
            return int(value)
        if name == "float":
            return float(value)
        return str(value)
    except ValueError:
        raise ValidationError(f"config key {key!r}: cannot parse {value!r} as {name}") from None


def dumps_config(cfg):
    lines = [f"[{SECTION}]", f"version = {CONFIG_VERSION}"]
    for key, value in cfg.to_dict().items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


def loads_config(text, source="<config>"):
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (L)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError(f"{source}: {exc}") from None
    if not parser.has_section(SECTION):
        raise ValidationError(f"{source}: missing [{SECTION}] section")
    raw = dict(parser.items(SECTION))
    version = raw.pop("version", None)
    if version is None or version.strip() != str(CONFIG_VERSION):
        raise ValidationError(f"{source}: unsupported config version {version!r}")
    return TrainConfig.from_dict(raw)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataIOError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text, str(path))


def save_config(cfg, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_config(cfg))
    except OSError as exc:
        raise DataIOError(f"cannot write config {path}: {exc}") from exc
