"""Line-oriented `key = value` run configuration.

Absent keys fall back to the published training recipe (embedding sizes
100/100/100/100 plus a 16-dimensional indicator, 3x400 BiLSTM, 300-d
projections, 80% keep probabilities, 20% word dropout, Adam at 0.002 with
0.75 decay every 5000 steps, ~5000-token batches, 50 epochs).  Unknown
keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .model import ModelConfig
from .pairs import PruningConfig
from .training import TrainConfig


class ConfigError(ValueError):
    """Unknown key or unparsable value in a run configuration."""


@dataclass
class RunConfig:
    # data and artifacts
    train_file: str | None = None
    dev_file: str | None = None
    embeddings_file: str | None = None
    model_file: str = "model.ckpt"
    log_file: str | None = None
    format: str | None = None        # column layout; defaults to `mode`
    mode: str = "conll2009"
    seed: int = 1
    # word representation
    dim_word: int = 100
    dim_pretrained: int = 100
    dim_lemma: int = 100
    dim_pos: int = 100
    dim_indicator: int = 16
    use_indicator: bool = True
    use_pos: bool = True
    use_lemma: bool = True
    use_predicted: bool = True
    word_dropout: float = 0.20
    # encoder and scorer
    lstm_layers: int = 3
    lstm_size: int = 400
    proj_size: int = 300
    recurrent_keep: float = 0.80
    projection_keep: float = 0.80
    variant: str = "full"
    masked_decode: bool = True
    # optimization
    batch_tokens: int = 5000
    max_epochs: int = 50
    eval_every: int = 1
    patience: int = 10
    min_count: int = 2
    base_lr: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.9
    epsilon: float = 1e-8
    anneal_decay: float = 0.75
    anneal_period: int = 5000
    clip_norm: float = 5.0
    # argument candidate pruning
    prune_k: int | None = None
    prune_source: str = "pred"

    @property
    def data_format(self) -> str:
        return self.format or self.mode

    def model_config(self, with_pretrained: bool | None = None,
                     pretrained_dim: int | None = None) -> ModelConfig:
        return ModelConfig(
            dim_word=self.dim_word,
            dim_pretrained=pretrained_dim or self.dim_pretrained,
            dim_lemma=self.dim_lemma,
            dim_pos=self.dim_pos,
            dim_indicator=self.dim_indicator,
            lstm_layers=self.lstm_layers,
            lstm_size=self.lstm_size,
            proj_size=self.proj_size,
            word_dropout=self.word_dropout,
            recurrent_keep=self.recurrent_keep,
            projection_keep=self.projection_keep,
            variant=self.variant,
            use_indicator=self.use_indicator and self.mode == "conll2009",
            use_pos=self.use_pos,
            use_lemma=self.use_lemma,
            use_predicted=self.use_predicted,
            masked_decode=self.masked_decode,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            batch_tokens=self.batch_tokens,
            max_epochs=self.max_epochs,
            seed=self.seed,
            eval_every=self.eval_every,
            patience=self.patience,
            min_count=self.min_count,
            base_lr=self.base_lr,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            anneal_decay=self.anneal_decay,
            anneal_period=self.anneal_period,
            clip_norm=self.clip_norm,
            mode=self.mode,
        )

    def pruning_config(self) -> PruningConfig | None:
        if self.prune_k is None:
            return None
        return PruningConfig(self.prune_k, self.prune_source)


_FIELDS = {f.name: f for f in fields(RunConfig)}

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}


def _parse_value(key: str, text: str):
    default = _FIELDS[key].default
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if isinstance(default, bool):
        if text.lower() not in _BOOL_WORDS:
            raise ConfigError(f"key {key!r}: expected a boolean, got {text!r}")
        return _BOOL_WORDS[text.lower()]
    target = int if key == "prune_k" else type(default) if default is not None else str
    if target is int:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"key {key!r}: expected an integer, got {text!r}") from None
    if target is float:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"key {key!r}: expected a number, got {text!r}") from None
    return text


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, value)
    cfg = RunConfig(**values)
    if cfg.mode not in ("conll2009", "conll2008"):
        raise ConfigError(f"key 'mode': must be conll2009 or conll2008, got {cfg.mode!r}")
    if cfg.format not in (None, "conll2009", "conll2008"):
        raise ConfigError(f"key 'format': must be conll2009 or conll2008, got {cfg.format!r}")
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
