import json
from dataclasses import asdict, dataclass, field, fields


class ConfigError(ValueError):
    pass


def _default_dims():
    return {"embedding": 200, "clause": 200}


def _default_dropout():
    return {"embedding": 0.1, "word": 0.5, "clause": 0.1, "prediction": 0.1}


@dataclass
class TrainConfig:
    batch_size: int = 32
    lr_pretrain: float = 0.001
    lr_train: float = 0.001
    epochs_pretrain: int = 5
    epochs_train: int = 50
    K: int = 3
    w: int = 2
    dims: dict = field(default_factory=_default_dims)
    dropout: dict = field(default_factory=_default_dropout)
    seed: int = 0
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8
    grad_clip: float = None
    min_count: int = 1
    skip_pretrain: bool = False
    # loss terms ("e", "gp", "fp") dropped from a phase, for ablations
    exclude_pretrain: tuple = ()
    exclude_train: tuple = ()

    def __post_init__(self):
        self.dims = {**_default_dims(), **(self.dims or {})}
        self.dropout = {**_default_dropout(), **(self.dropout or {})}
        self.adam_betas = tuple(self.adam_betas)
        self.exclude_pretrain = tuple(self.exclude_pretrain)
        self.exclude_train = tuple(self.exclude_train)

    def errors(self):
        bad = []
        for name in ("batch_size", "K", "min_count"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                bad.append(f"{name} must be a positive integer")
        for name in ("epochs_pretrain", "epochs_train", "w"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 0:
                bad.append(f"{name} must be a non-negative integer")
        for name in ("lr_pretrain", "lr_train", "adam_eps"):
            if not getattr(self, name) > 0:
                bad.append(f"{name} must be positive")
        for key, value in self.dims.items():
            if not isinstance(value, int) or value < 1:
                bad.append(f"dims.{key} must be a positive integer")
        if isinstance(self.dims.get("clause"), int) and self.dims["clause"] % 2:
            bad.append("dims.clause must be even")
        for key, value in self.dropout.items():
            if not (isinstance(value, (int, float)) and 0 <= value < 1):
                bad.append(f"dropout.{key} must lie in [0, 1)")
        if len(self.adam_betas) != 2 or not all(0 <= b < 1 for b in self.adam_betas):
            bad.append("adam_betas must be two values in [0, 1)")
        if self.grad_clip is not None and not self.grad_clip > 0:
            bad.append("grad_clip must be positive when set")
        for name in ("exclude_pretrain", "exclude_train"):
            unknown = set(getattr(self, name)) - {"e", "gp", "fp"}
            if unknown:
                bad.append(f"{name} has unknown loss terms {sorted(unknown)}")
        return bad

    def validate(self):
        bad = self.errors()
        if bad:
            raise ConfigError("invalid config: " + "; ".join(bad))
        return self

    def to_dict(self):
        d = asdict(self)
        d["adam_betas"] = list(self.adam_betas)
        d["exclude_pretrain"] = list(self.exclude_pretrain)
        d["exclude_train"] = list(self.exclude_train)
        return d

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"invalid config: unknown fields {unknown}")
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc.msg})") from exc
        return cls.from_dict(data)

    def replace(self, **overrides):
        d = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ("dims", "dropout"):
                d[key] = {**d[key], **value}
            else:
                d[key] = value
        return type(self).from_dict(d)
