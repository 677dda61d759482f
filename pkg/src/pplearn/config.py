"""Flat ``key = value`` experiment configuration.

Every key has a fixed type and default; unknown keys are rejected. Values
are layered in order: defaults, the file, the ``method`` preset, then
``--set`` overrides. :func:`dump_config` writes the resolved
set in a form :func:`parse_config` reads back unchanged.
"""

from dataclasses import dataclass
import math

from .datagen import ImbalanceProfile, apply_qr, load_tabular, profile_counts, synth_gaussians
from .losses import LossConfig
from .mixer import MixConfig
from .schedules import PhaseSchedule, TransformKind
from .trainer import TrainConfig, apply_method

__all__ = [
    "ConfigError",
    "DEFAULTS",
    "parse_config",
    "load_config",
    "parse_override",
    "resolve",
    "requested_method",
    "dump_config",
    "build_train_config",
    "build_data",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class _Key:
    kind: str
    default: object
    optional: bool = False


_KEYS = {
    "method": _Key("str", "custom"),
    "data.kind": _Key("str", "synth"),
    "data.c": _Key("int", 10),
    "data.dim": _Key("int", 20),
    "data.nmax": _Key("int", 500),
    "data.if": _Key("float", 100.0),
    "data.profile": _Key("str", "lt"),
    "data.qr": _Key("float", 1.0),
    "data.sep": _Key("float", 3.0),
    "data.noise": _Key("float", 1.0),
    "data.val_per_class": _Key("int", 100),
    "data.seed": _Key("int", None, optional=True),
    "data.path": _Key("str", None, optional=True),
    "data.val_path": _Key("str", None, optional=True),
    "data.header": _Key("bool", False),
    "phase.e0": _Key("int", 100),
    "phase.e1": _Key("int", 160),
    "phase.delta": _Key("float", 1.0),
    "phase.kind": _Key("str", "power"),
    "phase.rho": _Key("float", 5.0),
    "weight.mode": _Key("str", "none"),
    "loss.family": _Key("str", "ce"),
    "loss.gamma": _Key("float", 1.5),
    "loss.s": _Key("float", None, optional=True),
    "loss.max_margin": _Key("float", 0.5),
    "loss.t": _Key("float", 1e-6),
    "loss.sigma": _Key("str", "linear"),
    "loss.shifted_focus": _Key("bool", True),
    "sampler.mode": _Key("str", "none"),
    "sampler.delta": _Key("float", 1.0),
    "mix.mode": _Key("str", "none"),
    "mix.kappa": _Key("float", 3.0),
    "mix.tau": _Key("float", 0.5),
    "mix.beta": _Key("float", 1.0),
    "train.epochs": _Key("int", 200),
    "train.batch": _Key("int", 128),
    "train.lr": _Key("float", 0.1),
    "train.milestones": _Key("intlist", (160, 180)),
    "train.lr_decay": _Key("float", 0.1),
    "train.model": _Key("str", "linear"),
    "train.hidden": _Key("int", 64),
    "train.freeze_at": _Key("int", None, optional=True),
    "train.renorm": _Key("bool", True),
    "train.anneal_rho": _Key("float", None, optional=True),
    "train.seed": _Key("int", 0),
    "metrics.head_frac": _Key("float", 0.24),
    "metrics.tail_frac": _Key("float", 0.04),
}

DEFAULTS = {k: v.default for k, v in _KEYS.items()}

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(key, raw):
    entry = _KEYS.get(key)
    if entry is None:
        raise ConfigError(f"unknown config key {key!r}")
    text = raw.strip()
    if entry.optional and text.lower() in ("none", ""):
        return None
    try:
        if entry.kind == "int":
            return int(text)
        if entry.kind == "float":
            value = float(text)
            if math.isnan(value):
                raise ValueError("nan")
            return value
        if entry.kind == "bool":
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if entry.kind == "intlist":
            return tuple(int(part) for part in text.replace(" ", "").split(",") if part)
        return text
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {key} (expected {entry.kind})") from None


def _format(key, value):
    if value is None:
        return "none"
    kind = _KEYS[key].kind
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    if kind == "intlist":
        return ",".join(str(v) for v in value)
    return str(value)


def parse_config(text, source="<config>"):
    """Parse ``key = value`` lines into a dict of typed values (no defaults)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        try:
            values[key] = _convert(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return values


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read(), source=str(path))


def parse_override(item):
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    return key, _convert(key, raw)


def _method_values(method):
    probe = apply_method(TrainConfig(), method)
    return {
        "weight.mode": probe.weight_mode,
        "sampler.mode": probe.sampler_mode,
        "mix.mode": probe.mix.mode,
        "loss.family": probe.loss.family,
    }


def _pairs(overrides):
    return [parse_override(o) if isinstance(o, str) else o for o in overrides]


def requested_method(file_values=None, overrides=()):
    """Method name asked for by the file or the overrides (last one wins)."""
    method = (file_values or {}).get("method", "custom")
    for key, value in _pairs(overrides):
        if key == "method":
            method = value
    return method


def resolve(file_values=None, overrides=()):
    """Merge defaults, file values, the method preset and overrides.

    The preset is expanded into the mode keys, so the result always carries
    ``method = custom`` and re-resolves to itself.
    """
    cfg = dict(DEFAULTS)
    cfg.update(file_values or {})
    pairs = _pairs(overrides)
    method = requested_method(file_values, pairs)
    if method != "custom":
        try:
            cfg.update(_method_values(method))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    for key, value in pairs:
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = value
    cfg["method"] = "custom"
    return cfg


def dump_config(cfg, header=None):
    lines = [f"# {line}" for line in (header or "").splitlines()]
    for key in sorted(cfg):
        lines.append(f"{key} = {_format(key, cfg[key])}")
    return "\n".join(lines) + "\n"


def build_train_config(cfg):
    try:
        phase = PhaseSchedule(
            cfg["phase.e0"],
            cfg["phase.e1"],
            cfg["phase.delta"],
            TransformKind(cfg["phase.kind"], cfg["phase.rho"]),
        )
        loss = LossConfig(
            family=cfg["loss.family"],
            gamma=cfg["loss.gamma"],
            s=cfg["loss.s"],
            max_margin=cfg["loss.max_margin"],
            t_threshold=cfg["loss.t"],
            sigma=cfg["loss.sigma"],
            shifted_focus=cfg["loss.shifted_focus"],
        )
        mix = MixConfig(cfg["mix.mode"], cfg["mix.kappa"], cfg["mix.tau"], cfg["mix.beta"])
        return TrainConfig(
            epochs=cfg["train.epochs"],
            batch_size=cfg["train.batch"],
            lr=cfg["train.lr"],
            milestones=cfg["train.milestones"],
            lr_decay=cfg["train.lr_decay"],
            model=cfg["train.model"],
            hidden=cfg["train.hidden"],
            phase=phase,
            weight_mode=cfg["weight.mode"],
            loss=loss,
            sampler_mode=cfg["sampler.mode"],
            sampler_delta=cfg["sampler.delta"],
            mix=mix,
            renormalize=cfg["train.renorm"],
            anneal_rho=cfg["train.anneal_rho"],
            freeze_at=cfg["train.freeze_at"],
            head_frac=cfg["metrics.head_frac"],
            tail_frac=cfg["metrics.tail_frac"],
            seed=cfg["train.seed"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def build_data(cfg):
    """Return ``(train, validation)`` for a resolved configuration."""
    seed = cfg["data.seed"] if cfg["data.seed"] is not None else cfg["train.seed"]
    kind = cfg["data.kind"]
    if kind == "synth":
        try:
            profile = ImbalanceProfile(cfg["data.profile"], cfg["data.if"], cfg["data.nmax"], cfg["data.c"])
            hist = profile_counts(profile)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        train, validation, _ = synth_gaussians(
            hist, cfg["data.dim"], cfg["data.sep"], cfg["data.noise"], seed, cfg["data.val_per_class"]
        )
    elif kind == "file":
        if not cfg["data.path"]:
            raise ConfigError("data.kind = file needs data.path")
        train = load_tabular(cfg["data.path"], has_header=cfg["data.header"])
        if cfg["data.val_path"]:
            validation = load_tabular(
                cfg["data.val_path"], has_header=cfg["data.header"], num_classes=train.num_classes
            )
        else:
            validation = train
    else:
        raise ConfigError(f"unknown data.kind {kind!r}; expected synth or file")
    if cfg["data.qr"] != 1.0:
        train = apply_qr(train, cfg["data.qr"], seed)
    return train, validation
