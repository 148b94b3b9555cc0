"""Flat ``key = value`` experiment configuration.

Example::

    # sweep.cfg
    experiment = sweep
    ansatz = hea
    k = 2
    j_range = 1..11
    stacks = 10
    restarts = 8
    seed = 0

Lines starting with ``#`` or ``;`` are comments. Command-line flags override
values read from the file. ``n`` is always ``k + 1``.
"""

from __future__ import annotations

import configparser
import enum
from dataclasses import dataclass, field, fields
from pathlib import Path

from .ansatz import AnsatzKind, AnsatzLayout
from .linalg import TargetGate, target_from_name
from .trainer import InitMode, OptimizerSettings, StackSchedule
from .variety import Branch


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration (exit status 2)."""


class ExperimentKind(str, enum.Enum):
    COMPILE = "compile"
    SWEEP = "sweep"
    SAMPLE = "sample"
    VERIFY_EXTREMA = "verify-extrema"
    GRADCHECK = "gradcheck"


def parse_range(text: str) -> list[int]:
    """``"1..5"`` -> [1, 2, 3, 4, 5]; ``"3"`` -> [3]; ``"1,3,4"`` -> [1, 3, 4]."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ConfigError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad integer range {text!r}") from None
    if not vals:
        raise ConfigError(f"empty range {text!r}")
    return vals


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


@dataclass
class ExperimentConfig:
    experiment: ExperimentKind = ExperimentKind.COMPILE
    ansatz: AnsatzKind = AnsatzKind.HEA
    wrap: bool = True
    base: str = "X"
    k: int = 2
    k_range: list[int] = field(default_factory=list)
    j: int = 1
    j_range: list[int] = field(default_factory=list)
    stacks: int = 10
    restarts: int = 8
    seed: int = 0
    init: InitMode = InitMode.RANDOM_UNIFORM
    branch: Branch = Branch.HEA_A
    step_size: float = 0.05
    max_iter: int = 2000
    grad_tol: float = 1e-10
    method: str = "adam"
    success_tol: float = 1e-2
    tol_id: float = 1e-3
    stall_window: int = 3
    stop_on_stall: bool = True
    samples: int = 1000
    inject: int = 0
    points: int = 100
    n_range: list[int] = field(default_factory=list)
    perturb: float = 0.0
    cases: int = 200
    h: float = 1e-5
    tol: float = 1e-6
    strict: bool = False
    out: Path = Path("results")

    @property
    def n(self) -> int:
        return self.k + 1

    def layout(self, n: int | None = None) -> AnsatzLayout:
        return AnsatzLayout(self.ansatz, self.n if n is None else n, self.wrap)

    def target(self, k: int | None = None) -> TargetGate:
        return target_from_name(self.base, self.k if k is None else k)

    def schedule(self, j: int | None = None) -> StackSchedule:
        opt = OptimizerSettings(method=self.method, step_size=self.step_size,
                                max_iter=self.max_iter, grad_tol=self.grad_tol)
        return StackSchedule(
            j=self.j if j is None else j, q_max=self.stacks, restarts=self.restarts,
            optimizer=opt, init=self.init, variety_branch=self.branch, seed=self.seed,
            success_tol=self.success_tol, tol_id=self.tol_id,
            stall_window=self.stall_window, stop_on_stall=self.stop_on_stall)

    def validate(self) -> "ExperimentConfig":
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.j < 1 or self.stacks < 1 or self.restarts < 1:
            raise ConfigError("j, stacks and restarts must be >= 1")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.ansatz is AnsatzKind.CHECKERBOARD and self.n < 2:
            raise ConfigError("checkerboard needs n >= 2")
        if self.h <= 0:
            raise ConfigError("h must be positive")
        if self.experiment is ExperimentKind.SWEEP and not self.j_range:
            raise ConfigError("sweep needs a non-empty j_range")
        try:
            self.target()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self


_CONVERTERS = {
    "experiment": ExperimentKind,
    "ansatz": lambda s: AnsatzKind(str(s).lower()),
    "init": lambda s: InitMode(str(s).upper()),
    "branch": lambda s: Branch(str(s).upper()),
    "k_range": parse_range,
    "j_range": parse_range,
    "n_range": parse_range,
    "out": Path,
    "wrap": _bool,
    "stop_on_stall": _bool,
    "strict": _bool,
}


def _convert(name: str, value):
    conv = _CONVERTERS.get(name)
    if conv is None:
        typ = {f.name: f.type for f in fields(ExperimentConfig)}[name]
        conv = {"int": int, "float": float, "str": str}.get(typ, str)
    try:
        return conv(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r} ({exc})") from None


def read_config_text(text: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    return dict(parser["experiment"])


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge file values and CLI overrides (non-``None`` overrides win)."""
    known = {f.name for f in fields(ExperimentConfig)}
    merged: dict = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            name = key.replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            merged[name] = _convert(name, value)
    return ExperimentConfig(**merged)


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values = read_config_text(text)
    return build_config(values, overrides)
