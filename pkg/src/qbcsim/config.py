"""Line-oriented key=value configuration files for simulation runs.

The format is deliberately flat: section headers in brackets, one key=value
pair per line, '#' comments.  An [experiment] section may repeat, once per
experiment block; [link_budget] and [output] appear at most once.  Unknown
sections or keys are rejected with file:line diagnostics.

Example::

    [experiment]
    name = sfg-bpsk
    receiver = sfg
    alphabet = bpsk
    N_S = 0.01
    N_Z = 100
    M = 10000
    sweep = 1:3:5
    trials = 100000
    seed = 42

    [output]
    directory = out
    format = csv
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .link import AlphabetKind, LinkBudget
from .montecarlo import ExperimentConfig
from .receivers import ReceiverKind, ReceiverSpec, UnsupportedAlphabetError

DEFAULT_SEED = 20210405  # fixed default; never wall-clock


class ConfigError(ValueError):
    """Schema violation carrying file and line information."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def parse_sweep(text: str) -> tuple[float, ...]:
    """Parse 's_min:s_max:n' into n evenly spaced sweep points."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"sweep must be 's_min:s_max:n', got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ValueError("sweep needs at least one point")
    if n == 1:
        return (lo,)
    if hi <= lo:
        raise ValueError("sweep needs s_max > s_min")
    step = (hi - lo) / (n - 1)
    return tuple(lo + k * step for k in range(n))


@dataclass
class RunConfig:
    """Parsed configuration: named experiments plus optional link budget and output."""

    experiments: list[tuple[str, ExperimentConfig]] = field(default_factory=list)
    link_budget: LinkBudget | None = None
    output_directory: Path = Path(".")
    output_format: str = "csv"


_EXPERIMENT_KEYS = {
    "name",
    "receiver",
    "alphabet",
    "N_S",
    "N_Z",
    "M",
    "sweep",
    "trials",
    "seed",
    "pa_epsilon_sq",
    "sfg_tau",
    "sfg_capture_eps",
    "include_thermal_residual",
}
_LINK_KEYS = {"G_t", "G_r", "f_Hz", "R_t", "R_r", "sigma_Q", "T", "W", "T_s", "varphi_tag"}
_OUTPUT_KEYS = {"directory", "format"}

_RECEIVERS = {k.value: k for k in ReceiverKind}
_ALPHABETS = {
    "pam": AlphabetKind.PAM,
    "ook": AlphabetKind.PAM,
    "bpsk": AlphabetKind.BPSK,
    "qpsk": AlphabetKind.QPSK,
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _build_experiment(path: str, line: int, raw: dict) -> tuple[str, ExperimentConfig]:
    for key in ("receiver", "alphabet", "N_S", "N_Z", "M", "sweep", "trials"):
        if key not in raw:
            raise ConfigError(path, line, f"experiment is missing required key '{key}'")
    try:
        receiver_kind = _RECEIVERS[raw["receiver"].strip().lower()]
    except KeyError:
        raise ConfigError(
            path, raw["_lines"]["receiver"], f"unknown receiver {raw['receiver']!r}"
        ) from None
    try:
        alphabet = _ALPHABETS[raw["alphabet"].strip().lower()]
    except KeyError:
        raise ConfigError(
            path, raw["_lines"]["alphabet"], f"unknown alphabet {raw['alphabet']!r}"
        ) from None
    spec = ReceiverSpec(
        kind=receiver_kind,
        pa_epsilon_sq=float(raw["pa_epsilon_sq"]) if "pa_epsilon_sq" in raw else None,
        sfg_tau=float(raw["sfg_tau"]) if "sfg_tau" in raw else None,
        sfg_capture_eps=float(raw.get("sfg_capture_eps", 1e-3)),
        include_thermal_residual=_parse_bool(raw.get("include_thermal_residual", "false")),
    )
    try:
        cfg = ExperimentConfig(
            alphabet_kind=alphabet,
            receiver=spec,
            N_S=float(raw["N_S"]),
            N_Z=float(raw["N_Z"]),
            M=int(raw["M"]),
            sweep=parse_sweep(raw["sweep"]),
            trials_per_point=int(raw["trials"]),
            master_seed=int(raw.get("seed", DEFAULT_SEED)),
        )
    except UnsupportedAlphabetError:
        raise  # callers distinguish unsupported pairs from schema errors
    except ValueError as exc:
        raise ConfigError(path, line, str(exc)) from None
    name = raw.get("name", f"experiment{line}").strip()
    return name, cfg


def _build_link_budget(path: str, line: int, raw: dict) -> LinkBudget:
    for key in ("G_t", "G_r", "f_Hz", "R_t", "R_r", "sigma_Q", "T", "W", "T_s"):
        if key not in raw:
            raise ConfigError(path, line, f"link_budget is missing required key '{key}'")
    try:
        return LinkBudget(
            G_t=float(raw["G_t"]),
            G_r=float(raw["G_r"]),
            omega=2.0 * math.pi * float(raw["f_Hz"]),
            R_t=float(raw["R_t"]),
            R_r=float(raw["R_r"]),
            sigma_Q=float(raw["sigma_Q"]),
            T=float(raw["T"]),
            W=float(raw["W"]),
            T_s=float(raw["T_s"]),
            varphi_tag=float(raw.get("varphi_tag", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(path, line, str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a run configuration file."""
    path = Path(path)
    text = path.read_text()
    cfg = RunConfig()
    section = None
    section_line = 0
    raw: dict = {}

    def close_section():
        nonlocal raw
        if section == "experiment":
            cfg.experiments.append(_build_experiment(str(path), section_line, raw))
        elif section == "link_budget":
            if cfg.link_budget is not None:
                raise ConfigError(str(path), section_line, "duplicate [link_budget] section")
            cfg.link_budget = _build_link_budget(str(path), section_line, raw)
        elif section == "output":
            cfg.output_directory = Path(raw.get("directory", "."))
            fmt = raw.get("format", "csv").strip().lower()
            if fmt not in ("csv", "json"):
                raise ConfigError(
                    str(path), raw["_lines"].get("format", section_line),
                    f"output format must be csv or json, got {fmt!r}",
                )
            cfg.output_format = fmt
        raw = {}

    allowed = {"experiment": _EXPERIMENT_KEYS, "link_budget": _LINK_KEYS, "output": _OUTPUT_KEYS}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            if section is not None:
                close_section()
            section = line[1:-1].strip().lower()
            section_line = lineno
            if section not in allowed:
                raise ConfigError(str(path), lineno, f"unknown section [{section}]")
            raw = {"_lines": {}}
            continue
        if section is None:
            raise ConfigError(str(path), lineno, "key outside any section")
        if "=" not in line:
            raise ConfigError(str(path), lineno, f"expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed[section]:
            raise ConfigError(str(path), lineno, f"unknown key '{key}' in section [{section}]")
        if key in raw:
            raise ConfigError(str(path), lineno, f"duplicate key '{key}'")
        raw[key] = value
        raw["_lines"][key] = lineno
    if section is not None:
        close_section()
    if not cfg.experiments and cfg.link_budget is None:
        raise ConfigError(str(path), 1, "configuration defines no experiment or link budget")
    return cfg
