"""Experiment configuration files.

Grammar: `key = value` lines, `[section]` headers, `#` comments, lists as
comma-separated decimals. Keys before the first header are top level;
overrides name keys as `section.key`.

    command = cesaro
    seed = 7

    [group]
    p = 2
    exponents = 1

    [kernel]
    family = product
    theta = 0.3
"""

from __future__ import annotations

import hashlib
import logging
import re
from pathlib import Path
from typing import Annotated
from typing import Any
from typing import Literal

from pydantic import BaseModel
from pydantic import BeforeValidator
from pydantic import ConfigDict
from pydantic import Discriminator
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_validator

from group_automata.automaton.core import AutomatonParams
from group_automata.cesaro.output import Mode
from group_automata.chains.kernels import Kernel
from group_automata.chains.kernels import MarkovKernel
from group_automata.chains.kernels import MixtureKernel
from group_automata.chains.kernels import ProductKernel
from group_automata.chains.sampler import DEFAULT_TAIL_TOLERANCE
from group_automata.errors import ConfigError
from group_automata.errors import GroupAutomataError
from group_automata.group.core import GroupSpec
from group_automata.renewal.laws import GeometricLaw
from group_automata.renewal.laws import InterarrivalLaw
from group_automata.renewal.laws import PmfLaw
from group_automata.renewal.laws import TwoPointLaw

logger = logging.getLogger(__name__)

MAX_FRACTION_DIGITS = 12

_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w-]*)\s*\]$")
_KEY = re.compile(r"^[A-Za-z_][\w-]*$")
_DECIMAL = re.compile(r"^[+-]?\d*\.(\d+)$")


def split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


def check_decimal(value: Any) -> Any:
    if isinstance(value, str):
        match = _DECIMAL.match(value.strip())
        if match and len(match.group(1)) > MAX_FRACTION_DIGITS:
            raise ValueError(f"{value} has more than {MAX_FRACTION_DIGITS} fractional digits")
    return value


def check_decimals(value: Any) -> Any:
    value = split_list(value)
    if isinstance(value, list):
        for item in value:
            check_decimal(item)
    return value


IntList = Annotated[list[int], BeforeValidator(split_list)]
Probability = Annotated[float, BeforeValidator(check_decimal)]
ProbabilityList = Annotated[list[float], BeforeValidator(check_decimals)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GroupConfig(_Section):
    p: int = 2
    exponents: IntList = Field(default_factory=lambda: [1])

    def build(self) -> GroupSpec:
        return GroupSpec(p=self.p, exponents=tuple(self.exponents))


class AutomatonConfig(_Section):
    mu: int = 1
    nu: int = 1
    exploratory: bool = False

    def build(self, spec: GroupSpec) -> AutomatonParams:
        return AutomatonParams(mu=self.mu, nu=self.nu, spec=spec, exploratory=self.exploratory)


class ProductKernelConfig(_Section):
    family: Literal["product"]
    theta: Probability | None = None
    pi: ProbabilityList | None = None
    uniform: bool = False

    @model_validator(mode="after")
    def check_choice(self) -> ProductKernelConfig:
        chosen = sum([self.theta is not None, self.pi is not None, self.uniform])
        if chosen != 1:
            raise ValueError("product kernel needs exactly one of theta, pi, uniform")
        return self

    def build(self, spec: GroupSpec) -> Kernel:
        if self.uniform:
            return ProductKernel.uniform(spec)
        if self.theta is not None:
            if spec.q != 2:
                raise ValueError(f"theta describes a law on Z_2, group has q={spec.q}")
            return ProductKernel(spec, [1.0 - self.theta, self.theta])
        return ProductKernel(spec, self.pi or [])


class MarkovKernelConfig(_Section):
    family: Literal["markov"]
    order: int = 1
    stay: Probability | None = None
    transition: ProbabilityList | None = None
    """Rows of the transition table, flattened row by row."""

    @model_validator(mode="after")
    def check_choice(self) -> MarkovKernelConfig:
        if (self.stay is None) == (self.transition is None):
            raise ValueError("markov kernel needs exactly one of stay, transition")
        return self

    def build(self, spec: GroupSpec) -> Kernel:
        if self.stay is not None:
            return MarkovKernel.sticky(spec, self.stay, self.order)
        q = spec.q
        flat = self.transition or []
        rows = [flat[i : i + q] for i in range(0, len(flat), q)]
        return MarkovKernel(spec, self.order, rows)


class MixtureKernelConfig(_Section):
    family: Literal["mixture"]
    stay: Probability
    rho: Probability = 0.5
    delta0: Probability = 0.05

    def build(self, spec: GroupSpec) -> Kernel:
        return MixtureKernel.sticky(spec, self.stay, rho=self.rho, delta0=self.delta0)


KernelConfig = Annotated[
    ProductKernelConfig | MarkovKernelConfig | MixtureKernelConfig, Discriminator("family")
]


class GeometricLawConfig(_Section):
    law: Literal["geometric"]
    beta: Probability

    def build(self) -> InterarrivalLaw:
        return GeometricLaw(self.beta)


class TwoPointLawConfig(_Section):
    law: Literal["two-point"]
    a: int
    b: int
    weight: Probability

    def build(self) -> InterarrivalLaw:
        return TwoPointLaw(self.a, self.b, self.weight)


class PmfLawConfig(_Section):
    law: Literal["pmf"]
    masses: ProbabilityList

    def build(self) -> InterarrivalLaw:
        return PmfLaw(self.masses)


RenewalConfig = Annotated[
    GeometricLawConfig | TwoPointLawConfig | PmfLawConfig, Discriminator("law")
]


class RunConfig(_Section):
    mode: Mode = Mode.EXACT
    J: IntList = Field(default_factory=lambda: [0])
    g: IntList | None = None
    M: IntList | None = None
    """Explicit M grid; defaults to powers of 2 up to M_top."""
    M_top: int | None = None
    N: int = 10_000
    m: int = 0
    """Automaton steps applied to a simulated path."""
    trials: int = 2000
    tail_tol: float = DEFAULT_TAIL_TOLERANCE
    past: IntList = Field(default_factory=list)
    cross_check: bool = False
    residual_n: int = 8
    K: int = 32

    def grid(self) -> list[int]:
        if self.M is not None:
            return list(self.M)
        top = self.M_top
        if top is None:
            top = 14 if self.mode is Mode.EXACT else 10
        return [1 << t for t in range(top + 1)]


class DensityConfig(_Section):
    alpha: float = 0.4
    eps: float = 0.2
    eps_prime: float = 0.05
    ell: int = 1
    t_min: int = 8
    t_max: int = 20


class LemmaConfig(_Section):
    m: IntList = Field(default_factory=lambda: [1, 3, 7, 15, 31, 63])
    """Exponents m; each gives the sums (phi^{m+j} x)_0 for j in J."""
    J: IntList = Field(default_factory=lambda: [0])
    M: int = 1 << 20
    eps: float = 0.47
    eps_prime: float = 0.02
    trials: int = 2000


class VerifyConfig(_Section):
    samples: int = 200
    inject_fault: bool = False


Command = Literal["simulate", "cesaro", "regen-stats", "density", "lemma41", "verify"]


class ExperimentConfig(_Section):
    command: Command
    seed: int = 0
    out: str | None = None
    section: str | None = None
    """Restricts `verify` to one group of checks."""
    group: GroupConfig = Field(default_factory=GroupConfig)
    automaton: AutomatonConfig = Field(default_factory=AutomatonConfig)
    kernel: KernelConfig | None = None
    renewal: RenewalConfig | None = None
    experiment: RunConfig = Field(default_factory=RunConfig)
    density: DensityConfig = Field(default_factory=DensityConfig)
    lemma: LemmaConfig = Field(default_factory=LemmaConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)

    @model_validator(mode="after")
    def check_inputs(self) -> ExperimentConfig:
        match self.command:
            case "simulate" | "cesaro" | "lemma41":
                if self.kernel is None:
                    raise ValueError(f"{self.command} needs a [kernel] section")
            case "regen-stats":
                if self.kernel is None and self.renewal is None:
                    raise ValueError("regen-stats needs a [kernel] or a [renewal] section")
        return self

    def digest(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()

    def spec(self) -> GroupSpec:
        try:
            return self.group.build()
        except GroupAutomataError as e:
            raise ConfigError(f"[group]: {e}") from e

    def params(self) -> AutomatonParams:
        try:
            return self.automaton.build(self.spec())
        except GroupAutomataError as e:
            raise ConfigError(f"[automaton]: {e}") from e

    def build_kernel(self) -> Kernel:
        if self.kernel is None:
            raise ConfigError("no [kernel] section")
        try:
            return self.kernel.build(self.spec())
        except (ValueError, GroupAutomataError) as e:
            raise ConfigError(f"[kernel]: {e}") from e

    def build_law(self) -> InterarrivalLaw:
        if self.renewal is None:
            raise ConfigError("no [renewal] section")
        try:
            return self.renewal.build()
        except (ValueError, GroupAutomataError) as e:
            raise ConfigError(f"[renewal]: {e}") from e


Lines = dict[tuple[str, ...], int]


def _read(text: str) -> tuple[dict[str, Any], Lines]:
    data: dict[str, Any] = {}
    lines: Lines = {}
    section: str | None = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = _SECTION.match(line)
        if header:
            section = header.group(1)
            if section in data:
                raise ConfigError(f"section [{section}] appears twice", number)
            data[section] = {}
            lines[(section,)] = number
            continue
        if "=" not in line:
            raise ConfigError(f"expected `key = value` or `[section]`, got {line!r}", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"invalid key {key!r}", number)
        if not value:
            raise ConfigError(f"key {key!r} has no value", number)
        target = data if section is None else data[section]
        path = (key,) if section is None else (section, key)
        if key in target:
            raise ConfigError(f"duplicate key {key!r}", number)
        target[key] = value
        lines[path] = number
    return data, lines


def _line_of(loc: tuple[int | str, ...], lines: Lines) -> int | None:
    parts = [str(part) for part in loc]
    if not parts:
        return None
    head = parts[0]
    for part in parts[1:]:
        if (head, part) in lines:
            return lines[(head, part)]
    return lines.get((head,))


def parse_config(text: str, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Parse and validate a configuration; errors carry the offending line number."""
    data, lines = _read(text)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, name = key.rpartition(".")
        target = data.setdefault(section, {}) if section else data
        if not isinstance(target, dict):
            raise ConfigError(f"cannot override {key}: {section} is not a section")
        target[name] = value
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(f"{where}: {first['msg']}", _line_of(first["loc"], lines)) from e
    logger.debug("Parsed %s config, digest %s", config.command, config.digest())
    return config


def load_config(path: Path, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    return parse_config(text, overrides)
