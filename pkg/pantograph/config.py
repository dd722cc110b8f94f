"""
Run configuration of the command line front end.

Values are layered, lowest precedence first: the model defaults, a flat
``key=value`` file named by ``--config``, then the flags themselves. Keys in the
file are the flag names with either ``-`` or ``_``.
"""
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from pydantic import BaseModel, Field, root_validator, validator

from pantograph.delay_spec import DelaySpec, check_delay_ratios
from pantograph.djm import DEFAULT_DJM_TOL, DEFAULT_MAX_ITER
from pantograph.errors import UsageError
from pantograph.stability import DEFAULT_GRID, Window

logger = logging.getLogger(__name__)


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"


class Engine(str, Enum):
    djm = "djm"
    rk4 = "rk4"


def split_numbers(value: Any, name: str) -> Any:
    """'1,-0.5' -> (1.0, -0.5); malformed tokens are usage errors naming the token"""
    if not isinstance(value, str):
        return value
    numbers = []
    for token in value.split(","):
        try:
            numbers.append(float(token))
        except ValueError:
            raise UsageError(f"malformed number {token.strip()!r} in --{name}") from None
    return tuple(numbers)


class RunConfig(BaseModel):
    command: str
    a: Tuple[float, ...] = ()
    q: Optional[Tuple[float, ...]] = None
    alpha: Optional[float] = Field(None, gt=0)
    x: Optional[float] = None
    x0: Optional[float] = None
    x1: Optional[float] = None
    steps: int = Field(10, ge=1)
    tol: Optional[float] = Field(None, gt=0)
    b: float = Field(1.0, gt=0)
    N: int = Field(512, ge=16)
    engine: Engine = Engine.djm
    compare: bool = False
    rhs: Optional[str] = None
    lipschitz: Optional[Tuple[float, ...]] = None
    bound: Optional[float] = Field(None, gt=0)
    delta: float = Field(1.0, gt=0)
    y0: float = 1.0
    max_iter: int = Field(DEFAULT_MAX_ITER, ge=1)
    djm_tol: float = Field(DEFAULT_DJM_TOL, gt=0)
    re_min: Optional[float] = None
    re_max: Optional[float] = None
    im_max: Optional[float] = Field(None, gt=0)
    grid: int = Field(DEFAULT_GRID, ge=8)
    seed: int = 0
    samples: int = Field(200, ge=1)
    format: OutputFormat = OutputFormat.csv
    verbose: bool = False

    @validator("a", "q", "lipschitz", pre=True)
    def _number_lists(cls, value, field):
        return split_numbers(value, field.name)

    @validator("a", "q", "lipschitz", each_item=True)
    def _finite(cls, value, field):
        if not math.isfinite(value):
            raise ValueError(f"{field.name} entries must be finite, got {value!r}")
        return value

    @validator("q")
    def _delay_ratios(cls, q):
        return None if q is None else check_delay_ratios(q)

    @root_validator(skip_on_failure=True)
    def _consistent_spec(cls, values):
        a, q = values["a"], values["q"]
        if q is not None and a and len(a) != len(q):
            raise ValueError(f"a has {len(a)} entries but q has {len(q)}")
        return values

    @property
    def as_json(self) -> bool:
        return self.format is OutputFormat.json

    @property
    def ratios(self) -> Tuple[float, ...]:
        if self.q is not None:
            return self.q
        if len(self.a) <= 1:
            return (1.0,)
        raise UsageError("--q is required when --a has more than one entry")

    def delay_spec(self) -> DelaySpec:
        if not self.a:
            raise UsageError("--a is required")
        return DelaySpec(a=self.a, q=self.ratios)

    def window(self, default: Window) -> Window:
        """the default window with any of --re-min, --re-max, --im-max applied"""
        overrides = {
            name: getattr(self, name)
            for name in ("re_min", "re_max", "im_max")
            if getattr(self, name) is not None
        }
        return Window(**{**default.dict(), **overrides})

    def require(self, *names: str):
        for name in names:
            if getattr(self, name) is None:
                raise UsageError(f"{self.command} needs --{name.replace('_', '-')}")


def load_config_file(path: Path) -> Dict[str, str]:
    """flat key=value lines; blank lines and # comments are skipped"""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {str(path)!r}: {exc.strerror}") from None
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{number}: expected key=value, got {line!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def build_config(command: str, flags: Mapping[str, Any], config_path: Optional[Path] = None) -> RunConfig:
    """defaults < config file < flags"""
    layered: Dict[str, Any] = {}
    if config_path is not None:
        layered.update(load_config_file(config_path))
        logger.debug("loaded %d settings from %s", len(layered), config_path)
    layered.update({k: v for k, v in flags.items() if v is not None})
    layered["command"] = command
    unknown = set(layered) - set(RunConfig.__fields__)
    if unknown:
        raise UsageError(f"unknown setting(s): {', '.join(sorted(unknown))}")
    return RunConfig(**layered)
