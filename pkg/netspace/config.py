import math
import os
from pathlib import Path
from typing import Literal, Optional

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from netspace.errors import ConfigError

# Load environment variables from .env file
load_dotenv()

NETSPACE_THREADS = int(os.getenv("NETSPACE_THREADS", "1"))
NETSPACE_EXACT_CAP = int(os.getenv("NETSPACE_EXACT_CAP", "22"))
NETSPACE_GRID_SIZE = int(os.getenv("NETSPACE_GRID_SIZE", "1024"))
NETSPACE_QUAD_ORDER = int(os.getenv("NETSPACE_QUAD_ORDER", "64"))
NETSPACE_LOG_LEVEL = os.getenv("NETSPACE_LOG_LEVEL", "WARNING")

COMMANDS = ("netnorm", "averaging-table", "dirichlet", "characterize", "verify", "validate-lattice")
EXECUTION_ONLY = {"threads", "out_json", "out_csv", "log_level"}
INEQUALITIES = (
    "hl-torus",
    "ned-torus",
    "norm-chain",
    "su2-converse",
    "embedding",
    "kfunc-upper",
    "characterization",
    "hausdorff-young",
)


def _parse_extended_real(value):
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "+inf", "∞"):
        return math.inf
    return value


class RunConfig(BaseModel):
    """Every knob of a CLI or API run, validated before anything executes."""

    model_config = ConfigDict(extra="forbid")

    command: Literal["netnorm", "averaging-table", "dirichlet", "characterize", "verify", "validate-lattice"]

    # lattice
    lattice_kind: Literal["su2", "integer", "file"] = "su2"
    lattice_file: Optional[str] = None
    l_max: float = 5.0
    dim: int = 1
    radius: int = 8
    lambda_rule: Literal["rank", "abs-m"] = "rank"

    # family
    family: Literal["all-subsets", "progressions", "segments", "explicit"] = "segments"
    family_file: Optional[str] = None
    max_cardinality: Optional[int] = None
    max_count: Optional[int] = None
    segment_measure: Literal["lattice", "lambda"] = "lattice"

    # norms
    p: float = 2.0
    q: float = math.inf
    q1: float = 2.0
    q2: float = math.inf
    p1: float = 2.0
    p2: float = 4.0
    p_prime: Optional[float] = None
    engine: Literal["exact", "heuristic"] = "exact"

    # lattice validation
    beta: float = 0.0
    side: Literal["below", "above"] = "below"

    # dirichlet / characterization
    frontend: Optional[Literal["torus", "su2"]] = None
    members: Optional[str] = None

    # campaigns
    inequality: Optional[str] = None
    corpus: str = "mixed:20:seed=0"
    bandwidth: int = 16
    trials: int = 1000
    bound: Optional[float] = None
    weight: Literal["definition", "display"] = "definition"
    sizes: Optional[list[float]] = None
    net_file: Optional[str] = None
    seed: int = 0

    # numerics
    grid_size: Optional[int] = None
    quad: Optional[int] = None

    # execution and output
    threads: int = NETSPACE_THREADS
    out_json: Optional[str] = None
    out_csv: Optional[str] = None
    timings: bool = False
    log_level: str = NETSPACE_LOG_LEVEL

    @field_validator("q", "q1", "q2", "p", "p1", "p2", "p_prime", mode="before")
    @classmethod
    def _extended_reals(cls, value):
        return _parse_extended_real(value)

    @field_validator("p", "p1", "p2")
    @classmethod
    def _exponent_at_least_one(cls, value):
        if not 1.0 <= value < math.inf:
            raise ValueError(f"exponent must satisfy 1 <= p < inf, got {value}")
        return value

    @field_validator("q", "q1", "q2")
    @classmethod
    def _secondary_exponent(cls, value):
        if value < 1.0:
            raise ValueError(f"secondary exponent must satisfy 1 <= q <= inf, got {value}")
        return value

    @field_validator("threads", "bandwidth", "trials", "grid_size", "quad", "max_cardinality", "max_count", "radius", "dim")
    @classmethod
    def _positive(cls, value):
        if value is not None and value < 1:
            raise ValueError(f"must be a positive integer, got {value}")
        return value

    @field_validator("inequality")
    @classmethod
    def _known_inequality(cls, value):
        if value is not None and value not in INEQUALITIES:
            raise ValueError(f"unknown inequality '{value}', choose one of {', '.join(INEQUALITIES)}")
        return value

    @model_validator(mode="after")
    def _combinations(self):
        if self.q1 > self.q2:
            raise ValueError(f"--q1 ({self.q1}) must not exceed --q2 ({self.q2})")
        if self.p1 >= self.p2:
            raise ValueError(f"--p1 ({self.p1}) must be smaller than --p2 ({self.p2})")
        if self.lattice_kind == "file" and not self.lattice_file:
            raise ValueError("--kind file needs --lattice <path.json>")
        if self.family == "explicit" and not self.family_file:
            raise ValueError("--family explicit needs --family-file <path.json>")
        if 2 * self.l_max != int(2 * self.l_max) or self.l_max < 0:
            raise ValueError(f"--lmax must be a nonnegative half-integer, got {self.l_max}")
        if self.command == "verify" and self.inequality is None:
            raise ValueError("verify needs --inequality")
        if self.command == "dirichlet" and not self.members:
            raise ValueError("dirichlet needs --members <label,label,...>")
        if self.command == "validate-lattice" and self.beta == -1.0:
            raise ValueError("--beta -1 is excluded (the density condition needs beta != -1)")
        return self

    def echo(self) -> dict:
        """
        Effective configuration as JSON-safe data (infinities spelled 'inf').

        Execution-only settings (threads, output paths, log level) are left out.
        """
        dumped = self.model_dump(exclude=EXECUTION_ONLY)
        return {key: ("inf" if isinstance(value, float) and math.isinf(value) else value) for key, value in dumped.items()}


def load_config_file(path) -> dict:
    """
    Read run settings from a TOML file.

    Args:
        path (str | Path): TOML file; keys may sit at top level or under a [netspace] table.

    Returns:
        dict: Raw settings with dashes in keys normalised to underscores.
    """
    try:
        with open(Path(path), "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config file {path} is not valid TOML: {e}")
    table = raw.get("netspace", raw)
    return {key.replace("-", "_"): value for key, value in table.items()}


def resolve_config(cli_values: dict, file_values: Optional[dict] = None) -> RunConfig:
    """
    Merge settings with precedence CLI flags > config file > defaults.

    Args:
        cli_values (dict): Values given on the command line (None means "not given").
        file_values (dict): Values read from the TOML config file.

    Returns:
        RunConfig: Validated configuration.
    """
    merged = dict(file_values or {})
    merged.update({key: value for key, value in cli_values.items() if value is not None})
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(part) for part in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"invalid configuration: {problems}")
