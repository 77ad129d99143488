"""Scenario configuration: one flat record of every physical and grid parameter."""
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .intensity import DetectorModel
from .toa import TimeGrid
from .wavetrain import TrainParams

MIN_SAMPLES_PER_WIDTH = 10


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """Defaults reproduce the ten-packet comparison of the exponential models.

    ``t_max`` and ``n_steps`` left as ``None`` resolve to (N+1) tau0 and
    200 N tau0 v / sigma.
    """

    N: int = 10
    sigma: float = 5.0
    L: float = 50.0
    v: float = 1.0
    epsilon: float = 0.01
    lambda0: float = 2.0
    lambda_prime: float = 0.01
    dL: float = 2.5
    dt_jn: float = 0.5
    t_max: Optional[float] = None
    n_steps: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.N, int) or isinstance(self.N, bool):
            raise ConfigError("N must be an integer")
        if self.n_steps is not None and (not isinstance(self.n_steps, int) or isinstance(self.n_steps, bool)):
            raise ConfigError("n_steps must be an integer")
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None:
                continue
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ConfigError(f"{f.name} must be a finite number")
        try:
            self.train()
            self.detector()
            self.grid()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def train(self):
        return TrainParams.build(self.N, self.sigma, self.L, self.v, self.epsilon)

    def detector(self):
        return DetectorModel(L=self.L, lambda0=self.lambda0, lambda_prime=self.lambda_prime,
                             dL=self.dL, dt_jn=self.dt_jn)

    def grid(self):
        default = TimeGrid.for_train(self.train())
        t_max = default.t_max if self.t_max is None else float(self.t_max)
        n_steps = default.n_steps if self.n_steps is None else self.n_steps
        return TimeGrid(t_max, n_steps)

    def resolved(self):
        """Copy with grid defaults materialised."""
        g = self.grid()
        return replace(self, t_max=g.t_max, n_steps=g.n_steps)

    def to_dict(self):
        return asdict(self)

    def samples_per_width(self):
        return self.grid().samples_per_width(self.train())

    def check_resolution(self):
        spw = self.samples_per_width()
        if spw < MIN_SAMPLES_PER_WIDTH:
            raise ConfigError(f"grid under-resolved: {spw:.3g} samples per sigma/v "
                              f"(need >= {MIN_SAMPLES_PER_WIDTH})")

    @classmethod
    def from_dict(cls, data, base=None):
        """Overlay ``data`` on ``base`` (default: the class defaults); unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        base = base if base is not None else cls()
        vals = asdict(base)
        vals.update(data)
        return cls(**vals)

    @classmethod
    def from_json(cls, path, base=None):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data, base=base)


FIG3 = ScenarioConfig()
# the five-packet comparison of flux and semiclassical densities; the finer
# grid resolves the semiclassical comb, whose peaks are ~0.06 wide here
FIG2 = ScenarioConfig(N=5, epsilon=0.05, n_steps=100_000)
