"""Engine configuration: every threshold in one place, loadable from YAML."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .assignment import EligibilityConfig
from .familiarity import FamiliarityConfig


@dataclass
class PmfConfig:
    d: int = 8
    lambda_w: float = 0.05
    lambda_l: float = 0.05
    learning_rate: float = 0.005
    max_iters: int = 5000
    tol: float = 1e-8
    seed: int = 0


@dataclass
class ServiceConfig:
    eta_confidence: float = 0.8   # auto-eval resolution threshold
    tau_agree: float = 0.8        # pairwise Jaccard for candidate agreement
    eta_stop: float = 0.6         # early-stop vote fraction of k
    m_min: int = 3                # early-stop absolute vote floor
    truth_cell_km: float = 0.5    # OD spatial bucket size
    truth_ttl_days: float = 30.0
    snap_radius_km: float = 0.3
    relax_min_size: bool = False
    selection_algorithm: str = "greedy"


@dataclass
class EngineConfig:
    familiarity: FamiliarityConfig = field(default_factory=FamiliarityConfig)
    eligibility: EligibilityConfig = field(default_factory=EligibilityConfig)
    pmf: PmfConfig = field(default_factory=PmfConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        return cls(
            familiarity=FamiliarityConfig(**data.get("familiarity", {})),
            eligibility=EligibilityConfig(**data.get("eligibility", {})),
            pmf=PmfConfig(**data.get("pmf", {})),
            service=ServiceConfig(**data.get("service", {})),
        )

    def dump(self, path: str | Path) -> None:
        data = {
            "familiarity": asdict(self.familiarity),
            "eligibility": asdict(self.eligibility),
            "pmf": asdict(self.pmf),
            "service": asdict(self.service),
        }
        with open(path, "w") as fh:
            yaml.safe_dump(data, fh, sort_keys=False)
