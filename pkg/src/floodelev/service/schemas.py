"""Request/response models for the JSON analysis service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

HOUSE_VALUE_BOUNDS = (10_000.0, 1_000_000.0)
HOUSE_SIZE_BOUNDS = (100.0, 5_000.0)
FLOOR_BOUNDS = (-10.0, 0.0)


class HouseIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    value: float = Field(gt=0, description="structure value, USD")
    size_sqft: float = Field(gt=0, description="footprint, square feet")
    floor_rel_bfe: float = Field(
        le=0, description="lowest floor minus BFE, feet (<= 0 when at risk)")
    label: str = ""

    def out_of_range(self) -> list[str]:
        """Fields outside the calibrated exposure-pool bounds (not an error)."""
        out = []
        if not HOUSE_VALUE_BOUNDS[0] <= self.value <= HOUSE_VALUE_BOUNDS[1]:
            out.append("value")
        if not HOUSE_SIZE_BOUNDS[0] <= self.size_sqft <= HOUSE_SIZE_BOUNDS[1]:
            out.append("size_sqft")
        if not FLOOR_BOUNDS[0] <= self.floor_rel_bfe <= FLOOR_BOUNDS[1]:
            out.append("floor_rel_bfe")
        return out


class RangesIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bcr_min: float = 1.0
    total_ratio_max: float = Field(default=0.75, gt=0)
    reliability_min: float = Field(default=0.5, ge=0, le=1)


class AnalyzeOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["deep", "fixed"] = "deep"
    damage_model: Literal["HAZUS", "JRC"] = "HAZUS"
    discount_model: Literal["random_walk", "mean_reverting",
                            "background_trend"] = "background_trend"
    ensemble_size: int = Field(default=2000, ge=100)
    seed: int = Field(description="required for reproducible what-ifs")
    ranges: RangesIn = RangesIn()


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    house: HouseIn
    options: AnalyzeOptions


class StrategyOut(BaseModel):
    strategy: str
    h: float
    feasible: bool
    upfront: float
    upfront_ratio: float
    expected_total: float
    expected_total_ratio: float
    total_ratio_q05: float
    total_ratio_q95: float
    expected_bcr: Optional[float]
    expected_reliability: float
    joint_robustness: float
    ignoring_total_ratio: float
    ignoring_bcr: Optional[float]
    ignoring_reliability: float


class CurvePoint(BaseModel):
    h: float
    total_ratio_mean: float
    total_ratio_q05: float
    total_ratio_q95: float
    bcr_mean: Optional[float]
    reliability_mean: float
    upfront_ratio: float
    joint_robustness: float
    reliability_robustness: float
    passes_cb_test: bool
    on_pareto_front: bool


class Workload(BaseModel):
    """Deterministic compute metadata (no wall-clock fields: responses for
    identical requests are byte-identical)."""

    ensemble_size: int
    requested_ensemble_size: int
    capped: bool
    n_grid: int
    engine_version: str
    artifact_hash: str


class AnalyzeResponse(BaseModel):
    bfe: float
    house_out_of_range: list[str]
    h_opt_considering: float
    h_opt_ignoring: float
    fema_h: float
    fema_feasible: bool
    strategies: list[StrategyOut]
    curve: list[CurvePoint]
    pareto_front_h: list[float]
    workload: Workload


class ReturnLevelOut(BaseModel):
    period: float
    map_level: float
    mean_level: float
    q05: float
    q95: float


class HazardSummaryResponse(BaseModel):
    bfe: float
    return_levels: list[ReturnLevelOut]


class MetaResponse(BaseModel):
    engine_version: str
    config_hash: str
    artifact_hash: str
    posterior_size: int
    posterior_seed: int
    acceptance_rate: float
    discount_models: list[str]
    default_ensemble: int
    max_ensemble: int
