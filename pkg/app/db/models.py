import math
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from app.config import settings
from app.core.errors import ConfigurationError
from app.core.surface import get_surface


# ============================================
# MODELOS DE CONFIGURACIÓN
# ============================================

Subcommand = Literal[
    "slln", "scaling", "clt", "kernel-check", "sandwich", "mixing", "counterexample", "trace-dump"
]

EXPERIMENT_SUBCOMMANDS = (
    "slln", "scaling", "clt", "kernel-check", "sandwich", "mixing", "counterexample", "trace-dump"
)


class ExperimentConfig(BaseModel):
    surface: str = "bolza"
    t_grid: List[float] = Field(default_factory=lambda: [100.0, 200.0, 400.0, 800.0])
    replicas: int = Field(64, ge=2)
    delta: float = Field(0.1, gt=0)
    alpha: float = Field(0.3, gt=0, lt=math.pi / 2)
    rho: float = Field(0.5, gt=0)
    f_center_re: float = 0.0
    f_center_im: float = 0.0
    f_radius: float = Field(0.2, gt=0)
    f_height: float = Field(1.0, ge=0)  # 0 anula el localizador
    master_seed: Optional[int] = Field(None, ge=0, lt=2 ** 64, alias="seed")
    output: str = Field(default_factory=lambda: settings.output_dir)

    # Parámetros por subcomando
    t_star: Optional[float] = Field(None, gt=0)
    samples: int = Field(100000, ge=100)  # Monte Carlo de kernel-check
    probes: int = Field(5, ge=2)  # vectores u de kernel-check
    traces: int = Field(100, ge=1)  # trazas de sandwich y mixing
    trace_time: float = Field(100.0, gt=0)  # T de sandwich y trace-dump
    deltas: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05])
    quad_step: Optional[float] = Field(None, gt=0)
    lags: List[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    n_steps: int = Field(1000, ge=1)
    starts: int = Field(10000, ge=100)  # arranques de Liouville en mixing

    class Config:
        populate_by_name = True

    @field_validator("t_grid")
    @classmethod
    def validate_t_grid(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("t_grid vacío")
        if any(t <= 0 for t in value):
            raise ValueError("todos los tiempos de t_grid deben ser positivos")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("t_grid debe ser estrictamente creciente")
        return value

    @model_validator(mode="after")
    def validate_kernel(self) -> "ExperimentConfig":
        try:
            spec = get_surface(self.surface)
        except ConfigurationError as e:
            raise ValueError(f"surface: {e}")
        if self.delta > 0.5 * self.rho:
            raise ValueError(f"delta = {self.delta} excede rho/2 = {0.5 * self.rho}")
        if self.rho > 0.5 * spec.systole_lower_bound:
            raise ValueError(f"rho = {self.rho} excede sístole/2 = {0.5 * spec.systole_lower_bound:.6f}")
        if any(d <= 0 or d > 0.5 * self.rho for d in self.deltas):
            raise ValueError(f"deltas {self.deltas} fuera de (0, rho/2]")
        return self

    @property
    def max_time(self) -> float:
        return self.t_grid[-1]

    @property
    def f_center(self) -> complex:
        return complex(self.f_center_re, self.f_center_im)


class CommandSpec(BaseModel):
    subcommand: Subcommand
    config: ExperimentConfig


# ============================================
# MODELOS DE RESULTADOS
# ============================================

class ReplicaRecord(BaseModel):
    replica: int = Field(..., ge=0)
    seed: int
    u0_re: float
    u0_im: float
    u0_dir: float
    t: List[float]
    N: List[int]
    N_phi: List[float]
    N_phi_f: List[float]
    wall_ms: float = 0.0

    @model_validator(mode="after")
    def validate_monotone(self) -> "ReplicaRecord":
        if any(b < a for a, b in zip(self.N, self.N[1:])):
            raise ValueError(f"N decreciente en la réplica {self.replica}: {self.N}")
        return self


class SummaryRow(BaseModel):
    t: float
    count: int
    mean_N: float
    var_N: float = Field(..., ge=0)
    se_N: float
    mean_Nphi: float
    var_Nphi: float = Field(..., ge=0)
    se_Nphi: float
    mean_Nphif: float
    var_Nphif: float = Field(..., ge=0)
    se_Nphif: float


ReportValue = Union[float, int, str, bool]


class SummaryStats(BaseModel):
    rows: List[SummaryRow] = Field(default_factory=list)
    values: Dict[str, ReportValue] = Field(default_factory=dict)
    passed: Optional[bool] = None  # None: sin umbral de aceptación
