import os
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Ejecución
    threads: int = os.cpu_count() or 1  # GEOFLUX_THREADS
    output_dir: str = "./resultados"
    log_level: str = "INFO"
    record_timing: bool = False  # wall_ms real en records.csv

    # Tolerancias geométricas
    isometry_tol: float = 1e-10
    eps_end: float = 1e-9  # fracción de cuerda
    eps_time: float = 1e-6  # unidades de tiempo
    dedup_tol: float = 1e-9
    vertex_tol: float = 1e-10
    side_tol: float = 1e-12
    reduce_max_iter: int = 10000

    # Experimentos
    vertex_retries: int = 10
    bootstrap_resamples: int = 200
    lilliefors_simulations: int = 2000
    sandwich_step_divisor: int = 64  # h = δ / divisor

    class Config:
        env_file = ".env"
        env_prefix = "GEOFLUX_"
        case_sensitive = False
        extra = "ignore"


settings = Settings()
