"""
Motor de réplicas
Una traza por réplica hasta el mayor tiempo de la malla; conteos por restricción
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, List, Optional

import numpy as np

from app.config import settings
from app.core.errors import HarnessError, VertexHitError
from app.core.intersections import restrict_crossings, self_intersections, weighted_counts
from app.core.kernels import KernelConfig, build_localizer, build_mollifier, build_phi
from app.core.surface import SurfaceSpec, get_surface, liouville_sample
from app.core.tracer import GeodesicTrace, trace
from app.core.utils import derive_seed, make_rng
from app.db.models import ExperimentConfig, ReplicaRecord

logger = logging.getLogger(__name__)


def build_kernel_config(config: ExperimentConfig, delta: Optional[float] = None) -> KernelConfig:
    """KernelConfig con φ, p y el localizador descritos por la configuración"""
    spec = get_surface(config.surface)
    localizer = build_localizer(config.f_center, config.f_radius, spec)
    if config.f_height != 1.0:
        localizer = localizer.scaled(config.f_height)
    return KernelConfig(
        config.delta if delta is None else delta,
        build_phi(config.alpha),
        build_mollifier(),
        config.rho,
        spec,
        localizer,
    )


def trace_random(rng: np.random.Generator, spec: SurfaceSpec, total_time: float, label: str = "") -> GeodesicTrace:
    """
    Muestrear u0 de Liouville y trazar γ[0, T], reintentando si la trayectoria toca un vértice

    Raises:
        HarnessError: si se agotan los reintentos por vértice
    """
    for attempt in range(settings.vertex_retries + 1):
        u0 = liouville_sample(rng, spec)
        try:
            return trace(u0, total_time, spec)
        except VertexHitError as e:
            logger.warning(f"⚠️ {label} intento {attempt + 1}: {e}")
    raise HarnessError(f"{label}: {settings.vertex_retries} reintentos por vértice agotados")


def run_replica(config: ExperimentConfig, index: int) -> ReplicaRecord:
    """
    Ejecutar una réplica

    Si la trayectoria toca un vértice se vuelve a muestrear u0 con el mismo generador.

    Raises:
        HarnessError: si se agotan los reintentos por vértice
    """
    started = time.perf_counter()
    spec = get_surface(config.surface)
    cfg = build_kernel_config(config)
    seed = derive_seed(config.master_seed, index)
    rng = make_rng(seed)

    geodesic = trace_random(rng, spec, config.max_time, f"Réplica {index} (seed {seed})")
    u0 = geodesic.u0
    crossings = self_intersections(geodesic, spec)
    counts = [weighted_counts(restrict_crossings(crossings, t), cfg.phi, cfg.f) for t in config.t_grid]
    wall_ms = 1000.0 * (time.perf_counter() - started) if settings.record_timing else 0.0
    return ReplicaRecord(
        replica=index,
        seed=seed,
        u0_re=u0.base.z.real,
        u0_im=u0.base.z.imag,
        u0_dir=u0.dir,
        t=list(config.t_grid),
        N=[c.N for c in counts],
        N_phi=[c.N_phi for c in counts],
        N_phi_f=[c.N_phi_f for c in counts],
        wall_ms=wall_ms,
    )


def _run_replica_task(payload) -> ReplicaRecord:
    config, index = payload
    return run_replica(config, index)


def run_ensemble(
    config: ExperimentConfig,
    indices: Optional[Iterable[int]] = None,
    workers: Optional[int] = None,
) -> List[ReplicaRecord]:
    """
    Ejecutar las réplicas `indices` (por defecto 0..replicas−1) en paralelo

    El resultado queda ordenado por índice de réplica y no depende del número de procesos.
    """
    if config.master_seed is None:
        raise HarnessError("run_ensemble requiere master_seed")
    indices = list(range(config.replicas) if indices is None else indices)
    workers = min(workers or settings.threads, len(indices)) or 1
    logger.info(f"🚀 {len(indices)} réplicas, t_max = {config.max_time}, {workers} procesos")

    if workers == 1:
        records = [run_replica(config, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_replica_task, [(config, i) for i in indices], chunksize=1))

    records.sort(key=lambda r: r.replica)
    logger.info(f"✅ {len(records)} réplicas completadas")
    return records
