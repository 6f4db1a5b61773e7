"""
Subcomandos de ensamble: slln, scaling, clt
"""

import logging

from app.core.errors import PreconditionError
from app.db.models import ExperimentConfig, SummaryStats
from app.db.storage import ResultStore
from app.stats.analysis import (
    CLT_MIN_REPLICAS,
    SCALING_MIN_REPLICAS,
    SCALING_MIN_TIMES,
    default_t_star,
    global_fluctuation_report,
    localized_clt,
    scaling_exponents,
    slln_report,
    summarize,
)
from app.stats.ensemble import run_ensemble

logger = logging.getLogger(__name__)


def run_slln(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    """Constantes de la ley fuerte"""
    # 1. Ensamble
    records = run_ensemble(config)
    store.write_records(records)

    # 2. Reporte
    report = slln_report(records, config)
    store.write_summary(report.rows)
    return report


def run_scaling(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    """Exponentes de escala de Var N_φ y Var N_{φ;f}"""
    # 1. Validar antes de simular
    if len(config.t_grid) < SCALING_MIN_TIMES:
        raise PreconditionError(f"scaling requiere al menos {SCALING_MIN_TIMES} tiempos en t_grid")
    if config.replicas < SCALING_MIN_REPLICAS:
        raise PreconditionError(f"scaling requiere al menos {SCALING_MIN_REPLICAS} réplicas")

    # 2. Ensamble
    records = run_ensemble(config)
    store.write_records(records)

    # 3. Ajustes
    report = scaling_exponents(records, config)
    store.write_summary(report.rows)
    return report


def run_clt(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    """TCL localizado en t_star y momentos de las fluctuaciones globales"""
    # 1. Validar antes de simular
    if config.replicas < CLT_MIN_REPLICAS:
        raise PreconditionError(f"clt requiere al menos {CLT_MIN_REPLICAS} réplicas")
    t_star = default_t_star(config)
    if t_star not in config.t_grid:
        raise PreconditionError(f"t_star = {t_star} no está en t_grid {config.t_grid}")

    # 2. Ensamble
    records = run_ensemble(config)
    store.write_records(records)
    store.write_summary(summarize(records))

    # 3. Normalidad y momentos descriptivos
    local = localized_clt(records, config, t_star)
    fluctuations = global_fluctuation_report(records, config, t_star)
    return SummaryStats(values={**local.values, **fluctuations.values}, passed=local.passed)


COMMANDS = {
    "slln": run_slln,
    "scaling": run_scaling,
    "clt": run_clt,
}
