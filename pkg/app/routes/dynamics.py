"""
Subcomandos dinámicos: mixing, counterexample
"""

import logging

from app.core.surface import get_surface
from app.core.utils import derive_seed, make_rng
from app.db.models import ExperimentConfig, SummaryStats
from app.db.storage import ResultStore
from app.stats.ensemble import build_kernel_config
from app.stats.ergodic import bump_observable, correlation_decay, double_average_check, remark_counterexample

logger = logging.getLogger(__name__)

DECAY_LAG = 5.0
DECAY_RATIO = 0.2
OBSERVABLE_RADIUS = 1.0
COUNTEREXAMPLE_TOL = 0.01


def run_mixing(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    """Decaimiento de correlaciones y promedios dobles a lo largo de órbitas"""
    spec = get_surface(config.surface)
    rng = make_rng(derive_seed(config.master_seed, 0))
    g = bump_observable(spec, config.f_center, OBSERVABLE_RADIUS)
    logger.info(f"🚀 mixing: {config.starts} arranques, retardos {config.lags}")

    # 1. Correlaciones y control barajado
    decay = correlation_decay(g, config.lags, spec, config.starts, rng)
    control = correlation_decay(g, config.lags, spec, config.starts, rng, shuffle=True)
    store.write_table(
        "mixing.csv",
        ["lag", "corr", "std_error", "shuffled_corr", "shuffled_std_error"],
        [(d.lag, d.corr, d.std_error, c.corr, c.std_error) for d, c in zip(decay, control)],
    )

    values = {"starts": config.starts}
    for d, c in zip(decay, control):
        values[f"corr_lag{d.lag:g}"] = d.corr
        values[f"corr_se_lag{d.lag:g}"] = d.std_error
        values[f"shuffled_z_lag{d.lag:g}"] = c.corr / c.std_error if c.std_error > 0 else 0.0

    # 2. Promedios dobles
    for name, kwargs in (("product", {}), ("K", {"cfg": build_kernel_config(config)})):
        for row in double_average_check(name, config.t_grid, spec, rng, **kwargs):
            values[f"double_{name}_t{row.t:g}"] = row.empirical
            values[f"double_{name}_gap_t{row.t:g}"] = row.gap
            values[f"double_{name}_target"] = row.target
            if row.mc_target is not None:
                values[f"double_{name}_mc_target"] = row.mc_target
                values[f"double_{name}_mc_se"] = row.mc_std_error

    # 3. Umbral de decaimiento
    by_lag = {d.lag: d for d in decay}
    passed = None
    if DECAY_LAG in by_lag and 0.0 in by_lag:
        passed = abs(by_lag[DECAY_LAG].corr) < DECAY_RATIO * by_lag[0.0].corr
    return SummaryStats(values=values, passed=passed)


def run_counterexample(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    """Producto sesgado: promedio orbital 1 frente a integral producto 0"""
    result = remark_counterexample(config.n_steps, derive_seed(config.master_seed, 0))
    values = {
        "n_steps": config.n_steps,
        "orbit_average": result.orbit_average,
        "product_integral": result.product_integral,
        "control_average": result.control_average,
        "control_target": result.control_target,
    }
    passed = result.orbit_average > 1.0 - COUNTEREXAMPLE_TOL and result.product_integral < COUNTEREXAMPLE_TOL
    return SummaryStats(values=values, passed=passed)


COMMANDS = {
    "mixing": run_mixing,
    "counterexample": run_counterexample,
}
