"""
Subcomandos de verificación de núcleos: kernel-check, sandwich
"""

import logging
import math

from app.core.intersections import self_intersections
from app.core.kernels import kappa_phi, row_mean, sandwich
from app.core.surface import get_surface, liouville_sample
from app.core.utils import derive_seed, make_rng
from app.db.models import ExperimentConfig, SummaryStats
from app.db.storage import ResultStore
from app.stats.ensemble import build_kernel_config, trace_random
from app.stats.ergodic import bracket_average

logger = logging.getLogger(__name__)

MAX_Z = 3.0
SANDWICH_TOL = 1e-8
BRACKET_SEGMENTS = 200
BRACKET_LENGTH = 1.0


def _z_score(gap: float, std_error: float) -> float:
    if std_error > 0.0:
        return gap / std_error
    return 0.0 if gap == 0.0 else math.inf


def run_kernel_check(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    """Identidad de la media por filas: ∫ H_δ(u, ·) dν_L = δ²κ_φ para cada u"""
    spec = get_surface(config.surface)
    cfg = build_kernel_config(config)
    rng = make_rng(derive_seed(config.master_seed, 0))
    kappa = kappa_phi(cfg.phi, spec)
    target = cfg.delta ** 2 * kappa
    logger.info(f"🚀 kernel-check: δ = {cfg.delta}, δ²κ_φ = {target:.6g}, {config.probes} vectores u")

    # 1. Estimaciones por fila
    rows = []
    for i in range(config.probes):
        u = liouville_sample(rng, spec)
        estimate = row_mean(u, cfg, config.samples, rng)
        z = _z_score(estimate.estimate - target, estimate.std_error)
        rows.append((i, u.base.z.real, u.base.z.imag, u.dir, estimate.estimate, estimate.std_error, z))
    store.write_table("kernel_check.csv", ["probe", "u_re", "u_im", "u_dir", "row_mean", "std_error", "z"], rows)

    # 2. Comparaciones por pares
    pairwise = 0.0
    for a in range(len(rows)):
        for b in range(a + 1, len(rows)):
            pairwise = max(pairwise, abs(_z_score(rows[a][4] - rows[b][4], math.hypot(rows[a][5], rows[b][5]))))

    # 3. Corchete de dos segmentos
    alpha = trace_random(rng, spec, BRACKET_LENGTH, "Corchete")
    betas = [trace_random(rng, spec, BRACKET_LENGTH, "Corchete") for _ in range(BRACKET_SEGMENTS)]
    bracket = bracket_average(alpha, betas, cfg.phi, spec)

    max_z = max(abs(row[6]) for row in rows)
    values = {
        "delta": cfg.delta,
        "kappa_phi": kappa,
        "target_delta2_kappa": target,
        "samples": config.samples,
    }
    for row in rows:
        values[f"row_mean_{row[0]}"] = row[4]
        values[f"row_mean_se_{row[0]}"] = row[5]
    values.update({
        "max_abs_z": max_z,
        "max_pairwise_z": pairwise,
        "bracket_mean": bracket.mean,
        "bracket_se": bracket.std_error,
        "bracket_target": bracket.target,
    })
    return SummaryStats(values=values, passed=max_z < MAX_Z and pairwise < MAX_Z)


def run_sandwich(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    """
    Cotas inferior y superior de N_φ(γ[0, T]) para cada δ de `deltas`

    Cada traza j usa la misma semilla para todos los δ, así las brechas son comparables. Las
    cotas, N_φ y la cota de la brecha salen de los cruces de una única traza de γ[−2δ, T + 2δ].
    """
    spec = get_surface(config.surface)
    base = build_kernel_config(config)
    horizon = config.trace_time
    rows, values = [], {"trace_time": horizon, "traces": config.traces}
    gaps = []
    violations = 0
    gap_violations = 0

    for delta in sorted(config.deltas, reverse=True):
        cfg = base.with_delta(delta)
        gap_total = []
        for j in range(config.traces):
            rng = make_rng(derive_seed(config.master_seed, j))
            wide = trace_random(rng, spec, horizon + 4.0 * delta, f"Sándwich δ={delta} traza {j}")
            bounds = sandwich(wide, cfg, config.quad_step, self_intersections(wide, spec))
            if bounds.lower > bounds.n_phi + SANDWICH_TOL or bounds.upper < bounds.n_phi - SANDWICH_TOL:
                violations += 1
                logger.warning(
                    f"⚠️ Violación en δ={delta}, traza {j}: {bounds.lower} ≤ {bounds.n_phi} ≤ {bounds.upper}"
                )
            if bounds.upper - bounds.lower > bounds.outer - bounds.inner + SANDWICH_TOL:
                gap_violations += 1
                logger.warning(f"⚠️ Brecha mayor que N_φ exterior − interior en δ={delta}, traza {j}")
            gap_total.append((bounds.upper - bounds.lower) / horizon)
            rows.append((delta, j, bounds.lower, bounds.n_phi, bounds.upper, bounds.inner, bounds.outer))
        mean_gap = math.fsum(gap_total) / len(gap_total)
        gaps.append(mean_gap)
        values[f"mean_gap_over_T_delta{delta:g}"] = mean_gap

    store.write_table("sandwich.csv", ["delta", "trace", "lower", "N_phi", "upper", "N_phi_inner", "N_phi_outer"], rows)
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    values["violations"] = violations
    values["gap_bound_violations"] = gap_violations
    values["gap_monotone"] = monotone
    logger.info(f"📊 Sándwich: {violations} violaciones, brechas {gaps}")
    return SummaryStats(values=values, passed=violations == 0 and gap_violations == 0 and monotone)


COMMANDS = {
    "kernel-check": run_kernel_check,
    "sandwich": run_sandwich,
}
