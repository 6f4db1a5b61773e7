"""
Análisis estadístico del ensamble
Constantes de la ley fuerte, exponentes de escala de la varianza, normalidad localizada y
formas cuadráticas gaussianas de referencia
"""

import logging
import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats

from app.config import settings
from app.core.errors import DegenerateDataError, PreconditionError
from app.core.kernels import constant_phi, kappa_phi
from app.core.surface import get_surface
from app.core.utils import derive_seed, make_rng
from app.db.models import ExperimentConfig, ReplicaRecord, SummaryRow, SummaryStats
from app.stats.ensemble import build_kernel_config

logger = logging.getLogger(__name__)

SLLN_TOLERANCE = 0.10
SLLN_MIN_REPLICAS = 32
SLLN_MIN_TIME = 400.0
SCALING_MIN_TIMES = 4
SCALING_MIN_REPLICAS = 100
CLT_MIN_REPLICAS = 200
GLOBAL_SLOPE_RANGE = (1.6, 2.4)
LOCAL_SLOPE_RANGE = (2.6, 3.4)
CLT_MIN_PVALUE = 0.01
CLT_MAX_SKEW = 0.5

# Flujo auxiliar de bootstrap y simulaciones, separado de las réplicas
ANALYSIS_STREAM = 2 ** 32


def analysis_rng(config: ExperimentConfig) -> np.random.Generator:
    return make_rng(derive_seed(config.master_seed or 0, ANALYSIS_STREAM))


def _tag(t: float) -> str:
    return f"t{t:g}"


def counts_matrix(records: Sequence[ReplicaRecord], field: str) -> np.ndarray:
    """Matriz réplicas × tiempos del conteo `field` (N, N_phi o N_phi_f)"""
    if not records:
        raise PreconditionError("Sin registros de réplicas")
    return np.array([getattr(r, field) for r in sorted(records, key=lambda r: r.replica)], dtype=float)


def _time_index(records: Sequence[ReplicaRecord], t_star: float) -> int:
    grid = records[0].t
    for i, t in enumerate(grid):
        if abs(t - t_star) <= 1e-9 * max(1.0, t_star):
            return i
    raise PreconditionError(f"t_star = {t_star} no está en la malla {grid}")


# ============================================
# RESUMEN POR TIEMPO
# ============================================

def _moments(column: np.ndarray) -> Tuple[float, float, float]:
    n = len(column)
    mean = float(np.mean(column))
    var = float(np.var(column, ddof=1)) if n > 1 else 0.0
    return mean, var, math.sqrt(var / n)


def summarize(records: Sequence[ReplicaRecord]) -> List[SummaryRow]:
    """Media, varianza muestral y error estándar de N, N_φ y N_{φ;f} en cada t"""
    matrices = {name: counts_matrix(records, name) for name in ("N", "N_phi", "N_phi_f")}
    rows = []
    for k, t in enumerate(records[0].t):
        mean_n, var_n, se_n = _moments(matrices["N"][:, k])
        mean_p, var_p, se_p = _moments(matrices["N_phi"][:, k])
        mean_f, var_f, se_f = _moments(matrices["N_phi_f"][:, k])
        rows.append(SummaryRow(
            t=t, count=len(records),
            mean_N=mean_n, var_N=var_n, se_N=se_n,
            mean_Nphi=mean_p, var_Nphi=var_p, se_Nphi=se_p,
            mean_Nphif=mean_f, var_Nphif=var_f, se_Nphif=se_f,
        ))
    return rows


def _merge_pair(n_a: int, mean_a: float, var_a: float, n_b: int, mean_b: float, var_b: float) -> Tuple[float, float]:
    n = n_a + n_b
    gap = mean_b - mean_a
    mean = mean_a + gap * n_b / n
    m2 = var_a * (n_a - 1) + var_b * (n_b - 1) + gap * gap * n_a * n_b / n
    return mean, m2 / (n - 1)


def merge_summaries(a: List[SummaryRow], b: List[SummaryRow]) -> List[SummaryRow]:
    """Combinar resúmenes de lotes disjuntos de réplicas (fórmula de Chan para la varianza)"""
    if [row.t for row in a] != [row.t for row in b]:
        raise PreconditionError("Los resúmenes tienen mallas de tiempo distintas")
    merged = []
    for ra, rb in zip(a, b):
        n = ra.count + rb.count
        values = {}
        for suffix in ("N", "Nphi", "Nphif"):
            mean, var = _merge_pair(
                ra.count, getattr(ra, f"mean_{suffix}"), getattr(ra, f"var_{suffix}"),
                rb.count, getattr(rb, f"mean_{suffix}"), getattr(rb, f"var_{suffix}"),
            )
            values[f"mean_{suffix}"] = mean
            values[f"var_{suffix}"] = max(var, 0.0)
            values[f"se_{suffix}"] = math.sqrt(max(var, 0.0) / n)
        merged.append(SummaryRow(t=ra.t, count=n, **values))
    return merged


# ============================================
# LEY FUERTE
# ============================================

def _through_origin(times: np.ndarray, means: np.ndarray) -> float:
    """Constante c de la regresión media ≈ c·t² (mínimos cuadrados por el origen)"""
    x = times ** 2
    return float(np.dot(x, means) / np.dot(x, x))


def centering_constant(records: Sequence[ReplicaRecord], field: str = "N_phi") -> float:
    times = np.array(records[0].t, dtype=float)
    return _through_origin(times, counts_matrix(records, field).mean(axis=0))


def slln_report(records: Sequence[ReplicaRecord], config: ExperimentConfig) -> SummaryStats:
    """
    Constantes de la ley fuerte frente a los candidatos teóricos

    Se contrastan dos convenciones para N/t²: κ_M/2 = 1/(4π|M|) y la densidad cinemática
    κ_{φ≡1}/2 = 1/(π|M|). La aceptación pide que la media al mayor tiempo quede a menos del 10%
    de alguna de ellas y que N_φ/t² siga la misma convención.
    """
    rows = summarize(records)
    spec = get_surface(config.surface)
    cfg = build_kernel_config(config)
    kappa_m = 1.0 / (2.0 * math.pi * spec.area)
    kappa = kappa_phi(cfg.phi, spec)
    kinematic = 0.5 * kappa_phi(constant_phi(1.0), spec)
    localizer_integral = cfg.f.integral()

    values: Dict = {
        "surface": spec.name,
        "area": spec.area,
        "replicas": len(records),
        "kappa_M_half": 0.5 * kappa_m,
        "kinematic_constant": kinematic,
        "kappa_phi": kappa,
        "kappa_phi_half": 0.5 * kappa,
        "kappa_phi_eighth": 0.125 * kappa,
        "localizer_integral": localizer_integral,
        "A_phi_f": 0.5 * kappa * localizer_integral,
    }
    for row in rows:
        t2 = row.t * row.t
        tag = _tag(row.t)
        values[f"N_over_t2_{tag}"] = row.mean_N / t2
        values[f"N_over_t2_se_{tag}"] = row.se_N / t2
        values[f"Nphi_over_t2_{tag}"] = row.mean_Nphi / t2
        values[f"Nphi_over_t2_se_{tag}"] = row.se_Nphi / t2
        values[f"Nphif_over_t2_{tag}"] = row.mean_Nphif / t2
        values[f"Nphif_over_t2_se_{tag}"] = row.se_Nphif / t2

    times = np.array([row.t for row in rows])
    values["measured_c_N"] = _through_origin(times, np.array([row.mean_N for row in rows]))
    values["measured_c_Nphi"] = _through_origin(times, np.array([row.mean_Nphi for row in rows]))
    values["measured_c_Nphif"] = _through_origin(times, np.array([row.mean_Nphif for row in rows]))

    if len(rows) >= 2:
        a, b = rows[-2], rows[-1]
        combined = math.hypot(a.se_N / a.t ** 2, b.se_N / b.t ** 2)
        gap = b.mean_N / b.t ** 2 - a.mean_N / a.t ** 2
        values["slln_consistency_z"] = gap / combined if combined > 0 else 0.0

    last = rows[-1]
    measured_n = last.mean_N / last.t ** 2
    measured_phi = last.mean_Nphi / last.t ** 2
    candidates = {"kappa_M_half": (0.5 * kappa_m, 0.125 * kappa), "kinematic": (kinematic, 0.5 * kappa)}
    matched = "none"
    for name, (target_n, _) in candidates.items():
        ratio = measured_n / target_n
        values[f"ratio_N_{name}"] = ratio
        if abs(ratio - 1.0) <= SLLN_TOLERANCE and matched == "none":
            matched = name
    values["slln_matched"] = matched

    phi_ok = False
    if matched != "none":
        target_phi = candidates[matched][1]
        values["ratio_Nphi_convention"] = measured_phi / target_phi
        phi_ok = abs(measured_phi / target_phi - 1.0) <= SLLN_TOLERANCE

    passed: Optional[bool] = None
    if len(records) >= SLLN_MIN_REPLICAS and last.t >= SLLN_MIN_TIME:
        passed = matched != "none" and phi_ok
        logger.info(f"📊 Ley fuerte: convención {matched}, N/t² = {measured_n:.6g}")
    else:
        values["acceptance"] = "skipped"
        logger.info("📊 Ley fuerte: ensamble pequeño, sin umbral de aceptación")
    return SummaryStats(rows=rows, values=values, passed=passed)


# ============================================
# EXPONENTES DE ESCALA
# ============================================

class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    residuals: np.ndarray


def _log_variances(values: np.ndarray) -> np.ndarray:
    variances = np.var(values, axis=0, ddof=1)
    if np.any(variances <= 0.0):
        raise DegenerateDataError(f"Varianza nula en alguna columna: {variances}")
    return np.log(variances)


def slope_fit(times: Sequence[float], values: np.ndarray, rng: np.random.Generator, resamples: Optional[int] = None) -> SlopeFit:
    """
    Pendiente de log Var(valores) frente a log t, con IC bootstrap sobre réplicas

    Args:
        times: malla de tiempos
        values: matriz réplicas × tiempos
        rng: generador para el remuestreo
        resamples: número de remuestreos (por defecto settings.bootstrap_resamples)

    Raises:
        DegenerateDataError: si alguna columna tiene varianza nula
    """
    resamples = settings.bootstrap_resamples if resamples is None else resamples
    values = np.asarray(values, dtype=float)
    log_t = np.log(np.asarray(times, dtype=float))
    log_var = _log_variances(values)
    slope, intercept = np.polyfit(log_t, log_var, 1)
    residuals = log_var - (slope * log_t + intercept)

    n = values.shape[0]
    boot = []
    for _ in range(resamples):
        sample = values[rng.integers(0, n, n)]
        variances = np.var(sample, axis=0, ddof=1)
        if np.any(variances <= 0.0):
            continue
        boot.append(np.polyfit(log_t, np.log(variances), 1)[0])
    if boot:
        ci_low, ci_high = np.percentile(boot, [2.5, 97.5])
    else:
        ci_low = ci_high = float("nan")
    return SlopeFit(float(slope), float(intercept), float(ci_low), float(ci_high), residuals)


def scaling_exponents(records: Sequence[ReplicaRecord], config: ExperimentConfig, rng: Optional[np.random.Generator] = None) -> SummaryStats:
    """
    Pendientes log-log de Var N_φ(t) (esperada 2) y Var N_{φ;f}(t) (esperada 3)

    Raises:
        PreconditionError: con menos de 4 tiempos o menos de 100 réplicas
        DegenerateDataError: si alguna varianza es nula
    """
    times = records[0].t if records else []
    if len(times) < SCALING_MIN_TIMES:
        raise PreconditionError(f"Se requieren al menos {SCALING_MIN_TIMES} tiempos (hay {len(times)})")
    if len(records) < SCALING_MIN_REPLICAS:
        raise PreconditionError(f"Se requieren al menos {SCALING_MIN_REPLICAS} réplicas (hay {len(records)})")
    rng = analysis_rng(config) if rng is None else rng

    fits = {
        "global": slope_fit(times, counts_matrix(records, "N_phi"), rng),
        "local": slope_fit(times, counts_matrix(records, "N_phi_f"), rng),
    }
    values: Dict = {"replicas": len(records)}
    for name, fit in fits.items():
        values[f"slope_{name}"] = fit.slope
        values[f"slope_{name}_ci_low"] = fit.ci_low
        values[f"slope_{name}_ci_high"] = fit.ci_high
        values[f"slope_{name}_max_residual"] = float(np.max(np.abs(fit.residuals)))

    low, high = GLOBAL_SLOPE_RANGE
    passed = low <= fits["global"].slope <= high
    low, high = LOCAL_SLOPE_RANGE
    passed = passed and low <= fits["local"].slope <= high
    logger.info(f"📊 Pendientes: global {fits['global'].slope:.3f}, local {fits['local'].slope:.3f}")
    return SummaryStats(rows=summarize(records), values=values, passed=passed)


# ============================================
# NORMALIDAD
# ============================================

class NormalityResult(NamedTuple):
    ks_stat: float
    p_value: float  # Lilliefors por simulación
    naive_p_value: float  # KS con parámetros conocidos
    skewness: float
    kurtosis: float  # exceso


def _standardized_ks(sample: np.ndarray) -> float:
    sd = np.std(sample, ddof=1)
    return float(stats.kstest((sample - np.mean(sample)) / sd, "norm").statistic)


def lilliefors_null(n: int, simulations: int, rng: np.random.Generator) -> np.ndarray:
    """Distribución nula del estadístico KS con media y varianza estimadas"""
    draws = rng.standard_normal((simulations, n))
    return np.sort([_standardized_ks(row) for row in draws])


def lilliefors_critical_value(n: int, level: float, simulations: int, rng: np.random.Generator) -> float:
    return float(np.quantile(lilliefors_null(n, simulations, rng), 1.0 - level))


def normality_test(values: Sequence[float], rng: np.random.Generator, simulations: Optional[int] = None) -> NormalityResult:
    """
    KS de la muestra estandarizada frente a la normal estándar

    Raises:
        DegenerateDataError: si la desviación estándar es nula
    """
    sample = np.asarray(values, dtype=float)
    if len(sample) < 3 or np.std(sample) == 0.0:
        raise DegenerateDataError("Muestra sin dispersión: no se puede estandarizar")
    simulations = settings.lilliefors_simulations if simulations is None else simulations
    statistic = _standardized_ks(sample)
    null = lilliefors_null(len(sample), simulations, rng)
    exceed = len(null) - int(np.searchsorted(null, statistic, side="left"))
    standardized = (sample - np.mean(sample)) / np.std(sample, ddof=1)
    return NormalityResult(
        ks_stat=statistic,
        p_value=(exceed + 1) / (simulations + 1),
        naive_p_value=float(stats.kstest(standardized, "norm").pvalue),
        skewness=float(stats.skew(sample)),
        kurtosis=float(stats.kurtosis(sample)),
    )


def localized_clt(
    records: Sequence[ReplicaRecord],
    config: ExperimentConfig,
    t_star: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> SummaryStats:
    """
    Normalidad de N_{φ;f}(t_star) estandarizado por la media y la desviación del ensamble

    Raises:
        PreconditionError: con menos de 200 réplicas o t_star fuera de la malla
    """
    if len(records) < CLT_MIN_REPLICAS:
        raise PreconditionError(f"Se requieren al menos {CLT_MIN_REPLICAS} réplicas (hay {len(records)})")
    t_star = default_t_star(config) if t_star is None else t_star
    column = counts_matrix(records, "N_phi_f")[:, _time_index(records, t_star)]
    result = normality_test(column, analysis_rng(config) if rng is None else rng)
    passed = result.p_value > CLT_MIN_PVALUE and abs(result.skewness) < CLT_MAX_SKEW
    logger.info(f"📊 TCL localizado en t = {t_star:g}: KS = {result.ks_stat:.4f}, p = {result.p_value:.4f}")
    return SummaryStats(
        values={
            "t_star": t_star,
            "ks_stat": result.ks_stat,
            "p_value": result.p_value,
            "naive_p_value": result.naive_p_value,
            "skewness": result.skewness,
            "kurtosis": result.kurtosis,
        },
        passed=passed,
    )


def default_t_star(config: ExperimentConfig) -> float:
    if config.t_star is not None:
        return config.t_star
    return 400.0 if 400.0 in config.t_grid else config.max_time


# ============================================
# FORMAS CUADRÁTICAS GAUSSIANAS
# ============================================

def gqf_sample(thetas: Sequence[float], n: int, rng: np.random.Generator) -> np.ndarray:
    """n muestras independientes de Σ θ_j Z_j²"""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size == 0:
        raise PreconditionError("Se requiere al menos un coeficiente θ")
    z = rng.standard_normal((n, thetas.size))
    return (z * z) @ thetas


def gqf_cumulants(thetas: Sequence[float]) -> Tuple[float, float, float]:
    """Primeros tres cumulantes de Σ θ_j Z_j²: Σθ, 2Σθ², 8Σθ³"""
    thetas = np.asarray(thetas, dtype=float)
    return float(np.sum(thetas)), 2.0 * float(np.sum(thetas ** 2)), 8.0 * float(np.sum(thetas ** 3))


def gqf_fit(samples: Sequence[float]) -> Tuple[float, float]:
    """
    Mejor forma de dos coeficientes θ₁Z₁² + θ₂Z₂² por ajuste de los tres primeros cumulantes

    Devuelve (θ₁, θ₂) con |θ₁| ≥ |θ₂|.
    """
    sample = np.asarray(samples, dtype=float)
    k1 = float(np.mean(sample))
    k2 = float(np.var(sample))
    k3 = float(np.mean((sample - k1) ** 3))
    if k2 <= 0.0:
        raise DegenerateDataError("Muestra sin dispersión: no se puede ajustar la forma cuadrática")
    scale = math.sqrt(k2)

    def residuals(theta):
        c1, c2, c3 = gqf_cumulants(theta)
        return [(c1 - k1) / scale, (c2 - k2) / scale ** 2, (c3 - k3) / scale ** 3]

    first = math.copysign(math.sqrt(0.5 * k2), k3 if k3 != 0.0 else 1.0)
    fit = optimize.least_squares(residuals, x0=[first, k1 - first])
    theta = sorted(fit.x.tolist(), key=abs, reverse=True)
    return float(theta[0]), float(theta[1])


def global_fluctuation_report(records: Sequence[ReplicaRecord], config: ExperimentConfig, t_star: Optional[float] = None) -> SummaryStats:
    """
    Momentos de (N_φ(t) − c·t²)/t con c medido por regresión y ajuste descriptivo de forma cuadrática

    Raises:
        PreconditionError: con menos de 200 réplicas
    """
    if len(records) < CLT_MIN_REPLICAS:
        raise PreconditionError(f"Se requieren al menos {CLT_MIN_REPLICAS} réplicas (hay {len(records)})")
    t_star = default_t_star(config) if t_star is None else t_star
    c = centering_constant(records, "N_phi")
    matrix = counts_matrix(records, "N_phi")
    times = np.array(records[0].t, dtype=float)
    normalized = (matrix - c * times ** 2) / times

    column = normalized[:, _time_index(records, t_star)]
    centered = column - np.mean(column)
    values: Dict = {
        "t_star": t_star,
        "centering_c": c,
        "gf_mean": float(np.mean(column)),
        "gf_moment2": float(np.mean(centered ** 2)),
        "gf_moment3": float(np.mean(centered ** 3)),
        "gf_moment4": float(np.mean(centered ** 4)),
    }
    for k, t in enumerate(times):
        values[f"gf_variance_{_tag(t)}"] = float(np.var(normalized[:, k], ddof=1))
    if len(times) >= 2:
        values["gf_variance_ratio"] = float(np.var(normalized[:, -1], ddof=1) / np.var(normalized[:, -2], ddof=1))
    theta1, theta2 = gqf_fit(column)
    values["gqf_theta1"] = theta1
    values["gqf_theta2"] = theta2
    return SummaryStats(values=values, passed=None)
