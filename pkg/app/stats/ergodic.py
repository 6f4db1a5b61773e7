"""
Diagnósticos ergódicos
Decaimiento de correlaciones del flujo geodésico, promedios dobles a lo largo de una órbita,
corchete de dos segmentos y el contraejemplo del producto sesgado
"""

import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

from app.core.errors import PreconditionError
from app.core.hyperbolic import flow_array
from app.core.intersections import mutual_intersections, self_intersections
from app.core.kernels import Estimate, KernelConfig, build_localizer, k_row_mean, kappa_phi, kernel_double_integral
from app.core.surface import SurfaceSpec, liouville_sample, liouville_sample_batch
from app.core.tracer import GeodesicTrace
from app.core.utils import make_rng
from app.stats.ensemble import trace_random

logger = logging.getLogger(__name__)

# Observable: (bases complejas, direcciones) -> valores
Observable = Callable[[np.ndarray, np.ndarray], np.ndarray]

GOLDEN_ROTATION = 0.5 * (math.sqrt(5.0) - 1.0)
RIEMANN_STEP = 0.05
KERNEL_MC_ROWS = 4
COSET_TOL = 1e-9
COUNTEREXAMPLE_BLOCK = 1000


def bump_observable(spec: SurfaceSpec, center: complex = 0j, radius: float = 1.0) -> Observable:
    """Bump suave de la distancia en la superficie a `center`, independiente de la dirección"""
    localizer = build_localizer(center, radius, spec)
    return lambda z, direction: localizer(z)


def centered(g: Observable, mean: float) -> Observable:
    return lambda z, direction: g(z, direction) - mean


def liouville_mean(g: Observable, spec: SurfaceSpec, n: int, rng: np.random.Generator) -> float:
    bases, dirs = liouville_sample_batch(rng, spec, n)
    return float(np.mean(g(bases, dirs)))


def _states_along(geodesic: GeodesicTrace, times: np.ndarray):
    """Bases y direcciones de γ(s) en la carta del polígono para una malla de tiempos"""
    starts = np.array(geodesic.starts)
    index = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(starts) - 1)
    entry_z = np.array([a.entry.base.z for a in geodesic.arcs])[index]
    entry_dir = np.array([a.entry.dir for a in geodesic.arcs])[index]
    return flow_array(entry_z, entry_dir, times - starts[index])


# ============================================
# DECAIMIENTO DE CORRELACIONES
# ============================================

class Correlation(NamedTuple):
    lag: float
    corr: float
    std_error: float


def correlation_decay(
    g: Observable,
    lags: Sequence[float],
    spec: SurfaceSpec,
    n: int,
    rng: np.random.Generator,
    shuffle: bool = False,
) -> List[Correlation]:
    """
    Estimación de E[g(γ(0)) g(γ(lag))] con la media de g restada empíricamente

    Con `shuffle` las evaluaciones finales se emparejan con arranques independientes (control).
    """
    lags = np.asarray(lags, dtype=float)
    if np.any(lags < 0.0):
        raise PreconditionError(f"Retardos negativos: {lags}")
    horizon = float(np.max(lags)) if lags.size else 0.0

    values = np.empty((n, lags.size))
    for i in range(n):
        if horizon > 0.0:
            geodesic = trace_random(rng, spec, horizon, "Correlación")
            bases, dirs = _states_along(geodesic, lags)
        else:
            u = liouville_sample(rng, spec)
            bases, dirs = np.full(lags.size, u.base.z), np.full(lags.size, u.dir)
        values[i] = g(bases, dirs)

    if np.ptp(values) == 0.0:
        fluctuation = np.zeros_like(values)
    else:
        fluctuation = values - np.mean(values)

    result = []
    for k, lag in enumerate(lags):
        later = fluctuation[rng.permutation(n), k] if shuffle else fluctuation[:, k]
        products = fluctuation[:, 0] * later
        spread = float(np.std(products, ddof=1)) if n > 1 else 0.0
        result.append(Correlation(float(lag), float(np.mean(products)), spread / math.sqrt(n)))
    return result


# ============================================
# PROMEDIOS DOBLES
# ============================================

class DoubleAverage(NamedTuple):
    t: float
    empirical: float
    target: float
    gap: float
    mc_target: Optional[float] = None  # ∬ K_δ dν_L dν_L por Monte Carlo
    mc_std_error: Optional[float] = None


def double_average_check(
    kernel: str,
    times: Sequence[float],
    spec: SurfaceSpec,
    rng: np.random.Generator,
    cfg: Optional[KernelConfig] = None,
    g: Optional[Observable] = None,
    mc_samples: int = 20000,
) -> List[DoubleAverage]:
    """
    (1/t²)∬_{[0,t]²} K(γ(s₁), γ(s₂)) ds₁ds₂ sobre una sola órbita frente a la integral doble

    kernel = "product": K = g⊗g con g centrada por Monte Carlo; el objetivo es 0.
    kernel = "K": K = K_δ de `cfg`; el objetivo es κ_φ por cuadratura, contrastado con la
    estimación Monte Carlo de ∬ K_δ dν_L dν_L.
    """
    times = sorted(float(t) for t in times)
    if kernel == "product":
        g = bump_observable(spec) if g is None else g
        g = centered(g, liouville_mean(g, spec, mc_samples, rng))
        geodesic = trace_random(rng, spec, times[-1], "Promedio doble")
        rows = []
        for t in times:
            steps = max(2, int(math.ceil(t / RIEMANN_STEP)))
            grid = np.linspace(0.0, t, steps + 1)
            weights = np.full(steps + 1, t / steps)
            weights[[0, -1]] *= 0.5
            bases, dirs = _states_along(geodesic, grid)
            average = math.fsum(weights * g(bases, dirs)) / t
            empirical = average * average
            rows.append(DoubleAverage(t, empirical, 0.0, abs(empirical)))
        return rows

    if kernel == "K":
        if cfg is None:
            raise PreconditionError("El núcleo K_δ requiere KernelConfig")
        target = kappa_phi(cfg.phi, spec)
        mc = kernel_integral_mc(cfg, KERNEL_MC_ROWS, mc_samples, rng)
        if abs(mc.estimate - target) > 4.0 * mc.std_error:
            logger.warning(f"⚠️ ∬K_δ Monte Carlo {mc.estimate:.6g} ± {mc.std_error:.2g} lejos de κ_φ = {target:.6g}")

        wide = trace_random(rng, spec, times[-1] + 4.0 * cfg.delta, "Promedio doble K_δ")
        crossings = self_intersections(wide, spec)
        rows = []
        for t in times:
            empirical = kernel_double_integral(wide, t, cfg, crossings=crossings) / (t * t)
            rows.append(DoubleAverage(t, empirical, target, abs(empirical - target), mc.estimate, mc.std_error))
        return rows

    raise PreconditionError(f"Núcleo desconocido: {kernel!r} (opciones: product, K)")


def kernel_integral_mc(cfg: KernelConfig, rows: int, samples: int, rng: np.random.Generator) -> Estimate:
    """∬ K_δ dν_L dν_L por Monte Carlo: promedio de estimaciones por filas en u de Liouville"""
    estimates = [k_row_mean(liouville_sample(rng, cfg.surface), cfg, samples, rng) for _ in range(rows)]
    mean = math.fsum(e.estimate for e in estimates) / rows
    std_error = math.sqrt(math.fsum(e.std_error ** 2 for e in estimates)) / rows
    return Estimate(mean, std_error)


# ============================================
# CORCHETE DE DOS SEGMENTOS
# ============================================

class BracketAverage(NamedTuple):
    mean: float
    std_error: float
    target: float


def bracket_average(trace_a: GeodesicTrace, traces_b: Sequence[GeodesicTrace], phi, spec: SurfaceSpec) -> BracketAverage:
    """Media de M_φ(α, β) sobre segmentos β independientes frente a κ_φ·|α|·|β|"""
    if not traces_b:
        raise PreconditionError("Se requiere al menos un segmento β")
    values = np.array([mutual_intersections(trace_a, b, phi) for b in traces_b])
    length_b = float(np.mean([b.total_time for b in traces_b]))
    spread = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return BracketAverage(
        float(np.mean(values)),
        spread / math.sqrt(len(values)),
        kappa_phi(phi, spec) * trace_a.total_time * length_b,
    )


# ============================================
# CONTRAEJEMPLO DEL PRODUCTO SESGADO
# ============================================

class CounterexampleResult(NamedTuple):
    orbit_average: float
    product_integral: float
    control_average: float
    control_target: float


def _coset_bases(positions: np.ndarray, rotations: np.ndarray) -> np.ndarray:
    """Representante x − kα mod 1 de la clase lateral de cada estado (posición, rotaciones)"""
    return np.mod(positions - rotations * GOLDEN_ROTATION, 1.0)


def _same_coset(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    gap = a - b
    return np.abs(gap - np.round(gap)) < COSET_TOL


def remark_counterexample(n_steps: int, seed: int) -> CounterexampleResult:
    """
    Producto sesgado T(x, ω) = (R^{ω₀}x, σω) con rotación áurea y monedas equilibradas

    Cada estado es (posición en el círculo, número acumulado de rotaciones). K vale 1 cuando dos
    estados comparten clase lateral módulo el subgrupo de rotaciones, y se evalúa sobre los
    estados simulados. Los puntos de una órbita comparten la clase de x, mientras que dos puntos
    independientes uniformes caen en clases distintas con probabilidad 1.
    """
    if n_steps < 1:
        raise PreconditionError(f"n_steps = {n_steps} debe ser ≥ 1")
    rng = make_rng(seed)

    # 1. Órbita de (x0, ω)
    x0 = rng.random()
    coins = rng.integers(0, 2, n_steps)
    rotations = np.concatenate([[0], np.cumsum(coins[:-1])])
    positions = np.mod(x0 + rotations * GOLDEN_ROTATION, 1.0)
    bases = _coset_bases(positions, rotations)
    hits = 0
    for start in range(0, n_steps, COUNTEREXAMPLE_BLOCK):
        block = bases[start:start + COUNTEREXAMPLE_BLOCK]
        hits += int(np.count_nonzero(_same_coset(block[:, None], bases[None, :])))
    orbit_average = hits / (n_steps * n_steps)

    # 2. Pares independientes de puntos uniformes con su propio camino de monedas
    left = _coset_bases(rng.random(n_steps), rng.binomial(n_steps, 0.5, n_steps))
    right = _coset_bases(rng.random(n_steps), rng.binomial(n_steps, 0.5, n_steps))
    product_integral = int(np.count_nonzero(_same_coset(left, right))) / n_steps

    control = float(np.mean(np.cos(2.0 * math.pi * positions)))
    logger.info(f"📊 Producto sesgado: promedio orbital {orbit_average}, integral producto {product_integral}")
    return CounterexampleResult(orbit_average, product_integral, control * control, 0.0)
