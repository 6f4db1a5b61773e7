"""
Núcleos de intersección
Funciones de suavizado φ, molificador p, núcleos H_δ, K_δ y k_δ, representación como
U-estadístico, identidad de la media por filas y cotas de tipo sándwich
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy import integrate

from app.config import settings
from app.core.errors import ConfigurationError, PreconditionError
from app.core.hyperbolic import (
    DiskPoint,
    UnitTangent,
    chord_frames,
    distance_array,
    flow_array,
    intersect_frames,
)
from app.core.intersections import CrossingSet, self_intersections
from app.core.surface import (
    SurfaceSpec,
    deck_coefficients,
    liouville_sample_batch,
    nearby_deck_maps,
    reduce,
    reduce_tangent,
)
from app.core.tracer import GeodesicTrace, tangent_at

logger = logging.getLogger(__name__)

# Tamaño de lote para integrales Monte Carlo
MC_CHUNK = 20000


# ============================================
# FUNCIONES DE SUAVIZADO
# ============================================

@dataclass(frozen=True)
class SmoothingFn:
    alpha: float
    evaluate: Callable
    sup_norm: float

    def __call__(self, theta):
        return self.evaluate(theta)

    def scaled(self, factor: float) -> "SmoothingFn":
        base = self.evaluate
        return SmoothingFn(self.alpha, lambda theta: factor * base(theta), abs(factor) * self.sup_norm)


def build_phi(alpha: float) -> SmoothingFn:
    """
    φ(θ) = exp(−1/((θ̃ − α)(π − α − θ̃))) en (α, π − α), 0 fuera; θ̃ = θ mod π

    Raises:
        ConfigurationError: si alpha no está en (0, π/2)
    """
    if not 0.0 < alpha < 0.5 * math.pi:
        raise ConfigurationError(f"alpha = {alpha} fuera de (0, π/2)")

    def evaluate(theta):
        folded = np.mod(np.asarray(theta, dtype=float), math.pi)
        inside = (folded > alpha) & (folded < math.pi - alpha)
        gap = np.where(inside, (folded - alpha) * (math.pi - alpha - folded), 1.0)
        return np.where(inside, np.exp(-1.0 / gap), 0.0)

    return SmoothingFn(alpha, evaluate, math.exp(-1.0 / (0.5 * math.pi - alpha) ** 2))


def constant_phi(value: float) -> SmoothingFn:
    """φ constante (admisible para κ_φ y los conteos, no para K_δ)"""
    return SmoothingFn(0.0, lambda theta: np.full(np.shape(theta), float(value)), abs(value))


@dataclass(frozen=True)
class Mollifier:
    normalization: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) < 1.0
        gap = np.where(inside, 1.0 - s * s, 1.0)
        return np.where(inside, self.normalization * np.exp(-1.0 / gap), 0.0)


def build_mollifier() -> Mollifier:
    """p(s) = c·exp(−1/(1 − s²)) en (−1, 1), normalizada a integral 1"""
    mass, _ = integrate.quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1.0, 1.0, epsabs=0.0, epsrel=1e-13)
    return Mollifier(1.0 / mass)


# ============================================
# LOCALIZADORES
# ============================================

@dataclass(frozen=True, eq=False)
class LocalizerFn:
    """Bump suave con máximo `height` en `center`, soportado en la bola métrica de radio `radius`"""
    center: DiskPoint
    radius: float
    surface: SurfaceSpec
    height: float = 1.0

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ConfigurationError(f"Radio de localizador no positivo: {self.radius}")

    @cached_property
    def _center_lifts(self) -> np.ndarray:
        words = nearby_deck_maps(self.surface, 2.0 * self.surface.circumradius + self.radius)
        a, b = deck_coefficients(words)
        c = self.center.z
        return (a * c + b) / (np.conj(b) * c + np.conj(a))

    def surface_distance(self, z) -> np.ndarray:
        """Distancia en la superficie al centro, para puntos del polígono"""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        lifts = self._center_lifts
        return np.min(distance_array(z[:, None], lifts[None, :]), axis=1)

    def __call__(self, z):
        ratio = self.surface_distance(z) / self.radius
        inside = ratio < 1.0
        gap = np.where(inside, 1.0 - ratio * ratio, 1.0)
        return np.where(inside, self.height * np.exp(1.0 - 1.0 / gap), 0.0)

    def scaled(self, factor: float) -> "LocalizerFn":
        return replace(self, height=self.height * factor)

    def integral(self) -> float:
        """∫ f dA / |M| (la bola debe estar embebida)"""
        if self.radius >= 0.5 * self.surface.systole_lower_bound:
            raise ConfigurationError(f"Radio {self.radius} no menor que la mitad de la sístole")
        value, _ = integrate.quad(
            lambda rho: math.exp(1.0 - 1.0 / (1.0 - (rho / self.radius) ** 2)) * 2.0 * math.pi * math.sinh(rho),
            0.0, self.radius, epsabs=0.0, epsrel=1e-12,
        )
        return self.height * value / self.surface.area


@dataclass(frozen=True)
class ConstantLocalizer:
    value: float = 1.0

    def __call__(self, z):
        return np.full(np.shape(np.atleast_1d(z)), float(self.value))

    def scaled(self, factor: float) -> "ConstantLocalizer":
        return ConstantLocalizer(self.value * factor)

    def integral(self) -> float:
        return float(self.value)


def build_localizer(center: complex, radius: float, spec: SurfaceSpec) -> LocalizerFn:
    return LocalizerFn(DiskPoint(complex(center)), radius, spec)


# ============================================
# CONFIGURACIÓN DEL NÚCLEO
# ============================================

@dataclass(frozen=True, eq=False)
class KernelConfig:
    delta: float
    phi: SmoothingFn
    p: Mollifier
    rho: float
    surface: SurfaceSpec
    f: Optional[Callable] = None

    def __post_init__(self):
        if not (self.delta > 0.0 and self.rho > 0.0):
            raise ConfigurationError(f"δ = {self.delta} y ϱ = {self.rho} deben ser positivos")
        if self.delta > 0.5 * self.rho + 1e-15:
            raise ConfigurationError(f"δ = {self.delta} > ϱ/2 = {0.5 * self.rho}")
        if self.rho > 0.5 * self.surface.systole_lower_bound:
            raise ConfigurationError(
                f"ϱ = {self.rho} > sístole/2 = {0.5 * self.surface.systole_lower_bound:.6f}"
            )

    @cached_property
    def lifts(self) -> Tuple[np.ndarray, np.ndarray]:
        """Coeficientes de los traslados de cubierta que pueden acercar dos puntos del polígono a 2δ"""
        words = nearby_deck_maps(self.surface, 2.0 * self.surface.circumradius + 2.0 * self.delta)
        return deck_coefficients(words)

    def with_delta(self, delta: float) -> "KernelConfig":
        return replace(self, delta=delta)


def default_kernel_config(
    spec: SurfaceSpec, delta: float = 0.1, alpha: float = 0.3, rho: float = 0.5, f: Optional[Callable] = None
) -> KernelConfig:
    return KernelConfig(delta, build_phi(alpha), build_mollifier(), rho, spec, f)


def kappa_phi(phi: SmoothingFn, spec: SurfaceSpec) -> float:
    """κ_φ = (1/(2π|M|)) ∫₀^{2π} φ(θ)|sen θ| dθ por cuadratura"""
    if phi.sup_norm == 0.0:
        return 0.0
    breaks = sorted({x for x in (phi.alpha, math.pi - phi.alpha, math.pi, math.pi + phi.alpha, 2 * math.pi - phi.alpha)
                     if 0.0 < x < 2 * math.pi})
    value, _ = integrate.quad(
        lambda x: float(phi(x)) * abs(math.sin(x)), 0.0, 2 * math.pi,
        points=breaks, limit=400, epsabs=0.0, epsrel=1e-12,
    )
    return value / (2 * math.pi * spec.area)


# ============================================
# BÚSQUEDA DE CRUCES ENTRE SEGMENTOS CORTOS
# ============================================

class SegmentCrossings(NamedTuple):
    owner: np.ndarray  # índice de v en el lote
    s: np.ndarray  # tiempo con signo desde u
    t: np.ndarray  # tiempo con signo desde v
    theta: np.ndarray
    point: np.ndarray  # en la carta de u


def _segment_crossings(cfg: KernelConfig, u: UnitTangent, vz: np.ndarray, vdir: np.ndarray, two_sided: bool) -> SegmentCrossings:
    """
    Cruces del segmento de u con todos los levantamientos cercanos de los segmentos de v

    Segmentos de un lado: [0, δ]; de dos lados: [−δ, δ].
    """
    delta = cfg.delta
    a, b = cfg.lifts
    vz = np.atleast_1d(np.asarray(vz, dtype=complex))
    vdir = np.atleast_1d(np.asarray(vdir, dtype=float))

    denom = np.conj(b)[:, None] * vz[None, :] + np.conj(a)[:, None]
    lifted = (a[:, None] * vz[None, :] + b[:, None]) / denom
    near = distance_array(np.full(lifted.shape, u.base.z), lifted) <= 2.0 * delta + 1e-12
    if not np.any(near):
        empty = np.empty(0)
        return SegmentCrossings(empty.astype(int), empty, empty, empty, empty.astype(complex))

    owner = np.broadcast_to(np.arange(len(vz))[None, :], lifted.shape)[near]
    base = lifted[near]
    direction = vdir[owner] - 2.0 * np.angle(denom[near])

    lo, span = (-delta, 2.0 * delta) if two_sided else (0.0, delta)
    v0, _ = flow_array(base, direction, lo)
    v1, _ = flow_array(base, direction, lo + span)
    u0, _ = flow_array(np.array([u.base.z]), np.array([u.dir]), lo)
    u1, _ = flow_array(np.array([u.base.z]), np.array([u.dir]), lo + span)
    k = len(base)
    fu = chord_frames(np.repeat(u0, k), np.repeat(u1, k), np.full(k, span))
    fv = chord_frames(v0, v1, np.full(k, span))
    result = intersect_frames(fu, fv)

    hit = result.hit
    return SegmentCrossings(
        owner=owner[hit],
        s=lo + result.frac_a[hit] * span,
        t=lo + result.frac_b[hit] * span,
        theta=result.theta[hit],
        point=result.point[hit],
    )


def _canonical(u: UnitTangent, v: UnitTangent, spec: SurfaceSpec) -> Tuple[UnitTangent, UnitTangent]:
    """Ambos argumentos reducidos al polígono y en orden fijo"""
    u, _ = reduce_tangent(u, spec)
    v, _ = reduce_tangent(v, spec)
    key = lambda w: (w.base.z.real, w.base.z.imag, w.dir)
    return (v, u) if key(v) < key(u) else (u, v)


def _reduced_points(points: np.ndarray, spec: SurfaceSpec) -> np.ndarray:
    return np.array([reduce(DiskPoint(complex(z)), spec)[0].z for z in points], dtype=complex)


def _k_weights(cfg: KernelConfig, found: SegmentCrossings, localized: bool) -> np.ndarray:
    delta = cfg.delta
    weights = cfg.p(found.s / delta) * cfg.p(found.t / delta) * cfg.phi(found.theta) / delta ** 2
    if localized:
        weights = weights * cfg.f(_reduced_points(found.point, cfg.surface))
    return weights


def eval_H(u: UnitTangent, v: UnitTangent, cfg: KernelConfig) -> float:
    """φ(θ) si los segmentos de longitud δ desde u y v se cortan transversalmente, si no 0"""
    first, second = _canonical(u, v, cfg.surface)
    found = _segment_crossings(cfg, first, second.base.z, second.dir, two_sided=False)
    return math.fsum(cfg.phi(found.theta))


def eval_K(u: UnitTangent, v: UnitTangent, cfg: KernelConfig) -> float:
    """δ⁻² p(s/δ) p(t/δ) φ(θ) para el cruce de los segmentos de dos lados, si existe"""
    first, second = _canonical(u, v, cfg.surface)
    found = _segment_crossings(cfg, first, second.base.z, second.dir, two_sided=True)
    return math.fsum(_k_weights(cfg, found, localized=False))


def eval_k_local(u: UnitTangent, v: UnitTangent, cfg: KernelConfig) -> float:
    """
    K_δ ponderado por f en el punto de cruce

    Raises:
        ConfigurationError: si la configuración no tiene localizador
    """
    if cfg.f is None:
        raise ConfigurationError("eval_k_local requiere un localizador f en KernelConfig")
    first, second = _canonical(u, v, cfg.surface)
    found = _segment_crossings(cfg, first, second.base.z, second.dir, two_sided=True)
    return math.fsum(_k_weights(cfg, found, localized=True))


# ============================================
# INTEGRALES MONTE CARLO
# ============================================

class Estimate(NamedTuple):
    estimate: float
    std_error: float


def _mc_row(u: UnitTangent, cfg: KernelConfig, n: int, rng: np.random.Generator, kind: str) -> Estimate:
    if n < 100:
        raise PreconditionError(f"Se requieren al menos 100 muestras (n = {n})")
    u, _ = reduce_tangent(u, cfg.surface)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n:
        size = min(MC_CHUNK, n - done)
        vz, vdir = liouville_sample_batch(rng, cfg.surface, size)
        found = _segment_crossings(cfg, u, vz, vdir, two_sided=(kind != "H"))
        if kind == "H":
            weights = cfg.phi(found.theta)
        else:
            weights = _k_weights(cfg, found, localized=(kind == "k"))
        values = np.bincount(found.owner, weights=weights, minlength=size)
        total += math.fsum(values)
        total_sq += math.fsum(values * values)
        done += size
    mean = total / n
    variance = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return Estimate(mean, math.sqrt(variance / n))


def row_mean(u: UnitTangent, cfg: KernelConfig, n: int, rng: np.random.Generator) -> Estimate:
    """Estimación de ∫ H_δ(u, v) ν_L(dv), que vale δ²κ_φ para todo u"""
    return _mc_row(u, cfg, n, rng, "H")


def k_row_mean(u: UnitTangent, cfg: KernelConfig, n: int, rng: np.random.Generator) -> Estimate:
    """Estimación de ∫ K_δ(u, v) ν_L(dv), que tiende a κ_φ"""
    return _mc_row(u, cfg, n, rng, "K")


def f_delta(u: UnitTangent, cfg: KernelConfig, n: int, rng: np.random.Generator) -> Estimate:
    """f_δ(u) = (1/κ_φ) ∫ k_δ(u, v) ν_L(dv)"""
    if cfg.f is None:
        raise ConfigurationError("f_delta requiere un localizador f en KernelConfig")
    kappa = kappa_phi(cfg.phi, cfg.surface)
    raw = _mc_row(u, cfg, n, rng, "k")
    return Estimate(raw.estimate / kappa, raw.std_error / kappa)


def mutual_count_bound(cfg: KernelConfig, t: float) -> float:
    """Cota ‖φ‖∞·t/ϱ del corchete M_φ(γ[0,δ], γ[0,t])"""
    return cfg.phi.sup_norm * t / cfg.rho


# ============================================
# U-ESTADÍSTICO
# ============================================

def u_statistic(geodesic: GeodesicTrace, cfg: KernelConfig) -> float:
    """
    ½ Σ_i Σ_j H_δ(γ(iδ), γ(jδ)) para T = nδ

    Con el núcleo simétrico la doble suma es la suma sobre i < j.

    Raises:
        PreconditionError: si T/δ no es entero
    """
    ratio = geodesic.total_time / cfg.delta
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise PreconditionError(f"T/δ = {ratio} no es entero")
    tangents = [tangent_at(geodesic, i * cfg.delta) for i in range(n)]
    bases = np.array([u.base.z for u in tangents])
    dirs = np.array([u.dir for u in tangents])
    total = []
    for i in range(n - 1):
        found = _segment_crossings(cfg, tangents[i], bases[i + 1:], dirs[i + 1:], two_sided=False)
        total.extend(np.asarray(cfg.phi(found.theta), dtype=float).tolist())
    return math.fsum(total)


# ============================================
# COTAS SÁNDWICH
# ============================================

class Sandwich(NamedTuple):
    lower: float
    upper: float
    n_phi: float  # N_φ(γ[0, T])
    outer: float  # N_φ(γ[−2δ, T + 2δ])
    inner: float  # N_φ(γ[2δ, T − 2δ])


def _trapezoid_grid(start: float, end: float, h: float) -> Tuple[np.ndarray, np.ndarray]:
    steps = max(1, int(math.ceil((end - start) / h - 1e-12)))
    grid = np.linspace(start, end, steps + 1)
    weights = np.full(steps + 1, (end - start) / steps)
    weights[[0, -1]] *= 0.5
    return grid, weights


def _bump_mass(cfg: KernelConfig, c: float, grid: np.ndarray, weights: np.ndarray) -> float:
    """Regla del trapecio de s ↦ δ⁻¹ p((c − s)/δ) sobre la malla"""
    lo, hi = np.searchsorted(grid, [c - cfg.delta, c + cfg.delta])
    window = slice(lo, hi)
    return math.fsum(weights[window] * cfg.p((c - grid[window]) / cfg.delta) / cfg.delta)


def _check_sandwich(wide: GeodesicTrace, cfg: KernelConfig, h: Optional[float]) -> Tuple[float, float]:
    h = cfg.delta / settings.sandwich_step_divisor if h is None else h
    if h > 0.25 * cfg.delta + 1e-15:
        raise PreconditionError(f"Paso h = {h} > δ/4 = {0.25 * cfg.delta}")
    t = wide.total_time - 4.0 * cfg.delta
    if t <= 2.0 * cfg.delta:
        raise PreconditionError(
            f"Traza demasiado corta: T = {t} requiere T > 2δ = {2.0 * cfg.delta}"
        )
    return t, h


def _window_count(crossings: CrossingSet, phi, lo: float, hi: float, shift: float) -> float:
    """N_φ de la ventana [lo, hi] en tiempos desplazados por `shift`"""
    return math.fsum(
        float(phi(c.theta)) for c in crossings.crossings if c.s - shift >= lo and c.t - shift <= hi
    )


def _window_counts(crossings: CrossingSet, cfg: KernelConfig, t: float) -> Tuple[float, float, float]:
    delta = cfg.delta
    shift = 2.0 * delta
    return (
        _window_count(crossings, cfg.phi, 0.0, t, shift),
        _window_count(crossings, cfg.phi, -2.0 * delta, t + 2.0 * delta, shift),
        _window_count(crossings, cfg.phi, 2.0 * delta, t - 2.0 * delta, shift),
    )


def sandwich(
    wide: GeodesicTrace,
    cfg: KernelConfig,
    h: Optional[float] = None,
    crossings: Optional[CrossingSet] = None,
) -> Sandwich:
    """
    Cotas inferior y superior de N_φ(γ[0, T]) por integrales dobles de ½K_δ

    `wide` es la traza de γ[−2δ, T + 2δ] y todos los valores salen de sus cruces. A lo largo
    de una sola geodésica el integrando es una suma de bumps separables centrados en los cruces,
    así que el trapecio se aplica a cada factor.

    Raises:
        PreconditionError: si h > δ/4 o si T ≤ 2δ
    """
    t, h = _check_sandwich(wide, cfg, h)
    delta = cfg.delta
    crossings = self_intersections(wide, cfg.surface) if crossings is None else crossings

    grids = {
        "lower": _trapezoid_grid(delta, t - delta, h),
        "upper": _trapezoid_grid(-delta, t + delta, h),
    }
    totals = {"lower": [], "upper": []}
    for c in crossings.crossings:
        c1 = c.s - 2.0 * delta
        c2 = c.t - 2.0 * delta
        weight = float(cfg.phi(c.theta))
        for name, (grid, weights) in grids.items():
            mass = _bump_mass(cfg, c1, grid, weights) * _bump_mass(cfg, c2, grid, weights)
            totals[name].append(weight * mass)
    return Sandwich(math.fsum(totals["lower"]), math.fsum(totals["upper"]), *_window_counts(crossings, cfg, t))


def sandwich_direct(wide: GeodesicTrace, cfg: KernelConfig, h: Optional[float] = None) -> Sandwich:
    """Las mismas cotas evaluando K_δ en toda la malla (solo para trazas cortas)"""
    t, h = _check_sandwich(wide, cfg, h)
    delta = cfg.delta
    results = []
    for lo, hi in ((delta, t - delta), (-delta, t + delta)):
        grid, weights = _trapezoid_grid(lo, hi, h)
        tangents = [tangent_at(wide, min(max(s + 2.0 * delta, 0.0), wide.total_time)) for s in grid]
        bases = np.array([u.base.z for u in tangents])
        dirs = np.array([u.dir for u in tangents])
        total = []
        for i, u in enumerate(tangents):
            found = _segment_crossings(cfg, u, bases, dirs, two_sided=True)
            values = _k_weights(cfg, found, localized=False) * weights[found.owner] * weights[i]
            total.extend((0.5 * values).tolist())
        results.append(math.fsum(total))
    return Sandwich(*results, *_window_counts(self_intersections(wide, cfg.surface), cfg, t))


def kernel_double_integral(
    wide: GeodesicTrace,
    t: float,
    cfg: KernelConfig,
    h: Optional[float] = None,
    crossings: Optional[CrossingSet] = None,
) -> float:
    """
    ∬_{[0,t]²} K_δ(γ(s₁), γ(s₂)) ds₁ ds₂ con `wide` la traza de γ[−2δ, t' + 2δ], t' ≥ t

    Cada cruce aporta dos bumps separables (uno por orden de los tiempos).
    """
    h = cfg.delta / settings.sandwich_step_divisor if h is None else h
    delta = cfg.delta
    if not t > 2.0 * delta:
        raise PreconditionError(f"t = {t} requiere t > 2δ = {2.0 * delta}")
    if wide.total_time < t + 4.0 * delta - 1e-9:
        raise PreconditionError(f"La traza cubre {wide.total_time} < t + 4δ = {t + 4.0 * delta}")
    crossings = self_intersections(wide, cfg.surface) if crossings is None else crossings
    grid, weights = _trapezoid_grid(0.0, t, h)
    total = []
    for c in crossings.crossings:
        mass = _bump_mass(cfg, c.s - 2.0 * delta, grid, weights) * _bump_mass(cfg, c.t - 2.0 * delta, grid, weights)
        total.append(2.0 * float(cfg.phi(c.theta)) * mass)
    return math.fsum(total)
