"""
Enumeración de autointersecciones transversales
Conteos crudos, suavizados y localizados sobre trazas geodésicas

El recorrido acelerado usa una malla espacial uniforme sobre la caja del polígono; el
recorrido ingenuo por todos los pares se conserva como oráculo.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import stats

from app.config import settings
from app.core.errors import NonTransversalOverlapError
from app.core.hyperbolic import (
    ChordFrames,
    DiskPoint,
    chord_frames,
    chord_intersection,
    flow_array,
    intersect_frames,
)
from app.core.surface import SurfaceSpec
from app.core.tracer import GeodesicTrace

logger = logging.getLogger(__name__)

MAX_GRID = 64
MIN_GRID = 4


# ============================================
# TIPOS
# ============================================

@dataclass(frozen=True)
class Crossing:
    s: float
    t: float
    theta: float
    location: DiskPoint


@dataclass(frozen=True)
class CrossingSet:
    trace: GeodesicTrace
    crossings: Tuple[Crossing, ...]

    def __len__(self) -> int:
        return len(self.crossings)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([c.theta for c in self.crossings], dtype=float)

    @property
    def locations(self) -> np.ndarray:
        return np.array([c.location.z for c in self.crossings], dtype=complex)

    @property
    def later_times(self) -> np.ndarray:
        return np.array([c.t for c in self.crossings], dtype=float)


class Counts(NamedTuple):
    N: int
    N_phi: float
    N_phi_f: float


# ============================================
# MARCOS DE ARCOS
# ============================================

def arc_frames(geodesic: GeodesicTrace) -> ChordFrames:
    arcs = geodesic.arcs
    return chord_frames(
        [a.chord.p0.z for a in arcs],
        [a.chord.p1.z for a in arcs],
        [a.chord.length for a in arcs],
    )


def _take(frames: ChordFrames, index: np.ndarray) -> ChordFrames:
    return ChordFrames(*(arr[index] for arr in frames))


def _assemble(geodesic: GeodesicTrace, i: np.ndarray, j: np.ndarray, frac_i, frac_j, theta, point) -> CrossingSet:
    """Convertir hallazgos por pares de arcos en un CrossingSet ordenado y sin duplicados"""
    begins = np.array(geodesic.starts)
    durations = np.array([a.duration for a in geodesic.arcs])
    s = begins[i] + frac_i * durations[i]
    t = begins[j] + frac_j * durations[j]
    lo = np.minimum(s, t)
    hi = np.maximum(s, t)

    # Uniones entre arcos consecutivos
    keep = hi - lo >= settings.eps_time
    lo, hi, theta, point = lo[keep], hi[keep], theta[keep], point[keep]

    order = np.lexsort((hi, lo))
    crossings: List[Crossing] = []
    for k in order:
        if crossings:
            prev = crossings[-1]
            if abs(prev.s - lo[k]) < settings.dedup_tol and abs(prev.t - hi[k]) < settings.dedup_tol:
                continue
        crossings.append(Crossing(float(lo[k]), float(hi[k]), float(theta[k]), DiskPoint(complex(point[k]))))
    return CrossingSet(geodesic, tuple(crossings))


# ============================================
# ENUMERACIÓN
# ============================================

def self_intersections_naive(geodesic: GeodesicTrace) -> CrossingSet:
    """Oráculo O(n²): chord_intersection sobre todos los pares de arcos"""
    arcs = geodesic.arcs
    found_i, found_j, frac_i, frac_j, theta, point = [], [], [], [], [], []
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            try:
                hit = chord_intersection(arcs[i].chord, arcs[j].chord)
            except NonTransversalOverlapError as e:
                logger.warning(f"⚠️ Arcos {i} y {j} sobre la misma geodésica: {e}")
                continue
            if hit is None:
                continue
            found_i.append(i)
            found_j.append(j)
            frac_i.append(hit.frac1)
            frac_j.append(hit.frac2)
            theta.append(hit.theta)
            point.append(hit.point.z)
    return _assemble(
        geodesic,
        np.array(found_i, dtype=int), np.array(found_j, dtype=int),
        np.array(frac_i, dtype=float), np.array(frac_j, dtype=float),
        np.array(theta, dtype=float), np.array(point, dtype=complex),
    )


def _grid_cells(geodesic: GeodesicTrace, extent: float, grid: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Celdas visitadas por cada arco, dilatadas una celda

    Los arcos se muestrean con paso hiperbólico igual al lado de celda; la rapidez euclídea en
    el disco es ≤ 1/2, así que todo punto del arco queda a menos de media celda de una muestra.
    """
    cell = 2.0 * extent / grid
    arcs = geodesic.arcs
    lengths = np.array([a.chord.length for a in arcs])
    per_arc = np.ceil(lengths / cell).astype(int) + 1
    owner = np.repeat(np.arange(len(arcs)), per_arc)
    offsets = np.concatenate([np.linspace(0.0, L, m) for L, m in zip(lengths, per_arc)])
    bases = np.array([a.entry.base.z for a in arcs])[owner]
    dirs = np.array([a.entry.dir for a in arcs])[owner]
    points, _ = flow_array(bases, dirs, offsets)

    ix = np.clip(np.floor((points.real + extent) / cell).astype(int), 0, grid - 1)
    iy = np.clip(np.floor((points.imag + extent) / cell).astype(int), 0, grid - 1)
    keys, arcs_of = [], []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            cx = ix + dx
            cy = iy + dy
            valid = (cx >= 0) & (cx < grid) & (cy >= 0) & (cy < grid)
            keys.append(cx[valid] * grid + cy[valid])
            arcs_of.append(owner[valid])
    packed = np.unique(np.concatenate(keys) * len(arcs) + np.concatenate(arcs_of))
    return packed // len(arcs), packed % len(arcs)


def candidate_pairs(geodesic: GeodesicTrace, spec: SurfaceSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Pares (i < j) de arcos que comparten alguna celda de la malla"""
    n = len(geodesic.arcs)
    if n < 2:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    extent = max(abs(v.z) for v in spec.polygon)
    grid = int(np.clip(math.isqrt(n), MIN_GRID, MAX_GRID))
    cell_keys, arc_ids = _grid_cells(geodesic, extent, grid)

    boundaries = np.flatnonzero(np.diff(cell_keys)) + 1
    encoded = []
    for members in np.split(arc_ids, boundaries):
        if len(members) < 2:
            continue
        a, b = np.triu_indices(len(members), k=1)
        encoded.append(members[a] * n + members[b])
    if not encoded:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    pairs = np.unique(np.concatenate(encoded))
    return pairs // n, pairs % n


def self_intersections(geodesic: GeodesicTrace, spec: SurfaceSpec) -> CrossingSet:
    """
    Autointersecciones transversales de la proyección de γ[0, T]

    Los candidatos salen de la malla espacial y se resuelven en lote; el resultado coincide con
    self_intersections_naive.
    """
    i, j = candidate_pairs(geodesic, spec)
    if len(i) == 0:
        return CrossingSet(geodesic, ())
    frames = arc_frames(geodesic)
    result = intersect_frames(_take(frames, i), _take(frames, j))
    if np.any(result.overlap):
        logger.warning(f"⚠️ {int(np.sum(result.overlap))} pares de arcos sobre la misma geodésica")
    hit = result.hit
    return _assemble(
        geodesic, i[hit], j[hit],
        result.frac_a[hit], result.frac_b[hit], result.theta[hit], result.point[hit],
    )


def restrict_crossings(crossings: CrossingSet, t1: float) -> Tuple[Crossing, ...]:
    """Cruces de γ[0, t1]: los de tiempo posterior t ≤ t1"""
    return tuple(c for c in crossings.crossings if c.t <= t1)


def mutual_intersections(trace_a: GeodesicTrace, trace_b: GeodesicTrace, phi) -> float:
    """M_φ: suma de φ(θ) sobre los cruces transversales entre las dos proyecciones"""
    na, nb = len(trace_a.arcs), len(trace_b.arcs)
    ia, ib = np.meshgrid(np.arange(na), np.arange(nb), indexing="ij")
    result = intersect_frames(_take(arc_frames(trace_a), ia.ravel()), _take(arc_frames(trace_b), ib.ravel()))
    thetas = np.sort(result.theta[result.hit])
    return math.fsum(np.sort(np.asarray(phi(thetas), dtype=float)))


def weighted_counts(crossings, phi, f: Optional[Callable] = None) -> Counts:
    """
    N, N_φ y N_{φ;f} de un conjunto de cruces

    Args:
        crossings: CrossingSet o secuencia de Crossing
        phi: función de suavizado (vectorizada sobre ángulos)
        f: localizador opcional sobre la superficie (vectorizado sobre puntos complejos)
    """
    items = crossings.crossings if isinstance(crossings, CrossingSet) else tuple(crossings)
    if not items:
        return Counts(0, 0.0, 0.0)
    thetas = np.array([c.theta for c in items])
    weights = np.asarray(phi(thetas), dtype=float) * np.ones_like(thetas)
    n_phi = math.fsum(weights)
    if f is None:
        return Counts(len(items), n_phi, n_phi)
    local = np.asarray(f(np.array([c.location.z for c in items])), dtype=float) * np.ones_like(thetas)
    return Counts(len(items), n_phi, math.fsum(local * weights))


# ============================================
# DISTRIBUCIÓN DE LOS CRUCES
# ============================================

def location_histogram(crossings: CrossingSet, spec: SurfaceSpec, bins: int = 16) -> Tuple[np.ndarray, float]:
    """
    Cruces por sectores angulares congruentes del polígono y p-valor chi-cuadrado de uniformidad

    `bins` debe ser múltiplo del número de lados para que los sectores tengan igual área.
    """
    sector = np.floor(np.mod(np.angle(crossings.locations), 2 * math.pi) / (2 * math.pi / bins)).astype(int)
    counts = np.bincount(np.clip(sector, 0, bins - 1), minlength=bins)
    return counts, float(stats.chisquare(counts).pvalue)


def angle_ks(crossings: CrossingSet) -> Tuple[float, float]:
    """KS de los ángulos de cruce frente a la densidad sen θ / 2 en (0, π)"""
    result = stats.kstest(crossings.thetas, lambda x: 0.5 * (1.0 - np.cos(x)))
    return float(result.statistic), float(result.pvalue)
