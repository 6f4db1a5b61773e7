"""
Trazado de segmentos geodésicos sobre la superficie
Cadena de arcos dentro del polígono fundamental con contabilidad exacta del tiempo
"""

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from app.config import settings
from app.core.errors import DomainError, PreconditionError, RangeError, VertexHitError
from app.core.hyperbolic import (
    MINKOWSKI,
    Chord,
    UnitTangent,
    apply_isometry,
    distance_array,
    flow,
    tangent_vector,
    to_hyperboloid,
)
from app.core.surface import DeckWord, SurfaceSpec, require_inside

logger = logging.getLogger(__name__)

# Arcos finales más cortos se funden con el cruce de lado
MIN_ARC = 1e-12


@dataclass(frozen=True)
class Arc:
    entry: UnitTangent
    chord: Chord
    t_begin: float
    t_end: float  # intervalo semiabierto [t_begin, t_end)
    exit_word: DeckWord
    exit_side: int = -1  # -1: el arco termina en el tiempo total

    @property
    def duration(self) -> float:
        return self.t_end - self.t_begin


@dataclass(frozen=True)
class GeodesicTrace:
    u0: UnitTangent
    total_time: float
    arcs: Tuple[Arc, ...]
    starts: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(arc.t_begin for arc in self.arcs))


def _next_exit(spec: SurfaceSpec, u: UnitTangent) -> Tuple[int, float]:
    """Lado por el que sale el rayo y tiempo de salida, en forma cerrada"""
    p = to_hyperboloid(u.base.z) * MINKOWSKI
    t = tangent_vector(u.base.z, u.dir) * MINKOWSKI
    pn = spec.side_normals @ p
    tn = spec.side_normals @ t
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(tn > 0.0, np.maximum(-pn, 0.0) / tn, np.inf)
    times = np.where(ratio < 1.0, np.arctanh(np.where(ratio < 1.0, ratio, 0.0)), np.inf)
    k = int(np.argmin(times))
    if not np.isfinite(times[k]):
        raise DomainError(f"El rayo desde {u.base.z} no abandona el polígono")
    return k, float(times[k])


def _check_vertex(spec: SurfaceSpec, z: complex) -> None:
    vertices = np.array([v.z for v in spec.polygon])
    gap = float(np.min(distance_array(np.full(len(vertices), z), vertices)))
    if gap < settings.vertex_tol:
        raise VertexHitError(f"Trayectoria a {gap:.2e} de un vértice en {z}")


def trace(u0: UnitTangent, total_time: float, spec: SurfaceSpec) -> GeodesicTrace:
    """
    Trazar γ[0, T] como cadena maximal de arcos dentro del polígono

    Cada arco termina exactamente en un cruce de lado (salvo el último, que termina en T);
    el generador del lado de salida lleva el vector tangente al arco siguiente.

    Raises:
        DomainError: si u0 no está en el polígono cerrado
        PreconditionError: si T ≤ 0
        VertexHitError: si la trayectoria toca un vértice
    """
    require_inside(spec, u0.base.z)
    if not total_time > 0.0:
        raise PreconditionError(f"Tiempo total no positivo: {total_time}")

    arcs: List[Arc] = []
    t = 0.0
    current = u0
    while True:
        remaining = total_time - t
        k, s_exit = _next_exit(spec, current)
        if s_exit >= remaining - MIN_ARC:
            end = flow(current, remaining)
            arcs.append(Arc(current, Chord(current.base, end.base), t, total_time, DeckWord.identity()))
            break

        exit_tangent = flow(current, s_exit)
        _check_vertex(spec, exit_tangent.base.z)
        g = spec.generators[k]
        t_next = t + s_exit
        arcs.append(Arc(current, Chord(current.base, exit_tangent.base), t, t_next, DeckWord(g, (k,)), k))
        t = t_next
        current = apply_isometry(g, exit_tangent)

    return GeodesicTrace(u0, float(total_time), tuple(arcs))


def tangent_at(geodesic: GeodesicTrace, s: float) -> UnitTangent:
    """Vector tangente en el tiempo s (convención semiabierta en las uniones)"""
    if not 0.0 <= s <= geodesic.total_time:
        raise RangeError(f"Tiempo {s} fuera de [0, {geodesic.total_time}]")
    index = max(bisect_right(geodesic.starts, s) - 1, 0)
    arc = geodesic.arcs[index]
    return flow(arc.entry, s - arc.t_begin)


def restrict(geodesic: GeodesicTrace, t1: float) -> GeodesicTrace:
    """Prefijo γ[0, t1] de una traza más larga"""
    if not 0.0 < t1 <= geodesic.total_time:
        raise RangeError(f"Tiempo de corte {t1} fuera de (0, {geodesic.total_time}]")
    arcs = []
    for arc in geodesic.arcs:
        if arc.t_begin >= t1:
            break
        if arc.t_end <= t1:
            arcs.append(arc)
            continue
        end = flow(arc.entry, t1 - arc.t_begin)
        arcs.append(Arc(arc.entry, Chord(arc.entry.base, end.base), arc.t_begin, t1, DeckWord.identity()))
        break
    return GeodesicTrace(geodesic.u0, float(t1), tuple(arcs))


def reverse_start(geodesic: GeodesicTrace) -> UnitTangent:
    """Vector inicial de la geodésica recorrida en sentido inverso"""
    end = tangent_at(geodesic, geodesic.total_time)
    return UnitTangent(end.base, end.dir + math.pi)


def trace_rows(geodesic: GeodesicTrace) -> List[tuple]:
    """Filas del volcado: t_begin, t_end, entrada (re, im, dir), lado de salida"""
    return [
        (arc.t_begin, arc.t_end, arc.entry.base.z.real, arc.entry.base.z.imag, arc.entry.dir, arc.exit_side)
        for arc in geodesic.arcs
    ]
