"""
Geometría hiperbólica exacta en el disco de Poincaré
Isometrías de Möbius, distancias, flujo geodésico e intersección de cuerdas

Las intersecciones se calculan en el modelo del hiperboloide: cada geodésica es un plano
por el origen de Minkowski y dos geodésicas se cortan en la dirección del producto cruz
de sus normales.
"""

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from app.config import settings
from app.core.errors import DomainError, InvalidIsometryError, NonTransversalOverlapError

TWO_PI = 2.0 * math.pi

# Signatura (−, +, +)
MINKOWSKI = np.array([-1.0, 1.0, 1.0])

# Normales casi paralelas: misma geodésica
SAME_GEODESIC_TOL = 1e-9


def normalize_angle(angle: float) -> float:
    """Reducir un ángulo a [0, 2π)"""
    reduced = angle % TWO_PI
    if reduced >= TWO_PI:
        return 0.0
    return reduced


def angle_gap(a: float, b: float) -> float:
    """Distancia entre dos ángulos en el círculo"""
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


# ============================================
# TIPOS
# ============================================

@dataclass(frozen=True)
class DiskPoint:
    z: complex

    def __post_init__(self):
        if not abs(self.z) < 1.0:
            raise DomainError(f"Punto fuera del disco unitario: |z| = {abs(self.z)}")


@dataclass(frozen=True)
class UnitTangent:
    base: DiskPoint
    dir: float

    def __post_init__(self):
        object.__setattr__(self, "dir", normalize_angle(float(self.dir)))

    @classmethod
    def at(cls, z: complex, direction: float) -> "UnitTangent":
        return cls(DiskPoint(complex(z)), direction)


@dataclass(frozen=True)
class MobiusMap:
    """
    Isometría z ↦ (az + b)/(b̄z + ā) con |a|² − |b|² = 1

    La condición de determinante se comprueba al aplicar o componer, no al construir.
    """
    a: complex
    b: complex

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1 + 0j, 0j)

    @classmethod
    def rotation(cls, angle: float) -> "MobiusMap":
        return cls(cmath.exp(0.5j * angle), 0j)

    @classmethod
    def translation(cls, axis_angle: float, length: float) -> "MobiusMap":
        """Traslación hiperbólica de longitud `length` a lo largo del diámetro de ángulo `axis_angle`"""
        return cls(
            complex(math.cosh(0.5 * length)),
            math.sinh(0.5 * length) * cmath.exp(1j * axis_angle),
        )

    @property
    def determinant(self) -> float:
        return abs(self.a) ** 2 - abs(self.b) ** 2

    def check(self, tol: Optional[float] = None) -> None:
        tol = settings.isometry_tol if tol is None else tol
        if abs(self.determinant - 1.0) > tol:
            raise InvalidIsometryError(
                f"Isometría no unimodular: |a|² − |b|² = {self.determinant!r}"
            )

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.b.conjugate() * z + self.a.conjugate())

    def apply_array(self, z: np.ndarray) -> np.ndarray:
        return (self.a * z + self.b) / (np.conj(self.b) * z + np.conj(self.a))

    def derivative_arg(self, z: complex) -> float:
        """Argumento de la derivada en z (rotación de las direcciones tangentes)"""
        return -2.0 * cmath.phase(self.b.conjugate() * z + self.a.conjugate())

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self ∘ other, renormalizado a determinante 1"""
        self.check()
        other.check()
        a = self.a * other.a + self.b * other.b.conjugate()
        b = self.a * other.b + self.b * other.a.conjugate()
        scale = 1.0 / math.sqrt(abs(a) ** 2 - abs(b) ** 2)
        return MobiusMap(a * scale, b * scale)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.a.conjugate(), -self.b)

    def translation_length(self) -> float:
        """Longitud de traslación (0 para elípticas y parabólicas)"""
        half_trace = abs(self.a.real)
        return 2.0 * math.acosh(half_trace) if half_trace > 1.0 else 0.0

    def is_close(self, other: "MobiusMap", tol: float) -> bool:
        # (a, b) y (−a, −b) representan la misma isometría
        direct = max(abs(self.a - other.a), abs(self.b - other.b))
        flipped = max(abs(self.a + other.a), abs(self.b + other.b))
        return min(direct, flipped) <= tol


def frame_map(u: UnitTangent) -> MobiusMap:
    """Isometría que lleva (0, dirección 0) a u"""
    p = u.base.z
    scale = 1.0 / math.sqrt(1.0 - abs(p) ** 2)
    half = cmath.exp(0.5j * u.dir)
    return MobiusMap(half * scale, p * half.conjugate() * scale)


# ============================================
# OPERACIONES
# ============================================

def apply_isometry(m: MobiusMap, u: UnitTangent) -> UnitTangent:
    m.check()
    z = u.base.z
    return UnitTangent(DiskPoint(m(z)), u.dir + m.derivative_arg(z))


def hyperbolic_distance(p: DiskPoint, q: DiskPoint) -> float:
    """
    Distancia en el disco: 2·artanh|(p − q)/(1 − p̄q)|

    Raises:
        DomainError: si algún punto no está estrictamente dentro del disco
    """
    for point in (p, q):
        if not abs(point.z) < 1.0:
            raise DomainError(f"Punto fuera del disco unitario: {point.z}")
    ratio = abs((p.z - q.z) / (1.0 - p.z.conjugate() * q.z))
    return 2.0 * math.atanh(ratio)


def distance_array(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Versión vectorizada de hyperbolic_distance sobre coordenadas complejas"""
    ratio = np.abs((z - w) / (1.0 - np.conj(z) * w))
    return 2.0 * np.arctanh(np.minimum(ratio, 1.0 - 1e-16))


def flow(u: UnitTangent, s: float) -> UnitTangent:
    """Flujo geodésico de longitud con signo s en el recubrimiento universal"""
    p = u.base.z
    w = cmath.exp(1j * u.dir) * math.tanh(0.5 * s)
    denom = p.conjugate() * w + 1.0
    return UnitTangent(DiskPoint((w + p) / denom), u.dir - 2.0 * cmath.phase(denom))


def flow_array(z: np.ndarray, direction: np.ndarray, s) -> tuple:
    """Flujo vectorizado: devuelve (bases, direcciones)"""
    w = np.exp(1j * direction) * np.tanh(0.5 * np.asarray(s, dtype=float))
    denom = np.conj(z) * w + 1.0
    return (w + z) / denom, np.mod(direction - 2.0 * np.angle(denom), TWO_PI)


# ============================================
# MODELO DEL HIPERBOLOIDE
# ============================================

def minkowski_dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return -x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] + x[..., 2] * y[..., 2]


def minkowski_cross(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.cross(x, y) * MINKOWSKI


def to_hyperboloid(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    w = np.abs(z) ** 2
    denom = 1.0 - w
    return np.stack([(1.0 + w) / denom, 2.0 * z.real / denom, 2.0 * z.imag / denom], axis=-1)


def from_hyperboloid(x: np.ndarray) -> np.ndarray:
    return (x[..., 1] + 1j * x[..., 2]) / (1.0 + x[..., 0])


def tangent_vector(z, direction) -> np.ndarray:
    """Vector tangente unitario en el hiperboloide para la dirección dada en el disco"""
    z = np.asarray(z, dtype=complex)
    c = np.cos(direction)
    s = np.sin(direction)
    x, y = z.real, z.imag
    w = x * x + y * y
    denom = 1.0 - w
    radial = x * c + y * s
    return np.stack([
        2.0 * radial / denom,
        ((1.0 - w) * c + 2.0 * x * radial) / denom,
        ((1.0 - w) * s + 2.0 * y * radial) / denom,
    ], axis=-1)


def direction_of(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Ángulo en el disco del vector tangente t en el punto x del hiperboloide"""
    one = 1.0 + x[..., 0]
    dz = (t[..., 1] + 1j * t[..., 2]) / one - (x[..., 1] + 1j * x[..., 2]) * t[..., 0] / one ** 2
    return np.mod(np.angle(dz), TWO_PI)


# ============================================
# CUERDAS
# ============================================

@dataclass(frozen=True)
class Chord:
    p0: DiskPoint
    p1: DiskPoint
    length: float = field(init=False)

    def __post_init__(self):
        length = hyperbolic_distance(self.p0, self.p1)
        if length <= 0.0:
            raise DomainError(f"Cuerda degenerada en {self.p0.z}")
        object.__setattr__(self, "length", length)


class ChordFrames(NamedTuple):
    """Arreglos (n, 3) del hiperboloide para un lote de cuerdas"""
    start: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    length: np.ndarray


def chord_frames(z0, z1, length=None) -> ChordFrames:
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
    if length is None:
        length = distance_array(z0, z1)
    length = np.atleast_1d(np.asarray(length, dtype=float))
    start = to_hyperboloid(z0)
    end = to_hyperboloid(z1)
    tangent = (end - np.cosh(length)[:, None] * start) / np.sinh(length)[:, None]
    normal = minkowski_cross(start, tangent)
    normal = normal / np.sqrt(minkowski_dot(normal, normal))[:, None]
    return ChordFrames(start, tangent, normal, length)


def frames_of(chords) -> ChordFrames:
    return chord_frames(
        [c.p0.z for c in chords], [c.p1.z for c in chords], [c.length for c in chords]
    )


class BatchIntersection(NamedTuple):
    hit: np.ndarray
    overlap: np.ndarray
    point: np.ndarray
    theta: np.ndarray
    frac_a: np.ndarray
    frac_b: np.ndarray


def intersect_frames(fa: ChordFrames, fb: ChordFrames, eps_end: Optional[float] = None) -> BatchIntersection:
    """
    Intersección elemento a elemento de dos lotes de cuerdas

    `hit` marca cruces transversales interiores a ambas cuerdas; `overlap` marca pares sobre
    la misma geodésica con interiores solapados.
    """
    eps = settings.eps_end if eps_end is None else eps_end
    with np.errstate(invalid="ignore", divide="ignore"):
        raw = np.cross(fa.normal, fb.normal)
        same = np.linalg.norm(raw, axis=-1) < SAME_GEODESIC_TOL
        v = raw * MINKOWSKI
        vv = minkowski_dot(v, v)
        timelike = (vv < 0.0) & ~same
        x = v / np.sqrt(np.where(timelike, -vv, 1.0))[:, None]
        x = np.where((x[:, 0] < 0.0)[:, None], -x, x)

        sa = np.arcsinh(minkowski_dot(x, fa.tangent))
        sb = np.arcsinh(minkowski_dot(x, fb.tangent))
        frac_a = sa / fa.length
        frac_b = sb / fb.length

        ua = np.sinh(sa)[:, None] * fa.start + np.cosh(sa)[:, None] * fa.tangent
        ub = np.sinh(sb)[:, None] * fb.start + np.cosh(sb)[:, None] * fb.tangent
        theta = np.arccos(np.clip(minkowski_dot(ua, ub), -1.0, 1.0))

        hit = (
            timelike
            & (frac_a > eps) & (frac_a < 1.0 - eps)
            & (frac_b > eps) & (frac_b < 1.0 - eps)
            & (theta > 0.0) & (theta < math.pi)
        )

        # Solapamiento: extremos de b proyectados sobre el parámetro de a
        b_start = np.arcsinh(minkowski_dot(fb.start, fa.tangent))
        b_end = np.arcsinh(minkowski_dot(
            np.cosh(fb.length)[:, None] * fb.start + np.sinh(fb.length)[:, None] * fb.tangent,
            fa.tangent,
        ))
        low = np.maximum(np.minimum(b_start, b_end), 0.0)
        high = np.minimum(np.maximum(b_start, b_end), fa.length)
        overlap = same & (high - low > eps * np.minimum(fa.length, fb.length))

    return BatchIntersection(
        hit=hit,
        overlap=overlap,
        point=np.where(hit, from_hyperboloid(x), 0.0),
        theta=np.where(hit, theta, 0.0),
        frac_a=frac_a,
        frac_b=frac_b,
    )


class ChordIntersection(NamedTuple):
    point: DiskPoint
    theta: float
    frac1: float
    frac2: float


def chord_intersection(c1: Chord, c2: Chord, eps_end: Optional[float] = None) -> Optional[ChordIntersection]:
    """
    Cruce transversal de dos arcos geodésicos

    Returns:
        ChordIntersection con el ángulo plegado a (0, π), o None si no se cortan en el
        interior de ambos

    Raises:
        NonTransversalOverlapError: si las cuerdas yacen en la misma geodésica y se solapan
    """
    result = intersect_frames(frames_of([c1]), frames_of([c2]), eps_end)
    if result.overlap[0]:
        raise NonTransversalOverlapError(
            f"Cuerdas sobre la misma geodésica: {c1.p0.z}→{c1.p1.z} y {c2.p0.z}→{c2.p1.z}"
        )
    if not result.hit[0]:
        return None
    return ChordIntersection(
        point=DiskPoint(complex(result.point[0])),
        theta=float(result.theta[0]),
        frac1=float(result.frac_a[0]),
        frac2=float(result.frac_b[0]),
    )
