"""
Superficies hiperbólicas compactas
Grupo fuchsiano, polígono fundamental, reducción de puntos y muestreo de Liouville

La superficie concreta es la de Bolza: octógono regular centrado en el origen con ángulos
interiores π/4 y lados opuestos emparejados por traslaciones hiperbólicas.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.core.errors import (
    ConfigurationError,
    DomainError,
    InvalidPolygonError,
    ReductionDivergenceError,
    SurfaceConstructionError,
)
from app.core.hyperbolic import (
    MINKOWSKI,
    TWO_PI,
    DiskPoint,
    MobiusMap,
    UnitTangent,
    angle_gap,
    apply_isometry,
    chord_frames,
    to_hyperboloid,
)

logger = logging.getLogger(__name__)


# ============================================
# CONFIGURACIÓN
# ============================================

BOLZA_SIDES = 8
BOLZA_INTERIOR_ANGLE = math.pi / 4

# Ciclo de vértices: g5 ∘ g2 ∘ g7 ∘ g4 ∘ g1 ∘ g6 ∘ g3 ∘ g0 = identidad
BOLZA_RELATION = (5, 2, 7, 4, 1, 6, 3, 0)

RELATION_TOL = 1e-8
PAIRING_TOL = 1e-8
SYSTOLE_SCAN_LENGTH = 3


# ============================================
# TIPOS
# ============================================

@dataclass(frozen=True)
class DeckWord:
    map: MobiusMap
    letters: Tuple[int, ...] = ()  # índices de generadores en orden de aplicación

    @classmethod
    def identity(cls) -> "DeckWord":
        return cls(MobiusMap.identity(), ())

    def then(self, index: int, generator: MobiusMap) -> "DeckWord":
        return DeckWord(generator.compose(self.map), self.letters + (index,))


@dataclass(frozen=True, eq=False)
class SurfaceSpec:
    name: str
    generators: Tuple[MobiusMap, ...]  # g_k lleva el lado k sobre el lado pairing[k]
    pairing: Tuple[int, ...]
    polygon: Tuple[DiskPoint, ...]  # lado k = [polygon[k-1], polygon[k]]
    area: float
    systole_lower_bound: float
    inradius: float
    circumradius: float
    relation: Tuple[int, ...]
    side_normals: np.ndarray  # normales de Minkowski, interior ⟨X, N⟩ < 0

    @property
    def sides(self) -> int:
        return len(self.polygon)

    def side_endpoints(self, k: int) -> Tuple[complex, complex]:
        return self.polygon[k - 1].z, self.polygon[k].z


# ============================================
# GEOMETRÍA DEL POLÍGONO
# ============================================

def interior_angles(polygon) -> List[float]:
    """Ángulo interior en cada vértice, medido tras llevar el vértice al origen"""
    angles = []
    n = len(polygon)
    for j in range(n):
        v = polygon[j].z
        prev_z = polygon[j - 1].z
        next_z = polygon[(j + 1) % n].z
        to_origin = lambda z: (z - v) / (1.0 - v.conjugate() * z)
        angles.append(angle_gap(np.angle(to_origin(prev_z)), np.angle(to_origin(next_z))))
    return angles


def surface_area(spec: SurfaceSpec) -> float:
    """
    Área por Gauss–Bonnet: (n − 2)π − Σ ángulos interiores

    Raises:
        InvalidPolygonError: si el polígono tiene menos de 3 vértices o no es hiperbólico
    """
    n = len(spec.polygon)
    if n < 3:
        raise InvalidPolygonError(f"Polígono con {n} vértices")
    angle_sum = sum(interior_angles(spec.polygon))
    euclidean_sum = (n - 2) * math.pi
    if angle_sum >= euclidean_sum - 1e-12:
        raise InvalidPolygonError(
            f"Suma de ángulos {angle_sum:.12f} ≥ (n − 2)π = {euclidean_sum:.12f}"
        )
    return euclidean_sum - angle_sum


def side_margins(spec: SurfaceSpec, z) -> np.ndarray:
    """⟨X(z), N_k⟩ para cada lado; positivo fuera del semiplano del lado"""
    x = to_hyperboloid(z)
    return (x * MINKOWSKI) @ spec.side_normals.T


def contains(spec: SurfaceSpec, z, tol: float = 1e-9):
    """Pertenencia al polígono cerrado (acepta escalares o arreglos)"""
    margins = side_margins(spec, z)
    return np.all(margins <= tol, axis=-1)


def relation_map(spec: SurfaceSpec) -> MobiusMap:
    m = MobiusMap.identity()
    for k in spec.relation:
        m = m.compose(spec.generators[k])
    return m


def shortest_translation_length(spec: SurfaceSpec, max_word_length: int = SYSTOLE_SCAN_LENGTH) -> float:
    """Mínima longitud de traslación sobre palabras reducidas de longitud ≤ max_word_length"""
    best = math.inf
    n = len(spec.generators)
    for length in range(1, max_word_length + 1):
        for word in product(range(n), repeat=length):
            if any(spec.pairing[word[i]] == word[i + 1] for i in range(length - 1)):
                continue
            m = MobiusMap.identity()
            for k in word:
                m = spec.generators[k].compose(m)
            ell = m.translation_length()
            if ell > 0.0:
                best = min(best, ell)
    return best


def pairing_error(spec: SurfaceSpec, k: int) -> float:
    """Máxima distancia entre g_k(lado k) y el lado emparejado, con el mejor orden de extremos"""
    images = [spec.generators[k](z) for z in spec.side_endpoints(k)]
    targets = spec.side_endpoints(spec.pairing[k])
    straight = max(abs(images[0] - targets[0]), abs(images[1] - targets[1]))
    swapped = max(abs(images[0] - targets[1]), abs(images[1] - targets[0]))
    return min(straight, swapped)


def _verify(spec: SurfaceSpec) -> None:
    # 1. Relación del grupo
    if not relation_map(spec).is_close(MobiusMap.identity(), RELATION_TOL):
        raise SurfaceConstructionError(f"La relación {spec.relation} no da la identidad")

    # 2. Cada generador lleva su lado sobre el lado emparejado
    for k in range(len(spec.generators)):
        if pairing_error(spec, k) > PAIRING_TOL:
            raise SurfaceConstructionError(f"El generador {k} no empareja sus lados")

    # 3. Área y sístole
    if abs(surface_area(spec) - spec.area) > 1e-8:
        raise SurfaceConstructionError(f"Área inconsistente: {spec.area}")
    shortest = shortest_translation_length(spec)
    if shortest < spec.systole_lower_bound - 1e-9:
        raise SurfaceConstructionError(
            f"Palabra con traslación {shortest:.9f} < cota de sístole {spec.systole_lower_bound:.9f}"
        )


def build_bolza() -> SurfaceSpec:
    """Octógono regular de Bolza (género 2) con lados opuestos emparejados"""
    half_angle = BOLZA_INTERIOR_ANGLE / 2
    central = math.pi / BOLZA_SIDES
    inradius = math.acosh(math.cos(half_angle) / math.sin(central))
    circumradius = math.acosh(1.0 / (math.tan(central) * math.tan(half_angle)))
    vertex_radius = math.tanh(0.5 * circumradius)

    polygon = tuple(
        DiskPoint(vertex_radius * complex(math.cos(a), math.sin(a)))
        for a in ((2 * j + 1) * central for j in range(BOLZA_SIDES))
    )
    # g_k: traslación de 2·inradio hacia el lado opuesto
    generators = tuple(
        MobiusMap.translation(k * 2 * central + math.pi, 2.0 * inradius) for k in range(BOLZA_SIDES)
    )
    pairing = tuple((k + BOLZA_SIDES // 2) % BOLZA_SIDES for k in range(BOLZA_SIDES))

    frames = chord_frames(
        [polygon[k - 1].z for k in range(BOLZA_SIDES)],
        [polygon[k].z for k in range(BOLZA_SIDES)],
    )
    normals = np.where((frames.normal[:, 0] < 0.0)[:, None], -frames.normal, frames.normal)

    spec = SurfaceSpec(
        name="bolza",
        generators=generators,
        pairing=pairing,
        polygon=polygon,
        area=(BOLZA_SIDES - 2) * math.pi - BOLZA_SIDES * BOLZA_INTERIOR_ANGLE,
        systole_lower_bound=2.0 * math.acosh(1.0 + math.sqrt(2.0)),
        inradius=inradius,
        circumradius=circumradius,
        relation=BOLZA_RELATION,
        side_normals=normals,
    )
    _verify(spec)
    logger.info(f"✅ Superficie de Bolza construida (área {spec.area:.10f}, sístole ≥ {spec.systole_lower_bound:.6f})")
    return spec


# ============================================
# REDUCCIÓN
# ============================================

def _reduce(spec: SurfaceSpec, z: complex, direction: Optional[float] = None):
    word = DeckWord.identity()
    for _ in range(settings.reduce_max_iter):
        margins = side_margins(spec, z)
        k = int(np.argmax(margins))
        if margins[k] <= settings.side_tol:
            return z, direction, word
        g = spec.generators[k]
        if direction is not None:
            direction = direction + g.derivative_arg(z)
        z = g(z)
        word = word.then(k, g)
    raise ReductionDivergenceError(
        f"Reducción sin converger tras {settings.reduce_max_iter} iteraciones (z = {z})"
    )


def reduce(z: DiskPoint, spec: SurfaceSpec) -> Tuple[DiskPoint, DeckWord]:
    """
    Llevar z al polígono fundamental cerrado

    Aplica de forma voraz el generador cuyo lado separa el punto del origen; los empates se
    resuelven por el primer índice de lado.

    Returns:
        (punto reducido, palabra de cubierta) con palabra.map(z) = punto reducido

    Raises:
        ReductionDivergenceError: si se supera settings.reduce_max_iter
    """
    reduced, _, word = _reduce(spec, z.z)
    return DiskPoint(reduced), word


def reduce_tangent(u: UnitTangent, spec: SurfaceSpec) -> Tuple[UnitTangent, DeckWord]:
    reduced, direction, word = _reduce(spec, u.base.z, u.dir)
    return UnitTangent(DiskPoint(reduced), direction), word


# ============================================
# VECINDARIO EN EL RECUBRIMIENTO
# ============================================

_nearby_cache: Dict[Tuple[str, float], List[DeckWord]] = {}


def nearby_deck_maps(spec: SurfaceSpec, radius: float) -> List[DeckWord]:
    """
    Elementos h del grupo con d(0, h(0)) ≤ radius

    Recorre la teselación por adyacencia de lados; la poda usa radius + circunradio para no
    cortar caminos que pasan por teselas más lejanas.
    """
    key = (spec.name, round(radius, 9))
    if key in _nearby_cache:
        return _nearby_cache[key]

    limit = math.cosh(radius + spec.circumradius)
    keep = math.cosh(radius)
    seen = {(0.0, 0.0)}
    queue = deque([DeckWord.identity()])
    found = []
    while queue:
        word = queue.popleft()
        center = word.map(0j)
        if float(to_hyperboloid(center)[0]) <= keep + 1e-12:
            found.append(word)
        for j, g in enumerate(spec.generators):
            # Tesela vecina: word.map(g_j(P)), g_j se aplica primero
            neighbor = DeckWord(word.map.compose(g), (j,) + word.letters)
            c = neighbor.map(0j)
            cosh_d = float(to_hyperboloid(c)[0])
            tag = (round(c.real, 7), round(c.imag, 7))
            if cosh_d <= limit and tag not in seen:
                seen.add(tag)
                queue.append(neighbor)

    found.sort(key=lambda w: (len(w.letters), w.letters))
    _nearby_cache[key] = found
    logger.debug(f"📊 {len(found)} traslados de cubierta a distancia ≤ {radius:.3f}")
    return found


def deck_coefficients(words: List[DeckWord]) -> Tuple[np.ndarray, np.ndarray]:
    return (
        np.array([w.map.a for w in words], dtype=complex),
        np.array([w.map.b for w in words], dtype=complex),
    )


# ============================================
# MUESTREO DE LIOUVILLE
# ============================================

def proposal_area(spec: SurfaceSpec) -> float:
    return TWO_PI * (math.cosh(spec.circumradius) - 1.0)


def _proposal_points(rng: np.random.Generator, spec: SurfaceSpec, n: int) -> np.ndarray:
    # Uniforme en área hiperbólica sobre el disco de radio circunradio
    u = rng.random(n)
    ang = TWO_PI * rng.random(n)
    r = np.arccosh(1.0 + u * (math.cosh(spec.circumradius) - 1.0))
    return np.tanh(0.5 * r) * np.exp(1j * ang)


def liouville_sample(rng: np.random.Generator, spec: SurfaceSpec) -> UnitTangent:
    """Punto uniforme en área sobre el polígono y dirección uniforme independiente"""
    while True:
        z = complex(_proposal_points(rng, spec, 1)[0])
        if contains(spec, z, tol=0.0):
            break
    return UnitTangent(DiskPoint(z), TWO_PI * rng.random())


def liouville_sample_batch(rng: np.random.Generator, spec: SurfaceSpec, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Versión vectorizada de liouville_sample: (bases complejas, direcciones)"""
    points = []
    missing = n
    while missing > 0:
        batch = _proposal_points(rng, spec, max(64, int(2.6 * missing)))
        accepted = batch[contains(spec, batch, tol=0.0)]
        points.append(accepted[:missing])
        missing -= len(points[-1])
    bases = np.concatenate(points)
    return bases, TWO_PI * rng.random(n)


def estimate_area(spec: SurfaceSpec, n: int, rng: np.random.Generator) -> Tuple[float, float]:
    """Estimación Monte Carlo del área: fracción de aciertos × área de la propuesta"""
    hits = contains(spec, _proposal_points(rng, spec, n), tol=0.0)
    p = float(np.mean(hits))
    area = proposal_area(spec)
    return area * p, area * math.sqrt(p * (1.0 - p) / n)


# ============================================
# REGISTRO
# ============================================

SURFACE_BUILDERS = {"bolza": build_bolza}

_surfaces: Dict[str, SurfaceSpec] = {}


def get_surface(name: str) -> SurfaceSpec:
    """Obtener superficie por nombre (construida una vez por proceso)"""
    key = name.lower()
    if key not in SURFACE_BUILDERS:
        raise ConfigurationError(
            f"Superficie desconocida: {name!r}. Opciones: {', '.join(sorted(SURFACE_BUILDERS))}"
        )
    if key not in _surfaces:
        _surfaces[key] = SURFACE_BUILDERS[key]()
    return _surfaces[key]


def require_inside(spec: SurfaceSpec, z: complex, tol: float = 1e-9) -> None:
    if not contains(spec, z, tol):
        raise DomainError(f"Punto fuera del polígono fundamental: {z}")
