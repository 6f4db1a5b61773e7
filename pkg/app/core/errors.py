"""
Excepciones del dominio
Jerarquía única para geometría, superficie, trazado, núcleos y experimentos
"""


class GeofluxError(Exception):
    """Error base de GEOFLUX"""


# ============================================
# GEOMETRÍA HIPERBÓLICA
# ============================================

class InvalidIsometryError(GeofluxError):
    """La matriz no cumple |a|² − |b|² = 1"""


class DomainError(GeofluxError):
    """Punto fuera del disco unitario, fuera del polígono o cuerda degenerada"""


class NonTransversalOverlapError(GeofluxError):
    """Dos cuerdas sobre la misma geodésica con interiores solapados"""


# ============================================
# SUPERFICIE
# ============================================

class ReductionDivergenceError(GeofluxError):
    """La reducción al polígono fundamental no terminó"""


class InvalidPolygonError(GeofluxError):
    """Suma de ángulos incompatible con un polígono hiperbólico"""


class SurfaceConstructionError(GeofluxError):
    """Los generadores no satisfacen las comprobaciones de construcción"""


# ============================================
# TRAZADO Y NÚCLEOS
# ============================================

class VertexHitError(GeofluxError):
    """La trayectoria pasa por un vértice del polígono"""


class RangeError(GeofluxError):
    """Tiempo fuera del intervalo trazado"""


class PreconditionError(GeofluxError):
    """Entrada que no cumple la precondición de la operación"""


class ConfigurationError(GeofluxError):
    """Parámetros inconsistentes"""


# ============================================
# EXPERIMENTOS Y CLI
# ============================================

class DegenerateDataError(GeofluxError):
    """Datos sin varianza o insuficientes para el estimador"""


class HarnessError(GeofluxError):
    """Fallo irrecuperable de una réplica"""


class UsageError(GeofluxError):
    """Argumento de línea de comandos inválido"""

    def __init__(self, message: str, flag: str = ""):
        super().__init__(message)
        self.flag = flag
