"""
GEOFLUX
Simulador y kit estadístico de autointersecciones de geodésicas aleatorias en superficies hiperbólicas
"""

__version__ = "1.0.0"
__author__ = "GEOFLUX Team"
