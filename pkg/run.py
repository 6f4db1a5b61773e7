#!/usr/bin/env python3
"""
GEOFLUX - Script de inicio
Ejecutar este archivo con un subcomando: python run.py slln --seed 42
"""

import sys
from pathlib import Path

# Agregar el directorio raíz al path
sys.path.insert(0, str(Path(__file__).parent))

from app.main import main  # noqa: E402

if __name__ == "__main__":
    print("=" * 60, file=sys.stderr)
    print("🚀 GEOFLUX - Autointersecciones de geodésicas aleatorias", file=sys.stderr)
    print("=" * 60, file=sys.stderr)
    sys.exit(main())
