"""
Utilidades del core
Semillas reproducibles, archivos key=value y carpetas de salida
"""

from pathlib import Path
from typing import Dict
import logging

import numpy as np

from app.core.errors import UsageError

logger = logging.getLogger(__name__)


# ============================================
# SEMILLAS
# ============================================

def derive_seed(master_seed: int, index: int) -> int:
    """
    Semilla de 64 bits de la réplica `index`

    Función determinista de (master_seed, index) vía SeedSequence; réplicas distintas
    obtienen flujos independientes.
    """
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


# ============================================
# ARCHIVOS
# ============================================

def read_keyvalue_file(path: str) -> Dict[str, str]:
    """
    Leer un manifiesto key=value

    Las líneas vacías y las que empiezan por '#' se ignoran.

    Raises:
        UsageError: si el archivo no existe o alguna línea no tiene '='
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise UsageError(f"No existe el archivo de configuración: {path}", flag="--config")

    values: Dict[str, str] = {}
    for number, raw in enumerate(file_path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: se esperaba key=value, se obtuvo {line!r}", flag="--config")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def ensure_output_dir(path: str) -> Path:
    """Crear la carpeta de salida si no existe"""
    folder = Path(path)
    folder.mkdir(parents=True, exist_ok=True)
    return folder
