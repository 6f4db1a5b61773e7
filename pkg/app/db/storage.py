"""
Persistencia de resultados
CSV de réplicas, resumen, cruces y volcado de trazas; reporte key=value
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from app.config import settings
from app.core.intersections import CrossingSet
from app.core.tracer import GeodesicTrace, trace_rows
from app.core.utils import ensure_output_dir
from app.db.models import ReplicaRecord, ReportValue, SummaryRow

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["replica", "seed", "t", "N", "N_phi", "N_phi_f", "wall_ms"]
SUMMARY_COLUMNS = [
    "t", "count",
    "mean_N", "var_N", "se_N",
    "mean_Nphi", "var_Nphi", "se_Nphi",
    "mean_Nphif", "var_Nphif", "se_Nphif",
]
CROSSING_COLUMNS = ["s", "t", "theta", "loc_re", "loc_im"]
TRACE_COLUMNS = ["t_begin", "t_end", "entry_re", "entry_im", "entry_dir", "exit_side"]


def format_value(value) -> str:
    """Formato estable: repr para reales (ida y vuelta exacta), str para el resto"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_report(values: Dict[str, ReportValue]) -> str:
    return "".join(f"{key}={format_value(value)}\n" for key, value in values.items())


class ResultStore:
    """Carpeta de salida de un experimento"""

    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)
        self.written: List[Path] = []

    def open(self) -> "ResultStore":
        try:
            ensure_output_dir(str(self.output_dir))
        except OSError as e:
            logger.error(f"❌ No se pudo crear la carpeta de salida {self.output_dir}: {e}")
            raise
        return self

    def _write_rows(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = self.output_dir / name
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
        self.written.append(path)
        logger.info(f"💾 Escrito {path}")
        return path

    def write_records(self, records: List[ReplicaRecord], name: str = "records.csv") -> Path:
        """Una fila por (réplica, t)"""
        rows = []
        for record in sorted(records, key=lambda r: r.replica):
            for t, n, n_phi, n_phi_f in zip(record.t, record.N, record.N_phi, record.N_phi_f):
                rows.append((record.replica, record.seed, float(t), int(n), float(n_phi), float(n_phi_f), float(record.wall_ms)))
        return self._write_rows(name, RECORD_COLUMNS, rows)

    def write_summary(self, rows: List[SummaryRow], name: str = "summary.csv") -> Path:
        return self._write_rows(
            name, SUMMARY_COLUMNS,
            ([getattr(row, column) for column in SUMMARY_COLUMNS] for row in rows),
        )

    def write_crossings(self, crossings: CrossingSet, name: str = "crossings.csv") -> Path:
        return self._write_rows(
            name, CROSSING_COLUMNS,
            ((c.s, c.t, c.theta, c.location.z.real, c.location.z.imag) for c in crossings.crossings),
        )

    def write_trace(self, geodesic: GeodesicTrace, name: str = "trace.csv") -> Path:
        return self._write_rows(name, TRACE_COLUMNS, trace_rows(geodesic))

    def write_table(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        return self._write_rows(name, header, rows)

    def write_report(self, values: Dict[str, ReportValue], name: str = "report.txt") -> Path:
        path = self.output_dir / name
        path.write_text(format_report(values), encoding="utf-8")
        self.written.append(path)
        logger.info(f"💾 Escrito {path}")
        return path


def open_store(output_dir: Optional[str]) -> ResultStore:
    return ResultStore(output_dir or settings.output_dir).open()
