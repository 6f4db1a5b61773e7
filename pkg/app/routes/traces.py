"""
Subcomando trace-dump: una traza, sus arcos y sus cruces
"""

import logging

from app.core.intersections import angle_ks, location_histogram, self_intersections, weighted_counts
from app.core.surface import get_surface
from app.core.utils import derive_seed, make_rng
from app.db.models import ExperimentConfig, SummaryStats
from app.db.storage import ResultStore
from app.stats.ensemble import build_kernel_config, trace_random

logger = logging.getLogger(__name__)

MIN_CROSSINGS_FOR_TESTS = 16


def run_trace_dump(config: ExperimentConfig, store: ResultStore) -> SummaryStats:
    spec = get_surface(config.surface)
    cfg = build_kernel_config(config)
    rng = make_rng(derive_seed(config.master_seed, 0))

    geodesic = trace_random(rng, spec, config.trace_time, "trace-dump")
    crossings = self_intersections(geodesic, spec)
    store.write_trace(geodesic)
    store.write_crossings(crossings)

    counts = weighted_counts(crossings, cfg.phi, cfg.f)
    u0 = geodesic.u0
    values = {
        "u0_re": u0.base.z.real,
        "u0_im": u0.base.z.imag,
        "u0_dir": u0.dir,
        "trace_time": geodesic.total_time,
        "arcs": len(geodesic.arcs),
        "N": counts.N,
        "N_phi": counts.N_phi,
        "N_phi_f": counts.N_phi_f,
    }
    if len(crossings) >= MIN_CROSSINGS_FOR_TESTS:
        statistic, p_value = angle_ks(crossings)
        _, location_p = location_histogram(crossings, spec)
        values.update({"angle_ks_stat": statistic, "angle_ks_p": p_value, "location_chi2_p": location_p})
    return SummaryStats(values=values, passed=None)


COMMANDS = {
    "trace-dump": run_trace_dump,
}
