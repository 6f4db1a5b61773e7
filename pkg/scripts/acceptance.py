#!/usr/bin/env python3
"""
Corrida de aceptación de GEOFLUX
Ejecuta los diez criterios con sus tamaños completos (tarda del orden de una hora).

    python scripts/acceptance.py --seed 42 --output ./aceptacion
    python scripts/acceptance.py --seed 42 --only 3,7,8
"""

import argparse
import sys
import time
from pathlib import Path

import pytest

# Agregar el directorio raíz al path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.core.intersections import self_intersections, self_intersections_naive, weighted_counts  # noqa: E402
from app.core.kernels import default_kernel_config, u_statistic  # noqa: E402
from app.core.surface import get_surface  # noqa: E402
from app.core.utils import derive_seed, make_rng  # noqa: E402
from app.db.models import ExperimentConfig  # noqa: E402
from app.main import parse, run  # noqa: E402
from app.stats.analysis import localized_clt, scaling_exponents  # noqa: E402
from app.stats.ensemble import run_ensemble, trace_random  # noqa: E402

SCRIPTS_DIR = Path(__file__).parent


def _cli(args) -> bool:
    return run(parse([str(a) for a in args])) == 0


def criterion_slln(seed, output):
    return _cli(["slln", "--seed", seed, "--replicas", 64, "--t-grid", "100,200,400,800", "--output", output / "slln"])


def criterion_row_sum(seed, output):
    return _cli([
        "kernel-check", "--seed", seed, "--delta", 0.05, "--samples", 1000000, "--probes", 5,
        "--output", output / "kernel_check",
    ])


def criterion_u_statistic(seed, output):
    spec = get_surface("bolza")
    cfg = default_kernel_config(spec, delta=0.25, rho=0.5)
    worst = 0.0
    for j in range(20):
        geodesic = trace_random(make_rng(derive_seed(seed, j)), spec, 50.0, f"U-estadístico {j}")
        direct = weighted_counts(self_intersections(geodesic, spec), cfg.phi).N_phi
        worst = max(worst, abs(u_statistic(geodesic, cfg) - direct))
    print(f"📊 Máxima diferencia U-estadístico / conteo directo: {worst:.3e}")
    return worst < 1e-9


def criterion_sandwich(seed, output):
    return _cli([
        "sandwich", "--seed", seed, "--traces", 100, "--trace-time", 100, "--delta", 0.1,
        "--deltas", "0.2,0.1,0.05", "--output", output / "sandwich",
    ])


def criterion_scaling_and_clt(seed, output):
    config = ExperimentConfig(
        master_seed=seed, replicas=200, t_grid=[100.0, 200.0, 400.0, 800.0], output=str(output / "scaling"),
    )
    records = run_ensemble(config)
    scaling = scaling_exponents(records, config)
    clt = localized_clt(records, config, 400.0)
    for key in ("slope_global", "slope_local"):
        print(f"📊 {key} = {scaling.values[key]:.4f}")
    print(f"📊 TCL localizado: p = {clt.values['p_value']:.4f}, asimetría = {clt.values['skewness']:.4f}")
    return bool(scaling.passed) and bool(clt.passed)


def criterion_oracle(seed, output):
    spec = get_surface("bolza")
    for j in range(50):
        geodesic = trace_random(make_rng(derive_seed(seed, j)), spec, 200.0, f"Oráculo {j}")
        fast = self_intersections(geodesic, spec)
        slow = self_intersections_naive(geodesic)
        if len(fast) != len(slow):
            print(f"❌ Traza {j}: {len(fast)} cruces por malla, {len(slow)} por oráculo")
            return False
        gaps = [max(abs(a.s - b.s), abs(a.t - b.t)) for a, b in zip(fast.crossings, slow.crossings)]
        if gaps and max(gaps) > 1e-9:
            print(f"❌ Traza {j}: tiempos de cruce distintos ({max(gaps):.3e})")
            return False
    return True


def criterion_counterexample(seed, output):
    return _cli(["counterexample", "--seed", seed, "--n-steps", 1000, "--output", output / "counterexample"])


def criterion_mixing(seed, output):
    return _cli([
        "mixing", "--seed", seed, "--starts", 10000, "--lags", "0,1,2,3,4,5", "--t-grid", "50,100",
        "--output", output / "mixing",
    ])


def criterion_properties(seed, output):
    return pytest.main(["-q", str(SCRIPTS_DIR)]) == 0


CRITERIA = [
    ("1", "Constante de la ley fuerte", criterion_slln),
    ("2", "Identidad de la media por filas", criterion_row_sum),
    ("3", "Representación como U-estadístico", criterion_u_statistic),
    ("4", "Cotas sándwich", criterion_sandwich),
    ("5-6", "Escalamiento de fluctuaciones y TCL localizado", criterion_scaling_and_clt),
    ("7", "Equivalencia con el oráculo", criterion_oracle),
    ("8", "Contraejemplo", criterion_counterexample),
    ("9", "Decaimiento de correlaciones", criterion_mixing),
    ("10", "Propiedades invariantes", criterion_properties),
]


def run_acceptance(seed: int, output: Path, only=None) -> bool:
    """Ejecutar los criterios seleccionados e imprimir el resumen"""
    print("\n" + "=" * 60)
    print("🧪 CRITERIOS DE ACEPTACIÓN")
    print("=" * 60 + "\n")

    results = []
    for key, name, check in CRITERIA:
        if only and not set(key.split("-")) & only:
            continue
        print(f"🔍 CRITERIO {key}: {name}")
        started = time.perf_counter()
        try:
            ok = bool(check(seed, output))
        except Exception as e:
            print(f"❌ Error en {name}: {e}")
            ok = False
        elapsed = time.perf_counter() - started
        results.append((key, name, ok, elapsed))

    print("\n" + "=" * 60)
    print("📊 RESUMEN DE ACEPTACIÓN")
    print("=" * 60)
    passed = sum(1 for *_, ok, _ in results if ok)
    for key, name, ok, elapsed in results:
        status = "✅ PASS" if ok else "❌ FAIL"
        print(f"{status} - {key}. {name} ({elapsed:.1f} s)")
    print(f"\nTotal: {passed}/{len(results)} criterios superados")
    print("=" * 60 + "\n")
    return passed == len(results)


def main() -> int:
    parser = argparse.ArgumentParser(description="Corrida de aceptación de GEOFLUX")
    parser.add_argument("--seed", type=lambda x: int(x, 0), default=42)
    parser.add_argument("--output", default="./aceptacion")
    parser.add_argument("--only", default="", help="criterios separados por comas, p. ej. 3,7,8")
    args = parser.parse_args()
    only = {item.strip() for item in args.only.split(",") if item.strip()} or None
    output = Path(args.output)
    output.mkdir(parents=True, exist_ok=True)
    return 0 if run_acceptance(args.seed, output, only) else 1


if __name__ == "__main__":
    sys.exit(main())
