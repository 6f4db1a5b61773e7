"""
Pruebas del ensamble de réplicas y de los análisis estadísticos
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Agregar el directorio raíz al path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.core.errors import DegenerateDataError, HarnessError, PreconditionError  # noqa: E402
from app.core.kernels import default_kernel_config, kappa_phi  # noqa: E402
from app.core.surface import get_surface  # noqa: E402
from app.core.utils import derive_seed, make_rng  # noqa: E402
from app.db.models import ExperimentConfig, ReplicaRecord  # noqa: E402
from app.stats.analysis import (  # noqa: E402
    global_fluctuation_report,
    gqf_cumulants,
    gqf_fit,
    gqf_sample,
    lilliefors_critical_value,
    localized_clt,
    merge_summaries,
    normality_test,
    slln_report,
    slope_fit,
    summarize,
)
from app.stats.ensemble import run_ensemble, run_replica, trace_random  # noqa: E402
from app.stats.ergodic import (  # noqa: E402
    GOLDEN_ROTATION,
    _coset_bases,
    _same_coset,
    bracket_average,
    correlation_decay,
    double_average_check,
    kernel_integral_mc,
    remark_counterexample,
)

SPEC = get_surface("bolza")


def synthetic_records(rng, replicas, times):
    """Réplicas con conteos crecientes aleatorios (sin simular geodésicas)"""
    records = []
    for i in range(replicas):
        n = np.cumsum(rng.integers(0, 5, len(times)))
        records.append(ReplicaRecord(
            replica=i, seed=i, u0_re=0.0, u0_im=0.0, u0_dir=0.0, t=list(times),
            N=n.tolist(), N_phi=(0.4 * n + rng.random(len(times))).tolist(),
            N_phi_f=(0.1 * n).tolist(),
        ))
    return records


def test_semillas_derivadas():
    """Test 1: derive_seed es determinista y separa réplicas y semillas maestras"""
    print("🔍 TEST 1: Semillas derivadas")
    assert derive_seed(42, 3) == derive_seed(42, 3)
    seeds = {derive_seed(42, i) for i in range(100)}
    assert len(seeds) == 100
    assert derive_seed(42, 0) != derive_seed(43, 0)
    assert make_rng(derive_seed(42, 5)).random() == make_rng(derive_seed(42, 5)).random()


def test_ensamble_reproducible():
    """Test 2: el ensamble no depende del número de procesos y arranca vacío en tiempos cortos"""
    print("🔍 TEST 2: Ensamble reproducible")
    config = ExperimentConfig(master_seed=7, replicas=3, t_grid=[1.0, 2.5, 12.0])
    serial = run_ensemble(config, workers=1)
    parallel = run_ensemble(config, workers=2)
    assert [r.model_dump() for r in serial] == [r.model_dump() for r in parallel]
    for record in serial:
        # Un lazo geodésico mide al menos la sístole
        assert record.N[0] == 0 and record.N[1] == 0
        assert record.N == sorted(record.N)
        assert record.seed == derive_seed(7, record.replica)
    with pytest.raises(HarnessError):
        run_ensemble(ExperimentConfig(replicas=2, t_grid=[1.0]))


def test_reuso_por_restriccion():
    """Test 3: los conteos en t coinciden con los de una réplica que termina en t"""
    print("🔍 TEST 3: Reuso por restricción")
    long_config = ExperimentConfig(master_seed=11, replicas=2, t_grid=[10.0, 20.0])
    short_config = ExperimentConfig(master_seed=11, replicas=2, t_grid=[10.0])
    for index in range(2):
        a = run_replica(long_config, index)
        b = run_replica(short_config, index)
        assert a.N[0] == b.N[0]
        assert abs(a.N_phi[0] - b.N_phi[0]) < 1e-9
        assert abs(a.N_phi_f[0] - b.N_phi_f[0]) < 1e-9


def test_resumen_y_fusion():
    """Test 4: fusionar resúmenes de lotes disjuntos equivale a resumir todo"""
    print("🔍 TEST 4: Resumen y fusión")
    rng = np.random.default_rng(5)
    records = synthetic_records(rng, 40, [10.0, 20.0, 40.0])
    whole = summarize(records)
    merged = merge_summaries(summarize(records[:15]), summarize(records[15:]))
    for a, b in zip(whole, merged):
        assert a.count == b.count == 40
        for name in ("mean_N", "var_N", "mean_Nphi", "var_Nphi", "se_Nphif"):
            assert abs(getattr(a, name) - getattr(b, name)) < 1e-9
    with pytest.raises(PreconditionError):
        merge_summaries(whole, summarize(synthetic_records(rng, 5, [1.0, 2.0, 4.0])))


def test_reporte_slln_sin_umbral():
    """Test 5: pocas réplicas o tiempos cortos omiten el umbral de aceptación"""
    print("🔍 TEST 5: Reporte de la ley fuerte")
    rng = np.random.default_rng(6)
    config = ExperimentConfig(master_seed=1, replicas=4, t_grid=[10.0, 20.0, 40.0])
    report = slln_report(synthetic_records(rng, 4, config.t_grid), config)
    assert report.passed is None
    assert report.values["acceptance"] == "skipped"
    assert abs(report.values["kappa_M_half"] - 1.0 / (16 * math.pi ** 2)) < 1e-15
    assert len(report.rows) == 3


def test_pendiente_sumas_parciales():
    """Test 6: Var de sumas parciales iid crece con pendiente 1 en escala log-log"""
    print("🔍 TEST 6: Calibración de la pendiente")
    rng = np.random.default_rng(8)
    times = [10, 20, 40, 80]
    walks = np.cumsum(rng.standard_normal((2000, 80)), axis=1)
    values = walks[:, [t - 1 for t in times]]
    fit = slope_fit(times, values, rng, resamples=100)
    assert abs(fit.slope - 1.0) < 0.1
    assert fit.ci_low <= fit.slope <= fit.ci_high
    assert fit.residuals.shape == (4,)
    with pytest.raises(DegenerateDataError):
        slope_fit(times, np.ones((50, 4)), rng)


def test_normalidad():
    """Test 7: la prueba KS rechaza χ²(1) y no rechaza en exceso muestras gaussianas"""
    print("🔍 TEST 7: Prueba de normalidad")
    rng = np.random.default_rng(9)
    rejections = 0
    for _ in range(20):
        result = normality_test(rng.standard_normal(200), rng, simulations=500)
        rejections += result.p_value < 0.05
    assert rejections <= 5

    skewed = rng.standard_normal(200) ** 2
    assert normality_test(skewed, rng, simulations=500).p_value < 0.01
    with pytest.raises(DegenerateDataError):
        normality_test(np.full(50, 3.0), rng)


def test_valor_critico_lilliefors():
    """Test 8: el valor crítico simulado al 5 % se acerca a 0.886/√n"""
    print("🔍 TEST 8: Valor crítico de Lilliefors")
    critical = lilliefors_critical_value(100, 0.05, 2000, np.random.default_rng(10))
    assert abs(critical - 0.886 / math.sqrt(100)) < 0.01


def test_formas_cuadraticas():
    """Test 9: momentos de Σ θ_j Z_j² y ajuste de cumulantes"""
    print("🔍 TEST 9: Formas cuadráticas gaussianas")
    rng = np.random.default_rng(12)
    n = 100000

    chi2 = gqf_sample([1.0], n, rng)
    assert abs(np.mean(chi2) - 1.0) < 4 * math.sqrt(2.0 / n)
    assert abs(np.var(chi2) - 2.0) < 4 * math.sqrt(56.0 / n)

    difference = gqf_sample([1.0, -1.0], n, rng)
    assert abs(np.mean(difference)) < 4 * math.sqrt(4.0 / n)
    centered = difference - np.mean(difference)
    assert abs(np.mean(centered ** 3) / np.var(difference) ** 1.5) < 0.2

    assert gqf_cumulants([0.5, 2.0]) == (2.5, 8.5, 65.0)
    theta1, theta2 = gqf_fit(chi2)
    assert abs(theta1 - 1.0) < 0.15
    assert abs(theta2) < 0.15

    with pytest.raises(PreconditionError):
        gqf_sample([], 10, rng)


def test_contraejemplo():
    """Test 10: promedio orbital 1 frente a integral doble 0, evaluados sobre estados simulados"""
    print("🔍 TEST 10: Contraejemplo del producto sesgado")
    result = remark_counterexample(1000, 0)
    assert result.orbit_average == 1.0
    assert result.product_integral < 0.01
    assert result.orbit_average - result.product_integral > 0.9
    assert result.control_average < 0.05
    assert remark_counterexample(1000, 0) == result
    assert remark_counterexample(1000, 1).control_average != result.control_average

    # Rotar una posición no cambia su clase; una posición arbitraria cae en otra clase
    start = _coset_bases(np.array([0.3]), np.array([0]))
    rotated = _coset_bases(np.mod(0.3 + 2 * GOLDEN_ROTATION, 1.0) + np.zeros(1), np.array([2]))
    moved = _coset_bases(np.array([0.3 + 1e-3]), np.array([0]))
    assert bool(_same_coset(start, rotated)[0])
    assert not bool(_same_coset(start, moved)[0])
    with pytest.raises(PreconditionError):
        remark_counterexample(0, 0)


def test_correlaciones():
    """Test 11: correlación nula para observables constantes y control barajado centrado"""
    print("🔍 TEST 11: Decaimiento de correlaciones")
    rng = np.random.default_rng(13)
    constant = lambda z, direction: np.ones(np.shape(z))
    for row in correlation_decay(constant, [0.0, 1.0, 2.0], SPEC, 200, rng):
        assert row.corr == 0.0

    radial = lambda z, direction: np.abs(z)
    rows = correlation_decay(radial, [0.0, 1.0, 2.0], SPEC, 2000, rng, shuffle=True)
    for row in rows[1:]:
        assert abs(row.corr) < 4 * row.std_error
    with pytest.raises(PreconditionError):
        correlation_decay(radial, [-1.0], SPEC, 10, rng)


def test_promedios_dobles():
    """Test 12: filas del promedio doble con objetivo 0 para el producto centrado"""
    print("🔍 TEST 12: Promedios dobles")
    rng = np.random.default_rng(14)
    rows = double_average_check("product", [20.0, 40.0], SPEC, rng, mc_samples=5000)
    assert [row.t for row in rows] == [20.0, 40.0]
    for row in rows:
        assert row.target == 0.0
        assert row.empirical >= 0.0
        assert row.gap == row.empirical
    with pytest.raises(PreconditionError):
        double_average_check("K", [10.0], SPEC, rng)
    with pytest.raises(PreconditionError):
        double_average_check("otro", [10.0], SPEC, rng)


def test_corchete():
    """Test 13: la media de M_φ(α, β) sobre β de Liouville se acerca a κ_φ·|α|·|β|"""
    print("🔍 TEST 13: Corchete de dos segmentos")
    rng = np.random.default_rng(15)
    cfg = default_kernel_config(SPEC)
    alpha = trace_random(rng, SPEC, 1.0, "α")
    betas = [trace_random(rng, SPEC, 1.0, "β") for _ in range(2000)]
    result = bracket_average(alpha, betas, cfg.phi, SPEC)
    assert result.target > 0.0
    assert abs(result.mean - result.target) < 4 * result.std_error
    with pytest.raises(PreconditionError):
        bracket_average(alpha, [], cfg.phi, SPEC)


def test_promedio_doble_de_K():
    """Test 14: el promedio doble de K_δ lleva el objetivo κ_φ y su contraste Monte Carlo"""
    print("🔍 TEST 14: Promedio doble del núcleo K_δ")
    rng = np.random.default_rng(16)
    cfg = default_kernel_config(SPEC, delta=0.25)
    rows = double_average_check("K", [10.0, 20.0], SPEC, rng, cfg=cfg, mc_samples=4000)
    target = kappa_phi(cfg.phi, SPEC)
    assert [row.t for row in rows] == [10.0, 20.0]
    for row in rows:
        assert row.target == target
        assert row.empirical >= 0.0
        assert abs(row.gap - abs(row.empirical - target)) < 1e-15
        assert row.mc_std_error > 0.0
        assert abs(row.mc_target - row.target) < 5 * row.mc_std_error
    assert rows[0].mc_target == rows[1].mc_target
    estimate = kernel_integral_mc(cfg, 2, 2000, rng)
    assert estimate.std_error > 0.0


def test_reportes_de_fluctuaciones():
    """Test 15: reporte global descriptivo y TCL localizado sobre réplicas sintéticas"""
    print("🔍 TEST 15: Reportes de fluctuaciones")
    rng = np.random.default_rng(17)
    config = ExperimentConfig(master_seed=5, replicas=200, t_grid=[10.0, 20.0, 40.0])
    records = synthetic_records(rng, 200, config.t_grid)

    report = global_fluctuation_report(records, config, 40.0)
    assert report.passed is None
    assert report.values["t_star"] == 40.0
    assert report.values["centering_c"] > 0.0
    assert report.values["gf_moment2"] >= 0.0
    for key in ("gf_variance_t10", "gf_variance_t20", "gf_variance_t40", "gf_variance_ratio", "gqf_theta1", "gqf_theta2"):
        assert key in report.values
    assert abs(report.values["gqf_theta1"]) >= abs(report.values["gqf_theta2"])

    clt = localized_clt(records, config, 40.0, np.random.default_rng(18))
    assert isinstance(clt.passed, bool)
    assert 0.0 < clt.values["p_value"] <= 1.0
    assert 0.0 <= clt.values["ks_stat"] <= 1.0
    with pytest.raises(PreconditionError):
        localized_clt(records, config, 30.0)
    with pytest.raises(PreconditionError):
        localized_clt(records[:199], config, 40.0)
    with pytest.raises(PreconditionError):
        global_fluctuation_report(records[:199], config, 40.0)


def run_all_tests():
    """Ejecutar todas las pruebas"""
    print("\n" + "=" * 60)
    print("🧪 PRUEBAS ESTADÍSTICAS")
    print("=" * 60 + "\n")

    tests = [
        ("Semillas derivadas", test_semillas_derivadas),
        ("Ensamble reproducible", test_ensamble_reproducible),
        ("Reuso por restricción", test_reuso_por_restriccion),
        ("Resumen y fusión", test_resumen_y_fusion),
        ("Reporte de la ley fuerte", test_reporte_slln_sin_umbral),
        ("Calibración de la pendiente", test_pendiente_sumas_parciales),
        ("Prueba de normalidad", test_normalidad),
        ("Valor crítico de Lilliefors", test_valor_critico_lilliefors),
        ("Formas cuadráticas", test_formas_cuadraticas),
        ("Contraejemplo", test_contraejemplo),
        ("Correlaciones", test_correlaciones),
        ("Promedios dobles", test_promedios_dobles),
        ("Corchete", test_corchete),
        ("Promedio doble de K_δ", test_promedio_doble_de_K),
        ("Reportes de fluctuaciones", test_reportes_de_fluctuaciones),
    ]

    results = []
    for name, test_func in tests:
        try:
            test_func()
            results.append((name, True))
        except Exception as e:
            print(f"❌ Error en {name}: {e}")
            results.append((name, False))

    print("\n" + "=" * 60)
    print("📊 RESUMEN DE PRUEBAS")
    print("=" * 60)
    passed = sum(1 for _, result in results if result)
    for name, result in results:
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{status} - {name}")
    print(f"\nTotal: {passed}/{len(results)} pruebas exitosas")
    print("=" * 60 + "\n")
    return passed == len(results)


if __name__ == "__main__":
    sys.exit(0 if run_all_tests() else 1)
