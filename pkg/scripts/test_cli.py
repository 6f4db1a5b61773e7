"""
Pruebas de la línea de comandos y de los artefactos de salida
"""

import sys
import tempfile
from pathlib import Path

import pytest

# Agregar el directorio raíz al path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.core.errors import UsageError  # noqa: E402
from app.db.storage import RECORD_COLUMNS, TRACE_COLUMNS, format_report  # noqa: E402
from app.main import main, parse, run  # noqa: E402


def test_valores_por_defecto():
    """Test 1: slln --seed 42 toma los valores por defecto"""
    print("🔍 TEST 1: Valores por defecto")
    cmd = parse(["slln", "--seed", "42"])
    config = cmd.config
    assert cmd.subcommand == "slln"
    assert config.master_seed == 42
    assert config.surface == "bolza"
    assert config.t_grid == [100.0, 200.0, 400.0, 800.0]
    assert config.replicas == 64
    assert config.delta == 0.1 and config.alpha == 0.3 and config.rho == 0.5
    assert parse(["counterexample", "--seed", "0x2A"]).config.master_seed == 42


def test_errores_de_uso():
    """Test 2: réplicas insuficientes, subcomando desconocido, flag desconocido y semilla ausente"""
    print("🔍 TEST 2: Errores de uso")
    with pytest.raises(UsageError) as error:
        parse(["scaling", "--replicas", "1", "--seed", "1"])
    assert error.value.flag == "--replicas"

    with pytest.raises(UsageError) as error:
        parse(["bogus", "--seed", "1"])
    assert "slln" in str(error.value)

    with pytest.raises(UsageError):
        parse(["slln", "--seed", "1", "--bogus", "3"])

    with pytest.raises(UsageError) as error:
        parse(["slln"])
    assert error.value.flag == "--seed"

    with pytest.raises(UsageError) as error:
        parse(["slln", "--seed", "1", "--delta", "0.3"])
    assert error.value.flag == "--delta"

    with pytest.raises(UsageError) as error:
        parse(["slln", "--seed", "1", "--t-grid", "200,100"])
    assert error.value.flag == "--t-grid"

    assert main(["bogus"]) == 2


def test_archivo_de_configuracion():
    """Test 3: los flags sobrescriben al archivo --config"""
    print("🔍 TEST 3: Archivo de configuración")
    with tempfile.TemporaryDirectory() as folder:
        path = Path(folder) / "experimento.cfg"
        path.write_text("# ensamble pequeño\nreplicas = 3\nt-grid = 10,20\nseed = 0x10\n", encoding="utf-8")
        config = parse(["slln", "--config", str(path), "--replicas", "5"]).config
        assert config.replicas == 5
        assert config.t_grid == [10.0, 20.0]
        assert config.master_seed == 16

        path.write_text("replicas = 3\ncolor = azul\n", encoding="utf-8")
        with pytest.raises(UsageError):
            parse(["slln", "--config", str(path), "--seed", "1"])
        with pytest.raises(UsageError):
            parse(["slln", "--config", str(Path(folder) / "no_existe.cfg"), "--seed", "1"])


def test_formato_de_reporte():
    """Test 4: reporte key=value con reales en repr y booleanos en minúscula"""
    print("🔍 TEST 4: Formato de reporte")
    assert format_report({"a": 1.5, "b": True, "c": 3}) == "a=1.5\nb=true\nc=3\n"


def test_contraejemplo_de_punta_a_punta():
    """Test 5: counterexample escribe report.txt y termina con 0"""
    print("🔍 TEST 5: Contraejemplo de punta a punta")
    with tempfile.TemporaryDirectory() as folder:
        code = run(parse(["counterexample", "--seed", "3", "--n-steps", "500", "--output", folder]))
        assert code == 0
        report = (Path(folder) / "report.txt").read_text(encoding="utf-8")
        assert "orbit_average=1.0\n" in report
        assert "product_integral=0.0\n" in report
        assert "passed=true\n" in report


def test_slln_reproducible():
    """Test 6: dos ejecuciones con la misma semilla producen records.csv idénticos"""
    print("🔍 TEST 6: Ley fuerte reproducible")
    args = ["slln", "--seed", "5", "--replicas", "2", "--t-grid", "10,20"]
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        assert run(parse(args + ["--output", first])) == 0
        assert run(parse(args + ["--output", second])) == 0
        a = (Path(first) / "records.csv").read_bytes()
        b = (Path(second) / "records.csv").read_bytes()
        assert a == b
        lines = a.decode("utf-8").splitlines()
        assert lines[0] == ",".join(RECORD_COLUMNS)
        assert len(lines) == 1 + 2 * 2
        assert (Path(first) / "summary.csv").is_file()
        assert "acceptance=skipped\n" in (Path(first) / "report.txt").read_text(encoding="utf-8")


def test_salida_no_escribible():
    """Test 7: una carpeta de salida imposible devuelve código 1"""
    print("🔍 TEST 7: Salida no escribible")
    with tempfile.TemporaryDirectory() as folder:
        blocker = Path(folder) / "archivo"
        blocker.write_text("ocupado", encoding="utf-8")
        code = run(parse(["counterexample", "--seed", "1", "--output", str(blocker / "sub")]))
        assert code == 1


def test_kernel_check_pequeno():
    """Test 8: kernel-check con pocas muestras escribe la tabla por vector u"""
    print("🔍 TEST 8: kernel-check pequeño")
    with tempfile.TemporaryDirectory() as folder:
        args = ["kernel-check", "--seed", "9", "--samples", "2000", "--probes", "2", "--output", folder]
        assert run(parse(args)) in (0, 2)
        table = (Path(folder) / "kernel_check.csv").read_text(encoding="utf-8").splitlines()
        assert len(table) == 3
        assert "target_delta2_kappa=" in (Path(folder) / "report.txt").read_text(encoding="utf-8")


def test_volcado_de_traza():
    """Test 9: trace-dump escribe los arcos, los cruces y el conteo de arcos"""
    print("🔍 TEST 9: Volcado de traza")
    with tempfile.TemporaryDirectory() as folder:
        assert run(parse(["trace-dump", "--seed", "4", "--trace-time", "20", "--output", folder])) == 0
        rows = (Path(folder) / "trace.csv").read_text(encoding="utf-8").splitlines()
        assert rows[0] == ",".join(TRACE_COLUMNS)
        assert len(rows) > 2
        assert (Path(folder) / "crossings.csv").is_file()
        report = (Path(folder) / "report.txt").read_text(encoding="utf-8")
        assert f"arcs={len(rows) - 1}\n" in report


def test_sandwich_pequeno():
    """Test 10: sandwich acota N_φ de la misma traza y respeta la cota de la brecha"""
    print("🔍 TEST 10: sandwich pequeño")
    with tempfile.TemporaryDirectory() as folder:
        args = ["sandwich", "--seed", "5", "--traces", "2", "--trace-time", "10", "--deltas", "0.2,0.1", "--output", folder]
        assert run(parse(args)) in (0, 2)
        table = (Path(folder) / "sandwich.csv").read_text(encoding="utf-8").splitlines()
        assert table[0] == "delta,trace,lower,N_phi,upper,N_phi_inner,N_phi_outer"
        assert len(table) == 5
        report = (Path(folder) / "report.txt").read_text(encoding="utf-8")
        assert "violations=0\n" in report
        assert "gap_bound_violations=0\n" in report


def run_all_tests():
    """Ejecutar todas las pruebas"""
    print("\n" + "=" * 60)
    print("🧪 PRUEBAS DE LA LÍNEA DE COMANDOS")
    print("=" * 60 + "\n")

    tests = [
        ("Valores por defecto", test_valores_por_defecto),
        ("Errores de uso", test_errores_de_uso),
        ("Archivo de configuración", test_archivo_de_configuracion),
        ("Formato de reporte", test_formato_de_reporte),
        ("Contraejemplo de punta a punta", test_contraejemplo_de_punta_a_punta),
        ("Ley fuerte reproducible", test_slln_reproducible),
        ("Salida no escribible", test_salida_no_escribible),
        ("kernel-check pequeño", test_kernel_check_pequeno),
        ("Volcado de traza", test_volcado_de_traza),
        ("sandwich pequeño", test_sandwich_pequeno),
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
