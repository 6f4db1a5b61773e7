"""
Pruebas del trazador de geodésicas en el polígono fundamental
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Agregar el directorio raíz al path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.core.errors import DomainError, PreconditionError, RangeError, VertexHitError  # noqa: E402
from app.core.hyperbolic import UnitTangent, angle_gap, apply_isometry, flow, hyperbolic_distance  # noqa: E402
from app.core.surface import contains, get_surface, liouville_sample  # noqa: E402
from app.core.tracer import restrict, reverse_start, tangent_at, trace, trace_rows  # noqa: E402

SPEC = get_surface("bolza")
U0 = UnitTangent.at(0.05 + 0.02j, 0.3)


def test_arcos_contiguos():
    """Test 1: los arcos cubren [0, T] sin huecos y cada cuerda mide lo que dura el arco"""
    print("🔍 TEST 1: Arcos contiguos")
    geodesic = trace(U0, 10.0, SPEC)
    arcs = geodesic.arcs
    assert arcs[0].t_begin == 0.0
    assert arcs[-1].t_end == 10.0
    assert arcs[-1].exit_side == -1
    for prev, nxt in zip(arcs, arcs[1:]):
        assert prev.t_end == nxt.t_begin
        assert 0 <= prev.exit_side < 8
    assert abs(sum(a.duration for a in arcs) - 10.0) < 1e-9
    for arc in arcs:
        assert abs(arc.chord.length - arc.duration) < 1e-9
        assert contains(SPEC, arc.chord.p0.z, tol=1e-7)
        assert contains(SPEC, arc.chord.p1.z, tol=1e-7)


def test_continuacion_por_generador():
    """Test 2: el generador del lado de salida lleva el final de un arco a la entrada del siguiente"""
    print("🔍 TEST 2: Continuación por generador")
    geodesic = trace(U0, 20.0, SPEC)
    for arc, nxt in zip(geodesic.arcs, geodesic.arcs[1:]):
        exit_tangent = flow(arc.entry, arc.duration)
        continued = apply_isometry(SPEC.generators[arc.exit_side], exit_tangent)
        assert hyperbolic_distance(continued.base, nxt.entry.base) < 1e-9
        assert angle_gap(continued.dir, nxt.entry.dir) < 1e-9
        assert arc.exit_word.letters == (arc.exit_side,)


def test_restriccion():
    """Test 3: el prefijo de una traza larga coincide con la traza corta"""
    print("🔍 TEST 3: Restricción")
    long_trace = trace(U0, 20.0, SPEC)
    short_trace = trace(U0, 7.0, SPEC)
    prefix = restrict(long_trace, 7.0)
    assert prefix.total_time == 7.0
    assert len(prefix.arcs) == len(short_trace.arcs)
    for a, b in zip(prefix.arcs, short_trace.arcs):
        assert abs(a.t_begin - b.t_begin) < 1e-12
        assert abs(a.t_end - b.t_end) < 1e-12
        assert abs(a.chord.p1.z - b.chord.p1.z) < 1e-10
    with pytest.raises(RangeError):
        restrict(long_trace, 25.0)


def test_tangent_at():
    """Test 4: tangent_at en los extremos y fuera de rango"""
    print("🔍 TEST 4: Vector tangente por tiempo")
    geodesic = trace(U0, 10.0, SPEC)
    start = tangent_at(geodesic, 0.0)
    assert hyperbolic_distance(start.base, U0.base) < 1e-12
    assert angle_gap(start.dir, U0.dir) < 1e-12
    inside = tangent_at(geodesic, 4.2)
    assert contains(SPEC, inside.base.z, tol=1e-7)
    with pytest.raises(RangeError):
        tangent_at(geodesic, 10.5)
    with pytest.raises(RangeError):
        tangent_at(geodesic, -0.1)


def test_inversion_temporal():
    """Test 5: trazar desde reverse_start recorre la misma geodésica al revés"""
    print("🔍 TEST 5: Inversión temporal")
    geodesic = trace(U0, 6.0, SPEC)
    backward = trace(reverse_start(geodesic), 6.0, SPEC)
    end = tangent_at(backward, 6.0)
    assert hyperbolic_distance(end.base, U0.base) < 1e-8
    assert angle_gap(end.dir, U0.dir + math.pi) < 1e-8
    middle = tangent_at(geodesic, 2.5)
    mirrored = tangent_at(backward, 3.5)
    assert hyperbolic_distance(middle.base, mirrored.base) < 1e-8


def test_precondiciones():
    """Test 6: T ≤ 0 y u0 fuera del polígono se rechazan"""
    print("🔍 TEST 6: Precondiciones")
    with pytest.raises(PreconditionError):
        trace(U0, 0.0, SPEC)
    with pytest.raises(DomainError):
        trace(UnitTangent.at(0.95 + 0j, 0.0), 1.0, SPEC)


def test_choque_con_vertice():
    """Test 7: un rayo dirigido a un vértice lanza VertexHitError"""
    print("🔍 TEST 7: Choque con vértice")
    with pytest.raises(VertexHitError):
        trace(UnitTangent.at(0j, math.pi / 8), 5.0, SPEC)


def test_volcado_de_arcos():
    """Test 8: una fila por arco en el volcado"""
    print("🔍 TEST 8: Volcado de arcos")
    rng = np.random.default_rng(3)
    geodesic = trace(liouville_sample(rng, SPEC), 15.0, SPEC)
    rows = trace_rows(geodesic)
    assert len(rows) == len(geodesic.arcs)
    assert rows[0][0] == 0.0
    assert rows[-1][1] == 15.0
    assert rows[-1][5] == -1


def run_all_tests():
    """Ejecutar todas las pruebas"""
    print("\n" + "=" * 60)
    print("🧪 PRUEBAS DEL TRAZADOR")
    print("=" * 60 + "\n")

    tests = [
        ("Arcos contiguos", test_arcos_contiguos),
        ("Continuación por generador", test_continuacion_por_generador),
        ("Restricción", test_restriccion),
        ("Vector tangente por tiempo", test_tangent_at),
        ("Inversión temporal", test_inversion_temporal),
        ("Precondiciones", test_precondiciones),
        ("Choque con vértice", test_choque_con_vertice),
        ("Volcado de arcos", test_volcado_de_arcos),
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
