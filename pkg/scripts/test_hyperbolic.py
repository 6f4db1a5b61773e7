"""
Pruebas del modelo del disco: isometrías, flujo geodésico y cruces de cuerdas
Ejecutar con pytest o directamente: python scripts/test_hyperbolic.py
"""

import cmath
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Agregar el directorio raíz al path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.core.errors import DomainError, InvalidIsometryError, NonTransversalOverlapError  # noqa: E402
from app.core.hyperbolic import (  # noqa: E402
    Chord,
    DiskPoint,
    MobiusMap,
    UnitTangent,
    angle_gap,
    apply_isometry,
    chord_intersection,
    flow,
    frame_map,
    hyperbolic_distance,
)

SEED = 20240601


def random_tangent(rng, radius=0.7):
    z = radius * math.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
    return UnitTangent.at(z, 2 * math.pi * rng.random())


def random_isometry(rng):
    return frame_map(random_tangent(rng, 0.8))


def assert_same_tangent(u, v, tol=1e-8):
    assert hyperbolic_distance(u.base, v.base) < tol
    assert angle_gap(u.dir, v.dir) < tol


def test_composicion_e_inversa():
    """Test 1: g ∘ g⁻¹ es la identidad y la composición es asociativa"""
    print("🔍 TEST 1: Composición e inversa")
    rng = np.random.default_rng(SEED)
    for _ in range(50):
        f, g, h = random_isometry(rng), random_isometry(rng), random_isometry(rng)
        assert g.compose(g.inverse()).is_close(MobiusMap.identity(), 1e-10)
        assert f.compose(g).compose(h).is_close(f.compose(g.compose(h)), 1e-9)
        z = 0.3 - 0.2j
        assert abs(f.compose(g)(z) - f(g(z))) < 1e-12


def test_traslacion_mueve_origen():
    """Test 2: la traslación de longitud L lleva el origen a distancia L"""
    print("🔍 TEST 2: Longitud de traslación")
    for length in (0.1, 1.0, 3.0571):
        g = MobiusMap.translation(0.7, length)
        moved = DiskPoint(g(0j))
        assert abs(hyperbolic_distance(DiskPoint(0j), moved) - length) < 1e-10
        assert abs(g.translation_length() - length) < 1e-9


def test_isometria_invalida():
    """Test 3: mapas no unimodulares y puntos fuera del disco se rechazan"""
    print("🔍 TEST 3: Entradas inválidas")
    with pytest.raises(InvalidIsometryError):
        apply_isometry(MobiusMap(2 + 0j, 0j), UnitTangent.at(0j, 0.0))
    with pytest.raises(DomainError):
        DiskPoint(1.0 + 0j)
    with pytest.raises(DomainError):
        DiskPoint(0.8 + 0.8j)


def test_flujo_aditivo():
    """Test 4: flow(flow(u, s₁), s₂) = flow(u, s₁ + s₂) sobre 100 casos aleatorios"""
    print("🔍 TEST 4: Aditividad del flujo")
    rng = np.random.default_rng(SEED + 1)
    for _ in range(100):
        u = random_tangent(rng)
        assert abs(u.base.z) <= 0.7
        s1, s2 = rng.uniform(-3.0, 3.0, 2)
        assert_same_tangent(flow(flow(u, s1), s2), flow(u, s1 + s2), tol=1e-7)


def test_flujo_rapidez_unitaria():
    """Test 5: d(u, flow(u, s)) = |s|"""
    print("🔍 TEST 5: Rapidez unitaria")
    rng = np.random.default_rng(SEED + 2)
    for _ in range(100):
        u = random_tangent(rng)
        s = rng.uniform(-3.0, 3.0)
        assert abs(hyperbolic_distance(u.base, flow(u, s).base) - abs(s)) < 1e-8


def test_flujo_equivariante():
    """Test 6: el flujo conmuta con las isometrías"""
    print("🔍 TEST 6: Equivariancia del flujo")
    rng = np.random.default_rng(SEED + 3)
    for _ in range(50):
        u = random_tangent(rng, 0.5)
        m = random_isometry(rng)
        s = rng.uniform(-2.0, 2.0)
        assert_same_tangent(apply_isometry(m, flow(u, s)), flow(apply_isometry(m, u), s), tol=1e-7)


def test_frame_map():
    """Test 7: frame_map(u) lleva (0, dirección 0) a u"""
    print("🔍 TEST 7: Mapa de marco")
    rng = np.random.default_rng(SEED + 4)
    for _ in range(20):
        u = random_tangent(rng)
        assert_same_tangent(apply_isometry(frame_map(u), UnitTangent.at(0j, 0.0)), u, tol=1e-10)


def test_cruce_de_diametros():
    """Test 8: dos diámetros perpendiculares se cortan en el origen a π/2"""
    print("🔍 TEST 8: Cruce de diámetros")
    horizontal = Chord(DiskPoint(-0.5 + 0j), DiskPoint(0.5 + 0j))
    vertical = Chord(DiskPoint(-0.5j), DiskPoint(0.5j))
    hit = chord_intersection(horizontal, vertical)
    assert hit is not None
    assert abs(hit.point.z) < 1e-12
    assert abs(hit.theta - 0.5 * math.pi) < 1e-12
    assert abs(hit.frac1 - 0.5) < 1e-12
    assert abs(hit.frac2 - 0.5) < 1e-12


def test_sin_cruce():
    """Test 9: cuerdas disjuntas o que solo comparten un extremo no se cortan"""
    print("🔍 TEST 9: Cuerdas sin cruce")
    a = Chord(DiskPoint(-0.5 + 0.1j), DiskPoint(0.5 + 0.1j))
    b = Chord(DiskPoint(-0.5 - 0.1j), DiskPoint(0.5 - 0.1j))
    assert chord_intersection(a, b) is None
    touching_a = Chord(DiskPoint(0j), DiskPoint(0.5 + 0j))
    touching_b = Chord(DiskPoint(0j), DiskPoint(0.5j))
    assert chord_intersection(touching_a, touching_b) is None


def test_solapamiento():
    """Test 10: cuerdas solapadas sobre la misma geodésica lanzan NonTransversalOverlapError"""
    print("🔍 TEST 10: Solapamiento no transversal")
    a = Chord(DiskPoint(-0.5 + 0j), DiskPoint(0.2 + 0j))
    b = Chord(DiskPoint(0j), DiskPoint(0.5 + 0j))
    with pytest.raises(NonTransversalOverlapError):
        chord_intersection(a, b)


def test_cruce_simetrico_e_invariante():
    """Test 11: el ángulo no depende del orden y es invariante bajo isometrías"""
    print("🔍 TEST 11: Simetría e invariancia del cruce")
    rng = np.random.default_rng(SEED + 5)
    hits = 0
    for _ in range(200):
        u, v = random_tangent(rng, 0.3), random_tangent(rng, 0.3)
        c1 = Chord(u.base, flow(u, 1.0).base)
        c2 = Chord(v.base, flow(v, 1.0).base)
        forward = chord_intersection(c1, c2)
        backward = chord_intersection(c2, c1)
        assert (forward is None) == (backward is None)
        if forward is None:
            continue
        hits += 1
        assert abs(forward.theta - backward.theta) < 1e-12
        assert 0.0 < forward.theta < math.pi

        m = random_isometry(rng)
        moved = chord_intersection(
            Chord(DiskPoint(m(c1.p0.z)), DiskPoint(m(c1.p1.z))),
            Chord(DiskPoint(m(c2.p0.z)), DiskPoint(m(c2.p1.z))),
        )
        assert moved is not None
        assert abs(moved.theta - forward.theta) < 1e-8
        assert abs(moved.frac1 - forward.frac1) < 1e-8
        assert abs(moved.point.z - m(forward.point.z)) < 1e-8
    assert hits > 0


def run_all_tests():
    """Ejecutar todas las pruebas"""
    print("\n" + "=" * 60)
    print("🧪 PRUEBAS DEL MODELO HIPERBÓLICO")
    print("=" * 60 + "\n")

    tests = [
        ("Composición e inversa", test_composicion_e_inversa),
        ("Longitud de traslación", test_traslacion_mueve_origen),
        ("Entradas inválidas", test_isometria_invalida),
        ("Aditividad del flujo", test_flujo_aditivo),
        ("Rapidez unitaria", test_flujo_rapidez_unitaria),
        ("Equivariancia del flujo", test_flujo_equivariante),
        ("Mapa de marco", test_frame_map),
        ("Cruce de diámetros", test_cruce_de_diametros),
        ("Cuerdas sin cruce", test_sin_cruce),
        ("Solapamiento", test_solapamiento),
        ("Simetría del cruce", test_cruce_simetrico_e_invariante),
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
