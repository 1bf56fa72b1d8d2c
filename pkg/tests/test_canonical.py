import numpy as np
import pytest

from src.models.dirac import classical_moment, satisfies
from src.models.uncertainty import MomentConstraint, UncertainQuantity
from src.services import column
from src.services.canonical import (
    ALL_CANONICAL, MIXED, MomentParameterization, canonical_to_dirac, canonical_to_moments,
    moments_to_canonical
)
from src.utils.error_handler import DegenerateMomentError, ModelError


def _hankel_interior(c):
    """Strict Hankel positivity for every order up to len(c) on [0, 1]"""
    c = [1.0] + list(c)
    dets = []
    for k in range(1, len(c)):
        m = (k + 1) // 2
        if k % 2 == 0:
            first = [[c[i + j] for j in range(m + 1)] for i in range(m + 1)]
            second = [[c[i + j + 1] - c[i + j + 2] for j in range(m)] for i in range(m)]
        else:
            first = [[c[i + j + 1] for j in range(m)] for i in range(m)]
            second = [[c[i + j] - c[i + j + 1] for j in range(m)] for i in range(m)]
        dets.extend([np.linalg.det(first), np.linalg.det(second)])
    return dets


def test_single_mean_example():
    assert moments_to_canonical((0.0, 1.0), [0.5]) == pytest.approx([0.5])


def test_canonical_half_half_moments():
    assert canonical_to_moments((0.0, 1.0), [0.5, 0.5]) == pytest.approx([0.5, 0.375])


@pytest.mark.parametrize("second", [0.25, 0.55])
def test_boundary_sequences_are_degenerate(second):
    with pytest.raises(DegenerateMomentError) as info:
        moments_to_canonical((0.0, 1.0), [0.5, second])
    assert info.value.order == 2


def test_coordinates_outside_unit_interval_are_rejected():
    with pytest.raises(ModelError):
        canonical_to_moments((0.0, 1.0), [0.5, 1.2])
    with pytest.raises(ModelError):
        canonical_to_moments((1.0, 0.0), [0.5])


@pytest.mark.parametrize("n", range(1, 8))
def test_round_trip_on_unit_interval(n):
    rng = np.random.default_rng(n)
    for _ in range(1000):
        p = rng.uniform(0.05, 0.95, n)
        moments = canonical_to_moments((0.0, 1.0), p)
        recovered = moments_to_canonical((0.0, 1.0), moments)
        assert canonical_to_moments((0.0, 1.0), recovered) == pytest.approx(moments, rel=1e-10)


def test_round_trip_on_shifted_interval():
    rng = np.random.default_rng(99)
    for _ in range(200):
        p = list(rng.uniform(0.1, 0.9, 3))
        moments = canonical_to_moments((-1.0, 3.0), p)
        assert moments_to_canonical((-1.0, 3.0), moments) == pytest.approx(p, rel=1e-8)


@pytest.mark.parametrize("n", range(1, 5))
def test_canonical_map_accepts_exactly_the_hankel_interior(n):
    rng = np.random.default_rng(100 + n)
    accepted = rejected = 0
    for _ in range(2000):
        prefix = list(rng.uniform(0.02, 0.98, n - 1))
        low = canonical_to_moments((0.0, 1.0), prefix + [0.0])[-1]
        high = canonical_to_moments((0.0, 1.0), prefix + [1.0])[-1]
        span = high - low
        c = canonical_to_moments((0.0, 1.0), prefix)[:n - 1] + [rng.uniform(low - 0.5 * span, high + 0.5 * span)]
        dets = _hankel_interior(c)
        if min(abs(d) for d in dets) < 1e-10:
            continue
        interior = all(d > 0.0 for d in dets)
        try:
            moments_to_canonical((0.0, 1.0), c)
            succeeded = True
        except DegenerateMomentError:
            succeeded = False
        assert succeeded == interior
        accepted += interior
        rejected += not interior
    assert accepted > 0 and rejected > 0


@pytest.mark.parametrize("n_points", range(1, 5))
def test_dirac_recovery_matches_moments(n_points):
    rng = np.random.default_rng(7 * n_points)
    for _ in range(200):
        p = rng.uniform(0.05, 0.95, 2 * n_points - 1)
        measure = canonical_to_dirac((2.0, 5.0), p, n_points)
        moments = canonical_to_moments((2.0, 5.0), p)
        assert len(measure) == n_points
        assert all(2.0 <= x <= 5.0 for x in measure.points)
        for k, expected in enumerate(moments, start=1):
            assert classical_moment(measure, k) == pytest.approx(expected, rel=1e-8)


def test_extreme_variance_decodes_to_endpoints():
    measure = canonical_to_dirac((0.0, 1.0), [0.7, 1.0, 0.5], 2)
    assert sorted(measure.points) == pytest.approx([0.0, 1.0], abs=1e-6)
    assert classical_moment(measure, 1) == pytest.approx(0.7, abs=1e-8)


def test_dirac_recovery_needs_enough_coordinates():
    with pytest.raises(ModelError):
        canonical_to_dirac((0.0, 1.0), [0.5], 2)
    with pytest.raises(ModelError):
        canonical_to_dirac((0.0, 1.0), [0.5], 0)


def test_range_only_quantity_decodes_to_one_point():
    parameterization = MomentParameterization(UncertainQuantity("delta_0", 0.0, 60.0))
    assert parameterization.dimension == 1
    decoded = parameterization.decode([0.3])
    assert decoded.measure.points == pytest.approx((18.0,))
    assert decoded.violation == 0.0


def test_precise_mean_is_embedded_in_mixed_mode():
    q = UncertainQuantity("y", 0.0, 1.0, moment_constraints=(MomentConstraint(1, 0.7, 0.7),))
    parameterization = MomentParameterization(q, MIXED)
    assert parameterization.n_points == 2
    assert parameterization.dimension == 3
    rng = np.random.default_rng(5)
    for _ in range(100):
        decoded = parameterization.decode(rng.uniform(0.0, 1.0, 3))
        assert decoded.violation == 0.0
        assert classical_moment(decoded.measure, 1) == pytest.approx(0.7, abs=1e-9)
        assert decoded.vector.free_classical == pytest.approx((0.7,))


def test_all_canonical_mode_checks_constraints_after_decoding():
    q = UncertainQuantity("y", 0.0, 1.0, moment_constraints=(MomentConstraint(1, 0.7, 0.7),))
    parameterization = MomentParameterization(q, ALL_CANONICAL)
    assert parameterization.dimension == 3
    assert parameterization.decode([0.5, 0.5, 0.5]).violation > 0.0
    assert parameterization.decode([0.7, 0.5, 0.5]).violation == pytest.approx(0.0, abs=1e-12)


def test_moment_box_decoding_satisfies_constraints():
    load = column.reliability_problem(column.OUQ_E_RANGE_100_500).quantity("P_e")
    parameterization = MomentParameterization(load, MIXED)
    assert parameterization.dimension == 7
    rng = np.random.default_rng(11)
    feasible = 0
    for _ in range(50):
        decoded = parameterization.decode(rng.uniform(0.0, 1.0, 7))
        if decoded.violation == 0.0:
            feasible += 1
            assert satisfies(decoded.measure, load)
    assert feasible > 0


def test_decode_rejects_wrong_dimension():
    with pytest.raises(ModelError):
        MomentParameterization(UncertainQuantity("y", 0.0, 1.0)).decode([0.1, 0.2])
    with pytest.raises(ModelError):
        MomentParameterization(UncertainQuantity("y", 0.0, 1.0), "spectral")
