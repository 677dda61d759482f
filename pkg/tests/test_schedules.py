import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pplearn.schedules import (
    PhaseSchedule,
    TransformKind,
    alpha_at,
    mix_bounds_at,
    progress_at,
    q_at,
    transform,
)

RHOS = (0.2, 1, 2, 5, math.e)
KINDS = [TransformKind(v, r) for v in ("power", "log", "invlog") for r in RHOS]
GRID = np.linspace(0, 1, 1001)


def linear(e0=100, e1=160, delta=1.0):
    return PhaseSchedule(e0, e1, delta, TransformKind("power", 1.0))


class TestTransform:
    def test_linear_identity(self):
        assert transform(TransformKind("power", 1.0), 0.5) == 0.5

    def test_square(self):
        assert transform(TransformKind("power", 2.0), 0.5) == 0.25

    def test_log_natural(self):
        # mpmath, 40 digits: ln(1 + (e - 1) / 2)
        assert transform(TransformKind("log", math.e), 0.5) == pytest.approx(0.6201145069582775, abs=1e-15)

    def test_invlog_natural(self):
        # mpmath: e**(0.5 * ln 2 / ln e) - 1 = sqrt(2) - 1
        assert transform(TransformKind("invlog", math.e), 0.5) == pytest.approx(0.4142135623730950, abs=1e-15)

    def test_log_small_base(self):
        # mpmath: ln(0.6) / ln(0.2)
        assert transform(TransformKind("log", 0.2), 0.5) == pytest.approx(0.3173938055140147, abs=1e-15)

    def test_log_unit_base_is_identity_limit(self):
        assert transform(TransformKind("log", 1.0), 0.3) == 0.3
        assert transform(TransformKind("log", 1.0 + 1e-9), 0.3) == pytest.approx(0.3, abs=1e-8)

    @pytest.mark.parametrize("kind", KINDS, ids=repr)
    def test_endpoints_exact(self, kind):
        assert transform(kind, 0.0) == 0.0
        assert transform(kind, 1.0) == 1.0

    @pytest.mark.parametrize("kind", KINDS, ids=repr)
    def test_monotone(self, kind):
        vals = np.array([transform(kind, t) for t in GRID])
        assert np.all(np.diff(vals) >= 0)
        assert vals.min() >= 0 and vals.max() <= 1

    @pytest.mark.parametrize("rho, sign", [(0.2, -1), (0.5, -1), (2, 1), (5, 1)])
    def test_power_curvature(self, rho, sign):
        vals = np.array([transform(TransformKind("power", rho), t) for t in GRID[1:-1]])
        second = np.diff(vals, 2)
        assert np.all(sign * second > -1e-15)
        assert np.all(sign * second[5:-5] > 0)

    @pytest.mark.parametrize("t", [-0.1, 1.1, float("nan")])
    def test_rejects_t_outside(self, t):
        with pytest.raises(ValueError):
            transform(TransformKind(), t)

    @pytest.mark.parametrize("variant, rho", [("power", 0), ("power", -1), ("log", 0), ("invlog", -2), ("cubic", 2)])
    def test_rejects_bad_kind(self, variant, rho):
        with pytest.raises(ValueError):
            TransformKind(variant, rho)


class TestPhaseSchedule:
    def test_rejects_reversed_window(self):
        with pytest.raises(ValueError):
            PhaseSchedule(10, 5)

    @pytest.mark.parametrize("delta", [0, -1])
    def test_rejects_nonpositive_delta(self, delta):
        with pytest.raises(ValueError):
            PhaseSchedule(0, 5, delta)

    def test_alpha_phases(self):
        s = linear()
        assert alpha_at(s, 50) == 0
        assert alpha_at(s, 200) == 1
        assert alpha_at(s, 130) == 0.5

    def test_alpha_continuity(self):
        for kind in KINDS:
            s = PhaseSchedule(100, 160, 0.7, kind)
            assert abs(alpha_at(s, 99) - alpha_at(s, 100)) <= 1e-12
            assert abs(alpha_at(s, 160) - alpha_at(s, 161)) <= 1e-12

    def test_degenerate_window_is_step(self):
        s = linear(160, 160)
        assert [alpha_at(s, e) for e in (158, 159, 160, 161)] == [0, 0, 1, 1]

    def test_progress_uses_exact_ratio(self):
        s = PhaseSchedule(3, 10, 1.0, TransformKind("power", 1.0))
        assert progress_at(s, 10) == 1.0
        assert progress_at(s, 6) == 3 / 7

    def test_negative_epoch(self):
        with pytest.raises(ValueError):
            alpha_at(linear(), -1)


class TestQ:
    def test_phases(self):
        s = linear()
        assert q_at(s, 10) == 1
        assert q_at(s, 170) == 0
        assert q_at(s, 130) == 0.5

    def test_monotone_nonincreasing(self):
        s = PhaseSchedule(20, 80, 0.8, TransformKind("log", 3.0))
        qs = [q_at(s, e) for e in range(120)]
        assert np.all(np.diff(qs) <= 0)
        assert qs[20] == 1 and qs[80] == pytest.approx(0.2, abs=1e-15)

    def test_rejects_delta_above_one(self):
        with pytest.raises(ValueError):
            q_at(PhaseSchedule(0, 10, 1.5), 3)

    @given(st.integers(0, 300), st.floats(0.01, 1.0), st.sampled_from(KINDS))
    def test_complement_of_alpha(self, e, delta, kind):
        s = PhaseSchedule(100, 160, delta, kind)
        assert q_at(s, e) == 1 - alpha_at(s, e)


class TestMixBounds:
    def test_initial(self):
        assert mix_bounds_at(linear(), 10, 0.3) == (0.3, 0.3)

    def test_final_is_remix(self):
        assert mix_bounds_at(linear(), 170, 0.3) == (0.0, 1.0)

    def test_linear_midpoint(self):
        lo, hi = mix_bounds_at(linear(), 130, 0.4)
        assert lo == pytest.approx(0.2, abs=1e-15)
        assert hi == pytest.approx(0.7, abs=1e-15)

    def test_rejects_lambda_outside(self):
        with pytest.raises(ValueError):
            mix_bounds_at(linear(), 0, 1.2)

    @given(st.integers(0, 250), st.floats(0, 1), st.sampled_from(KINDS))
    def test_closed_forms(self, e, lam, kind):
        s = PhaseSchedule(100, 160, 1.0, kind)
        f = progress_at(s, e)
        lo, hi = mix_bounds_at(s, e, lam)
        assert lo == lam * (1 - f)
        assert hi == lam * (1 - f) + f
        assert hi - lo == pytest.approx(f, abs=1e-15)
        assert 0 <= lo <= lam <= hi <= 1 + 1e-15
