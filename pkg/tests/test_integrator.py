import math

import numpy as np
import pytest
import sympy

from vmsiac.cases import RunConfig
from vmsiac.dg import Basis, l2_project
from vmsiac.errors import ConfigurationError, DivergenceError
from vmsiac.experiments import initial_state
from vmsiac.integrator import TimeControls, field_max, integrate, select_dt, ssp_rk3_step
from vmsiac.kinetic import full_rhs
from vmsiac.mesh import AxisSpec, Mesh


def landau_mesh(nx, nv):
    return Mesh((AxisSpec(0.0, 4 * math.pi, nx, periodic=True),),
                (AxisSpec(-6 * math.pi, 6 * math.pi, nv),))


# ---------------------------------------------------------------- dt rule

def test_dt_example_p1():
    dt = select_dt(1, TimeControls(cfl=0.1, t_final=1.0), landau_mesh(128, 128), e_max=0.5)
    assert dt == pytest.approx(0.1 / (192 + 0.5 * 128 / (12 * math.pi)), rel=1e-14)
    assert dt == pytest.approx(5.16e-4, rel=1e-2)


def test_dt_field_free():
    mesh = landau_mesh(32, 32)
    controls = TimeControls(cfl=0.1, t_final=1.0, e_max_floor=1e-300)
    dt = select_dt(1, controls, mesh, e_max=0.0)
    assert dt == pytest.approx(0.1 * mesh.x_axes[0].width / (6 * math.pi), rel=1e-14)


def test_dt_floor_applies():
    mesh = landau_mesh(32, 32)
    controls = TimeControls(cfl=0.1, t_final=1.0, e_max_floor=1.0)
    assert select_dt(1, controls, mesh, e_max=0.0) == select_dt(1, controls, mesh, e_max=1.0)


@pytest.mark.parametrize("k, p", [(1, 1.0), (2, 5 / 3), (3, 7 / 3)])
def test_dt_halving_ratio(k, p):
    controls = TimeControls(cfl=0.2, t_final=1.0)
    coarse = select_dt(k, controls, landau_mesh(16, 16), e_max=0.3)
    fine = select_dt(k, controls, landau_mesh(32, 32), e_max=0.3)
    assert coarse / fine == pytest.approx(2.0 ** p, rel=1e-12)


def test_dt_rule_override():
    controls = TimeControls(cfl=0.2, t_final=1.0, dt_rule="p1")
    coarse = select_dt(2, controls, landau_mesh(16, 16), e_max=0.3)
    fine = select_dt(2, controls, landau_mesh(32, 32), e_max=0.3)
    assert coarse / fine == pytest.approx(2.0, rel=1e-12)


def test_dt_unsupported_degree():
    with pytest.raises(ConfigurationError):
        select_dt(4, TimeControls(cfl=0.1, t_final=1.0), landau_mesh(8, 8), e_max=0.0)


@pytest.mark.parametrize("kw", [dict(cfl=0.0), dict(cfl=1.5), dict(t_final=-1.0),
                                dict(dt_rule="x"), dict(dt_mode="x"), dict(e_max_floor=0.0)])
def test_time_controls_validation(kw):
    args = dict(cfl=0.1, t_final=1.0)
    args.update(kw)
    with pytest.raises(ConfigurationError):
        TimeControls(**args)


def test_field_max_measures_nodes():
    xm = Mesh((AxisSpec(0.0, 2 * math.pi, 64, periodic=True),))
    e = l2_project(lambda x: 0.7 * np.sin(x), xm, Basis(2, 1))
    assert field_max(e, 1.0) == pytest.approx(0.7, rel=1e-3)
    sw = l2_project([lambda x: 0.1 + 0 * x, lambda x: -0.2 + 0 * x, lambda x: 0.5 + 0 * x], xm, Basis(1, 1))
    assert field_max(sw, 2.0) == pytest.approx(0.1 + 0.2 + 2.0 * 0.5, rel=1e-12)


# ---------------------------------------------------------------- RK3

def test_zero_rhs_bitwise():
    rng = np.random.default_rng(0)
    u = rng.standard_normal(50)
    out = ssp_rk3_step(u, 0.37, lambda v, t: np.zeros_like(v))
    np.testing.assert_array_equal(out, u)


def test_zero_rhs_state_bitwise():
    state = initial_state(RunConfig.for_case("landau", nx=4, nv=4))
    out = ssp_rk3_step(state, 0.1, lambda s: (np.zeros_like(s.f.coeffs), np.zeros_like(s.fields.coeffs)))
    np.testing.assert_array_equal(out.f.coeffs, state.f.coeffs)
    np.testing.assert_array_equal(out.fields.coeffs, state.fields.coeffs)
    assert out.t == pytest.approx(0.1)


def test_decay_one_step():
    # stability polynomial 1 + z + z^2/2 + z^3/6 at z = -0.1
    expected = 1 - 0.1 + 0.01 / 2 - 0.001 / 6
    out = ssp_rk3_step(np.array([1.0]), 0.1, lambda u, t: -u)[0]
    assert out == pytest.approx(expected, abs=1e-15)
    assert out == pytest.approx(0.9048333, abs=1e-7)


def test_decay_symbolic_oracle():
    # convex-combination stages expanded symbolically; the stepper uses the increment form
    z = sympy.symbols("z")
    u1 = 1 + z
    u2 = sympy.Rational(3, 4) + sympy.Rational(1, 4) * (u1 + z * u1)
    u3 = sympy.Rational(1, 3) + sympy.Rational(2, 3) * (u2 + z * u2)
    g = sympy.expand(u3)
    assert sympy.simplify(g - (1 + z + z ** 2 / 2 + z ** 3 / 6)) == 0
    for lam in (-0.1, -1.0, 0.7):
        out = ssp_rk3_step(np.array([1.0]), 1.0, lambda u, t: lam * u)[0]
        assert out == pytest.approx(float(g.subs(z, lam)), abs=1e-15)


def test_third_order_in_time():
    # u' = cos(t) u, exact exp(sin t); nonautonomous, so stage times matter
    def solve(n):
        u, dt = np.array([1.0]), 1.0 / n
        for i in range(n):
            u = ssp_rk3_step(u, dt, lambda v, t: np.cos(t) * v, i * dt)
        return abs(u[0] - math.exp(math.sin(1.0)))
    assert math.log2(solve(20) / solve(40)) == pytest.approx(3.0, abs=0.1)


def test_stability_region():
    z = np.linspace(-2.512, 0.0, 201)
    g_oracle = 1 + z + z ** 2 / 2 + z ** 3 / 6
    g = np.array([ssp_rk3_step(np.array([1.0]), 1.0, lambda u, t, lam=lam: lam * u)[0] for lam in z])
    np.testing.assert_allclose(g, g_oracle, atol=1e-14)
    assert np.all(np.abs(g) <= 1.0)
    assert abs(1 - 2.6 + 2.6 ** 2 / 2 - 2.6 ** 3 / 6) > 1.0


def test_divergence_error():
    with pytest.raises(DivergenceError) as info:
        ssp_rk3_step(np.array([1.0]), 0.5, lambda u, t: np.full_like(u, np.inf), 2.0)
    assert info.value.dt == 0.5 and info.value.t > 2.0


def test_nonpositive_dt():
    with pytest.raises(ValueError):
        ssp_rk3_step(np.array([1.0]), 0.0, lambda u, t: u)


# ---------------------------------------------------------------- integrate

def test_integrate_lands_on_t_final():
    state = initial_state(RunConfig.for_case("landau", nx=8, nv=8))
    steps = []
    out = integrate(state, TimeControls(cfl=0.1, t_final=0.3), full_rhs, monitor=lambda s, dt: steps.append(dt))
    assert out.t == 0.3
    assert sum(steps) == pytest.approx(0.3, abs=1e-14)
    assert steps[-1] <= steps[0] * (1 + 1e-12)


def test_integrate_frozen_mode_constant_dt():
    state = initial_state(RunConfig.for_case("landau", nx=8, nv=8))
    steps = []
    integrate(state, TimeControls(cfl=0.1, t_final=0.2, dt_mode="frozen"), full_rhs,
              monitor=lambda s, dt: steps.append(dt))
    assert len(set(steps[:-1])) == 1


def test_integrate_zero_time():
    state = initial_state(RunConfig.for_case("landau", nx=4, nv=4))
    out = integrate(state, TimeControls(cfl=0.1, t_final=0.0), full_rhs)
    np.testing.assert_array_equal(out.f.coeffs, state.f.coeffs)
