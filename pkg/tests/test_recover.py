import numpy as np
import pytest

from kugel.errors import InvalidInputError
from kugel.geometry import StarDomain, ball_domain, shape_modes, star_volume, unit_ball_volume
from kugel.kernels import EquationSpec
from kugel.recover import (
    PENALTY,
    RecoveryConfig,
    SizeConditionWarning,
    domain_for,
    nelder_mead,
    objective,
    objective_error,
    recover_shape,
)

V = unit_ball_volume(3)
MODES = shape_modes(3)


def config(kind="yukawa", **kw):
    spec = EquationSpec(kind) if kind == "laplace" else EquationSpec(kind, 1.0)
    cfg = RecoveryConfig(spec, V, **kw)
    return cfg.with_probes_for(ball_domain(1.0))


def single(l, k, value):
    v = np.zeros(len(MODES))
    v[MODES.index((l, k))] = value
    return v


class TestConfig:
    def test_defaults(self):
        cfg = RecoveryConfig(EquationSpec("yukawa", 1.0), 2.0)
        assert (cfg.max_iterations, cfg.initial_step, cfg.convergence_spread) == (2000, 0.05, 1e-12)
        assert cfg.objective == "rms" and cfg.probes is None
        assert [s.branch for s in cfg.equations()] == ["minus", "plus"]
        assert len(RecoveryConfig(EquationSpec("laplace"), 1.0).equations()) == 1

    @pytest.mark.parametrize("kw", [dict(volume_target=0.0), dict(convergence_spread=0.0),
                                    dict(objective="l1"), dict(max_iterations=0)])
    def test_invalid(self, kw):
        base = dict(equation=EquationSpec("yukawa", 1.0), volume_target=1.0)
        base.update(kw)
        with pytest.raises(InvalidInputError):
            RecoveryConfig(**base)

    def test_objective_needs_probes(self):
        with pytest.raises(InvalidInputError):
            objective(RecoveryConfig(EquationSpec("yukawa", 1.0), V), single(2, 0, 0.1))


class TestObjective:
    @pytest.mark.parametrize("kind", ["laplace", "yukawa", "helmholtz"])
    def test_ball_is_small(self, kind):
        assert objective(config(kind), np.zeros(15)) < 1e-8

    def test_quadrupole_is_large(self):
        assert objective(config(), single(2, 0, 0.2)) > 1e-4

    def test_translation_mode_breaks_identity(self):
        cfg = config()
        assert objective(cfg, single(1, 0, 0.1)) > 1e3 * objective_error(cfg, single(1, 0, 0.1))

    def test_sup_norm_objective(self):
        v = single(3, 1, 0.1)
        assert objective(config(objective="sup"), v) >= objective(config(), v)

    def test_positivity_penalized(self):
        cfg = config()
        v = single(1, 0, 3.0)
        assert objective(cfg, v) > PENALTY * 0.5

    def test_volume_fixed(self):
        cfg = config()
        rng = np.random.default_rng(1)
        for _ in range(5):
            d = domain_for(cfg, rng.uniform(-0.1, 0.1, 15))
            assert star_volume(d) == pytest.approx(V, rel=1e-12)

    def test_separation_on_single_mode_grid(self):
        cfg = config()
        for l in (1, 2, 3):
            for value in (-0.2, -0.1, 0.1, 0.2):
                v = single(l, 0, value)
                assert objective(cfg, v) > 50 * objective_error(cfg, v)


class TestNelderMead:
    def test_rosenbrock(self):
        f = lambda x: (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
        x, fx, trace, converged, evals, diameter = nelder_mead(f, [-1.2, 1.0], 0.1, 5000, 1e-14)
        assert converged and fx < 1e-8 and np.allclose(x, 1.0, atol=1e-4)
        values = [v for v, _ in trace]
        assert all(b <= a for a, b in zip(values, values[1:]))
        assert evals > len(trace) and diameter < 1e-3

    def test_quadratic_fifteen_dims(self):
        w = np.arange(1, 16, dtype=float)
        f = lambda x: float(np.sum(w * (x - 0.3) ** 2))
        x, fx, *_ = nelder_mead(f, np.zeros(15), 0.1, 20000, 1e-16)
        assert fx < 1e-8

    def test_stop_callback(self):
        f = lambda x: float(np.sum(x**2))
        _, _, trace, converged, *_ = nelder_mead(f, [1.0, 1.0], 0.5, 100, 1e-30,
                                                 stop=lambda it, fb, xb: it == 3)
        assert converged and len(trace) == 4


class TestRecoverShape:
    def test_ball_converges_immediately(self):
        tr = recover_shape(ball_domain(1.0), RecoveryConfig(EquationSpec("yukawa", 1.0), V))
        assert tr.converged and len(tr.iterations) == 1
        assert np.abs(tr.final_domain.vector()).max() < 1e-9

    def test_short_run_properties(self):
        initial = StarDomain(3, (0, 0, 0), 1.0, ((2, 0, 0.2),))
        cfg = RecoveryConfig(EquationSpec("yukawa", 1.0), V, max_iterations=60)
        tr = recover_shape(initial, cfg)
        values = [v for v, _ in tr.iterations]
        assert not tr.converged and len(values) == 61
        assert all(b <= a for a, b in zip(values, values[1:]))
        assert values[-1] < values[0]
        assert star_volume(tr.final_domain) == pytest.approx(V, rel=1e-10)
        for _, c in tr.iterations[::10]:
            assert star_volume(domain_for(cfg.with_probes_for(initial), c)) == pytest.approx(
                V, rel=1e-10)
        obj = tr.to_json()
        assert set(obj["iterations"][0]) == {"obj", "coeffs"} and len(obj["iterations"][0]["coeffs"]) == 15

    def test_size_condition_warning(self):
        big = StarDomain(3, (0, 0, 0), 4.2, ((2, 0, 0.2),))
        cfg = RecoveryConfig(EquationSpec("helmholtz", 1.0), star_volume(big), max_iterations=2,
                             n_probes=6)
        with pytest.warns(SizeConditionWarning):
            tr = recover_shape(big, cfg)
        assert len(tr.iterations) == 3

    def test_two_dimensional_rejected(self):
        with pytest.raises(InvalidInputError):
            recover_shape(ball_domain(1.0, dim=2), RecoveryConfig(EquationSpec("yukawa", 1.0), 1.0))
