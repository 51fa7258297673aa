import re
import warnings
from fractions import Fraction

import pytest

from mpr2.defined import INF, dr
from mpr2.errors import InvalidConfig, PrecisionFailure, SigmaOverflow
from mpr2.fpenv import DEFAULT_STACK, DOUBLE, HALF, SINGLE, TaggedValue, TaggedVector
from mpr2.solver import (
    SolverConfig,
    compute_candidate,
    compute_step,
    load_config,
    model_decrease,
    rho_and_accept,
    select_gradient_precision,
    select_objective_precision,
    update_sigma,
    validate_params,
)
from mpr2.solver.config import EqualityWarning, parse_config_text, parse_mode
from mpr2.solver.steps import predicted_omega, sigma_fits, stop_test, stopping_threshold

F = Fraction


def test_defaults_meet_eta0_bound_with_equality():
    # the default eta0 sits exactly at eta1/2, which is reported but accepted
    with pytest.warns(EqualityWarning):
        notes = validate_params(SolverConfig())
    assert len(notes) == 1


def test_strict_parameters_are_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert validate_params(SolverConfig(eta0=F(1, 40))) == []


@pytest.mark.parametrize("changes,needle", [
    ({"eta1": F(8, 10)}, "eta1 <= eta2"),
    ({"eta2": 1}, "eta2 < 1"),
    ({"gamma1": 1}, "gamma1"),
    ({"gamma2": F(1, 2)}, "gamma2"),
    ({"gamma2": 4}, "gamma2 <= gamma3"),
    ({"eta0": F(6, 100)}, "eta0 < eta1/2"),
    ({"eta0": F(-1, 100)}, "eta0 >= 0"),
    ({"kappa_mu": 0}, "kappa_mu > 0"),
    ({"kappa_mu": F(1, 10), "eta2": F(9, 10)}, "eta0 + kappa_mu/2"),
    ({"sigma0": 3}, "power of two"),
    ({"sigma_min": 2}, "sigma_min <= sigma0"),
    ({"relax_a": 0}, "relax_a"),
    ({"eps": 0}, "eps"),
    ({"formats": "double,half"}, None),
])
def test_invalid_parameters_are_named(changes, needle):
    with pytest.raises(InvalidConfig, match=re.escape(needle) if needle else None):
        validate_params(SolverConfig(**changes))


def test_equality_warning():
    with pytest.warns(EqualityWarning, match="eta0 = eta1/2"):
        validate_params(SolverConfig(eta0=F(1, 20), eta1=F(1, 10), kappa_mu=F(1, 10)))


def test_gamma2_one_needs_override():
    with pytest.raises(InvalidConfig):
        validate_params(SolverConfig(gamma2=1))
    with pytest.warns(EqualityWarning):
        notes = validate_params(SolverConfig(gamma2=1, allow_gamma2_one=True))
    assert "gamma2 = 1 accepted by override" in notes


def test_config_construction_errors():
    with pytest.raises(InvalidConfig):
        SolverConfig(mode="newton")
    with pytest.raises(InvalidConfig):
        SolverConfig(formats="half,quad")
    with pytest.raises(InvalidConfig):
        SolverConfig(eta0="abc")
    with pytest.raises(InvalidConfig):
        SolverConfig(error_model="sloppy")
    assert parse_mode("MPR2-E") == "mpr2_relaxed"
    assert SolverConfig(eps="1e-6").eps == F(1, 10**6)


def test_parse_config_text(tmp_path):
    text = """
    # comment
    mode = relaxed
    eps = 1e-5   # trailing comment
    max_iter = 50
    rho_correction = yes
    formats = single,double
    """
    d = parse_config_text(text)
    assert d == {"mode": "relaxed", "eps": "1e-5", "max_iter": 50, "rho_correction": True,
                 "formats": "single,double"}
    path = tmp_path / "c.cfg"
    path.write_text(text)
    cfg = load_config(path, {"max_iter": 7, "eps": None})
    assert cfg.max_iter == 7 and cfg.eps == F(1, 10**5) and cfg.formats == ("single", "double")
    for bad in ("eps 1", "colour = red", "trace = maybe", "max_iter = x"):
        with pytest.raises(InvalidConfig):
            parse_config_text(bad)


def test_as_dict_round_trips():
    cfg = SolverConfig(mode="relaxed", relax_a=F(1, 8), rho_correction=True)
    d = {k: v for k, v in cfg.as_dict().items() if v is not None}
    assert SolverConfig(**d) == cfg


def test_step_and_decrease():
    g = TaggedVector([1.0, -2.0, 0.5], HALF)
    s = compute_step(g, F(4))
    assert s.tolist() == [-0.25, 0.5, -0.125] and s.fmt == HALF
    dT = model_decrease(g, s)
    assert dT.value == 0.25 + 1.0 + 0.0625 and dT.fmt == HALF


def test_candidate_stall_and_cast():
    x = TaggedVector([1.0, 2.0], HALF)
    s = TaggedVector([2.0**-12, 0.0], HALF)
    c, stalled = compute_candidate(x, s, HALF)
    assert stalled and c.tolist() == [1.0, 2.0]
    c, stalled = compute_candidate(x, TaggedVector([0.5, 0.0], HALF), SINGLE)
    assert not stalled and c.fmt == SINGLE and c.tolist() == [1.5, 2.0]


def test_stop_tests():
    t = stopping_threshold(F(1, 100), 0, 0)
    assert t == dr(F(1, 100))
    g = TaggedValue(0.0099, DOUBLE)
    assert not stop_test(g, F(1, 100), dr(2) ** -6, 0)
    assert stop_test(g, F(1, 100), dr(2) ** -6, 0, relaxed=True)
    assert stop_test(TaggedValue(0.009, DOUBLE), F(1, 100), dr(2) ** -10, dr(2) ** -20)


def test_gradient_precision_ladder():
    assert select_gradient_precision(2, 1, 3) == (2, 2)
    assert select_gradient_precision(2, 2, 3) == (3, 2)
    assert select_gradient_precision(3, 2, 3) == (3, 3)
    with pytest.raises(PrecisionFailure):
        select_gradient_precision(3, 3, 3)


def test_objective_precision_selection():
    # reference bound 2^-11 * 1 in half; eta0 * dT = 0.05 * dT
    omega_ref, u_ref = dr(2) ** -11, HALF.u
    assert select_objective_precision(DEFAULT_STACK, 1, omega_ref, u_ref, F(1, 20), 1.0) == HALF
    assert select_objective_precision(DEFAULT_STACK, 1, omega_ref, u_ref, F(1, 20), 2.0**-10) == SINGLE
    assert select_objective_precision(DEFAULT_STACK, 2, omega_ref, u_ref, F(1, 20), 1.0) == SINGLE
    assert select_objective_precision(DEFAULT_STACK, 1, omega_ref, u_ref, F(1, 20), 2.0**-40) == DOUBLE
    assert select_objective_precision(DEFAULT_STACK, 1, omega_ref, u_ref, F(1, 20), 2.0**-80) == DOUBLE


def test_predicted_omega_scaling():
    assert predicted_omega(0, HALF.u, SINGLE.u) == 0
    w = predicted_omega(dr(2) ** -11, HALF.u, SINGLE.u)
    assert w == dr(2) ** -24
    w = predicted_omega(dr(2) ** -11, HALF.u, SINGLE.u, f_ref=4.0, dT=1.0)
    assert w == dr(2) ** -24 * dr(3) / 4


def test_rho_and_accept():
    cfg = SolverConfig()
    dT = TaggedValue(1.0, HALF)
    rho, ok = rho_and_accept(TaggedValue(3.0, HALF), TaggedValue(2.5, HALF), dT, cfg)
    assert rho == dr(F(1, 2)) and ok
    rho, ok = rho_and_accept(TaggedValue(3.0, HALF), TaggedValue(2.95, DOUBLE), dT, cfg)
    assert not ok
    rho, ok = rho_and_accept(TaggedValue(3.0, HALF), None, dT, cfg)
    assert rho == -INF and not ok
    rho, ok = rho_and_accept(TaggedValue(1.0, DOUBLE), TaggedValue(1 - 2.0**-30, DOUBLE),
                             TaggedValue(2.0**-30, DOUBLE), cfg, rho_format=HALF)
    assert rho == 0 and not ok


def test_update_sigma():
    cfg = SolverConfig()
    assert update_sigma(F(1), dr(F(9, 10)), cfg) == F(1, 2)
    assert update_sigma(F(1), dr(F(1, 2)), cfg) == 1
    assert update_sigma(F(1), dr(0), cfg) == 2
    assert update_sigma(cfg.sigma_min, dr(1), cfg) == cfg.sigma_min
    with pytest.raises(SigmaOverflow):
        update_sigma(F(2**1023), dr(-1), cfg)


def test_sigma_fits():
    assert sigma_fits(F(2**15), HALF) and not sigma_fits(F(2**16), HALF)
    assert not sigma_fits(F(1, 2**15), HALF) and sigma_fits(F(1, 2**14), HALF)
