import copy
import json
import math

import numpy as np
import pytest

import oracles
from sgpde.coeffs import coefficient_by_name, initial_datum_by_name
from sgpde.harness import (
    _admissible,
    analytic_reference,
    collocation_reference,
    config_hash,
    error_norm_H,
    fit_rate,
    half_split_slopes,
    load_config,
    solve_single,
    sweep,
    write_outputs,
    _OperatorCache,
)
from sgpde.orthopoly import hermite
from sgpde.pce import distribution, multi_index_set, tensor_basis_matrix, tensor_quad
from sgpde.sgsystem import SgState
from sgpde.spatial import assemble_mass, l2_error, l2_project, load_vector, make_fe_space, make_mesh

H1 = distribution(hermite())


def mini_config(**overrides):
    raw = {
        "distribution": [{"kind": "hermite"}],
        "coefficient": {"name": "logistic_1d"},
        "initial_datum": {"name": "sine_modes", "params": {"modes": [[1, 1.0]]}},
        "geometry": {"dim": 1, "fe_order": 2},
        "sweep": {"n": [1, 2, 3], "m": [8, 16], "n_k": [8, 16]},
        "scheme": "crank_nicolson",
        "t_final": 0.1,
        "quad_order": 20,
        "reference": {"kind": "analytic"},
    }
    raw.update(overrides)
    return raw


def test_analytic_reference_examples():
    field = coefficient_by_name("constant", value=2.0, dim=1)
    u0 = initial_datum_by_name("sine_modes", modes=[(1, 1.0)])
    ref = analytic_reference(field, u0, 0.1)
    z = np.array([0.3])
    at0 = ref.solution(z, t=0.0)
    assert at0(0.5) == pytest.approx(1.0, rel=1e-14)
    amp = oracles.heat_amplitude(2.0, 1, 0.1)
    assert ref.solution(z)(0.5) == pytest.approx(amp, rel=1e-12)
    # logistic factor at z = 0 gives diffusivity 1.5
    logi = coefficient_by_name("logistic_1d")
    ref2 = analytic_reference(logi, u0, 0.1)
    assert ref2.solution(np.array([0.0]))(0.5) == pytest.approx(
        oracles.heat_amplitude(1.5, 1, 0.1), rel=1e-12
    )


def test_analytic_reference_rejects_nonseparable():
    field = coefficient_by_name("logistic_anisotropic")
    u0 = initial_datum_by_name("sine_modes")
    with pytest.raises(ValueError):
        analytic_reference(field, u0, 0.1)


def test_collocation_matches_analytic_for_constant_field():
    field = coefficient_by_name("constant", value=2.0, dim=1)
    u0 = initial_datum_by_name("sine_modes", modes=[(1, 1.0)])
    space = make_fe_space(make_mesh(1, 256), 2)
    ref = collocation_reference(H1, 8, space, 512, field, u0, 0.1)
    ana = analytic_reference(field, u0, 0.1)
    # all node solutions identical for a z-independent field
    assert np.max(np.abs(ref.values - ref.values[0])) < 1e-12
    for i in (0, 4):
        err = l2_error(ref.space, ref.values[i], ana.solution(ref.nodes[i]))
        assert err <= 1e-5


def test_collocation_zero_initial_datum():
    field = coefficient_by_name("constant", value=1.0, dim=1)
    u0 = initial_datum_by_name("sine_modes", modes=[(1, 0.0)])
    space = make_fe_space(make_mesh(1, 8), 1)
    ref = collocation_reference(H1, 4, space, 4, field, u0, 0.1)
    assert np.max(np.abs(ref.values)) < 1e-13


def test_error_norm_zero_for_identical_states():
    field = coefficient_by_name("constant", value=1.0, dim=1)
    u0 = initial_datum_by_name("sine_modes", modes=[(1, 1.0)])
    space = make_fe_space(make_mesh(1, 8), 1)
    ref = collocation_reference(H1, 5, space, 8, field, u0, 0.05)
    mis = multi_index_set(1, 2)
    basis = tensor_basis_matrix(H1, mis, ref.nodes)
    # least-squares chaos representation of the reference samples
    coeffs = np.linalg.lstsq(basis, ref.values, rcond=None)[0]
    state = SgState(0.05, coeffs, mis)
    err = error_norm_H(H1, state, space, ref)
    assert err < 1e-12


def test_error_norm_single_node_perturbation():
    field = coefficient_by_name("constant", value=1.0, dim=1)
    u0 = initial_datum_by_name("sine_modes", modes=[(1, 1.0)])
    space = make_fe_space(make_mesh(1, 8), 1)
    ref = collocation_reference(H1, 4, space, 8, field, u0, 0.05)
    mis = multi_index_set(1, 3)
    basis = tensor_basis_matrix(H1, mis, ref.nodes)
    coeffs = np.linalg.lstsq(basis, ref.values, rcond=None)[0]
    c = 0.37
    # bump the reconstruction by the constant c at exactly one node: with
    # 4 nodes and d_3 = 4 modes the basis matrix is square and invertible
    bump = np.zeros((4, space.ndof))
    bump[2] = c
    coeffs_pert = coeffs + np.linalg.solve(basis, bump)
    err = error_norm_H(H1, SgState(0.05, coeffs_pert, mis), space, ref)
    ones = np.ones(space.ndof)
    mass = assemble_mass(space)
    want = c * math.sqrt(ref.weights[2]) * math.sqrt(ones @ (mass @ ones))
    assert err == pytest.approx(want, rel=1e-10)


def test_error_norm_matches_monte_carlo():
    cfg = load_config(mini_config(sweep={"n": [2], "m": [8], "n_k": [16]}))
    cache = _OperatorCache(cfg)
    state, space = solve_single(cache, 2, 8, 16)
    ana = analytic_reference(cache.field, cache.u0, cfg.t_final)
    quad_err = error_norm_H(cache.dist, state, space, ana, q=30)
    rng = np.random.default_rng(123)
    samples = rng.standard_normal((10_000, 1))
    recon = tensor_basis_matrix(cache.dist, state.mis, samples) @ state.coeffs
    mass = assemble_mass(space)
    b_sin = load_vector(space, lambda x: math.sin(math.pi * x))
    sin_norm2 = 0.5
    amps = np.array([ana.diffusivity(z) for z in samples])
    damp = np.exp(-amps * math.pi**2 * cfg.t_final)
    err2 = (
        np.einsum("qi,ij,qj->q", recon, mass.toarray(), recon)
        - 2.0 * damp * (recon @ b_sin)
        + damp**2 * sin_norm2
    )
    mc_mean = float(np.mean(err2))
    mc_stderr = float(np.std(err2, ddof=1) / math.sqrt(len(err2)))
    assert abs(quad_err**2 - mc_mean) <= 3.0 * mc_stderr


def test_fit_rate_examples():
    fit = fit_rate([(1.0, 0.1), (0.5, 0.025), (0.25, 0.00625)])
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.residual_rms < 1e-12
    flat = fit_rate([(1.0, 0.3), (0.5, 0.3), (0.25, 0.3)])
    assert flat.slope == pytest.approx(0.0, abs=1e-12)
    lin = fit_rate([(1.0, 0.1), (0.5, 0.05), (0.25, 0.025)])
    assert lin.slope == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_rate([(1.0, 0.1), (0.5, 0.05)])


def test_admissibility_rules():
    hs = [1.0, 0.5, 0.25, 0.125, 0.0625]
    errors = [1e-2, 1e-3, 1e-4, 9e-5, 1e-5]
    keep, flagged = _admissible(hs, errors, ref_floor=0.0)
    assert keep == [0, 1, 2, 3, 4]
    keep, flagged = _admissible(hs, errors, ref_floor=1e-5)
    assert keep == [0, 1]
    assert flagged[0] == (2, "near reference floor")
    keep, flagged = _admissible(hs, errors, ref_floor=0.0, sweep_floor=4e-5)
    assert keep == [0, 1]
    assert flagged[0] == (2, "near sweep floor")
    keep, flagged = _admissible(hs, [1e-2, 1e-3, 2e-3, 1e-4, 1e-5], ref_floor=0.0)
    assert keep == [0, 1]
    assert flagged[0] == (2, "not decreasing")


def test_half_split_slopes():
    hs = [1.0, 0.5, 0.25, 0.125]
    errors = [1.0, 0.25, 0.0156, 0.00024]  # accelerating decay
    first, second = half_split_slopes(hs, errors)
    assert second > first
    assert half_split_slopes(hs[:3], errors[:3]) is None


def test_config_validation_errors():
    with pytest.raises(ValueError, match="unknown config keys"):
        load_config(mini_config(bogus=1))
    with pytest.raises(ValueError, match="quad_order"):
        load_config(mini_config(quad_order=3))
    with pytest.raises(ValueError, match="increasing"):
        load_config(mini_config(sweep={"n": [2, 1], "m": [8], "n_k": [8]}))
    with pytest.raises(ValueError, match="m_ref"):
        load_config(mini_config(reference={"kind": "collocation", "m_ref": 16, "n_k_ref": 64}))
    # non-strict mode allows a merely-finer reference
    cfg = load_config(
        mini_config(
            reference={"kind": "collocation", "m_ref": 32, "n_k_ref": 64},
            strict_reference=False,
        )
    )
    assert cfg.reference["m_ref"] == 32
    with pytest.raises(ValueError, match="scheme"):
        load_config(mini_config(scheme="leapfrog"))


def strip_runtimes(payload):
    if isinstance(payload, dict):
        return {k: strip_runtimes(v) for k, v in payload.items() if k != "runtime_s"}
    if isinstance(payload, list):
        return [strip_runtimes(v) for v in payload]
    return payload


def test_sweep_deterministic_and_monotone_joint():
    cfg = load_config(mini_config())
    rep1 = sweep(cfg)
    rep2 = sweep(cfg)
    p1 = strip_runtimes(rep1.to_dict())
    p2 = strip_runtimes(rep2.to_dict())
    assert json.dumps(p1, sort_keys=True) == json.dumps(p2, sort_keys=True)
    assert rep1.config_digest == config_hash(cfg)
    # refining any single axis never increases the error by more than 5%
    for result in rep1.axes.values():
        for a, b in zip(result.errors, result.errors[1:]):
            assert b <= a * 1.05


def test_config_hash_changes_with_config():
    c1 = load_config(mini_config())
    c2 = load_config(mini_config(t_final=0.2))
    assert config_hash(c1) != config_hash(c2)


def test_write_outputs_csv_and_report(tmp_path):
    raw = mini_config(
        sweep={"n": [1, 2], "m": [8], "n_k": [8]},
        output={"csv_dir": str(tmp_path / "csv"), "report": str(tmp_path / "report.json")},
    )
    cfg = load_config(raw)
    report = sweep(cfg)
    paths = write_outputs(cfg, report)
    assert len(paths) == 5  # three axes + joint + report
    n_csv = (tmp_path / "csv" / "axis_n.csv").read_bytes().decode()
    lines = n_csv.split("\n")
    assert lines[0] == "axis,value,error,runtime_s"
    assert "\r" not in n_csv
    first = lines[1].split(",")
    assert first[0] == "n" and int(first[1]) == 1
    float(first[2])  # parses as a number with '.' decimal
    loaded = json.loads((tmp_path / "report.json").read_text())
    assert loaded["config_hash"] == config_hash(cfg)
    assert loaded["version"]


def test_collocation_reference_error_estimate():
    cfg = load_config(
        mini_config(
            sweep={"n": [1, 2], "m": [4], "n_k": [4]},
            reference={"kind": "collocation", "m_ref": 16, "n_k_ref": 16},
        )
    )
    from sgpde.harness import build_reference

    cache = _OperatorCache(cfg)
    ref = build_reference(cfg, cache, estimate_error=True)
    assert ref.est_error > 0.0
