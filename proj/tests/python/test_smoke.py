"""Smoke tests for the python bindings: thin checks that the main operations
round-trip through the module with sane numbers."""

import json
import math

import numpy as np
import pytest

qbsde = pytest.importorskip("qbsde")


def test_paths_and_integrals():
    grid = qbsde.TimeGrid(1.0, 8)
    ens = qbsde.generate_paths(7, 256, grid, 1)
    inc = ens.increments()
    assert inc.shape == (256, 8, 1)
    b = ens.brownian()
    assert np.allclose(b[:, -1, 0], inc.sum(axis=1)[:, 0])

    ones = np.ones((256, 9, 1))
    ito = qbsde.ito_integral(ens, ones)
    assert np.allclose(ito[:, -1, 0], b[:, -1, 0])

    tint = qbsde.time_integral(ens, ones)
    assert np.allclose(tint[:, -1, 0], 1.0)


def test_determinism():
    grid = qbsde.TimeGrid(1.0, 4)
    a = qbsde.generate_paths(42, 16, grid, 2).increments()
    b = qbsde.generate_paths(42, 16, grid, 2).increments()
    assert (a == b).all()


def test_norms_of_constant_process():
    grid = qbsde.TimeGrid(1.0, 16)
    ens = qbsde.generate_paths(5, 128, grid, 1)
    proc = np.full((128, 17, 1), 2.0)
    rep = json.loads(qbsde.estimate_norms(ens, proc))
    assert rep["bmo"] == 2.0
    assert rep["linf"] == 2.0
    assert rep["minf"] == 2.0


def test_oracle_and_solver():
    grid = qbsde.TimeGrid(1.0, 32)
    ens = qbsde.generate_paths(37, 1 << 13, grid, 1)
    xi = np.sin(ens.brownian()[:, -1, 0])
    assert qbsde.exp_transform_oracle(2.0, np.full(64, 1.25)) == pytest.approx(1.25)

    sol = qbsde.solve_quadratic_1d(ens, xi, gamma=1.0)
    oracle = qbsde.exp_transform_oracle(1.0, xi)
    assert sol["Y"][:, 0, 0].mean() == pytest.approx(oracle, abs=3e-2)


def test_system_solver_contracts():
    grid = qbsde.TimeGrid(1.0, 16)
    ens = qbsde.generate_paths(11, 1 << 12, grid, 1)
    b_T = ens.brownian()[:, -1, 0]
    xi = np.stack([0.3 * np.sin(0.3 * b_T), 0.3 * np.cos(0.3 * b_T)], axis=1)
    overrides = json.dumps({"theta1": 1.0, "theta2": 1.0, "vartheta1": 0.01, "vartheta2": 0.01})
    sol = qbsde.solve_system(ens, "(2.4b)", overrides, xi)
    assert sol["converged"]
    assert max(sol["residual_rms"]) < 2e-2


def test_classifier_gold_labels():
    verdict = json.loads(qbsde.classify("burgers", count=512))
    assert [c["case"] for c in verdict["C1b"]] == ["ii", "ii"]


def test_constants_and_transforms():
    rep = json.loads(qbsde.local_constants(json.dumps({"n": 2, "p": 2.0})))
    assert rep["K"] > 0
    gate = rep["theta_max"] * 4 * 2 * max(rep["q"] * 2.0, 1.0) * rep["K"]
    assert gate == pytest.approx(1.0, abs=1e-13)

    v = qbsde.check_thm_2_12d(0.0, 0.0, 0.5, 1.0)
    assert v["nonsolvable"]
    assert v["coefficients"] == pytest.approx((1.0, 0.5))

    assert qbsde.check_cor_2_15b(3.0, 1.5)
    assert not qbsde.check_cor_2_15b(2.0, 3.0)

    A = qbsde.matrix_first_row(np.array([2.0, 3.0]))
    assert A[0, 0] == 2.0 and A[1, 1] == 1.0

    m38, m425 = qbsde.verify_young_inequalities(5000, 3)
    assert m38 >= -1e-12 and m425 >= -1e-12


def test_run_experiment_roundtrip(tmp_path):
    config = {
        "kind": "norms",
        "seed": 5,
        "grid": {"T": 1.0, "N": 8},
        "ensemble": {"M": 256},
        "process": {"type": "constant", "c": 2.0},
    }
    manifest = json.loads(qbsde.run_experiment(json.dumps(config), str(tmp_path)))
    assert manifest["experiment"] == "norms"
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["bmo"] == 2.0
