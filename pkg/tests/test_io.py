import json
import math

import pytest

from polystar import EquationOfState, fixed_point_minimize, solve_star
from polystar import io as sio


@pytest.fixture(scope="module")
def star():
    return solve_star(EquationOfState.polytropic(2 * math.pi, 2.0), 1.0, n_grid=50)


def test_json_field_order_and_round_trip(star):
    text = sio.solution_to_json(star)
    doc = json.loads(text)
    assert list(doc) == ["gamma", "K", "beta", "R", "M", "lambda", "energies", "profile"]
    assert list(doc["energies"]) == ["U", "G", "E0", "E0_pohozaev", "virial_residuals"]
    assert list(doc["profile"][0]) == ["r", "theta", "sigma", "mass", "V"]
    assert len(doc["profile"]) == 50
    # 17 significant digits round-trip exactly
    assert doc["R"] == star.R and doc["lambda"] == star.lam and doc["M"] == star.M
    assert doc["profile"][7]["sigma"] == float(star.sigma[7])


def test_json_is_deterministic(star):
    assert sio.solution_to_json(star) == sio.solution_to_json(star)
    assert json.loads(sio.solution_to_json(star, indent=2)) == json.loads(sio.solution_to_json(star))


def test_read_json_from_path(star, tmp_path):
    path = tmp_path / "s.json"
    path.write_text(sio.solution_to_json(star))
    assert sio.read_solution_json(path)["beta"] == 1.0


def test_profile_csv(star):
    header, rows = sio.read_csv_rows(sio.profile_to_csv(star))
    assert header == ["r", "sigma", "mass", "V"]
    assert len(rows) == 50
    assert rows[-1][2] == pytest.approx(math.pi, rel=1e-11)


def test_sweep_and_history_csv():
    text = sio.sweep_to_csv([(2.0, 1.0, 0.5, 1.2, 1.0, -0.8, 0.2, 1.2, -0.4)])
    assert text.splitlines()[0] == "gamma,m,beta,R,M,lambda,U,G,E0"
    d = fixed_point_minimize(EquationOfState.polytropic(1.0, 2.0), 1.0, n=200)
    header, rows = sio.read_csv_rows(sio.history_to_csv(d.history))
    assert header == ["iter", "energy", "residual", "lambda_hat"]
    assert rows[0][0] == 1 and len(rows) == len(d.history)
    assert "." not in sio.history_to_csv(d.history).splitlines()[1].split(",")[0]


def test_non_finite_values_rejected():
    with pytest.raises(ValueError):
        sio._num(float("nan"))
