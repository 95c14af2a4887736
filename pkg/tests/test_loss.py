"""Loss values of known fields against hand-integrated energies."""
import numpy as np
import pytest

from fgmpinn.autodiff import SpatialDual
from fgmpinn.loss import LoadSpec, assemble_loss
from fgmpinn.network import ConfigError
from fgmpinn.problems import get_problem
from fgmpinn.reference import analytic_1d_duals, kirsch_duals
from fgmpinn.sampling import uniform_1d, uniform_grid_2d

EXPECTED_1D = {
    "1D-FGM-ELAS-DIRCH": (1 / 3, 0.0, 0.0),
    "1D-FGM-ELAS-NEU": (0.75, 0.0, 1.5),
    "1D-ELAS-BF": (7 / 6, 0.0, 7 / 3),
    "1D-FGM-THERMO-ELAS": (75 / 729, 10 / 3, 0.0),
}


@pytest.mark.parametrize("code", sorted(EXPECTED_1D))
def test_analytic_1d_energy_terms(code):
    pb = get_problem(code)
    lb = assemble_loss(analytic_1d_duals(code), uniform_1d(2000), pb.material, pb.loads).as_floats()
    el, th, ext = EXPECTED_1D[code]
    assert lb["W_elastic"] == pytest.approx(el, rel=1e-6)
    assert lb["W_thermal"] == pytest.approx(th, rel=1e-6)
    assert lb["W_ext"] == pytest.approx(ext, rel=1e-6)
    assert lb["total"] == pytest.approx(el + th - ext, rel=1e-6)


def test_uniaxial_plate_energy():
    # u2 = x2/3, u1 = 0 on a 1 x 3 plate with E = 1, nu = 0: energy 0.5 * (1/3)^2 * 3
    pb = get_problem("2D-FGM-ELAS-DIRCH", {"material": {"E": {"kind": "constant", "value": 1.0}, "nu": 0.0}})

    def fields_at(p):
        n = len(p)
        return {"u1": SpatialDual(np.zeros(n), [0.0, 0.0]),
                "u2": SpatialDual(p[:, 1] / 3, [0.0, np.full(n, 1 / 3)])}

    lb = assemble_loss(fields_at, uniform_grid_2d(10, 30), pb.material, pb.loads)
    assert lb.as_floats()["total"] == pytest.approx(1 / 6)


def test_kirsch_field_satisfies_clapeyron():
    # with exact Kirsch edge tractions the external work is twice the strain energy
    pb = get_problem("KIRSCH", {"loads": {"tractions": {"right": "kirsch", "top": "kirsch"}}})
    nodes = pb.build_nodes(resolution=45)
    lb = assemble_loss(kirsch_duals(1.0, 0.1, 1.0, 0.3), nodes, pb.material, pb.loads).as_floats()
    assert lb["W_ext"] == pytest.approx(2 * lb["W_elastic"], rel=2e-3)


def test_kirsch_field_under_uniform_edge_load():
    # the infinite-plate field is close to, and above, the finite-plate minimum of -0.51212
    pb = get_problem("KIRSCH")
    lb = assemble_loss(kirsch_duals(1.0, 0.1, 1.0, 0.3), pb.build_nodes(), pb.material, pb.loads).as_floats()
    assert lb["total"] == pytest.approx(-0.5119, abs=5e-4)


def test_traction_on_dirichlet_group_rejected():
    with pytest.raises(ConfigError):
        LoadSpec(tractions={"top": [0.0, 1.0]}, dirichlet=("top",))


def test_missing_traction_group_rejected():
    pb = get_problem("1D-FGM-ELAS-NEU")
    loads = LoadSpec(tractions={"nowhere": [1.0]})
    with pytest.raises(ConfigError):
        assemble_loss(analytic_1d_duals("1D-FGM-ELAS-NEU"), uniform_1d(10), pb.material, loads)
