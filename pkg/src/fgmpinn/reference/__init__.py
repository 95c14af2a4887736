"""Reference solutions: closed forms for the 1D and Kirsch problems, FEM for the rectangular plates."""
from .analytic import analytic_1d, analytic_1d_duals
from .fem import FEM_CODES, FemResult, RectMesh, fem_solve, solve_elastic, solve_heat
from .kirsch import kirsch_analytic, kirsch_duals

__all__ = [
    "FEM_CODES",
    "FemResult",
    "RectMesh",
    "analytic_1d",
    "analytic_1d_duals",
    "fem_solve",
    "kirsch_analytic",
    "kirsch_duals",
    "solve_elastic",
    "solve_heat",
]
