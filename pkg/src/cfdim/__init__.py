"""cfdim: a numerical laboratory for continued-fraction Diophantine
approximation, run-length statistics, and Hausdorff-dimension solvers."""

__version__ = "0.1.0"
