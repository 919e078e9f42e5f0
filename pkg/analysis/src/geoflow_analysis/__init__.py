"""Post-hoc analysis of solver run artifacts: symbolic oracles for the
rotating-wave frequency and the seven-dimensional cross product, and
plotting of diagnostics, convergence, continuation, and gauge tables.

These scripts never recompute PDE dynamics; they parse the CSV/JSON/binary
files the solver CLI writes and fit or plot them."""

from .dispersion import oracle_dispersion, spin_wave_residual
from .bundle import StudyBundle, plot_studies, study_summary

__version__ = "0.1.0"
