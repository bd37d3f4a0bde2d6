"""Benchmark presets, observables, convergence study, EDR and the wall
end-condition comparison."""
from ..observables import ObservableSeries, flowrate, mean_pressure
from ..fluid.boundary import inlet_pressure_pulse
from .bc_comparison import BCComparison, bc_comparison, relative_l2
from .configs import BENCHMARKS, benchmark_config, cca_boundary, default_waveform_path
from .convergence import ConvergenceReport, convergence_study, l2_errors, observed_order
from .edr import compute_edr, ellipse_edr, loop_areas

__all__ = [
    "BCComparison", "BENCHMARKS", "ConvergenceReport", "ObservableSeries",
    "bc_comparison", "benchmark_config", "cca_boundary", "compute_edr",
    "convergence_study", "default_waveform_path", "ellipse_edr", "flowrate",
    "inlet_pressure_pulse", "l2_errors", "loop_areas", "mean_pressure",
    "observed_order", "relative_l2",
]
