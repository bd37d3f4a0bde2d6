"""Benchmark presets."""
from importlib import resources

from ..driver import SimulationConfig
from ..errors import ConfigError
from ..fluid import MMHG, BoundaryData, FluidParams, load_waveform
from ..shell import FormaggiaParams, WallParams

BENCHMARKS = ("example1", "example1b", "example2", "cca")

# pressure-pulse benchmarks
P_MAX = 2.0e4
T_MAX = 0.005

# carotid segment; the length is not part of the published parameter set
CCA_LENGTH = 5.0
CCA_MEAN_DROP_PER_CM = 0.0673 * MMHG
CCA_C0 = 1.7022e6
CCA_DELAY = 0.0


def _pulse_wall():
    return WallParams(E=0.75e6, sigma=0.5, C_v=30.0, D_v=15.0, rho_s=1.1, h=0.1, R=0.5)


def default_waveform_path():
    return str(resources.files("koiterfsi.bench") / "data" / "cca_waveform.csv")


def cca_boundary(path=None, length=CCA_LENGTH, delay=CCA_DELAY):
    """Periodic carotid pressure data: sampled inlet waveform, outlet equal
    to the delayed inlet signal lowered by the mean drop over ``length``."""
    path = path or default_waveform_path()
    wf = load_waveform(path)
    return BoundaryData(kind="waveform", waveform=wf, waveform_path=str(path),
                        delay=delay, mean_drop=CCA_MEAN_DROP_PER_CM * length)


def benchmark_config(benchmark_id, waveform=None):
    """Fully populated :class:`SimulationConfig` for a named benchmark.

    Raises
    ------
    ConfigError
        If ``benchmark_id`` is not one of :data:`BENCHMARKS`.
    """
    fluid = FluidParams(rho_f=1.0, mu=0.035)
    pulse = BoundaryData(kind="pulse", p_max=P_MAX, t_max=T_MAX)
    if benchmark_id in ("example1", "example1b"):
        wall = _pulse_wall()
        string = FormaggiaParams(k=1.0, G=wall.shear_modulus, gamma=0.01)
        radial = benchmark_id == "example1"
        return SimulationConfig(
            wall=wall, fluid=fluid, L=6.0, dt=1e-4, t_final=0.012, beta=1.0,
            bc_kind="absorbing" if radial else "clamped", n_z=31, n_r=11,
            boundary=pulse, model="formaggia", formaggia=string,
            radial_only=radial, benchmark=benchmark_id)
    if benchmark_id == "example2":
        return SimulationConfig(
            wall=_pulse_wall(), fluid=fluid, L=6.0, dt=1e-4, t_final=0.012, beta=1.0,
            bc_kind="clamped", n_z=61, n_r=21, boundary=pulse, model="koiter",
            benchmark=benchmark_id)
    if benchmark_id == "cca":
        wall = WallParams(E=2.0e6, sigma=0.5, C_v=3.0e4, D_v=1.5e4, rho_s=1.055,
                          h=0.07, R=0.3)
        bd = cca_boundary(waveform)
        return SimulationConfig(
            wall=wall, fluid=FluidParams(rho_f=1.055, mu=0.04), L=CCA_LENGTH,
            dt=1e-4, t_final=round(bd.waveform.period, 12), beta=1.0,
            bc_kind="clamped", n_z=51, n_r=7, boundary=bd, model="koiter",
            C0_override=CCA_C0, benchmark=benchmark_id)
    raise ConfigError(f"unknown benchmark {benchmark_id!r}; expected one of "
                      f"{', '.join(BENCHMARKS)}", key="benchmark")
