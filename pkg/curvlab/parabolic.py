"""
Solvers en tiempo del problema de Cauchy u_t = div(sigma grad u), u(., 0) = chi_Omega.

Integración: unos pocos pasos implícitos de primer orden sobre [0, t0] para
amortiguar las oscilaciones del dato discontinuo y luego trapecio implícito
(Crank-Nicolson) sobre la malla temporal geométrica t_k = t0 ratio^k.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.interpolate import RegularGridInterpolator

from curvlab.constants import (
    PARABOLIC_SPACING_FRACTION,
    PARABOLIC_SPACING_WARN,
    STARTUP_STEPS,
    T0_FRACTION,
    TIME_RATIO,
    TMAX_FRACTION,
)
from curvlab.elliptic import CartesianGrid2D, RadialGrid, assemble_cartesian, assemble_radial
from curvlab.errors import DomainError, NumericError
from curvlab.geometry import Ball
from curvlab.utils import debug_log_function

logger = logging.getLogger(__name__)

PARABOLIC_STRETCH = 1.02
PARABOLIC_DECAY_LENGTHS = 8.0
PARABOLIC_CELLS = 256
# Crank-Nicolson no preserva positividad de forma exacta con pasos grandes;
# los pasos implícitos iniciales sí (valores en [0, 1] a MAX_PRINCIPLE_TOL)
PARABOLIC_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t_max: float
    ratio: float = TIME_RATIO
    startup_steps: int = STARTUP_STEPS

    def __post_init__(self):
        if not (self.t0 > 0 and self.t_max > self.t0):
            raise DomainError(f"Se requiere 0 < t0 < t_max (t0={self.t0}, t_max={self.t_max})")
        if not self.ratio > 1:
            raise DomainError(f"La razón temporal debe ser > 1, se recibió {self.ratio}")
        if int(self.startup_steps) != self.startup_steps or self.startup_steps < 0:
            raise DomainError(f"startup_steps debe ser un entero >= 0, se recibió {self.startup_steps}")

    @classmethod
    def default_for(cls, shape, cond, ratio=TIME_RATIO, startup_steps=STARTUP_STEPS):
        """t0 = 1e-4 L^2 / max sigma, t_max = L^2 / max sigma con L la escala de la geometría."""
        L2 = shape.length_scale ** 2
        return cls(t0=T0_FRACTION * L2 / cond.M, t_max=TMAX_FRACTION * L2 / cond.M,
                   ratio=ratio, startup_steps=startup_steps)

    @property
    def decades(self):
        return math.log10(self.t_max / self.t0)

    def times(self):
        steps = int(math.ceil(math.log(self.t_max / self.t0) / math.log(self.ratio) - 1e-9))
        return self.t0 * self.ratio ** np.arange(steps + 1)

    def coarsened(self):
        return TimeGrid(self.t0, self.t_max, self.ratio ** 2, self.startup_steps)

    def refined(self):
        return TimeGrid(self.t0, self.t_max, math.sqrt(self.ratio), self.startup_steps)

    def describe(self):
        return f"t0={self.t0:.3g},t_max={self.t_max:.3g},ratio={self.ratio:g}"


@dataclass(frozen=True)
class TimeTrace:
    """Valores u(x0, t_k) en un punto fijo sobre la malla temporal."""
    point: tuple
    times: np.ndarray
    values: np.ndarray
    cond: object = None
    shape: str = ''
    mesh: str = ''

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise DomainError("times y values deben ser vectores de igual longitud")
        if np.any(times <= 0) or np.any(np.diff(times) <= 0):
            raise DomainError("Los tiempos deben ser positivos y estrictamente crecientes")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'point', tuple(float(p) for p in np.atleast_1d(self.point)))

    def header(self):
        head = {'point': '(' + ','.join(f"{p:.17g}" for p in self.point) + ')'}
        if self.cond is not None:
            head['sigma_plus'] = self.cond.sigma_plus
            head['sigma_minus'] = self.cond.sigma_minus
        if self.shape:
            head['shape'] = self.shape
        return head

    def to_frame(self):
        return pd.DataFrame({'t': self.times, 'u': self.values})

    def sample_values(self):
        return self.values

    def sample_locations(self):
        return self.times[:, None]

    tolerance = PARABOLIC_TOLERANCE


@dataclass
class ErrorEstimate:
    """Diferencia entre la solución fina y la de malla y paso duplicados, por tiempo."""
    times: np.ndarray
    trace_error: np.ndarray
    field_error: np.ndarray


@dataclass
class ParabolicSolution:
    shape: object
    cond: object
    mesh: object
    time_grid: TimeGrid
    times: np.ndarray
    traces: list
    heat_content: np.ndarray
    history: np.ndarray = None
    warnings: list = field(default_factory=list)
    error_estimate: ErrorEstimate = None
    tolerance: float = PARABOLIC_TOLERANCE

    @property
    def trace(self):
        return self.traces[0]

    def sample_values(self):
        if self.history is not None and isinstance(self.mesh, RadialGrid):
            return self.history.ravel()
        return np.concatenate([tr.values for tr in self.traces])

    def sample_locations(self):
        if self.history is not None and isinstance(self.mesh, RadialGrid):
            T, R = np.meshgrid(self.times, self.mesh.nodes, indexing='ij')
            return np.column_stack([R.ravel(), T.ravel()])
        return np.concatenate([np.column_stack([np.tile(tr.point, (len(tr.times), 1)), tr.times])
                               for tr in self.traces])


def parabolic_mesh(ball, cond, time_grid, fraction=PARABOLIC_SPACING_FRACTION, stretch=PARABOLIC_STRETCH,
                   decay_lengths=PARABOLIC_DECAY_LENGTHS):
    """Malla radial que resuelve la capa sqrt(sigma t0) y trunca a 8 sqrt(sigma_- t_max)."""
    h_min = fraction * math.sqrt(cond.mu * time_grid.t0)
    r_max = ball.radius + decay_lengths * math.sqrt(cond.sigma_minus * time_grid.t_max)
    return RadialGrid.build(ball.radius, h_min, r_max, stretch)


def _march(op, time_grid, record):
    """Avanza M u' = -S u y llama record(k, t, u) en cada tiempo de la malla."""
    times = time_grid.times()
    u = op.initial_state()
    t0 = time_grid.t0
    if time_grid.startup_steps > 0:
        dt = t0 / time_grid.startup_steps
        for _ in range(time_grid.startup_steps):
            u = op.solve_shifted(1.0, dt, op.mass * u, x0=u)
    else:
        u = op.solve_shifted(1.0, 0.5 * t0, op.mass * u - 0.5 * t0 * op.apply(u), x0=u)
    record(0, times[0], u)
    for k in range(1, len(times)):
        dt = times[k] - times[k - 1]
        rhs = op.mass * u - 0.5 * dt * op.apply(u)
        u = op.solve_shifted(1.0, 0.5 * dt, rhs, x0=u)
        if not np.all(np.isfinite(u)):
            raise NumericError(f"Estado no finito en t={times[k]:.3g}")
        record(k, times[k], u)
    return times


def _check_heat(heat, warnings):
    growth = np.max(np.diff(heat)) if len(heat) > 1 else 0.0
    if growth > 1e-9 * max(abs(heat[0]), 1e-300):
        msg = f"El contenido de calor aumentó en {growth:.3e} (esperado no creciente)"
        logger.warning(msg)
        warnings.append(msg)


def _check_resolution(spacing, cond, time_grid, warnings):
    limit = PARABOLIC_SPACING_WARN * math.sqrt(cond.mu * time_grid.t0)
    if spacing > limit:
        msg = (f"Malla gruesa para t0: espaciado {spacing:.3g} > "
               f"{PARABOLIC_SPACING_WARN} sqrt(sigma t0) = {limit:.3g}")
        logger.warning(msg)
        warnings.append(msg)


def _run_radial(ball, cond, mesh, time_grid):
    op = assemble_radial(ball, cond, mesh)
    n_times = len(time_grid.times())
    history = np.zeros((n_times, len(mesh.nodes)))
    heat = np.zeros(n_times)

    def record(k, t, u):
        history[k, :-1] = u
        heat[k] = op.heat_content(u)

    times = _march(op, time_grid, record)
    return times, history, heat


@debug_log_function
def solve_radial_parabolic(ball, cond, mesh=None, time_grid=None, estimate_error=False):
    """
    Solución radial en la bola; la traza se toma en r = R.

    Args:
        ball: Ball (cualquier dimensión N >= 2)
        cond: Conductivity
        mesh: RadialGrid ajustada a la interfaz (por defecto parabolic_mesh)
        time_grid: TimeGrid (por defecto TimeGrid.default_for)
        estimate_error: repetir con malla y paso duplicados para estimar el error

    Returns:
        ParabolicSolution con la historia completa en los nodos
    """
    if not isinstance(ball, Ball):
        raise DomainError("El solver parabólico radial requiere una bola")
    time_grid = time_grid or TimeGrid.default_for(ball, cond)
    mesh = mesh or parabolic_mesh(ball, cond, time_grid)
    warnings = []
    _check_resolution(mesh.finest_spacing, cond, time_grid, warnings)

    times, history, heat = _run_radial(ball, cond, mesh, time_grid)
    _check_heat(heat, warnings)
    point = np.zeros(ball.dim)
    point[0] = ball.radius
    trace = TimeTrace(point=tuple(point), times=times, values=history[:, mesh.interface_index].copy(),
                      cond=cond, shape=ball.describe(), mesh=mesh.describe())
    solution = ParabolicSolution(shape=ball, cond=cond, mesh=mesh, time_grid=time_grid, times=times,
                                 traces=[trace], heat_content=heat, history=history, warnings=warnings)
    if estimate_error:
        solution.error_estimate = _halving_estimate(ball, cond, mesh, time_grid, times, history)
    logger.info("Solve parabólico radial %s (%s): %d pasos", mesh.describe(), time_grid.describe(), len(times))
    return solution


def _halving_estimate(ball, cond, mesh, time_grid, times, history):
    coarse_mesh = mesh.coarsened()
    coarse_grid = time_grid.coarsened()
    coarse_times, coarse_history, _ = _run_radial(ball, cond, coarse_mesh, coarse_grid)
    keep = mesh.coarse_indices()
    n_common = min(len(coarse_times), (len(times) + 1) // 2)
    fine = history[0:2 * n_common:2][:, keep]
    coarse = coarse_history[:n_common]
    trace_err = np.abs(fine[:, coarse_mesh.interface_index] - coarse[:, coarse_mesh.interface_index])
    field_err = np.max(np.abs(fine - coarse), axis=1)
    common_times = times[0:2 * n_common:2]
    logt = np.log(times)
    return ErrorEstimate(
        times=times,
        trace_error=np.interp(logt, np.log(common_times), trace_err),
        field_error=np.interp(logt, np.log(common_times), field_err),
    )


def estimate_radial_error(ball, cond, mesh=None, time_grid=None):
    """Estimación del error por duplicación de malla y paso (cota de holgura de las barreras)."""
    return solve_radial_parabolic(ball, cond, mesh, time_grid, estimate_error=True).error_estimate


@debug_log_function
def solve_cartesian_parabolic_2d(shape, cond, grid=None, time_grid=None, points=None, n_points=16,
                                 keep_snapshots=False):
    """
    Solución 2D en volúmenes finitos cartesianos; trazas en puntos de la
    interfaz por interpolación bilineal de los valores de celda.
    """
    time_grid = time_grid or TimeGrid.default_for(shape, cond)
    if grid is None:
        margin = PARABOLIC_DECAY_LENGTHS * math.sqrt(cond.sigma_minus * time_grid.t_max)
        grid = CartesianGrid2D.for_shape(shape, cond, margin=margin, cells=PARABOLIC_CELLS)
    points = shape.interface_samples(n_points) if points is None else np.atleast_2d(points)
    warnings = []
    _check_resolution(grid.h, cond, time_grid, warnings)

    op = assemble_cartesian(shape, cond, grid, method='cg')
    n_times = len(time_grid.times())
    trace_values = np.zeros((n_times, len(points)))
    heat = np.zeros(n_times)
    snapshots = np.zeros((n_times, op.size)) if keep_snapshots else None

    def record(k, t, u):
        interp = RegularGridInterpolator((grid.xc, grid.yc), u.reshape(grid.nx, grid.ny),
                                         bounds_error=False, fill_value=None)
        trace_values[k] = interp(points)
        heat[k] = op.heat_content(u)
        if snapshots is not None:
            snapshots[k] = u

    times = _march(op, time_grid, record)
    _check_heat(heat, warnings)
    traces = [TimeTrace(point=tuple(p), times=times, values=trace_values[:, j], cond=cond,
                        shape=shape.describe(), mesh=grid.describe())
              for j, p in enumerate(points)]
    logger.info("Solve parabólico 2D %s: %d pasos, %d trazas", grid.describe(), len(times), len(traces))
    return ParabolicSolution(shape=shape, cond=cond, mesh=grid, time_grid=time_grid, times=times,
                             traces=traces, heat_content=heat, history=snapshots, warnings=warnings)
