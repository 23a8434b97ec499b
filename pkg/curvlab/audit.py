"""
Auditorías de propiedades sobre soluciones numéricas: sándwich de barreras
(parabólico y elíptico), principio del máximo y calibración de la constante K.

Los chequeos nunca lanzan excepciones por un fallo: devuelven reportes con
`passed` y el testigo de la peor violación.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from curvlab.closedforms import psi, psi_lambda
from curvlab.constants import (
    ANALYSIS_START_FACTOR,
    K_HEADROOM,
    MAX_PRINCIPLE_TOL,
    SLACK_FACTOR,
    TUBE_FRACTION,
)
from curvlab.errors import DomainError

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
MAX_F_PRIME = 1.0 / (2.0 * SQRT_PI)
NORMAL_SAMPLES = 201
INTERFACE_POINTS = 16


def default_tube(shape):
    """Mitad del radio del tubo de validez (1 para el semiespacio)."""
    if math.isinf(shape.tube_radius):
        return 1.0
    return TUBE_FRACTION * shape.tube_radius


def calibrate_K(shape, cond, tube=None, headroom=K_HEADROOM):
    """
    K_cal = headroom * K1 con K1 = (4 sqrt(s+) sqrt(s-) / (sqrt(s+) + sqrt(s-))) max|Lap delta| max f'.

    Args:
        shape: geometría del catálogo
        cond: Conductivity
        tube: semiancho del tubo donde se toma el máximo (por defecto default_tube)
        headroom: factor de holgura (2 por defecto)
    """
    tube = default_tube(shape) if tube is None else tube
    if not headroom > 0:
        raise DomainError(f"headroom debe ser > 0, se recibió {headroom}")
    coeff = 4.0 * cond.sqrt_plus * cond.sqrt_minus / cond.sqrt_sum
    k1 = coeff * shape.max_abs_laplacian(tube) * MAX_F_PRIME
    logger.debug("K1=%.6g para %s (tubo %.3g)", k1, shape.describe(), tube)
    return headroom * k1


# Muestras para las barreras

@dataclass(frozen=True)
class BarrierSamples:
    """Valores u(x_i, t_i) con la holgura de discretización de cada muestra."""
    points: np.ndarray
    times: np.ndarray
    values: np.ndarray
    slack: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        slack = np.broadcast_to(np.asarray(self.slack, dtype=float), values.shape)
        if not (len(points) == len(times) == len(values)):
            raise DomainError("points, times y values deben tener la misma cantidad de muestras")
        if np.any(times <= 0):
            raise DomainError("Los tiempos de las muestras deben ser > 0")
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'slack', np.array(slack))


def samples_from_radial(solution, tube=None, t_min=None, slack_factor=SLACK_FACTOR):
    """
    Muestras en los nodos del tubo |r - R| <= tube y tiempos t >= 10 t0 de una
    solución parabólica radial; la holgura es slack_factor veces el error por
    duplicación de malla (cero si la solución no lo trae).
    """
    if solution.history is None:
        raise DomainError("La solución no guarda la historia en los nodos")
    ball = solution.shape
    tube = default_tube(ball) if tube is None else tube
    t_min = ANALYSIS_START_FACTOR * solution.time_grid.t0 if t_min is None else t_min
    nodes = solution.mesh.nodes
    node_mask = np.abs(nodes - ball.radius) <= tube
    time_mask = solution.times >= t_min * (1 - 1e-12)
    T, R = np.meshgrid(solution.times[time_mask], nodes[node_mask], indexing='ij')
    values = solution.history[np.ix_(time_mask, node_mask)]
    points = np.zeros((R.size, ball.dim))
    points[:, 0] = R.ravel()
    if solution.error_estimate is not None:
        per_time = slack_factor * solution.error_estimate.field_error[time_mask]
        slack = np.repeat(per_time, node_mask.sum())
    else:
        slack = 0.0
    return BarrierSamples(points=points, times=T.ravel(), values=values.ravel(), slack=slack)


def samples_from_traces(traces, t_min=None, slack=0.0):
    """Muestras en los puntos de las trazas (interfaz) para t >= t_min (10 t0 por defecto)."""
    points, times, values = [], [], []
    for trace in traces:
        start = ANALYSIS_START_FACTOR * trace.times[0] if t_min is None else t_min
        keep = trace.times >= start * (1 - 1e-12)
        points.append(np.tile(trace.point, (int(keep.sum()), 1)))
        times.append(trace.times[keep])
        values.append(trace.values[keep])
    return BarrierSamples(points=np.concatenate(points), times=np.concatenate(times),
                          values=np.concatenate(values), slack=slack)


def normal_line_points(shape, tube=None, n_interface=INTERFACE_POINTS, n_normal=NORMAL_SAMPLES):
    """Puntos q - s nu(q), |s| <= tube, sobre normales por puntos de la interfaz."""
    tube = default_tube(shape) if tube is None else tube
    q = np.atleast_2d(shape.interface_samples(n_interface))
    nu = np.atleast_2d(shape.outward_normal(q))
    s = np.linspace(-tube, tube, n_normal)
    return (q[:, None, :] - s[None, :, None] * nu[:, None, :]).reshape(-1, q.shape[1])


# Reportes

@dataclass(frozen=True)
class BarrierReport:
    kind: str
    K: float
    max_violation: float
    slack: float
    witness: tuple
    witness_parameter: float
    n_samples: int
    bound: float = None

    @property
    def passed(self):
        return bool(self.max_violation <= 0.0)

    def to_dict(self):
        return {
            'kind': self.kind,
            'K': self.K,
            'max_violation': self.max_violation,
            'slack': self.slack,
            'witness': '(' + ','.join(f"{c:.17g}" for c in self.witness) + ')',
            'witness_parameter': self.witness_parameter,
            'n_samples': self.n_samples,
            'passed': self.passed,
        }

    def to_frame(self):
        return pd.DataFrame([self.to_dict()])

    def summary_line(self):
        status = 'PASS' if self.passed else 'FAIL'
        param = 't' if self.kind == 'parabolic' else 'lambda'
        return (f"barrier[{self.kind}] K={self.K:.6g} max_violation={self.max_violation:.3e} "
                f"witness={self.to_dict()['witness']} {param}={self.witness_parameter:.6g} {status}")


def _worst(lower, upper, slack):
    violation = np.maximum(lower, upper) - slack
    k = int(np.argmax(violation))
    return k, float(violation[k])


def barrier_check_parabolic(samples, shape, cond, K):
    """
    max sobre las muestras de (psi - K sqrt(t) - u, u - psi - K sqrt(t)) menos
    la holgura; pasa si es <= 0.
    """
    if K < 0:
        raise DomainError(f"K debe ser >= 0, se recibió {K}")
    barrier = np.empty_like(samples.values)
    for t in np.unique(samples.times):
        idx = samples.times == t
        barrier[idx] = psi(samples.points[idx], float(t), shape, cond)
    width = K * np.sqrt(samples.times)
    lower = barrier - width - samples.values
    upper = samples.values - barrier - width
    k, violation = _worst(lower, upper, samples.slack)
    report = BarrierReport(kind='parabolic', K=float(K), max_violation=violation,
                           slack=float(samples.slack[k]), witness=tuple(samples.points[k].tolist()),
                           witness_parameter=float(samples.times[k]), n_samples=len(samples.values))
    logger.info(report.summary_line())
    return report


def barrier_check_elliptic(field, shape, cond, K, lam=None, points=None, slack=0.0):
    """
    Psi_lambda - sqrt(pi) K / (2 sqrt(lambda)) <= U_lambda <= Psi_lambda + sqrt(pi) K / (2 sqrt(lambda))
    en puntos del tubo (por defecto sobre normales por la interfaz).
    """
    if K < 0:
        raise DomainError(f"K debe ser >= 0, se recibió {K}")
    lam = float(field.lam if lam is None else lam)
    points = normal_line_points(shape) if points is None else np.atleast_2d(points)
    values = np.asarray(field.evaluate(points), dtype=float)
    barrier = np.asarray(psi_lambda(points, lam, shape, cond), dtype=float)
    bound = SQRT_PI * K / (2.0 * math.sqrt(lam))
    slack_arr = np.broadcast_to(np.asarray(slack, dtype=float), values.shape)
    k, violation = _worst(barrier - bound - values, values - barrier - bound, slack_arr)
    report = BarrierReport(kind='elliptic', K=float(K), max_violation=violation,
                           slack=float(slack_arr[k]), witness=tuple(points[k].tolist()),
                           witness_parameter=lam, n_samples=len(values), bound=bound)
    logger.info(report.summary_line())
    return report


@dataclass(frozen=True)
class MaximumPrincipleReport:
    min_value: float
    max_value: float
    argmin: tuple
    argmax: tuple
    tolerance: float
    n_samples: int

    @property
    def passed(self):
        return bool(self.min_value >= -self.tolerance and self.max_value <= 1.0 + self.tolerance)

    @property
    def strict(self):
        """Valores estrictamente en (0, 1)."""
        return bool(self.min_value > 0.0 and self.max_value < 1.0)

    def to_dict(self):
        return {
            'min': self.min_value,
            'max': self.max_value,
            'argmin': '(' + ','.join(f"{c:.17g}" for c in self.argmin) + ')',
            'argmax': '(' + ','.join(f"{c:.17g}" for c in self.argmax) + ')',
            'tolerance': self.tolerance,
            'n_samples': self.n_samples,
            'passed': self.passed,
        }

    def to_frame(self):
        return pd.DataFrame([self.to_dict()])

    def summary_line(self):
        status = 'PASS' if self.passed else 'FAIL'
        d = self.to_dict()
        return (f"max_principle min={self.min_value:.6g} at {d['argmin']} "
                f"max={self.max_value:.6g} at {d['argmax']} tol={self.tolerance:.1e} {status}")


def maximum_principle_check(solution, tolerance=MAX_PRINCIPLE_TOL):
    """
    min y max de todas las muestras de un campo o traza; pasa si están en
    [0, 1] salvo la tolerancia max(tolerance, tolerancia propia del solver).
    Acepta objetos con sample_values()/sample_locations() o arreglos de valores.
    """
    if hasattr(solution, 'sample_values'):
        values = np.asarray(solution.sample_values(), dtype=float).ravel()
        locations = np.atleast_2d(np.asarray(solution.sample_locations(), dtype=float))
        tol = max(tolerance, float(getattr(solution, 'tolerance', 0.0)))
    else:
        values = np.asarray(solution, dtype=float).ravel()
        locations = np.arange(len(values), dtype=float)[:, None]
        tol = tolerance
    if values.size == 0:
        raise DomainError("No hay muestras para verificar")
    if locations.shape[0] != values.size:
        locations = locations.reshape(values.size, -1)
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        logger.error("Valor no finito en %s", locations[bad])
        values = np.where(np.isfinite(values), values, np.inf)
    i_min, i_max = int(np.argmin(values)), int(np.argmax(values))
    report = MaximumPrincipleReport(
        min_value=float(values[i_min]),
        max_value=float(values[i_max]),
        argmin=tuple(locations[i_min].tolist()),
        argmax=tuple(locations[i_max].tolist()),
        tolerance=tol,
        n_samples=int(values.size),
    )
    if not report.passed:
        logger.warning(report.summary_line())
    return report
