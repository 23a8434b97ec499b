"""
Maquinaria de límites: los dos funcionales de curvatura (ruta en lambda y ruta
en tiempo), extrapolación de Richardson, transformadas de Laplace-Stieltjes
numéricas, el oráculo de Karamata y el perfil de blow-up S_lambda.

Convención de signo: `curvature_term` es el Laplaciano de la distancia con
signo sobre la interfaz, es decir -(N-1) veces geometry.mean_curvature.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import special

from curvlab.closedforms import formula_constants, interface_constant, phi_profile, s_star
from curvlab.constants import (
    ANALYSIS_START_FACTOR,
    BLOWUP_SAMPLES,
    BLOWUP_WINDOW,
    LAPLACE_HEAD_LIMIT,
    LAPLACE_TAIL_LIMIT,
    MEASURE_LEBESGUE,
    MEASURE_SQRT_T,
    MIN_ANALYSIS_DECADES,
    RICHARDSON_LEVELS,
)
from curvlab.errors import DomainError
from curvlab.geometry import curvature_term as geometry_curvature_term
from curvlab.utils import debug_log_function, require_finite

logger = logging.getLogger(__name__)

ROUTE_LAMBDA = 'lambda'
ROUTE_TIME = 'time'
SUBSEQUENCE_FACTOR = 4.0
SUBSEQUENCE_COUNT = 5
KARAMATA_POINTS = 9


# Extrapolación de Richardson

@dataclass(frozen=True)
class ExtrapolationResult:
    """
    Límite extrapolado de una sucesión value(h) -> L cuando h -> 0.

    parameters y values guardan la sucesión cruda tal cual se recibió;
    extrapolants[i] es el mejor extrapolante disponible con las primeras i+1
    entradas.
    """
    limit_estimate: float
    error_estimate: float
    parameters: np.ndarray
    values: np.ndarray
    extrapolants: np.ndarray
    exponent: float
    levels: int
    model_consistent: bool = True

    @property
    def model(self):
        flag = '' if self.model_consistent else ',model-inconsistent'
        return f"L+c*h^{self.exponent:g}(levels={self.levels}{flag})"

    def to_frame(self):
        errors = np.abs(self.extrapolants - self.limit_estimate)
        errors[-1] = self.error_estimate
        return pd.DataFrame({
            'parameter': self.parameters,
            'value': self.values,
            'extrapolant': self.extrapolants,
            'error': errors,
        })

    def footer(self, expected=None):
        items = {'limit': self.limit_estimate, 'error': self.error_estimate, 'model': self.model}
        if expected is not None:
            items['expected'] = expected
            items['rel_err'] = relative_error(self.limit_estimate, expected)
        return items


def relative_error(value, expected):
    if expected == 0:
        return abs(value)
    return abs(value - expected) / abs(expected)


def _monotone(values, scale):
    d = np.diff(values)
    tiny = 1e-14 * max(scale, 1e-300)
    d = np.where(np.abs(d) <= tiny, 0.0, d)
    return bool(np.all(d >= 0) or np.all(d <= 0))


def richardson_extrapolate(seq, exponent=1.0, levels=RICHARDSON_LEVELS):
    """
    Extrapolación polinomial en x = h^exponent hacia x = 0 (tabla de Neville
    con correcciones h^p, h^2p, ...).

    Args:
        seq: pares (h, value) con h > 0 estrictamente decreciente, al menos 3
        exponent: exponente p de la primera corrección
        levels: número de correcciones eliminadas

    Returns:
        ExtrapolationResult; si la cola cruda no es monótona o las diferencias
        entre extrapolantes crecen, se marca model_consistent=False
    """
    pairs = [(float(h), float(v)) for h, v in seq]
    if len(pairs) < 3:
        raise DomainError(f"La extrapolación requiere al menos 3 pares, se recibieron {len(pairs)}")
    h = require_finite('h', [p[0] for p in pairs])
    values = require_finite('values', [p[1] for p in pairs])
    if np.any(h <= 0) or np.any(np.diff(h) >= 0):
        raise DomainError("Los parámetros h deben ser positivos y estrictamente decrecientes")
    if not exponent > 0:
        raise DomainError(f"El exponente debe ser > 0, se recibió {exponent}")
    if int(levels) != levels or levels < 1:
        raise DomainError(f"levels debe ser un entero >= 1, se recibió {levels}")

    n = len(values)
    levels = min(int(levels), n - 1)
    x = h ** exponent
    table = np.full((n, levels + 1), np.nan)
    table[:, 0] = values
    for i in range(1, n):
        for j in range(1, min(i, levels) + 1):
            diff = table[i, j - 1] - table[i - 1, j - 1]
            table[i, j] = table[i, j - 1] + diff * x[i] / (x[i - j] - x[i])
    extrapolants = np.array([table[i, min(i, levels)] for i in range(n)])

    final = table[n - 1, levels]
    error = abs(final - table[n - 1, levels - 1])
    if not np.isnan(table[n - 2, levels]):
        error = max(error, abs(final - table[n - 2, levels]))

    scale = float(np.max(np.abs(values)))
    consistent = _monotone(values[-3:], scale)
    column = table[levels:, levels]
    if len(column) >= 3:
        d = np.abs(np.diff(column))
        if d[-1] > d[-2] + 1e-14 * max(scale, 1e-300):
            consistent = False
    if not consistent:
        logger.warning("Sucesión inconsistente con el modelo L + c h^%g: %s", exponent, values[-3:])
    return ExtrapolationResult(
        limit_estimate=float(final),
        error_estimate=float(error),
        parameters=h,
        values=values,
        extrapolants=extrapolants,
        exponent=float(exponent),
        levels=levels,
        model_consistent=consistent,
    )


def geometric_subsequence(parameters, factor=SUBSEQUENCE_FACTOR, count=SUBSEQUENCE_COUNT):
    """
    Índices de una subsucesión casi geométrica de razón `factor` que empieza
    en el menor parámetro y sube; devuelve a lo sumo `count` índices ordenados.
    """
    p = np.asarray(parameters, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise DomainError("Se requiere un vector de parámetros no vacío")
    if not factor > 1:
        raise DomainError(f"La razón debe ser > 1, se recibió {factor}")
    logp = np.log(p)
    chosen = []
    target = logp.min()
    while target <= logp.max() + 1e-12 and len(chosen) < count:
        idx = int(np.argmin(np.abs(logp - target)))
        if idx not in chosen:
            chosen.append(idx)
        target += math.log(factor)
    return sorted(chosen)


# Funcionales de los teoremas

@dataclass(frozen=True)
class FunctionalSequence:
    """Sucesión (parámetro, valor) de un funcional de curvatura."""
    route: str
    parameters: np.ndarray
    values: np.ndarray
    head_uncertainty: np.ndarray = None
    head_constant: float = None

    def pairs(self):
        return list(zip(self.parameters.tolist(), self.values.tolist()))

    def step_sizes(self):
        """h = lambda^{-1/2} en la ruta elíptica, h = sqrt(t) en la temporal."""
        if self.route == ROUTE_LAMBDA:
            return self.parameters ** -0.5
        return np.sqrt(self.parameters)

    def extrapolate(self, exponent=1.0, levels=RICHARDSON_LEVELS, factor=None, count=None):
        h = self.step_sizes()
        idx = np.arange(len(h))
        if factor is not None:
            idx = np.array(geometric_subsequence(h, factor=math.sqrt(factor), count=count or len(h)))
        order = idx[np.argsort(-h[idx])]
        return richardson_extrapolate(zip(h[order], self.values[order]), exponent=exponent, levels=levels)

    @property
    def max_head_uncertainty(self):
        if self.head_uncertainty is None:
            return 0.0
        return float(np.max(self.head_uncertainty))

    def to_frame(self):
        frame = pd.DataFrame({self.route: self.parameters, 'value': self.values})
        if self.head_uncertainty is not None:
            frame['head_uncertainty'] = self.head_uncertainty
        return frame


def lambda_functional(u_values, cond):
    """
    sqrt(lambda) (U_lambda(x) - c_inf) para cada par (lambda, U_lambda(x)).

    La sucesión de lambda debe ser creciente y tener al menos 3 entradas.
    """
    pairs = [(float(lam), float(u)) for lam, u in u_values]
    if len(pairs) < 3:
        raise DomainError(f"Se requieren al menos 3 valores de lambda, se recibieron {len(pairs)}")
    lams = require_finite('lambda', [p[0] for p in pairs])
    us = require_finite('U_lambda', [p[1] for p in pairs])
    if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
        raise DomainError("La sucesión de lambda debe ser positiva y estrictamente creciente")
    values = np.sqrt(lams) * (us - interface_constant(cond))
    return FunctionalSequence(route=ROUTE_LAMBDA, parameters=lams, values=values)


def _trace_arrays(trace):
    t = np.asarray(trace.times, dtype=float)
    u = np.asarray(trace.values, dtype=float)
    if len(t) < 2:
        raise DomainError("La traza debe tener al menos dos tiempos")
    return t, u


def _fit_sqrt(t, g, intercept=False):
    """Mínimos cuadrados de g ~ C sqrt(t) (o c0 + C sqrt(t))."""
    w = np.sqrt(t)
    if intercept:
        design = np.column_stack([np.ones_like(w), w])
        coeffs, *_ = np.linalg.lstsq(design, g, rcond=None)
        return float(coeffs[0]), float(coeffs[1])
    return float(np.dot(w, g) / np.dot(w, w))


def _sqrt_linear_integrals(t, g):
    """Integrales de g sobre cada intervalo con g lineal en sqrt(s)."""
    w = np.sqrt(t)
    w1, w2 = w[:-1], w[1:]
    g1, g2 = g[:-1], g[1:]
    beta = (g2 - g1) / (w2 - w1)
    alpha = g1 - beta * w1
    return alpha * (w2 ** 2 - w1 ** 2) + (2.0 / 3.0) * beta * (w2 ** 3 - w1 ** 3)


@dataclass(frozen=True)
class CumulativeExcess:
    """int_0^t (u - c_inf) ds en los tiempos de la traza, con la cabeza [0, t0] modelada."""
    times: np.ndarray
    cumulative: np.ndarray
    head: float
    head_uncertainty: float
    head_constant: float


def cumulative_excess(trace, cond, window_factor=ANALYSIS_START_FACTOR):
    """
    Integral acumulada del exceso u - c_inf. Sobre [0, t0] se usa el modelo
    u - c_inf = C sqrt(s), con C ajustado en [t0, window_factor t0]; la
    incertidumbre de la cabeza es la diferencia entre los ajustes de cada mitad
    de esa ventana.
    """
    t, u = _trace_arrays(trace)
    excess = u - interface_constant(cond)
    t0 = t[0]
    window = t <= window_factor * t0 * (1 + 1e-12)
    if np.count_nonzero(window) < 4:
        raise DomainError(
            f"La ventana de ajuste de la cabeza [t0, {window_factor:g} t0] necesita al menos 4 tiempos"
        )
    tw, gw = t[window], excess[window]
    C = _fit_sqrt(tw, gw)
    half = len(tw) // 2
    C_low = _fit_sqrt(tw[:half], gw[:half])
    C_high = _fit_sqrt(tw[half:], gw[half:])
    head = (2.0 / 3.0) * C * t0 ** 1.5
    head_uncertainty = (2.0 / 3.0) * abs(C_low - C_high) * t0 ** 1.5
    body = np.concatenate([[0.0], np.cumsum(_sqrt_linear_integrals(t, excess))])
    return CumulativeExcess(times=t, cumulative=head + body, head=head,
                            head_uncertainty=head_uncertainty, head_constant=C)


def time_functional(trace, cond, start_factor=ANALYSIS_START_FACTOR, min_decades=MIN_ANALYSIS_DECADES):
    """
    t^{-3/2} int_0^t (u(x, s) - c_inf) ds en cada tiempo t >= start_factor t0.

    Args:
        trace: TimeTrace en un punto de la interfaz
        cond: Conductivity
        start_factor: primer tiempo reportado en múltiplos de t0
        min_decades: décadas mínimas de la ventana de análisis

    Returns:
        FunctionalSequence (ruta temporal) con la incertidumbre de la cabeza por tiempo
    """
    t, _ = _trace_arrays(trace)
    start = start_factor * t[0]
    decades = math.log10(t[-1] / start)
    if decades < min_decades:
        raise DomainError(
            f"La ventana de análisis cubre {decades:.2f} décadas; se requieren al menos {min_decades:g} "
            f"(t_max >= {start * 10 ** min_decades:.3g})"
        )
    excess = cumulative_excess(trace, cond, window_factor=start_factor)
    keep = t >= start * (1 - 1e-12)
    scale = t[keep] ** -1.5
    return FunctionalSequence(
        route=ROUTE_TIME,
        parameters=t[keep],
        values=excess.cumulative[keep] * scale,
        head_uncertainty=excess.head_uncertainty * scale,
        head_constant=excess.head_constant,
    )


def expected_lambda_limit(cond, curvature_term):
    """Lado derecho de la fórmula elíptica: sqrt(s+ s-)/(2(sqrt s+ + sqrt s-)) (N-1)H."""
    return formula_constants(cond).elliptic_coeff * curvature_term


def expected_time_limit(cond, curvature_term):
    """Lado derecho de la fórmula parabólica: 2 sqrt(s+ s-)/(3 sqrt(pi)(sqrt s+ + sqrt s-)) (N-1)H."""
    return formula_constants(cond).parabolic_coeff * curvature_term


def extract_curvature(limit, cond, dim, route=ROUTE_LAMBDA):
    """
    Invierte la fórmula del límite: devuelve la curvatura media en la
    convención de geometry.mean_curvature (positiva en dominios convexos).
    """
    constants = formula_constants(cond)
    if route == ROUTE_LAMBDA:
        coeff = constants.elliptic_coeff
    elif route == ROUTE_TIME:
        coeff = constants.parabolic_coeff
    else:
        raise DomainError(f"Ruta desconocida: {route!r}")
    limit = np.asarray(limit, dtype=float)
    curvature = -limit / (coeff * (dim - 1))
    return float(curvature) if curvature.ndim == 0 else curvature


@dataclass(frozen=True)
class UniformityReport:
    max_abs_error: float
    max_rel_error: float
    worst_index: int

    def to_dict(self):
        return {'max_abs_error': self.max_abs_error, 'max_rel_error': self.max_rel_error,
                'worst_index': self.worst_index}


def interface_uniformity(extracted, expected):
    """Error máximo sobre puntos de la interfaz entre curvaturas extraídas y exactas."""
    extracted = np.asarray(extracted, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if extracted.shape != expected.shape or extracted.size == 0:
        raise DomainError("extracted y expected deben tener la misma forma no vacía")
    abs_err = np.abs(extracted - expected)
    rel_err = abs_err / np.where(expected != 0, np.abs(expected), 1.0)
    worst = int(np.argmax(rel_err))
    return UniformityReport(max_abs_error=float(abs_err.max()), max_rel_error=float(rel_err[worst]),
                            worst_index=worst)


def isothermic_spread(samples):
    """
    Dispersión max - min de la temperatura sobre puntos de la interfaz.

    Acepta una lista de TimeTrace (misma malla temporal) o un arreglo
    (n_parámetros, n_puntos). Una interfaz isoterma tiene dispersión nula; en
    una bola es cero por simetría y en una elipse no.
    """
    if isinstance(samples, (list, tuple)) and samples and hasattr(samples[0], 'values'):
        matrix = np.column_stack([np.asarray(tr.values, dtype=float) for tr in samples])
    else:
        matrix = np.atleast_2d(np.asarray(samples, dtype=float))
    return np.max(matrix, axis=1) - np.min(matrix, axis=1)


# Transformada de Laplace-Stieltjes

@dataclass(frozen=True)
class LaplaceResult:
    value: float
    error: float
    lam: float
    head: float = 0.0
    tail: float = 0.0


def _exp_difference(lam, t1, t2):
    """e^{-lam t1} - e^{-lam t2} sin cancelación."""
    return np.exp(-lam * t1) * -np.expm1(-lam * (t2 - t1))


def _gammainc_difference(a, x1, x2):
    """P(a, x2) - P(a, x1) usando Q en la cola para no perder dígitos."""
    upper = x1 > a
    return np.where(upper, special.gammaincc(a, x1) - special.gammaincc(a, x2),
                    special.gammainc(a, x2) - special.gammainc(a, x1))


def _laplace_body(t, u, lam):
    w = np.sqrt(t)
    beta = (u[1:] - u[:-1]) / (w[1:] - w[:-1])
    alpha = u[:-1] - beta * w[:-1]
    sqrt_part = lam ** -0.5 * special.gamma(1.5) * _gammainc_difference(1.5, lam * t[:-1], lam * t[1:])
    return float(np.sum(alpha * _exp_difference(lam, t[:-1], t[1:]) + beta * sqrt_part))


def laplace_stieltjes(trace, lam, head_window=ANALYSIS_START_FACTOR):
    """
    U_lambda(x) = lambda int_0^inf e^{-lambda t} u(x, t) dt desde una traza.

    Cuerpo: u lineal en sqrt(t) por intervalo, integrado en forma cerrada con
    la gamma incompleta. Cabeza [0, t0]: modelo c0 + C sqrt(t) ajustado en
    [t0, head_window t0]. Cola: u(t_max) e^{-lambda t_max}. El error se estima
    comparando con la misma cuadratura sobre tiempos alternos.
    """
    t, u = _trace_arrays(trace)
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"lambda debe ser > 0, se recibió {lam}")
    if lam * t[0] > LAPLACE_HEAD_LIMIT:
        raise DomainError(
            f"lambda t0 = {lam * t[0]:.3g} > {LAPLACE_HEAD_LIMIT:g}: la cabeza no está resuelta; "
            f"use t0 <= {LAPLACE_HEAD_LIMIT / lam:.3g}"
        )
    if lam * t[-1] < LAPLACE_TAIL_LIMIT:
        raise DomainError(
            f"lambda t_max = {lam * t[-1]:.3g} < {LAPLACE_TAIL_LIMIT:g}: la cola no es despreciable; "
            f"use t_max >= {LAPLACE_TAIL_LIMIT / lam:.3g}"
        )
    window = t <= head_window * t[0] * (1 + 1e-12)
    if np.count_nonzero(window) >= 2:
        c0, C = _fit_sqrt(t[window], u[window], intercept=True)
    else:
        c0, C = float(u[0]), 0.0
    x0 = lam * t[0]
    head = c0 * -math.expm1(-x0) + C * lam ** -0.5 * special.gamma(1.5) * special.gammainc(1.5, x0)
    tail = float(u[-1]) * math.exp(-lam * t[-1])

    body = _laplace_body(t, u, lam)
    alternate = np.unique(np.concatenate([np.arange(0, len(t), 2), [len(t) - 1]]))
    coarse = _laplace_body(t[alternate], u[alternate], lam) if len(alternate) >= 2 else body
    value = head + body + tail
    error = abs(body - coarse) / 3.0
    return LaplaceResult(value=float(value), error=float(error), lam=lam, head=float(head), tail=tail)


# Oráculo de Karamata

@dataclass(frozen=True)
class MeasureTrace:
    """Función de distribución mu[0, t_k] de una medida en [0, inf)."""
    times: np.ndarray
    cumulative: np.ndarray
    name: str = ''

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        m = np.asarray(self.cumulative, dtype=float)
        if t.ndim != 1 or t.shape != m.shape or len(t) < 2:
            raise DomainError("times y cumulative deben ser vectores de igual longitud (>= 2)")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise DomainError("Los tiempos deben ser positivos y estrictamente crecientes")
        tol = 1e-12 * max(float(np.max(np.abs(m))), 1e-300)
        drops = np.diff(m) < -tol
        if np.any(drops) or m[0] < -tol:
            k = int(np.argmax(drops)) + 1 if np.any(drops) else 0
            raise DomainError(f"La función acumulada decrece en t = {t[k]:.6g}: no es una medida")
        object.__setattr__(self, 'times', t)
        object.__setattr__(self, 'cumulative', m)


def measure_from_function(cumulative, times, name=''):
    """MeasureTrace con mu[0, t] = cumulative(t) en los tiempos dados."""
    t = np.asarray(times, dtype=float)
    return MeasureTrace(times=t, cumulative=np.asarray(cumulative(t), dtype=float), name=name)


STANDARD_MEASURES = {
    MEASURE_SQRT_T: (lambda t: (2.0 / 3.0) * t ** 1.5, 1.5),
    MEASURE_LEBESGUE: (lambda t: t, 1.0),
}


def standard_measure(name, times):
    """Medidas de referencia: 'sqrt_t' (d mu = sqrt(t) dt) y 'lebesgue'. Devuelve (medida, alpha)."""
    if name not in STANDARD_MEASURES:
        raise DomainError(f"Medida desconocida: {name!r}")
    fn, alpha = STANDARD_MEASURES[name]
    return measure_from_function(fn, times, name=name), alpha


def ell_measure(trace, cond, K):
    """l(t) = int_0^t (u - c_inf + K sqrt(s)) ds; es una medida cuando vale la barrera inferior."""
    excess = cumulative_excess(trace, cond)
    cumulative = excess.cumulative + (2.0 / 3.0) * K * excess.times ** 1.5
    return MeasureTrace(times=excess.times, cumulative=cumulative, name='ell')


def _measure_transform(measure, lam, alpha):
    """lam^alpha int e^{-lam t} d mu = lam^{alpha+1} int e^{-lam t} mu(t) dt, mu ~ a + b t^alpha por tramo."""
    t, m = measure.times, measure.cumulative
    a1 = alpha + 1.0
    g = special.gamma(a1)
    ta = t ** alpha
    b = (m[1:] - m[:-1]) / (ta[1:] - ta[:-1])
    a = m[:-1] - b * ta[:-1]
    body = np.sum(a * _exp_difference(lam, t[:-1], t[1:])
                  + b * lam ** -alpha * g * _gammainc_difference(a1, lam * t[:-1], lam * t[1:]))
    head = (m[0] / ta[0]) * lam ** -alpha * g * special.gammainc(a1, lam * t[0])
    tail = (m[-1] / ta[-1]) * lam ** -alpha * g * special.gammaincc(a1, lam * t[-1])
    return lam ** alpha * float(head + body + tail)


@dataclass
class KaramataReport:
    alpha: float
    lambdas: np.ndarray
    transform_values: np.ndarray
    times: np.ndarray
    small_t_values: np.ndarray
    transform_limit: ExtrapolationResult
    small_t_limit: ExtrapolationResult
    tolerance: float
    name: str = ''
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self):
        return self.transform_limit.limit_estimate / self.small_t_limit.limit_estimate

    @property
    def expected_ratio(self):
        return math.gamma(self.alpha + 1.0)

    @property
    def rel_error(self):
        return relative_error(self.ratio, self.expected_ratio)

    @property
    def passed(self):
        return bool(np.isfinite(self.ratio) and self.rel_error <= self.tolerance)

    def to_frame(self):
        n = max(len(self.lambdas), len(self.times))

        def pad(values):
            out = np.full(n, np.nan)
            out[:len(values)] = values
            return out

        return pd.DataFrame({
            'lambda': pad(self.lambdas),
            'transform': pad(self.transform_values),
            't': pad(self.times),
            'small_t': pad(self.small_t_values),
        })

    def summary_line(self):
        status = 'PASS' if self.passed else 'FAIL'
        return (f"karamata[{self.name or 'measure'}] alpha={self.alpha:g} ratio={self.ratio:.10g} "
                f"expected={self.expected_ratio:.10g} rel_err={self.rel_error:.3e} {status}")


@debug_log_function
def karamata_check(measure, alpha, tolerance=0.01, n_points=KARAMATA_POINTS, exponent=1.0):
    """
    Compara lim lambda^alpha int e^{-lambda t} d mu con lim t^{-alpha} mu[0, t]:
    el cociente debe ser Gamma(alpha + 1).

    Los lambda recorren [30/t_max, 0.1/t0] geométricamente y los tiempos son
    nodos de la medida en [10 t0, t_max] equiespaciados en log t; ambos límites se extrapolan en h = lambda^{-1/2} y
    h = sqrt(t) respectivamente.
    """
    if not alpha > 0:
        raise DomainError(f"alpha debe ser > 0, se recibió {alpha}")
    if not isinstance(measure, MeasureTrace):
        raise DomainError("karamata_check requiere una MeasureTrace")
    t = measure.times
    lam_lo, lam_hi = LAPLACE_TAIL_LIMIT / t[-1], LAPLACE_HEAD_LIMIT / t[0]
    if lam_hi <= lam_lo * 10:
        raise DomainError(
            f"La traza cubre muy pocas décadas: lambda en [{lam_lo:.3g}, {lam_hi:.3g}]"
        )
    lambdas = np.geomspace(lam_lo, lam_hi, n_points)
    transform = np.array([_measure_transform(measure, lam, alpha) for lam in lambdas])

    start = ANALYSIS_START_FACTOR * t[0]
    if start >= t[-1]:
        raise DomainError("La traza no alcanza 10 t0")
    candidates = np.nonzero(t >= start * (1 - 1e-12))[0]
    if len(candidates) < 3:
        raise DomainError("Se requieren al menos 3 tiempos >= 10 t0")
    # nodos propios de la traza, equiespaciados en log t
    picks = np.unique(np.round(np.linspace(0, len(candidates) - 1, n_points)).astype(int))
    sample_t = t[candidates[picks]]
    small_t = measure.cumulative[candidates[picks]] / sample_t ** alpha

    transform_limit = richardson_extrapolate(zip(lambdas ** -0.5, transform), exponent=exponent)
    small_t_limit = richardson_extrapolate(zip(np.sqrt(sample_t[::-1]), small_t[::-1]), exponent=exponent)
    report = KaramataReport(alpha=float(alpha), lambdas=lambdas, transform_values=transform,
                            times=sample_t, small_t_values=small_t, transform_limit=transform_limit,
                            small_t_limit=small_t_limit, tolerance=tolerance, name=measure.name)
    logger.info(report.summary_line())
    return report


# Perfil de blow-up

@dataclass(frozen=True)
class BlowupProfile:
    z: np.ndarray
    values: np.ndarray
    reference: np.ndarray
    q: tuple
    lam: float
    curvature_term: float

    @property
    def value_at_zero(self):
        return float(np.interp(0.0, self.z, self.values))

    @property
    def reference_at_zero(self):
        return float(np.interp(0.0, self.z, self.reference))

    def max_abs_error(self, z_max=None):
        mask = np.ones_like(self.z, dtype=bool) if z_max is None else np.abs(self.z) <= z_max
        return float(np.max(np.abs(self.values[mask] - self.reference[mask])))

    def max_abs_value(self):
        return float(np.max(np.abs(self.values)))

    def to_frame(self):
        return pd.DataFrame({'z': self.z, 's_lambda': self.values, 's_star': self.reference})


def _evaluate(provider, points):
    if hasattr(provider, 'evaluate'):
        return np.asarray(provider.evaluate(points), dtype=float)
    if callable(provider):
        return np.asarray(provider(points), dtype=float)
    raise DomainError("El proveedor del campo debe tener .evaluate(points) o ser invocable")


def blowup_profile(field_provider, shape, q, cond, lam, window=BLOWUP_WINDOW, samples=BLOWUP_SAMPLES):
    """
    S_lambda(z) = sqrt(lambda) (U_lambda(q - z lambda^{-1/2} nu(q)) - Phi(z))
    muestreado sobre la normal por q para |z| <= window max sqrt(sigma),
    junto con el perfil límite S_* de la misma curvatura.
    """
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"lambda debe ser > 0, se recibió {lam}")
    q = np.asarray(q, dtype=float)
    ct = float(geometry_curvature_term(shape, q))
    z_max = window * math.sqrt(cond.M)
    reach = z_max / math.sqrt(lam)
    if reach >= shape.tube_radius:
        lam_min = (z_max / shape.tube_radius) ** 2
        raise DomainError(
            f"La ventana |z| <= {z_max:.3g} sale del tubo (alcance {reach:.3g} >= {shape.tube_radius:.3g}); "
            f"use lambda > {lam_min:.3g}"
        )
    z = np.linspace(-z_max, z_max, samples)
    normal = np.asarray(shape.outward_normal(q), dtype=float)
    points = q[None, :] - (z / math.sqrt(lam))[:, None] * normal[None, :]
    U = _evaluate(field_provider, points)
    values = math.sqrt(lam) * (U - phi_profile(z, cond))
    return BlowupProfile(z=z, values=values, reference=s_star(z, cond, ct), q=tuple(q.tolist()),
                         lam=lam, curvature_term=ct)
