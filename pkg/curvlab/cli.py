"""
Front end batch: lee la configuración de corrida, orquesta solvers,
asintótica y auditorías, y escribe tablas CSV más summary.txt.

Códigos de salida: 0 todos los chequeos pasan, 1 algún chequeo falla,
2 error de uso o de configuración, 3 error numérico o de dominio durante la corrida.
"""
import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from curvlab import create_context, get_config
from curvlab.asymptotics import (
    ROUTE_TIME,
    SUBSEQUENCE_COUNT,
    SUBSEQUENCE_FACTOR,
    blowup_profile,
    ell_measure,
    expected_lambda_limit,
    expected_time_limit,
    extract_curvature,
    interface_uniformity,
    isothermic_spread,
    karamata_check,
    lambda_functional,
    laplace_stieltjes,
    relative_error,
    standard_measure,
    time_functional,
)
from curvlab.audit import (
    barrier_check_elliptic,
    barrier_check_parabolic,
    calibrate_K,
    maximum_principle_check,
    samples_from_radial,
)
from curvlab.closedforms import Conductivity
from curvlab.constants import (
    BLOWUP_WINDOW,
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERIC_ERROR,
    EXIT_OK,
    FINEST_SPACING_FRACTION,
    MEASURE_ELL,
    MEASURE_LEBESGUE,
    MEASURE_SQRT_T,
    MESH_STRETCH,
    MODE_BARRIER_AUDIT,
    MODE_ELLIPSE_SCAN,
    MODE_KARAMATA_CHECK,
    MODE_SWEEP,
    MODE_VERIFY_ELLIPTIC,
    MODE_VERIFY_PARABOLIC,
    MODES,
    SHAPE_BALL,
    SHAPE_ELLIPSE,
    SHAPE_HALFSPACE,
    STARTUP_STEPS,
    TIME_RATIO,
)
from curvlab.elliptic import (
    CartesianGrid2D,
    FlatSolution,
    RadialGrid,
    solve_cartesian_2d,
    solve_ellipse_fitted,
    solve_radial_bessel,
    solve_radial_fd,
)
from curvlab.errors import ConfigError, DomainError, NumericError
from curvlab.geometry import Ball, Ellipse2D, HalfSpace, curvature_term, make_shape, mean_curvature
from curvlab.parabolic import TimeGrid, parabolic_mesh, solve_radial_parabolic
from curvlab.specfun import ALLOWED_ORDERS, BesselOrder
from curvlab.storage import append_summary, ensure_dir, format_items, resolve_output_dir, write_table
from curvlab.utils import Timer, config_hash

logger = logging.getLogger(__name__)

SOLVERS = ('auto', 'bessel', 'fd', 'cartesian', 'fitted', 'exact')
MEASURES = (MEASURE_SQRT_T, MEASURE_LEBESGUE, MEASURE_ELL)
SHAPES = (SHAPE_BALL, SHAPE_ELLIPSE, SHAPE_HALFSPACE)

FD_ORACLE_TOL = 1e-4
FLAT_NULL_TOL = 1e-10
UNIFORMITY_TOL = 1e-12
LAPLACE_CHECK_TOL = 1e-3
BLOWUP_MIN_LAMBDA = 1e4
BLOWUP_Z_MAX = 6.0
BLOWUP_PROFILE_TOL = 0.05
BLOWUP_ZERO_TOL = 0.03
SWEEP_CELLS = 96
SWEEP_KINDS = ('ball2', 'ball3', 'ellipse', 'halfspace')
SYNTHETIC_T0 = 1e-4
SYNTHETIC_T_MAX = 1.0


# Configuración de corrida

def parse_ladder(text):
    """'1e2:1e6:10x' (inicio:fin:razón) o lista '1e2,1e3,1e4' -> tupla creciente de floats."""
    text = str(text).strip()
    if ':' in text:
        parts = text.split(':')
        if len(parts) != 3 or not parts[2].endswith('x'):
            raise ValueError(f"escalera inválida {text!r} (formato inicio:fin:razónx)")
        start, stop, ratio = float(parts[0]), float(parts[1]), float(parts[2][:-1])
        if not (start > 0 and stop >= start and ratio > 1):
            raise ValueError(f"escalera inválida {text!r}")
        values = []
        value = start
        while value <= stop * (1 + 1e-9):
            values.append(value)
            value *= ratio
    else:
        values = [float(v) for v in text.split(',') if v.strip()]
    if not values or any(v <= 0 or not math.isfinite(v) for v in values):
        raise ValueError(f"escalera inválida {text!r}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"la escalera {text!r} debe ser estrictamente creciente")
    return tuple(values)


def _positive_float(text):
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"debe ser un real > 0, se recibió {text!r}")
    return value


def _nonnegative_float(text):
    value = float(text)
    if not (math.isfinite(value) and value >= 0):
        raise ValueError(f"debe ser un real >= 0, se recibió {text!r}")
    return value


def _positive_int(text):
    value = float(text)
    if value != int(value) or value < 1:
        raise ValueError(f"debe ser un entero >= 1, se recibió {text!r}")
    return int(value)


def _nonnegative_int(text):
    value = float(text)
    if value != int(value) or value < 0:
        raise ValueError(f"debe ser un entero >= 0, se recibió {text!r}")
    return int(value)


def _choice(options):
    def convert(text):
        value = str(text).strip()
        if value not in options:
            raise ValueError(f"debe ser uno de {', '.join(options)}, se recibió {text!r}")
        return value
    return convert


def _text(text):
    return str(text).strip()


@dataclass
class RunConfig:
    mode: str
    shape: str = SHAPE_BALL
    dim: int = 3
    radius: float = 1.0
    a: float = 2.0
    b: float = 1.0
    sigma_plus: float = 1.0
    sigma_minus: float = 4.0
    lambda_ladder: tuple = (1e2, 1e3, 1e4, 1e5, 1e6)
    solver: str = 'auto'
    t0: float = None
    t_max: float = None
    time_ratio: float = TIME_RATIO
    startup_steps: int = STARTUP_STEPS
    mesh_stretch: float = MESH_STRETCH
    finest_fraction: float = FINEST_SPACING_FRACTION
    cells: int = None
    samples: int = 16
    measure: str = MEASURE_SQRT_T
    alpha: float = None
    barrier_k: float = None
    headroom: float = 2.0
    tolerance: float = None
    exponent: float = 1.0
    levels: int = 2
    laplace_lambda: float = 400.0
    sweep_count: int = 20
    seed: int = None
    workers: int = None
    output_dir: str = None

    def to_dict(self):
        return asdict(self)

    def hash(self):
        items = {k: v for k, v in self.to_dict().items() if k != 'output_dir'}
        return config_hash(items)


FIELD_CONVERTERS = {
    'mode': _choice(MODES),
    'shape': _choice(SHAPES),
    'dim': _positive_int,
    'radius': _positive_float,
    'a': _positive_float,
    'b': _positive_float,
    'sigma_plus': _positive_float,
    'sigma_minus': _positive_float,
    'lambda_ladder': parse_ladder,
    'solver': _choice(SOLVERS),
    't0': _positive_float,
    't_max': _positive_float,
    'time_ratio': _positive_float,
    'startup_steps': _nonnegative_int,
    'mesh_stretch': _positive_float,
    'finest_fraction': _positive_float,
    'cells': _positive_int,
    'samples': _positive_int,
    'measure': _choice(MEASURES),
    'alpha': _positive_float,
    'barrier_k': _nonnegative_float,
    'headroom': _positive_float,
    'tolerance': _positive_float,
    'exponent': _positive_float,
    'levels': _positive_int,
    'laplace_lambda': _positive_float,
    'sweep_count': _positive_int,
    'seed': _nonnegative_int,
    'workers': _positive_int,
    'output_dir': _text,
}

MODE_DEFAULTS = {
    MODE_ELLIPSE_SCAN: {'shape': SHAPE_ELLIPSE, 'lambda_ladder': '1e3:1.6e4:4x'},
    MODE_BARRIER_AUDIT: {'lambda_ladder': '1e2:1e4:100x'},
}


def normalize_key(key):
    return key.strip().lower().replace('-', '_')


def read_config_file(path):
    """
    Lee un archivo plano `clave = valor` con comentarios `#`.

    Returns:
        dict clave -> texto del valor (claves normalizadas a snake_case)
    """
    try:
        with open(path, encoding='utf-8') as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"No se pudo leer el archivo de configuración {path}: {exc}") from exc

    values, seen, problems = {}, {}, []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            problems.append(f"línea {lineno}: se esperaba 'clave = valor', se encontró {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split('=', 1))
        key = normalize_key(key)
        if key in seen:
            problems.append(f"línea {lineno}: clave duplicada '{key}' (definida antes en la línea {seen[key]})")
            continue
        if key not in FIELD_CONVERTERS:
            problems.append(f"línea {lineno}: clave desconocida '{key}'")
            continue
        seen[key] = lineno
        values[key] = value
    if problems:
        raise ConfigError(problems)
    return values


def build_run_config(values):
    """Convierte y valida valores de texto; ConfigError lista todos los campos inválidos."""
    problems = []
    if not values.get('mode'):
        raise ConfigError("Falta el campo obligatorio 'mode'")
    merged = dict(MODE_DEFAULTS.get(str(values['mode']).strip(), {}))
    merged.update(values)

    converted = {}
    for key, raw in merged.items():
        if key not in FIELD_CONVERTERS:
            problems.append(f"clave desconocida '{key}'")
            continue
        if raw is None:
            continue
        try:
            converted[key] = FIELD_CONVERTERS[key](raw)
        except (TypeError, ValueError, OverflowError) as exc:
            problems.append(f"{key}: {exc}")
    if problems:
        raise ConfigError(problems)

    run_config = RunConfig(**converted)
    problems.extend(_mode_problems(run_config))
    if problems:
        raise ConfigError(problems)
    return run_config


def _mode_problems(rc):
    problems = []
    if rc.shape == SHAPE_ELLIPSE and not rc.a > rc.b:
        problems.append(f"la elipse requiere a > b (a={rc.a}, b={rc.b})")
    if rc.dim < 2:
        problems.append(f"dim debe ser >= 2, se recibió {rc.dim}")
    if rc.t0 is not None and rc.t_max is not None and rc.t_max <= rc.t0:
        problems.append("t_max debe ser mayor que t0")
    if rc.time_ratio <= 1:
        problems.append(f"time_ratio debe ser > 1, se recibió {rc.time_ratio}")
    if rc.mesh_stretch < 1:
        problems.append(f"mesh_stretch debe ser >= 1, se recibió {rc.mesh_stretch}")
    if rc.mode in (MODE_VERIFY_ELLIPTIC, MODE_ELLIPSE_SCAN) and len(rc.lambda_ladder) < 3:
        problems.append("lambda_ladder necesita al menos 3 valores")
    if rc.mode == MODE_VERIFY_PARABOLIC and rc.shape != SHAPE_BALL:
        problems.append("verify-parabolic requiere shape = ball")
    if rc.mode == MODE_ELLIPSE_SCAN and rc.shape != SHAPE_ELLIPSE:
        problems.append("ellipse-scan requiere shape = ellipse")
    if rc.mode == MODE_BARRIER_AUDIT and rc.shape == SHAPE_ELLIPSE:
        problems.append("barrier-audit admite shape = ball o halfspace")
    if rc.mode == MODE_KARAMATA_CHECK and rc.measure == MEASURE_ELL and rc.shape != SHAPE_BALL:
        problems.append("la medida 'ell' requiere shape = ball")
    solver_shapes = {
        'bessel': (SHAPE_BALL,), 'fd': (SHAPE_BALL,), 'fitted': (SHAPE_ELLIPSE,),
        'exact': (SHAPE_HALFSPACE,), 'cartesian': (SHAPE_BALL, SHAPE_ELLIPSE),
    }
    if rc.solver in solver_shapes and rc.shape not in solver_shapes[rc.solver]:
        problems.append(f"el solver '{rc.solver}' no admite shape = {rc.shape}")
    if rc.solver == 'cartesian' and rc.shape == SHAPE_BALL and rc.dim != 2:
        problems.append("el solver 'cartesian' requiere dim = 2")
    if rc.shape == SHAPE_BALL and not _oracle_supports(rc.dim):
        uses_oracle = rc.mode == MODE_VERIFY_PARABOLIC or (
            rc.mode == MODE_VERIFY_ELLIPTIC and rc.solver in ('auto', 'bessel', 'fd')) or (
            rc.mode == MODE_BARRIER_AUDIT and rc.solver in ('auto', 'bessel'))
        if uses_oracle:
            problems.append(f"la solución de Bessel no admite dim = {rc.dim} (órdenes permitidos {ALLOWED_ORDERS})")
    return problems


def _oracle_supports(dim):
    """La solución radial usa I, K de orden N/2 - 1 y N/2."""
    try:
        order = BesselOrder.for_dimension(dim)
        BesselOrder(order.nu + 1.0)
    except DomainError:
        return False
    return True


def parse_config(path):
    """RunConfig desde un archivo; el campo 'mode' es obligatorio."""
    return build_run_config(read_config_file(path))


# Parser de argumentos

def build_parser():
    parser = argparse.ArgumentParser(
        prog='curvlab',
        description='Extracción de curvatura media desde la asintótica de conductores bifásicos',
    )
    sub = parser.add_subparsers(dest='mode', required=True)
    for mode in MODES:
        cmd = sub.add_parser(mode, help=f"modo {mode}")
        cmd.add_argument('--config', default=None, help='archivo plano clave = valor')
        for name in FIELD_CONVERTERS:
            if name == 'mode':
                continue
            cmd.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None, type=str)
    return parser


def config_from_args(args):
    """
    Combina valores: flags de CLI > archivo de configuración > valores por defecto.
    output_dir queda con el valor del archivo; el flag se resuelve en execute().
    """
    values = read_config_file(args.config) if args.config else {}
    for name in FIELD_CONVERTERS:
        if name == 'output_dir':
            continue
        cli_value = getattr(args, name, None)
        if cli_value is not None:
            values[name] = cli_value
    values['mode'] = args.mode
    return build_run_config(values)


# Resultado de una corrida

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def summary_line(self):
        status = 'PASS' if self.passed else 'FAIL'
        return f"check {self.name} {status} {format_items(self.details)}".rstrip()


@dataclass
class RunOutcome:
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def add(self, name, passed, **details):
        check = Check(name=name, passed=bool(passed), details=details)
        self.checks.append(check)
        level = logging.INFO if check.passed else logging.WARNING
        logger.log(level, check.summary_line())
        return check


# Utilidades de los modos

def _conductivity(rc):
    return Conductivity(rc.sigma_plus, rc.sigma_minus)


def _shape(rc):
    return make_shape(rc.shape, dim=rc.dim, radius=rc.radius, a=rc.a, b=rc.b)


def _reference_point(shape):
    if isinstance(shape, Ball):
        point = np.zeros(shape.dim)
        point[0] = shape.radius
        return point
    if isinstance(shape, Ellipse2D):
        return np.array([shape.a, 0.0])
    return np.zeros(shape.dim)


def _elliptic_solver(rc, shape, cond):
    """Función lambda -> solución con .evaluate(points) según rc.solver."""
    solver = rc.solver
    if solver == 'auto':
        if isinstance(shape, Ball):
            solver = 'bessel'
        elif isinstance(shape, Ellipse2D):
            solver = 'fitted'
        else:
            solver = 'exact'
    if solver == 'bessel':
        return lambda lam: solve_radial_bessel(shape, cond, lam)
    if solver == 'fd':
        return lambda lam: solve_radial_fd(shape, cond, lam, grid=RadialGrid.graded(
            shape, cond, lam, stretch=rc.mesh_stretch, finest_fraction=rc.finest_fraction))
    if solver == 'cartesian':
        return lambda lam: solve_cartesian_2d(shape, cond, lam,
                                              grid=CartesianGrid2D.for_shape(shape, cond, lam, cells=rc.cells))
    if solver == 'fitted':
        return lambda lam: solve_ellipse_fitted(shape, cond, lam)
    return lambda lam: FlatSolution(shape, cond, lam)


def _time_grid(rc, shape, cond):
    default = TimeGrid.default_for(shape, cond, ratio=rc.time_ratio, startup_steps=rc.startup_steps)
    if rc.t0 is None and rc.t_max is None:
        return default
    return TimeGrid(t0=rc.t0 or default.t0, t_max=rc.t_max or default.t_max,
                    ratio=rc.time_ratio, startup_steps=rc.startup_steps)


def _solve_parabolic(rc, ball, cond, estimate_error=False):
    time_grid = _time_grid(rc, ball, cond)
    mesh = parabolic_mesh(ball, cond, time_grid, stretch=rc.mesh_stretch)
    solution = solve_radial_parabolic(ball, cond, mesh=mesh, time_grid=time_grid, estimate_error=estimate_error)
    return solution


def _header(shape, cond, **extra):
    head = {'shape': shape.describe(), 'sigma_plus': cond.sigma_plus, 'sigma_minus': cond.sigma_minus}
    head.update(extra)
    return head


def _tolerance(rc, default):
    return rc.tolerance if rc.tolerance is not None else default


# Modos

def run_verify_elliptic(rc, out_dir):
    """Ruta en lambda: sqrt(lambda)(U_lambda(q) - c_inf) extrapolado contra la fórmula."""
    cfg = get_config()
    outcome = RunOutcome()
    shape, cond = _shape(rc), _conductivity(rc)
    q = _reference_point(shape)
    ct = float(curvature_term(shape, q))
    lams = rc.lambda_ladder
    solve = _elliptic_solver(rc, shape, cond)
    solutions = [solve(lam) for lam in lams]
    u_values = [float(sol.evaluate(q)) for sol in solutions]
    seq = lambda_functional(zip(lams, u_values), cond)
    expected = expected_lambda_limit(cond, ct)
    header = _header(shape, cond, point=tuple(q))

    if ct == 0.0:
        worst = float(np.max(np.abs(seq.values)))
        write_table(out_dir, 'lambda_functional', seq.to_frame(), header=header,
                    footer={'max_abs': worst, 'expected': 0.0})
        outcome.add('flat_null', worst <= FLAT_NULL_TOL, max_abs=worst, tolerance=FLAT_NULL_TOL)
    else:
        result = seq.extrapolate(exponent=rc.exponent, levels=rc.levels)
        tol = _tolerance(rc, cfg.ELLIPTIC_REL_TOL)
        rel = relative_error(result.limit_estimate, expected)
        write_table(out_dir, 'lambda_functional', result.to_frame(), header=header,
                    footer=result.footer(expected))
        extracted = extract_curvature(result.limit_estimate, cond, shape.dim)
        outcome.add('lambda_limit', rel <= tol, limit=result.limit_estimate, expected=expected,
                    rel_err=rel, tolerance=tol, error=result.error_estimate,
                    extracted_curvature=extracted, mean_curvature=mean_curvature(shape, q),
                    model_consistent=result.model_consistent)

    if isinstance(shape, Ball) and rc.solver in ('auto', 'bessel', 'fd'):
        # soluciones radiales: exactamente uniformes sobre la esfera
        samples = shape.interface_samples(8)
        spread = float(isothermic_spread(np.asarray(solutions[-1].evaluate(samples))[None, :])[0])
        outcome.add('interface_uniformity', spread <= UNIFORMITY_TOL, spread=spread, lam=lams[-1])
        if rc.solver == 'fd':
            _check_fd_oracle(outcome, shape, cond, lams, solutions)
        if lams[-1] >= BLOWUP_MIN_LAMBDA:
            _check_blowup(outcome, out_dir, solutions[-1], shape, q, cond, lams[-1])
    return outcome


def _check_fd_oracle(outcome, ball, cond, lams, solutions):
    worst = 0.0
    for lam, fd in zip(lams, solutions):
        oracle = solve_radial_bessel(ball, cond, lam).value(fd.grid.nodes)
        worst = max(worst, float(np.max(np.abs(fd.values - oracle)) / np.max(np.abs(oracle))))
    outcome.add('fd_vs_oracle', worst <= FD_ORACLE_TOL, max_rel_err=worst, tolerance=FD_ORACLE_TOL)


def _check_blowup(outcome, out_dir, solution, shape, q, cond, lam):
    window = min(BLOWUP_WINDOW, 0.99 * shape.tube_radius * math.sqrt(lam / cond.M))
    profile = blowup_profile(solution, shape, q, cond, lam, window=window)
    write_table(out_dir, 'blowup_profile', profile.to_frame(),
                header=_header(shape, cond, point=tuple(q), **{'lambda': lam}),
                footer={'s_at_zero': profile.value_at_zero, 'expected': profile.reference_at_zero})
    err = profile.max_abs_error(z_max=BLOWUP_Z_MAX)
    rel0 = relative_error(profile.value_at_zero, profile.reference_at_zero)
    outcome.add('blowup_profile', err <= BLOWUP_PROFILE_TOL and rel0 <= BLOWUP_ZERO_TOL,
                max_abs_err=err, s_at_zero=profile.value_at_zero, expected=profile.reference_at_zero,
                rel_err_at_zero=rel0)


def run_verify_parabolic(rc, out_dir):
    """Ruta temporal en la bola, transformada de Laplace y consistencia entre teoremas."""
    cfg = get_config()
    outcome = RunOutcome()
    ball, cond = _shape(rc), _conductivity(rc)
    q = _reference_point(ball)
    ct = float(curvature_term(ball, q))
    solution = _solve_parabolic(rc, ball, cond)
    trace = solution.trace
    outcome.notes.extend(f"warning {w}" for w in solution.warnings)
    write_table(out_dir, 'trace', trace.to_frame(), header=trace.header())

    functional = time_functional(trace, cond)
    result = functional.extrapolate(exponent=rc.exponent, levels=rc.levels,
                                    factor=SUBSEQUENCE_FACTOR, count=SUBSEQUENCE_COUNT)
    expected_t = expected_time_limit(cond, ct)
    tol = _tolerance(rc, cfg.PARABOLIC_REL_TOL)
    rel = relative_error(result.limit_estimate, expected_t)
    head = functional.max_head_uncertainty
    write_table(out_dir, 'time_functional', result.to_frame(), header=_header(ball, cond, point=tuple(q)),
                footer={**result.footer(expected_t), 'head_uncertainty': head})
    outcome.add('time_limit', rel <= tol, limit=result.limit_estimate, expected=expected_t, rel_err=rel,
                tolerance=tol, error=result.error_estimate,
                extracted_curvature=extract_curvature(result.limit_estimate, cond, ball.dim, ROUTE_TIME),
                model_consistent=result.model_consistent)
    outcome.add('head_uncertainty', head < tol * abs(expected_t), head_uncertainty=head,
                budget=tol * abs(expected_t))

    laplace = laplace_stieltjes(trace, rc.laplace_lambda)
    oracle = solve_radial_bessel(ball, cond, rc.laplace_lambda).interface_value
    diff = abs(laplace.value - oracle)
    outcome.add('laplace_vs_oracle', diff <= LAPLACE_CHECK_TOL, transform=laplace.value, oracle=oracle,
                abs_err=diff, quadrature_error=laplace.error)

    lam_seq = lambda_functional(
        ((lam, solve_radial_bessel(ball, cond, lam).interface_value) for lam in rc.lambda_ladder), cond)
    lam_result = lam_seq.extrapolate(exponent=rc.exponent, levels=rc.levels)
    gamma = math.gamma(2.5)
    gap = abs(gamma * result.limit_estimate - lam_result.limit_estimate)
    budget = gamma * max(result.error_estimate, tol * abs(expected_t)) + lam_result.error_estimate
    outcome.add('theorem_consistency', gap <= budget, time_limit_x_gamma=gamma * result.limit_estimate,
                lambda_limit=lam_result.limit_estimate, gap=gap, budget=budget)

    mp = maximum_principle_check(solution)
    outcome.add('max_principle', mp.passed, min=mp.min_value, max=mp.max_value)
    return outcome


def run_ellipse_scan(rc, out_dir):
    """Curvatura variable: extracción puntual sobre la elipse y cociente entre vértices."""
    cfg = get_config()
    outcome = RunOutcome()
    shape, cond = _shape(rc), _conductivity(rc)
    vertices = np.array([[shape.a, 0.0], [0.0, shape.b]])
    points = np.vstack([vertices, shape.interface_samples(rc.samples)])
    lams = rc.lambda_ladder
    solve = _elliptic_solver(rc, shape, cond)
    U = np.array([np.asarray(solve(lam).evaluate(points), dtype=float) for lam in lams])

    limits, errors, consistent = [], [], []
    for j in range(len(points)):
        result = lambda_functional(zip(lams, U[:, j]), cond).extrapolate(exponent=rc.exponent, levels=rc.levels)
        limits.append(result.limit_estimate)
        errors.append(result.error_estimate)
        consistent.append(result.model_consistent)
    extracted = extract_curvature(np.array(limits), cond, 2)
    exact = np.asarray(mean_curvature(shape, points), dtype=float)

    frame = pd.DataFrame({
        'x': points[:, 0], 'y': points[:, 1], 'limit': limits, 'error': errors,
        'extracted': extracted, 'exact': exact, 'rel_err': np.abs(extracted - exact) / np.abs(exact),
        'model_consistent': consistent,
    })
    tol = _tolerance(rc, cfg.CURVATURE_REL_TOL)
    ratio = float(extracted[0] / extracted[1])
    expected_ratio = (shape.a / shape.b) ** 3
    ratio_err = relative_error(ratio, expected_ratio)
    write_table(out_dir, 'ellipse_scan', frame, header=_header(shape, cond, lambdas=lams),
                footer={'ratio': ratio, 'expected': expected_ratio, 'rel_err': ratio_err})
    outcome.add('vertex_ratio', ratio_err <= tol, ratio=ratio, expected=expected_ratio, rel_err=ratio_err,
                tolerance=tol)
    uniformity = interface_uniformity(extracted[2:], exact[2:])
    outcome.add('pointwise_curvature', uniformity.max_rel_error <= tol, **uniformity.to_dict(), tolerance=tol)

    spread = isothermic_spread(U[:, 2:])
    write_table(out_dir, 'isothermic_spread', pd.DataFrame({'lambda': lams, 'spread': spread}),
                header=_header(shape, cond))
    outcome.notes.append(f"isothermic_spread {format_items(dict(zip(map(str, lams), spread)))}")
    return outcome


def run_barrier_audit(rc, out_dir):
    """Sándwich de barreras con K calibrado (debe pasar) y con K = 0 (debe fallar si hay curvatura)."""
    outcome = RunOutcome()
    shape, cond = _shape(rc), _conductivity(rc)
    K = rc.barrier_k if rc.barrier_k is not None else calibrate_K(shape, cond, headroom=rc.headroom)
    curved = not isinstance(shape, HalfSpace)
    reports, mp_reports = [], []

    if isinstance(shape, Ball):
        solution = _solve_parabolic(rc, shape, cond, estimate_error=True)
        samples = samples_from_radial(solution)
        report = barrier_check_parabolic(samples, shape, cond, K)
        zero = barrier_check_parabolic(samples, shape, cond, 0.0)
        reports.extend([report, zero])
        outcome.add('parabolic_barrier', report.passed, K=K, max_violation=report.max_violation)
        outcome.add('parabolic_barrier_active', not zero.passed, max_violation=zero.max_violation,
                    witness=zero.witness, t=zero.witness_parameter)
        mp_reports.append(('parabolic', maximum_principle_check(solution)))

    solve = _elliptic_solver(rc, shape, cond)
    for lam in rc.lambda_ladder:
        solution = solve(lam)
        report = barrier_check_elliptic(solution, shape, cond, K, lam=lam)
        reports.append(report)
        outcome.add(f"elliptic_barrier_lambda={lam:g}", report.passed, K=K, max_violation=report.max_violation)
        if curved:
            zero = barrier_check_elliptic(solution, shape, cond, 0.0, lam=lam)
            reports.append(zero)
            outcome.add(f"elliptic_barrier_active_lambda={lam:g}", not zero.passed,
                        max_violation=zero.max_violation, witness=zero.witness)
        mp_reports.append((f"elliptic_lambda={lam:g}", maximum_principle_check(solution)))

    write_table(out_dir, 'barrier_audit', pd.DataFrame([r.to_dict() for r in reports]),
                header=_header(shape, cond, K=K))
    mp_frame = pd.DataFrame([{'source': name, **mp.to_dict()} for name, mp in mp_reports])
    write_table(out_dir, 'max_principle', mp_frame, header=_header(shape, cond))
    for name, mp in mp_reports:
        outcome.add(f"max_principle_{name}", mp.passed, min=mp.min_value, max=mp.max_value)
    return outcome


def run_karamata_check(rc, out_dir):
    """Cociente de los dos límites de Karamata contra Gamma(alpha + 1)."""
    cfg = get_config()
    outcome = RunOutcome()
    if rc.measure == MEASURE_ELL:
        ball, cond = _shape(rc), _conductivity(rc)
        solution = _solve_parabolic(rc, ball, cond)
        K = rc.barrier_k if rc.barrier_k is not None else calibrate_K(ball, cond, headroom=rc.headroom)
        measure = ell_measure(solution.trace, cond, K)
        default_alpha = 1.5
        header = _header(ball, cond, measure=rc.measure, K=K)
    else:
        times = TimeGrid(rc.t0 or SYNTHETIC_T0, rc.t_max or SYNTHETIC_T_MAX, ratio=rc.time_ratio).times()
        measure, default_alpha = standard_measure(rc.measure, times)
        header = {'measure': rc.measure}
    alpha = rc.alpha if rc.alpha is not None else default_alpha
    report = karamata_check(measure, alpha, tolerance=_tolerance(rc, cfg.KARAMATA_REL_TOL), exponent=rc.exponent)
    write_table(out_dir, 'karamata', report.to_frame(), header={**header, 'alpha': alpha},
                footer={'ratio': report.ratio, 'expected': report.expected_ratio, 'rel_err': report.rel_error})
    outcome.add('karamata_ratio', report.passed, ratio=report.ratio, expected=report.expected_ratio,
                rel_err=report.rel_error, transform_limit=report.transform_limit.limit_estimate,
                small_t_limit=report.small_t_limit.limit_estimate)
    return outcome


# Sweep

def sweep_configs(count, seed):
    """Configuraciones (tipo, sigma_+, sigma_-, lambda) deterministas para una semilla."""
    rng = np.random.default_rng(seed)
    configs = []
    for i in range(count):
        kind = SWEEP_KINDS[i % len(SWEEP_KINDS)]
        sigma_plus, sigma_minus = np.exp(rng.uniform(math.log(0.25), math.log(4.0), size=2))
        hi = 1e3 if kind == 'ellipse' else 1e4
        lam = float(np.exp(rng.uniform(math.log(10.0), math.log(hi))))
        configs.append({'run': i, 'kind': kind, 'sigma_plus': float(sigma_plus),
                        'sigma_minus': float(sigma_minus), 'lambda': lam})
    return configs


def _sweep_solutions(kind, cond, lam, cells):
    if kind == 'ball2':
        ball = Ball(2, 1.0)
        grid = CartesianGrid2D.for_shape(ball, cond, lam, cells=cells)
        return ball, [('bessel', solve_radial_bessel(ball, cond, lam)), ('fd', solve_radial_fd(ball, cond, lam)),
                      ('cartesian', solve_cartesian_2d(ball, cond, lam, grid=grid))]
    if kind == 'ball3':
        ball = Ball(3, 1.0)
        return ball, [('bessel', solve_radial_bessel(ball, cond, lam)), ('fd', solve_radial_fd(ball, cond, lam)),
                      ('parabolic', solve_radial_parabolic(ball, cond))]
    if kind == 'ellipse':
        ellipse = Ellipse2D(2.0, 1.0)
        return ellipse, [('fitted', solve_ellipse_fitted(ellipse, cond, lam))]
    flat = HalfSpace(3)
    return flat, [('exact', FlatSolution(flat, cond, lam))]


def _sweep_run(entry, base_dir, cells):
    run_dir = ensure_dir(os.path.join(base_dir, f"run_{entry['run']:02d}"))
    cond = Conductivity(entry['sigma_plus'], entry['sigma_minus'])
    shape, solutions = _sweep_solutions(entry['kind'], cond, entry['lambda'], cells)
    rows = []
    for name, solution in solutions:
        mp = maximum_principle_check(solution)
        rows.append({'run': entry['run'], 'kind': entry['kind'], 'solver': name,
                     'sigma_plus': entry['sigma_plus'], 'sigma_minus': entry['sigma_minus'],
                     'lambda': entry['lambda'], 'min': mp.min_value, 'max': mp.max_value, 'passed': mp.passed})
    frame = pd.DataFrame(rows)
    write_table(run_dir, 'max_principle', frame, header=_header(shape, cond, **{'lambda': entry['lambda']}))
    append_summary(run_dir, [f"run {format_items(entry)}"] + [
        f"check max_principle_{r['solver']} {'PASS' if r['passed'] else 'FAIL'} min={r['min']:.17g} "
        f"max={r['max']:.17g}" for r in rows])
    return rows


def run_sweep(rc, out_dir):
    """Principio del máximo sobre configuraciones aleatorias, cada una en su subdirectorio."""
    cfg = get_config()
    outcome = RunOutcome()
    seed = rc.seed if rc.seed is not None else cfg.SWEEP_SEED
    workers = rc.workers or cfg.SWEEP_WORKERS
    entries = sweep_configs(rc.sweep_count, seed)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda entry: _sweep_run(entry, out_dir, rc.cells or SWEEP_CELLS), entries))
    rows = [row for run_rows in results for row in run_rows]
    write_table(out_dir, 'sweep', pd.DataFrame(rows), header={'seed': seed, 'count': rc.sweep_count})
    failed = [r for r in rows if not r['passed']]
    outcome.add('max_principle_sweep', not failed, runs=rc.sweep_count, solves=len(rows), failed=len(failed))
    return outcome


RUNNERS = {
    MODE_VERIFY_ELLIPTIC: run_verify_elliptic,
    MODE_VERIFY_PARABOLIC: run_verify_parabolic,
    MODE_ELLIPSE_SCAN: run_ellipse_scan,
    MODE_BARRIER_AUDIT: run_barrier_audit,
    MODE_KARAMATA_CHECK: run_karamata_check,
    MODE_SWEEP: run_sweep,
}


def execute(rc, cli_output_dir=None):
    """Ejecuta el modo y escribe summary.txt; devuelve (RunOutcome, directorio)."""
    out_dir = ensure_dir(resolve_output_dir(cli_output_dir, rc.output_dir))
    items = rc.to_dict()
    items.pop('output_dir')
    append_summary(out_dir, [f"run mode={rc.mode} config_hash={rc.hash()}", f"config {format_items(items)}"])
    try:
        with Timer(f"modo {rc.mode}", log=logger):
            outcome = RUNNERS[rc.mode](rc, out_dir)
    except (NumericError, DomainError) as exc:
        append_summary(out_dir, [f"error {type(exc).__name__}: {exc}", "result ERROR"])
        raise
    lines = list(outcome.notes) + [check.summary_line() for check in outcome.checks]
    lines.append(f"result {'PASS' if outcome.passed else 'FAIL'}")
    append_summary(out_dir, lines)
    return outcome, out_dir


def run_command(argv):
    """
    Punto de entrada del CLI.

    Args:
        argv: lista de argumentos (sin el nombre del programa)

    Returns:
        código de salida (0, 1, 2 o 3)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG_ERROR

    try:
        rc = config_from_args(args)
    except ConfigError as exc:
        for problem in exc.problems:
            logger.error("Configuración inválida: %s", problem)
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        outcome, out_dir = execute(rc, cli_output_dir=args.output_dir)
    except (NumericError, DomainError) as exc:
        logger.error("Error durante la corrida %s: %s", rc.mode, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR

    for check in outcome.checks:
        print(check.summary_line())
    print(f"result {'PASS' if outcome.passed else 'FAIL'} ({out_dir})")
    return EXIT_OK if outcome.passed else EXIT_CHECK_FAILED


def main(argv=None):
    create_context(os.environ.get('CURVLAB_CONFIG', 'production'))
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == '__main__':
    sys.exit(main())
