"""
Catálogo de geometrías con geometría diferencial exacta.

Convención: Omega es el interior (bola, elipse, semiespacio superior
{x_N > 0}); la distancia con signo es positiva dentro de Omega y la curvatura
media es positiva para dominios convexos (bola -> 1/R). Los puntos se
aceptan como vector (N,) o como arreglo (n, N); las funciones devuelven un
escalar o un arreglo (n,) respectivamente.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from curvlab.constants import FOOT_MAXITER, FOOT_RTOL, SHAPE_BALL, SHAPE_ELLIPSE, SHAPE_HALFSPACE
from curvlab.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

INTERFACE_TOL = 1e-8


def _points(x, dim):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dim:
        raise DomainError(f"Se esperaban puntos de dimensión {dim}, se recibió forma {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("Los puntos deben ser finitos")
    return arr, single


def _out(values, single):
    values = np.asarray(values, dtype=float)
    if single:
        return float(values[0]) if values.ndim == 1 else values[0]
    return values


@dataclass(frozen=True)
class Ball:
    dim: int
    radius: float

    kind = SHAPE_BALL

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"La dimensión de la bola debe ser un entero >= 2, se recibió {self.dim}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"El radio debe ser > 0, se recibió {self.radius}")

    @property
    def tube_radius(self):
        return float(self.radius)

    @property
    def length_scale(self):
        return float(self.radius)

    def describe(self):
        return f"ball(N={self.dim},R={self.radius:g})"

    def _norms(self, pts):
        return np.linalg.norm(pts, axis=1)

    def signed_distance(self, x):
        pts, single = _points(x, self.dim)
        return _out(self.radius - self._norms(pts), single)

    def _foot(self, pts):
        r = self._norms(pts)
        if np.any(r == 0):
            raise DomainError("El centro de la bola no tiene proyección única a la interfaz")
        return self.radius * pts / r[:, None]

    def outward_normal(self, x):
        pts, single = _points(x, self.dim)
        r = self._norms(pts)
        if np.any(r == 0):
            raise DomainError("La normal no está definida en el centro de la bola")
        return _out(pts / r[:, None], single)

    def curvature(self, feet):
        return np.full(len(feet), 1.0 / self.radius)

    def laplacian_signed_distance(self, x):
        pts, single = _points(x, self.dim)
        _check_tube(self, self.radius - self._norms(pts))
        return _out(-(self.dim - 1) / self._norms(pts), single)

    def project_to_interface(self, x):
        pts, single = _points(x, self.dim)
        _check_tube(self, self.radius - self._norms(pts))
        return _out(self._foot(pts), single)

    def interface_samples(self, n):
        n = _check_count(n)
        if self.dim == 2:
            angles = 2.0 * np.pi * np.arange(n) / n
            return self.radius * np.column_stack([np.cos(angles), np.sin(angles)])
        if self.dim == 3:
            # Espiral de Fibonacci
            k = np.arange(n) + 0.5
            z = 1.0 - 2.0 * k / n
            rho = np.sqrt(1.0 - z * z)
            phi = np.pi * (1.0 + math.sqrt(5.0)) * k
            return self.radius * np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
        rng = np.random.default_rng(0)
        v = rng.standard_normal((n, self.dim))
        return self.radius * v / np.linalg.norm(v, axis=1)[:, None]

    def contains(self, x):
        pts, single = _points(x, self.dim)
        inside = self._norms(pts) < self.radius
        return bool(inside[0]) if single else inside

    def max_abs_laplacian(self, tube):
        if not 0 <= tube < self.radius:
            raise DomainError(f"El tubo debe estar en [0, {self.radius:g}), se recibió {tube}")
        return (self.dim - 1) / (self.radius - tube)


@dataclass(frozen=True)
class HalfSpace:
    dim: int

    kind = SHAPE_HALFSPACE

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"La dimensión del semiespacio debe ser un entero >= 2, se recibió {self.dim}")

    @property
    def tube_radius(self):
        return math.inf

    @property
    def length_scale(self):
        return 1.0

    def describe(self):
        return f"halfspace(N={self.dim})"

    def signed_distance(self, x):
        pts, single = _points(x, self.dim)
        return _out(pts[:, -1], single)

    def outward_normal(self, x):
        pts, single = _points(x, self.dim)
        normals = np.zeros_like(pts)
        normals[:, -1] = -1.0
        return _out(normals, single)

    def curvature(self, feet):
        return np.zeros(len(feet))

    def laplacian_signed_distance(self, x):
        pts, single = _points(x, self.dim)
        return _out(np.zeros(len(pts)), single)

    def project_to_interface(self, x):
        pts, single = _points(x, self.dim)
        feet = pts.copy()
        feet[:, -1] = 0.0
        return _out(feet, single)

    def interface_samples(self, n):
        n = _check_count(n)
        pts = np.zeros((n, self.dim))
        pts[:, 0] = np.linspace(-1.0, 1.0, n) if n > 1 else 0.0
        return pts

    def contains(self, x):
        pts, single = _points(x, self.dim)
        inside = pts[:, -1] > 0
        return bool(inside[0]) if single else inside

    def max_abs_laplacian(self, tube):
        return 0.0


@dataclass(frozen=True)
class Ellipse2D:
    """Elipse centrada en el origen con semiejes a (eje x) >= b (eje y)."""
    a: float
    b: float

    kind = SHAPE_ELLIPSE
    dim = 2

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.a) and self.a >= self.b):
            raise DomainError(f"Se requiere a >= b > 0, se recibió a={self.a}, b={self.b}")

    @property
    def tube_radius(self):
        return self.b ** 2 / self.a

    @property
    def length_scale(self):
        return float(self.b)

    def describe(self):
        return f"ellipse(a={self.a:g},b={self.b:g})"

    def parametric_angle(self, x):
        """Parámetro theta del pie de la normal, P = (a cos theta, b sin theta)."""
        pts, single = _points(x, 2)
        return _out(self._angles(pts), single)

    def _angles(self, pts):
        """
        Ángulo del punto más cercano de la elipse para cada punto.

        En el primer cuadrante el pie es (a r z0 / (u + r - 1), b z1 / u) con
        z0 = X/a, z1 = Y/b, r = (a/b)^2 y u > 0 la única raíz de
        g(u) = (r z0 / (u + r - 1))^2 + (z1 / u)^2 - 1, decreciente en u.
        Bisección geométrica sobre [z1, |(r z0, z1)|].
        Sobre el eje mayor (Y = 0) la solución es cerrada.
        """
        a, b = self.a, self.b
        X = np.abs(pts[:, 0])
        Y = np.abs(pts[:, 1])
        theta = np.zeros(len(X))

        on_axis = Y == 0
        focal = a * X < a * a - b * b
        # Dentro de la evoluta el vértice (a, 0) es un máximo local de la distancia
        cos_t = np.clip(np.where(on_axis & focal, a * X / max(a * a - b * b, 1e-300), 1.0), -1.0, 1.0)
        theta = np.where(on_axis, np.arccos(cos_t), theta)

        off = ~on_axis
        if np.any(off):
            r = (a / b) ** 2
            z0 = X[off] / a
            z1 = Y[off] / b
            lo = z1.copy()
            hi = np.hypot(r * z0, z1)
            converged = hi <= lo * (1.0 + FOOT_RTOL)
            for _ in range(FOOT_MAXITER):
                if np.all(converged):
                    break
                mid = np.sqrt(lo) * np.sqrt(hi)
                g = (r * z0 / (mid + r - 1.0)) ** 2 + (z1 / mid) ** 2 - 1.0
                lo = np.where(g > 0, mid, lo)
                hi = np.where(g > 0, hi, mid)
                converged = hi <= lo * (1.0 + FOOT_RTOL)
            if not np.all(converged):
                idx = np.flatnonzero(off)[int(np.argmin(converged))]
                raise NumericError(
                    f"El pie de la normal no convergió en {FOOT_MAXITER} bisecciones",
                    point=tuple(pts[idx]),
                )
            u = np.sqrt(lo) * np.sqrt(hi)
            theta[off] = np.arctan2(z1 / u, r * z0 / (u + r - 1.0))

        # Restaurar cuadrante
        theta = np.where(pts[:, 0] < 0, np.pi - theta, theta)
        theta = np.where(pts[:, 1] < 0, -theta, theta)
        return theta

    def _foot_and_distance(self, pts):
        theta = self._angles(pts)
        feet = np.column_stack([self.a * np.cos(theta), self.b * np.sin(theta)])
        dist = np.linalg.norm(pts - feet, axis=1)
        inside = (pts[:, 0] / self.a) ** 2 + (pts[:, 1] / self.b) ** 2 < 1.0
        return theta, feet, np.where(inside, dist, -dist)

    def curvature_at_angle(self, theta):
        a, b = self.a, self.b
        s, c = np.sin(theta), np.cos(theta)
        return a * b / (a * a * s * s + b * b * c * c) ** 1.5

    def curvature(self, feet):
        return self.curvature_at_angle(self._angles(np.atleast_2d(feet)))

    def signed_distance(self, x):
        pts, single = _points(x, 2)
        _, _, delta = self._foot_and_distance(pts)
        return _out(delta, single)

    def outward_normal(self, x):
        pts, single = _points(x, 2)
        theta = self._angles(pts)
        n = np.column_stack([np.cos(theta) / self.a, np.sin(theta) / self.b])
        return _out(n / np.linalg.norm(n, axis=1)[:, None], single)

    def laplacian_signed_distance(self, x):
        pts, single = _points(x, 2)
        theta, _, delta = self._foot_and_distance(pts)
        _check_tube(self, delta)
        kappa = self.curvature_at_angle(theta)
        return _out(-kappa / (1.0 - delta * kappa), single)

    def project_to_interface(self, x):
        pts, single = _points(x, 2)
        _, feet, delta = self._foot_and_distance(pts)
        _check_tube(self, delta)
        return _out(feet, single)

    def interface_samples(self, n):
        """n puntos equiespaciados en longitud de arco, empezando en (a, 0)."""
        n = _check_count(n)
        theta = np.linspace(0.0, 2.0 * np.pi, 20001)
        speed = np.hypot(self.a * np.sin(theta), self.b * np.cos(theta))
        arc = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(theta))])
        targets = arc[-1] * np.arange(n) / n
        t = np.interp(targets, arc, theta)
        return np.column_stack([self.a * np.cos(t), self.b * np.sin(t)])

    def contains(self, x):
        pts, single = _points(x, 2)
        inside = (pts[:, 0] / self.a) ** 2 + (pts[:, 1] / self.b) ** 2 < 1.0
        return bool(inside[0]) if single else inside

    def max_abs_laplacian(self, tube):
        kmax = self.a / self.b ** 2
        if not 0 <= tube < 1.0 / kmax:
            raise DomainError(f"El tubo debe estar en [0, {1.0 / kmax:g}), se recibió {tube}")
        return kmax / (1.0 - tube * kmax)


def _check_count(n):
    if int(n) != n or n < 1:
        raise DomainError(f"n debe ser un entero >= 1, se recibió {n}")
    return int(n)


def _check_tube(shape, delta):
    delta = np.atleast_1d(delta)
    if np.any(np.abs(delta) >= shape.tube_radius):
        raise DomainError(
            f"Punto fuera del tubo de validez de {shape.describe()}: "
            f"|delta| = {np.max(np.abs(delta)):.6g} >= radio del tubo {shape.tube_radius:.6g}"
        )


def _check_on_interface(shape, p):
    delta = np.atleast_1d(shape.signed_distance(p))
    if np.any(np.abs(delta) > INTERFACE_TOL):
        raise DomainError(f"El punto no está sobre la interfaz (|delta| = {np.max(np.abs(delta)):.3g})")


def make_shape(kind, **params):
    """Construye una geometría desde su nombre ('ball', 'ellipse', 'halfspace')."""
    if kind == SHAPE_BALL:
        return Ball(dim=int(params.get('dim', 3)), radius=float(params.get('radius', 1.0)))
    if kind == SHAPE_ELLIPSE:
        return Ellipse2D(a=float(params.get('a', 2.0)), b=float(params.get('b', 1.0)))
    if kind == SHAPE_HALFSPACE:
        return HalfSpace(dim=int(params.get('dim', 3)))
    raise DomainError(f"Geometría desconocida: {kind}")


# Operaciones del catálogo

def signed_distance(shape, x):
    return shape.signed_distance(x)


def outward_normal(shape, x):
    return shape.outward_normal(x)


def mean_curvature(shape, p):
    """
    Curvatura media H(p) = (1/(N-1)) sum kappa_j respecto de la normal exterior,
    positiva para dominios convexos.

    Args:
        shape: geometría del catálogo
        p: punto (o puntos) a menos de 1e-8 de la interfaz

    Returns:
        H(p), escalar o arreglo
    """
    _check_on_interface(shape, p)
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    values = shape.curvature(pts)
    return float(values[0]) if np.ndim(p) == 1 else values


def curvature_term(shape, q):
    """(N-1)·H en la convención de las fórmulas de límite: Laplaciano de delta sobre la interfaz."""
    return -(shape.dim - 1) * mean_curvature(shape, q)


def laplacian_signed_distance(shape, x):
    return shape.laplacian_signed_distance(x)


def project_to_interface(shape, x):
    return shape.project_to_interface(x)


def interface_samples(shape, n):
    return shape.interface_samples(n)


def contains(shape, x):
    return shape.contains(x)


def max_abs_laplacian(shape, tube):
    """max |Laplaciano de delta| sobre el tubo {|delta| <= tube}."""
    return shape.max_abs_laplacian(tube)


def check_in_tube(shape, x):
    """Devuelve delta(x) tras verificar que x está dentro del tubo de validez."""
    delta = shape.signed_distance(x)
    _check_tube(shape, delta)
    return delta
