"""
Solvers del problema de Helmholtz modificado bifásico

    -div(sigma grad U) + lambda U = lambda chi_Omega  en R^N,

con condiciones de transmisión en la interfaz: oráculo cerrado de Bessel en
bolas, volúmenes finitos radiales, volúmenes finitos cartesianos 2D y un
solver ajustado a la interfaz en coordenadas elípticas para Ellipse2D.

Todas las discretizaciones comparten DiffusionOperator (rigidez, masa
concentrada y masa interior), que también usa el módulo parabolic.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import pandas as pd
from scipy import linalg, sparse
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import linalg as splinalg
from scipy.special import gammaln

from curvlab.closedforms import phi_profile, psi_lambda
from curvlab.constants import (
    CG_MAXITER,
    CG_RTOL,
    FINEST_SPACING_FRACTION,
    MESH_STRETCH,
    SIDE_INSIDE,
    TRUNCATION_DECAY_LENGTHS,
)
from curvlab.errors import DomainError, NumericError
from curvlab.geometry import Ball, Ellipse2D, HalfSpace
from curvlab.specfun import BesselOrder, log_bessel_i, log_bessel_k
from curvlab.utils import debug_log_function

logger = logging.getLogger(__name__)

DIRECT_TOLERANCE = 1e-10
BANDED_TOLERANCE = 1e-12
ELLIPSE_FINEST_FRACTION = 0.01
ELLIPSE_STRETCH = 1.01
ELLIPSE_NU_NODES = 129
DEFAULT_CELLS = 512
SUPERSAMPLE = 8


def _check_lambda(lam):
    if not (isinstance(lam, (int, float, np.floating)) and math.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda debe ser un real > 0, se recibió {lam!r}")
    return float(lam)


def graded_offsets(extent, h_min, stretch):
    """Distancias 0 = d_0 < d_1 < ... = extent con d_{k+1} - d_k = h_min stretch^k."""
    if h_min <= 0 or stretch < 1:
        raise DomainError(f"Se requiere h_min > 0 y stretch >= 1 (h_min={h_min}, stretch={stretch})")
    offsets = [0.0]
    h = h_min
    while offsets[-1] + h < extent:
        offsets.append(offsets[-1] + h)
        h *= stretch
    if len(offsets) > 1 and extent - offsets[-1] < 0.5 * h / stretch:
        offsets[-1] = extent
    else:
        offsets.append(extent)
    return np.asarray(offsets)


# Mallas

@dataclass(frozen=True)
class RadialGrid:
    """Malla radial r_0 = 0 < ... < r_m = R_max con un nodo exactamente en r = R."""
    nodes: np.ndarray
    interface_index: int
    stretch: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 3:
            raise DomainError("La malla radial necesita al menos 3 nodos")
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise DomainError("Los nodos radiales deben empezar en 0 y ser estrictamente crecientes")
        if not 0 < self.interface_index < len(nodes) - 1:
            raise DomainError("El nodo de interfaz debe ser interior")
        if self.stretch < 1:
            raise DomainError(f"stretch debe ser >= 1, se recibió {self.stretch}")
        object.__setattr__(self, 'nodes', nodes)

    @classmethod
    def build(cls, radius, h_min, r_max, stretch=MESH_STRETCH):
        if r_max <= radius:
            raise DomainError(f"r_max ({r_max}) debe superar el radio ({radius})")
        h_min = min(h_min, radius / 20.0)
        inner = graded_offsets(radius, h_min, stretch)
        outer = graded_offsets(r_max - radius, h_min, stretch)
        nodes = np.concatenate([radius - inner[::-1], radius + outer[1:]])
        nodes[0] = 0.0
        nodes[len(inner) - 1] = radius
        return cls(nodes=nodes, interface_index=len(inner) - 1, stretch=stretch)

    @classmethod
    def graded(cls, ball, cond, lam, stretch=MESH_STRETCH, finest_fraction=FINEST_SPACING_FRACTION,
               decay_lengths=TRUNCATION_DECAY_LENGTHS):
        """Malla por defecto del problema elíptico: resuelve la capa de ancho sqrt(sigma/lambda)."""
        lam = _check_lambda(lam)
        h_min = finest_fraction * math.sqrt(cond.mu / lam)
        r_max = ball.radius + decay_lengths * math.sqrt(cond.sigma_minus / lam)
        return cls.build(ball.radius, h_min, r_max, stretch)

    @property
    def radius(self):
        return float(self.nodes[self.interface_index])

    @property
    def r_max(self):
        return float(self.nodes[-1])

    @property
    def finest_spacing(self):
        return float(np.min(np.diff(self.nodes)))

    def describe(self):
        return f"radial(m={len(self.nodes)},hmin={self.finest_spacing:.3g},stretch={self.stretch:g})"

    def refined(self):
        """Inserta puntos medios: divide exactamente a la mitad cada intervalo."""
        mids = 0.5 * (self.nodes[1:] + self.nodes[:-1])
        nodes = np.empty(2 * len(self.nodes) - 1)
        nodes[0::2] = self.nodes
        nodes[1::2] = mids
        return RadialGrid(nodes=nodes, interface_index=2 * self.interface_index,
                          stretch=math.sqrt(self.stretch))

    def coarsened(self):
        """Conserva un nodo de cada dos contando desde la interfaz (incluye 0 y r_max)."""
        keep = self.coarse_indices()
        interface = int(np.searchsorted(keep, self.interface_index))
        return RadialGrid(nodes=self.nodes[keep], interface_index=interface, stretch=self.stretch ** 2)

    def coarse_indices(self):
        """Índices de la malla fina que sobreviven en coarsened()."""
        idx = np.arange(len(self.nodes))
        keep = idx[(idx - self.interface_index) % 2 == 0]
        if keep[0] != 0:
            keep = np.concatenate([[0], keep])
        if keep[-1] != len(self.nodes) - 1:
            keep = np.concatenate([keep, [len(self.nodes) - 1]])
        return keep


@dataclass(frozen=True)
class CartesianGrid2D:
    """Caja [x0, x0 + nx h] x [y0, y0 + ny h] con celdas cuadradas de lado h."""
    x0: float
    y0: float
    nx: int
    ny: int
    h: float
    margin: float = 0.0

    def __post_init__(self):
        if self.h <= 0 or self.nx < 2 or self.ny < 2:
            raise DomainError(f"Malla cartesiana inválida (nx={self.nx}, ny={self.ny}, h={self.h})")

    @classmethod
    def for_shape(cls, shape, cond, lam=None, h=None, cells=None, margin=None,
                  margin_factor=TRUNCATION_DECAY_LENGTHS):
        """
        Caja centrada que contiene la geometría más un margen exterior.

        El margen por defecto es margin_factor * sqrt(sigma_minus / lambda); h se
        fija directamente o a partir del número de celdas del lado mayor.
        """
        half_x, half_y = _planar_extent(shape)
        if margin is None:
            if lam is None:
                raise DomainError("Se requiere lambda o un margen explícito")
            margin = margin_factor * math.sqrt(cond.sigma_minus / _check_lambda(lam))
        Lx, Ly = half_x + margin, half_y + margin
        if h is None:
            h = 2.0 * max(Lx, Ly) / (cells or DEFAULT_CELLS)
        nx = int(math.ceil(2.0 * Lx / h))
        ny = int(math.ceil(2.0 * Ly / h))
        return cls(x0=-0.5 * nx * h, y0=-0.5 * ny * h, nx=nx, ny=ny, h=float(h), margin=float(margin))

    @property
    def xc(self):
        return self.x0 + (np.arange(self.nx) + 0.5) * self.h

    @property
    def yc(self):
        return self.y0 + (np.arange(self.ny) + 0.5) * self.h

    def describe(self):
        return f"cartesian({self.nx}x{self.ny},h={self.h:.3g})"


def _planar_extent(shape):
    if isinstance(shape, Ellipse2D):
        return shape.a, shape.b
    if isinstance(shape, Ball) and shape.dim == 2:
        return shape.radius, shape.radius
    raise DomainError(f"La malla 2D requiere una elipse o una bola en 2D, se recibió {shape.describe()}")


@dataclass(frozen=True)
class EllipticCoordGrid:
    """
    Malla en coordenadas elípticas x = c cosh(mu) cos(nu), y = c sinh(mu) sin(nu)
    sobre el cuarto de dominio [0, mu_max] x [0, pi/2]; la interfaz es la línea
    de nodos mu = mu0 con tanh(mu0) = b/a.
    """
    shape: Ellipse2D
    mu_nodes: np.ndarray
    nu_nodes: np.ndarray
    interface_index: int

    @classmethod
    def for_shape(cls, shape, cond, lam, finest_fraction=ELLIPSE_FINEST_FRACTION, stretch=ELLIPSE_STRETCH,
                  nu_nodes=ELLIPSE_NU_NODES, decay_lengths=TRUNCATION_DECAY_LENGTHS):
        if not isinstance(shape, Ellipse2D) or not shape.a > shape.b:
            raise DomainError("Las coordenadas elípticas requieren una Ellipse2D con a > b")
        lam = _check_lambda(lam)
        c = math.sqrt(shape.a ** 2 - shape.b ** 2)
        mu0 = math.atanh(shape.b / shape.a)
        mu_max = math.acosh((shape.a + decay_lengths * math.sqrt(cond.sigma_minus / lam)) / c)
        # |dx/dmu| = sqrt(J) vale a lo sumo a sobre la interfaz
        h_min = finest_fraction * math.sqrt(cond.mu / lam) / shape.a
        h_min = min(h_min, mu0 / 20.0)
        inner = graded_offsets(mu0, h_min, stretch)
        outer = graded_offsets(mu_max - mu0, h_min, stretch)
        mu = np.concatenate([mu0 - inner[::-1], mu0 + outer[1:]])
        mu[0] = 0.0
        mu[len(inner) - 1] = mu0
        nu = np.linspace(0.0, 0.5 * np.pi, int(nu_nodes))
        return cls(shape=shape, mu_nodes=mu, nu_nodes=nu, interface_index=len(inner) - 1)

    @property
    def focal(self):
        return math.sqrt(self.shape.a ** 2 - self.shape.b ** 2)

    @property
    def mu0(self):
        return float(self.mu_nodes[self.interface_index])

    @property
    def finest_spacing(self):
        return float(np.min(np.diff(self.mu_nodes)))

    def describe(self):
        return f"elliptic({len(self.mu_nodes)}x{len(self.nu_nodes)},hmu={self.finest_spacing:.3g})"

    def to_coords(self, points):
        """Mapea puntos (x, y) a (mu, nu) plegados al primer cuadrante."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.arccosh((pts[:, 0] + 1j * pts[:, 1]) / self.focal)
        mu = np.abs(w.real)
        nu = np.abs(w.imag)
        nu = np.where(nu > 0.5 * np.pi, np.pi - nu, nu)
        return mu, nu

    def to_cartesian(self, mu, nu):
        c = self.focal
        return c * np.cosh(mu) * np.cos(nu), c * np.sinh(mu) * np.sin(nu)


# Operador de difusión discreto

@dataclass
class DiffusionOperator:
    """
    Discretización S u (rigidez simétrica), M (masa concentrada diagonal) e
    inside_mass (parte de M dentro de Omega). Elíptico: (S + lambda M) U =
    lambda inside_mass. Parabólico: M u' = -S u con u(0) = inside_mass / M.
    """
    stiffness: sparse.csr_matrix
    mass: np.ndarray
    inside_mass: np.ndarray
    method: str = 'direct'

    @property
    def size(self):
        return len(self.mass)

    def initial_state(self):
        return self.inside_mass / self.mass

    def heat_content(self, u):
        return float(self.mass @ u)

    def apply(self, u):
        return self.stiffness @ u

    def solve_shifted(self, mass_coeff, stiff_coeff, rhs, x0=None):
        """Resuelve (mass_coeff M + stiff_coeff S) x = rhs."""
        if self.method == 'banded':
            return self._solve_banded(mass_coeff, stiff_coeff, rhs)
        matrix = (stiff_coeff * self.stiffness + sparse.diags(mass_coeff * self.mass)).tocsr()
        if self.method == 'cg':
            return self._solve_cg(matrix, rhs, x0)
        try:
            x = splinalg.spsolve(matrix.tocsc(), rhs)
        except (RuntimeError, ValueError) as e:
            raise NumericError(f"Falla del solver directo disperso: {e}") from e
        if not np.all(np.isfinite(x)):
            raise NumericError("El solver directo disperso devolvió valores no finitos")
        return x

    def _solve_banded(self, mass_coeff, stiff_coeff, rhs):
        n = self.size
        ab = np.zeros((3, n))
        ab[0, 1:] = stiff_coeff * self.stiffness.diagonal(1)
        ab[1, :] = stiff_coeff * self.stiffness.diagonal(0) + mass_coeff * self.mass
        ab[2, :-1] = stiff_coeff * self.stiffness.diagonal(-1)
        try:
            x = linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
        except (linalg.LinAlgError, ValueError) as e:
            raise NumericError(f"Falla del solver tridiagonal (M-matriz esperada): {e}") from e
        if not np.all(np.isfinite(x)):
            raise NumericError("El solver tridiagonal devolvió valores no finitos")
        return x

    def _solve_cg(self, matrix, rhs, x0):
        diag = matrix.diagonal()
        precond = sparse.diags(1.0 / diag)
        x, info = splinalg.cg(matrix, rhs, x0=x0, rtol=CG_RTOL, atol=0.0, maxiter=CG_MAXITER, M=precond)
        if info != 0:
            residual = float(np.linalg.norm(matrix @ x - rhs) / max(np.linalg.norm(rhs), 1e-300))
            raise NumericError(
                f"Gradiente conjugado no convergió (info={info}, residuo relativo={residual:.3e})",
                residual=residual,
            )
        return x

    def condition_bound(self, mass_coeff, stiff_coeff):
        """Cota grosera del número de condición de mass_coeff M + stiff_coeff S (Gershgorin)."""
        abs_rows = np.asarray(abs(self.stiffness).sum(axis=1)).ravel()
        upper = np.max(stiff_coeff * abs_rows + mass_coeff * self.mass)
        lower = np.min(mass_coeff * self.mass)
        return upper / lower


def _tridiagonal(diag, off):
    return sparse.diags([off, diag, off], [-1, 0, 1], format='csr')


def assemble_radial(ball, cond, grid):
    """
    Volúmenes finitos centrados en nodos con pesos r^{N-1}; el volumen de control
    del nodo de interfaz se parte para chi_Omega y U = 0 en r_max.
    """
    N = ball.dim
    r = grid.nodes
    R = grid.radius
    faces = 0.5 * (r[1:] + r[:-1])
    sigma_face = np.where(faces < R, cond.sigma_plus, cond.sigma_minus)
    coeff = sigma_face * faces ** (N - 1) / np.diff(r)

    lo = np.concatenate([[0.0], faces[:-1]])
    hi = faces
    mass = (hi ** N - lo ** N) / N
    inside = (np.minimum(hi, R) ** N - np.minimum(lo, R) ** N) / N

    diag = coeff.copy()
    diag[1:] += coeff[:-1]
    stiffness = _tridiagonal(diag, -coeff[:-1])
    return DiffusionOperator(stiffness=stiffness, mass=mass, inside_mass=inside, method='banded')


def _harmonic(a, b):
    return 2.0 * a * b / (a + b)


def cell_phase(shape, grid, supersample=SUPERSAMPLE):
    """
    Conductividad por muestreo en el centro de celda y fracción de celda dentro
    de Omega (submuestreo supersample x supersample en celdas cortadas).
    """
    X, Y = np.meshgrid(grid.xc, grid.yc, indexing='ij')
    centers = np.column_stack([X.ravel(), Y.ravel()])
    inside_center = shape.contains(centers).reshape(grid.nx, grid.ny)

    xn = grid.x0 + np.arange(grid.nx + 1) * grid.h
    yn = grid.y0 + np.arange(grid.ny + 1) * grid.h
    XN, YN = np.meshgrid(xn, yn, indexing='ij')
    corners = shape.contains(np.column_stack([XN.ravel(), YN.ravel()])).reshape(grid.nx + 1, grid.ny + 1)
    corner_sum = (corners[:-1, :-1].astype(int) + corners[1:, :-1] + corners[:-1, 1:] + corners[1:, 1:])
    fraction = (corner_sum == 4).astype(float)
    cut = (corner_sum > 0) & (corner_sum < 4)
    if np.any(cut):
        ci, cj = np.nonzero(cut)
        offs = (np.arange(supersample) + 0.5) / supersample * grid.h
        ox, oy = np.meshgrid(offs, offs, indexing='ij')
        sx = (grid.x0 + ci * grid.h)[:, None] + ox.ravel()[None, :]
        sy = (grid.y0 + cj * grid.h)[:, None] + oy.ravel()[None, :]
        sub = shape.contains(np.column_stack([sx.ravel(), sy.ravel()])).reshape(len(ci), -1)
        fraction[ci, cj] = sub.mean(axis=1)
    return inside_center, fraction


def assemble_cartesian(shape, cond, grid, method='cg'):
    """Volúmenes finitos 5 puntos con caras de media armónica y U = 0 en la caja."""
    nx, ny = grid.nx, grid.ny
    inside_center, fraction = cell_phase(shape, grid)
    sigma = np.where(inside_center, cond.sigma_plus, cond.sigma_minus)
    index = np.arange(nx * ny).reshape(nx, ny)

    cx = _harmonic(sigma[:-1, :], sigma[1:, :])
    cy = _harmonic(sigma[:, :-1], sigma[:, 1:])

    diag = np.zeros((nx, ny))
    diag[:-1, :] += cx
    diag[1:, :] += cx
    diag[:, :-1] += cy
    diag[:, 1:] += cy
    # Dirichlet en las caras de la caja: distancia h/2 al centro
    diag[0, :] += 2.0 * sigma[0, :]
    diag[-1, :] += 2.0 * sigma[-1, :]
    diag[:, 0] += 2.0 * sigma[:, 0]
    diag[:, -1] += 2.0 * sigma[:, -1]

    rows = np.concatenate([index.ravel(), index[:-1, :].ravel(), index[1:, :].ravel(),
                           index[:, :-1].ravel(), index[:, 1:].ravel()])
    cols = np.concatenate([index.ravel(), index[1:, :].ravel(), index[:-1, :].ravel(),
                           index[:, 1:].ravel(), index[:, :-1].ravel()])
    vals = np.concatenate([diag.ravel(), -cx.ravel(), -cx.ravel(), -cy.ravel(), -cy.ravel()])
    stiffness = sparse.coo_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny)).tocsr()

    cell_area = grid.h ** 2
    mass = np.full(nx * ny, cell_area)
    inside = cell_area * fraction.ravel()
    return DiffusionOperator(stiffness=stiffness, mass=mass, inside_mass=inside, method=method)


def _sinh2_integral(mu):
    return 0.25 * np.sinh(2.0 * mu) - 0.5 * mu


def _sin2_integral(nu):
    return 0.5 * nu - 0.25 * np.sin(2.0 * nu)


def assemble_elliptic_coords(shape, cond, grid):
    """
    Volúmenes finitos en (mu, nu): -[(sigma U_mu)_mu + (sigma U_nu)_nu] + lambda J U = lambda J chi,
    J = c^2 (sinh^2 mu + sin^2 nu). Neumann en mu = 0, nu = 0 y nu = pi/2 (simetrías), U = 0 en mu_max.
    """
    mu, nu = grid.mu_nodes, grid.nu_nodes
    mu0 = grid.mu0
    c2 = grid.focal ** 2
    m = len(mu) - 1          # el último nodo es Dirichlet
    n = len(nu)

    mu_faces = 0.5 * (mu[1:] + mu[:-1])
    mu_lo = np.concatenate([[0.0], mu_faces[:-1]])
    mu_hi = mu_faces
    nu_faces = 0.5 * (nu[1:] + nu[:-1])
    nu_lo = np.concatenate([[0.0], nu_faces])
    nu_hi = np.concatenate([nu_faces, [0.5 * np.pi]])
    dnu = nu_hi - nu_lo
    dmu = mu_hi - mu_lo

    sigma_seg = np.where(mu_faces < mu0, cond.sigma_plus, cond.sigma_minus)
    coeff_mu = sigma_seg[:, None] * dnu[None, :] / np.diff(mu)[:, None]          # (m, n)
    sigma_int = (cond.sigma_plus * np.clip(np.minimum(mu_hi, mu0) - mu_lo, 0.0, None)
                 + cond.sigma_minus * np.clip(mu_hi - np.maximum(mu_lo, mu0), 0.0, None))
    coeff_nu = sigma_int[:, None] / np.diff(nu)[None, :]                           # (m, n-1)

    index = np.arange(m * n).reshape(m, n)
    diag = np.zeros((m, n))
    diag += coeff_mu                      # cara superior (incluye la Dirichlet del último)
    diag[1:, :] += coeff_mu[:-1, :]
    diag[:, :-1] += coeff_nu
    diag[:, 1:] += coeff_nu

    rows = np.concatenate([index.ravel(), index[:-1, :].ravel(), index[1:, :].ravel(),
                           index[:, :-1].ravel(), index[:, 1:].ravel()])
    cols = np.concatenate([index.ravel(), index[1:, :].ravel(), index[:-1, :].ravel(),
                           index[:, 1:].ravel(), index[:, :-1].ravel()])
    off_mu = -coeff_mu[:-1, :].ravel()
    off_nu = -coeff_nu.ravel()
    vals = np.concatenate([diag.ravel(), off_mu, off_mu, off_nu, off_nu])
    stiffness = sparse.coo_matrix((vals, (rows, cols)), shape=(m * n, m * n)).tocsr()

    sh = _sinh2_integral(mu_hi) - _sinh2_integral(mu_lo)
    sn = _sin2_integral(nu_hi) - _sin2_integral(nu_lo)
    mass = c2 * (sh[:, None] * dnu[None, :] + dmu[:, None] * sn[None, :])
    mu_hi_in = np.minimum(mu_hi, mu0)
    sh_in = np.clip(_sinh2_integral(mu_hi_in) - _sinh2_integral(mu_lo), 0.0, None)
    dmu_in = np.clip(mu_hi_in - mu_lo, 0.0, None)
    inside = c2 * (sh_in[:, None] * dnu[None, :] + dmu_in[:, None] * sn[None, :])
    return DiffusionOperator(stiffness=stiffness, mass=mass.ravel(), inside_mass=inside.ravel(),
                             method='direct')


# Campos y soluciones

@dataclass
class Field:
    """Solución numérica U_lambda con su malla y metadatos."""
    kind: str
    grid: object
    values: np.ndarray
    lam: float
    cond: object
    shape: object
    tolerance: float = BANDED_TOLERANCE
    extra: dict = field(default_factory=dict)

    @property
    def mesh_size(self):
        if self.kind == 'cartesian':
            return self.grid.h
        return self.grid.finest_spacing

    def header(self):
        return {
            'lambda': self.lam,
            'sigma_plus': self.cond.sigma_plus,
            'sigma_minus': self.cond.sigma_minus,
            'shape': self.shape.describe(),
        }

    @cached_property
    def _interpolator(self):
        if self.kind == 'cartesian':
            return RegularGridInterpolator((self.grid.xc, self.grid.yc), self.values,
                                           bounds_error=False, fill_value=None)
        if self.kind == 'elliptic':
            return RegularGridInterpolator((self.grid.mu_nodes, self.grid.nu_nodes), self.values,
                                           bounds_error=False, fill_value=0.0)
        return None

    def evaluate(self, points):
        """U en puntos (n, N); cero fuera del dominio de cómputo."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        single = np.ndim(points) == 1
        if self.kind == 'radial':
            r = np.linalg.norm(pts, axis=1)
            out = np.interp(r, self.grid.nodes, self.values, right=0.0)
        elif self.kind == 'cartesian':
            g = self.grid
            out = self._interpolator(pts)
            outside = ((pts[:, 0] < g.x0) | (pts[:, 0] > g.x0 + g.nx * g.h)
                       | (pts[:, 1] < g.y0) | (pts[:, 1] > g.y0 + g.ny * g.h))
            out = np.where(outside, 0.0, out)
        else:
            mu, nu = self.grid.to_coords(pts)
            out = self._interpolator(np.column_stack([mu, nu]))
        return float(out[0]) if single else out

    def sample_values(self):
        return np.asarray(self.values).ravel()

    def sample_locations(self):
        """Coordenadas de cada valor en sample_values() (para reportar testigos)."""
        if self.kind == 'radial':
            return self.grid.nodes[:, None]
        if self.kind == 'cartesian':
            X, Y = np.meshgrid(self.grid.xc, self.grid.yc, indexing='ij')
            return np.column_stack([X.ravel(), Y.ravel()])
        M, V = np.meshgrid(self.grid.mu_nodes, self.grid.nu_nodes, indexing='ij')
        x, y = self.grid.to_cartesian(M.ravel(), V.ravel())
        return np.column_stack([x, y])

    def to_frame(self):
        if self.kind == 'radial':
            return pd.DataFrame({'r': self.grid.nodes, 'value': self.values})
        loc = self.sample_locations()
        return pd.DataFrame({'x': loc[:, 0], 'y': loc[:, 1], 'value': self.sample_values()})


@dataclass(frozen=True)
class BesselSolution:
    """
    Solución radial cerrada: U = 1 + A g_in(r)/g_in(R) dentro y U = B g_out(r)/g_out(R)
    fuera, g_in = r^{-nu} I_nu(k_+ r), g_out = r^{-nu} K_nu(k_- r), nu = N/2 - 1.
    """
    shape: Ball
    cond: object
    lam: float
    A: float
    B: float

    tolerance = 1e-14

    @property
    def order(self):
        return BesselOrder.for_dimension(self.shape.dim)

    @property
    def k_plus(self):
        return math.sqrt(self.lam / self.cond.sigma_plus)

    @property
    def k_minus(self):
        return math.sqrt(self.lam / self.cond.sigma_minus)

    @property
    def interface_value(self):
        return self.B

    def header(self):
        return {
            'lambda': self.lam,
            'sigma_plus': self.cond.sigma_plus,
            'sigma_minus': self.cond.sigma_minus,
            'shape': self.shape.describe(),
        }

    def _split(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise DomainError("Los radios deben ser finitos y >= 0")
        R = self.shape.radius
        inside = r <= R
        safe = np.where(r > 0, r, R)
        return r, R, inside, safe

    def _ratios(self, safe, R, order_shift=0.0):
        nu = self.order.nu
        kp, km = self.k_plus, self.k_minus
        scale = nu * np.log(R / safe)
        in_ratio = np.exp(scale + log_bessel_i(nu + order_shift, kp * safe) - log_bessel_i(nu, kp * R))
        out_ratio = np.exp(scale + log_bessel_k(nu + order_shift, km * safe) - log_bessel_k(nu, km * R))
        return in_ratio, out_ratio

    def value(self, r):
        """U_lambda(r) para r >= 0."""
        r_arr, R, inside, safe = self._split(r)
        in_ratio, out_ratio = self._ratios(safe, R)
        nu = self.order.nu
        kp = self.k_plus
        # Límite r -> 0 de r^{-nu} I_nu(k r) = (k/2)^nu / Gamma(nu + 1)
        at_zero = math.exp(nu * math.log(kp * R / 2.0) - gammaln(nu + 1.0) - log_bessel_i(nu, kp * R))
        in_ratio = np.where(r_arr > 0, in_ratio, at_zero)
        out = np.where(inside, 1.0 + self.A * in_ratio, self.B * out_ratio)
        return float(out) if np.ndim(r) == 0 else out

    def derivative(self, r, side=SIDE_INSIDE):
        """U'(r) para r > 0; en r = R el lado elige la derivada lateral."""
        r_arr, R, inside, safe = self._split(r)
        if np.any(r_arr <= 0):
            raise DomainError("La derivada se evalúa en r > 0")
        inside = np.where(r_arr == R, side == SIDE_INSIDE, inside)
        in_ratio, out_ratio = self._ratios(safe, R, order_shift=1.0)
        out = np.where(inside, self.A * self.k_plus * in_ratio, -self.B * self.k_minus * out_ratio)
        return float(out) if np.ndim(r) == 0 else out

    def second_derivative(self, r, side=SIDE_INSIDE):
        r_arr, R, inside, safe = self._split(r)
        if np.any(r_arr <= 0):
            raise DomainError("La derivada se evalúa en r > 0")
        inside = np.where(r_arr == R, side == SIDE_INSIDE, inside)
        two_nu_1 = 2.0 * self.order.nu + 1.0
        in0, out0 = self._ratios(safe, R)
        in1, out1 = self._ratios(safe, R, order_shift=1.0)
        kp, km = self.k_plus, self.k_minus
        u_in = self.A * kp * (kp * in0 - two_nu_1 / safe * in1)
        u_out = self.B * km * (km * out0 + two_nu_1 / safe * out1)
        out = np.where(inside, u_in, u_out)
        return float(out) if np.ndim(r) == 0 else out

    def residual(self, r):
        """[-sigma (U'' + (N-1)/r U') + lambda U - lambda chi] / lambda en radios fuera de la interfaz."""
        r_arr = np.asarray(r, dtype=float)
        R = self.shape.radius
        inside = r_arr < R
        sigma = np.where(inside, self.cond.sigma_plus, self.cond.sigma_minus)
        lap = self.second_derivative(r_arr) + (self.shape.dim - 1) / r_arr * self.derivative(r_arr)
        res = -sigma * lap + self.lam * self.value(r_arr) - self.lam * inside
        return res / self.lam

    def evaluate(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        values = self.value(np.linalg.norm(pts, axis=1))
        return float(values[0]) if np.ndim(points) == 1 else values

    def sample_radii(self, n=400):
        R = self.shape.radius
        span = R + TRUNCATION_DECAY_LENGTHS / self.k_minus
        return np.linspace(0.0, span, n)

    def sample_values(self):
        return self.value(self.sample_radii())

    def sample_locations(self):
        return self.sample_radii()[:, None]

    def to_frame(self, radii=None):
        radii = self.sample_radii() if radii is None else np.asarray(radii, dtype=float)
        return pd.DataFrame({'r': radii, 'value': self.value(radii)})


@dataclass(frozen=True)
class FlatSolution:
    """Semiespacio: U_lambda = Psi_lambda es la solución exacta (Laplaciano de delta nulo)."""
    shape: HalfSpace
    cond: object
    lam: float

    tolerance = 1e-14

    def evaluate(self, points):
        return psi_lambda(points, self.lam, self.shape, self.cond)

    def header(self):
        return {
            'lambda': self.lam,
            'sigma_plus': self.cond.sigma_plus,
            'sigma_minus': self.cond.sigma_minus,
            'shape': self.shape.describe(),
        }

    def sample_locations(self):
        ell = math.sqrt(self.cond.M / self.lam)
        heights = np.linspace(-TRUNCATION_DECAY_LENGTHS * ell, TRUNCATION_DECAY_LENGTHS * ell, 401)
        pts = np.zeros((len(heights), self.shape.dim))
        pts[:, -1] = heights
        return pts

    def sample_values(self):
        heights = self.sample_locations()[:, -1]
        return phi_profile(math.sqrt(self.lam) * heights, self.cond)


@debug_log_function
def solve_radial_bessel(ball, cond, lam):
    """
    Oráculo cerrado en la bola (N = 2, 3). Los coeficientes A, B resuelven
    continuidad y continuidad de flujo en r = R con cocientes escalados de Bessel.
    """
    lam = _check_lambda(lam)
    if not isinstance(ball, Ball):
        raise DomainError("El oráculo de Bessel requiere una bola")
    nu = BesselOrder.for_dimension(ball.dim).nu
    R = ball.radius
    kp = math.sqrt(lam / cond.sigma_plus)
    km = math.sqrt(lam / cond.sigma_minus)
    rho_in = kp * math.exp(log_bessel_i(nu + 1.0, kp * R) - log_bessel_i(nu, kp * R))
    rho_out = -km * math.exp(log_bessel_k(nu + 1.0, km * R) - log_bessel_k(nu, km * R))
    denominator = cond.sigma_plus * rho_in - cond.sigma_minus * rho_out
    if not (math.isfinite(denominator) and denominator > 0):
        raise NumericError(f"Sistema de acoplamiento singular (denominador={denominator})")
    A = cond.sigma_minus * rho_out / denominator
    logger.debug("Bessel lambda=%g: A=%.17g B=%.17g", lam, A, 1.0 + A)
    return BesselSolution(shape=ball, cond=cond, lam=lam, A=A, B=1.0 + A)


@debug_log_function
def solve_radial_fd(ball, cond, lam, grid=None):
    """Volúmenes finitos radiales sobre una malla ajustada a la interfaz."""
    lam = _check_lambda(lam)
    if not isinstance(ball, Ball):
        raise DomainError("El solver radial requiere una bola")
    grid = grid or RadialGrid.graded(ball, cond, lam)
    if abs(grid.radius - ball.radius) > 1e-14 * ball.radius:
        raise DomainError("La malla no tiene un nodo en la interfaz r = R")
    op = assemble_radial(ball, cond, grid)
    u = op.solve_shifted(lam, 1.0, lam * op.inside_mass)
    values = np.concatenate([u, [0.0]])
    return Field(kind='radial', grid=grid, values=values, lam=lam, cond=cond, shape=ball,
                 tolerance=BANDED_TOLERANCE)


@debug_log_function
def solve_cartesian_2d(shape, cond, lam, grid=None, method='cg'):
    """Volúmenes finitos 2D con conductividad muestreada en centros de celda."""
    lam = _check_lambda(lam)
    grid = grid or CartesianGrid2D.for_shape(shape, cond, lam)
    min_margin = math.sqrt(cond.sigma_minus / lam)
    if grid.margin < min_margin:
        logger.warning("Margen de la caja %.3g menor que la longitud de decaimiento %.3g",
                       grid.margin, min_margin)
    op = assemble_cartesian(shape, cond, grid, method=method)
    u = op.solve_shifted(lam, 1.0, lam * op.inside_mass)
    tolerance = DIRECT_TOLERANCE
    if method == 'cg':
        tolerance = max(DIRECT_TOLERANCE, CG_RTOL * op.condition_bound(lam, 1.0))
    logger.info("Solve cartesiano %s lambda=%g completado", grid.describe(), lam)
    return Field(kind='cartesian', grid=grid, values=u.reshape(grid.nx, grid.ny), lam=lam, cond=cond,
                 shape=shape, tolerance=tolerance)


@debug_log_function
def solve_ellipse_fitted(shape, cond, lam, grid=None):
    """Solver ajustado a la interfaz de la elipse en coordenadas elípticas."""
    lam = _check_lambda(lam)
    grid = grid or EllipticCoordGrid.for_shape(shape, cond, lam)
    op = assemble_elliptic_coords(shape, cond, grid)
    u = op.solve_shifted(lam, 1.0, lam * op.inside_mass)
    values = np.vstack([u.reshape(len(grid.mu_nodes) - 1, len(grid.nu_nodes)),
                        np.zeros((1, len(grid.nu_nodes)))])
    logger.info("Solve en coordenadas elípticas %s lambda=%g completado", grid.describe(), lam)
    return Field(kind='elliptic', grid=grid, values=values, lam=lam, cond=cond, shape=shape,
                 tolerance=DIRECT_TOLERANCE)


# Condiciones de transmisión

@dataclass(frozen=True)
class TransmissionReport:
    flux_residual: float
    jump_residual: float
    mesh_size: float
    n_points: int

    def to_dict(self):
        return {
            'flux_residual': self.flux_residual,
            'jump_residual': self.jump_residual,
            'mesh_size': self.mesh_size,
            'n_points': self.n_points,
        }


def _three_point_derivative(x, y, at):
    x0, x1, x2 = x
    w0 = ((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2))
    w1 = ((at - x0) + (at - x2)) / ((x1 - x0) * (x1 - x2))
    w2 = ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1))
    return w0 * y[0] + w1 * y[1] + w2 * y[2]


def transmission_residual(solution, shape, cond, order=1, n_points=64):
    """
    max |sigma_+ d_nu U^+ - sigma_- d_nu U^-| y max |U^+ - U^-| sobre la interfaz,
    con diferencias laterales (order = 1: dos puntos, order = 2: tres puntos, sólo radial).
    """
    if isinstance(solution, BesselSolution):
        R = shape.radius
        flux = abs(cond.sigma_plus * solution.derivative(R, SIDE_INSIDE)
                   - cond.sigma_minus * solution.derivative(R, '-'))
        return TransmissionReport(flux_residual=flux, jump_residual=0.0, mesh_size=0.0, n_points=1)

    if solution.kind == 'radial':
        r, u, i = solution.grid.nodes, solution.values, solution.grid.interface_index
        if order == 2:
            d_in = _three_point_derivative(r[i - 2:i + 1], u[i - 2:i + 1], r[i])
            d_out = _three_point_derivative(r[i:i + 3], u[i:i + 3], r[i])
        else:
            d_in = (u[i] - u[i - 1]) / (r[i] - r[i - 1])
            d_out = (u[i + 1] - u[i]) / (r[i + 1] - r[i])
        flux = abs(cond.sigma_plus * d_in - cond.sigma_minus * d_out)
        return TransmissionReport(flux_residual=float(flux), jump_residual=0.0,
                                  mesh_size=float(r[i] - r[i - 1]), n_points=1)

    h = solution.mesh_size if solution.kind == 'cartesian' else _physical_spacing(solution)
    q = shape.interface_samples(n_points)
    n = shape.outward_normal(q)
    u_in1 = solution.evaluate(q - h * n)
    u_in2 = solution.evaluate(q - 2 * h * n)
    u_out1 = solution.evaluate(q + h * n)
    u_out2 = solution.evaluate(q + 2 * h * n)
    d_in = (u_in1 - u_in2) / h
    d_out = (u_out2 - u_out1) / h
    jump = np.abs((2 * u_in1 - u_in2) - (2 * u_out1 - u_out2))
    flux = np.abs(cond.sigma_plus * d_in - cond.sigma_minus * d_out)
    return TransmissionReport(flux_residual=float(np.max(flux)), jump_residual=float(np.max(jump)),
                              mesh_size=float(h), n_points=len(q))


def _physical_spacing(field_):
    # mayor |dx/dmu| sobre la interfaz es a
    return field_.grid.finest_spacing * field_.shape.a
