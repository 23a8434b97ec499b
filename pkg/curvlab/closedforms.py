"""
Funciones y constantes explícitas del problema bifásico: el perfil f, su
transformada F, el perfil unidimensional Phi, las barreras psi y Psi_lambda,
el perfil límite S_* y los coeficientes de las fórmulas de curvatura.

Todas las funciones aceptan escalares o arreglos de numpy.
"""
import logging
import math
import numbers
from dataclasses import dataclass

import numpy as np
from scipy import special

from curvlab.constants import SIDE_INSIDE, SIDE_OUTSIDE
from curvlab.errors import DomainError
from curvlab.geometry import check_in_tube

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class Conductivity:
    """Par de conductividades: sigma_plus dentro de Omega, sigma_minus fuera."""
    sigma_plus: float
    sigma_minus: float

    def __post_init__(self):
        for name in ('sigma_plus', 'sigma_minus'):
            value = getattr(self, name)
            valid = isinstance(value, numbers.Real) and not isinstance(value, bool)
            if not (valid and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} debe ser un real > 0, se recibió {value!r}")
        object.__setattr__(self, 'sigma_plus', float(self.sigma_plus))
        object.__setattr__(self, 'sigma_minus', float(self.sigma_minus))

    @property
    def mu(self):
        return min(self.sigma_plus, self.sigma_minus)

    @property
    def M(self):
        return max(self.sigma_plus, self.sigma_minus)

    @property
    def sqrt_plus(self):
        return math.sqrt(self.sigma_plus)

    @property
    def sqrt_minus(self):
        return math.sqrt(self.sigma_minus)

    @property
    def sqrt_sum(self):
        return self.sqrt_plus + self.sqrt_minus

    def sigma(self, side):
        if side == SIDE_INSIDE:
            return self.sigma_plus
        if side == SIDE_OUTSIDE:
            return self.sigma_minus
        raise DomainError(f"Lado desconocido: {side!r}")

    def sigma_of_delta(self, delta):
        """sigma evaluada según el signo de la distancia (delta > 0 dentro)."""
        return np.where(np.asarray(delta) > 0, self.sigma_plus, self.sigma_minus)

    def scaled(self, factor):
        """Conductividades multiplicadas por factor (reescalado x -> c x, sigma -> c^2 sigma)."""
        return Conductivity(self.sigma_plus * factor, self.sigma_minus * factor)

    def to_dict(self):
        return {'sigma_plus': self.sigma_plus, 'sigma_minus': self.sigma_minus}


@dataclass(frozen=True)
class FormulaConstants:
    interface_constant: float
    parabolic_coeff: float
    elliptic_coeff: float


def interface_constant(cond):
    """c_inf = sqrt(sigma_+) / (sqrt(sigma_+) + sqrt(sigma_-))."""
    return cond.sqrt_plus / cond.sqrt_sum


def formula_constants(cond):
    product = cond.sqrt_plus * cond.sqrt_minus
    return FormulaConstants(
        interface_constant=interface_constant(cond),
        parabolic_coeff=2.0 * product / (3.0 * SQRT_PI * cond.sqrt_sum),
        elliptic_coeff=product / (2.0 * cond.sqrt_sum),
    )


def _ret(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return np.asarray(value, dtype=float)


# Perfil f y su transformada F

def f_profile(xi):
    """f(xi) = (1 + erf(xi/2)) / 2; admite +-inf."""
    xi_arr = np.asarray(xi, dtype=float)
    return _ret(0.5 * (1.0 + special.erf(0.5 * xi_arr)), xi)


def f_prime(xi):
    xi_arr = np.asarray(xi, dtype=float)
    return _ret(np.exp(-0.25 * xi_arr ** 2) / (2.0 * SQRT_PI), xi)


def f_second(xi):
    xi_arr = np.asarray(xi, dtype=float)
    return _ret(-0.5 * xi_arr * np.exp(-0.25 * xi_arr ** 2) / (2.0 * SQRT_PI), xi)


def F_profile(eta):
    """F(eta) = 1 - e^{-eta}/2 para eta > 0, e^{eta}/2 para eta <= 0."""
    eta_arr = np.asarray(eta, dtype=float)
    half_e = 0.5 * np.exp(-np.abs(eta_arr))
    return _ret(np.where(eta_arr > 0, 1.0 - half_e, half_e), eta)


def F_prime(eta):
    eta_arr = np.asarray(eta, dtype=float)
    return _ret(0.5 * np.exp(-np.abs(eta_arr)), eta)


def F_second(eta, side=SIDE_INSIDE):
    """F'' por rama; en eta = 0 el lado elige la rama."""
    eta_arr = np.asarray(eta, dtype=float)
    half_e = 0.5 * np.exp(-np.abs(eta_arr))
    positive = (eta_arr > 0) | ((eta_arr == 0) & (side == SIDE_INSIDE))
    return _ret(np.where(positive, -half_e, half_e), eta)


# Perfil unidimensional bifásico Phi

def _inside_mask(eta_arr, side):
    if side not in (SIDE_INSIDE, SIDE_OUTSIDE):
        raise DomainError(f"Lado desconocido: {side!r}")
    return (eta_arr > 0) | ((eta_arr == 0) & (side == SIDE_INSIDE))


def phi_profile(eta, cond):
    """
    Solución acotada de -sigma* Phi'' + Phi = chi* en R con las condiciones
    de transmisión en 0.
    """
    eta_arr = np.asarray(eta, dtype=float)
    s = cond.sqrt_sum
    inside = (2.0 * cond.sqrt_minus / s) * F_profile(eta_arr / cond.sqrt_plus) \
        + (cond.sqrt_plus - cond.sqrt_minus) / s
    outside = (2.0 * cond.sqrt_plus / s) * F_profile(eta_arr / cond.sqrt_minus)
    return _ret(np.where(eta_arr > 0, inside, outside), eta)


def phi_prime(eta, cond, side=SIDE_INSIDE):
    """Phi'(eta); en eta = 0 devuelve la derivada lateral del lado indicado."""
    eta_arr = np.asarray(eta, dtype=float)
    s = cond.sqrt_sum
    inside = (2.0 * cond.sqrt_minus / (s * cond.sqrt_plus)) * F_prime(eta_arr / cond.sqrt_plus)
    outside = (2.0 * cond.sqrt_plus / (s * cond.sqrt_minus)) * F_prime(eta_arr / cond.sqrt_minus)
    return _ret(np.where(_inside_mask(eta_arr, side), inside, outside), eta)


def phi_second(eta, cond, side=SIDE_INSIDE):
    eta_arr = np.asarray(eta, dtype=float)
    s = cond.sqrt_sum
    mask = _inside_mask(eta_arr, side)
    inside = (2.0 * cond.sqrt_minus / (s * cond.sigma_plus)) * F_second(eta_arr / cond.sqrt_plus, SIDE_INSIDE)
    outside = (2.0 * cond.sqrt_plus / (s * cond.sigma_minus)) * F_second(eta_arr / cond.sqrt_minus, SIDE_OUTSIDE)
    return _ret(np.where(mask, inside, outside), eta)


# Barreras psi y Psi_lambda

def _psi_from_delta(delta, t, cond):
    s = cond.sqrt_sum
    delta = np.asarray(delta, dtype=float)
    inside = (2.0 * cond.sqrt_minus / s) * (
        f_profile(delta / math.sqrt(cond.sigma_plus * t))
        + (cond.sqrt_plus - cond.sqrt_minus) / (2.0 * cond.sqrt_minus)
    )
    outside = (2.0 * cond.sqrt_plus / s) * f_profile(delta / math.sqrt(cond.sigma_minus * t))
    return np.where(delta > 0, inside, outside)


def psi(x, t, shape, cond):
    """
    Barrera parabólica psi(x, t) construida con la distancia con signo.

    Args:
        x: punto (o puntos) dentro del tubo de la geometría
        t: tiempo > 0
        shape: geometría del catálogo
        cond: Conductivity

    Returns:
        psi(x, t) en (0, 1)
    """
    if not t > 0:
        raise DomainError(f"t debe ser > 0, se recibió {t}")
    delta = check_in_tube(shape, x)
    return _ret(_psi_from_delta(delta, t, cond), delta)


def psi_lambda(x, lam, shape, cond):
    """Psi_lambda(x) = Phi(sqrt(lambda) delta(x))."""
    if not lam > 0:
        raise DomainError(f"lambda debe ser > 0, se recibió {lam}")
    delta = check_in_tube(shape, x)
    return phi_profile(math.sqrt(lam) * np.asarray(delta), cond)


def psi_heat_rhs(x, t, shape, cond):
    """Lado derecho de psi_t - sigma Laplaciano(psi) en el tubo (fuera de la interfaz)."""
    if not t > 0:
        raise DomainError(f"t debe ser > 0, se recibió {t}")
    delta = np.asarray(check_in_tube(shape, x), dtype=float)
    lap = np.asarray(shape.laplacian_signed_distance(x), dtype=float)
    sigma = cond.sigma_of_delta(delta)
    coeff = 2.0 * cond.sqrt_plus * cond.sqrt_minus / cond.sqrt_sum
    value = -coeff / math.sqrt(t) * lap * f_prime(delta / np.sqrt(sigma * t))
    return _ret(value, delta)


def psi_lambda_helmholtz_rhs(x, lam, shape, cond):
    """Lado derecho de -sigma Laplaciano(Psi_lambda) + lambda Psi_lambda - lambda chi_Omega."""
    if not lam > 0:
        raise DomainError(f"lambda debe ser > 0, se recibió {lam}")
    delta = np.asarray(check_in_tube(shape, x), dtype=float)
    lap = np.asarray(shape.laplacian_signed_distance(x), dtype=float)
    sigma = cond.sigma_of_delta(delta)
    coeff = cond.sqrt_plus * cond.sqrt_minus / cond.sqrt_sum
    value = -coeff * math.sqrt(lam) * lap * np.exp(-math.sqrt(lam) * np.abs(delta) / np.sqrt(sigma))
    return _ret(value, delta)


# Perfil límite S_*

def _s_star_parts(z, cond, curvature_term):
    z = np.asarray(z, dtype=float)
    a, b, s = cond.sqrt_plus, cond.sqrt_minus, cond.sqrt_sum
    amp_in = curvature_term * b / (2.0 * s)
    amp_out = curvature_term * a / (2.0 * s)
    e_in = np.exp(-np.maximum(z, 0.0) / a)
    e_out = np.exp(np.minimum(z, 0.0) / b)
    return z, a, b, amp_in, amp_out, e_in, e_out


def s_star(zN, cond, curvature_term):
    """
    Solución acotada de -sigma* S'' + S = curvature_term · sigma* Phi'(z).

    curvature_term es (N-1)·H(q) en la convención de las fórmulas de límite
    (ver geometry.curvature_term).
    """
    z, a, b, amp_in, amp_out, e_in, e_out = _s_star_parts(zN, cond, curvature_term)
    inside = amp_in * (z + a) * e_in
    outside = amp_out * (-z + b) * e_out
    return _ret(np.where(z > 0, inside, outside), zN)


def s_star_prime(zN, cond, curvature_term):
    z, a, b, amp_in, amp_out, e_in, e_out = _s_star_parts(zN, cond, curvature_term)
    inside = -amp_in * z / a * e_in
    outside = -amp_out * z / b * e_out
    return _ret(np.where(z > 0, inside, outside), zN)


def s_star_second(zN, cond, curvature_term):
    z, a, b, amp_in, amp_out, e_in, e_out = _s_star_parts(zN, cond, curvature_term)
    inside = amp_in * (-1.0 / a + z / cond.sigma_plus) * e_in
    outside = amp_out * (-1.0 / b - z / cond.sigma_minus) * e_out
    return _ret(np.where(z > 0, inside, outside), zN)
