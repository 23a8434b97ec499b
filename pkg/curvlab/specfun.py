"""
Funciones especiales para los perfiles cerrados y el oráculo radial.

Todo se apoya en scipy.special; las variantes escaladas (ive, kve) permiten
cocientes I_nu(x1)/I_nu(x2) y K_nu(x1)/K_nu(x2) con argumentos ~1e4 sin
desbordar.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import special

from curvlab.errors import DomainError, NumericError
from curvlab.utils import require_finite

logger = logging.getLogger(__name__)

ALLOWED_ORDERS = (0.0, 0.5, 1.0, 1.5)


@dataclass(frozen=True)
class BesselOrder:
    """Orden nu de las funciones de Bessel modificadas (N/2 - 1 y N/2 con N en {2, 3})."""
    nu: float

    def __post_init__(self):
        if float(self.nu) not in ALLOWED_ORDERS:
            raise DomainError(f"Orden de Bessel no soportado: {self.nu}; permitidos {ALLOWED_ORDERS}")
        object.__setattr__(self, 'nu', float(self.nu))

    @classmethod
    def for_dimension(cls, dim):
        """Orden N/2 - 1 de la solución radial en dimensión N."""
        return cls(dim / 2.0 - 1.0)


def _nu(order):
    if isinstance(order, BesselOrder):
        return order.nu
    return BesselOrder(order).nu


def _positive(name, x):
    arr = require_finite(name, x)
    if np.any(arr <= 0):
        raise DomainError(f"{name} debe ser > 0, se recibió {x!r}")
    return arr


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


def erf(x):
    """Función error (2/sqrt(pi)) * int_0^x exp(-s^2) ds."""
    arr = require_finite('x', x)
    return _scalar_or_array(special.erf(arr), x)


def gamma_fn(x):
    """Función Gamma para x > 0."""
    arr = _positive('x', x)
    value = special.gamma(arr)
    if not np.all(np.isfinite(value)):
        raise NumericError(f"Gamma desborda en x={x!r}")
    return _scalar_or_array(value, x)


def log_bessel_i(order, x):
    """log I_nu(x) calculado desde la forma escalada ive."""
    nu = _nu(order)
    arr = _positive('x', x)
    return _scalar_or_array(np.log(special.ive(nu, arr)) + arr, x)


def log_bessel_k(order, x):
    """log K_nu(x) calculado desde la forma escalada kve."""
    nu = _nu(order)
    arr = _positive('x', x)
    return _scalar_or_array(np.log(special.kve(nu, arr)) - arr, x)


def bessel_i(order, x):
    """I_nu(x); lanza NumericError si el valor no es representable."""
    nu = _nu(order)
    arr = _positive('x', x)
    value = special.iv(nu, arr)
    if not np.all(np.isfinite(value)):
        raise NumericError(f"I_{nu}({x!r}) desborda; use log_bessel_i")
    return _scalar_or_array(value, x)


def bessel_k(order, x):
    """K_nu(x); lanza NumericError si subdesborda a 0 (use log_bessel_k)."""
    nu = _nu(order)
    arr = _positive('x', x)
    value = special.kv(nu, arr)
    if np.any(value == 0):
        raise NumericError(f"K_{nu}({x!r}) subdesborda; use log_bessel_k")
    return _scalar_or_array(value, x)


def bessel_i_prime(order, x):
    """I_nu'(x) = I_{nu+1}(x) + (nu/x) I_nu(x)."""
    nu = _nu(order)
    arr = _positive('x', x)
    value = special.iv(nu + 1.0, arr) + nu / arr * special.iv(nu, arr)
    if not np.all(np.isfinite(value)):
        raise NumericError(f"I_{nu}'({x!r}) desborda")
    return _scalar_or_array(value, x)


def bessel_k_prime(order, x):
    """K_nu'(x) = -K_{nu+1}(x) + (nu/x) K_nu(x)."""
    nu = _nu(order)
    arr = _positive('x', x)
    value = -special.kv(nu + 1.0, arr) + nu / arr * special.kv(nu, arr)
    if np.any(value == 0):
        raise NumericError(f"K_{nu}'({x!r}) subdesborda")
    return _scalar_or_array(value, x)


def bessel_i_ratio(order, x1, x2):
    """I_nu(x1) / I_nu(x2) vía formas escaladas."""
    nu = _nu(order)
    a1 = _positive('x1', x1)
    a2 = _positive('x2', x2)
    value = special.ive(nu, a1) / special.ive(nu, a2) * np.exp(a1 - a2)
    if np.ndim(x1) == 0 and np.ndim(x2) == 0:
        return float(value)
    return value


def bessel_k_ratio(order, x1, x2):
    """K_nu(x1) / K_nu(x2) vía formas escaladas."""
    nu = _nu(order)
    a1 = _positive('x1', x1)
    a2 = _positive('x2', x2)
    value = special.kve(nu, a1) / special.kve(nu, a2) * np.exp(a2 - a1)
    if np.ndim(x1) == 0 and np.ndim(x2) == 0:
        return float(value)
    return value
