# curvlab/utils.py
import functools
import hashlib
import logging
import time
import traceback

import numpy as np

from curvlab.errors import DomainError

logger = logging.getLogger(__name__)


def _slow_threshold():
    from curvlab import get_config
    return float(getattr(get_config(), 'SLOW_FUNCTION_THRESHOLD', 5.0))


def _short_repr(value, limit=80):
    text = repr(value)
    if len(text) > limit:
        return text[:limit] + '...'
    return text


def debug_log_function(func):
    """
    Decorador para loguear la entrada y salida de funciones importantes.
    Uso:
    from curvlab.utils import debug_log_function

    @debug_log_function
    def mi_solver(...):
        # código aquí
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        func_logger = logging.getLogger(func.__module__)
        if func_logger.isEnabledFor(logging.DEBUG):
            func_logger.debug(
                "%s llamada con args: %s, kwargs: %s",
                func.__name__,
                [_short_repr(a) for a in args],
                {k: _short_repr(v) for k, v in kwargs.items()},
            )

        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            execution_time = time.perf_counter() - start_time
            func_logger.error(
                "Error en %s tras %.6f segundos: %s\n%s",
                func.__name__, execution_time, e, traceback.format_exc(),
            )
            raise

        execution_time = time.perf_counter() - start_time
        func_logger.debug("%s ejecutada exitosamente en %.6f segundos", func.__name__, execution_time)
        if execution_time > _slow_threshold():
            func_logger.warning("Función lenta: %s tardó %.3f segundos", func.__name__, execution_time)
        return result

    return wrapper


class Timer:
    """
    Clase para medir el tiempo de ejecución de bloques de código.

    Uso:
    with Timer('nombre_operacion') as timer:
        # código a medir
    logger.info("Tiempo transcurrido: %s segundos", timer.elapsed)
    """
    def __init__(self, operation_name, log=None):
        self.operation_name = operation_name
        self.start_time = None
        self.elapsed = 0.0
        self.log = log or logger

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.log.debug("Timer '%s' iniciado", self.operation_name)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.elapsed = time.perf_counter() - self.start_time
        if exc_type is not None:
            self.log.error("Timer '%s' detenido con error tras %.6f segundos: %s",
                           self.operation_name, self.elapsed, exc_val)
        else:
            self.log.info("Timer '%s' completado en %.6f segundos", self.operation_name, self.elapsed)
        return False


def config_hash(items):
    """Hash sha256 estable de una colección de pares (clave, valor)."""
    if isinstance(items, dict):
        items = items.items()
    canonical = '\n'.join(f"{k}={v!r}" for k, v in sorted(items, key=lambda kv: kv[0]))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def require_finite(name, value):
    """Lanza DomainError si algún valor no es finito; devuelve el array."""
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} debe ser finito, se recibió {value!r}")
    return arr
