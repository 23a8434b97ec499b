"""curvlab: asintótica de conductores de calor bifásicos.

Extrae la curvatura media de la interfaz a partir del comportamiento de la
temperatura en tiempos cortos y de la transformada de Laplace-Stieltjes.
"""
import logging
import os

from config import config

__version__ = '0.1.0'

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

_context = {}


def create_context(config_name='default'):
    """
    Configura el logger raíz del paquete según la clase de configuración y
    devuelve esa clase. Llamadas repetidas no duplican handlers.
    """
    cfg = config.get(config_name)
    if cfg is None:
        raise KeyError(f"Configuración desconocida: {config_name}")

    logger = logging.getLogger('curvlab')
    logger.setLevel(getattr(logging, str(cfg.LOG_LEVEL).upper(), logging.INFO))

    for handler in list(logger.handlers):
        if getattr(handler, '_curvlab', False):
            logger.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(LOG_FORMAT)
    if cfg.LOG_CONSOLE_OUTPUT:
        console = logging.StreamHandler()
        console.setFormatter(formatter)
        console._curvlab = True
        logger.addHandler(console)
    if cfg.LOG_TO_FILE:
        os.makedirs(cfg.LOG_DIR, exist_ok=True)
        file_handler = logging.FileHandler(os.path.join(cfg.LOG_DIR, 'curvlab.log'))
        file_handler.setFormatter(formatter)
        file_handler._curvlab = True
        logger.addHandler(file_handler)

    _context['config'] = cfg
    _context['name'] = config_name
    return cfg


def get_config():
    """Devuelve la clase de configuración activa (la de 'default' si no hay contexto)."""
    return _context.get('config', config['default'])
