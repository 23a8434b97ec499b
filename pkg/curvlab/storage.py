"""Escritura de resultados: tablas CSV con metadatos y summary.txt por directorio de corrida."""
import logging
import os

import numpy as np

from curvlab import get_config

logger = logging.getLogger(__name__)

SUMMARY_FILE = 'summary.txt'
FLOAT_FORMAT = '%.17g'


def resolve_output_dir(cli_value=None, file_value=None):
    """
    Directorio de salida con precedencia: flag de CLI > CURVLAB_OUT > archivo
    de configuración > valor por defecto de la configuración activa.
    """
    if cli_value:
        return cli_value
    env_value = os.environ.get('CURVLAB_OUT')
    if env_value:
        return env_value
    if file_value:
        return file_value
    return get_config().OUTPUT_DIR


def ensure_dir(path):
    # Crear directorio si no existe
    os.makedirs(path, exist_ok=True)
    return path


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (tuple, list, np.ndarray)):
        return '(' + ','.join(format_value(v) for v in value) + ')'
    return str(value)


def format_items(items):
    """'k1=v1 k2=v2' con floats en %.17g y el orden de inserción del dict."""
    return ' '.join(f"{k}={format_value(v)}" for k, v in items.items())


def write_table(directory, name, frame, header=None, footer=None):
    """
    Guarda un DataFrame como CSV precedido de una línea `# k=v ...` y seguido
    de una línea de pie opcional con el mismo formato.

    Returns:
        ruta del archivo escrito
    """
    ensure_dir(directory)
    path = os.path.join(directory, name if name.endswith('.csv') else f"{name}.csv")
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        if header:
            fh.write(f"# {format_items(header)}\n")
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        if footer:
            fh.write(f"# {format_items(footer)}\n")
    logger.debug("Tabla guardada en %s (%d filas)", path, len(frame))
    return path


def append_summary(directory, lines):
    """Agrega líneas a summary.txt del directorio (nunca lo trunca)."""
    ensure_dir(directory)
    if isinstance(lines, str):
        lines = [lines]
    path = os.path.join(directory, SUMMARY_FILE)
    with open(path, 'a', encoding='utf-8') as fh:
        for line in lines:
            fh.write(line.rstrip('\n') + '\n')
    return path


def read_summary(directory):
    path = os.path.join(directory, SUMMARY_FILE)
    if not os.path.exists(path):
        return []
    with open(path, encoding='utf-8') as fh:
        return fh.read().splitlines()
