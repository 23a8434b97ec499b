import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    # Directorio de salida (CSV + summary.txt)
    OUTPUT_DIR = os.environ.get('CURVLAB_OUT', 'results')

    # Configuración de depuración / logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_TO_FILE = os.environ.get('LOG_TO_FILE', 'False') == 'True'
    LOG_DIR = os.environ.get('LOG_DIR', 'logs')
    LOG_CONSOLE_OUTPUT = os.environ.get('LOG_CONSOLE_OUTPUT', 'True') == 'True'
    SLOW_FUNCTION_THRESHOLD = float(os.environ.get('SLOW_FUNCTION_THRESHOLD', '5.0'))

    # Modo sweep
    SWEEP_WORKERS = int(os.environ.get('SWEEP_WORKERS', '4'))
    SWEEP_SEED = int(os.environ.get('SWEEP_SEED', '20240607'))

    # Tolerancias de aceptación
    ELLIPTIC_REL_TOL = float(os.environ.get('ELLIPTIC_REL_TOL', '0.005'))
    PARABOLIC_REL_TOL = float(os.environ.get('PARABOLIC_REL_TOL', '0.05'))
    CURVATURE_REL_TOL = float(os.environ.get('CURVATURE_REL_TOL', '0.10'))
    KARAMATA_REL_TOL = float(os.environ.get('KARAMATA_REL_TOL', '0.01'))
    MAX_PRINCIPLE_TOL = float(os.environ.get('MAX_PRINCIPLE_TOL', '1e-12'))


class DevelopmentConfig(Config):
    DEBUG = True
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    DEBUG = False


class TestingConfig(Config):
    TESTING = True
    LOG_LEVEL = 'WARNING'
    LOG_TO_FILE = False
    SWEEP_WORKERS = 2


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': ProductionConfig
}
