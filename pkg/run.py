import os
import sys

from curvlab import create_context
from curvlab.cli import run_command

# Obtener entorno de la variable de entorno o usar "production" para corridas batch
config_name = os.environ.get('CURVLAB_CONFIG', 'production')

if __name__ == '__main__':
    create_context(config_name)
    sys.exit(run_command(sys.argv[1:]))
