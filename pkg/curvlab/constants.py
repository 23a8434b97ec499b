"""Constantes para todo el paquete"""

# Lados de la interfaz
SIDE_INSIDE = '+'
SIDE_OUTSIDE = '-'

# Modos de corrida
MODE_VERIFY_ELLIPTIC = 'verify-elliptic'
MODE_VERIFY_PARABOLIC = 'verify-parabolic'
MODE_ELLIPSE_SCAN = 'ellipse-scan'
MODE_BARRIER_AUDIT = 'barrier-audit'
MODE_KARAMATA_CHECK = 'karamata-check'
MODE_SWEEP = 'sweep'
MODES = (
    MODE_VERIFY_ELLIPTIC,
    MODE_VERIFY_PARABOLIC,
    MODE_ELLIPSE_SCAN,
    MODE_BARRIER_AUDIT,
    MODE_KARAMATA_CHECK,
    MODE_SWEEP,
)

# Geometrías
SHAPE_BALL = 'ball'
SHAPE_ELLIPSE = 'ellipse'
SHAPE_HALFSPACE = 'halfspace'

# Medidas para karamata-check
MEASURE_SQRT_T = 'sqrt_t'
MEASURE_LEBESGUE = 'lebesgue'
MEASURE_ELL = 'ell'

# Códigos de salida
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3

# Malla radial
MESH_STRETCH = 1.02
FINEST_SPACING_FRACTION = 0.02     # h_min = fracción * sqrt(min sigma / lambda)
TRUNCATION_DECAY_LENGTHS = 12.0    # U = 0 a 12 longitudes de decaimiento exteriores

# Malla temporal
TIME_RATIO = 1.15
STARTUP_STEPS = 4
T0_FRACTION = 1e-4                 # t0 = fracción * L^2 / max sigma
TMAX_FRACTION = 1.0
PARABOLIC_SPACING_FRACTION = 0.05  # h_min = fracción * sqrt(min sigma * t0)
PARABOLIC_SPACING_WARN = 0.25
MIN_ANALYSIS_DECADES = 1.5
ANALYSIS_START_FACTOR = 10.0       # funcional temporal reportado desde 10 t0

# Transformada de Laplace-Stieltjes
LAPLACE_HEAD_LIMIT = 0.1           # lambda t0 <= 0.1
LAPLACE_TAIL_LIMIT = 30.0          # lambda t_max >= 30

# Solvers iterativos
CG_RTOL = 1e-10
CG_MAXITER = 20000

# Pie de la normal en la elipse
FOOT_MAXITER = 200
FOOT_RTOL = 1e-14

# Auditoría
K_HEADROOM = 2.0
TUBE_FRACTION = 0.5
SLACK_FACTOR = 3.0
MAX_PRINCIPLE_TOL = 1e-12

# Perfil de blow-up
BLOWUP_WINDOW = 8.0                # |z| <= 8 max sqrt(sigma)
BLOWUP_SAMPLES = 101

# Extrapolación
RICHARDSON_LEVELS = 2
