__version__ = "0.1.0"

from .config import load_config as load_config  # noqa
from .config import parse_config as parse_config  # noqa
from .experiments import run_experiment as run_experiment  # noqa
from .report import Report as Report  # noqa
from .report import emit_report as emit_report  # noqa
