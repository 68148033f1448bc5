from .common import common_options
from .files import config_options, override_options
