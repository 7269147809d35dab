"""
Utility functions for the PerceptiveNet package.
"""

from .cache import cached_readonly, create_cache
from .logging import get_logger, setup_logger
from .validation import validate_odd_size, validate_positive
