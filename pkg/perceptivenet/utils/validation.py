"""
Validation utilities for the PerceptiveNet package.
"""

import math
from typing import Any, Dict, List, Sequence

from ..exceptions import PerceptiveNetValidationError, ShapeMismatchError
from .logging import get_logger

logger = get_logger(__name__)


def validate_required_params(params: Dict[str, Any], required: List[str]) -> None:
    """
    Validate that required parameters are present and not None.

    Args:
        params: Dictionary of parameters
        required: List of required parameter names

    Raises:
        PerceptiveNetValidationError: If any required parameters are missing
    """
    missing = [param for param in required if param not in params or params[param] is None]
    if missing:
        logger.error(f"Missing required parameters: {missing}")
        raise PerceptiveNetValidationError(f"Missing required parameters: {', '.join(missing)}")


def validate_odd_size(size: Any, name: str = "size") -> int:
    """
    Validate a kernel side length: an odd integer of at least 3.

    Args:
        size: Candidate size
        name: Parameter name used in messages

    Returns:
        int: Validated size

    Raises:
        PerceptiveNetValidationError: If size is not an odd integer >= 3
    """
    try:
        size_int = int(size)
    except (TypeError, ValueError):
        logger.error(f"Invalid {name} type: {size}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {size}. Must be an odd integer.")
    if size_int != size or size_int < 3 or size_int % 2 == 0:
        logger.error(f"Invalid {name}: {size}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {size}. Must be an odd integer >= 3.")
    return size_int


def validate_positive(value: Any, name: str) -> float:
    """
    Validate a strictly positive finite real.

    Args:
        value: Candidate value
        name: Parameter name used in messages

    Returns:
        float: Validated value

    Raises:
        PerceptiveNetValidationError: If value is not a positive finite number
    """
    try:
        value_f = float(value)
    except (TypeError, ValueError):
        logger.error(f"Invalid {name} type: {value}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {value}. Must be a number.")
    if not math.isfinite(value_f) or value_f <= 0:
        logger.error(f"Invalid {name}: {value}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {value}. Must be positive and finite.")
    return value_f


def validate_unit_interval(value: Any, name: str) -> float:
    """
    Validate a real in the closed interval [0, 1].

    Args:
        value: Candidate value
        name: Parameter name used in messages

    Returns:
        float: Validated value

    Raises:
        PerceptiveNetValidationError: If value lies outside [0, 1]
    """
    try:
        value_f = float(value)
    except (TypeError, ValueError):
        logger.error(f"Invalid {name} type: {value}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {value}. Must be a number.")
    if not 0.0 <= value_f <= 1.0:
        logger.error(f"Invalid {name}: {value}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {value}. Must lie in [0, 1].")
    return value_f


def validate_min_int(value: Any, minimum: int, name: str) -> int:
    """
    Validate an integer no smaller than ``minimum``.

    Args:
        value: Candidate value
        minimum: Smallest allowed value
        name: Parameter name used in messages

    Returns:
        int: Validated value

    Raises:
        PerceptiveNetValidationError: If value is not an integer >= minimum
    """
    try:
        value_int = int(value)
    except (TypeError, ValueError):
        logger.error(f"Invalid {name} type: {value}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {value}. Must be an integer.")
    if value_int != value or value_int < minimum:
        logger.error(f"Invalid {name}: {value}")
        raise PerceptiveNetValidationError(f"Invalid {name}: {value}. Must be an integer >= {minimum}.")
    return value_int


def validate_shape(actual: Sequence[int], expected: Sequence[int], what: str) -> None:
    """
    Validate that two shapes agree. ``None`` entries in ``expected`` match anything.

    Args:
        actual: Observed shape
        expected: Required shape
        what: Description used in the message

    Raises:
        ShapeMismatchError: If the shapes disagree
    """
    actual = tuple(actual)
    expected = tuple(expected)
    if len(actual) != len(expected) or any(
        e is not None and e != a for e, a in zip(expected, actual)
    ):
        logger.error(f"{what}: expected {expected}, got {actual}")
        raise ShapeMismatchError(what, expected, actual)
