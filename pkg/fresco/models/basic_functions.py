# A collection of small helpers and error types shared by the analytic models.

import math

# Geometry counts are integers derived from real-valued lengths; values within
# this band of an integer are treated as that integer before rounding.
ROUNDING_TOLERANCE = 1e-9


class FrescoError(Exception):
    def __init__(self, value):
        self.value = value
    def __str__(self):
        return str(self.value)

class DomainError(FrescoError, ValueError):
    """An input lies outside the domain of an operation."""

class ConstraintViolation(DomainError):
    """A platoon arrival rate exceeds the maximum rate for its velocity."""

class InfeasibleError(FrescoError):
    """
    No candidate satisfies a hard constraint.

    Attributes:
        best_violation (float | None): The smallest constraint excess seen
            among the candidates that were examined.
    """
    def __init__(self, value, best_violation=None):
        super().__init__(value)
        self.best_violation = best_violation

class SingularSystemError(FrescoError):
    """A linear system could not be solved reliably."""
    def __init__(self, value, condition=None):
        super().__init__(value)
        self.condition = condition


# Round down, absorbing floating point noise just below an integer.
def tolerant_floor(x):
    return int(math.floor(x + ROUNDING_TOLERANCE))

# Round up, absorbing floating point noise just above an integer.
def tolerant_ceil(x):
    return int(math.ceil(x - ROUNDING_TOLERANCE))

def require_positive(name, value):
    if not value > 0:
        raise DomainError(f'{name} must be positive, got {value}')
    return value

def require_index(name, index, length):
    if not 0 <= index < length:
        raise DomainError(f'{name} {index} out of range for {length} lanes')
    return index

def require_same_length(*sequences):
    lengths = {len(s) for s in sequences}
    if len(lengths) > 1:
        raise DomainError(f'length mismatch: {sorted(lengths)}')
    return lengths.pop() if lengths else 0
