"""Input checks shared by the solvers and estimators."""

import numbers

import numpy as np

from .exceptions import DomainError

UNIT_MODULUS_TOL = 1e-8


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_non_negative(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be a non-negative finite number, got {value!r}")
    return float(value)


def check_choice(value, name, choices):
    if value not in choices:
        raise DomainError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value


def check_complex_array(a, name, shape=None):
    """Return ``a`` as a finite complex128 array, optionally checking its shape."""
    arr = np.asarray(a, dtype=np.complex128)
    if shape is not None and arr.shape != tuple(shape):
        raise DomainError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf")
    return arr


def check_unit_modulus(v, name, tol=UNIT_MODULUS_TOL):
    v = check_complex_array(v, name)
    if v.size and np.max(np.abs(np.abs(v) - 1.0)) > tol:
        raise DomainError(f"{name} must have unit-modulus entries")
    return v


def check_channel_set(ch):
    """Validate a :class:`~risrelay.channels.ChannelSet` and return it."""
    from .channels import ChannelSet

    if not isinstance(ch, ChannelSet):
        raise DomainError(f"expected a ChannelSet, got {type(ch).__name__}")
    return ch


def check_rate_threshold(rate):
    return check_non_negative(rate, "rate threshold")
