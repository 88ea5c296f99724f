# services/src/power_alloc/tangent_bound.py
"""
Tangent Bound Module

Lower bound log(1 + z) >= a log z + b, tight at z = z0, with
a = z0 / (1 + z0) and b = log(1 + z0) - a log z0 (natural logs). The SCA
loop replaces each user's intended-rate term with this bound.

Functions:
    tangent_coeffs: Coefficients for one anchor z0
    tangent_coeffs_vector: Coefficients for every user at once
    tangent_lower_bound: Evaluates a log z + b
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..large_system.asymptotics import DomainError


@dataclass(frozen=True)
class TangentCoeffs:
    """Coefficients (a, b) of the bound anchored at z0; a lies in [0, 1)."""

    a: float
    b: float
    z0: float

    def bound(self, z: float) -> float:
        return tangent_lower_bound(self, z)


def tangent_coeffs(z0: float) -> TangentCoeffs:
    """
    Coefficients of the bound anchored at z0.

    z0 = 0 gives a = b = 0 since z0 log z0 -> 0.

    Raises:
        DomainError: If z0 < 0 or is not finite.
    """
    if not z0 >= 0 or math.isinf(z0):
        raise DomainError(f"Tangent anchor must be finite and nonnegative, got {z0}")
    if z0 == 0:
        return TangentCoeffs(a=0.0, b=0.0, z0=0.0)
    a = z0 / (1.0 + z0)
    b = math.log1p(z0) - a * math.log(z0)
    return TangentCoeffs(a=a, b=b, z0=float(z0))


def tangent_coeffs_vector(z0: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Arrays (a, b) with one entry per anchor."""
    coeffs = [tangent_coeffs(float(z)) for z in z0]
    return np.array([c.a for c in coeffs]), np.array([c.b for c in coeffs])


def tangent_lower_bound(coeffs: TangentCoeffs, z: float) -> float:
    if z <= 0:
        # a log z -> -inf unless a = 0
        return coeffs.b if coeffs.a == 0 else -math.inf
    return coeffs.a * math.log(z) + coeffs.b
