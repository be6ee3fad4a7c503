"""Squeezing figures of merit shared by the Dicke and Gaussian engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ISOTROPY_TOL = 1e-12


def to_db(xi2):
    """Squeezing in dB; positive numbers mean squeezing."""
    return -10.0 * math.log10(xi2) + 0.0  # no negative zero


@dataclass(frozen=True)
class SqueezingResult:
    xi2: float
    theta: float
    variance: float
    protocol: str = ""
    isotropic: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def db(self):
        return to_db(self.xi2)

    def to_dict(self):
        out = {
            "protocol": self.protocol,
            "xi2": self.xi2,
            "dB": self.db,
            "theta": self.theta,
            "variance": self.variance,
            "isotropic": self.isotropic,
        }
        out.update(self.meta)
        return out


def quadrature_variance(cov, theta):
    """Variance of ``cos(theta) * a + sin(theta) * b`` for a 2x2 covariance of (a, b)."""
    c, s = np.cos(theta), np.sin(theta)
    return c * c * cov[0, 0] + 2 * c * s * cov[0, 1] + s * s * cov[1, 1]


def min_quadrature(cov):
    """Smallest quadrature variance of a symmetric 2x2 block and its angle.

    Returns ``(v_min, theta, isotropic)`` with ``theta`` in [0, pi).  The
    variance is the closed-form lower eigenvalue; for an isotropic block every
    angle is optimal and theta = 0 is reported.
    """
    a, b, c = float(cov[0, 0]), float(cov[0, 1]), float(cov[1, 1])
    mean = (a + c) / 2
    half_diff = (a - c) / 2
    radius = math.hypot(half_diff, b)
    v_min = mean - radius
    scale = max(abs(a), abs(c), 1e-300)
    if radius <= ISOTROPY_TOL * scale:
        return v_min, 0.0, True
    # the minor axis is perpendicular to the major axis at atan2(b, half_diff) / 2
    theta = 0.5 * math.atan2(b, half_diff) + math.pi / 2
    theta = math.fmod(theta, math.pi)
    if theta < 0:
        theta += math.pi
    if math.isclose(theta, math.pi, abs_tol=1e-15):
        theta = 0.0
    return v_min, theta, False
