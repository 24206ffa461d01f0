"""Deterministic counter-based pseudo-random generator.

The state transition is the splitmix64 scheme: the 64-bit state advances by
0x9E3779B97F4A7C15 per draw and the output mixing is

    z  = state
    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

all modulo 2^64. Uniforms in (0, 1] are ((z >> 11) + 1) * 2^-53; standard
normals come from the Box-Muller transform on consecutive uniform pairs:

    g0 = sqrt(-2 ln u1) * cos(2 pi u2)
    g1 = sqrt(-2 ln u1) * sin(2 pi u2)

This is specified bit-exactly so independent implementations reproduce
identical noise streams from the same seed.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0**-53


class SplitMix64:
    """splitmix64 stream with Box-Muller normals."""

    def __init__(self, seed):
        self.state = int(seed) & _MASK
        self._spare_normal = None

    def next_u64(self):
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_uniform(self):
        """Uniform draw in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * _INV53

    def next_normal(self):
        if self._spare_normal is not None:
            g = self._spare_normal
            self._spare_normal = None
            return g
        u1 = self.next_uniform()
        u2 = self.next_uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self._spare_normal = radius * math.sin(angle)
        return radius * math.cos(angle)

    def normals(self, n):
        return np.array([self.next_normal() for _ in range(n)])
