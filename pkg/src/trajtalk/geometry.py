"""Minimal 3D vector type shared by trajectories and landmarks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Vec3:
    """Immutable 3D point/offset in meters."""

    x: float
    y: float
    z: float

    @classmethod
    def of(cls, coords: Iterable[float]) -> "Vec3":
        x, y, z = (float(c) for c in coords)
        return cls(x, y, z)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


ZERO = Vec3(0.0, 0.0, 0.0)
