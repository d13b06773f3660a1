import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from backend.src.quantum.errors import SchemeError
from backend.src.quantum.states import DIMENSION_CAP
from backend.src.seals.schemes import (
    FixedAngleBitSeal,
    FourierSeal,
    MatrixSeal,
    SealScheme,
    TiltedProductSeal,
)

logger = logging.getLogger(__name__)

AngleRule = Union[str, Callable[[int, float], np.ndarray]]

ANGLE_RULES = ("extreme", "alternating")


def resolve_angles(rule: AngleRule, n: int, bound: float) -> np.ndarray:
    """
    Per-bit angles for a tilted seal of length n under the given rule.

    "extreme" puts every angle at the bound; "alternating" flips the sign of
    every other angle. A callable receives (n, bound) and returns n angles.
    """
    if callable(rule):
        return np.asarray(rule(n, bound), dtype=float)
    if rule == "extreme":
        return np.full(n, bound)
    if rule == "alternating":
        return bound * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    raise SchemeError(f"unknown angle rule {rule!r}; expected one of {ANGLE_RULES} or a callable")


@dataclass(frozen=True)
class SealFamily:
    """
    One seal construction parameterized by the string length n.

    Use the classmethods to build families:
      - SealFamily.scheme_a(theta_cap, alpha): tilted, alpha restricted to (0, 1/2)
      - SealFamily.tilted(theta_cap, alpha): tilted, any alpha > 0 (exemplars)
      - SealFamily.fixed_angle(theta)
      - SealFamily.fourier(): N = 2**n, dense-capped
      - SealFamily.matrix(generator): generator(n) -> MatrixSeal
    """

    kind: str
    theta_cap: Optional[float] = None
    alpha: Optional[float] = None
    theta: Optional[float] = None
    angle_rule: AngleRule = "extreme"
    generator: Optional[Callable[[int], MatrixSeal]] = None
    name: str = ""

    @classmethod
    def scheme_a(cls, theta_cap: float, alpha: float, angle_rule: AngleRule = "extreme") -> "SealFamily":
        if not 0.0 < alpha < 0.5:
            raise SchemeError(f"Scheme A requires alpha in (0, 1/2), got {alpha}")
        return cls.tilted(theta_cap, alpha, angle_rule)

    @classmethod
    def tilted(cls, theta_cap: float, alpha: float, angle_rule: AngleRule = "extreme") -> "SealFamily":
        if not 0.0 <= theta_cap < math.pi / 4:
            raise SchemeError(f"theta_cap must be < π/4 (and >= 0), got {theta_cap}")
        if not alpha > 0.0:
            raise SchemeError(f"alpha must be positive, got {alpha}")
        return cls(
            kind="tilted",
            theta_cap=float(theta_cap),
            alpha=float(alpha),
            angle_rule=angle_rule,
            name=f"tilted(Θ={theta_cap:g}, α={alpha:g})",
        )

    @classmethod
    def fixed_angle(cls, theta: float) -> "SealFamily":
        if not abs(theta) < math.pi / 4:
            raise SchemeError(f"theta must satisfy |theta| < π/4, got {theta}")
        return cls(kind="fixed_angle", theta=float(theta), name=f"fixed_angle(θ={theta:g})")

    @classmethod
    def fourier(cls) -> "SealFamily":
        return cls(kind="fourier", name="fourier")

    @classmethod
    def matrix(cls, generator: Callable[[int], MatrixSeal], name: str = "matrix") -> "SealFamily":
        return cls(kind="matrix", generator=generator, name=name)

    @property
    def is_product(self) -> bool:
        return self.kind in ("tilted", "fixed_angle")

    def admits(self, n: int) -> bool:
        """Whether instantiate(n) is defined for this family."""
        if int(n) < 1:
            return False
        if self.kind == "fourier":
            return 2 ** int(n) <= DIMENSION_CAP
        return True

    def instantiate(self, n: int) -> SealScheme:
        return instantiate(self, n)


def instantiate(family: SealFamily, n: int) -> SealScheme:
    """
    Build the member of a family with string length n.

    Raises:
        SchemeError: n is not admissible (e.g. the Fourier family needs 2**n <= dimension cap).
    """
    n = int(n)
    if not family.admits(n):
        raise SchemeError(f"n={n} is not admissible for family {family.name or family.kind}")
    if family.kind == "tilted":
        bound = family.theta_cap / float(n) ** family.alpha
        angles = resolve_angles(family.angle_rule, n, bound)
        return TiltedProductSeal(n=n, theta_cap=family.theta_cap, alpha=family.alpha, angles=angles)
    if family.kind == "fixed_angle":
        return FixedAngleBitSeal(n=n, theta=family.theta)
    if family.kind == "fourier":
        return FourierSeal(N=2 ** n)
    if family.kind == "matrix":
        if family.generator is None:
            raise SchemeError("matrix family needs a generator")
        return family.generator(n)
    raise SchemeError(f"unknown family kind {family.kind!r}")


if __name__ == "__main__":
    print(instantiate(SealFamily.scheme_a(0.3, 0.25), 16).angles[:4])
    print(instantiate(SealFamily.tilted(0.3, 1.0), 300).angles[:4])
