"""Material and loading parameters of a pile-up problem."""

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class MaterialParams:
    """Physical constants that define one pile-up instance.

    Parameters
    ----------
    K : float
        Stress pre-factor pi*G*b / (2*(1 - nu)), units of stress * length.
    h : float
        Spacing between dislocations within one wall.
    sigma : float
        Applied shear stress pushing the walls towards the obstacle.
    n : int
        Number of free walls. The pinned wall at 0 is not counted.
    G, b, nu : float, optional
        Shear modulus, Burgers vector length and Poisson ratio. Only kept for
        reference; use :meth:`from_elastic` to build K from them.
    """

    K: float
    h: float
    sigma: float
    n: int
    G: float | None = field(default=None, compare=False)
    b: float | None = field(default=None, compare=False)
    nu: float | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("K", "h", "sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        elastic = (self.G, self.b, self.nu)
        if any(v is not None for v in elastic):
            if any(v is None for v in elastic):
                raise ValueError("G, b and nu must be given together")
            if not 0 <= self.nu < 0.5:
                raise ValueError(f"nu must lie in [0, 0.5), got {self.nu!r}")
            expected = math.pi * self.G * self.b / (2 * (1 - self.nu))
            if not math.isclose(self.K, expected, rel_tol=1e-12):
                raise ValueError(f"K={self.K!r} inconsistent with G, b, nu (expected {expected!r})")

    @classmethod
    def from_elastic(cls, G, b, nu, h, sigma, n):
        """Build parameters from shear modulus, Burgers vector and Poisson ratio."""
        if not 0 <= nu < 0.5:
            raise ValueError(f"nu must lie in [0, 0.5), got {nu!r}")
        K = math.pi * G * b / (2 * (1 - nu))
        return cls(K=K, h=h, sigma=sigma, n=n, G=G, b=b, nu=nu)

    @classmethod
    def from_beta(cls, beta, n, K=1.0, h=1.0):
        """Parameters with the applied stress chosen so that sqrt(K/(n sigma h)) = beta."""
        return cls(K=K, h=h, sigma=K / (n * h * beta**2), n=n)

    def replace(self, **changes):
        data = {"K": self.K, "h": self.h, "sigma": self.sigma, "n": self.n}
        data.update(changes)
        return MaterialParams(**data)

    def to_dict(self):
        return {"K": self.K, "h": self.h, "sigma": self.sigma, "n": self.n}
