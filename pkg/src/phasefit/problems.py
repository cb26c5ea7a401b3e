"""Benchmark second-order problems y'' = f(t, y).

Every ``rhs`` accepts states with arbitrary leading axes, ``y[..., d]``, so the
implicit Runge-Kutta solver can evaluate all stages in one call.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NoConvergence, OutOfRange

G_GAUSS = 2.95912208286e-4
JUPITER_PERIOD_DAYS = 4332.589
JUPITER_MEAN_MOTION = 2 * math.pi / JUPITER_PERIOD_DAYS
KEPLER_TOL = 1e-14
KEPLER_MAX_ITER = 50


@dataclass(frozen=True)
class SecondOrderIVP:
    name: str
    dimension: int
    rhs: Callable
    y0: np.ndarray
    v0: np.ndarray
    exact: Optional[Callable] = None
    invariants_fn: Optional[Callable] = None
    omega: Optional[float] = None
    period: Optional[float] = None
    params: dict = field(default_factory=dict)

    def energy(self, y, v):
        if self.invariants_fn is None:
            raise ValueError(f"problem {self.name!r} has no conserved quantities")
        return self.invariants_fn(y, v)[0]


@dataclass(frozen=True)
class PlanetData:
    name: str
    mass: float
    position: tuple
    velocity: tuple


# Sun (with the inner planets folded in) and the five outer planets, heliocentric
# at the initial epoch. AU, AU/day, solar masses.
OUTER_PLANETS = (
    PlanetData("Sun", 1.00000597682, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    PlanetData(
        "Jupiter",
        0.000954786104043,
        (-3.5023653, -3.8169847, -1.5507963),
        (0.00565429, -0.00412490, -0.00190589),
    ),
    PlanetData(
        "Saturn",
        0.000285583733151,
        (9.0755314, -3.0458353, -1.6483708),
        (0.00168318, 0.00483525, 0.00192462),
    ),
    PlanetData(
        "Uranus",
        0.0000437273164546,
        (8.3101420, -16.2901086, -7.2521278),
        (0.00354178, 0.00137102, 0.00055029),
    ),
    PlanetData(
        "Neptune",
        0.0000517759138449,
        (11.4707666, -25.7294829, -10.8169456),
        (0.00288930, 0.00114527, 0.00039677),
    ),
    PlanetData(
        "Pluto",
        1 / 1.3e8,
        (-15.5387357, -25.2225594, -3.1902382),
        (0.00276725, -0.00170702, -0.00136504),
    ),
)


def harmonic(omega=1.0):
    """y'' = -omega**2 y with y(0) = 1, y'(0) = 0."""
    omega = float(omega)
    if not omega > 0:
        raise OutOfRange(f"omega must be positive, got {omega}")
    w2 = omega * omega

    def rhs(t, y):
        return -w2 * np.asarray(y)

    def exact(t):
        return np.array([math.cos(omega * t)])

    def invariants(y, v):
        return [0.5 * (float(v[0]) ** 2 + w2 * float(y[0]) ** 2)]

    return SecondOrderIVP(
        name="harmonic",
        dimension=1,
        rhs=rhs,
        y0=np.array([1.0]),
        v0=np.array([0.0]),
        exact=exact,
        invariants_fn=invariants,
        omega=omega,
        period=2 * math.pi / omega,
        params={"omega": omega},
    )


def eccentric_anomaly(eccentricity, mean_anomaly):
    """Newton solve of E - e sin E = M starting from E = M."""
    e, m = float(eccentricity), float(mean_anomaly)
    E = m
    for _ in range(KEPLER_MAX_ITER):
        step = (E - e * math.sin(E) - m) / (1 - e * math.cos(E))
        E -= step
        if abs(step) <= KEPLER_TOL * max(1.0, abs(E)):
            return E
    raise NoConvergence(f"Kepler equation did not converge (e={e}, M={m})")


def kepler_exact(eccentricity, t):
    """Position and velocity on the unit-semi-major-axis orbit, perihelion at t=0."""
    e = float(eccentricity)
    if not 0 <= e < 1:
        raise OutOfRange(f"eccentricity must lie in [0, 1), got {e}")
    E = eccentric_anomaly(e, t)
    root = math.sqrt(1 - e * e)
    cos_e, sin_e = math.cos(E), math.sin(E)
    rate = 1 / (1 - e * cos_e)
    position = np.array([cos_e - e, root * sin_e])
    velocity = np.array([-sin_e * rate, root * cos_e * rate])
    return position, velocity


def two_body(eccentricity=0.5):
    """Planar Kepler problem x'' = -x/r**3 with period 2*pi and energy -1/2."""
    e = float(eccentricity)
    if not 0 <= e < 1:
        raise OutOfRange(f"eccentricity must lie in [0, 1), got {e}")

    def rhs(t, y):
        y = np.asarray(y)
        r2 = y[..., 0] ** 2 + y[..., 1] ** 2
        return -y / (r2 * np.sqrt(r2))[..., None]

    def exact(t):
        return kepler_exact(e, t)[0]

    def invariants(y, v):
        r = math.hypot(y[0], y[1])
        energy = 0.5 * (v[0] ** 2 + v[1] ** 2) - 1 / r
        angular = y[0] * v[1] - y[1] * v[0]
        return [float(energy), float(angular)]

    return SecondOrderIVP(
        name="two-body",
        dimension=2,
        rhs=rhs,
        y0=np.array([1 - e, 0.0]),
        v0=np.array([0.0, math.sqrt((1 + e) / (1 - e))]),
        exact=exact,
        invariants_fn=invariants,
        omega=1.0,
        period=2 * math.pi,
        params={"eccentricity": e},
    )


def _nbody_rhs(masses):
    gm = G_GAUSS * np.asarray(masses)
    n = len(masses)

    def rhs(t, y):
        y = np.asarray(y)
        pos = y.reshape(y.shape[:-1] + (n, 3))
        diff = pos[..., None, :, :] - pos[..., :, None, :]  # diff[i, j] = y_j - y_i
        dist2 = np.sum(diff * diff, axis=-1)
        np.einsum("...ii->...i", dist2)[...] = 1.0
        inv3 = dist2 ** -1.5
        np.einsum("...ii->...i", inv3)[...] = 0.0
        acc = np.einsum("...ijk,...ij,j->...ik", diff, inv3, gm)
        return acc.reshape(y.shape)

    return rhs


def nbody_invariants(masses, y, v):
    """[energy, Px, Py, Pz, Lx, Ly, Lz] for flat position/velocity vectors."""
    m = np.asarray(masses)
    n = len(m)
    pos = np.asarray(y).reshape(n, 3)
    vel = np.asarray(v).reshape(n, 3)
    kinetic = 0.5 * math.fsum(m * np.sum(vel * vel, axis=1))
    potential = []
    for i in range(n):
        for j in range(i + 1, n):
            potential.append(-G_GAUSS * m[i] * m[j] / np.linalg.norm(pos[i] - pos[j]))
    momentum = (m[:, None] * vel).sum(axis=0)
    angular = (m[:, None] * np.cross(pos, vel)).sum(axis=0)
    return [kinetic + math.fsum(potential), *momentum.tolist(), *angular.tolist()]


def five_outer():
    """Sun plus the five outer planets, all bodies free to move (d = 18)."""
    masses = np.array([p.mass for p in OUTER_PLANETS])
    return SecondOrderIVP(
        name="five-outer",
        dimension=3 * len(OUTER_PLANETS),
        rhs=_nbody_rhs(masses),
        y0=np.array([c for p in OUTER_PLANETS for c in p.position]),
        v0=np.array([c for p in OUTER_PLANETS for c in p.velocity]),
        exact=None,
        invariants_fn=lambda y, v: nbody_invariants(masses, y, v),
        omega=JUPITER_MEAN_MOTION,
        period=JUPITER_PERIOD_DAYS,
        params={"masses": tuple(masses.tolist())},
    )


REGISTRY = {
    "harmonic": (harmonic, {"omega": float}),
    "two-body": (two_body, {"eccentricity": float}),
    "five-outer": (five_outer, {}),
}


def parse_options(items):
    """['a=1', 'b=2'] -> {'a': '1', 'b': '2'}."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def make_problem(name, **options):
    """Build a registered problem; option values may be strings."""
    try:
        factory, schema = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(REGISTRY)}") from None
    unknown = set(options) - set(schema)
    if unknown:
        raise ValueError(f"problem {name!r} takes no option(s) {sorted(unknown)}")
    return factory(**{k: schema[k](v) for k, v in options.items()})
