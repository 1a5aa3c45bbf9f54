"""Profile ODE t'' = -kappa t^3 / (2 C^2) for the separable constant-curvature family.

Multiplying by t' and integrating once gives the conserved quantity

    E = (t')^2 + kappa t^4 / (4 C^2) = D / (4 C^2),

equivalently z = +-2C * integral dt / sqrt(D - kappa t^4) on stretches where
t is monotone.  The solver is classical RK4; ``quadrature_crosscheck``
recomputes z(t) from that integral as an independent path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import jets
from .errors import InterpolationRange, LeftAdmissibleRegion
from .jets import Jet3

# the integral form needs D - kappa t^4 >= 0; exact solutions touch 0 at turning points
ADMISSIBLE_SLACK = 1e-9


@dataclass(frozen=True)
class OdeSolution:
    z: np.ndarray
    t: np.ndarray
    dt: np.ndarray
    h: float
    kappa: float
    C: float
    D: float

    def __post_init__(self):
        for name in ("z", "t", "dt"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def conserved_value(self) -> float:
        return self.D / (4.0 * self.C**2)

    def first_integral(self, t=None, dt=None) -> np.ndarray:
        t = self.t if t is None else np.asarray(t)
        dt = self.dt if dt is None else np.asarray(dt)
        return dt**2 + self.kappa * t**4 / (4.0 * self.C**2)

    def drift(self) -> float:
        return float(np.max(np.abs(self.first_integral() - self.conserved_value)))

    def second_derivative(self, t):
        return -self.kappa * np.asarray(t) ** 3 / (2.0 * self.C**2)

    def third_derivative(self, t, dt):
        return -3.0 * self.kappa * np.asarray(t) ** 2 * np.asarray(dt) / (2.0 * self.C**2)

    def derivatives(self, z: float) -> tuple[float, float, float, float]:
        """t and its first three z-derivatives at ``z``.

        t and t' come from cubic Hermite interpolation of the samples (t' is
        interpolated with t'' taken from the ODE); the higher derivatives are
        then read off the ODE itself, so the returned jet solves it exactly.
        """
        z = float(z)
        zs = self.z
        span = 1e-12 * max(1.0, abs(zs[-1] - zs[0]))
        if not (zs[0] - span <= z <= zs[-1] + span):
            raise InterpolationRange(f"z = {z!r} outside solved range [{zs[0]!r}, {zs[-1]!r}]")
        k = int(np.clip(np.searchsorted(zs, z) - 1, 0, len(zs) - 2))
        z0, z1 = zs[k], zs[k + 1]
        hk = z1 - z0
        s = (z - z0) / hk
        h00, h10 = 2 * s**3 - 3 * s**2 + 1, s**3 - 2 * s**2 + s
        h01, h11 = -2 * s**3 + 3 * s**2, s**3 - s**2
        t0, t1 = self.t[k], self.t[k + 1]
        d0, d1 = self.dt[k], self.dt[k + 1]
        a0, a1 = self.second_derivative(t0), self.second_derivative(t1)
        t = h00 * t0 + h10 * hk * d0 + h01 * t1 + h11 * hk * d1
        dt = h00 * d0 + h10 * hk * a0 + h01 * d1 + h11 * hk * a1
        return float(t), float(dt), float(self.second_derivative(t)), float(self.third_derivative(t, dt))

    def t_jet(self, zj: Jet3) -> Jet3:
        return jets.compose(zj, self.derivatives(float(zj.value)))


def solve_t_ode(
    kappa: float,
    C: float,
    D: float,
    t0: float,
    sign: int = 1,
    zrange: tuple[float, float] = (0.0, 1.0),
    h: float = 1e-3,
) -> OdeSolution:
    """Integrate from ``zrange[0]`` with t'(z0) = sign * sqrt(D - kappa t0^4) / (2|C|)."""
    if C == 0:
        raise ValueError("C must be nonzero")
    if h <= 0:
        raise ValueError("step h must be positive")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    z_start, z_end = map(float, zrange)
    if z_end <= z_start:
        raise ValueError("zrange must be increasing")
    if t0 <= 0:
        raise LeftAdmissibleRegion("initial t must be positive", z_start)
    gap = D - kappa * t0**4
    if gap <= 0:
        raise LeftAdmissibleRegion("D - kappa t0^4 must be positive", z_start)

    n = max(1, math.ceil((z_end - z_start) / h - 1e-9))
    step = (z_end - z_start) / n
    c2 = 2.0 * C * C
    slack = ADMISSIBLE_SLACK * max(1.0, abs(D))

    def acc(t):
        return -kappa * t**3 / c2

    t, v = float(t0), sign * math.sqrt(gap) / (2.0 * abs(C))
    zs, ts, vs = [z_start], [t], [v]
    for i in range(1, n + 1):
        k1t, k1v = v, acc(t)
        k2t, k2v = v + 0.5 * step * k1v, acc(t + 0.5 * step * k1t)
        k3t, k3v = v + 0.5 * step * k2v, acc(t + 0.5 * step * k2t)
        k4t, k4v = v + step * k3v, acc(t + step * k3t)
        t = t + step / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)
        v = v + step / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if t <= 0:
            raise LeftAdmissibleRegion("t reached zero", zs[-1])
        if D - kappa * t**4 < -slack:
            raise LeftAdmissibleRegion("D - kappa t^4 became negative", zs[-1])
        zs.append(z_start + i * step)
        ts.append(t)
        vs.append(v)
    return OdeSolution(np.array(zs), np.array(ts), np.array(vs), step, kappa, C, D)


def quadrature_z(sol: OdeSolution, t_from: float, t_to: float, direction: int) -> float:
    """Signed z-increment 2|C| * integral dt / sqrt(D - kappa t^4) along a monotone stretch."""

    def integrand(t):
        return 1.0 / math.sqrt(sol.D - sol.kappa * t**4)

    val, _ = integrate.quad(integrand, t_from, t_to, epsabs=1e-13, epsrel=1e-12, limit=200)
    return direction * 2.0 * abs(sol.C) * val


def monotone_stretches(sol: OdeSolution) -> list[np.ndarray]:
    signs = np.sign(sol.dt)
    breaks = np.nonzero(signs[1:] != signs[:-1])[0] + 1
    return [idx for idx in np.split(np.arange(len(sol.z)), breaks) if len(idx) > 1]


def quadrature_crosscheck(sol: OdeSolution, margin: float = 1e-3, stride: int = 1) -> float:
    """Max |z_ode - z_quad| over samples of each monotone stretch.

    Samples where D - kappa t^4 < margin * D (next to a turning point, where
    the integrand is singular) are skipped; each stretch is anchored at its
    sample with the largest |t'|.
    """
    worst = 0.0
    for idx in monotone_stretches(sol):
        direction = int(np.sign(sol.dt[idx[0]]))
        if direction == 0:
            continue
        anchor = idx[np.argmax(np.abs(sol.dt[idx]))]
        for j in idx[::stride]:
            if sol.D - sol.kappa * sol.t[j] ** 4 < margin * sol.D:
                continue
            z_quad = sol.z[anchor] + quadrature_z(sol, sol.t[anchor], sol.t[j], direction)
            worst = max(worst, abs(z_quad - sol.z[j]))
    return worst
