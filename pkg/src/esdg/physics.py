"""Shallow water and compressible Euler systems in one and two dimensions.

State vectors are numpy arrays with the conservative components on the
leading axis, so every map here broadcasts over arbitrary trailing point
dimensions.  Conventions:

  SWE    u = (h, hu[, hv]),           entropy S = (h|U|^2 + g h^2)/2
  Euler  u = (rho, rho*u[, rho*v], E), entropy S = -rho*s, s = log(p/rho^gamma)

The two-point entropy-conservative fluxes are the well-balanced shallow
water fluxes (pressure term g*hL*hR/2) and the Chandrashekar fluxes for
Euler (logarithmic means of density and beta = rho/(2p)).  Both satisfy

    (v(uL) - v(uR)) . f_S(uL, uR) = psi(uL) - psi(uR)

which the test suite checks on random admissible pairs.
"""

from __future__ import annotations

import numpy as np

# States with h, rho, or p at or below this are treated as vacuum.
POSITIVITY_FLOOR = 1e-13

# Switch |1 - a/b| below which the logarithmic mean uses its series form.
_LOG_MEAN_EPS = 1e-4


class AdmissibilityError(ValueError):
    """A state left the admissible set (h > 0, or rho > 0 and p > 0)."""


def log_mean(a, b):
    """Logarithmic mean (b - a)/(log b - log a), stable as a -> b.

    For |1 - a/b| < 1e-4 the quotient log is replaced by its fourth-order
    expansion in f = (a-b)/(a+b) (Ismail-Roe), giving full precision in
    the nearly-equal limit where the direct formula loses every digit.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise ValueError("log_mean requires positive arguments")
    # Symmetric branch condition and log(b) - log(a) keep the result
    # bitwise invariant under argument swap.
    near = np.abs(a - b) < _LOG_MEAN_EPS * (a + b)
    f = (a - b) / (a + b)
    u = f * f
    series = (a + b) / (2.0 * (1.0 + u * (1.0 / 3.0 + u * (0.2 + u / 7.0))))
    denom = np.where(near, 1.0, np.log(b) - np.log(a))
    direct = np.where(near, series, (b - a) / denom)
    if direct.ndim == 0:
        return float(direct)
    return direct


def _avg(a, b):
    return 0.5 * (a + b)


class ShallowWater:
    """Shallow water system with gravitational constant g."""

    name = "swe"

    def __init__(self, dim: int, g: float = 1.0):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if g <= 0.0:
            raise ValueError("g must be positive")
        self.dim = dim
        self.g = float(g)
        self.ncons = dim + 1

    def __repr__(self):
        return f"ShallowWater(dim={self.dim}, g={self.g})"

    def oned(self):
        return ShallowWater(1, self.g)

    def field_names(self):
        return ("h", "hu") if self.dim == 1 else ("h", "hu", "hv")

    # -- admissibility -------------------------------------------------
    def check_admissible(self, u, where: str = ""):
        if not np.all(np.isfinite(u)):
            raise AdmissibilityError(f"non-finite state {where}".strip())
        if np.any(u[0] <= POSITIVITY_FLOOR):
            raise AdmissibilityError(f"non-positive water height {where}".strip())

    def velocities(self, u):
        return tuple(u[1 + i] / u[0] for i in range(self.dim))

    # -- entropy maps ---------------------------------------------------
    def entropy(self, u):
        vel = self.velocities(u)
        u2 = sum(w * w for w in vel)
        return 0.5 * (u[0] * u2 + self.g * u[0] * u[0])

    def entropy_variables(self, u):
        vel = self.velocities(u)
        u2 = sum(w * w for w in vel)
        return np.stack([self.g * u[0] - 0.5 * u2, *vel])

    def conservative_from_entropy(self, v):
        u2 = sum(v[1 + i] * v[1 + i] for i in range(self.dim))
        h = (v[0] + 0.5 * u2) / self.g
        if np.any(h <= POSITIVITY_FLOOR):
            raise AdmissibilityError("entropy variables outside admissible image")
        return np.stack([h, *[h * v[1 + i] for i in range(self.dim)]])

    # -- fluxes -----------------------------------------------------------
    def physical_flux(self, u, direction: int):
        vel = self.velocities(u)
        p = 0.5 * self.g * u[0] * u[0]
        mom_n = u[1 + direction]
        comps = [mom_n]
        for i in range(self.dim):
            comps.append(mom_n * vel[i] + (p if i == direction else 0.0))
        return np.stack(comps)

    def entropy_potential(self, u, direction: int):
        vel = self.velocities(u)
        return 0.5 * self.g * u[0] * u[0] * vel[direction]

    def ec_flux(self, uL, uR, direction: int):
        hL, hR = uL[0], uR[0]
        velL = self.velocities(uL)
        velR = self.velocities(uR)
        mom_avg = _avg(uL[1 + direction], uR[1 + direction])
        p_avg = 0.5 * self.g * hL * hR
        comps = [mom_avg * np.ones_like(p_avg)]
        for i in range(self.dim):
            c = mom_avg * _avg(velL[i], velR[i])
            if i == direction:
                c = c + p_avg
            comps.append(c)
        return np.stack(comps)

    def wavespeed(self, u):
        vel = self.velocities(u)
        u2 = sum(w * w for w in vel)
        return np.sqrt(u2) + np.sqrt(self.g * u[0])

    # -- boundary states ----------------------------------------------------
    def mirror_state(self, u):
        if self.dim != 1:
            raise ValueError("mirror_state applies to 1D channel states")
        return np.stack([u[0], -u[1]])

    def wall_state(self, u, nx, ny=None):
        """Reflect the normal momentum component across a wall."""
        if self.dim == 1:
            return self.mirror_state(u)
        un = u[1] * nx + u[2] * ny
        return np.stack([u[0], u[1] - 2.0 * un * nx, u[2] - 2.0 * un * ny])


class Euler:
    """Compressible Euler system for an ideal gas with ratio gamma."""

    name = "euler"

    def __init__(self, dim: int, gamma: float = 1.4):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        self.dim = dim
        self.gamma = float(gamma)
        self.ncons = dim + 2

    def __repr__(self):
        return f"Euler(dim={self.dim}, gamma={self.gamma})"

    def oned(self):
        return Euler(1, self.gamma)

    def field_names(self):
        return ("rho", "rhou", "E") if self.dim == 1 else ("rho", "rhou", "rhov", "E")

    def velocities(self, u):
        return tuple(u[1 + i] / u[0] for i in range(self.dim))

    def pressure(self, u):
        vel = self.velocities(u)
        ke = 0.5 * u[0] * sum(w * w for w in vel)
        return (self.gamma - 1.0) * (u[-1] - ke)

    # -- admissibility ----------------------------------------------------
    def check_admissible(self, u, where: str = ""):
        if not np.all(np.isfinite(u)):
            raise AdmissibilityError(f"non-finite state {where}".strip())
        if np.any(u[0] <= POSITIVITY_FLOOR):
            raise AdmissibilityError(f"non-positive density {where}".strip())
        if np.any(self.pressure(u) <= POSITIVITY_FLOOR):
            raise AdmissibilityError(f"non-positive pressure {where}".strip())

    # -- entropy maps --------------------------------------------------------
    def _specific_entropy(self, u):
        return np.log(self.pressure(u)) - self.gamma * np.log(u[0])

    def entropy(self, u):
        return -u[0] * self._specific_entropy(u)

    def entropy_variables(self, u):
        g = self.gamma
        p = self.pressure(u)
        rho_e = p / (g - 1.0)
        s = np.log(p) - g * np.log(u[0])
        v1 = (rho_e * (g + 1.0 - s) - u[-1]) / rho_e
        comps = [v1]
        comps += [u[1 + i] / rho_e for i in range(self.dim)]
        comps.append(-u[0] / rho_e)
        return np.stack(comps)

    def conservative_from_entropy(self, v):
        g = self.gamma
        v_last = v[-1]
        if np.any(v_last >= 0.0):
            raise AdmissibilityError("entropy variables outside admissible image")
        m2 = sum(v[1 + i] * v[1 + i] for i in range(self.dim))
        s = g - v[0] + m2 / (2.0 * v_last)
        rho_e = ((g - 1.0) / (-v_last) ** g) ** (1.0 / (g - 1.0)) * np.exp(
            -s / (g - 1.0)
        )
        rho = -rho_e * v_last
        comps = [rho]
        comps += [rho_e * v[1 + i] for i in range(self.dim)]
        comps.append(rho_e * (1.0 - m2 / (2.0 * v_last)))
        return np.stack(comps)

    # -- fluxes -------------------------------------------------------------
    def physical_flux(self, u, direction: int):
        vel = self.velocities(u)
        p = self.pressure(u)
        mom_n = u[1 + direction]
        comps = [mom_n]
        for i in range(self.dim):
            comps.append(mom_n * vel[i] + (p if i == direction else 0.0))
        comps.append(vel[direction] * (u[-1] + p))
        return np.stack(comps)

    def entropy_potential(self, u, direction: int):
        return (self.gamma - 1.0) * u[1 + direction]

    def ec_flux(self, uL, uR, direction: int):
        """Chandrashekar entropy-conservative flux.

        rho_log = logmean(rho), beta = rho/(2p), p_avg = avg(rho)/(2 avg(beta)),
        E_hat = rho_log * (1/(2 beta_log (gamma-1)) + (uL.uR)/2).
        """
        g = self.gamma
        rhoL, rhoR = uL[0], uR[0]
        velL = self.velocities(uL)
        velR = self.velocities(uR)
        pL, pR = self.pressure(uL), self.pressure(uR)
        betaL, betaR = rhoL / (2.0 * pL), rhoR / (2.0 * pR)

        rho_log = log_mean(rhoL, rhoR)
        beta_log = log_mean(betaL, betaR)
        p_avg = _avg(rhoL, rhoR) / (2.0 * _avg(betaL, betaR))
        u2_avg = sum(velL[i] * velR[i] for i in range(self.dim))
        e_hat = rho_log * (1.0 / (2.0 * beta_log * (g - 1.0)) + 0.5 * u2_avg)

        vel_avg = [_avg(velL[i], velR[i]) for i in range(self.dim)]
        mass = rho_log * vel_avg[direction]
        comps = [mass]
        for i in range(self.dim):
            c = mass * vel_avg[i]
            if i == direction:
                c = c + p_avg
            comps.append(c)
        comps.append((e_hat + p_avg) * vel_avg[direction])
        return np.stack(comps)

    def wavespeed(self, u):
        vel = self.velocities(u)
        u2 = sum(w * w for w in vel)
        return np.sqrt(u2) + np.sqrt(self.gamma * self.pressure(u) / u[0])

    # -- boundary states ------------------------------------------------------
    def mirror_state(self, u):
        if self.dim != 1:
            raise ValueError("mirror_state applies to 1D channel states")
        return np.stack([u[0], -u[1], u[2]])

    def wall_state(self, u, nx, ny=None):
        if self.dim == 1:
            return self.mirror_state(u)
        un = u[1] * nx + u[2] * ny
        return np.stack([u[0], u[1] - 2.0 * un * nx, u[2] - 2.0 * un * ny, u[3]])


def normal_ec_flux(model, uL, uR, nx, ny):
    """Contraction n_x f_{x,S} + n_y f_{y,S} for a 2D system."""
    return nx * model.ec_flux(uL, uR, 0) + ny * model.ec_flux(uL, uR, 1)


def normal_flux(model, u, nx, ny):
    return nx * model.physical_flux(u, 0) + ny * model.physical_flux(u, 1)


def lax_friedrichs(model, uL, uR, base_flux):
    """Penalize a base flux with -(lambda/2)(uR - uL), local wavespeed."""
    lam = np.maximum(model.wavespeed(uL), model.wavespeed(uR))
    return base_flux - 0.5 * lam * (uR - uL)


def transform_matrix(model_1d, normal) -> np.ndarray:
    """Momentum-distributing map R between 1D and 2D conservative variables.

    ``normal`` is the channel direction at the interface as a unit vector
    in the 2D frame; scalar fields pass through and the 1D momentum is
    distributed along it.  R^T R = I.
    """
    n = np.asarray(normal, dtype=float)
    if n.shape != (2,):
        raise ValueError("normal must be a 2-vector")
    if abs(n @ n - 1.0) > 1e-12:
        raise ValueError("normal must be a unit vector")
    if model_1d.dim != 1:
        raise ValueError("transform_matrix expects the 1D system")
    if isinstance(model_1d, ShallowWater):
        return np.array([[1.0, 0.0], [0.0, n[0]], [0.0, n[1]]])
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, n[0], 0.0],
            [0.0, n[1], 0.0],
            [0.0, 0.0, 1.0],
        ]
    )


def lift_1d_to_2d(u1, R):
    return np.tensordot(R, u1, axes=(1, 0))


def project_2d_to_1d(u2, R):
    return np.tensordot(R.T, u2, axes=(1, 0))
