"""Staggered grid, absorption field, solution containers, and difference stencils."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angular import QuadratureRule, orthonormal_legendre_table

__all__ = [
    "EMISSION_LINEAR",
    "EMISSION_STEFAN_BOLTZMANN",
    "BC_ZERO_GHOST",
    "BC_PERIODIC",
    "PhysicalParams",
    "StaggeredGrid",
    "AbsorptionField",
    "MacroState",
    "FullMicroState",
    "LowRankMicroState",
    "absorption_from_function",
    "apply_diff",
    "diff_minus",
    "diff_plus",
    "diff_center",
    "diff_interface",
    "emission_intensity",
    "beta_of_T",
    "beta_fields",
    "scalar_flux",
    "init_from_kinetic",
    "orthonormal_columns",
    "complete_orthonormal_columns",
    "zero_low_rank_state",
]

EMISSION_LINEAR = "linear"
EMISSION_STEFAN_BOLTZMANN = "stefan_boltzmann"
_EMISSIONS = (EMISSION_LINEAR, EMISSION_STEFAN_BOLTZMANN)

BC_ZERO_GHOST = "zero_ghost"
BC_PERIODIC = "periodic"
_BCS = (BC_ZERO_GHOST, BC_PERIODIC)

# QR diagonal entries at or below this fraction of the largest column norm mark
# directions that carry no information; they are replaced by canonical vectors.
_RANK_TOL = 1e-12
_ORTH_TOL = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Scaling and material constants shared by every scheme."""

    epsilon: float
    c: float = 1.0
    a_rad: float = 1.0
    c_nu: float = 1.0
    emission: str = EMISSION_LINEAR

    def __post_init__(self):
        for name in ("epsilon", "c", "a_rad", "c_nu"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.emission not in _EMISSIONS:
            raise ValueError(f"emission must be one of {_EMISSIONS}")

    @property
    def alpha(self) -> float:
        """Temperature relaxation factor 2 / c_nu."""
        return 2.0 / self.c_nu


@dataclass(frozen=True)
class StaggeredGrid:
    """Equidistant staggered grid: cell centers plus the surrounding interfaces."""

    x_min: float
    x_max: float
    n_cells: int
    dx: float = field(init=False)
    centers: np.ndarray = field(init=False, repr=False)
    interfaces: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be a positive integer")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        dx = (self.x_max - self.x_min) / self.n_cells
        interfaces = self.x_min + dx * np.arange(self.n_cells + 1)
        centers = 0.5 * (interfaces[:-1] + interfaces[1:])
        interfaces.setflags(write=False)
        centers.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "interfaces", interfaces)


@dataclass(frozen=True)
class AbsorptionField:
    """Absorption cross-section sampled at cell centers and interfaces."""

    at_centers: np.ndarray
    at_interfaces: np.ndarray
    sigma_min: float = field(init=False)

    def __post_init__(self):
        ac = np.asarray(self.at_centers, dtype=float)
        ai = np.asarray(self.at_interfaces, dtype=float)
        if ai.shape != (ac.shape[0] + 1,):
            raise ValueError("interface samples must number n_cells + 1")
        if not (np.all(ac > 0.0) and np.all(ai > 0.0)):
            raise ValueError("absorption must be strictly positive everywhere")
        ac.setflags(write=False)
        ai.setflags(write=False)
        object.__setattr__(self, "at_centers", ac)
        object.__setattr__(self, "at_interfaces", ai)
        object.__setattr__(self, "sigma_min", float(min(ac.min(), ai.min())))


def absorption_from_function(sigma_fn, grid: StaggeredGrid) -> AbsorptionField:
    """Sample an analytic cross-section directly at centers and interfaces."""
    ac = np.asarray(sigma_fn(grid.centers), dtype=float)
    ai = np.asarray(sigma_fn(grid.interfaces), dtype=float)
    return AbsorptionField(ac, ai)


@dataclass(frozen=True)
class MacroState:
    """Temperature and mesoscopic correction at cell centers."""

    temperature: np.ndarray
    h_meso: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.temperature, dtype=float)
        h = np.asarray(self.h_meso, dtype=float)
        if t.shape != h.shape or t.ndim != 1:
            raise ValueError("temperature and h_meso must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(h))):
            raise ValueError("macro state contains non-finite entries")
        t.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "temperature", t)
        object.__setattr__(self, "h_meso", h)

    @property
    def n_cells(self) -> int:
        return self.temperature.shape[0]


@dataclass(frozen=True)
class FullMicroState:
    """Dense micro moments: row i holds moments 1..N at interface i."""

    g_matrix: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g_matrix, dtype=float)
        if g.ndim != 2:
            raise ValueError("g_matrix must be a (n_interfaces x n_moments) matrix")
        if not np.all(np.isfinite(g)):
            raise ValueError("micro state contains non-finite entries")
        g.setflags(write=False)
        object.__setattr__(self, "g_matrix", g)

    @property
    def n_moments(self) -> int:
        return self.g_matrix.shape[1]


@dataclass(frozen=True)
class LowRankMicroState:
    """Factored micro moments g = X S V^T with orthonormal X and V."""

    X_basis: np.ndarray
    S_coeff: np.ndarray
    V_basis: np.ndarray
    rank: int

    def __post_init__(self):
        x = np.asarray(self.X_basis, dtype=float)
        s = np.asarray(self.S_coeff, dtype=float)
        v = np.asarray(self.V_basis, dtype=float)
        r = self.rank
        if not (1 <= r <= min(x.shape[0], v.shape[0])):
            raise ValueError("rank must satisfy 1 <= rank <= min(n_interfaces, n_moments)")
        if x.shape[1] != r or v.shape[1] != r or s.shape != (r, r):
            raise ValueError("factor shapes inconsistent with rank")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(s)) and np.all(np.isfinite(v))):
            raise ValueError("low-rank state contains non-finite entries")
        eye = np.eye(r)
        if np.max(np.abs(x.T @ x - eye)) > _ORTH_TOL:
            raise ValueError("X_basis columns are not orthonormal")
        if np.max(np.abs(v.T @ v - eye)) > _ORTH_TOL:
            raise ValueError("V_basis columns are not orthonormal")
        for arr in (x, s, v):
            arr.setflags(write=False)
        object.__setattr__(self, "X_basis", x)
        object.__setattr__(self, "S_coeff", s)
        object.__setattr__(self, "V_basis", v)

    def reconstruct(self) -> np.ndarray:
        """Materialize the dense moment matrix X S V^T."""
        return self.X_basis @ self.S_coeff @ self.V_basis.T

    def micro_norm_sq(self, dx: float) -> float:
        """Squared discrete L2 norm of the micro moments, dx * ||S||_F^2."""
        return float(np.sum(self.S_coeff**2) * dx)


# ---------------------------------------------------------------------------
# difference stencils


def _check_bc(bc: str):
    if bc not in _BCS:
        raise ValueError(f"bc must be one of {_BCS}")


def _left_ghost(values: np.ndarray, bc: str) -> np.ndarray:
    if bc == BC_PERIODIC:
        return values[-1:]
    return np.zeros_like(values[:1])


def _right_ghost(values: np.ndarray, bc: str) -> np.ndarray:
    if bc == BC_PERIODIC:
        return values[:1]
    return np.zeros_like(values[:1])


def diff_minus(values, grid: StaggeredGrid, bc: str = BC_ZERO_GHOST):
    """Backward difference on interface data: (u_j - u_{j-1}) / dx."""
    _check_bc(bc)
    v = np.asarray(values, dtype=float)
    if v.shape[0] != grid.n_cells + 1:
        raise ValueError("interface data must have n_cells + 1 rows")
    ext = np.concatenate([_left_ghost(v, bc), v], axis=0)
    return np.diff(ext, axis=0) / grid.dx


def diff_plus(values, grid: StaggeredGrid, bc: str = BC_ZERO_GHOST):
    """Forward difference on interface data: (u_{j+1} - u_j) / dx."""
    _check_bc(bc)
    v = np.asarray(values, dtype=float)
    if v.shape[0] != grid.n_cells + 1:
        raise ValueError("interface data must have n_cells + 1 rows")
    ext = np.concatenate([v, _right_ghost(v, bc)], axis=0)
    return np.diff(ext, axis=0) / grid.dx


def diff_center(values, grid: StaggeredGrid):
    """Interface-to-center divergence: (u_{i+1/2} - u_{i-1/2}) / dx. Needs no ghosts."""
    v = np.asarray(values, dtype=float)
    if v.shape[0] != grid.n_cells + 1:
        raise ValueError("interface data must have n_cells + 1 rows")
    return np.diff(v, axis=0) / grid.dx


def diff_interface(values, grid: StaggeredGrid, bc: str = BC_ZERO_GHOST):
    """Center-to-interface gradient: (u_{i+1} - u_i) / dx with ghost cells per bc."""
    _check_bc(bc)
    v = np.asarray(values, dtype=float)
    if v.shape[0] != grid.n_cells:
        raise ValueError("center data must have n_cells rows")
    ext = np.concatenate([_left_ghost(v, bc), v, _right_ghost(v, bc)], axis=0)
    return np.diff(ext, axis=0) / grid.dx


_DIFF_KINDS = {
    "d_plus": diff_plus,
    "d_minus": diff_minus,
    "d_zero_centers": None,  # handled below, takes no bc
    "delta_zero_interfaces": diff_interface,
}


def apply_diff(kind: str, values, grid: StaggeredGrid, bc: str = BC_ZERO_GHOST):
    """Apply one of the staggered difference stencils by name."""
    if kind not in _DIFF_KINDS:
        raise ValueError(f"kind must be one of {sorted(_DIFF_KINDS)}")
    if kind == "d_zero_centers":
        return diff_center(values, grid)
    return _DIFF_KINDS[kind](values, grid, bc)


# ---------------------------------------------------------------------------
# emission and reconstruction


def emission_intensity(temperature, params: PhysicalParams):
    """Blackbody emission a c T (linear closure) or a c T^4."""
    t = np.asarray(temperature, dtype=float)
    if params.emission == EMISSION_LINEAR:
        return params.a_rad * params.c * t
    return params.a_rad * params.c * t**4


def beta_of_T(temperature, emission: str):
    """Temperature derivative factor of the emission law: 1 or 4 T^3."""
    if emission not in _EMISSIONS:
        raise ValueError(f"emission must be one of {_EMISSIONS}")
    t = np.asarray(temperature, dtype=float)
    if emission == EMISSION_LINEAR:
        out = np.ones_like(t)
    else:
        out = 4.0 * t**3
    if np.isscalar(temperature):
        return float(out)
    return out


def beta_fields(macro: MacroState, emission: str):
    """Emission derivative factor at centers and (averaged) interfaces.

    Interface values are arithmetic means of neighbors with zero-temperature
    ghost cells at the domain ends.
    """
    centers = beta_of_T(macro.temperature, emission)
    ghost = beta_of_T(0.0, emission)
    padded = np.concatenate([[ghost], centers, [ghost]])
    interfaces = 0.5 * (padded[:-1] + padded[1:])
    return centers, interfaces


def scalar_flux(macro: MacroState, params: PhysicalParams) -> np.ndarray:
    """Scalar flux B(T) + eps^2 h at cell centers."""
    return emission_intensity(macro.temperature, params) + params.epsilon**2 * macro.h_meso


def init_from_kinetic(f_sampler, T0, grid: StaggeredGrid, params: PhysicalParams,
                      quad: QuadratureRule):
    """Macro-micro initial data from a kinetic density f(x, mu) and temperature T0(x).

    f_sampler and T0 must accept numpy arrays and broadcast; the micro moments are
    g_k = <(f - <f>/2) P_k> / eps at interfaces for k = 1..quad.count-1, and
    h = (<f>/2 - B(T0)) / eps^2 at centers.
    """
    n_moments = quad.count - 1
    if n_moments < 1:
        raise ValueError("quadrature must have at least two nodes")
    table = orthonormal_legendre_table(n_moments, quad.nodes)

    f_if = np.asarray(f_sampler(grid.interfaces[:, None], quad.nodes[None, :]), dtype=float)
    mean_if = 0.5 * (f_if @ quad.weights)
    fluct = f_if - mean_if[:, None]
    g = ((fluct * quad.weights[None, :]) @ table[1:].T) / params.epsilon

    f_c = np.asarray(f_sampler(grid.centers[:, None], quad.nodes[None, :]), dtype=float)
    t0 = np.asarray(T0(grid.centers), dtype=float)
    h = (0.5 * (f_c @ quad.weights) - emission_intensity(t0, params)) / params.epsilon**2
    return MacroState(t0, h), FullMicroState(g)


# ---------------------------------------------------------------------------
# orthonormal factor helpers


def complete_orthonormal_columns(basis: np.ndarray, n_new: int) -> np.ndarray:
    """Canonical unit vectors orthonormalized against `basis` (two MGS sweeps)."""
    m = basis.shape[0]
    cols = [basis[:, j] for j in range(basis.shape[1])]
    added = []
    for k in range(m):
        if len(added) == n_new:
            break
        v = np.zeros(m)
        v[k] = 1.0
        for _ in range(2):
            for q in cols:
                v = v - np.dot(q, v) * q
        nv = np.linalg.norm(v)
        if nv > 0.1:
            v = v / nv
            cols.append(v)
            added.append(v)
    if len(added) < n_new:
        raise ValueError("cannot complete basis: not enough independent directions")
    return np.column_stack(added) if added else np.zeros((m, 0))


def orthonormal_columns(mat: np.ndarray) -> np.ndarray:
    """Orthonormal basis with the same column count as `mat`.

    Columns whose QR diagonal entry falls below 1e-12 of the largest column norm
    carry no reliable direction and are replaced by canonical completions, so the
    result always has full column rank.
    """
    mat = np.asarray(mat, dtype=float)
    m, r = mat.shape
    if r > m:
        raise ValueError("cannot orthonormalize more columns than rows")
    q, rr = np.linalg.qr(mat)
    col_scale = np.max(np.linalg.norm(mat, axis=0)) if r else 0.0
    diag = np.abs(np.diag(rr))
    keep = diag > _RANK_TOL * col_scale if col_scale > 0.0 else np.zeros(r, dtype=bool)
    if np.all(keep):
        return q
    kept = q[:, keep]
    fresh = complete_orthonormal_columns(kept, r - int(keep.sum()))
    out = np.empty((m, r))
    out[:, keep] = kept
    out[:, ~keep] = fresh
    return out


def zero_low_rank_state(n_interfaces: int, n_moments: int, rank: int = 1) -> LowRankMicroState:
    """Valid orthonormal factorization of the zero moment matrix at a given rank."""
    if not (1 <= rank <= min(n_interfaces, n_moments)):
        raise ValueError("rank out of range for requested dimensions")
    x = np.zeros((n_interfaces, rank))
    x[:, 0] = 1.0 / np.sqrt(n_interfaces)
    if rank > 1:
        x[:, 1:] = complete_orthonormal_columns(x[:, :1], rank - 1)
    v = np.eye(n_moments)[:, :rank].copy()
    s = np.zeros((rank, rank))
    return LowRankMicroState(x, s, v, rank)
