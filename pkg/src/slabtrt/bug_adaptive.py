"""Rank-adaptive integrator: diffusion-limit basis augmentation plus conservative truncation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bug_fixed import BugStepReport, galerkin_coefficient_update, k_step, l_step
from .full_scheme import FullSchemeWorkspace, meso_macro_update
from .mesh_state import (
    LowRankMicroState,
    MacroState,
    beta_fields,
    complete_orthonormal_columns,
    diff_interface,
    orthonormal_columns,
)

__all__ = [
    "TruncationConfig",
    "AugmentedFactors",
    "TruncationDetails",
    "diffusion_limit_direction",
    "augment_bases",
    "galerkin_s_hat",
    "ap_truncate",
    "step_bug_adaptive",
]

# Augmented coefficient columns whose norm is this small relative to the whole
# coefficient block contribute nothing and get a padded spatial direction.
_DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class TruncationConfig:
    """Relative singular-value tolerance and rank cap for the adaptive scheme."""

    theta_rel: float
    max_rank: int

    def __post_init__(self):
        if self.theta_rel < 0.0:
            raise ValueError("theta_rel must be nonnegative")
        if self.max_rank < 2:
            raise ValueError("max_rank must be at least 2 (conserved column plus one)")


@dataclass
class AugmentedFactors:
    """Augmented orthonormal bases and the projections of the old factors.

    The first spatial column spans the diffusion-limit direction (when nonzero)
    and the first angular column is exactly the unit first-moment direction.
    """

    X_hat: np.ndarray
    V_hat: np.ndarray
    M_hat: np.ndarray
    N_hat: np.ndarray
    w_ap: np.ndarray
    S_hat: np.ndarray | None = field(default=None)


@dataclass(frozen=True)
class TruncationDetails:
    """Intermediate truncation factors, exposed for verification."""

    S_ap: np.ndarray
    S_rem_hat: np.ndarray
    U_hat: np.ndarray
    W_hat: np.ndarray
    R2: np.ndarray
    S_hat: np.ndarray
    r_star: int


def diffusion_limit_direction(macro: MacroState, ws: FullSchemeWorkspace) -> np.ndarray:
    """Interface vector (beta / sigma) * delta0(a c T) spanned by the micro limit."""
    p = ws.params
    _, beta_if = beta_fields(macro, p.emission)
    grad_t = diff_interface(p.a_rad * p.c * macro.temperature, ws.grid, ws.bc)
    return beta_if * grad_t / ws.sigma.at_interfaces


def augment_bases(state: LowRankMicroState, macro: MacroState, ws: FullSchemeWorkspace,
                  dt: float) -> AugmentedFactors:
    """Update both bases and prepend the limit directions before orthonormalization."""
    k_new, _ = k_step(state, macro, ws, dt)
    l_new, _ = l_step(state, macro, ws, dt)
    w_ap = diffusion_limit_direction(macro, ws)
    b_vec = ws.angular.b_vec

    n_rows, n_mom = state.X_basis.shape[0], state.V_basis.shape[0]
    n_aug = min(2 * state.rank + 1, n_rows, n_mom)
    x_stack = np.column_stack([w_ap, k_new, state.X_basis])[:, :n_aug]
    v_stack = np.column_stack([b_vec, l_new, state.V_basis])[:, :n_aug]
    x_hat = orthonormal_columns(x_stack)
    v_hat = orthonormal_columns(v_stack)

    # Pin the conserved-moment direction to +b/||b|| (QR fixes it up to sign).
    if v_hat[:, 0] @ b_vec < 0.0:
        v_hat = v_hat.copy()
        v_hat[:, 0] *= -1.0

    m_hat = x_hat.T @ state.X_basis
    n_hat = v_hat.T @ state.V_basis
    return AugmentedFactors(X_hat=x_hat, V_hat=v_hat, M_hat=m_hat, N_hat=n_hat, w_ap=w_ap)


def galerkin_s_hat(aug: AugmentedFactors, state_old: LowRankMicroState, macro: MacroState,
                   ws: FullSchemeWorkspace, dt: float) -> np.ndarray:
    """Coefficient update in the augmented bases from the projected old solution."""
    s_tilde = aug.M_hat @ state_old.S_coeff @ aug.N_hat.T
    return galerkin_coefficient_update(aug.X_hat, aug.V_hat, s_tilde, macro, ws, dt)


def _choose_kept_rank(svals: np.ndarray, theta_rel: float) -> int:
    """Smallest kept count whose discarded tail passes the relative tolerance.

    The tail test is sqrt(sum_{i>r*} sigma_i / sigma_1) <= theta_rel on the
    spectrum normalized by its largest value; the square-root-of-sum form
    retains weak freshly injected directions long enough for the rank to track
    the kinetic regime, while clean spectra still collapse.
    """
    n = svals.size
    if n == 0 or svals[0] <= 0.0:
        return 1
    normalized = svals / svals[0]
    tail = np.concatenate([np.cumsum(normalized[::-1])[::-1], [0.0]])
    for kept in range(1, n + 1):
        if np.sqrt(tail[kept]) <= theta_rel:
            return kept
    return n


def ap_truncate(aug: AugmentedFactors, s_hat: np.ndarray, cfg: TruncationConfig,
                return_details: bool = False):
    """Split off the conserved column, truncate the remainder by SVD, and refold.

    The column paired with the first angular basis vector is kept exactly, so the
    first micro moment survives truncation; the remaining directions are cut at
    the normalized singular-value tail tolerance of cfg.theta_rel.
    """
    x_hat, v_hat = aug.X_hat, aug.V_hat
    n_rows, n_mom = x_hat.shape[0], v_hat.shape[0]
    k_hat = x_hat @ s_hat

    k_ap = k_hat[:, :1]
    k_rem = k_hat[:, 1:]
    v_ap = v_hat[:, :1]
    v_rem = v_hat[:, 1:]

    x_rem_hat, s_rem_hat = np.linalg.qr(k_rem)
    u_mat, svals, wt_mat = np.linalg.svd(s_rem_hat)
    r_star = _choose_kept_rank(svals, cfg.theta_rel)
    r_star = min(r_star, cfg.max_rank - 1, n_rows - 1, n_mom - 1)
    r_star = max(r_star, 1)

    u_hat = u_mat[:, :r_star]
    w_hat = wt_mat[:r_star, :].T
    x_rem = x_rem_hat @ u_hat
    s_rem = np.diag(svals[:r_star])
    v_new = np.column_stack([v_ap, v_rem @ w_hat])

    ap_norm = float(np.linalg.norm(k_ap))
    if ap_norm <= _DEGENERATE_TOL * max(float(np.linalg.norm(k_hat)), 1e-300):
        # Uniform-temperature states: keep a padded direction with zero weight.
        x_ap = complete_orthonormal_columns(x_rem, 1)
        s_ap = np.zeros((1, 1))
    else:
        x_ap, s_ap = np.linalg.qr(k_ap)

    x_new, r2 = np.linalg.qr(np.column_stack([x_ap, x_rem]))
    rank_new = r_star + 1
    s_block = np.zeros((rank_new, rank_new))
    s_block[0, 0] = s_ap[0, 0]
    s_block[1:, 1:] = s_rem
    s_new = r2 @ s_block

    state = LowRankMicroState(x_new, s_new, v_new, rank_new)
    if return_details:
        details = TruncationDetails(
            S_ap=s_ap, S_rem_hat=s_rem_hat, U_hat=u_hat, W_hat=w_hat,
            R2=r2, S_hat=s_hat, r_star=r_star,
        )
        return state, details
    return state


def step_bug_adaptive(macro: MacroState, state: LowRankMicroState, ws: FullSchemeWorkspace,
                      dt: float, cfg: TruncationConfig):
    """One rank-adaptive step: augment, Galerkin update, truncate, then meso/macro."""
    if not dt > 0.0:
        raise ValueError("dt must be strictly positive")
    ws.check_macro(macro)
    ws.check_micro_shape(state.X_basis.shape[0], state.V_basis.shape[0])

    aug = augment_bases(state, macro, ws, dt)
    s_hat = galerkin_s_hat(aug, state, macro, ws, dt)
    aug.S_hat = s_hat
    new_state = ap_truncate(aug, s_hat, cfg)

    g1_new = new_state.X_basis @ (new_state.S_coeff @ new_state.V_basis[0, :])
    h_new, t_new = meso_macro_update(g1_new, macro, ws, dt)

    r = new_state.rank
    report = BugStepReport(
        rank=r,
        x_orth_defect=float(np.max(np.abs(new_state.X_basis.T @ new_state.X_basis - np.eye(r)))),
        v_orth_defect=float(np.max(np.abs(new_state.V_basis.T @ new_state.V_basis - np.eye(r)))),
        dt=dt,
    )
    return MacroState(t_new, h_new), new_state, report
