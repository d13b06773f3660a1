import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
from typing import Tuple

import numpy as np
from scipy.linalg import orth
from scipy.optimize import minimize_scalar

from backend.src.quantum.errors import NullStateError, SchemeError
from backend.src.quantum.states import PureState, normalize, trace_distance
from backend.src.strategies.read_strategies import QPovmParams

logger = logging.getLogger(__name__)


def _reduced_operators(psi: np.ndarray, i: int, chi: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # chi, psi and |i> span at most two dimensions; trace distance is unchanged there
    e_i = np.zeros_like(psi)
    e_i[i] = 1.0
    basis = orth(np.column_stack([psi, e_i, chi]))
    to_reduced = basis.conj().T
    proj = [np.outer(v, v.conj()) for v in (to_reduced @ chi, to_reduced @ psi, to_reduced @ e_i)]
    return proj[0], proj[1], proj[2]


def superposition_vs_mixture_gap(
    psi: PureState,
    i: int,
    a_coef: float,
    b_coef: float,
    grid_points: int = 10_000,
    tol: float = 1e-6,
) -> float:
    """
    Distance between the superposition a|psi> + b<i|psi>|i> and the nearest
    mixture p|psi><psi| + (1-p)|i><i|.

    Scans p on a uniform grid over [0, 1], refines the best grid point by a
    golden-section search and returns the smallest trace distance found.

    Raises:
        SchemeError: both coefficients are zero or i is out of range.
        NullStateError: the superposition vanishes (e.g. <i|psi> = 0 and a_coef = 0).
    """
    if a_coef == 0 and b_coef == 0:
        raise SchemeError("a_coef and b_coef must not both be zero")
    vec = psi.amplitudes
    if not 0 <= int(i) < vec.size:
        raise SchemeError(f"basis index {i} out of range [0, {vec.size})")
    i = int(i)
    raw = a_coef * vec
    raw[i] = raw[i] + b_coef * vec[i]
    chi = normalize(raw).amplitudes

    rho_chi, rho_psi, rho_i = _reduced_operators(vec, i, chi)

    grid = np.linspace(0.0, 1.0, int(grid_points))
    diffs = rho_chi[None, :, :] - grid[:, None, None] * rho_psi[None] - (1.0 - grid)[:, None, None] * rho_i[None]
    dists = 0.5 * np.abs(np.linalg.eigvalsh(diffs)).sum(axis=1)
    best = int(np.argmin(dists))
    p_best, d_best = float(grid[best]), float(dists[best])

    def objective(p: float) -> float:
        p = min(max(p, 0.0), 1.0)
        return trace_distance(rho_chi, p * rho_psi + (1.0 - p) * rho_i)

    if 0 < best < grid.size - 1:
        try:
            res = minimize_scalar(
                objective,
                bracket=(float(grid[best - 1]), p_best, float(grid[best + 1])),
                method="golden",
                tol=tol,
            )
            p_ref = min(max(float(res.x), 0.0), 1.0)
            d_ref = objective(p_ref)
            if d_ref < d_best:
                p_best, d_best = p_ref, d_ref
        except ValueError:
            # bracket not valid on a flat stretch; keep the grid minimum
            logger.debug("[superposition_vs_mixture_gap] golden refinement skipped at p=%g", p_best)

    gap = objective(p_best)
    logger.debug("[superposition_vs_mixture_gap] p*=%.6f gap=%.6g", p_best, gap)
    return gap


def mixture_gap_for_kraus(psi: PureState, i: int, params: QPovmParams) -> float:
    """Gap for the post-measurement direction of K_i = a(nu) I + b(nu)|i><i| applied to psi."""
    if params.a == 0 and params.b == 0:
        raise NullStateError()
    return superposition_vs_mixture_gap(psi, i, params.a, params.b)


if __name__ == "__main__":
    plus = normalize([1, 1])
    print("[superposition_vs_mixture_gap] a=b=1:", superposition_vs_mixture_gap(plus, 0, 1.0, 1.0))
    print("[superposition_vs_mixture_gap] b=0:", superposition_vs_mixture_gap(plus, 0, 1.0, 0.0))
    print("[mixture_gap_for_kraus] nu=0.5:", mixture_gap_for_kraus(plus, 0, QPovmParams.from_nu(2, 0.5)))
