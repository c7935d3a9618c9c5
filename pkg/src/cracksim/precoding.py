"""Linear downlink precoders built from the estimated uplink channel.

Both precoders assume the downlink is the transpose of the estimated uplink.
A single scalar xi enforces the total power constraint ||W||_F^2 = p_total;
there is no per-user power split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Condition-number cap beyond which the zero-forcing system is treated as
# singular rather than solved.
ZF_CONDITION_CAP = 1e10


class ZFSingularError(RuntimeError):
    """Raised when the zero-forcing Gram matrix is rank deficient or
    ill-conditioned ("zf-singular"); callers may fall back to MRT."""


@dataclass
class Precoder:
    """M x K downlink precoding matrix under a total-power constraint."""

    W: np.ndarray
    xi: float
    kind: str

    @property
    def power(self) -> float:
        return float(np.linalg.norm(self.W) ** 2)


def mrt(H_up: np.ndarray, p_total: float) -> Precoder:
    """Maximum ratio transmission: W = xi * conj(H_up)."""
    H_up = np.asarray(H_up, dtype=complex)
    norm = np.linalg.norm(H_up)
    if norm == 0:
        raise ValueError("mrt requires a nonzero channel")
    xi = np.sqrt(p_total) / norm
    return Precoder(W=xi * H_up.conj(), xi=float(xi), kind="mrt")


def zf(H_up: np.ndarray, p_total: float) -> Precoder:
    """Zero forcing: W = xi * conj(H_up) (H_up^T conj(H_up))^{-1}.

    By construction H_up^T W = xi * I, so inter-user interference vanishes on
    the channel the BS assumed. Solves a linear system instead of forming the
    inverse; raises ZFSingularError past the condition cap.
    """
    H_up = np.asarray(H_up, dtype=complex)
    gram = H_up.T @ H_up.conj()
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > ZF_CONDITION_CAP:
        raise ZFSingularError(f"zf-singular: gram condition number {cond:.3e}")
    raw = np.linalg.solve(gram.T, H_up.conj().T).T
    norm = np.linalg.norm(raw)
    if norm == 0:
        raise ZFSingularError("zf-singular: zero solution")
    xi = np.sqrt(p_total) / norm
    return Precoder(W=xi * raw, xi=float(xi), kind="zf")


def normalize_power(W_raw: np.ndarray, p_total: float, kind: str = "external") -> Precoder:
    """Rescale an arbitrary precoding matrix to ||W||_F^2 = p_total."""
    W_raw = np.asarray(W_raw, dtype=complex)
    norm = np.linalg.norm(W_raw)
    if norm == 0:
        raise ValueError("cannot normalize an all-zero precoder")
    xi = np.sqrt(p_total) / norm
    return Precoder(W=xi * W_raw, xi=float(xi), kind=kind)


def build_precoder(H_up: np.ndarray, p_total: float, kind: str) -> Precoder:
    if kind == "mrt":
        return mrt(H_up, p_total)
    if kind == "zf":
        return zf(H_up, p_total)
    raise ValueError(f"unknown precoder kind: {kind!r}")
