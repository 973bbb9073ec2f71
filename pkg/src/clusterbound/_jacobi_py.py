"""Pure-NumPy Jacobi sweeps, same contract as the compiled ``_jacobi`` module.

Rotations are applied in round-robin order: every round is a set of
disjoint index pairs, so a whole round is one vectorised update.
"""

import numpy as np


def _rounds(n):
    """Round-robin schedule of disjoint pairs covering all i < j once."""
    players = list(range(n)) if n % 2 == 0 else list(range(n)) + [-1]
    m = len(players)
    out = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a >= 0 and b >= 0:
                ps.append(min(a, b))
                qs.append(max(a, b))
        if ps:
            out.append((np.array(ps), np.array(qs)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return out


def _rotation(a, d, b):
    ab = np.abs(b)
    tau = (d - a) / (2.0 * ab)
    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c, b / ab, t


def one_sided(at, vt, tol, max_sweeps):
    ncol = at.shape[0]
    schedule = _rounds(ncol)
    eps = np.finfo(float).eps
    m = at.shape[1]
    for sweep in range(max_sweeps):
        rotated = False
        # columns below m * eps of the largest are numerically zero
        amax = np.einsum("ij,ij->i", at.conj(), at).real.max() if ncol else 0.0
        floor = (m * eps) ** 2 * amax
        for ps, qs in schedule:
            xp, xq = at[ps], at[qs]
            alpha = np.einsum("ij,ij->i", xp.conj(), xp).real
            beta = np.einsum("ij,ij->i", xq.conj(), xq).real
            gamma = np.einsum("ij,ij->i", xp.conj(), xq)
            live = (alpha > floor) & (beta > floor)
            live &= np.abs(gamma) > tol * np.sqrt(alpha) * np.sqrt(beta)
            if not live.any():
                continue
            rotated = True
            ps, qs = ps[live], qs[live]
            c, s, e, _ = _rotation(alpha[live], beta[live], gamma[live])
            c, s, ce = c[:, None], s[:, None], e.conj()[:, None]
            for mat in (at, vt):
                xp, xq = mat[ps], mat[qs]
                mat[ps] = c * xp - s * ce * xq
                mat[qs] = s * xp + c * ce * xq
        if not rotated:
            return sweep + 1
    return -1


def two_sided(h, vt, tol, max_sweeps):
    n = h.shape[0]
    schedule = _rounds(n)
    thresh = tol * np.linalg.norm(h)
    for sweep in range(max_sweeps):
        rotated = False
        for ps, qs in schedule:
            b = h[ps, qs]
            live = np.abs(b) > thresh
            if not live.any():
                continue
            rotated = True
            ps, qs, b = ps[live], qs[live], b[live]
            a, d = h[ps, ps].real, h[qs, qs].real
            c, s, e, t = _rotation(a, d, b)
            ce = e.conj()
            hp, hq = h[:, ps], h[:, qs]
            h[:, ps] = c * hp - s * ce * hq
            h[:, qs] = s * hp + c * ce * hq
            hp, hq = h[ps, :], h[qs, :]
            h[ps, :] = c[:, None] * hp - (s * e)[:, None] * hq
            h[qs, :] = s[:, None] * hp + (c * e)[:, None] * hq
            h[ps, qs] = 0.0
            h[qs, ps] = 0.0
            ab = np.abs(b)
            h[ps, ps] = a - t * ab
            h[qs, qs] = d + t * ab
            vp, vq = vt[ps], vt[qs]
            vt[ps] = c[:, None] * vp - (s * ce)[:, None] * vq
            vt[qs] = s[:, None] * vp + (c * ce)[:, None] * vq
        if not rotated:
            return sweep + 1
    return -1
