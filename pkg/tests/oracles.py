"""Independent reference implementations used only by the tests.

Nothing here shares code with the production solvers: the eigen oracle is a
hand-rolled cyclic Jacobi diagonalization, and the harvest oracle is a plain
Python triple loop over scalar complex arithmetic.
"""

from __future__ import annotations

import numpy as np


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Full eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.

    Returns (eigenvalues ascending, column eigenvectors). Each rotation first
    makes the targeted off-diagonal entry real with a phase, then applies the
    classical 2x2 symmetric rotation that zeroes it.
    """
    a = np.array(matrix, dtype=complex)
    m = a.shape[0]
    v = np.eye(m, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                off = max(off, abs(apq))
                if abs(apq) <= tol * scale:
                    continue
                phase = apq / abs(apq)
                app = a[p, p].real
                aqq = a[q, q].real
                g = abs(apq)
                theta = (aqq - app) / (2.0 * g)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # u diagonalizes the 2x2 block [[app, g*phase], [g*conj(phase), aqq]]
                u = np.array([[c, s * phase], [-s * np.conj(phase), c]], dtype=complex)
                block = np.array([[a[p, p], a[p, q]], [a[q, p], a[q, q]]])
                rows = a[[p, q], :]
                a[[p, q], :] = u.conj().T @ rows
                cols = a[:, [p, q]]
                a[:, [p, q]] = cols @ u
                v[:, [p, q]] = v[:, [p, q]] @ u
        if off <= tol * scale:
            break
    eigenvalues = a.diagonal().real.copy()
    order = np.argsort(eigenvalues)
    return eigenvalues[order], v[:, order]


def jacobi_largest(matrix: np.ndarray):
    """Dominant (eigenvalue, eigenvector) from the Jacobi decomposition."""
    values, vectors = jacobi_eigh(matrix)
    return float(values[-1]), vectors[:, -1]


def naive_harvest_rates(beams, selection, channels, efficiencies):
    """Per-device harvest in watts by direct term-by-term summation.

    beams[k][n] and channels[k][n] are sequences of scalars; selection[k][n]
    is 0/1. Every inner product is accumulated with plain Python complex
    arithmetic, no vectorized shortcuts.
    """
    n_devices = len(efficiencies)
    totals = [0.0] * n_devices
    for n in range(n_devices):
        acc = 0.0
        for k in range(len(beams)):
            for n2 in range(n_devices):
                inner = complex(0.0)
                for wm, hm in zip(beams[k][n2], channels[k][n]):
                    inner += complex(wm) * complex(hm)
                term = selection[k][n2] * inner
                acc += abs(term) ** 2
        totals[n] = efficiencies[n] * acc
    return totals


def naive_total_harvest(beams, selection, channels, efficiencies) -> float:
    return float(sum(naive_harvest_rates(beams, selection, channels, efficiencies)))


def allocation_to_lists(allocation, realization):
    """Unpack an allocation and realization into the naive oracle's inputs."""
    beams = []
    selection = []
    channels = []
    for i, ap_id in enumerate(allocation.ap_ids):
        beams.append([list(allocation.beamformers[(ap_id, d)]) for d in allocation.device_ids])
        selection.append([int(allocation.selection[i, j]) for j in range(len(allocation.device_ids))])
        channels.append([list(realization.vector(ap_id, d)) for d in allocation.device_ids])
    return beams, selection, channels


def scan_strongest(channel_list) -> int:
    """Index of the channel with the largest Euclidean norm (first on ties)."""
    best, best_norm = 0, -1.0
    for i, h in enumerate(channel_list):
        norm = float(np.sqrt(sum(abs(x) ** 2 for x in h)))
        if norm > best_norm:
            best, best_norm = i, norm
    return best


def scan_nearest(x, y, positions_by_id) -> int:
    """Id of the nearest (x, y) entry; lowest id wins ties."""
    best_id, best_d = None, float("inf")
    for pid in sorted(positions_by_id):
        px, py = positions_by_id[pid]
        d = ((px - x) ** 2 + (py - y) ** 2) ** 0.5
        if d < best_d:
            best_id, best_d = pid, d
    return best_id
