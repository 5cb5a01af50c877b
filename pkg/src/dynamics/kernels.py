"""
numba inner loops of the Glauber sampler.

All kernels work on an influence CSR (row z lists the vertices whose blocked counter
z's occupancy feeds), a boolean occupancy array and an int64 blocked-counter array.
Randomness arrives pre-drawn: one vertex and one uniform per step.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _update(indptr, indices, occupied, blocked, v, u, p_occupy):
    """Heat-bath update at v; returns +1/-1 on a flip, 0 otherwise."""
    if blocked[v] > 0:
        return 0
    occupy = u < p_occupy
    if occupy == occupied[v]:
        return 0
    occupied[v] = occupy
    delta = 1 if occupy else -1
    for j in range(indptr[v], indptr[v + 1]):
        blocked[indices[j]] += delta
    return delta


@njit(cache=True)
def glauber_steps(indptr, indices, occupied, blocked, vertices, uniforms, p_occupy):
    """Apply one update per (vertex, uniform) pair; returns the number of flips."""
    flips = 0
    for k in range(vertices.shape[0]):
        if _update(indptr, indices, occupied, blocked, vertices[k], uniforms[k], p_occupy) != 0:
            flips += 1
    return flips


@njit(cache=True)
def glauber_steps_watch(indptr, indices, occupied, blocked, vertices, uniforms, p_occupy, target, spacing, offset):
    """As glauber_steps, checking target after every ``spacing``-th step (global count offset + k + 1).

    Returns (checks, checks where target was unoccupied).
    """
    checks = 0
    empty_hits = 0
    for k in range(vertices.shape[0]):
        _update(indptr, indices, occupied, blocked, vertices[k], uniforms[k], p_occupy)
        if (offset + k + 1) % spacing == 0:
            checks += 1
            if not occupied[target]:
                empty_hits += 1
    return checks, empty_hits


@njit(cache=True)
def glauber_steps_record(indptr, indices, occupied, blocked, vertices, uniforms, p_occupy, spacing, offset, mask_state, out):
    """As glauber_steps, writing the occupancy bitmask after every ``spacing``-th step into out.

    mask_state[0] carries the current bitmask; returns how many entries were written.
    """
    written = 0
    mask = mask_state[0]
    for k in range(vertices.shape[0]):
        v = vertices[k]
        flip = _update(indptr, indices, occupied, blocked, v, uniforms[k], p_occupy)
        if flip != 0:
            mask ^= np.int64(1) << np.int64(v)
        if (offset + k + 1) % spacing == 0:
            out[written] = mask
            written += 1
    mask_state[0] = mask
    return written


@njit(cache=True)
def coupled_steps(
    x_indptr, x_indices, x_occupied, x_blocked,
    y_indptr, y_indices, y_occupied, y_blocked,
    disagree, ever, weights, distance, vertices, uniforms, p_occupy, trace,
):
    """Shared-randomness steps of two chains.

    distance = [hamming, weighted]; disagreement can only change at the updated vertex.
    When trace is non-empty, trace[k] receives the weighted distance after step k.
    """
    record = trace.shape[0] > 0
    for k in range(vertices.shape[0]):
        v = vertices[k]
        u = uniforms[k]
        _update(x_indptr, x_indices, x_occupied, x_blocked, v, u, p_occupy)
        _update(y_indptr, y_indices, y_occupied, y_blocked, v, u, p_occupy)
        now = x_occupied[v] != y_occupied[v]
        if now != disagree[v]:
            disagree[v] = now
            if now:
                distance[0] += 1.0
                distance[1] += weights[v]
                ever[v] = True
            else:
                distance[0] -= 1.0
                distance[1] -= weights[v]
        if record:
            trace[k] = distance[1]
