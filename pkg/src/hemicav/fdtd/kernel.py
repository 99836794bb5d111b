"""Leapfrog BOR update in normalised units (cell size 1, c = 1, eps0 = mu0 = 1).

Azimuthal dependence for order ``m``::

    E_r = e_r cos(m phi)   E_phi = e_p sin(m phi)   E_z = e_z cos(m phi)
    H_r = h_r sin(m phi)   H_phi = h_p cos(m phi)   H_z = h_z sin(m phi)

Staggered positions (``i`` radial node, ``k`` axial node) and array shapes::

    e_r (i+1/2, k)      (Nr, Nz+1)      h_r (i, k+1/2)      (Nr+1, Nz)
    e_p (i, k)          (Nr+1, Nz+1)    h_p (i+1/2, k+1/2)  (Nr, Nz)
    e_z (i, k+1/2)      (Nr+1, Nz)      h_z (i+1/2, k)      (Nr, Nz+1)

Axis nodes (``i = 0``) use the series limit for each order: for ``m = 0`` only
``e_z`` survives and is driven by the loop integral of ``h_p``; for ``m = 1``
``e_z`` vanishes and the field is a transverse vector on the axis, so
``e_p(0) = -e_r(0)`` and ``h_r(0) = h_p(0)``. Those two nodes feed no other
update; they are filled from the half-cell neighbours at the same height and
time level. For ``m >= 2`` every axis component is zero. The E coefficient
arrays carry the PEC and outer-wall zeros, so masked entries never move.

Two drivers share these equations. ``update_h``/``update_e`` sweep rows with
``prange``; the two parallel regions are the barrier between the half steps.
``fused_step`` does H and then E row by row in one pass (E row ``i`` only needs
H rows ``i-1`` and ``i``), which halves memory traffic on a single thread.
"""

from __future__ import annotations

import numba
import numpy as np
from numba import prange

COMPONENTS = ("e_r", "e_phi", "e_z", "h_r", "h_phi", "h_z")


@numba.njit(inline="always")
def _h_row(i, er, ep, ez, hr, hp, hz, dt, m, nr, nz):
    if i > 0:
        mr = m / i
        for k in range(nz):
            hr[i, k] += dt * (mr * ez[i, k] + ep[i, k + 1] - ep[i, k])
    if i < nr:
        for k in range(nz):
            hp[i, k] += dt * (ez[i + 1, k] - ez[i, k] - er[i, k + 1] + er[i, k])
        a = dt / (i + 0.5)
        for k in range(nz + 1):
            hz[i, k] -= a * ((i + 1) * ep[i + 1, k] - i * ep[i, k] + m * er[i, k])
    if i == 0 and m == 1:
        for k in range(nz):
            hr[0, k] = hp[0, k]


@numba.njit(inline="always")
def _e_row(i, er, ep, ez, hr, hp, hz, cer, cep, cez, m, nr, nz):
    if i < nr:
        mrh = m / (i + 0.5)
        for k in range(1, nz):
            er[i, k] += cer[i, k] * (mrh * hz[i, k] - hp[i, k] + hp[i, k - 1])
    if i == 0:
        if m == 1:
            for k in range(nz + 1):
                ep[0, k] = -er[0, k]
        elif m == 0:
            for k in range(nz):
                ez[0, k] += cez[0, k] * 4.0 * hp[0, k]
    elif i < nr:
        for k in range(1, nz):
            ep[i, k] += cep[i, k] * (hr[i, k] - hr[i, k - 1] - hz[i, k] + hz[i - 1, k])
        a = (i + 0.5) / i
        b = (i - 0.5) / i
        mr = m / i
        for k in range(nz):
            ez[i, k] += cez[i, k] * (a * hp[i, k] - b * hp[i - 1, k] - mr * hr[i, k])


@numba.njit(parallel=True, cache=True)
def update_h(er, ep, ez, hr, hp, hz, dt, m):
    nr, nz = hp.shape
    for i in prange(nr + 1):
        _h_row(i, er, ep, ez, hr, hp, hz, dt, m, nr, nz)


@numba.njit(parallel=True, cache=True)
def update_e(er, ep, ez, hr, hp, hz, cer, cep, cez, m):
    nr, nz = hp.shape
    for i in prange(nr + 1):
        _e_row(i, er, ep, ez, hr, hp, hz, cer, cep, cez, m, nr, nz)


@numba.njit(cache=True)
def fused_step(er, ep, ez, hr, hp, hz, cer, cep, cez, dt, m):
    nr, nz = hp.shape
    for i in range(nr + 1):
        _h_row(i, er, ep, ez, hr, hp, hz, dt, m, nr, nz)
        _e_row(i, er, ep, ez, hr, hp, hz, cer, cep, cez, m, nr, nz)


@numba.njit(cache=True)
def _component(er, ep, ez, hr, hp, hz, c):
    if c == 0:
        return er
    if c == 1:
        return ep
    if c == 2:
        return ez
    if c == 3:
        return hr
    if c == 4:
        return hp
    return hz


@numba.njit(cache=True)
def _accumulate(acc, f, phase):
    for i in range(f.shape[0]):
        for k in range(f.shape[1]):
            acc[i, k] += phase * f[i, k]


@numba.njit(cache=True)
def run_steps(er, ep, ez, hr, hp, hz, cer, cep, cez, dt, m, n0, nsteps, parallel,
              src_comp, src_i, src_k, src_w, wave,
              pr_comp, pr_i, pr_k, record,
              omega, acc_start, acc_stride, acc_count, ph_er, ph_ep, ph_ez, ph_hr, ph_hp, ph_hz):
    """Advance ``nsteps``; inject the soft source, sample probes, accumulate phasors.

    ``n0`` is the global index of the first step. ``wave[n]`` is the source
    amplitude added at local step ``n``; node ``s`` of the source is component
    ``src_comp[s]`` at ``(src_i[s], src_k[s])`` with weight ``src_w[s]``,
    already scaled by ``dt/eps``. Phasors at angular frequency ``omega`` (rad
    per unit time) accumulate every ``acc_stride`` steps from local step
    ``acc_start`` on, Hann-weighted over ``acc_count`` samples so neighbouring
    modes leak in only through the window's fast-decaying side lobes; pass
    ``acc_start >= nsteps`` to skip them.
    """
    for n in range(nsteps):
        if parallel:
            update_h(er, ep, ez, hr, hp, hz, dt, m)
            update_e(er, ep, ez, hr, hp, hz, cer, cep, cez, m)
        else:
            fused_step(er, ep, ez, hr, hp, hz, cer, cep, cez, dt, m)
        a = wave[n]
        if a != 0.0:
            for s in range(src_i.size):
                _component(er, ep, ez, hr, hp, hz, src_comp[s])[src_i[s], src_k[s]] += a * src_w[s]
        for p in range(pr_i.size):
            record[n, p] = _component(er, ep, ez, hr, hp, hz, pr_comp[p])[pr_i[p], pr_k[p]]
        if n >= acc_start and (n - acc_start) % acc_stride == 0:
            j = (n - acc_start) // acc_stride
            w = np.sin(np.pi * (j + 0.5) / acc_count) ** 2 if j < acc_count else 0.0
            pe = w * np.exp(1j * omega * (n0 + n + 1) * dt)
            ph = w * np.exp(1j * omega * (n0 + n + 0.5) * dt)
            _accumulate(ph_er, er, pe)
            _accumulate(ph_ep, ep, pe)
            _accumulate(ph_ez, ez, pe)
            _accumulate(ph_hr, hr, ph)
            _accumulate(ph_hp, hp, ph)
            _accumulate(ph_hz, hz, ph)
