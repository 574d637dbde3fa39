"""Hot inner loops, each in a numba and a pure-numpy flavour.

The numba kernels walk terms in a fixed order with Neumaier-compensated
accumulation of the energy.  The numpy kernels build the full term arrays
and reduce the energy with ``math.fsum``.  Both return
``(energy, forces)`` where ``forces`` is the one-sided repelling sum
``sum H(L) V`` at every point.
"""
import math

import numpy as np

from . import _accel
from ._accel import njit
from .summation import csum


# -- flat torus pair sums ----------------------------------------------------

@njit(cache=True)
def _torus_pairs_nb(x, periods, offsets, zero_idx, R, t, k0, with_force):
    n, d = x.shape
    m_count = offsets.shape[0]
    forces = np.zeros((n, d))
    diff = np.empty(d)
    v = np.empty(d)
    s = 0.0
    c = 0.0
    inv4t = 1.0 / (4.0 * t)
    for i in range(n):
        for j in range(n):
            for k in range(d):
                dk = x[j, k] - x[i, k]
                diff[k] = dk - periods[k] * np.floor(dk / periods[k] + 0.5)
            for m in range(m_count):
                if i == j and m == zero_idx:
                    continue
                L2 = 0.0
                for k in range(d):
                    v[k] = diff[k] + offsets[m, k]
                    L2 += v[k] * v[k]
                L = math.sqrt(L2)
                if L > R:
                    continue
                kv = k0 * math.exp(-L2 * inv4t)
                tt = s + kv
                if abs(s) >= kv:
                    c += (s - tt) + kv
                else:
                    c += (kv - tt) + s
                s = tt
                if with_force and L > 0.0:
                    coef = -(L / (2.0 * t)) * kv / L
                    for k in range(d):
                        forces[i, k] += coef * v[k]
    return s + c, forces


def _torus_pairs_np(x, periods, offsets, zero_idx, R, t, k0, with_force):
    n, d = x.shape
    diff = x[None, :, :] - x[:, None, :]
    diff = diff - periods * np.floor(diff / periods + 0.5)
    v = diff[:, :, None, :] + offsets[None, None, :, :]
    L2 = np.sum(v * v, axis=-1)
    L = np.sqrt(L2)
    mask = L <= R
    idx = np.arange(n)
    mask[idx, idx, zero_idx] = False
    kv = np.where(mask, k0 * np.exp(-L2 / (4.0 * t)), 0.0)
    energy = csum(kv[mask])
    if with_force:
        safe = np.where(L > 0, L, 1.0)
        coef = np.where(mask & (L > 0), -(L / (2.0 * t)) * kv / safe, 0.0)
        forces = np.sum(coef[..., None] * v, axis=(1, 2))
    else:
        forces = np.zeros((n, d))
    return energy, forces


def torus_pair_sums(x, periods, offsets, zero_idx, R, t, k0, with_force=True):
    x = np.ascontiguousarray(x, dtype=float)
    periods = np.ascontiguousarray(periods, dtype=float)
    offsets = np.ascontiguousarray(offsets, dtype=float)
    fn = _torus_pairs_nb if _accel.USE_NUMBA else _torus_pairs_np
    return fn(x, periods, offsets, int(zero_idx), float(R), float(t), float(k0), bool(with_force))


# -- disk pair sums (hyperbolic surface) -------------------------------------

@njit(cache=True)
def _disk_pairs_nb(z, ea, eb, limits, R, t, k0, with_force):
    n = z.shape[0]
    forces = np.zeros(n, dtype=np.complex128)
    s = 0.0
    c = 0.0
    inv4t = 1.0 / (4.0 * t)
    for i in range(n):
        zi = z[i]
        ci = 1.0 - (zi.real * zi.real + zi.imag * zi.imag)
        for j in range(n):
            zj = z[j]
            cj = 1.0 - (zj.real * zj.real + zj.imag * zj.imag)
            for g in range(limits[i, j]):
                if i == j and g == 0:
                    continue
                den = np.conj(eb[g]) * zj + np.conj(ea[g])
                w = (ea[g] * zj + eb[g]) / den
                aden = den.real * den.real + den.imag * den.imag
                cw = cj / aden
                dz = w - zi
                adz = dz.real * dz.real + dz.imag * dz.imag
                xx = 2.0 * adz / (ci * cw)
                L = math.log1p(xx + math.sqrt(xx * (xx + 2.0)))
                if L > R:
                    continue
                kv = k0 * math.exp(-L * L * inv4t)
                tt = s + kv
                if abs(s) >= kv:
                    c += (s - tt) + kv
                else:
                    c += (kv - tt) + s
                s = tt
                if with_force and L > 0.0:
                    phi = dz / (1.0 - np.conj(zi) * w)
                    forces[i] += -(L / (2.0 * t)) * kv * phi / abs(phi)
    return s + c, forces


def _disk_pairs_np(z, ea, eb, limits, R, t, k0, with_force):
    n = z.shape[0]
    forces = np.zeros(n, dtype=complex)
    terms = []
    for i in range(n):
        zi = z[i]
        ci = 1.0 - abs(zi) ** 2
        for j in range(n):
            zj = z[j]
            lim = limits[i, j]
            a = ea[:lim]
            b = eb[:lim]
            den = np.conj(b) * zj + np.conj(a)
            w = (a * zj + b) / den
            cw = (1.0 - abs(zj) ** 2) / np.abs(den) ** 2
            dz = w - zi
            xx = 2.0 * np.abs(dz) ** 2 / (ci * cw)
            L = np.log1p(xx + np.sqrt(xx * (xx + 2.0)))
            mask = L <= R
            if i == j:
                mask[0] = False
            Lm = L[mask]
            kv = k0 * np.exp(-Lm * Lm / (4.0 * t))
            terms.append(kv)
            if with_force:
                pos = Lm > 0
                phi = dz[mask][pos] / (1.0 - np.conj(zi) * w[mask][pos])
                forces[i] += np.sum(-(Lm[pos] / (2.0 * t)) * kv[pos] * phi / np.abs(phi))
    energy = csum(np.concatenate(terms)) if terms else 0.0
    return energy, forces


def disk_pair_sums(z, ea, eb, limits, R, t, k0, with_force=True):
    z = np.ascontiguousarray(z, dtype=complex)
    ea = np.ascontiguousarray(ea, dtype=complex)
    eb = np.ascontiguousarray(eb, dtype=complex)
    limits = np.ascontiguousarray(limits, dtype=np.int64)
    fn = _disk_pairs_nb if _accel.USE_NUMBA else _disk_pairs_np
    return fn(z, ea, eb, limits, float(R), float(t), float(k0), bool(with_force))


# -- Weyl amplitudes and the spectral form -----------------------------------

@njit(cache=True)
def _weyl_nb(x, freqs, scale):
    n, d = x.shape
    m_count = freqs.shape[0]
    amps = np.empty(m_count, dtype=np.complex128)
    phis = np.empty((n, m_count), dtype=np.complex128)
    two_pi = 2.0 * math.pi
    for m in range(m_count):
        sr = 0.0
        cr = 0.0
        si = 0.0
        ci = 0.0
        for i in range(n):
            ph = 0.0
            for k in range(d):
                ph += freqs[m, k] * x[i, k]
            ph *= two_pi
            re = math.cos(ph) * scale
            im = math.sin(ph) * scale
            phis[i, m] = complex(re, im)
            tt = sr + re
            if abs(sr) >= abs(re):
                cr += (sr - tt) + re
            else:
                cr += (re - tt) + sr
            sr = tt
            tt = si + im
            if abs(si) >= abs(im):
                ci += (si - tt) + im
            else:
                ci += (im - tt) + si
            si = tt
        amps[m] = complex(sr + cr, si + ci)
    return amps, phis


def _weyl_np(x, freqs, scale):
    phis = np.exp(2j * math.pi * (x @ freqs.T)) * scale
    return np.sum(phis, axis=0), phis


def weyl_amplitudes(x, freqs, volume):
    """Amplitudes ``S_m = sum_i phi_m(x_i)`` and the table ``phi_m(x_i)``."""
    x = np.ascontiguousarray(x, dtype=float)
    freqs = np.ascontiguousarray(freqs, dtype=float)
    scale = 1.0 / math.sqrt(volume)
    if freqs.shape[0] == 0:
        return np.zeros(0, dtype=complex), np.zeros((x.shape[0], 0), dtype=complex)
    fn = _weyl_nb if _accel.USE_NUMBA else _weyl_np
    return fn(x, freqs, scale)
