"""Poincare disk primitives, metric ``4|dz|^2 / (1 - |z|^2)^2`` (curvature -1).

Tangent vectors are complex numbers in the orthonormal frame
``(d/dx, d/dy) * (1 - |z|^2) / 2`` at their base point, so their modulus is
their Riemannian length.  The Mobius map sending ``p`` to ``0`` has a
positive real derivative at ``p``, which makes this frame parallel to the
one at the origin.

Isometries are stored as real ``SL(2, R)`` matrices (upper half-plane form)
and act on the disk through the Cayley transform, where they become
``w -> (a w + b) / (conj(b) w + conj(a))`` with ``|a|^2 - |b|^2 = 1``.
"""
import numpy as np

from ..errors import DomainError


def to_origin(p, z):
    """Image of ``z`` under the isometry taking ``p`` to ``0``."""
    return (z - p) / (1.0 - np.conj(p) * z)


def from_origin(p, w):
    """Inverse of :func:`to_origin`."""
    return (w + p) / (1.0 + np.conj(p) * w)


def dist(z, w):
    """Hyperbolic distance, vectorised.

    Uses ``cosh d = 1 + 2|z-w|^2 / ((1-|z|^2)(1-|w|^2))`` via ``log1p``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    x = 2.0 * np.abs(z - w) ** 2 / ((1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2))
    out = np.log1p(x + np.sqrt(x * (x + 2.0)))
    return float(out) if out.ndim == 0 else out


def dist_origin(z):
    """Distance from the origin, ``2 artanh |z|``."""
    out = 2.0 * np.arctanh(np.abs(np.asarray(z, dtype=complex)))
    return float(out) if out.ndim == 0 else out


def exp_map(p, v):
    """Exponential map at ``p`` of an orthonormal-frame tangent vector ``v``."""
    p = np.asarray(p, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if not np.all(np.isfinite(v)):
        raise DomainError("tangent vector must be finite")
    r = np.abs(v)
    safe = np.where(r > 0, r, 1.0)
    u = np.where(r > 0, np.tanh(r / 2.0) * v / safe, 0.0)
    out = np.where(r > 0, from_origin(p, u), p)
    return complex(out) if out.ndim == 0 else out


def direction_to(p, q):
    """Unit tangent at ``p`` pointing toward ``q`` (orthonormal frame)."""
    w = to_origin(p, q)
    return w / np.abs(w)


def sl2_to_disk(m):
    """Disk coefficients ``(a, b)`` of real ``SL(2)`` matrices (``(..., 2, 2)``)."""
    m = np.asarray(m, dtype=float)
    al, be, ga, de = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    a = 0.5 * ((al + de) + 1j * (be - ga))
    b = 0.5 * ((al - de) - 1j * (be + ga))
    return a, b


def disk_to_sl2(a, b):
    """Inverse of :func:`sl2_to_disk`."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    m = np.empty(a.shape + (2, 2))
    m[..., 0, 0] = a.real + b.real
    m[..., 1, 1] = a.real - b.real
    m[..., 0, 1] = a.imag - b.imag
    m[..., 1, 0] = -a.imag - b.imag
    return m


def apply(a, b, z):
    """Act on disk points by ``w = (a z + b) / (conj(b) z + conj(a))``."""
    return (a * z + b) / (np.conj(b) * z + np.conj(a))


def displacement(a):
    """Distance the element moves the origin: ``2 arccosh |a|``."""
    return 2.0 * np.arccosh(np.maximum(np.abs(a), 1.0))
