"""Convolution kernels, derivative filter banks and the pair-difference matrices.

Kernels are stored as 3D tap arrays indexed (t, y, x). A purely spatial
kernel has a temporal extent of 1 and therefore acts frame by frame, which is
how the blur ``h`` and the spatial bank ``T_s`` are applied.

Under periodic boundaries every bank is diagonalised by the discrete Fourier
transform; `FilterBank.transfer` returns the per-row transfer functions that
`apply_bank`, `apply_bank_adjoint` and the f-update of the ADMM solver share.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import fft, ndimage

__all__ = [
    "Boundary",
    "Kernel",
    "FilterBank",
    "convolve",
    "apply_bank",
    "apply_bank_adjoint",
    "second_derivative",
    "mixed_derivative",
    "forward_difference",
    "delta",
    "spatial_bank",
    "temporal_bank",
    "pstaic_bank",
    "pictv_bank",
    "pair_difference_matrix",
    "pair_eigenbasis",
    "A_S",
    "P_S",
    "apply_As",
]

G, V = 0, 1
_AXES = {"t": 0, "y": 1, "x": 2}


class Boundary(str, Enum):
    PERIODIC = "periodic"
    REPLICATE = "replicate"


_NDIMAGE_MODE = {Boundary.PERIODIC: "wrap", Boundary.REPLICATE: "nearest"}


@dataclass(frozen=True, eq=False)
class Kernel:
    """Small convolution kernel with its anchor at the array centre."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim == 2:
            taps = taps[None]
        if taps.ndim != 3:
            raise ValueError(f"kernel taps must be 2D or 3D, got shape {taps.shape}")
        if any(n % 2 == 0 for n in taps.shape):
            raise ValueError(f"kernel extent must be odd on every axis, got {taps.shape}")
        if not np.all(np.isfinite(taps)):
            raise ValueError("kernel taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def shape(self):
        return self.taps.shape

    @property
    def anchor(self):
        return tuple(n // 2 for n in self.taps.shape)

    @property
    def is_spatial(self):
        """True when the kernel acts within single frames."""
        return self.taps.shape[0] == 1

    def scaled(self, c):
        return Kernel(c * self.taps)

    def flipped(self):
        return Kernel(self.taps[::-1, ::-1, ::-1])

    def transfer(self, shape):
        """Real-FFT transfer function on a periodic grid of ``shape`` (T, H, W)."""
        check_extent(self, shape)
        embedded = np.zeros(shape)
        kt, ky, kx = self.taps.shape
        embedded[:kt, :ky, :kx] = self.taps
        embedded = np.roll(embedded, [-a for a in self.anchor], axis=(0, 1, 2))
        return fft.rfftn(embedded)


def check_extent(kernel, shape):
    if any(k > n for k, n in zip(kernel.shape, shape)):
        raise ValueError(f"kernel extent {kernel.shape} exceeds signal extent {tuple(shape)}")


def delta():
    return Kernel(np.ones((1, 1, 1)))


def second_derivative(axis):
    """[1, -2, 1] along ``axis`` ('x', 'y' or 't')."""
    shape = [1, 1, 1]
    shape[_AXES[axis]] = 3
    return Kernel(np.array([1.0, -2.0, 1.0]).reshape(shape))


def _central(axis):
    shape = [1, 1, 1]
    shape[_AXES[axis]] = 3
    return np.array([0.5, 0.0, -0.5]).reshape(shape)


def mixed_derivative(a, b):
    """Product of central differences along axes ``a`` and ``b``."""
    if a == b:
        raise ValueError("mixed derivative needs two distinct axes")
    return Kernel(_central(a) * _central(b))


def forward_difference(axis):
    """u[i+1] - u[i] along ``axis``, padded to an odd, centred stencil."""
    shape = [1, 1, 1]
    shape[_AXES[axis]] = 3
    return Kernel(np.array([1.0, -1.0, 0.0]).reshape(shape))


def convolve(signal, kernel, boundary=Boundary.PERIODIC):
    """Convolve a frame (H, W) or volume (T, H, W) with ``kernel``.

    A 2D signal only accepts spatial kernels. The output has the input shape.
    """
    signal = np.asarray(signal, dtype=np.float64)
    boundary = Boundary(boundary)
    taps = kernel.taps
    if signal.ndim == 2:
        if not kernel.is_spatial:
            raise ValueError("a frame can only be convolved with a spatial kernel")
        taps = taps[0]
    elif signal.ndim != 3:
        raise ValueError(f"signal must be 2D or 3D, got shape {signal.shape}")
    if any(k > n for k, n in zip(taps.shape, signal.shape)):
        raise ValueError(f"kernel extent {taps.shape} exceeds signal extent {signal.shape}")
    return ndimage.convolve(signal, taps, mode=_NDIMAGE_MODE[boundary])


class FilterBank:
    """Rows of (kernel, input channel) applied to a pair field f = (g, v).

    Each row reads exactly one component of f; the zero blocks of the block
    operators are expressed by the channel index rather than stored.
    """

    def __init__(self, rows, names=None):
        rows = tuple((k, int(c)) for k, c in rows)
        if not rows:
            raise ValueError("empty filter bank")
        for _, c in rows:
            if c not in (G, V):
                raise ValueError(f"row input channel must be 0 (g) or 1 (v), got {c}")
        self.rows = rows
        self.names = tuple(names) if names is not None else tuple(f"row{i}" for i in range(len(rows)))
        if len(self.names) != len(rows):
            raise ValueError("names and rows differ in length")
        self.channels = np.array([c for _, c in rows])
        self._cache = {}
        self._stencils = [_stencil(k) for k, _ in rows]
        # rows sharing kernel and input channel (d_xy / d_yx, T_s and T_t on v)
        groups = {}
        for i, (k, c) in enumerate(rows):
            groups.setdefault((c, k.shape, k.taps.tobytes()), []).append(i)
        self.groups = [(key[0], idx) for key, idx in groups.items()]

    def __len__(self):
        return len(self.rows)

    def __add__(self, other):
        return FilterBank(self.rows + other.rows, self.names + other.names)

    @property
    def is_spatial(self):
        return all(k.is_spatial for k, _ in self.rows)

    def stencil(self, i):
        return self._stencils[i]

    def transfer(self, shape):
        """Stacked transfer functions, shape (rows, T, H, W//2 + 1)."""
        shape = tuple(shape)
        if shape not in self._cache:
            self._cache[shape] = np.stack([k.transfer(shape) for k, _ in self.rows])
        return self._cache[shape]

    def gram(self, shape):
        """Fourier symbol of the normal operator, one per component of f.

        Returns an array (2, T, H, W//2 + 1) holding sum |K|^2 over the rows
        reading g and over the rows reading v.
        """
        key = ("gram", tuple(shape))
        if key not in self._cache:
            power = np.abs(self.transfer(shape)) ** 2
            self._cache[key] = np.stack(
                [power[self.channels == c].sum(axis=0) for c in (G, V)]
            )
        return self._cache[key]


def _check_pair(f):
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 4 or f.shape[0] != 2:
        raise ValueError(f"pair field must have shape (2, T, H, W), got {f.shape}")
    return f


def _stencil(kernel):
    """(shift, tap) pairs of a kernel, shifts measured from the anchor."""
    idx = np.argwhere(kernel.taps != 0)
    return [(tuple(int(a) for a in j - kernel.anchor), float(kernel.taps[tuple(j)])) for j in idx]


def _roll_sum(x, stencil, sign):
    out = np.zeros_like(x)
    for shift, tap in stencil:
        if any(shift):
            out += tap * np.roll(x, [sign * s for s in shift], axis=(-3, -2, -1))
        else:
            out += tap * x
    return out


def _is_sparse(kernel):
    return np.count_nonzero(kernel.taps) <= SPARSE_TAPS


SPARSE_TAPS = 9


def apply_bank(f, bank, boundary=Boundary.PERIODIC):
    """Filter-bank output (rows, T, H, W) for a pair field f = (g, v).

    Under periodic boundaries, sparse stencils are applied by circular shifts
    and dense kernels (the PSF) through the FFT; both are exact circular
    convolutions.
    """
    f = _check_pair(f)
    boundary = Boundary(boundary)
    if boundary is not Boundary.PERIODIC:
        return np.stack([convolve(f[c], k, boundary) for k, c in bank.rows])
    shape = f.shape[1:]
    for k, _ in bank.rows:
        check_extent(k, shape)
    out = np.empty((len(bank),) + shape)
    spectrum = None
    for c, idx in bank.groups:
        k = bank.rows[idx[0]][0]
        if _is_sparse(k):
            out[idx] = _roll_sum(f[c], bank.stencil(idx[0]), +1)
        else:
            if spectrum is None:
                spectrum = fft.rfftn(f, axes=(1, 2, 3))
            out[idx] = fft.irfftn(bank.transfer(shape)[idx[0]] * spectrum[c], s=shape)
    return out


def apply_bank_adjoint(s, bank, boundary=Boundary.PERIODIC):
    """Adjoint of `apply_bank`: maps a (rows, T, H, W) stack back to a pair field."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 4 or s.shape[0] != len(bank):
        raise ValueError(f"stack must have shape ({len(bank)}, T, H, W), got {s.shape}")
    if Boundary(boundary) is not Boundary.PERIODIC:
        raise ValueError("the exact adjoint is only available for periodic boundaries")
    shape = s.shape[1:]
    out = np.zeros((2,) + shape)
    dense_spectrum = {}
    for c, idx in bank.groups:
        k = bank.rows[idx[0]][0]
        total = s[idx[0]] if len(idx) == 1 else s[idx].sum(axis=0)
        if _is_sparse(k):
            out[c] += _roll_sum(total, bank.stencil(idx[0]), -1)
        else:
            term = np.conj(bank.transfer(shape)[idx[0]]) * fft.rfftn(total)
            dense_spectrum[c] = dense_spectrum.get(c, 0) + term
    for c, spectrum in dense_spectrum.items():
        out[c] += fft.irfftn(spectrum, s=shape)
    return out


def spatial_bank():
    """T_s: d_xx, d_xy, d_yx, d_yy, delta on g, then the same five on v."""
    five = [
        ("dxx", second_derivative("x")),
        ("dxy", mixed_derivative("x", "y")),
        ("dyx", mixed_derivative("y", "x")),
        ("dyy", second_derivative("y")),
        ("delta", delta()),
    ]
    rows = [(k, G) for _, k in five] + [(k, V) for _, k in five]
    names = [f"s:{n}(g)" for n, _ in five] + [f"s:{n}(v)" for n, _ in five]
    return FilterBank(rows, names)


def temporal_bank():
    """T_t: the nine second derivatives of v in (x, y, t), in display order."""
    nine = [
        ("dxx", second_derivative("x")),
        ("dyy", second_derivative("y")),
        ("dxy", mixed_derivative("x", "y")),
        ("dyx", mixed_derivative("y", "x")),
        ("dxt", mixed_derivative("x", "t")),
        ("dtx", mixed_derivative("t", "x")),
        ("dyt", mixed_derivative("y", "t")),
        ("dty", mixed_derivative("t", "y")),
        ("dtt", second_derivative("t")),
    ]
    return FilterBank([(k, V) for _, k in nine], [f"t:{n}(v)" for n, _ in nine])


def identity_bank():
    """e: copies g and v."""
    return FilterBank([(delta(), G), (delta(), V)], ["e(g)", "e(v)"])


def blur_row(h):
    return FilterBank([(h, G)], ["h(g)"])


def pstaic_bank(h):
    """Combined operator T = [h; T_s; T_t; e], 22 rows."""
    return blur_row(h) + spatial_bank() + temporal_bank() + identity_bank()


def pictv_bank(h, kappa1=1.0, kappa2=1.0):
    """Stacked operator for the weighted ICTV baseline, 12 rows.

    Rows 1-6 hold the gradients of g and of v with kappa1 on the spatial
    components; their difference is the gradient of g - v. Rows 7-9 hold the
    gradient of v with kappa2 on the time component. Folding the kappa weights into the taps turns both weighted norms into
    plain Euclidean norms of the bank output.
    """
    grad = [forward_difference(a) for a in ("x", "y", "t")]
    w1 = (kappa1, kappa1, 1.0)
    w2 = (1.0, 1.0, kappa2)
    rows = [(k.scaled(w), G) for k, w in zip(grad, w1)]
    rows += [(k.scaled(w), V) for k, w in zip(grad, w1)]
    rows += [(k.scaled(w), V) for k, w in zip(grad, w2)]
    names = [f"k1:d{a}(g)" for a in "xyt"] + [f"k1:d{a}(v)" for a in "xyt"]
    names += [f"k2:d{a}(v)" for a in "xyt"]
    return blur_row(h) + FilterBank(rows, names) + identity_bank()


def pair_difference_matrix(n):
    """The n x 2n matrix [I, -I] / sqrt(2); n = 5 gives A_s."""
    eye = np.eye(n)
    return np.hstack([eye, -eye]) / np.sqrt(2.0)


def pair_eigenbasis(n):
    """Orthogonal eigenvector matrix of A^T A for A = `pair_difference_matrix`.

    The first n columns span the range of A^T (eigenvalue 1), the last n the
    null space of A (eigenvalue 0).
    """
    eye = np.eye(n)
    return np.hstack([np.vstack([eye, -eye]), np.vstack([eye, eye])]) / np.sqrt(2.0)


A_S = pair_difference_matrix(5)
P_S = pair_eigenbasis(5)
A_S.setflags(write=False)
P_S.setflags(write=False)


def apply_As(z, axis=0):
    """A_s z, i.e. (z_j - z_{j+5}) / sqrt(2) for j = 1..5, along ``axis``."""
    z = np.moveaxis(np.asarray(z, dtype=np.float64), axis, 0)
    if z.shape[0] != 10:
        raise ValueError(f"A_s acts on 10-vectors, got {z.shape[0]} components")
    return np.moveaxis((z[:5] - z[5:]) / np.sqrt(2.0), 0, axis)
