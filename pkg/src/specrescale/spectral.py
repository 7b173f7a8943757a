"""Periodic grids, Fourier transforms and dealiased products.

Coefficients are stored in full FFT layout (``numpy.fft.fftfreq`` ordering)
with a leading component axis, so a 1D scalar field has shape ``(1, N)`` and
a 3D velocity field ``(3, N, N, N)``.  The forward transform carries the
``1/N**d`` factor, which makes each coefficient the amplitude of its mode.

Internally every transform goes through ``scipy.fft.rfftn``/``irfftn``.
The raw-array helpers (``pad_to_physical``, ``physical_to_truncated``,
``derivative_coeffs``) are what the model right-hand sides call in their
inner loops; the field-level functions wrap them with validation.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import EmptyInnerShell, GridMismatch, InvalidAxis, NonHermitianInput

__all__ = [
    "Grid",
    "SpectralField",
    "PhysicalField",
    "ShellSpectrum",
    "forward_transform",
    "inverse_transform",
    "spectral_derivative",
    "dealiased_product",
    "shell_energies",
    "energy_ratio",
    "dealias_size",
]

THREADS_ENV = "SPECRESCALE_THREADS"
HERMITIAN_RTOL = 1e-10
EMPTY_SHELL_ATOL = 1e-30
# Shells holding less than this fraction of the total energy count as empty
# when looking for the innermost populated shell (3D only).
EMPTY_SHELL_RTOL = 1e-20


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, 2*pi)**dim`` with ``n`` points per axis."""

    dim: int
    n: int
    box_length: float = 2 * np.pi

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise ValueError(f"dim must be 1 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if not np.isclose(self.box_length, 2 * np.pi):
            raise ValueError("only the 2*pi periodic box is supported")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def axes(self) -> tuple[int, ...]:
        """Spatial axes of a component-first array."""
        return tuple(range(1, self.dim + 1))

    def coordinates(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def mesh(self) -> tuple[np.ndarray, ...]:
        x = self.coordinates()
        return np.meshgrid(*([x] * self.dim), indexing="ij")


@functools.lru_cache(maxsize=None)
def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n)


@functools.lru_cache(maxsize=None)
def _derivative_wavenumbers(n: int) -> np.ndarray:
    k = _wavenumbers(n).copy()
    k[n // 2] = 0.0
    return k


def wavevector(grid: Grid, axis: int, derivative: bool = False) -> np.ndarray:
    """Integer wavenumbers along ``axis`` shaped to broadcast over the grid.

    With ``derivative=True`` the Nyquist entry is zero, which is the
    convention used for every differential operator in the package.
    """
    k = _derivative_wavenumbers(grid.n) if derivative else _wavenumbers(grid.n)
    shape = [1] * grid.dim
    shape[axis] = grid.n
    return k.reshape(shape)


@functools.lru_cache(maxsize=None)
def _k_squared(dim: int, n: int) -> np.ndarray:
    g = Grid(dim, n)
    return sum(wavevector(g, a, derivative=True) ** 2 for a in range(dim))


def k_squared(grid: Grid) -> np.ndarray:
    """``|k|**2`` built from derivative wavenumbers (Nyquist components zero)."""
    return _k_squared(grid.dim, grid.n)


@functools.lru_cache(maxsize=None)
def _shell_index(dim: int, n: int) -> np.ndarray:
    g = Grid(dim, n)
    kk = sum(wavevector(g, a).astype(float) ** 2 for a in range(dim))
    return np.rint(np.sqrt(kk)).astype(np.intp).ravel()


def dealias_size(n: int) -> int:
    """Padded length for quadratic products on an ``n``-mode axis.

    Strictly larger than ``3n/2`` so that products involving the retained
    Nyquist mode do not alias back into it.
    """
    return sfft.next_fast_len(3 * n // 2 + 1, real=True)


@dataclass
class SpectralField:
    grid: Grid
    coeffs: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim == self.grid.dim:
            self.coeffs = self.coeffs[np.newaxis]
        if self.coeffs.shape[1:] != self.grid.shape:
            raise GridMismatch(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.divergence_free)


@dataclass
class PhysicalField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape == self.grid.shape:
            self.values = self.values[np.newaxis]
        if self.values.shape[1:] != self.grid.shape:
            raise GridMismatch(
                f"value shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @property
    def components(self) -> int:
        return self.values.shape[0]


@dataclass
class ShellSpectrum:
    """Energy ``sum |u_hat(k)|**2`` binned by shell ``rint(|k|)``."""

    index: np.ndarray
    energy: np.ndarray = field(repr=False)

    def __getitem__(self, s: int) -> float:
        return float(self.energy[s]) if s < len(self.energy) else 0.0

    @property
    def total(self) -> float:
        return float(self.energy.sum())


# -- raw array machinery -----------------------------------------------------


def _slc(axis: int, s) -> tuple:
    return (slice(None),) * axis + (s,)


def _reflect(a: np.ndarray, axes) -> np.ndarray:
    """``b[k] = a[-k mod n]`` along each of ``axes``."""
    for ax in axes:
        a = np.roll(np.flip(a, ax), 1, ax)
    return a


def half_to_full(h: np.ndarray, n: int, dim: int) -> np.ndarray:
    """Expand an rfft half spectrum (last axis ``n//2 + 1``) to full layout."""
    full = np.empty(h.shape[:-1] + (n,), dtype=complex)
    full[..., : n // 2 + 1] = h
    neg = np.conj(_reflect(h, range(1, dim)))
    full[..., n // 2 + 1 :] = neg[..., n // 2 - 1 : 0 : -1]
    return full


def _spread(a: np.ndarray, axis: int, n: int, m: int) -> np.ndarray:
    shape = list(a.shape)
    shape[axis] = m
    out = np.zeros(shape, dtype=complex)
    h = n // 2
    out[_slc(axis, slice(0, h))] = a[_slc(axis, slice(0, h))]
    out[_slc(axis, slice(m - h + 1, m))] = a[_slc(axis, slice(h + 1, n))]
    nyq = 0.5 * a[_slc(axis, h)]
    out[_slc(axis, h)] = nyq
    out[_slc(axis, m - h)] = nyq
    return out


def _fold(a: np.ndarray, axis: int, n: int, m: int) -> np.ndarray:
    shape = list(a.shape)
    shape[axis] = n
    out = np.empty(shape, dtype=complex)
    h = n // 2
    out[_slc(axis, slice(0, h))] = a[_slc(axis, slice(0, h))]
    out[_slc(axis, slice(h + 1, n))] = a[_slc(axis, slice(m - h + 1, m))]
    out[_slc(axis, h)] = a[_slc(axis, h)] + a[_slc(axis, m - h)]
    return out


def pad_to_physical(coeffs: np.ndarray, grid: Grid, m: int | None = None) -> np.ndarray:
    """Zero-pad full-layout coefficients to ``m`` modes per axis and return
    the physical samples on the padded grid.

    The Nyquist coefficient is split evenly between ``+n/2`` and ``-n/2`` so
    the padded field is the real trigonometric interpolant of the input.
    """
    n, dim = grid.n, grid.dim
    m = dealias_size(n) if m is None else m
    h = n // 2
    last = dim
    half = np.zeros(coeffs.shape[:-1] + (m // 2 + 1,), dtype=complex)
    half[..., :h] = coeffs[..., :h]
    half[..., h] = 0.5 * coeffs[..., h]
    for ax in range(1, last):
        half = _spread(half, ax, n, m)
    return sfft.irfftn(
        half, s=(m,) * dim, axes=grid.axes, norm="forward", workers=fft_workers()
    )


def physical_to_truncated(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Transform padded physical samples and truncate to the grid's modes.

    Content at ``+n/2`` and ``-n/2`` is folded into the single Nyquist slot.
    """
    n, dim = grid.n, grid.dim
    m = values.shape[-1]
    h = n // 2
    p = sfft.rfftn(values, axes=grid.axes, norm="forward", workers=fft_workers())
    for ax in range(1, dim):
        p = _fold(p, ax, n, m)
    hh = p[..., : h + 1].copy()
    hh[..., h] = p[..., h] + np.conj(_reflect(p[..., h], range(1, dim)))
    return half_to_full(hh, n, dim)


def physical_values(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Inverse transform on the native grid without validation."""
    h = grid.n // 2
    return sfft.irfftn(
        coeffs[..., : h + 1], s=grid.shape, axes=grid.axes, norm="forward",
        workers=fft_workers(),
    )


def spectral_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Forward transform on the native grid, returned in full layout."""
    h = sfft.rfftn(values, axes=grid.axes, norm="forward", workers=fft_workers())
    return half_to_full(h, grid.n, grid.dim)


def derivative_coeffs(coeffs: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    return 1j * wavevector(grid, axis, derivative=True) * coeffs


def hermitian_defect(coeffs: np.ndarray, grid: Grid) -> float:
    """Largest ``|c(k) - conj(c(-k))|`` relative to ``max |c|``."""
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    mirror = np.conj(_reflect(coeffs, grid.axes))
    return float(np.max(np.abs(coeffs - mirror)) / scale)


def shell_energy_array(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    idx = _shell_index(grid.dim, grid.n)
    power = np.sum(np.abs(coeffs) ** 2, axis=0).ravel()
    return np.bincount(idx, weights=power, minlength=grid.n // 2 + 1)


def energy_ratio_coeffs(coeffs: np.ndarray, grid: Grid) -> float:
    h = grid.n // 2
    if grid.dim == 1:
        inner = float(np.sum(np.abs(coeffs[:, 1]) ** 2))
        if inner < EMPTY_SHELL_ATOL:
            raise EmptyInnerShell(f"|u_1|^2 = {inner:.3e}")
        return float(np.sum(np.abs(coeffs[:, h]) ** 2)) / inner
    shells = shell_energy_array(coeffs, grid)
    total = shells.sum()
    populated = np.nonzero(shells[1:] > max(EMPTY_SHELL_ATOL, EMPTY_SHELL_RTOL * total))[0]
    if populated.size == 0:
        raise EmptyInnerShell("no populated shell with index >= 1")
    return float(shells[h] / shells[1 + populated[0]])


# -- field-level operations -----------------------------------------------------


def forward_transform(f: PhysicalField) -> SpectralField:
    return SpectralField(f.grid, spectral_values(f.values, f.grid))


def inverse_transform(s: SpectralField) -> PhysicalField:
    defect = hermitian_defect(s.coeffs, s.grid)
    if defect > HERMITIAN_RTOL:
        raise NonHermitianInput(f"Hermitian defect {defect:.3e} exceeds {HERMITIAN_RTOL:g}")
    return PhysicalField(s.grid, physical_values(s.coeffs, s.grid))


def spectral_derivative(s: SpectralField, axis: int) -> SpectralField:
    """Derivative along ``axis`` (0-based).  The Nyquist mode maps to zero."""
    if not 0 <= axis < s.grid.dim:
        raise InvalidAxis(f"axis {axis} out of range for a {s.grid.dim}D grid")
    return SpectralField(s.grid, derivative_coeffs(s.coeffs, s.grid, axis))


def dealiased_product(a: SpectralField, b: SpectralField) -> SpectralField:
    """Galerkin-truncated pointwise product, component by component.

    A single-component factor broadcasts against a multi-component one.
    """
    if a.grid != b.grid:
        raise GridMismatch(f"{a.grid} vs {b.grid}")
    grid = a.grid
    m = dealias_size(grid.n)
    prod = pad_to_physical(a.coeffs, grid, m) * pad_to_physical(b.coeffs, grid, m)
    return SpectralField(grid, physical_to_truncated(prod, grid))


def shell_energies(s: SpectralField) -> ShellSpectrum:
    energy = shell_energy_array(s.coeffs, s.grid)
    return ShellSpectrum(np.arange(len(energy)), energy)


def energy_ratio(s: SpectralField) -> float:
    """Outer-to-inner energy ratio used as the restart trigger.

    1D: ``(|u_hat(N/2)| / |u_hat(1)|)**2``.  3D: energy in spherical shell
    ``N/2`` over the energy of the innermost populated shell ``s >= 1``.
    """
    return energy_ratio_coeffs(s.coeffs, s.grid)


# -- solver mode set -------------------------------------------------------------


class ModeSet:
    """Galerkin mode set ``|k_i| <= N/2`` used for time integration.

    Unlike the collocation layout, the ``+N/2`` and ``-N/2`` modes are kept
    as a genuine conjugate pair, so the top mode carries a full complex
    amplitude.  Coefficients are stored as a half spectrum: non-last axes
    have length ``N+1`` (ordering ``0..N/2, -N/2..-1``) and the last axis
    holds ``k >= 0`` only, length ``N/2+1``.  Obtain instances through
    :func:`mode_set`.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        n, dim = grid.n, grid.dim
        self.n = n
        self.dim = dim
        self.m = dealias_size(n)
        self.shape = (n + 1,) * (dim - 1) + (n // 2 + 1,)
        full = np.fft.fftfreq(n + 1, 1.0 / (n + 1))
        half = np.arange(n // 2 + 1, dtype=float)
        self.k = []
        for a in range(dim):
            kk = half if a == dim - 1 else full
            shape = [1] * dim
            shape[a] = kk.size
            self.k.append(kk.reshape(shape))
        self.k2 = sum(ka**2 for ka in self.k)
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        self.weights = w.reshape((1,) * (dim - 1) + (-1,))
        kmag = np.sqrt(np.broadcast_to(self.k2, self.shape))
        self.shell_index = np.rint(kmag).astype(np.intp).ravel()
        self.nshells = int(self.shell_index.max()) + 1

    # conversions to and from the collocation layout
    def from_grid(self, coeffs: np.ndarray) -> np.ndarray:
        """Embed collocation coefficients; a Nyquist slot splits evenly."""
        n, h = self.n, self.n // 2
        out = np.zeros(coeffs.shape[:-1] + (h + 1,), dtype=complex)
        out[..., :h] = coeffs[..., :h]
        out[..., h] = 0.5 * coeffs[..., h]
        for ax in range(1, self.dim):
            out = _spread(out, ax, n, n + 1)
        return out

    def to_grid(self, c: np.ndarray) -> np.ndarray:
        """Collocation coefficients of the samples of ``c`` on the N-point grid."""
        n, h = self.n, self.n // 2
        for ax in range(1, self.dim):
            c = _fold(c, ax, n, n + 1)
        hh = c[..., : h + 1].copy()
        hh[..., h] = c[..., h] + np.conj(_reflect(c[..., h], range(1, self.dim)))
        return half_to_full(hh, n, self.dim)

    def values(self, c: np.ndarray) -> np.ndarray:
        """Samples on the N-point collocation grid."""
        return physical_values(self.to_grid(c), self.grid)

    # padded-grid transforms for quadratic products
    def to_padded(self, c: np.ndarray) -> np.ndarray:
        n, h, m = self.n, self.n // 2, self.m
        half = np.zeros(c.shape[:-1] + (m // 2 + 1,), dtype=complex)
        half[..., : h + 1] = c
        for ax in range(1, self.dim):
            shape = list(half.shape)
            shape[ax] = m
            big = np.zeros(shape, dtype=complex)
            big[_slc(ax, slice(0, h + 1))] = half[_slc(ax, slice(0, h + 1))]
            big[_slc(ax, slice(m - h, m))] = half[_slc(ax, slice(h + 1, n + 1))]
            half = big
        return sfft.irfftn(
            half, s=(m,) * self.dim, axes=self.grid.axes, norm="forward", workers=fft_workers()
        )

    def from_padded(self, values: np.ndarray) -> np.ndarray:
        h, m = self.n // 2, self.m
        p = sfft.rfftn(values, axes=self.grid.axes, norm="forward", workers=fft_workers())
        p = p[..., : h + 1]
        for ax in range(1, self.dim):
            idx = np.r_[0 : h + 1, m - h : m]
            p = np.take(p, idx, axis=ax)
        return p

    def product(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.from_padded(self.to_padded(a) * self.to_padded(b))

    # quadratic diagnostics
    def energy(self, c: np.ndarray) -> float:
        """Mean of ``|u|**2`` over the box (sum over components)."""
        return float(np.sum(self.weights * np.abs(c) ** 2))

    def shell_energies(self, c: np.ndarray) -> np.ndarray:
        power = np.sum(self.weights * np.abs(c) ** 2, axis=0).ravel()
        return np.bincount(self.shell_index, weights=power, minlength=self.nshells)

    def energy_ratio(self, c: np.ndarray) -> float:
        """Restart criterion on the Galerkin coefficients.

        1D: ``(|c_{N/2}| / |c_1|)**2``.  3D: energy of spherical shell
        ``N/2`` over that of the innermost populated shell ``s >= 1``.
        """
        h = self.n // 2
        if self.dim == 1:
            inner = float(np.sum(np.abs(c[:, 1]) ** 2))
            if inner < EMPTY_SHELL_ATOL:
                raise EmptyInnerShell(f"|u_1|^2 = {inner:.3e}")
            return float(np.sum(np.abs(c[:, h]) ** 2)) / inner
        shells = self.shell_energies(c)
        total = shells.sum()
        populated = np.nonzero(shells[1:] > max(EMPTY_SHELL_ATOL, EMPTY_SHELL_RTOL * total))[0]
        if populated.size == 0:
            raise EmptyInnerShell("no populated shell with index >= 1")
        return float(shells[h] / shells[1 + populated[0]])


@functools.lru_cache(maxsize=None)
def mode_set(grid: Grid) -> ModeSet:
    return ModeSet(grid)
