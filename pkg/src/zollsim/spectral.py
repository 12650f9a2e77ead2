"""Spherical-harmonic machinery on the round sphere.

Conventions: orthonormal complex harmonics with the Condon-Shortley phase
(see ``harmonics``); Gauss-Legendre nodes in cos(theta) times uniform
longitude nodes.  A multiplication operator V is represented by its Galerkin
matrix <Y_l'm', V Y_lm>; the free Hamiltonian -hbar^2 Delta/2 is diagonal
with entries hbar^2 l(l+1)/2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import harmonics as sh

# Fourier modes of V below this fraction of sup|V| are treated as exact zeros
_MODE_CUTOFF = 1e-13


class GridMismatch(ValueError):
    pass


class HarmonicBasis:
    """Harmonics up to degree ``lmax`` with a quadrature grid that integrates
    products of two basis functions exactly."""

    def __init__(self, lmax, n_theta=None, n_phi=None):
        if lmax < 1:
            raise ValueError("lmax must be >= 1")
        self.lmax = int(lmax)
        self.size = sh.basis_size(self.lmax)
        self.ls, self.ms = sh.degrees_orders(self.lmax)
        self.n_theta = n_theta or self.lmax + 1
        self.n_phi = n_phi or 2 * self.lmax + 2
        if self.n_theta < self.lmax + 1 or self.n_phi < 2 * self.lmax + 1:
            raise ValueError("quadrature grid too small for lmax")
        self.x, self.w = np.polynomial.legendre.leggauss(self.n_theta)
        self.theta = np.arccos(self.x)
        self.phi = 2 * np.pi * np.arange(self.n_phi) / self.n_phi
        self.P = sh.legendre_table(self.lmax, self.x)
        self._mcol = self.ms % self.n_phi
        self._sel = np.zeros((self.size, 2 * self.lmax + 1))
        self._sel[np.arange(self.size), self.ms + self.lmax] = 1.0

    def index(self, l, m):
        return sh.index(l, m)

    def cluster(self, l):
        """Flat indices of the (2l+1) harmonics of degree l."""
        return np.arange(l * l, (l + 1) ** 2)

    @property
    def grid_shape(self):
        return (self.n_theta, self.n_phi)

    def points(self):
        """Grid points on the unit sphere, shape (n_theta, n_phi, 3)."""
        st = np.sqrt(1 - self.x**2)[:, None]
        return np.stack([st * np.cos(self.phi)[None, :], st * np.sin(self.phi)[None, :],
                         np.broadcast_to(self.x[:, None], self.grid_shape)], axis=-1)

    def area_weights(self):
        return np.outer(self.w, np.full(self.n_phi, 2 * np.pi / self.n_phi))

    def integrate(self, samples):
        return np.sum(self.area_weights() * samples)


@dataclass
class HarmonicState:
    coeffs: np.ndarray
    lmax: int

    @property
    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def normalized(self):
        return HarmonicState(self.coeffs / self.norm, self.lmax)

    def shell_weights(self):
        """Squared weight in each degree l = 0..lmax."""
        ls = sh.degrees_orders(self.lmax)[0]
        return np.bincount(ls, weights=np.abs(self.coeffs) ** 2, minlength=self.lmax + 1)

    def inner(self, other):
        """<self, other>, antilinear in self."""
        return complex(np.vdot(self.coeffs, other.coeffs))


@dataclass
class OperatorMatrix:
    data: np.ndarray
    hermitian: bool = True

    @property
    def shape(self):
        return self.data.shape

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def norm(self):
        return float(np.linalg.norm(self.data, 2)) if self.data.shape[0] <= 400 else \
            float(np.linalg.norm(self.data, "fro"))

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def _coeffs(state):
    return state.coeffs if isinstance(state, HarmonicState) else np.asarray(state)


def synthesize(basis, state):
    """Grid samples sum c_lm Y_lm, shape (n_theta, n_phi)."""
    c = _coeffs(state)
    if c.shape != (basis.size,):
        raise GridMismatch(f"expected {basis.size} coefficients, got {c.shape}")
    g = (basis.P * c) @ basis._sel  # (n_theta, 2L+1), column m + L
    arr = np.zeros((basis.n_theta, basis.n_phi), dtype=complex)
    ms = np.arange(-basis.lmax, basis.lmax + 1)
    arr[:, ms % basis.n_phi] = g
    return np.fft.ifft(arr, axis=1) * basis.n_phi


def analyze(basis, samples):
    """Harmonic coefficients of grid samples (exact for degree <= lmax)."""
    samples = np.asarray(samples)
    if samples.shape != basis.grid_shape:
        raise GridMismatch(f"samples have shape {samples.shape}, grid is {basis.grid_shape}")
    F = np.fft.fft(samples, axis=1) * (2 * np.pi / basis.n_phi)
    c = np.einsum("j,ji,ji->i", basis.w, basis.P, F[:, basis._mcol])
    return HarmonicState(c, basis.lmax)


def evaluate(basis, state, xyz):
    """Evaluate an expansion at arbitrary points of the sphere."""
    return sh.ylm_ambient(basis.lmax, xyz) @ _coeffs(state)


def _potential_modes(V, lmax, degree):
    """Gauss-Legendre nodes/weights, Legendre table and the longitude Fourier
    modes V_q(theta_j) for |q| <= degree."""
    nt = lmax + 1 + (degree + 1) // 2
    nphi = 2 * degree + 2
    x, w = np.polynomial.legendre.leggauss(nt)
    phi = 2 * np.pi * np.arange(nphi) / nphi
    th = np.arccos(x)
    vals = V.on_chart(th[:, None], phi[None, :])
    modes = np.fft.fft(vals, axis=1) / nphi  # column q mod nphi
    scale = max(np.max(np.abs(vals)), 1e-300)
    qs = np.arange(-degree, degree + 1)
    vq = modes[:, qs % nphi]
    vq[:, np.max(np.abs(vq), axis=0) < _MODE_CUTOFF * scale] = 0.0
    return x, w, sh.legendre_table(lmax, x), qs, vq


def _degree(V, lmax):
    d = V.degree
    return d if d is not None else 2 * lmax


def potential_matrix(basis, V):
    """Galerkin matrix of multiplication by V; exact for polynomial V."""
    L = basis.lmax
    d = _degree(V, L)
    x, w, P, qs, vq = _potential_modes(V, L, d)
    ls, ms = basis.ls, basis.ms
    idx_m = {m: np.nonzero(ms == m)[0] for m in range(-L, L + 1)}
    out = np.zeros((basis.size, basis.size), dtype=complex)
    for k, q in enumerate(qs):
        wq = 2 * np.pi * w * vq[:, k]
        if not np.any(wq):
            continue
        for mp in range(-L, L + 1):
            m = mp - q
            if abs(m) > L:
                continue
            rows, cols = idx_m[mp], idx_m[m]
            out[np.ix_(rows, cols)] = (P[:, rows].T * wq) @ P[:, cols]
    out = 0.5 * (out + out.conj().T)
    return OperatorMatrix(out, True)


def cluster_block(basis, V, l):
    """The (2l+1) x (2l+1) block Pi_l V Pi_l, ordered m = -l..l."""
    if l > basis.lmax:
        raise ValueError("cluster degree exceeds lmax")
    d = _degree(V, basis.lmax)
    x, w, P, qs, vq = _potential_modes(V, l, d)
    cols = np.arange(l * l, (l + 1) ** 2)
    m = np.arange(-l, l + 1)
    Pl = P[:, cols]
    diff = m[:, None] - m[None, :]
    full = np.zeros((len(x), 2 * l + 1, 2 * l + 1), dtype=complex)
    ok = np.abs(diff) <= d
    full[:, ok] = vq[:, diff[ok] + d]
    block = 2 * np.pi * np.einsum("j,ja,jb,jab->ab", w, Pl, Pl, full)
    return 0.5 * (block + block.conj().T)


def quantum_average(basis, V):
    """Average of V over the free periodic flow: keep only the l' = l blocks."""
    mat = V if isinstance(V, OperatorMatrix) else potential_matrix(basis, V)
    ls = basis.ls
    mask = ls[:, None] == ls[None, :]
    return OperatorMatrix(np.where(mask, mat.data, 0.0), mat.hermitian)


def band_invariants(basis, V, l):
    """Sorted eigenvalues of the cluster block of V at degree l."""
    return np.linalg.eigvalsh(cluster_block(basis, V, l))


def free_hamiltonian(basis, hbar):
    return OperatorMatrix(np.diag(0.5 * hbar**2 * basis.ls * (basis.ls + 1.0)).astype(complex))


def hamiltonian_matrix(basis, hbar, eps, V):
    """-hbar^2 Delta/2 + eps^2 V."""
    if hbar <= 0 or eps < 0:
        raise ValueError("hbar must be positive and eps non-negative")
    h = free_hamiltonian(basis, hbar).data
    if eps > 0:
        h = h + eps**2 * potential_matrix(basis, V).data
    return OperatorMatrix(h, True)


def hbar_for_cluster(l):
    """hbar with hbar^2 l(l+1)/2 = 1/2."""
    return 1.0 / np.sqrt(l * (l + 1.0))


# -- eigensolvers ------------------------------------------------------------


@dataclass
class SpectralDecomposition:
    """Eigen-decomposition of a Hermitian matrix split into the connected
    blocks of its sparsity graph."""

    n: int
    blocks: list = field(default_factory=list)  # (indices, eigenvalues, eigenvectors)

    @property
    def eigenvalues(self):
        return np.sort(np.concatenate([b[1] for b in self.blocks]))

    def dense(self):
        vals = np.concatenate([b[1] for b in self.blocks])
        vecs = np.zeros((self.n, self.n), dtype=complex)
        col = 0
        for idx, w, v in self.blocks:
            vecs[np.ix_(idx, np.arange(col, col + len(w)))] = v
            col += len(w)
        order = np.argsort(vals, kind="stable")
        return vals[order], vecs[:, order]

    def apply_function(self, fn, c):
        """f(H) c for a scalar function f of the eigenvalues."""
        c = np.asarray(c)
        out = np.zeros(self.n, dtype=complex)
        for idx, w, v in self.blocks:
            out[idx] = v @ (fn(w) * (v.conj().T @ c[idx]))
        return out


def decompose(H):
    """Block-wise Hermitian eigen-decomposition."""
    a = H.data if isinstance(H, OperatorMatrix) else np.asarray(H)
    if isinstance(H, OperatorMatrix) and not H.hermitian:
        raise ValueError("eigensolver requires a Hermitian matrix")
    n = a.shape[0]
    ncomp, labels = connected_components(csr_matrix(a != 0), directed=False)
    blocks = []
    for k in range(ncomp):
        idx = np.nonzero(labels == k)[0]
        w, v = np.linalg.eigh(a[np.ix_(idx, idx)])
        blocks.append((idx, w, v))
    return SpectralDecomposition(n, blocks)


def eig(H):
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""
    return decompose(H).dense()


def jacobi_eigh(a, tol=1e-12, max_sweeps=60):
    """Cyclic Jacobi rotations for a dense Hermitian matrix.

    Returns ascending eigenvalues and eigenvectors.  Stops when the
    off-diagonal Frobenius norm falls below tol * ||A||_F.
    """
    A = np.array(a, dtype=complex)
    n = A.shape[0]
    Vm = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if scale == 0:
        return np.zeros(n), Vm
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                ab = abs(b)
                if ab < 1e-300:
                    continue
                phase = b / ab
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2 * ab)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1 + tau * tau))
                c = 1 / np.sqrt(1 + t * t)
                s = t * c
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                U = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = A[:, [p, q]] @ U
                A[:, p], A[:, q] = cols[:, 0], cols[:, 1]
                rows = U.conj().T @ A[[p, q], :]
                A[p, :], A[q, :] = rows[0], rows[1]
                A[p, q] = A[q, p] = 0.0
                A[p, p], A[q, q] = A[p, p].real, A[q, q].real
                vc = Vm[:, [p, q]] @ U
                Vm[:, p], Vm[:, q] = vc[:, 0], vc[:, 1]
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    w = np.real(np.diag(A))
    order = np.argsort(w)
    return w[order], Vm[:, order]


NO_GAP = None


def min_gap(H, window, degeneracy_tol=None):
    """Smallest distance between distinct eigenvalues inside ``window``.

    ``H`` may be an operator matrix, a decomposition or an eigenvalue array.
    Eigenvalues closer than ``degeneracy_tol`` (default 1e-12 ||H||) are
    merged first.  Returns ``NO_GAP`` (None) if fewer than two distinct
    eigenvalues remain.
    """
    if isinstance(H, SpectralDecomposition):
        ev = H.eigenvalues
    elif isinstance(H, OperatorMatrix) or (np.ndim(H) == 2):
        ev = decompose(H).eigenvalues
    else:
        ev = np.sort(np.asarray(H, dtype=float))
    if degeneracy_tol is None:
        degeneracy_tol = 1e-12 * max(np.max(np.abs(ev)), 1e-300)
    lo, hi = window
    sel = ev[(ev >= lo) & (ev <= hi)]
    if sel.size < 2:
        return NO_GAP
    groups = [[sel[0]]]
    for e in sel[1:]:
        if e - groups[-1][-1] <= degeneracy_tol:
            groups[-1].append(e)
        else:
            groups.append([e])
    if len(groups) < 2:
        return NO_GAP
    reps = np.array([np.mean(g) for g in groups])
    return float(np.min(np.diff(reps)))


def gap_scan(V, ls, eps_exponent=0.5, halfwidth=0.1, energy=0.5, lmax_pad=16):
    """Rows (l, hbar, eps, s0, s0/(hbar eps^2)) with hbar = hbar_l, eps = hbar^a."""
    rows = []
    for l in ls:
        hbar = hbar_for_cluster(l)
        eps = hbar**eps_exponent
        basis = HarmonicBasis(l + lmax_pad)
        s0 = min_gap(hamiltonian_matrix(basis, hbar, eps, V), (energy - halfwidth, energy + halfwidth))
        ratio = np.nan if s0 is None else s0 / (hbar * eps**2)
        rows.append((l, hbar, eps, np.nan if s0 is None else s0, ratio))
    return rows
