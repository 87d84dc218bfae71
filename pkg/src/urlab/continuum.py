"""Grid wave functions: the position-momentum estimator example and the
two-particle Gaussian whose uncertainty product is fixed by K(x1, x2).

Momentum acts spectrally (FFT on a periodic box), so every grid must pad the
state to many standard deviations in both position and momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import GridTooCoarse, ZeroDeviation
from .inequalities import InequalityReport, geometric_report, make_report
from .measures import OverlapGeometry
from .qcore import EPS_DEV, make_observable, make_pure_state

TAU_GRID = 1e-5
TAU_GRID2 = 1e-3
EPS_NODE = 1e-8
SIGMAS = 8.0


def _power_of_two(n):
    return n >= 2 and n & (n - 1) == 0


def _wavenumbers(n, dx):
    k = 2 * np.pi * np.fft.fftfreq(n, dx)
    if n % 2 == 0:
        k[n // 2] = 0.0  # Nyquist mode has no well-defined odd derivative
    return k


def spectral_derivative(samples, dx, axis=0):
    k = _wavenumbers(samples.shape[axis], dx)
    shape = [1] * samples.ndim
    shape[axis] = -1
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(samples, axis=axis), axis=axis)


@dataclass(frozen=True)
class GridWavefunction:
    samples: np.ndarray
    dx: float
    x0: float
    hbar: float = 1.0

    def __post_init__(self):
        n = len(self.samples)
        if not _power_of_two(n):
            raise ValueError(f"grid size {n} is not a power of two")
        norm = float(np.sum(np.abs(self.samples) ** 2) * self.dx)
        if abs(norm - 1.0) > TAU_GRID:
            raise ValueError(f"grid state norm is {norm!r}")

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(len(self.samples))

    @property
    def density(self):
        return np.abs(self.samples) ** 2 * self.dx

    @classmethod
    def from_function(cls, func, n, dx, x0, hbar=1.0):
        x = x0 + dx * np.arange(n)
        psi = np.asarray(func(x), dtype=np.complex128)
        psi = psi / math.sqrt(float(np.sum(np.abs(psi) ** 2) * dx))
        return cls(psi, dx, x0, hbar)


def _check_resolution(half_span, dx, dev_x, dev_k):
    if half_span < SIGMAS * dev_x * (1 - 1e-12):
        raise GridTooCoarse(f"box half-width {half_span:.3g} is under {SIGMAS:g} sigma ({dev_x:.3g})")
    if math.pi / dx < SIGMAS * dev_k:
        raise GridTooCoarse(
            f"grid step {dx:.3g} resolves wavenumbers up to {math.pi / dx:.3g}, "
            f"need {SIGMAS:g} x {dev_k:.3g}"
        )


def gaussian_wavepacket(sigma=1.0, n=256, chirp=0.0, k0=0.0, center=0.0, hbar=1.0,
                        half_span=None) -> GridWavefunction:
    """``exp(-(x-c)^2 / 4 sigma^2 + i k0 x + i chirp (x-c)^2)`` on a centred box.

    ``sigma`` is the position standard deviation; the box defaults to +-8 sigma
    widened to keep the chirp's local wavenumbers resolved.
    """
    dev_k = math.sqrt(1 / (4 * sigma**2) + 4 * chirp**2 * sigma**2)
    if half_span is None:
        half_span = SIGMAS * sigma
    dx = 2 * half_span / n
    _check_resolution(half_span, dx, sigma, dev_k + abs(k0) / SIGMAS)
    return GridWavefunction.from_function(
        lambda x: np.exp(-((x - center) ** 2) / (4 * sigma**2)
                         + 1j * k0 * x + 1j * chirp * (x - center) ** 2),
        n, dx, center - half_span, hbar)


class PhaseSplit(NamedTuple):
    amplitude: np.ndarray  # psi_R, signed
    phase: np.ndarray
    mask: np.ndarray       # True away from nodes


def phase_amplitude_split(wf: GridWavefunction, eps_node=EPS_NODE) -> PhaseSplit:
    """``psi = psi_R exp(i phi)`` with ``psi_R = +-|psi|`` and the phase branch of least
    total variation.

    Between neighbouring samples the phase may move by any multiple of pi; the
    multiple closest to continuity is taken and odd multiples flip the sign
    of ``psi_R``.  Node samples are masked and their phase interpolated.
    """
    psi = wf.samples
    mag = np.abs(psi)
    mask = mag > eps_node * float(mag.max())
    theta = np.angle(psi)
    idx = np.flatnonzero(mask)
    phi = np.empty(len(idx))
    prev = theta[idx[0]]
    for n, i in enumerate(idx):
        prev = theta[i] + np.round((prev - theta[i]) / np.pi) * np.pi
        phi[n] = prev
    phi = np.interp(np.arange(len(psi)), idx, phi)
    amp = np.where(mask, (psi * np.exp(-1j * phi)).real, 0.0)
    return PhaseSplit(amp, phi, mask)


class LogDerivative(NamedTuple):
    phase_gradient: np.ndarray      # phi', zero on nodes
    amplitude_gradient: np.ndarray  # psi_R' / psi_R, zero on nodes
    amplitude_derivative: np.ndarray  # psi_R', finite everywhere
    weight: np.ndarray              # |psi|^2 dx


def log_derivative(wf: GridWavefunction, eps_node=EPS_NODE) -> LogDerivative:
    """``psi'/psi = psi_R'/psi_R + i phi'`` with ``psi'`` from the FFT.

    Differentiating ``psi`` (periodic, decaying) instead of ``phi`` keeps the
    spectral derivative exact for non-periodic phases such as ``k x`` or ``c x^2``.
    ``psi_R' = Re(psi' exp(-i phi))`` is kept separately because
    ``|psi|^2 (psi_R'/psi_R)^2`` stays finite at a node while the ratio does not.
    """
    split = phase_amplitude_split(wf, eps_node)
    d = spectral_derivative(wf.samples, wf.dx)
    ratio = np.zeros_like(d)
    m = split.mask
    ratio[m] = d[m] / wf.samples[m]
    amp_d = (d * np.exp(-1j * split.phase)).real
    w = wf.density
    return LogDerivative(ratio.imag, ratio.real, amp_d, w / w.sum())


def _avg(w, f):
    return float(np.sum(w * f))


def _sample(wf, f):
    return np.asarray(f(wf.x) if callable(f) else f, dtype=float)


def momentum_moments(wf: GridWavefunction) -> tuple[float, float]:
    """``(<p>, dp)`` from the discrete Fourier transform of the samples."""
    k = _wavenumbers(len(wf.samples), wf.dx)
    pk = np.abs(np.fft.fft(wf.samples)) ** 2
    pk /= pk.sum()
    mean = wf.hbar * float(np.sum(pk * k))
    var = wf.hbar**2 * float(np.sum(pk * k * k)) - mean**2
    return mean, math.sqrt(max(var, 0.0))


def position_moments(wf: GridWavefunction) -> tuple[float, float]:
    w = wf.density
    mean = _avg(w, wf.x)
    return mean, math.sqrt(max(_avg(w, (wf.x - mean) ** 2), 0.0))


def _estimator_pieces(wf):
    ld = log_derivative(wf)
    w = ld.weight
    mean_phi = _avg(w, ld.phase_gradient)
    var_phi = _avg(w, (ld.phase_gradient - mean_phi) ** 2)
    amp = float(np.sum(ld.amplitude_derivative**2) * wf.dx)
    return ld, mean_phi, var_phi, amp


def cc_f_p(wf: GridWavefunction, f) -> float:
    """``K(f, p)^2`` from the phase gradient and amplitude log-derivative.

    ``f`` is an array of samples or a callable of ``x``.  Units of hbar cancel.
    """
    fx = _sample(wf, f)
    ld, mean_phi, var_phi, amp = _estimator_pieces(wf)
    w = ld.weight
    mf = _avg(w, fx)
    var_f = _avg(w, (fx - mf) ** 2)
    if var_f <= EPS_DEV**2:
        raise ZeroDeviation("f", math.sqrt(max(var_f, 0.0)))
    cov = _avg(w, fx * ld.phase_gradient) - mf * mean_phi
    return float(cov**2 / (var_f * (var_phi + amp)))


def cc_f_p_operator(wf: GridWavefunction, f) -> float:
    """Signed ``K(f, p)`` from ``<{Df, Dp}>/(2 df dp)`` with spectral ``p``."""
    fx = _sample(wf, f)
    psi = wf.samples
    p_psi = -1j * wf.hbar * spectral_derivative(psi, wf.dx)
    w = wf.density
    mf = _avg(w, fx)
    df = math.sqrt(max(_avg(w, (fx - mf) ** 2), 0.0))
    if df <= EPS_DEV:
        raise ZeroDeviation("f", df)
    mp, dp = momentum_moments(wf)
    sym = float(np.sum(np.conj(fx * psi) * p_psi).real * wf.dx)
    return (sym - mf * mp) / (df * dp)


def optimal_estimator_cc(wf: GridWavefunction) -> float:
    """``K(phi', p)^2 = var(phi') / (var(phi') + <(psi_R'/psi_R)^2>)``."""
    _, _, var_phi, amp = _estimator_pieces(wf)
    if var_phi <= 0.0:
        return 0.0
    return float(var_phi / (var_phi + amp))


def phase_gradient(wf: GridWavefunction) -> np.ndarray:
    return log_derivative(wf).phase_gradient


def check_estimator_bound(wf: GridWavefunction, tol=1e-6) -> InequalityReport:
    """``4 dx^2 dp^2 / hbar^2 >= (var(phi') + <(psi_R'/psi_R)^2>) / <(psi_R'/psi_R)^2>``."""
    _, _, var_phi, amp = _estimator_pieces(wf)
    _, dx_ = position_moments(wf)
    _, dp = momentum_moments(wf)
    lhs = 4 * dx_**2 * dp**2 / wf.hbar**2
    rhs = (var_phi + amp) / amp
    return make_report("estimator_bound", lhs, rhs, tol=tol,
                       witness={"var_phase_gradient": var_phi, "amplitude_term": amp,
                                "k2_max": var_phi / (var_phi + amp)})


def chirped_gaussian_k2(sigma, c):
    """Closed form ``16 c^2 sigma^4 / (16 c^2 sigma^4 + 1)``."""
    t = 16 * c * c * sigma**4
    return t / (t + 1)


# -- two particles -------------------------------------------------------------

@dataclass(frozen=True)
class GridWavefunction2D:
    samples: np.ndarray  # axis 0 -> x1, axis 1 -> x2
    dx: float
    origin: float
    hbar: float = 1.0

    def __post_init__(self):
        n = self.samples.shape[0]
        if self.samples.shape != (n, n) or not _power_of_two(n):
            raise ValueError(f"2D grid must be square with power-of-two side, got {self.samples.shape}")
        norm = float(np.sum(np.abs(self.samples) ** 2) * self.dx**2)
        if abs(norm - 1.0) > TAU_GRID:
            raise ValueError(f"grid state norm is {norm!r}")

    @property
    def axis(self):
        return self.origin + self.dx * np.arange(self.samples.shape[0])


def _frac(v):
    return Fraction(v) if isinstance(v, (int, Fraction)) else v


def gaussian_pair_squared_upr(a, b):
    """``4 dx1^2 dp1^2 / hbar^2 = ((2a/b) + (b/2a))^2 / 4``; exact for rational input."""
    a, b = _frac(a), _frac(b)
    return ((2 * a / b) + (b / (2 * a))) ** 2 / 4


def gaussian_pair_k2(a, b):
    """``K(x1, x2)^2 = ((2a/b) - (b/2a))^2 / ((2a/b) + (b/2a))^2``."""
    a, b = _frac(a), _frac(b)
    u, v = 2 * a / b, b / (2 * a)
    return (u - v) ** 2 / (u + v) ** 2


def gaussian_pair_inverse_one_minus_k2(a, b):
    return 1 / (1 - gaussian_pair_k2(a, b))


def gaussian_pair_state(a, b, n=128, hbar=1.0, sigmas=SIGMAS) -> GridWavefunction2D:
    """``N exp(-X^2/4a^2) exp(-r^2/4b^2)``, ``X = (x1+x2)/2``, ``r = x1 - x2``.

    The box spans +-``sigmas`` standard deviations of ``x1`` on each axis.
    """
    a, b = float(a), float(b)
    dev_x = math.sqrt(a * a + b * b / 4)
    dev_k = 0.5 * math.sqrt(1 / (4 * a * a) + 1 / (b * b))
    half = sigmas * dev_x
    dx = 2 * half / n
    _check_resolution(half, dx, dev_x, dev_k)
    ax = -half + dx * np.arange(n)
    x1, x2 = np.meshgrid(ax, ax, indexing="ij")
    X, r = (x1 + x2) / 2, x1 - x2
    psi = np.exp(-X**2 / (4 * a * a) - r**2 / (4 * b * b)).astype(np.complex128)
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)) * dx * dx)
    return GridWavefunction2D(psi, dx, -half, hbar)


def _apply_2d(wf, name):
    psi = wf.samples
    x1, x2 = np.meshgrid(wf.axis, wf.axis, indexing="ij")
    p = lambda axis: -1j * wf.hbar * spectral_derivative(psi, wf.dx, axis)  # noqa: E731
    ops = {
        "x1": lambda: x1 * psi,
        "x2": lambda: x2 * psi,
        "p1": lambda: p(0),
        "p2": lambda: p(1),
        "X": lambda: (x1 + x2) / 2 * psi,
        "r": lambda: (x1 - x2) * psi,
        "P": lambda: p(0) + p(1),
        "p": lambda: (p(0) - p(1)) / 2,
    }
    return ops[name]()


class GridMoments(NamedTuple):
    labels: tuple
    mean: np.ndarray
    gram: np.ndarray  # <DX DY>

    def index(self, label):
        return self.labels.index(label)

    def var(self, label):
        i = self.index(label)
        return float(self.gram[i, i].real)

    def cc(self, x, y):
        i, j = self.index(x), self.index(y)
        return float(self.gram[i, j].real / math.sqrt(self.gram[i, i].real * self.gram[j, j].real))

    def sym(self, x, y):
        """``<{DX, DY}>/2``."""
        return float(self.gram[self.index(x), self.index(y)].real)

    def comm(self, x, y):
        return 2j * float(self.gram[self.index(x), self.index(y)].imag)


def grid_moments(wf: GridWavefunction2D, labels=("x1", "x2", "p1", "p2", "X", "r", "P", "p")):
    psi = wf.samples.ravel()
    w = wf.dx**2
    applied = [_apply_2d(wf, name).ravel() for name in labels]
    mean = np.array([float(np.vdot(psi, v).real * w) for v in applied])
    devs = np.array([v - m * psi for v, m in zip(applied, mean)])
    gram = devs.conj() @ devs.T * w
    return GridMoments(tuple(labels), mean, gram)


def gaussian_pair_geometry(wf: GridWavefunction2D):
    """Deviation-vector overlaps for ``A = x1``, ``B = p1``, ``C = x2``."""
    gm = grid_moments(wf, ("x1", "p1", "x2"))
    d = np.sqrt(gm.gram.diagonal().real)
    gab = gm.gram[0, 1] / (d[0] * d[1])
    gac = gm.gram[0, 2] / (d[0] * d[2])
    residual = abs(gm.comm("p1", "x2"))
    return OverlapGeometry(float(gab.real), float(gab.imag), float(gac.real), float(gac.imag)), residual


def check_gaussian_geometric(wf: GridWavefunction2D, tol=1e-9) -> InequalityReport:
    geom, residual = gaussian_pair_geometry(wf)
    return geometric_report(geom, residual, ("x1", "p1", "x2"), tol)


def verify_gaussian_saturation(a, b, n=128, hbar=1.0, tol=TAU_GRID2) -> InequalityReport:
    """Squared UPR of ``(x1, p1)`` against ``1/(1 - K(x1, x2)^2)``: closed forms and grid."""
    upr2 = gaussian_pair_squared_upr(a, b)
    inv = gaussian_pair_inverse_one_minus_k2(a, b)
    exact = isinstance(upr2, Fraction)
    analytic_equal = (upr2 == inv) if exact else math.isclose(upr2, inv, rel_tol=1e-12)
    wf = gaussian_pair_state(a, b, n=n, hbar=hbar)
    gm = grid_moments(wf, ("x1", "x2", "p1"))
    grid_upr2 = 4 * gm.var("x1") * gm.var("p1") / hbar**2
    k_x1x2 = gm.cc("x1", "x2")
    grid_inv = 1 / (1 - k_x1x2**2)
    k_x1p1 = gm.cc("x1", "p1")
    w = {
        "analytic_squared_upr": float(upr2),
        "analytic_inverse_one_minus_k2": float(inv),
        "analytic_exact": exact,
        "analytic_equal": bool(analytic_equal),
        "grid_squared_upr": grid_upr2,
        "grid_inverse_one_minus_k2": grid_inv,
        "grid_K_x1_x2": k_x1x2,
        "grid_K_x1_p1": k_x1p1,
        "grid_points": n,
    }
    ok = (analytic_equal
          and abs(grid_upr2 - float(upr2)) <= tol
          and abs(grid_inv - float(inv)) <= tol
          and abs(k_x1p1) <= tol)
    return make_report("gaussian_saturation", grid_upr2, grid_inv, tol=tol, witness=w,
                       labels=("x1", "p1", "x2"), satisfied=bool(ok))


# -- truncated Fock-space analogue ---------------------------------------------

def ladder_ops(levels, hbar=1.0):
    a = np.diag(np.sqrt(np.arange(1, levels)), 1).astype(np.complex128)
    x = math.sqrt(hbar / 2) * (a + a.conj().T)
    p = 1j * math.sqrt(hbar / 2) * (a.conj().T - a)
    return x, p


def gaussian_pair_fock(a, b, levels=6, hbar=1.0):
    """Two-mode squeezed vacuum with the same ``K(x1, x2)`` and UPR as the grid pair.

    Rescaling ``x -> s x, p -> p/s`` leaves every CC and UPR unchanged, so the
    pair ``(a, b)`` maps onto squeezing ``r = ln(2a/b)/2`` of the oscillator
    vacuum.  Returns the truncated state and ``{"x1","p1","x2","p2"}``.
    """
    r = 0.5 * math.log(2 * float(a) / float(b))
    lam = math.tanh(r)
    coeffs = lam ** np.arange(levels)
    vec = np.zeros(levels * levels, dtype=np.complex128)
    vec[np.arange(levels) * (levels + 1)] = coeffs
    state = make_pure_state(vec)
    x, p = ladder_ops(levels, hbar)
    eye = np.eye(levels)
    ops = {
        "x1": make_observable(np.kron(x, eye), "x1"),
        "p1": make_observable(np.kron(p, eye), "p1"),
        "x2": make_observable(np.kron(eye, x), "x2"),
        "p2": make_observable(np.kron(eye, p), "p2"),
    }
    return state, ops
