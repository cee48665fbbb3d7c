"""Chern curvature of the holomorphic tangent bundle and its traces.

The curvature tensor of (T^{1,0}M, omega) in local coordinates is

    R_{i jbar k lbar} = - d_i d_jbar g_{k lbar}
                        + g^{p qbar} (d_i g_{k qbar}) (d_jbar g_{p lbar}),

computed here with spectral Wirtinger derivatives.  Both full traces are
provided: the Chern scalar curvature S (trace over form and fiber pairs) and
the second scalar curvature S_hat (crossed trace); they agree exactly in the
Kahler case.  The sphere-averaging identity

    average of H_p over the unit sphere = (S + S_hat)(p) / (n (n+1))

is exposed through ``berger_average`` with an exact quadrature path (the
classical fourth-moment identity) and an independent Monte-Carlo path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .forms import FormField, form_from_11_matrix, matrix_11_from_form
from .grid import ScalarField, TorusGrid
from .metric import MetricField

__all__ = [
    "ChernCurvatureField",
    "Direction",
    "BergerEstimate",
    "chern_curvature",
    "hsc_at",
    "scalar_S",
    "scalar_S_hat",
    "ricci_form",
    "trace_omega",
    "unitary_frame",
    "berger_average",
    "sphere_volume",
    "hsc_range_estimate",
]

HERMITIAN_SYM_TOL = 1e-10


@dataclass(eq=False)
class ChernCurvatureField:
    """Pointwise tensor R_{i jbar k lbar} with its Hermitian symmetry.

    ``R[..., i, j, k, l]`` stores the component with barred slots j, l;
    ``conj(R_{i jbar k lbar}) = R_{j ibar l kbar}`` holds pointwise.
    """

    grid: TorusGrid
    R: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.R.shape != self.grid.shape + (n,) * 4:
            raise DimensionMismatch(f"curvature of shape {self.R.shape} does not match grid")
        sym = np.conj(np.einsum("...ijkl->...jilk", self.R))
        scale = max(float(np.max(np.abs(self.R))), 1e-300)
        worst = float(np.max(np.abs(self.R - sym)))
        if worst > HERMITIAN_SYM_TOL * max(scale, 1.0):
            raise ValueError(f"curvature breaks Hermitian symmetry: {worst:.3e} at scale {scale:.3e}")


def metric_first_derivatives(metric: MetricField) -> np.ndarray:
    """dG[..., i, k, l] = d_{z^i} g_{k lbar} (spectral)."""
    grid = metric.grid
    n = metric.n
    spec = grid.spectrum(metric.g)
    out = np.empty(grid.shape + (n, n, n), dtype=np.complex128)
    for i in range(n):
        sym = grid.wirtinger_symbol(i).reshape(grid.wirtinger_symbol(i).shape + (1, 1))
        out[..., i, :, :] = grid.from_spectrum(spec * sym)
    return out


def chern_curvature(metric: MetricField) -> ChernCurvatureField:
    """Curvature tensor of the Chern connection on (T^{1,0}M, omega)."""
    grid = metric.grid
    n = metric.n
    spec = grid.spectrum(metric.g)

    dG = np.empty(grid.shape + (n, n, n), dtype=np.complex128)
    d2G = np.empty(grid.shape + (n, n, n, n), dtype=np.complex128)
    for i in range(n):
        si = grid.wirtinger_symbol(i)
        dG[..., i, :, :] = grid.from_spectrum(spec * si[..., None, None])
        for j in range(n):
            sj = grid.wirtinger_symbol(j, conjugate=True)
            d2G[..., i, j, :, :] = grid.from_spectrum(spec * (si * sj)[..., None, None])

    # d_jbar g_{p lbar} = conj(d_{z^j} g_{l pbar}) by Hermitianity.
    dbarG = np.conj(np.einsum("...jlp->...jpl", dG))
    term2 = np.einsum("...ikq,...qp,...jpl->...ijkl", dG, metric.ginv, dbarG)
    return ChernCurvatureField(grid, -d2G + term2)


@dataclass(frozen=True)
class Direction:
    """A tangent direction v in T^{1,0} at one grid point."""

    point: tuple[int, ...]
    v: np.ndarray

    def normalized(self, metric: MetricField) -> "Direction":
        """Rescale to unit length with respect to the metric at the point."""
        g_p = metric.g[self.point]
        norm_sq = np.einsum("ij,i,j->", g_p, self.v, np.conj(self.v)).real
        return Direction(self.point, self.v / math.sqrt(norm_sq))


def hsc_at(R: ChernCurvatureField, d: Direction) -> float:
    """Holomorphic sectional curvature H_p(v) = R(v, vbar, v, vbar)."""
    Rp = R.R[d.point]
    val = np.einsum("ijkl,i,j,k,l->", Rp, d.v, np.conj(d.v), d.v, np.conj(d.v))
    scale = max(abs(val), 1.0)
    assert abs(val.imag) <= 1e-10 * scale, f"HSC has imaginary part {val.imag:.3e}"
    return float(val.real)


def scalar_S(metric: MetricField, R: ChernCurvatureField) -> ScalarField:
    """Chern scalar curvature  S = g^{i jbar} g^{k lbar} R_{i jbar k lbar}."""
    vals = np.einsum("...ji,...lk,...ijkl->...", metric.ginv, metric.ginv, R.R)
    return ScalarField(metric.grid, vals, real=True)


def scalar_S_hat(metric: MetricField, R: ChernCurvatureField) -> ScalarField:
    """Second scalar curvature  S_hat = g^{i lbar} g^{k jbar} R_{i jbar k lbar}."""
    vals = np.einsum("...li,...jk,...ijkl->...", metric.ginv, metric.ginv, R.R)
    return ScalarField(metric.grid, vals, real=True)


def ricci_form(metric: MetricField) -> FormField:
    """Chern-Ricci form  Ric(omega) = -i del delbar log det g  (closed, real)."""
    grid = metric.grid
    n = metric.n
    logdet = np.log(metric.det).astype(np.complex128)
    spec = grid.spectrum(logdet)
    H = np.empty(grid.shape + (n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            H[..., i, j] = grid.from_spectrum(
                spec * grid.wirtinger_symbol(i) * grid.wirtinger_symbol(j, conjugate=True))
    return form_from_11_matrix(grid, -1j * H, real=True)


def trace_omega(metric: MetricField, form: FormField) -> ScalarField:
    """Metric trace of a real (1,1)-form written as i b_{i jbar} dz^i ^ dzbar^j."""
    b = matrix_11_from_form(form) / 1j
    return ScalarField(metric.grid, metric.trace_11(b))


def sphere_volume(n: int) -> float:
    """Volume of the unit sphere S^{2n-1}: 2 pi^n / (n-1)!."""
    return 2.0 * math.pi ** n / math.factorial(n - 1)


def unitary_frame(metric: MetricField, point: tuple[int, ...]) -> np.ndarray:
    """Columns e_a with g(e_a, e_b) = delta_ab at the given grid point."""
    g_p = metric.g[point]
    L = np.linalg.cholesky(g_p)
    E = np.linalg.inv(L).T
    check = np.einsum("ia,ij,jb->ab", E, g_p, np.conj(E))
    assert np.max(np.abs(check - np.eye(metric.n))) < 1e-12
    return E


@dataclass(frozen=True)
class BergerEstimate:
    """Sphere average of HSC at a point: integral over S^{2n-1}."""

    value: float
    stderr: float | None
    mode: str
    samples: int | None = None


def berger_average(R: ChernCurvatureField, metric: MetricField, point: tuple[int, ...],
                   mode: str = "quadrature", seed: int = 0,
                   samples: int = 100_000) -> BergerEstimate:
    """Integral of H_p(v) over the unit sphere |v|_g = 1.

    ``quadrature`` contracts the curvature in a g-unitary frame with the
    classical fourth moment (delta delta + delta delta) / (n (n+1)); the
    Monte-Carlo mode samples the sphere with a counter-based generator so
    results are reproducible and independent of chunking.
    """
    n = metric.n
    E = unitary_frame(metric, point)
    Rp = np.einsum("ijkl,ia,jb,kc,ld->abcd", R.R[point], E, np.conj(E), E, np.conj(E))
    vol = sphere_volume(n)
    if mode == "quadrature":
        tr1 = np.einsum("aacc->", Rp)
        tr2 = np.einsum("acca->", Rp)
        val = (tr1 + tr2).real / (n * (n + 1)) * vol
        return BergerEstimate(float(val), None, "quadrature")
    if mode == "monte-carlo":
        rng = np.random.Generator(np.random.Philox(key=seed))
        w = rng.normal(size=(samples, 2 * n))
        wc = w[:, :n] + 1j * w[:, n:]
        wc /= np.linalg.norm(wc, axis=1)[:, None]
        t1 = np.einsum("abcd,sa,sb->scd", Rp, wc, np.conj(wc))
        H = np.einsum("scd,sc,sd->s", t1, wc, np.conj(wc)).real
        val = vol * float(np.mean(H))
        stderr = vol * float(np.std(H, ddof=1)) / math.sqrt(samples)
        return BergerEstimate(val, stderr, "monte-carlo", samples)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class HSCRange:
    """Sampled extrema of holomorphic sectional curvature (heuristic)."""

    min: float
    max: float
    argmin: Direction
    argmax: Direction
    heuristic: bool = True


def hsc_range_estimate(R: ChernCurvatureField, metric: MetricField,
                       seed: int = 0, point_stride: int = 4,
                       directions_per_point: int = 16,
                       refine_directions: int = 256) -> HSCRange:
    """Sampled HSC extrema over grid points x random unit directions.

    A coarse scan over a strided point set is refined with more directions at
    the extremal points.  Deterministic for a fixed seed; the result is a
    heuristic classifier, never a proof of a sign.
    """
    grid = metric.grid
    n = metric.n
    rng = np.random.Generator(np.random.Philox(key=seed))

    stride = max(1, point_stride)
    axes = [range(0, grid.N, stride)] * grid.dim_real
    points = [tuple(p) for p in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, grid.dim_real)]

    def scan(point, count):
        E = unitary_frame(metric, point)
        Rp = np.einsum("ijkl,ia,jb,kc,ld->abcd", R.R[point], E, np.conj(E), E, np.conj(E))
        w = rng.normal(size=(count, 2 * n))
        wc = w[:, :n] + 1j * w[:, n:]
        wc /= np.linalg.norm(wc, axis=1)[:, None]
        t1 = np.einsum("abcd,sa,sb->scd", Rp, wc, np.conj(wc))
        H = np.einsum("scd,sc,sd->s", t1, wc, np.conj(wc)).real
        lo, hi = int(np.argmin(H)), int(np.argmax(H))
        return (H[lo], wc[lo] @ E.T), (H[hi], wc[hi] @ E.T)

    best_min = (np.inf, None, None)
    best_max = (-np.inf, None, None)
    for p in points:
        (lo, vlo), (hi, vhi) = scan(p, directions_per_point)
        if lo < best_min[0]:
            best_min = (lo, p, vlo)
        if hi > best_max[0]:
            best_max = (hi, p, vhi)

    for which in ("min", "max"):
        p = best_min[1] if which == "min" else best_max[1]
        (lo, vlo), (hi, vhi) = scan(p, refine_directions)
        if lo < best_min[0]:
            best_min = (lo, p, vlo)
        if hi > best_max[0]:
            best_max = (hi, p, vhi)

    return HSCRange(
        min=float(best_min[0]), max=float(best_max[0]),
        argmin=Direction(best_min[1], best_min[2]),
        argmax=Direction(best_max[1], best_max[2]),
    )
