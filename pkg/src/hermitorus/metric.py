"""Hermitian metric fields on the torus: forms, volumes, torsion, diagnostics.

Index conventions (used throughout the package)
-----------------------------------------------
* ``g[..., i, j]`` stores ``g_{i jbar}``; the matrix is Hermitian positive
  definite pointwise.
* The raised metric ``g^{i jbar}`` pairs as ``g^{i jbar} X_{i jbar} =
  sum_{ij} ginv[..., j, i] X[..., i, j]`` where ``ginv`` is the pointwise
  matrix inverse of ``g``.  (Equivalently ``g^{i jbar} g_{k jbar} =
  delta_{ik}``.)
* The fundamental form is ``omega = i g_{i jbar} dz^i ^ dzbar^j``; its top
  power has real coefficient ``omega^n = 2^n n! det(g) dx^1 ^ dy^1 ^ ...``.
* Integrals written against ``omega^n`` are taken literally:
  ``\\int f omega^n = 2^n n! \\int f det(g) dx``.
* The compatible Riemannian metric on the real tangent space, in the
  ``(x^1..x^n, y^1..y^n)`` basis, is ``G = 2 [[A, B], [-B, A]]`` with
  ``A = Re g``, ``B = Im g``; then ``sqrt(det G) = 2^n det(g)`` and the
  Riemannian volume equals ``omega^n / n!``.
* For real 1-forms ``a = a_i dz^i + conj``, the pointwise inner product is
  ``<a, b> = 2 Re(g^{i jbar} a_i conj(b_j))`` on the (1,0)-components.  This
  normalization is calibrated on the conformally flat family, where the
  comparison identity between the two Laplacians holds in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import forms
from .errors import DimensionMismatch, PositivityViolation, SingularWedgeMap
from .forms import FormField
from .grid import ScalarField, TorusGrid

__all__ = [
    "MetricField",
    "MetricSpec",
    "MetricTerm",
    "TorsionOneForm",
    "build_metric",
    "omega_form",
    "omega_power",
    "volume_integral",
    "torsion",
    "structure_residuals",
    "conformal",
    "ddbar_scalar",
    "coclosed_residual",
    "oneform_inner",
    "divergence_codifferential",
]

HERMITIAN_TOL = 1e-12
EIGENVALUE_FLOOR = 1e-6


@dataclass(eq=False)
class MetricField:
    """Pointwise Hermitian positive-definite metric g_{i jbar} on a grid."""

    grid: TorusGrid
    g: np.ndarray
    eigenvalue_floor: float = EIGENVALUE_FLOOR

    def __post_init__(self):
        n = self.grid.n
        g = np.ascontiguousarray(np.asarray(self.g, dtype=np.complex128))
        if g.shape != self.grid.shape + (n, n):
            raise DimensionMismatch(
                f"metric of shape {g.shape} does not match grid + ({n},{n})"
            )
        self.g = g
        self._check_hermitian()
        self._check_positive()

    def _check_hermitian(self):
        herm = np.conj(np.swapaxes(self.g, -1, -2))
        scale = max(float(np.max(np.abs(self.g))), 1.0)
        worst = float(np.max(np.abs(self.g - herm)))
        if worst > HERMITIAN_TOL * scale:
            raise PositivityViolation(
                f"metric is not Hermitian: max |g - g^H| = {worst:.3e}"
            )

    def _check_positive(self):
        eigs = np.linalg.eigvalsh(self.g)
        min_eig = eigs[..., 0]
        flat = int(np.argmin(min_eig))
        worst = float(min_eig.reshape(-1)[flat])
        if worst <= self.eigenvalue_floor:
            point = np.unravel_index(flat, self.grid.shape)
            coords = tuple(p / self.grid.N for p in point)
            raise PositivityViolation(
                f"metric not positive definite: eigenvalue {worst:.3e} at "
                f"grid point {point} (coords {coords})",
                point=point,
                eigenvalue=worst,
            )

    @property
    def n(self) -> int:
        return self.grid.n

    @cached_property
    def ginv(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    @cached_property
    def det(self) -> np.ndarray:
        """det(g_{i jbar}), real and positive."""
        d = np.linalg.det(self.g)
        return d.real

    @cached_property
    def G_real(self) -> np.ndarray:
        """Compatible Riemannian metric in the (x, y) coordinate basis."""
        n = self.n
        A = self.g.real
        B = self.g.imag
        G = np.empty(self.grid.shape + (2 * n, 2 * n), dtype=np.float64)
        G[..., :n, :n] = A
        G[..., :n, n:] = B
        G[..., n:, :n] = -B
        G[..., n:, n:] = A
        return 2.0 * G

    @cached_property
    def G_real_inv(self) -> np.ndarray:
        return np.linalg.inv(self.G_real)

    @cached_property
    def sqrt_detG(self) -> np.ndarray:
        """sqrt(det G) = 2^n det(g)."""
        return (2.0 ** self.n) * self.det

    @cached_property
    def detG(self) -> np.ndarray:
        return self.sqrt_detG ** 2

    def hodge_star(self, form: FormField) -> FormField:
        """Hodge star of a form with respect to this metric."""
        return forms.hodge_star(form, self.G_real, self.G_real_inv, self.detG)

    def trace_11(self, coeffs: np.ndarray) -> np.ndarray:
        """Metric trace g^{i jbar} b_{i jbar} of (1,1)-coefficients b."""
        return np.einsum("...ji,...ij->...", self.ginv, coeffs)


@dataclass(frozen=True)
class MetricTerm:
    """One Fourier term of a metric entry; the conjugate-transpose partner
    is added automatically so Hermitianity holds by construction."""

    entry: tuple[int, int]
    wave: tuple[int, ...]
    coeff: complex


@dataclass(frozen=True)
class MetricSpec:
    """Finite Fourier description of a Hermitian metric (input format).

    The resulting metric is ``exp(u) * (base + sum of terms)`` where each
    term contributes ``coeff * exp(2 pi i wave.x)`` at ``entry`` plus the
    conjugate at the transposed entry, and the optional real conformal
    exponent ``u`` is given by the same one-sided series convention.
    """

    n: int
    base: np.ndarray | None = None
    terms: tuple[MetricTerm, ...] = ()
    conformal: tuple[tuple[tuple[int, ...], complex], ...] = ()

    def base_matrix(self) -> np.ndarray:
        if self.base is None:
            return np.eye(self.n, dtype=np.complex128)
        base = np.asarray(self.base, dtype=np.complex128)
        if base.shape != (self.n, self.n):
            raise DimensionMismatch(f"base matrix shape {base.shape} != ({self.n},{self.n})")
        if np.max(np.abs(base - base.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(base))):
            raise PositivityViolation("base matrix is not Hermitian")
        return base


def build_metric(spec: MetricSpec, grid: TorusGrid,
                 eigenvalue_floor: float = EIGENVALUE_FLOOR) -> MetricField:
    """Assemble a metric field from its Fourier description.

    Raises
    ------
    DimensionMismatch : spec dimension does not match the grid.
    PositivityViolation : the assembled field fails the eigenvalue scan.
    """
    if spec.n != grid.n:
        raise DimensionMismatch(f"spec has n={spec.n}, grid has n={grid.n}")
    n = grid.n
    g = np.zeros(grid.shape + (n, n), dtype=np.complex128)
    g[...] = spec.base_matrix()
    for term in spec.terms:
        i, j = term.entry
        if not (0 <= i < n and 0 <= j < n):
            raise DimensionMismatch(f"term entry {term.entry} out of range for n={n}")
        mode = grid.exp_mode(term.wave)
        g[..., i, j] += term.coeff * mode
        g[..., j, i] += np.conj(term.coeff * mode)
    if spec.conformal:
        u = np.zeros(grid.shape, dtype=np.complex128)
        for wave, coeff in spec.conformal:
            mode = grid.exp_mode(wave)
            u += coeff * mode + np.conj(coeff * mode)
        g = np.exp(u.real)[..., None, None] * g
    return MetricField(grid, g, eigenvalue_floor=eigenvalue_floor)


def omega_form(metric: MetricField) -> FormField:
    """Fundamental (1,1)-form omega = i g_{i jbar} dz^i ^ dzbar^j."""
    return forms.form_from_11_matrix(metric.grid, 1j * metric.g, real=True)


def omega_power(metric: MetricField, k: int) -> FormField:
    """k-th wedge power of omega, 1 <= k <= n."""
    n = metric.n
    if not 1 <= k <= n:
        raise ValueError(f"power k={k} outside 1..{n}")
    omega = omega_form(metric)
    out = omega
    for _ in range(k - 1):
        out = forms.wedge(out, omega)
    return out


def volume_integral(f, metric: MetricField) -> float:
    """The weighted integral  \\int f omega^n = 2^n n! \\int f det(g) dx."""
    values = f.real_values() if isinstance(f, ScalarField) else np.asarray(f)
    n = metric.n
    total = (2.0 ** n) * math.factorial(n) * metric.grid.mean(values * metric.det)
    return float(np.real(total))


@dataclass(eq=False)
class TorsionOneForm:
    """Torsion (Lee) 1-form, stored through its (1,0)-components theta_i.

    The real 1-form is ``theta_i dz^i + conj``; it satisfies
    ``d omega^{n-1} = omega^{n-1} ^ theta`` within the solver tolerance.
    """

    grid: TorusGrid
    comps10: np.ndarray
    residual: float = field(default=0.0)

    def real_components(self) -> np.ndarray:
        """Components over (dx^1..dx^n, dy^1..dy^n)."""
        n = self.grid.n
        out = np.empty(self.grid.shape + (2 * n,), dtype=np.float64)
        out[..., :n] = 2.0 * self.comps10.real
        out[..., n:] = -2.0 * self.comps10.imag
        return out

    def as_real_form(self) -> FormField:
        return FormField(self.grid, 1, self.real_components().astype(np.complex128),
                         real=True)

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.comps10)))


def _wedge_with_oneform_matrix(beta: FormField) -> np.ndarray:
    """Matrix of the pointwise map  a |-> beta ^ a  from 1-forms to top-1 forms.

    Rows follow ``increasing_indices(2n, 2n-1)``, columns the coordinate index
    of the 1-form component.
    """
    grid = beta.grid
    dim = grid.dim_real
    if beta.degree != dim - 2:
        raise ValueError("beta must have degree 2n-2")
    rows = forms.increasing_indices(dim, dim - 1)
    mat = np.zeros(grid.shape + (dim, dim), dtype=np.float64)
    comps = beta.real_comps()
    lookup = {idx: c for c, idx in enumerate(forms.increasing_indices(dim, dim - 2))}
    for r, K in enumerate(rows):
        for a in K:
            sub = tuple(x for x in K if x != a)
            sign = forms.merge_sign(sub, (a,))
            mat[..., r, a] = sign * comps[..., lookup[sub]]
    return mat


def torsion(metric: MetricField, residual_tol: float = 1e-8,
            condition_limit: float = 1e8) -> TorsionOneForm:
    """Torsion 1-form theta with d omega^{n-1} = omega^{n-1} ^ theta.

    Solves the pointwise 2n x 2n wedge system directly, mirroring the
    definitional isomorphism; the reconstruction residual is checked against
    ``residual_tol`` relative to the scale of omega^{n-1}.
    """
    grid = metric.grid
    beta = omega_power(metric, metric.n - 1) if metric.n > 1 else None
    if metric.n == 1:
        # omega^0 = 1; d(1) = 0 forces theta = 0.
        return TorsionOneForm(grid, np.zeros(grid.shape + (1,), dtype=np.complex128))
    dbeta = forms.exterior_d(beta)
    mat = _wedge_with_oneform_matrix(beta)

    sample = tuple(slice(None, None, max(grid.N // 4, 1)) for _ in range(grid.dim_real))
    conds = np.linalg.cond(mat[sample])
    if not np.all(np.isfinite(conds)) or np.max(conds) > condition_limit:
        raise SingularWedgeMap(
            f"wedge map condition number {np.max(conds):.3e} exceeds {condition_limit:.1e}"
        )

    rhs = dbeta.real_comps()
    theta_real = np.linalg.solve(mat, rhs[..., None])[..., 0]
    if not np.all(np.isfinite(theta_real)):
        raise SingularWedgeMap("wedge solve produced non-finite components")

    n = grid.n
    comps10 = 0.5 * (theta_real[..., :n] - 1j * theta_real[..., n:])
    theta = TorsionOneForm(grid, comps10)

    recon = forms.wedge(beta, theta.as_real_form())
    scale = max(dbeta.norm_inf(), beta.norm_inf())
    res = float(np.max(np.abs(recon.comps - dbeta.comps))) / scale
    if res > residual_tol:
        raise SingularWedgeMap(
            f"torsion reconstruction residual {res:.3e} exceeds {residual_tol:.1e}"
        )
    object.__setattr__(theta, "residual", res)
    return theta


def structure_residuals(metric: MetricField) -> dict[str, float]:
    """Max-norm residuals of  d omega = 0,  d omega^{n-1} = 0,
    del delbar omega^{n-1} = 0,  each normalized by the differentiated input.
    """
    omega = omega_form(metric)
    kahler = forms.exterior_d(omega).norm_inf() / omega.norm_inf()
    if metric.n == 1:
        return {"kahler": kahler, "balanced": 0.0, "gauduchon": 0.0}
    beta = omega_power(metric, metric.n - 1)
    balanced = forms.exterior_d(beta).norm_inf() / beta.norm_inf()
    gauduchon = forms.ddbar_kk(beta, metric.n - 1).norm_inf() / beta.norm_inf()
    return {"kahler": kahler, "balanced": balanced, "gauduchon": gauduchon}


def conformal(metric: MetricField, u: ScalarField) -> MetricField:
    """Conformal change  g -> e^u g  (u real)."""
    values = u.real_values() if isinstance(u, ScalarField) else np.asarray(u)
    return MetricField(metric.grid, np.exp(values)[..., None, None] * metric.g,
                       eigenvalue_floor=metric.eigenvalue_floor)


def ddbar_scalar(f, metric: MetricField) -> ScalarField:
    """phi with  del delbar (f omega^{n-1}) = phi * omega^n / n!.

    phi vanishes identically iff f lies in the kernel of the adjoint complex
    Laplacian up to the constant factor; for f = 1 this is the Gauduchon
    condition.
    """
    grid = metric.grid
    values = f.real_values() if isinstance(f, ScalarField) else np.asarray(f)
    n = metric.n
    if n == 1:
        top = forms.exterior_d(
            forms.dolbeault_split(
                FormField(grid, 0, values[..., None].astype(np.complex128)), 0, 0)[1])
    else:
        beta = omega_power(metric, n - 1)
        fbeta = FormField(grid, beta.degree, values[..., None] * beta.comps, real=True)
        top = forms.ddbar_kk(fbeta, n - 1)
    phi = forms.volume_coefficient(top) / ((2.0 ** n) * metric.det)
    return ScalarField(grid, phi)


def divergence_codifferential(metric: MetricField, real_comps: np.ndarray) -> np.ndarray:
    """Riemannian codifferential of a real 1-form via the divergence formula.

    ``d* a = -(1/sqrtG) d_a (sqrtG G^{ab} a_b)`` with G the compatible real
    metric; vanishes on the torsion form exactly when the metric is Gauduchon.
    """
    grid = metric.grid
    w = metric.sqrt_detG
    v = np.einsum("...ab,...b->...a", metric.G_real_inv, real_comps) * w[..., None]
    div = np.zeros(grid.shape, dtype=np.complex128)
    for a in range(grid.dim_real):
        div += grid.axis_deriv(v[..., a], a)
    return -(div / w)


def coclosed_residual(theta: TorsionOneForm, metric: MetricField) -> float:
    """Max-norm of d* theta (zero exactly when the metric is Gauduchon)."""
    codiff = divergence_codifferential(metric, theta.real_components())
    return float(np.max(np.abs(codiff)))


def oneform_inner(metric: MetricField, alpha10: np.ndarray, beta10: np.ndarray) -> np.ndarray:
    """Pointwise inner product of real 1-forms via (1,0)-components.

    ``<a, b> = 2 Re(g^{i jbar} a_i conj(b_j))``; see the module docstring for
    the calibration of this normalization.
    """
    s = np.einsum("...ji,...i,...j->...", metric.ginv, alpha10, np.conj(beta10))
    return 2.0 * s.real
