"""Exterior algebra on the torus grid.

Differential forms are stored over the real coordinates with one complex
component per strictly increasing multi-index (antisymmetry is implicit in the
indexing).  The complex side -- Dolbeault operators and (p,q)-type projection
-- is reached on demand through the constant change of basis
``dz^j = dx^j + i dy^j``, so a single engine serves d, wedge products,
del/delbar splits and the Hodge star.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .grid import TorusGrid

__all__ = [
    "FormField",
    "increasing_indices",
    "merge_sign",
    "orientation_sign",
    "volume_coefficient",
    "exterior_d",
    "wedge",
    "wedge_top_coefficient",
    "complex_components",
    "form_from_complex_components",
    "complex_labels",
    "type_project",
    "dolbeault_split",
    "ddbar_kk",
    "form_from_11_matrix",
    "matrix_11_from_form",
    "hodge_star",
]


@lru_cache(maxsize=None)
def increasing_indices(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """All strictly increasing multi-indices of the given degree."""
    return tuple(combinations(range(dim), degree))


@lru_cache(maxsize=None)
def _index_lookup(dim: int, degree: int) -> dict[tuple[int, ...], int]:
    return {idx: pos for pos, idx in enumerate(increasing_indices(dim, degree))}


def merge_sign(left: tuple[int, ...], right: tuple[int, ...]) -> int:
    """Sign of sorting the concatenation of two disjoint increasing tuples.

    Returns 0 if the tuples share an index.
    """
    if set(left) & set(right):
        return 0
    inversions = sum(1 for a in left for b in right if a > b)
    return -1 if inversions % 2 else 1


def orientation_sign(n: int) -> int:
    """Sign relating the stored top basis to the complex orientation.

    Components are stored over the sorted axis order
    ``dx^1 ^ .. ^ dx^n ^ dy^1 ^ .. ^ dy^n``, while volume forms are read
    against the positively oriented ``dx^1 ^ dy^1 ^ ... ^ dx^n ^ dy^n``;
    the two differ by ``(-1)^{n(n-1)/2}``.
    """
    return -1 if (n * (n - 1) // 2) % 2 else 1


def volume_coefficient(form: "FormField") -> np.ndarray:
    """Coefficient of a top form on the oriented basis dx^1 ^ dy^1 ^ ..."""
    if form.degree != form.grid.dim_real:
        raise ValueError("volume coefficient requires a top-degree form")
    return orientation_sign(form.grid.n) * form.comps[..., 0]


@dataclass(frozen=True, eq=False)
class FormField:
    """Degree-d form sampled on a grid; components along the last axis.

    ``comps[..., c]`` is the coefficient of the c-th increasing multi-index
    in ``increasing_indices(2n, degree)``.
    """

    grid: TorusGrid
    degree: int
    comps: np.ndarray
    real: bool = field(default=False)

    REAL_TOL = 1e-10

    def __post_init__(self):
        ncomp = len(increasing_indices(self.grid.dim_real, self.degree))
        comps = np.asarray(self.comps, dtype=np.complex128)
        if comps.shape != self.grid.shape + (ncomp,):
            raise ValueError(
                f"components of shape {comps.shape} do not match grid+({ncomp},)"
            )
        object.__setattr__(self, "comps", comps)
        if self.real:
            self.real_comps()

    @property
    def indices(self) -> tuple[tuple[int, ...], ...]:
        return increasing_indices(self.grid.dim_real, self.degree)

    def component(self, idx: tuple[int, ...]) -> np.ndarray:
        return self.comps[..., _index_lookup(self.grid.dim_real, self.degree)[idx]]

    def real_comps(self) -> np.ndarray:
        scale = max(np.max(np.abs(self.comps)), 1e-300)
        worst = np.max(np.abs(self.comps.imag))
        if worst > self.REAL_TOL * max(scale, 1.0):
            raise ValueError(
                f"form tagged real has imaginary part {worst:.3e} (scale {scale:.3e})"
            )
        return self.comps.real.copy()

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.comps)))

    def __add__(self, other: "FormField") -> "FormField":
        self._check_compatible(other)
        return FormField(self.grid, self.degree, self.comps + other.comps,
                         real=self.real and other.real)

    def __sub__(self, other: "FormField") -> "FormField":
        self._check_compatible(other)
        return FormField(self.grid, self.degree, self.comps - other.comps,
                         real=self.real and other.real)

    def __mul__(self, scalar) -> "FormField":
        return FormField(self.grid, self.degree, self.comps * scalar,
                         real=self.real and np.isrealobj(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "FormField":
        return FormField(self.grid, self.degree, -self.comps, real=self.real)

    def _check_compatible(self, other: "FormField"):
        if other.grid is not self.grid and other.grid != self.grid:
            raise ValueError("forms live on different grids")
        if other.degree != self.degree:
            raise ValueError("forms have different degrees")


def exterior_d(form: FormField) -> FormField:
    """Exterior derivative, spectral in each coordinate.

    ``(d a)_K = sum_t (-1)^t d_{K_t} a_{K minus K_t}`` over increasing K.
    """
    grid = form.grid
    dim = grid.dim_real
    if form.degree >= dim:
        raise ValueError("cannot take d of a top-degree form")
    in_lookup = _index_lookup(dim, form.degree)
    out_indices = increasing_indices(dim, form.degree + 1)

    specs = [grid.spectrum(form.comps[..., c]) for c in range(form.comps.shape[-1])]
    out = np.empty(grid.shape + (len(out_indices),), dtype=np.complex128)
    for pos, K in enumerate(out_indices):
        acc = np.zeros(grid.shape, dtype=np.complex128)
        for t, a in enumerate(K):
            sub = K[:t] + K[t + 1:]
            sign = -1.0 if t % 2 else 1.0
            acc += sign * grid.deriv_symbol(a) * specs[in_lookup[sub]]
        out[..., pos] = grid.from_spectrum(acc)
    return FormField(grid, form.degree + 1, out, real=False)


def wedge(a: FormField, b: FormField) -> FormField:
    """Pointwise wedge product of two forms on the same grid."""
    grid = a.grid
    if b.grid is not grid and b.grid != grid:
        raise ValueError("forms live on different grids")
    dim = grid.dim_real
    degree = a.degree + b.degree
    if degree > dim:
        raise ValueError("wedge exceeds top degree")
    a_lookup = _index_lookup(dim, a.degree)
    b_lookup = _index_lookup(dim, b.degree)
    out_indices = increasing_indices(dim, degree)
    out = np.zeros(grid.shape + (len(out_indices),), dtype=np.complex128)
    for pos, K in enumerate(out_indices):
        for I in combinations(K, a.degree):
            J = tuple(sorted(set(K) - set(I)))
            sign = merge_sign(I, J)
            out[..., pos] += sign * a.comps[..., a_lookup[I]] * b.comps[..., b_lookup[J]]
    return FormField(grid, degree, out, real=a.real and b.real)


def wedge_top_coefficient(a: FormField, b: FormField) -> np.ndarray:
    """Coefficient of dx^1...dy^n in a^b, without forming the full product."""
    grid = a.grid
    dim = grid.dim_real
    if a.degree + b.degree != dim:
        raise ValueError("degrees do not add up to the top degree")
    a_lookup = _index_lookup(dim, a.degree)
    b_lookup = _index_lookup(dim, b.degree)
    full = tuple(range(dim))
    out = np.zeros(grid.shape, dtype=np.complex128)
    for I in combinations(full, a.degree):
        J = tuple(sorted(set(full) - set(I)))
        sign = merge_sign(I, J)
        out += sign * a.comps[..., a_lookup[I]] * b.comps[..., b_lookup[J]]
    return out


# -- complex (p,q) machinery -------------------------------------------------


@lru_cache(maxsize=None)
def complex_labels(n: int, degree: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """Labels (I, J) of the complex basis dz^I ^ dzbar^J in fixed order."""
    labels = []
    for p in range(degree + 1):
        q = degree - p
        if p > n or q > n:
            continue
        for I in combinations(range(n), p):
            for J in combinations(range(n), q):
                labels.append((I, J))
    return tuple(labels)


def _wedge_dicts(a: dict, b: dict) -> dict:
    out: dict[tuple[int, ...], complex] = {}
    for I, ca in a.items():
        for J, cb in b.items():
            sign = merge_sign(I, J)
            if sign == 0:
                continue
            K = tuple(sorted(I + J))
            out[K] = out.get(K, 0.0) + sign * ca * cb
    return {K: c for K, c in out.items() if c != 0}


@lru_cache(maxsize=None)
def _complex_basis_expansion(n: int, label: tuple) -> tuple:
    """Expansion of dz^I ^ dzbar^J over real increasing multi-indices."""
    I, J = label
    current = {(): 1.0 + 0.0j}
    for i in I:
        current = _wedge_dicts(current, {(i,): 1.0 + 0j, (n + i,): 1j})
    for j in J:
        current = _wedge_dicts(current, {(j,): 1.0 + 0j, (n + j,): -1j})
    return tuple(sorted(current.items()))


@lru_cache(maxsize=None)
def _c2r_matrix(n: int, degree: int) -> np.ndarray:
    """Matrix sending complex-basis coefficients to real-basis coefficients."""
    labels = complex_labels(n, degree)
    real_lookup = _index_lookup(2 * n, degree)
    mat = np.zeros((len(real_lookup), len(labels)), dtype=np.complex128)
    for c, label in enumerate(labels):
        for K, coeff in _complex_basis_expansion(n, label):
            mat[real_lookup[K], c] = coeff
    return mat


@lru_cache(maxsize=None)
def _r2c_matrix(n: int, degree: int) -> np.ndarray:
    return np.linalg.inv(_c2r_matrix(n, degree))


def complex_components(form: FormField) -> np.ndarray:
    """Coefficients of the form on the complex basis ``complex_labels``."""
    r2c = _r2c_matrix(form.grid.n, form.degree)
    return np.einsum("cr,...r->...c", r2c, form.comps)


def form_from_complex_components(grid: TorusGrid, degree: int, comps: np.ndarray,
                                 real: bool = False) -> FormField:
    c2r = _c2r_matrix(grid.n, degree)
    return FormField(grid, degree, np.einsum("rc,...c->...r", c2r, comps), real=real)


def type_project(form: FormField, p: int, q: int) -> FormField:
    """The (p,q)-part of a form, returned over the real basis."""
    if p + q != form.degree:
        raise ValueError("(p,q) does not match the form degree")
    labels = complex_labels(form.grid.n, form.degree)
    comps = complex_components(form)
    mask = np.array([(len(I), len(J)) == (p, q) for I, J in labels])
    comps = comps * mask
    return form_from_complex_components(form.grid, form.degree, comps)


def dolbeault_split(form: FormField, p: int, q: int) -> tuple[FormField, FormField]:
    """(del, delbar) of a pure (p,q)-form, as real-basis complex forms.

    Valid only when the input has pure type (p,q); then d = del + delbar with
    types (p+1,q) and (p,q+1), so one exterior derivative and one type
    projection produce both pieces.
    """
    df = exterior_d(form)
    del_part = type_project(df, p + 1, q)
    delbar_part = FormField(form.grid, df.degree, df.comps - del_part.comps)
    return del_part, delbar_part


def ddbar_kk(form: FormField, k: int) -> FormField:
    """del delbar of a pure (k,k)-form (degree 2k), e.g. f * omega^{n-1}.

    Uses d(delbar a); the delbar^2 term vanishes identically, so the result
    is exactly the (k+1,k+1)-form del delbar a.
    """
    if form.degree != 2 * k:
        raise ValueError("degree must equal 2k")
    _, delbar_part = dolbeault_split(form, k, k)
    return exterior_d(delbar_part)


def form_from_11_matrix(grid: TorusGrid, coeffs: np.ndarray, real: bool = False) -> FormField:
    """Form ``sum_{ij} coeffs[...,i,j] dz^i ^ dzbar^j`` over the real basis."""
    n = grid.n
    labels = complex_labels(n, 2)
    comps = np.zeros(grid.shape + (len(labels),), dtype=np.complex128)
    for c, (I, J) in enumerate(labels):
        if len(I) == 1 and len(J) == 1:
            comps[..., c] = coeffs[..., I[0], J[0]]
    return form_from_complex_components(grid, 2, comps, real=real)


def matrix_11_from_form(form: FormField) -> np.ndarray:
    """Coefficients c[...,i,j] of the (1,1)-part ``c_{ij} dz^i ^ dzbar^j``."""
    n = form.grid.n
    if form.degree != 2:
        raise ValueError("expected a 2-form")
    labels = complex_labels(n, 2)
    comps = complex_components(form)
    out = np.zeros(form.grid.shape + (n, n), dtype=np.complex128)
    for c, (I, J) in enumerate(labels):
        if len(I) == 1 and len(J) == 1:
            out[..., I[0], J[0]] = comps[..., c]
    return out


# -- Hodge star ---------------------------------------------------------------


def _leibniz_minor(matrix_field: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]) -> np.ndarray:
    """Pointwise determinant of the (rows x cols) submatrix of a matrix field."""
    d = len(rows)
    if d == 0:
        return np.ones(matrix_field.shape[:-2], dtype=matrix_field.dtype)
    out = np.zeros(matrix_field.shape[:-2], dtype=matrix_field.dtype)
    for perm in permutations(range(d)):
        inversions = sum(1 for a in range(d) for b in range(a + 1, d) if perm[a] > perm[b])
        sign = -1.0 if inversions % 2 else 1.0
        term = matrix_field[..., rows[0], cols[perm[0]]].copy()
        for a in range(1, d):
            term = term * matrix_field[..., rows[a], cols[perm[a]]]
        out += sign * term
    return out


def _inverse_minor(G: np.ndarray, Ginv: np.ndarray, detG: np.ndarray,
                   rows: tuple[int, ...], cols: tuple[int, ...], dim: int) -> np.ndarray:
    """det(Ginv[rows, cols]), via complementary minors of G when cheaper."""
    d = len(rows)
    if d <= dim - d:
        return _leibniz_minor(Ginv, rows, cols)
    comp_rows = tuple(a for a in range(dim) if a not in cols)
    comp_cols = tuple(a for a in range(dim) if a not in rows)
    sign = -1.0 if (sum(rows) + sum(cols)) % 2 else 1.0
    return sign * _leibniz_minor(G, comp_rows, comp_cols) / detG


def hodge_star(form: FormField, G: np.ndarray, Ginv: np.ndarray,
               detG: np.ndarray) -> FormField:
    """Hodge star with respect to a pointwise Riemannian metric G.

    Defined by ``a ^ (star b) = <a, b>_G volG`` with the oriented volume
    ``volG = sqrt(det G) dx^1 ^ dy^1 ^ ... ^ dx^n ^ dy^n`` and the usual Gram
    inner product on increasing multi-indices.  On a 2n-manifold
    ``star star = (-1)^d`` on d-forms; in particular star^2 = -1 on odd
    degrees.
    """
    grid = form.grid
    dim = grid.dim_real
    d = form.degree
    idx_in = increasing_indices(dim, d)
    idx_out = increasing_indices(dim, dim - d)
    out_lookup = _index_lookup(dim, dim - d)
    sqrt_detG = orientation_sign(grid.n) * np.sqrt(detG)
    out = np.zeros(grid.shape + (len(idx_out),), dtype=np.complex128)
    for I in idx_in:
        comp_I = tuple(sorted(set(range(dim)) - set(I)))
        eps = merge_sign(I, comp_I)
        acc = np.zeros(grid.shape, dtype=np.complex128)
        for c, J in enumerate(idx_in):
            acc += _inverse_minor(G, Ginv, detG, I, J, dim) * form.comps[..., c]
        out[..., out_lookup[comp_I]] += eps * sqrt_detG * acc
    return FormField(grid, dim - d, out, real=False)
