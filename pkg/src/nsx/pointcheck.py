"""Pointwise linear-algebra verdicts for forms and maps.

Everything here answers a question at a point or over a prepared sample
set: the rank and kernel of a 2-form, the rank of a map's Jacobian, the
intrinsic-gradient rank of a form, the 4-dimensional-kernel degeneracy
test with its semi-definiteness condition, the contact-sign sweep, and
the dyadic search for a stabilizing constant.

Rational inputs stay rational: rank, kernel, and signature questions on
exact matrices are decided by exact elimination with no tolerance at
all.  Floating inputs go through an SVD with a relative threshold and
an explicit undecided band.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import _linalg
from .errors import DomainError
from .symexpr import compile_numpy, rat

RANK_THRESHOLD = 1e-8
RANK_BAND_FLOOR = 1e-10


@dataclass(frozen=True)
class RankVerdict:
    rank: int
    undecided: bool
    exact: bool


def form_matrix_at(form, env, registry=None):
    """Skew matrix of a 2-form at a point.

    Entries are Fractions when every coefficient evaluates exactly
    there, floats otherwise (mixed rows are promoted to float).
    """
    if form.degree != 2:
        raise DomainError("form_matrix_at needs a 2-form")
    n = form.chart.dim
    zero = Fraction(0)
    m = [[zero] * n for _ in range(n)]
    exact = True
    for (i, j), coeff in form.comps.items():
        v = coeff.eval(env, registry)
        if not isinstance(v, Fraction):
            exact = False
        m[i][j] = v
        m[j][i] = -v
    if not exact:
        m = [[float(x) for x in row] for row in m]
    return m, exact


def _matrix_rank(rows, exact, threshold, band_floor):
    if exact:
        return RankVerdict(_linalg.exact_rank(rows), False, True)
    rank, und = _linalg.float_rank(rows, threshold, band_floor)
    return RankVerdict(rank, und, False)


def rank_at(form, env, *, threshold=RANK_THRESHOLD, band_floor=RANK_BAND_FLOOR, registry=None):
    m, exact = form_matrix_at(form, env, registry)
    return _matrix_rank(m, exact, threshold, band_floor)


def kernel_at(form, env, *, threshold=RANK_THRESHOLD, registry=None):
    """Basis of the null space of the 2-form's matrix at a point."""
    m, exact = form_matrix_at(form, env, registry)
    n = form.chart.dim
    if exact:
        return _linalg.exact_kernel(m, n)
    a = np.asarray(m, dtype=float)
    u, sv, vt = np.linalg.svd(a)
    scale = float(sv[0]) if sv.size and sv[0] > 0 else 1.0
    return [vt[i] for i in range(n) if i >= sv.size or sv[i] <= threshold * scale]


def map_rank_at(cmap, env, *, threshold=RANK_THRESHOLD, band_floor=RANK_BAND_FLOOR, registry=None):
    rows = []
    exact = True
    for row in cmap.jacobian():
        vals = [e.eval(env, registry) for e in row]
        exact = exact and all(isinstance(v, Fraction) for v in vals)
        rows.append(vals)
    if not exact:
        rows = [[float(x) for x in row] for row in rows]
    return _matrix_rank(rows, exact, threshold, band_floor)


def gradient_matrix_at(form, env, registry=None):
    """First partials of every coefficient: rows by coordinate, columns
    by increasing index tuple over the full C(n, k) tuple space."""
    chart = form.chart
    cols = list(combinations(range(chart.dim), form.degree))
    rows = []
    exact = True
    for coord in chart.coords:
        row = []
        for idx in cols:
            c = form.comps.get(idx)
            if c is None:
                row.append(Fraction(0))
                continue
            v = c.diff(coord).eval(env, registry)
            if not isinstance(v, Fraction):
                exact = False
            row.append(v)
        rows.append(row)
    if not exact:
        rows = [[float(x) for x in row] for row in rows]
    return rows, exact


def gradient_rank_at(form, env, *, threshold=RANK_THRESHOLD, band_floor=RANK_BAND_FLOOR, registry=None):
    rows, exact = gradient_matrix_at(form, env, registry)
    return _matrix_rank(rows, exact, threshold, band_floor)


# -- degeneracy-point test ----------------------------------------------

# Pair ordering for the 6 coordinates of a 2-form on a 4-dim kernel.
_K_PAIRS = list(combinations(range(4), 2))


def _wedge_square_gram(u, v):
    # Polarization of q(u) = (u wedge u) against the kernel orientation:
    # pairs ordered (01, 02, 03, 12, 13, 23).
    return (
        u[0] * v[5]
        + u[5] * v[0]
        - u[1] * v[4]
        - u[4] * v[1]
        + u[2] * v[3]
        + u[3] * v[2]
    )


@dataclass
class DegeneracyVerdict:
    passed: bool
    reason: str
    rank: int | None = None
    kernel_dim: int | None = None
    kernel: list = field(default_factory=list)
    d_matrix: list = field(default_factory=list)
    image_dim: int | None = None
    ker_dk_dim: int | None = None
    q_signature: tuple | None = None
    q_sign: str | None = None
    grad_kernel_consistent: bool | None = None
    exact: bool = True


def near_symplectic_at(form, env, registry=None):
    """The 4-dim-kernel transversality test at a single point.

    Pass requires: rank of the 2-form drops to dim-4 there, the
    restricted first-order matrix D_K has a 3-dimensional image, and
    the wedge-square quadratic form is semi-definite on that image.
    The kernel consistency between the form and its half-top power is
    computed and reported but does not gate the verdict.
    """
    chart = form.chart
    dim = chart.dim
    if dim % 2 or dim < 4:
        raise DomainError("degeneracy test needs an even chart dimension >= 4")
    m, exact = form_matrix_at(form, env, registry)
    if not exact:
        return DegeneracyVerdict(False, "point evaluation is not exact", exact=False)
    rank = _linalg.exact_rank(m)
    if rank == dim:
        return DegeneracyVerdict(False, "nondegenerate point", rank=rank, kernel_dim=0)
    if rank != dim - 4:
        return DegeneracyVerdict(
            False, "kernel not 4-dim", rank=rank, kernel_dim=dim - rank
        )
    kernel = _linalg.exact_kernel(m, dim)
    partials = []
    for coord in chart.coords:
        rows = [[Fraction(0)] * dim for _ in range(dim)]
        for (i, j), coeff in form.comps.items():
            v = coeff.diff(coord).eval(env, registry)
            if not isinstance(v, Fraction):
                return DegeneracyVerdict(False, "point evaluation is not exact", exact=False)
            rows[i][j] = v
            rows[j][i] = -v
        partials.append(rows)

    def pairing(w, mv, u):
        total = Fraction(0)
        for i in range(dim):
            if w[i]:
                row = mv[i]
                for j in range(dim):
                    if u[j]:
                        total += w[i] * row[j] * u[j]
        return total

    d_rows = []
    for wc in kernel:
        row = []
        for a, b in _K_PAIRS:
            total = Fraction(0)
            for v in range(dim):
                if wc[v]:
                    total += wc[v] * pairing(kernel[a], partials[v], kernel[b])
            row.append(total)
        d_rows.append(row)
    image_dim = _linalg.exact_rank(d_rows)
    verdict = DegeneracyVerdict(
        True,
        "",
        rank=rank,
        kernel_dim=4,
        kernel=kernel,
        d_matrix=d_rows,
        image_dim=image_dim,
        ker_dk_dim=4 - image_dim,
    )
    verdict.grad_kernel_consistent = _grad_kernel_consistent(form, env, registry)
    if image_dim != 3:
        verdict.passed = False
        verdict.reason = "image rank != 3"
        return verdict
    image_basis, _ = _linalg.exact_rref(d_rows, 6)
    gram = [
        [_wedge_square_gram(bi, bj) for bj in image_basis] for bi in image_basis
    ]
    pos, neg, zero = _linalg.inertia(gram)
    verdict.q_signature = (pos, neg, zero)
    if pos and neg:
        verdict.passed = False
        verdict.reason = "indefinite image"
        return verdict
    verdict.q_sign = "positive" if pos else ("negative" if neg else "zero")
    return verdict


def _grad_kernel_consistent(form, env, registry):
    # Directions that freeze the form to first order should equally
    # freeze its half-top wedge power; compared through column spans.
    half = form.chart.dim // 2
    if half - 1 < 2:
        return True
    a, a_exact = gradient_matrix_at(form, env, registry)
    b, b_exact = gradient_matrix_at(form.wedge_power(half - 1), env, registry)
    if not (a_exact and b_exact):
        return None
    return _linalg.column_span_equal(a, b)


# -- contact sweep -------------------------------------------------------


@dataclass
class ContactChartReport:
    label: str
    mode: str  # "symbolic" | "sampled"
    sign: int
    symbolic_value: str | None = None
    samples: int = 0
    n_pos: int = 0
    n_neg: int = 0
    n_zero: int = 0
    min_abs: float | None = None
    worst_point: dict | None = None
    jacobian_drops: int = 0


@dataclass
class ContactVerdict:
    passed: bool
    orientation_reversed: bool
    reason: str
    charts: list


def _constant_sign(expr):
    """Sign of an expression that is provably single-signed.

    Enumerated rule: exactly one term whose atoms are powers of pi or
    exponentials.  pi > 0 and exp(u) > 0, so the coefficient decides.
    Returns +1/-1, 0 for the zero expression, None when undecidable.
    """
    if expr.is_zero:
        return 0
    if len(expr.terms) != 1:
        return None
    mono, coeff = expr.terms[0]
    for atom, _e in mono:
        if atom[0] not in ("pi", "exp"):
            return None
    return 1 if coeff > 0 else -1


def _top_form(alpha):
    n = alpha.chart.dim
    if n % 2 == 0:
        raise DomainError("contact test needs an odd-dimensional chart")
    m = (n - 1) // 2
    return alpha.wedge(alpha.d().wedge_power(m))


def contact_test(
    alpha,
    parametrizations=(None,),
    *,
    grid_n=64,
    aux_count=8,
    seed=0,
    tol=1e-9,
    registry=None,
):
    """Sign verdict for alpha wedge (d alpha)^m, restricted per chart.

    parametrizations: iterable of ChartMap or None (None = work on
    alpha's own chart).  For parametrized charts the last two source
    coordinates sweep an equiangular grid offset by half a step (so
    grid points avoid the poles of polar charts) and the remaining
    coordinates take aux_count seeded points in [-1, 1].  Identity
    entries first try the symbolic constant-sign rule; if that is
    inconclusive they fall back to grid_n^2 seeded random points.

    Pass needs one strict sign across every sample of every chart;
    all-negative passes flagged orientation_reversed.  A parametrization
    whose Jacobian drops rank at any sample fails the whole check.
    """
    rng = random.Random(seed)
    reports = []
    for k, parm in enumerate(parametrizations):
        if parm is None:
            beta = alpha
            label = f"chart{k}:{alpha.chart.name}"
        else:
            beta = parm.pullback(alpha)
            label = f"chart{k}:{parm.name}"
        top = _top_form(beta)
        coeff = top.top_coefficient()
        sign = _constant_sign(coeff)
        if sign is not None and sign != 0:
            reports.append(
                ContactChartReport(label, "symbolic", sign, symbolic_value=str(coeff))
            )
            continue
        if sign == 0:
            reports.append(
                ContactChartReport(label, "symbolic", 0, symbolic_value="0")
            )
            continue
        reports.append(
            _sampled_chart_report(
                label, coeff, beta.chart, parm, grid_n, aux_count, rng, tol, registry
            )
        )
    signs = {r.sign for r in reports}
    drops = sum(r.jacobian_drops for r in reports)
    if drops:
        return ContactVerdict(False, False, "degenerate parametrization samples", reports)
    if signs == {1}:
        return ContactVerdict(True, False, "", reports)
    if signs == {-1}:
        return ContactVerdict(True, True, "uniform negative sign", reports)
    if any(r.n_zero for r in reports) or any(r.sign == 0 and r.mode == "symbolic" for r in reports):
        return ContactVerdict(False, False, "vanishing samples", reports)
    return ContactVerdict(False, False, "mixed signs", reports)


def _sampled_chart_report(label, coeff, chart, parm, grid_n, aux_count, rng, tol, registry):
    if parm is not None:
        aux = chart.coords[:-2]
        th, ph = chart.coords[-2], chart.coords[-1]
        env = {
            th: ((np.arange(grid_n) + 0.5) * math.pi / grid_n).reshape(1, -1, 1),
            ph: ((np.arange(grid_n) + 0.5) * 2 * math.pi / grid_n).reshape(1, 1, -1),
        }
        for c in aux:
            vals = np.array(
                [rng.randint(-(1 << 12), 1 << 12) / float(1 << 12) for _ in range(aux_count)]
            )
            env[c] = vals.reshape(-1, 1, 1)
        shape = (aux_count, grid_n, grid_n)
    else:
        n = grid_n * grid_n
        env = {
            c: np.array([rng.randint(-(1 << 12), 1 << 12) / float(1 << 12) for _ in range(n)])
            for c in chart.coords
        }
        shape = (n,)
    values = np.broadcast_to(np.asarray(compile_numpy(coeff, registry)(env), dtype=float), shape)
    report = ContactChartReport(label, "sampled", 0, samples=int(values.size))
    report.n_pos = int(np.sum(values > tol))
    report.n_neg = int(np.sum(values < -tol))
    report.n_zero = report.samples - report.n_pos - report.n_neg
    report.min_abs = float(np.min(np.abs(values)))
    worst = np.unravel_index(int(np.argmin(np.abs(values))), shape)
    report.worst_point = _env_at(env, worst, shape)
    if report.n_neg == 0 and report.n_zero == 0:
        report.sign = 1
    elif report.n_pos == 0 and report.n_zero == 0:
        report.sign = -1
    if parm is not None:
        report.jacobian_drops = _count_jacobian_drops(parm, env, shape, registry)
    return report


def _env_at(env, idx, shape):
    out = {}
    for c, arr in env.items():
        full = np.broadcast_to(np.asarray(arr, dtype=float), shape)
        out[c] = float(full[idx])
    return out


def _count_jacobian_drops(parm, env, shape, registry):
    src_dim = parm.source.dim
    entries = []
    for row in parm.jacobian():
        entries.append(
            [
                np.broadcast_to(np.asarray(compile_numpy(e, registry)(env), dtype=float), shape)
                for e in row
            ]
        )
    stacked = np.stack(
        [np.stack(row, axis=-1) for row in entries], axis=-2
    )  # (*shape, target_dim, src_dim)
    sv = np.linalg.svd(stacked, compute_uv=False)
    smax = np.maximum(sv[..., 0], 1e-300)
    smin = sv[..., src_dim - 1]
    return int(np.sum(smin <= RANK_THRESHOLD * smax))


# -- stabilizing constant ------------------------------------------------


@dataclass
class StabilizeResult:
    found: bool
    constant: Fraction | None
    tried: list
    witness: dict | None


def stabilizing_constant_search(eta, base, sample_envs, *, k_max=1 << 16, registry=None):
    """Smallest dyadic K = 2^j <= k_max making eta + K*base full rank at
    every sample.  Returns the failing sample of the last attempt when
    the budget runs out."""
    if eta.chart != base.chart or eta.degree != 2 or base.degree != 2:
        raise DomainError("stabilization needs two 2-forms on one chart")
    dim = eta.chart.dim
    tried = []
    witness = None
    k = Fraction(1)
    while k <= k_max:
        candidate = eta + base * rat(k)
        witness = None
        for env in sample_envs:
            verdict = rank_at(candidate, env, registry=registry)
            if verdict.rank != dim or verdict.undecided:
                witness = dict(env)
                break
        tried.append(k)
        if witness is None:
            return StabilizeResult(True, k, tried, None)
        k *= 2
    return StabilizeResult(False, None, tried, witness)
