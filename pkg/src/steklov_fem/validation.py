"""Oracle and invariant checks behind ``steklov-fem validate``.

Every check returns a :class:`Check` carrying the measured value, the
tolerance and the verdict; failures never raise.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .experiments import DYADIC_EPS, eigenfunction_errors, emap_point, mixed_series
from .fem import assemble_boundary_mass, assemble_stiffness, assemble_volume_mass
from .geometry import DomainSpec, ProfileSpec, area, exact_perimeter
from .mesh import MeshResolution, build_disk_mesh, build_strip_mesh, required_nx
from .oracle import disk_eigenvalue, strip_mixed_eigenvalue
from .perturb import ConnectingMapError, connecting_map, weak_l1_residual
from .steklov import minimax_check, orthogonality_gram, solve_steklov

DEFAULT_ALPHAS = (2.0, 1.0, 0.5)
TRIANGLE = ProfileSpec("triangle-wave")


@dataclass
class Check:
    name: str
    measured: float
    tolerance: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.measured = float(self.measured)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{verdict}  {self.name}: measured {self.measured:.6g}, required {self.tolerance}{extra}"

    def as_dict(self) -> dict:
        d = asdict(self)
        if isinstance(d["measured"], float) and not math.isfinite(d["measured"]):
            d["measured"] = None
        return d


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        try:
            check = fn(*args, **kwargs)
        except Exception as exc:  # a crashing check is a failing check
            check = Check(fn.__name__.removeprefix("check_"), math.nan, "no error", False, f"{type(exc).__name__}: {exc}")
        check.seconds = time.perf_counter() - t0
        return check

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def unit_strip(n: int, eps: float = 0.0, alpha: float = 1.0, profile: ProfileSpec = TRIANGLE):
    return build_strip_mesh(DomainSpec(alpha, eps, profile), MeshResolution(n, n))


def strip_error(n: int) -> float:
    """Relative error of the first mixed eigenvalue on an ``n x n`` unit-strip mesh."""
    spec = solve_steklov(unit_strip(n), "mixed", 1)
    exact = strip_mixed_eigenvalue(1)
    return abs(spec.lambdas[0] - exact) / exact


@dataclass(frozen=True)
class StripOracle:
    errors: tuple
    order: float


def strip_oracle(coarse: bool = False) -> StripOracle:
    ns = (8, 16) if coarse else (64, 128)
    e1, e2 = (strip_error(n) for n in ns)
    return StripOracle((e1, e2), math.log2(e1 / e2))


@_timed
def check_strip_oracle(coarse: bool = False) -> Check:
    """Mixed strip: 1 % at h = 1/64, 0.3 % at h = 1/128, observed order >= 1.8."""
    r = strip_oracle(coarse)
    ok = r.errors[0] < 1e-2 and r.errors[1] < 3e-3 and r.order >= 1.8
    label = "h=1/8,1/16 (coarsened)" if coarse else "h=1/64,1/128"
    return Check(
        "strip oracle", r.errors[1], "rel err < 1e-2, < 3e-3, order >= 1.8", ok,
        f"{label}: errors {r.errors[0]:.3e}, {r.errors[1]:.3e}; order {r.order:.3f}",
    )


@_timed
def check_disk_oracle(n_rings: int = 64, n_sectors: int = 256) -> Check:
    """Full Steklov on the polygonal disk: eigenvalues 1..5 within 2 % of 1, 1, 2, 2, 3."""
    spec = solve_steklov(build_disk_mesh(n_rings, n_sectors), "full", 6)
    exact = np.array([disk_eigenvalue(n) for n in range(1, 6)])
    rel = np.abs(spec.lambdas[1:6] - exact) / exact
    return Check(
        "disk oracle", float(rel.max()), "max rel err < 2e-2", bool(rel.max() < 2e-2),
        "lambda_1..5 = " + ", ".join(f"{v:.5f}" for v in spec.lambdas[1:6]),
    )


def zero_mode_meshes():
    return {
        "strip 1/16": unit_strip(16),
        "strip alpha=1 eps=1/8": unit_strip(64, 1 / 8),
        "strip alpha=2 eps=1/4": build_strip_mesh(DomainSpec(2.0, 1 / 4, TRIANGLE), MeshResolution(32, 16)),
        "disk 8x32": build_disk_mesh(8, 32),
    }


@_timed
def check_zero_mode() -> Check:
    """Full Steklov: lambda_0 <= 1e-8 with a constant eigenvector on every test mesh."""
    worst_lam = worst_std = 0.0
    for mesh in zero_mode_meshes().values():
        spec = solve_steklov(mesh, "full", 2)
        worst_lam = max(worst_lam, abs(float(spec.lambdas[0])))
        worst_std = max(worst_std, float(np.std(spec.vectors[:, 0])))
    ok = worst_lam <= 1e-8 and worst_std <= 1e-8
    return Check("zero mode", max(worst_lam, worst_std), "|lambda_0|, std(u_0) <= 1e-8", ok,
                 f"max |lambda_0| {worst_lam:.2e}, max std {worst_std:.2e}")


@_timed
def check_assembly() -> Check:
    """K 1 = 0, K symmetric, 1'M_vol 1 = area, 1'M_bnd 1 = perimeter on polygonal domains."""
    worst = 0.0
    for alpha, eps in ((1.0, 0.0), (1.0, 1 / 8), (2.0, 1 / 4), (0.5, 1 / 32)):
        dom = DomainSpec(alpha, eps, TRIANGLE)
        mesh = build_strip_mesh(dom, MeshResolution(required_nx(dom, 32), 16))
        K = assemble_stiffness(mesh)
        one = np.ones(mesh.n_vertices)
        scale = abs(K).max()
        worst = max(
            worst,
            float(np.max(np.abs(K @ one))) / scale,
            float(abs(K - K.T).max()) / scale,
            abs(one @ (assemble_volume_mass(mesh) @ one) - area(dom)) / area(dom),
            abs(one @ (assemble_boundary_mass(mesh) @ one) - exact_perimeter(dom).value) / exact_perimeter(dom).value,
        )
    return Check("assembly identities", worst, "<= 1e-12 (relative)", worst <= 1e-12)


def jacobian_certificates(alphas=DEFAULT_ALPHAS, eps_list=DYADIC_EPS, k_hat: float = 8.0):
    """Certificates for every cell of the grid; cells whose blend layer leaves the strip map to None."""
    out = {}
    for a in alphas:
        for e in eps_list:
            try:
                out[(a, e)] = connecting_map(DomainSpec(a, e, TRIANGLE), k_hat).certificate
            except ConnectingMapError:
                out[(a, e)] = None
    return out


@_timed
def check_jacobian() -> Check:
    """Sampled 1 - dh/dx2 in (0.75, 1] for k_hat = 8 on every admissible default cell."""
    certs = jacobian_certificates()
    valid = {k: c for k, c in certs.items() if c is not None}
    lo = min(c.min for c in valid.values())
    hi = max(c.max for c in valid.values())
    skipped = [k for k, c in certs.items() if c is None]
    detail = f"range [{lo:.4f}, {hi:.4f}] over {len(valid)} cells"
    if skipped:
        detail += "; blend layer reaches the bottom for " + ", ".join(f"(alpha={a:g}, eps=1/{round(1 / e)})" for a, e in skipped)
    return Check("Jacobian certificate", lo, "in (0.75, 1]", bool(lo > 0.75 and hi <= 1.0), detail)


@_timed
def check_minimax_orthogonality() -> Check:
    """Gram off-diagonals < 1e-8 and minimax_check(n) = lambda_n for n <= 4 on the strip."""
    worst_gram = worst_mm = 0.0
    for mode in ("mixed", "full"):
        spec = solve_steklov(unit_strip(32), mode, 5)
        g = orthogonality_gram(spec)
        worst_gram = max(worst_gram, g.boundary_offdiag, g.stiffness_offdiag)
        for n in range(5):
            lam = spec.lambdas[n]
            worst_mm = max(worst_mm, abs(minimax_check(spec, n=n) - lam) / max(abs(lam), 1.0))
    ok = worst_gram < 1e-8 and worst_mm < 1e-8
    return Check("orthogonality and minimax", max(worst_gram, worst_mm), "< 1e-8", ok,
                 f"Gram off-diagonal {worst_gram:.2e}, minimax {worst_mm:.2e}")


def path_meshes():
    return {
        ("strip 1/16", "mixed"): unit_strip(16),
        ("strip 1/16", "full"): unit_strip(16),
        ("strip alpha=1 eps=1/8", "mixed"): unit_strip(64, 1 / 8),
        ("strip alpha=1/2 eps=1/4", "weighted"): build_strip_mesh(DomainSpec(0.5, 1 / 4, TRIANGLE), MeshResolution(32, 16)),
        ("disk 8x32", "full"): build_disk_mesh(8, 32),
    }


@_timed
def check_path_equivalence() -> Check:
    """Resolvent and dense DtN paths agree to 1e-8 relative (<= 2000 boundary dofs)."""
    worst = 0.0
    for (_, mode), mesh in path_meshes().items():
        a = solve_steklov(mesh, mode, 4, weight=math.sqrt(2.0), tol=1e-10)
        b = solve_steklov(mesh, mode, 4, weight=math.sqrt(2.0), method="dtn")
        worst = max(worst, float(np.max(np.abs(a.lambdas - b.lambdas) / np.maximum(np.abs(b.lambdas), 1.0))))
    return Check("solver path equivalence", worst, "< 1e-8 relative", worst < 1e-8)


def _strictly_decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) < 0))


@_timed
def check_stability() -> Check:
    s = mixed_series(2.0)
    gaps = np.abs(s.mu[:, 0] - s.mu0[0])
    rel = gaps[-1] / s.mu0[0]
    return Check("trichotomy alpha=2", rel, "gaps decreasing, < 2e-2 at eps=1/32",
                 _strictly_decreasing(gaps) and rel < 2e-2, "gaps " + ", ".join(f"{g:.3e}" for g in gaps))


@_timed
def check_weighted_limit() -> Check:
    s = mixed_series(1.0)
    target = s.mu0[0] / s.c_b
    ratio = s.mu[-1, 0] / target
    gaps = np.abs(s.mu[:, 0] - target)
    ok = 0.97 <= ratio <= 1.03 and _strictly_decreasing(gaps)
    return Check("trichotomy alpha=1", ratio, "ratio in [0.97, 1.03], gaps decreasing", ok,
                 "ratios " + ", ".join(f"{m / target:.4f}" for m in s.mu[:, 0]))


@_timed
def check_degeneration() -> Check:
    s = mixed_series(0.5)
    mu = s.mu[:, 0]
    frac = mu[-1] / s.mu0[0]
    return Check("trichotomy alpha=1/2", frac, "strictly decreasing, mu/mu0 < 0.5 at eps=1/32",
                 _strictly_decreasing(mu) and frac < 0.5, "mu/mu0 " + ", ".join(f"{m / s.mu0[0]:.4f}" for m in mu))


def emap_series(alpha: float, eps_list=DYADIC_EPS):
    """EmapRecords for the admissible eps of ``eps_list`` (blend layer inside the strip)."""
    out = []
    for e in eps_list:
        try:
            out.append(emap_point(DomainSpec(alpha, e, TRIANGLE)))
        except ConnectingMapError:
            continue
    return out


@_timed
def check_emap() -> Check:
    worst = 0.0
    details = []
    ok = True
    for alpha in (2.0, 1.0):
        recs = emap_series(alpha)
        gaps = [r.rel_gap for r in recs]
        ok &= len(recs) >= 2 and _strictly_decreasing(gaps) and gaps[-1] < 1e-2
        worst = max(worst, gaps[-1])
        details.append(f"alpha={alpha:g}: " + ", ".join(f"{g:.2e}" for g in gaps))
    return Check("connecting-system norms", worst, "decreasing, < 1e-2 at eps=1/32", ok, "; ".join(details))


@_timed
def check_geometry() -> Check:
    p2 = [exact_perimeter(DomainSpec(2.0, e, TRIANGLE)).value for e in DYADIC_EPS]
    gaps = np.array(p2) - 4.0
    halving = bool(np.all(gaps[1:] <= 0.5 * gaps[:-1]) and np.all(gaps > 0))
    p1 = [exact_perimeter(DomainSpec(1.0, e, TRIANGLE)).value for e in DYADIC_EPS]
    dev = max(abs(p - (3.0 + math.sqrt(2.0))) for p in p1)
    res = [weak_l1_residual(DomainSpec(1.0, e, TRIANGLE), lambda x: x, math.sqrt(2.0)) for e in DYADIC_EPS]
    res_ok = all(b <= 0.5 * a for a, b in zip(res, res[1:]))
    ok = halving and dev <= 1e-12 and res_ok
    return Check("geometry witness", dev, "alpha=2 gap halves, alpha=1 perimeter exact to 1e-12, residual halves", ok,
                 "alpha=2 gaps " + ", ".join(f"{g:.3e}" for g in gaps) + "; residuals " + ", ".join(f"{r:.1e}" for r in res))


@_timed
def check_eigenfunctions() -> Check:
    err = eigenfunction_errors(2.0)
    return Check("eigenfunction convergence alpha=2", float(err[-1]), "H1 errors strictly decreasing",
                 _strictly_decreasing(err), ", ".join(f"{e:.3e}" for e in err))


def run_validate(strict: bool = False, coarse_oracle: bool = False) -> list[Check]:
    checks = [
        check_strip_oracle(coarse_oracle),
        check_disk_oracle(),
        check_zero_mode(),
        check_assembly(),
        check_jacobian(),
        check_minimax_orthogonality(),
        check_path_equivalence(),
    ]
    if strict:
        checks += [
            check_stability(),
            check_weighted_limit(),
            check_degeneration(),
            check_emap(),
            check_geometry(),
            check_eigenfunctions(),
        ]
    return checks
