"""Random-vector generation for stable laws and the interpolating family,
plus a Monte Carlo expectation engine with standard errors.

All randomness flows through a counter-based generator keyed by
(seed, stream), so batches are reproducible bit for bit regardless of
how the downstream computation is chunked or threaded.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
import numpy as np

from ._errors import DomainError, EvaluationError, RegimeError, UnsupportedFamilyError
from .levy import EULER_GAMMA, IDLaw

__all__ = [
    "SampleBatch",
    "MCEstimate",
    "make_rng",
    "sample_positive_stable",
    "sample_isotropic_stable",
    "sample_residual_law",
    "sample_stable_law",
    "mc_expectation",
    "export_csv",
]

_CHUNK = 65536


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SampleBatch:
    """n x d matrix of draws plus the metadata needed to regenerate it."""

    points: np.ndarray
    seed: int
    law: dict

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 1:
            raise DomainError("a batch holds at least one sample")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo value with standard error and sample count."""

    value: np.ndarray
    std_error: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.value, dtype=float)
        s = np.asarray(self.std_error, dtype=float)
        if np.any(s < 0.0):
            raise DomainError("standard errors are nonnegative")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "std_error", s)

    def within(self, target, n_se: float = 3.0) -> bool:
        return bool(np.all(np.abs(self.value - target) <= n_se * self.std_error))


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def _kanter(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """One-sided stable draws with Laplace transform exp(-lambda^alpha)."""
    u = rng.uniform(0.0, math.pi, n)
    e = rng.exponential(1.0, n)
    a = (
        np.sin((1.0 - alpha) * u)
        * np.sin(alpha * u) ** (alpha / (1.0 - alpha))
        / np.sin(u) ** (1.0 / (1.0 - alpha))
    )
    return (a / e) ** ((1.0 - alpha) / alpha)


def sample_positive_stable(
    alpha_prime: float, scale: float, n: int, seed: int, stream: int = 0
) -> np.ndarray:
    """i.i.d. totally skewed positive stable variables with
    E exp(-lambda X) = exp(-scale * lambda^alpha_prime)."""
    if not (0.0 < alpha_prime < 1.0):
        raise DomainError("one-sided sampling needs an index in (0, 1)")
    if scale <= 0.0:
        raise DomainError("scale must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = make_rng(seed, stream)
    return scale ** (1.0 / alpha_prime) * _kanter(alpha_prime, n, rng)


def sample_isotropic_stable(alpha: float, d: int, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """Rotationally invariant alpha-stable vectors with characteristic
    function exp(-|xi|^alpha / 2), via the subordinated-Gaussian product
    X = sqrt(A) Z with A one-sided (alpha/2)-stable of scale 2^(alpha/2-1)."""
    if not (0.0 < alpha < 2.0):
        raise DomainError("alpha must lie in (0, 2)")
    if d < 1 or n < 1:
        raise DomainError("need d >= 1 and n >= 1")
    rng = make_rng(seed, stream)
    scale = 2.0 ** (alpha / 2.0 - 1.0)
    a = scale ** (2.0 / alpha) * _kanter(alpha / 2.0, n, rng)
    z = rng.standard_normal((n, d))
    pts = np.sqrt(a)[:, None] * z
    return SampleBatch(points=pts, seed=seed, law={"family": "isotropic_stable", "alpha": alpha, "d": d})


def sample_residual_law(
    alpha: float, d: int, t: float, b0, n: int, seed: int, stream: int = 0
) -> SampleBatch:
    """Draws from the time-t member of the interpolating family: the
    point mass at 0 for t = 0, else the scaled stable vector
    (1 - e^{-alpha t})^{1/alpha} X plus the drift part (1 - e^{-t}) b0."""
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    b0 = np.zeros(d) if b0 is None else np.asarray(b0, dtype=float)
    if b0.shape != (d,):
        raise DomainError(f"b0 must have shape ({d},)")
    law = {"family": "residual_isotropic_stable", "alpha": alpha, "d": d, "t": t}
    if t == 0.0:
        return SampleBatch(points=np.zeros((n, d)), seed=seed, law=law)
    base = sample_isotropic_stable(alpha, d, n, seed, stream)
    pts = (1.0 - math.exp(-alpha * t)) ** (1.0 / alpha) * base.points
    pts = pts + (1.0 - math.exp(-t)) * b0
    return SampleBatch(points=pts, seed=seed, law=law)


def _skewed_cauchy_ray(weight: float, c: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Scalar draws whose characteristic exponent equals
    weight * c * int_0^inf (e^{i t r} - 1 - i t r 1_{r<=1}) r^{-2} dr."""
    u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, n)
    e = rng.exponential(1.0, n)
    x0 = (2.0 / math.pi) * (
        (math.pi / 2.0 + u) * np.tan(u)
        - np.log(((math.pi / 2.0) * e * np.cos(u)) / (math.pi / 2.0 + u))
    )
    sigma = weight * c * math.pi / 2.0
    mu = (2.0 / math.pi) * sigma * math.log(sigma) - weight * c * (EULER_GAMMA - 1.0)
    return sigma * x0 + mu


def sample_stable_law(law: IDLaw, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """Exact sampler for the stable laws the package can simulate.

    Supported: any dimension with the uniform sphere and the normalized
    amplitude (isotropic path); atomic spheres with alpha < 1 in the
    drift representation (sums of one-sided rays); atomic spheres with
    alpha = 1 in the triplet representation (skewed Cauchy rays).
    Everything else raises, with the reason.
    """
    kf = law.levy.kf
    if kf.family != "stable":
        raise UnsupportedFamilyError(
            f"no exact sampler for the {kf.family!r} family; only stable members are simulated"
        )
    alpha = kf.alpha
    d = law.dim
    sphere = law.levy.sphere
    desc = {"family": "stable", "alpha": alpha, "d": d, "rep": law.rep}

    # isotropic path: uniform sphere with the normalizing amplitude
    from .levy import c_alpha_d, cauchy_c

    iso_amp = cauchy_c(d) if alpha == 1.0 else c_alpha_d(alpha, d)
    n_atoms = sphere.atoms.shape[0]
    is_uniformish = sphere.is_symmetric() and n_atoms >= (2 if d == 1 else 64)
    if is_uniformish and abs(kf.c - iso_amp) <= 1e-12 * iso_amp:
        base = sample_isotropic_stable(alpha, d, n, seed, stream)
        shift = _total_shift(law)
        return SampleBatch(points=base.points + shift, seed=seed, law=desc)

    if n_atoms > 8:
        raise UnsupportedFamilyError(
            "atomic-sphere stable sampling is limited to <= 8 atoms; "
            "use the uniform sphere with the normalized amplitude instead"
        )
    rng = make_rng(seed, stream)
    pts = np.zeros((n, d))
    if alpha < 1.0:
        drift = law if law.rep == "drift_b0" else None
        if drift is None:
            from .levy import convert_representation

            drift = convert_representation(law, "drift_b0")
        g_neg = math.gamma(2.0 - alpha) / (alpha * (alpha - 1.0))  # gamma(-alpha)
        for x, w in zip(sphere.atoms, sphere.weights):
            ray_scale = -w * kf.c * g_neg  # = w c |gamma(-alpha)| > 0
            a = ray_scale ** (1.0 / alpha) * _kanter(alpha, n, rng)
            pts += a[:, None] * x
        pts += drift.shift
        return SampleBatch(points=pts, seed=seed, law=desc)
    if alpha == 1.0:
        trip = law
        if law.rep != "triplet_b":
            from .levy import convert_representation

            trip = convert_representation(law, "triplet_b")
        for x, w in zip(sphere.atoms, sphere.weights):
            y = _skewed_cauchy_ray(float(w), kf.c, n, rng)
            pts += y[:, None] * x
        pts += trip.shift
        return SampleBatch(points=pts, seed=seed, law=desc)
    raise UnsupportedFamilyError(
        "atomic-sphere sampling with alpha > 1 is not provided; "
        "use the isotropic path for the finite-mean regime"
    )


def _total_shift(law: IDLaw) -> np.ndarray:
    """Shift of the isotropic law relative to the zero-shift normalization.
    For a symmetric sphere all three representations carry the same shift."""
    if law.levy.sphere.is_symmetric():
        return law.shift
    raise UnsupportedFamilyError("isotropic sampler needs a symmetric sphere")


# ---------------------------------------------------------------------------
# Monte Carlo expectations
# ---------------------------------------------------------------------------


def mc_expectation(f, batch: SampleBatch, growth_order: float = 0.0) -> MCEstimate:
    """Sample mean and standard error of f over the batch.

    The reduction runs over fixed-size chunks in index order, so the
    result is bit-identical however the evaluation is parallelized.
    Expectations of unbounded integrands are only offered when the
    declared ``growth_order`` p (|f(x)| <= C (1 + |x|)^p) is strictly
    below the law's tail index; otherwise the moment may not exist and
    the engine refuses.
    """
    alpha = batch.law.get("alpha")
    if growth_order > 0.0 and alpha is not None and growth_order >= alpha:
        raise RegimeError(
            f"declared growth order {growth_order} is not below the tail index {alpha}; "
            "the expectation may not exist"
        )
    n = batch.n
    acc = None
    acc2 = None
    for start in range(0, n, _CHUNK):
        pts = batch.points[start : start + _CHUNK]
        vals = np.asarray(f(pts), dtype=float)
        if vals.shape[0] != pts.shape[0]:
            raise DomainError("f must return one value per sample point")
        if not np.all(np.isfinite(vals)):
            bad = start + int(np.nonzero(~np.isfinite(vals).reshape(vals.shape[0], -1).all(axis=1))[0][0])
            raise EvaluationError(f"non-finite integrand at sample index {bad}", node=bad)
        s1 = vals.sum(axis=0)
        s2 = (vals * vals).sum(axis=0)
        acc = s1 if acc is None else acc + s1
        acc2 = s2 if acc2 is None else acc2 + s2
    mean = acc / n
    var = np.maximum(acc2 / n - mean**2, 0.0)
    se = np.sqrt(var / max(n - 1, 1))
    return MCEstimate(value=mean, std_error=se, n=n)


def empirical_char_fn(batch: SampleBatch, xi) -> tuple:
    """Empirical characteristic function at xi with its (complex-mean)
    standard error sqrt(E|probe - mean|^2 / n)."""
    xi = np.asarray(xi, dtype=float)
    probe = np.exp(1j * batch.points @ xi)
    mean = complex(probe.mean())
    se = float(np.sqrt(np.mean(np.abs(probe - mean) ** 2) / batch.n))
    return mean, se


def export_csv(batch: SampleBatch, path) -> None:
    """Write the batch as CSV with header x1..xd."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(batch.dim)])
        writer.writerows(batch.points.tolist())
