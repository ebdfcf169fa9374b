"""Randomized stress lab for the space-time norm inequalities.

Each check draws an ensemble of reproducible random samples, evaluates both
sides of one inequality with its unknown constant stripped, and reports the
worst LHS/RHS ratio together with the seed that produced it.  A bounded,
ensemble-stable max ratio is evidence that the inequality holds with a finite
constant at this resolution; it proves nothing.  Constants are recorded,
never asserted.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .diagnostics import TrajectoryRecord
from .evolution import (
    CoupledState,
    SolverConfig,
    dispersive_phase,
    reflect_state,
    simulate,
)
from .spaces import (
    CutoffProfile,
    NormParams,
    SpaceTimeSample,
    apply_dispersive_smoothing,
    apply_spatial_weight,
    bourgain_norm,
    gevrey_norm,
    gevrey_norm_slices,
    mixed_norm,
    sobolev_norm,
    weighted_l2_2d,
    xt_transform,
)
from .spectral import (
    Field,
    SpectralField,
    SpectralGrid,
    complex_samples,
    dealiased_product,
    dft_axis,
    forward_transform,
    idft_axis,
)

__all__ = [
    "ENVELOPES",
    "STRICHARTZ_VARIANTS",
    "EstimateReport",
    "SampleSpec",
    "StrichartzVariant",
    "bidirectional_record",
    "check_apriori",
    "check_apriori_ensemble",
    "check_duhamel",
    "check_embedding",
    "check_exponential_lemmas",
    "check_linear_free",
    "check_multilinear",
    "check_strichartz",
    "check_time_cutoff",
    "derivative_sample",
    "duhamel_ratio",
    "free_wave_sample",
    "linear_free_ratio",
    "multilinear_ratio",
    "product_sample",
    "random_boxed_sample",
    "random_field",
    "random_window_sample",
    "strichartz_ratio",
    "time_cutoff_ratio",
]

ENVELOPES = ("flat", "gaussian", "exponential")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class SampleSpec:
    """Recipe for one reproducible family of random samples.

    The envelope shapes the standard deviation of the complex Gaussian
    coefficients inside |zeta| <= bandwidth; outside they are zero.  Time
    profiles are white per node and then multiplied by the smooth cutoff
    psi(t / window_scale), so every generated sample vanishes identically
    for |t| >= 2 * window_scale.
    """

    seed: int
    bandwidth: float = 4.0
    envelope: str = "exponential"
    rho0: float = 0.5
    window_scale: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.envelope not in ENVELOPES:
            raise ValueError(f"envelope must be one of {ENVELOPES}, got {self.envelope!r}")
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0.0):
            raise ValueError(f"bandwidth must be positive and finite, got {self.bandwidth}")
        if not (np.isfinite(self.rho0) and self.rho0 >= 0.0):
            raise ValueError(f"rho0 must be >= 0, got {self.rho0}")
        if not (np.isfinite(self.window_scale) and self.window_scale > 0.0):
            raise ValueError(f"window_scale must be positive, got {self.window_scale}")
        if not (np.isfinite(self.amplitude) and self.amplitude > 0.0):
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")


@dataclass(frozen=True)
class EstimateReport:
    """Worst observed LHS/RHS ratio of one inequality over an ensemble.

    ratios holds the per-member values in seed order, so a longer run's
    prefix reproduces a shorter run bit-exactly (members are independent).
    max_seed regenerates the extremizing sample; -1 means the input was a
    trajectory, not a seeded sample.
    """

    estimate_id: str
    ensemble: int
    params: dict
    max_ratio: float
    max_seed: int
    violation: bool
    ratios: tuple = ()
    extra: dict = dc_field(default_factory=dict)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["ratios"] = list(self.ratios)
        return out


def _fold(
    estimate_id: str,
    seeds: Sequence[int],
    ratios: Sequence[float],
    params: dict,
    extra: dict | None = None,
) -> EstimateReport:
    ratios = [float(r) for r in ratios]
    _require(len(ratios) >= 1, f"{estimate_id}: empty ensemble")
    arr = np.asarray(ratios)
    bad = not (np.all(np.isfinite(arr)) and np.all(arr >= 0.0))
    imax = int(np.nanargmax(arr)) if np.any(np.isfinite(arr)) else 0
    return EstimateReport(
        estimate_id=estimate_id,
        ensemble=len(ratios),
        params=dict(params),
        max_ratio=float(arr[imax]),
        max_seed=int(seeds[imax]),
        violation=bool(bad),
        ratios=tuple(ratios),
        extra=dict(extra or {}),
    )


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ZeroDivisionError(f"nonzero numerator {num} against zero denominator")
    return float(num) / float(den)


def _default_grid() -> SpectralGrid:
    return SpectralGrid(10.0, 64)


# ---------------------------------------------------------------------------
# Sample generators.  Reality comes from taking the real part of the inverse
# transform of unconstrained complex Gaussians, which is distributionally the
# same as symmetrizing the coefficients and keeps the draw order trivial.


def _envelope_weights(grid: SpectralGrid, spec: SampleSpec) -> np.ndarray:
    cut = (2.0 / 3.0) * grid.zeta_max
    _require(
        spec.bandwidth <= cut,
        f"bandwidth {spec.bandwidth} exceeds the dealias cutoff {cut:.4g} of this grid",
    )
    az = np.abs(grid.zeta)
    if spec.envelope == "flat":
        w = np.ones_like(az)
    elif spec.envelope == "gaussian":
        # band edge sits at two standard deviations
        w = np.exp(-((2.0 * az / spec.bandwidth) ** 2) / 2.0)
    else:
        w = np.exp(-spec.rho0 * az)
    w = np.where(az <= spec.bandwidth, w, 0.0)
    w[grid.nyquist_index] = 0.0
    return spec.amplitude * w


def random_field(grid: SpectralGrid, spec: SampleSpec, seed: int | None = None) -> Field:
    """Envelope-shaped random real field; seed defaults to spec.seed."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    n = grid.num_points
    c = _envelope_weights(grid, spec) * (
        rng.standard_normal(n) + 1j * rng.standard_normal(n)
    )
    return Field(grid, complex_samples(SpectralField(grid, c)).real)


def _random_rows(
    grid: SpectralGrid, spec: SampleSpec, num_times: int, seed: int | None
) -> np.ndarray:
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    shape = (num_times, grid.num_points)
    c = _envelope_weights(grid, spec)[None, :] * (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    )
    return idft_axis(c, 2.0 * grid.half_length, -grid.half_length, axis=1).real


def random_window_sample(
    grid: SpectralGrid,
    spec: SampleSpec,
    num_times: int = 64,
    seed: int | None = None,
    half_span: float | None = None,
) -> SpaceTimeSample:
    """Random real sample, white in time, cut off by psi(t / window_scale).

    The window is [-half_span, half_span); the default 2.5 * window_scale
    leaves the edge rows exactly zero, which the space-time norms require.
    """
    span = 2.5 * spec.window_scale if half_span is None else float(half_span)
    _require(
        span >= 2.5 * spec.window_scale,
        f"half_span {span} leaves no slack around the cutoff support "
        f"[-{2 * spec.window_scale}, {2 * spec.window_scale}]",
    )
    vals = _random_rows(grid, spec, num_times, seed)
    times = -span + (2.0 * span / num_times) * np.arange(num_times)
    vals *= np.asarray(CutoffProfile(spec.window_scale)(times))[:, None]
    return SpaceTimeSample(grid, -span, span, vals)


def random_boxed_sample(
    grid: SpectralGrid,
    spec: SampleSpec,
    num_times: int = 64,
    half_span: float = 2.5,
    seed: int | None = None,
) -> SpaceTimeSample:
    """Random real sample with no time cutoff (for the mixed-norm checks,
    which have no support precondition)."""
    vals = _random_rows(grid, spec, num_times, seed)
    return SpaceTimeSample(grid, -half_span, half_span, vals)


# ---------------------------------------------------------------------------
# Per-sample ratios.  The check_* drivers below only fold these over seeds;
# tests aim oracles at the ratios directly.


def free_wave_sample(
    u0: Field, num_times: int = 64, half_span: float = 2.5
) -> SpaceTimeSample:
    """Free evolution of u0 sampled on [-half_span, half_span); each mode
    carries its exact phase e^{i zeta^3 t}, no time stepping involved."""
    g = u0.grid
    c0 = forward_transform(u0).coeffs
    times = -half_span + (2.0 * half_span / num_times) * np.arange(num_times)
    rows = np.exp(1j * np.outer(times, g.zeta**3))
    rows[:, g.nyquist_index] = 1.0
    vals = idft_axis(rows * c0[None, :], 2.0 * g.half_length, -g.half_length, axis=1).real
    return SpaceTimeSample(g, -half_span, half_span, vals)


def linear_free_ratio(
    u0: Field,
    params: NormParams,
    T: float,
    num_times: int = 64,
    half_span: float = 2.5,
) -> float:
    """Windowed free wave in the dispersive norm against sqrt(T) times the
    exponential norm of the data.  The cutoff is the unscaled psi, so T only
    enters the denominator."""
    _require(params.b > 0.5, f"need b > 1/2, got {params.b}")
    _require(T >= 1.0, f"need T >= 1, got {T}")
    _require(half_span >= 2.5, f"half_span {half_span} too small for the cutoff support")
    sample = free_wave_sample(u0, num_times, half_span)
    lhs = bourgain_norm(sample, params, CutoffProfile(1.0))
    return _ratio(lhs, np.sqrt(T) * gevrey_norm(u0, params))


def time_cutoff_ratio(sample: SpaceTimeSample, params: NormParams, T: float) -> float:
    """Dispersive norm of psi_T times the sample against the norm of the
    sample itself."""
    _require(params.b > 0.5, f"need b > 1/2, got {params.b}")
    _require(T >= 1.0, f"need T >= 1, got {T}")
    lhs = bourgain_norm(sample, params, CutoffProfile(T))
    return _ratio(lhs, bourgain_norm(sample, params, None))


def _duhamel_rows(coeffs: np.ndarray, grid: SpectralGrid, dt: float, j0: int) -> np.ndarray:
    """Trapezoid accumulation of int_0^t e^{i zeta^3 (t-s)} w(s) ds per mode,
    marching forward and backward from the t=0 row."""
    phase = dispersive_phase(grid, dt)
    back = np.conj(phase)
    out = np.zeros_like(coeffs)
    for j in range(j0 + 1, coeffs.shape[0]):
        out[j] = phase * out[j - 1] + 0.5 * dt * (phase * coeffs[j - 1] + coeffs[j])
    for j in range(j0 - 1, -1, -1):
        out[j] = back * out[j + 1] - 0.5 * dt * (coeffs[j] + back * coeffs[j + 1])
    return out


def duhamel_ratio(
    sample: SpaceTimeSample, params: NormParams, b_prime: float, T: float
) -> float:
    """Windowed Duhamel integral of the sample, measured with exponent b,
    against T times the sample measured with the weaker exponent b'."""
    _require(params.b > 0.5, f"need b > 1/2, got {params.b}")
    _require(params.b - 1.0 < b_prime < 0.0, f"need b - 1 < b' < 0, got b'={b_prime}")
    _require(T >= 1.0, f"need T >= 1, got {T}")
    _require(
        -sample.t0 >= 2.0 * T and sample.t1 >= 2.0 * T,
        f"window [{sample.t0}, {sample.t1}) does not contain the cutoff "
        f"support [-{2 * T}, {2 * T}]",
    )
    g = sample.grid
    times = sample.times
    j0 = int(np.argmin(np.abs(times)))
    _require(abs(times[j0]) <= 1e-9 * sample.dt, "time grid must contain t = 0")
    cw = dft_axis(sample.values, 2.0 * g.half_length, -g.half_length, axis=1)
    integral = _duhamel_rows(cw, g, sample.dt, j0)
    vals = idft_axis(integral, 2.0 * g.half_length, -g.half_length, axis=1)
    if np.isrealobj(sample.values):
        vals = vals.real
    vals = vals * np.asarray(CutoffProfile(T)(times))[:, None]
    lhs = bourgain_norm(SpaceTimeSample(g, sample.t0, sample.t1, vals), params, None)
    weak = NormParams(params.rho, params.s, b_prime)
    return _ratio(lhs, T * bourgain_norm(sample, weak, None))


@dataclass(frozen=True)
class StrichartzVariant:
    """One mixed-norm bound: spatial weight power (None means -s, the
    maximal-function family), outer/inner exponents, and its validity floor."""

    weight_power: float | None
    p_exp: float
    q_exp: float
    kappa_floor: float
    s_rule: str  # none | 3kappa | quarter | half


STRICHARTZ_VARIANTS = {
    "smooth_l4x_l2t": StrichartzVariant(0.5, 4.0, 2.0, 0.25, "none"),
    "smooth_linfx_l2t": StrichartzVariant(1.0, np.inf, 2.0, 0.25, "none"),
    "maximal_l2x_linft": StrichartzVariant(None, 2.0, np.inf, 0.5, "3kappa"),
    "maximal_l4x_linft": StrichartzVariant(None, 4.0, np.inf, 0.5, "quarter"),
    "maximal_linfx_linft": StrichartzVariant(None, np.inf, np.inf, 0.5, "half"),
}

_S_FLOORS = {
    "none": lambda kappa: None,
    "3kappa": lambda kappa: 3.0 * kappa,
    "quarter": lambda kappa: 0.25,
    "half": lambda kappa: 0.5,
}


def _strichartz_variant(variant: str, kappa: float, s: float) -> StrichartzVariant:
    try:
        v = STRICHARTZ_VARIANTS[variant]
    except KeyError:
        raise ValueError(
            f"unknown variant {variant!r}; choose from {sorted(STRICHARTZ_VARIANTS)}"
        ) from None
    _require(kappa > v.kappa_floor, f"{variant} needs kappa > {v.kappa_floor}, got {kappa}")
    floor = _S_FLOORS[v.s_rule](kappa)
    if floor is not None:
        _require(s > floor, f"{variant} needs s > {floor:.4g}, got {s}")
    return v


def strichartz_ratio(
    sample: SpaceTimeSample, variant: str, kappa: float = 0.55, s: float = 2.0
) -> float:
    """Mixed norm of the weighted, dispersively smoothed sample against the
    plain L^2 size of its space-time spectrum."""
    v = _strichartz_variant(variant, kappa, s)
    power = -s if v.weight_power is None else v.weight_power
    smoothed = apply_spatial_weight(apply_dispersive_smoothing(sample, kappa), power)
    lhs = mixed_norm(smoothed, v.p_exp, v.q_exp)
    rhs = weighted_l2_2d(
        xt_transform(sample),
        sample.grid,
        sample.eta,
        sample.t1 - sample.t0,
        NormParams(0.0, 0.0, 0.0),
    )
    return _ratio(lhs, rhs)


def product_sample(samples: Sequence[SpaceTimeSample]) -> SpaceTimeSample:
    """Row-by-row dealiased pointwise product of samples sharing both grids."""
    _require(len(samples) >= 1, "product_sample: need at least one factor")
    base = samples[0]
    for s in samples[1:]:
        same = (
            s.grid == base.grid
            and s.num_times == base.num_times
            and s.t0 == base.t0
            and s.t1 == base.t1
        )
        _require(same, "product_sample: samples must share grid and time window")
        _require(np.isrealobj(s.values), "product_sample: factors must be real")
    _require(np.isrealobj(base.values), "product_sample: factors must be real")
    rows = np.empty_like(base.values)
    for j in range(base.num_times):
        fields = [Field(base.grid, s.values[j]) for s in samples]
        rows[j] = dealiased_product(fields).samples
    return SpaceTimeSample(base.grid, base.t0, base.t1, rows)


def derivative_sample(sample: SpaceTimeSample) -> SpaceTimeSample:
    """Spatial derivative, one multiplier pass over all time rows."""
    g = sample.grid
    cx = dft_axis(sample.values, 2.0 * g.half_length, -g.half_length, axis=1)
    cx = cx * (1j * g.zeta)[None, :]
    cx[:, g.nyquist_index] = 0.0
    vals = idft_axis(cx, 2.0 * g.half_length, -g.half_length, axis=1)
    if np.isrealobj(sample.values):
        vals = vals.real
    return SpaceTimeSample(g, sample.t0, sample.t1, vals)


def multilinear_ratio(
    factors: Sequence[SpaceTimeSample], params: NormParams, b_prime: float
) -> float:
    """Derivative of the dealiased product in the b' norm against the product
    of the factors' b norms."""
    _require(params.b > 0.5, f"need b > 1/2, got {params.b}")
    _require(b_prime < -0.25, f"need b' < -1/4, got {b_prime}")
    _require(b_prime >= -1.0, f"need b' >= -1, got {b_prime}")
    _require(params.s >= 3.0 * params.b, f"need s >= 3b = {3 * params.b:.4g}, got {params.s}")
    lhs = bourgain_norm(
        derivative_sample(product_sample(factors)),
        NormParams(params.rho, params.s, b_prime),
        None,
    )
    rhs = 1.0
    for f in factors:
        rhs *= bourgain_norm(f, params, None)
    return _ratio(lhs, rhs)


# ---------------------------------------------------------------------------
# Ensemble drivers.  Member i always uses seed spec.seed + i, so ensembles
# nest: a longer run's ratios start with the shorter run's, bit for bit.


def _base_params(
    spec: SampleSpec, params: NormParams | None, grid: SpectralGrid, num_times: int
) -> dict:
    out = {
        "master_seed": spec.seed,
        "bandwidth": spec.bandwidth,
        "envelope": spec.envelope,
        "rho0": spec.rho0,
        "window_scale": spec.window_scale,
        "amplitude": spec.amplitude,
        "half_length": grid.half_length,
        "num_points": grid.num_points,
        "num_times": num_times,
    }
    if params is not None:
        out.update({"rho": params.rho, "s": params.s, "b": params.b})
    return out


def check_linear_free(
    spec: SampleSpec,
    params: NormParams,
    T: float,
    grid: SpectralGrid | None = None,
    num_times: int = 64,
    ensemble: int = 50,
) -> EstimateReport:
    """Windowed free waves from random data: dispersive norm against
    sqrt(T) times the data norm."""
    g = _default_grid() if grid is None else grid
    seeds = [spec.seed + i for i in range(ensemble)]
    ratios = [
        linear_free_ratio(random_field(g, spec, sd), params, T, num_times)
        for sd in seeds
    ]
    info = _base_params(spec, params, g, num_times)
    info["T"] = T
    return _fold("linear_free", seeds, ratios, info)


def check_time_cutoff(
    spec: SampleSpec,
    params: NormParams,
    T: float,
    grid: SpectralGrid | None = None,
    num_times: int = 64,
    ensemble: int = 50,
) -> EstimateReport:
    """Stability of the dispersive norm under multiplication by psi_T."""
    g = _default_grid() if grid is None else grid
    seeds = [spec.seed + i for i in range(ensemble)]
    ratios = [
        time_cutoff_ratio(random_window_sample(g, spec, num_times, sd), params, T)
        for sd in seeds
    ]
    info = _base_params(spec, params, g, num_times)
    info["T"] = T
    return _fold("time_cutoff", seeds, ratios, info)


def check_duhamel(
    spec: SampleSpec,
    params: NormParams,
    T: float,
    b_prime: float = -0.3,
    grid: SpectralGrid | None = None,
    num_times: int = 64,
    ensemble: int = 50,
) -> EstimateReport:
    """Windowed Duhamel integral against T times the forcing in the b' norm."""
    g = _default_grid() if grid is None else grid
    span = 2.5 * max(T, spec.window_scale)
    seeds = [spec.seed + i for i in range(ensemble)]
    ratios = [
        duhamel_ratio(
            random_window_sample(g, spec, num_times, sd, half_span=span),
            params,
            b_prime,
            T,
        )
        for sd in seeds
    ]
    info = _base_params(spec, params, g, num_times)
    info.update({"T": T, "b_prime": b_prime, "half_span": span})
    return _fold("duhamel", seeds, ratios, info)


def check_strichartz(
    variant: str,
    spec: SampleSpec,
    kappa: float = 0.55,
    s: float = 2.0,
    grid: SpectralGrid | None = None,
    num_times: int = 64,
    half_span: float = 2.5,
    ensemble: int = 50,
) -> EstimateReport:
    """One mixed-norm bound over an ensemble of boxed random samples."""
    _strichartz_variant(variant, kappa, s)  # fail fast before sampling
    g = _default_grid() if grid is None else grid
    seeds = [spec.seed + i for i in range(ensemble)]
    ratios = [
        strichartz_ratio(
            random_boxed_sample(g, spec, num_times, half_span, sd), variant, kappa, s
        )
        for sd in seeds
    ]
    info = _base_params(spec, None, g, num_times)
    info.update({"variant": variant, "kappa": kappa, "s": s, "half_span": half_span})
    return _fold(f"strichartz:{variant}", seeds, ratios, info)


def check_multilinear(
    p: int,
    params: NormParams,
    spec: SampleSpec,
    b_prime: float = -0.3,
    grid: SpectralGrid | None = None,
    num_times: int = 48,
    ensemble: int = 50,
) -> EstimateReport:
    """Product estimate with 2p+1 random factors.

    Both factor-count splits (p of one component with p+1 of the other, and
    the mirror) are the same product up to relabeling, but each still gets
    its own draws; the per-member ratio is the worse of the two.  Member i
    derives its factor seeds from spec.seed + i as base * 1009 + k, with the
    mirror offset by 500000.
    """
    _require(isinstance(p, (int, np.integer)) and p >= 1, f"p must be a positive int, got {p}")
    g = _default_grid() if grid is None else grid
    count = 2 * p + 1
    seeds = [spec.seed + i for i in range(ensemble)]
    ratios = []
    first, second = [], []
    for sd in seeds:
        split_ratios = []
        for offset in (0, 500000):
            factors = [
                random_window_sample(g, spec, num_times, sd * 1009 + offset + k)
                for k in range(count)
            ]
            split_ratios.append(multilinear_ratio(factors, params, b_prime))
        first.append(split_ratios[0])
        second.append(split_ratios[1])
        ratios.append(max(split_ratios))
    info = _base_params(spec, params, g, num_times)
    info.update({"p": p, "b_prime": b_prime})
    extra = {
        "max_ratio_first_split": float(np.max(first)),
        "max_ratio_mirror_split": float(np.max(second)),
    }
    return _fold(f"multilinear:p={p}", seeds, ratios, info, extra)


def check_embedding(
    spec: SampleSpec,
    params: NormParams,
    grid: SpectralGrid | None = None,
    num_times: int = 64,
    ensemble: int = 50,
) -> EstimateReport:
    """Sup over time of the per-slice exponential norm against the dispersive
    norm; the b > 1/2 embedding constant, observed empirically."""
    _require(params.b > 0.5, f"need b > 1/2, got {params.b}")
    g = _default_grid() if grid is None else grid
    seeds = [spec.seed + i for i in range(ensemble)]
    ratios = []
    for sd in seeds:
        w = random_window_sample(g, spec, num_times, sd)
        ratios.append(
            _ratio(float(np.max(gevrey_norm_slices(w, params))), bourgain_norm(w, params, None))
        )
    return _fold("embedding", seeds, ratios, _base_params(spec, params, g, num_times))


# ---------------------------------------------------------------------------
# Scalar inequalities used by the nonlinear machinery; exact, so any failure
# on any grid point is a bug, not noise.


def check_exponential_lemmas(
    rhos: np.ndarray | None = None,
    zetas: np.ndarray | None = None,
    z1s: np.ndarray | None = None,
    z2s: np.ndarray | None = None,
) -> dict:
    """Sweep e^{rho(1+|z|)} <= e + sqrt(rho) e^{rho(1+|z|)} sqrt(1+|z|) and
    the three-factor triangle split over a dense parameter grid."""
    from . import _kernels

    rhos = np.linspace(0.0, 2.0, 41) if rhos is None else np.asarray(rhos, dtype=np.float64)
    zetas = np.linspace(0.0, 100.0, 201) if zetas is None else np.asarray(zetas, dtype=np.float64)
    z1s = np.linspace(-100.0, 100.0, 41) if z1s is None else np.asarray(z1s, dtype=np.float64)
    z2s = np.linspace(-100.0, 100.0, 41) if z2s is None else np.asarray(z2s, dtype=np.float64)
    _require(bool(np.all(rhos >= 0.0)), "rho grid must be nonnegative")

    az = 1.0 + np.abs(zetas)[None, :]
    lhs = np.exp(rhos[:, None] * az)
    rhs = np.e + np.sqrt(rhos)[:, None] * lhs * np.sqrt(az)
    pointwise_failures = int(np.count_nonzero(lhs > rhs))

    triangle_failures = int(_kernels.triangle_split_failures(rhos, zetas, z1s, z2s))
    return {
        "pointwise_checked": int(lhs.size),
        "pointwise_failures": pointwise_failures,
        "triangle_checked": int(rhos.size * zetas.size * z1s.size * z2s.size),
        "triangle_failures": triangle_failures,
        "passed": pointwise_failures == 0 and triangle_failures == 0,
    }


# ---------------------------------------------------------------------------
# Windowed-trajectory bound.  The symmetric cutoff needs the solution on
# [-2T, 2T]; bidirectional_record builds that from data at t=0 using the
# (t, x) -> (-t, -x) symmetry, so no negative time steps are taken.


def bidirectional_record(
    initial: CoupledState, config: SolverConfig, t_half: float
) -> TrajectoryRecord:
    """Trajectory on [t0 - t_half, t0 + t_half] with uniform record times."""
    _require(t_half > 0.0, f"t_half must be positive, got {t_half}")
    cfg = dataclasses.replace(config, t_end=initial.t + t_half)
    fwd = simulate(initial, cfg)
    back = simulate(reflect_state(initial), cfg)
    rp = NormParams(config.record_rho, config.record_s, 0.0)
    merged = TrajectoryRecord(initial.grid, config.p)
    for i in range(len(back) - 1, 0, -1):  # skip the duplicate t = t0 entry
        u, v = back.fields_at(i)
        st = reflect_state(CoupledState(0.0, u, v))
        merged.record(2.0 * initial.t - back.times[i], st.u, st.v, rp)
    for i in range(len(fwd)):
        u, v = fwd.fields_at(i)
        merged.record(fwd.times[i], u, v, rp)
    return merged


def _windowed_pair_sample(
    record: TrajectoryRecord, T: float
) -> tuple[SpaceTimeSample, SpaceTimeSample]:
    times = np.asarray(record.times)
    _require(len(record) >= 5, f"need at least 5 record times, got {len(record)}")
    steps = np.diff(times)
    h = float(steps[0])
    _require(
        h > 0.0 and bool(np.all(np.abs(steps - h) <= 1e-9 * h)),
        "record times must be uniform and increasing",
    )
    tol = 0.5 * h
    _require(
        times[0] <= -2.0 * T + tol and times[-1] >= 2.0 * T - tol,
        f"trajectory spans [{times[0]:.4g}, {times[-1]:.4g}] but the cutoff "
        f"needs [-2T, 2T] = [{-2 * T}, {2 * T}]; extend backward by reflection",
    )
    keep = np.abs(times) <= 2.0 * T + tol
    psi = np.asarray(CutoffProfile(T)(times[keep]))
    u_rows = psi[:, None] * np.asarray([record.snapshots_u[i] for i in np.flatnonzero(keep)])
    v_rows = psi[:, None] * np.asarray([record.snapshots_v[i] for i in np.flatnonzero(keep)])
    # pad with exact zeros past the cutoff support; keeps spacing uniform and
    # makes the edge rows vanish as the transform requires
    n_pad = max(1, int(np.ceil(0.5 * T / h)))
    n_right = n_pad + (u_rows.shape[0] + 2 * n_pad) % 2
    zeros_l = np.zeros((n_pad, u_rows.shape[1]))
    zeros_r = np.zeros((n_right, u_rows.shape[1]))
    u_all = np.concatenate([zeros_l, u_rows, zeros_r])
    v_all = np.concatenate([zeros_l, v_rows, zeros_r])
    t0 = float(times[keep][0]) - n_pad * h
    t1 = t0 + u_all.shape[0] * h
    g = record.grid
    return SpaceTimeSample(g, t0, t1, u_all), SpaceTimeSample(g, t0, t1, v_all)


def _pair_sup(record: TrajectoryRecord, T: float, params: NormParams) -> float:
    sup = 0.0
    for i, t in enumerate(record.times):
        if -1e-9 <= t <= 2.0 * T + 1e-9:
            u, v = record.fields_at(i)
            sup = max(sup, float(np.hypot(gevrey_norm(u, params), gevrey_norm(v, params))))
    return sup


def check_apriori(
    traj: TrajectoryRecord, params: NormParams, T: float, p: int = 1
) -> EstimateReport:
    """Windowed dispersive norm of a recorded solution pair against
    sqrt(T) (1 + sup-norm over [0, 2T])^{2p+1}.

    The sup uses the derivative-weighted norm at s+1; with rho > 0 the
    exponential-weighted variant is evaluated as well and the worse ratio is
    reported.
    """
    _require(params.s > 1.5, f"need s > 3/2, got {params.s}")
    _require(T >= 1.0, f"need T >= 1, got {T}")
    _require(isinstance(p, (int, np.integer)) and p >= 1, f"p must be a positive int, got {p}")
    su, sv = _windowed_pair_sample(traj, T)
    power = 2 * p + 1

    plain = NormParams(0.0, params.s, params.b)
    lhs0 = float(np.hypot(bourgain_norm(su, plain, None), bourgain_norm(sv, plain, None)))
    lam = _pair_sup(traj, T, NormParams(0.0, params.s + 1.0, 0.0))
    r0 = _ratio(lhs0, np.sqrt(T) * (1.0 + lam) ** power)

    if params.rho > 0.0:
        lhs1 = float(np.hypot(bourgain_norm(su, params, None), bourgain_norm(sv, params, None)))
        kap = _pair_sup(traj, T, NormParams(params.rho, params.s + 1.0, 0.0))
        r1 = _ratio(lhs1, np.sqrt(T) * (1.0 + kap) ** power)
    else:
        kap = lam
        r1 = r0

    info = {
        "rho": params.rho,
        "s": params.s,
        "b": params.b,
        "T": T,
        "p": p,
        "record_times": len(traj),
    }
    extra = {
        "ratio_derivative_scale": r0,
        "ratio_exponential_scale": r1,
        "sup_derivative": lam,
        "sup_exponential": kap,
    }
    return _fold("apriori", [-1, -1], [r0, r1], info, extra)


def check_apriori_ensemble(
    spec: SampleSpec,
    params: NormParams,
    T: float,
    p: int = 1,
    grid: SpectralGrid | None = None,
    dt: float = 0.02,
    record_stride: int = 10,
    ensemble: int = 20,
) -> EstimateReport:
    """check_apriori over short two-sided runs from random analytic data.

    Keep spec.amplitude small: the stepping is explicit in the nonlinearity
    and large random data on a coarse grid blows up honestly.
    """
    g = _default_grid() if grid is None else grid
    cfg = SolverConfig(
        p=p,
        dt=dt,
        t_end=2.0 * T,
        record_stride=record_stride,
        record_rho=params.rho,
        record_s=params.s,
    )
    seeds = [spec.seed + i for i in range(ensemble)]
    ratios = []
    for sd in seeds:
        state = CoupledState(
            0.0, random_field(g, spec, sd), random_field(g, spec, sd + 7919)
        )
        rec = bidirectional_record(state, cfg, 2.0 * T)
        ratios.append(check_apriori(rec, params, T, p).max_ratio)
    info = _base_params(spec, params, g, num_times=0)
    info.update({"T": T, "p": p, "dt": dt, "record_stride": record_stride})
    return _fold("apriori", seeds, ratios, info)
