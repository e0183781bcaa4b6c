"""Experiment configuration, statistical reports and the verification suite.

``run_verify`` executes thirteen named checks, one per acceptance
criterion.  Each returns :class:`StatReport` rows; statistical checks
whose Monte Carlo rows fail are rerun once with four times the sample
size.  Reports carry no timings, so the JSON is byte-identical for a
fixed configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from .errors import FracflowError
from .integrals import (PartitionSpec, Polynomial, correction_discrete,
                        riemann_kernel_discrepancy, riemann_sum,
                        skorohod_integral, stratonovich_integral,
                        young_pl_integral)
from .inversion import convolution_identity_check, recover_bm, round_trip_fbm
from .kernels import (HurstParams, covariance_closed, covariance_matrix,
                      covariance_quadrature, weierstrass)
from .roughpath import chen_check, level2, scaling_report
from .rng import derive_seed, stream
from .synthesis import (Mollifier, calibrate_noise_step, gamma_covariance_matrix,
                        kernel_weights, mollified_weights, noise_batch,
                        poisson_weights, synth_exact, synth_gamma, synth_kernel)

SIGMA = 3.0
METHODS = ("exact", "kernel", "mollified", "poisson", "gamma")
COMPARISONS = ("within_se", "within_tol", "at_most", "at_least", "report")


# --------------------------------------------------------------------------
# configuration


def parse_grid(spec: str) -> np.ndarray:
    """``"start:end:cells"`` -> ``cells + 1`` equally spaced times."""
    try:
        start, end, cells = spec.split(":")
        start, end, cells = float(start), float(end), int(cells)
    except ValueError as exc:
        raise FracflowError("CONFIG_INVALID", f"grid must be start:end:cells, got {spec!r}") from exc
    if cells < 1 or not end > start:
        raise FracflowError("CONFIG_INVALID", "grid needs end > start and cells >= 1")
    return np.linspace(start, end, cells + 1)


@dataclass
class ExperimentConfig:
    """Everything that determines a verification run.

    ``n`` is the large Monte Carlo size (criteria stated at 10^4 draws) and
    ``n_small`` the small one (10^3 draws).  ``tolerance_scale`` multiplies
    every fixed tolerance; the 3-SE bands are not scaled.
    """

    H: list = field(default_factory=lambda: [0.3, 0.5, 0.7])
    methods: list = field(default_factory=lambda: list(METHODS))
    grid: str = "0.25:2:7"
    partition_cells: int = 4096
    n: int = 10_000
    n_small: int = 1_000
    seed: int = 42
    tolerance_scale: float = 1.0
    checks: list = field(default_factory=lambda: list(CHECK_NAMES))
    output: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(msg):
            raise FracflowError("CONFIG_INVALID", msg)

        if not self.H or any(not 0.0 < float(h) < 1.0 for h in self.H):
            bad("every H must lie in (0, 1)")
        if any(m not in METHODS for m in self.methods):
            bad(f"methods must be drawn from {METHODS}")
        if int(self.n) < 100 or int(self.n_small) < 100:
            bad("Monte Carlo sizes must be >= 100")
        if not self.tolerance_scale > 0:
            bad("tolerance_scale must be positive")
        if int(self.partition_cells) < 2:
            bad("partition_cells must be >= 2")
        unknown = [c for c in self.checks if c not in CHECK_NAMES]
        if unknown:
            bad(f"unknown checks {unknown}")
        parse_grid(self.grid)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise FracflowError("CONFIG_INVALID", "config must be a mapping")
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise FracflowError("CONFIG_INVALID", f"unknown keys {sorted(extra)}")
        return cls(**data)

    def dump(self, dest) -> None:
        Path(dest).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))

    @classmethod
    def load(cls, src) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(Path(src).read_text())
        except OSError as exc:
            raise FracflowError("IO", str(exc)) from exc
        except yaml.YAMLError as exc:
            raise FracflowError("CONFIG_INVALID", str(exc)) from exc
        return cls.from_dict(data or {})


# --------------------------------------------------------------------------
# reports


def _f(x):
    return None if x is None else float(x)


@dataclass
class StatReport:
    """One comparison of an estimate with its target.

    ``comparison`` selects the verdict rule: ``within_se`` passes iff
    ``|estimate - target| <= 3 standard_error``; ``within_tol`` iff
    ``|estimate - target| <= tolerance``; ``at_most`` / ``at_least`` compare
    ``estimate`` with the threshold ``target``; ``report`` is never asserted.
    """

    name: str
    estimate: float
    target: float
    standard_error: float | None = None
    n: int = 0
    comparison: str = "within_se"
    tolerance: float | None = None
    metadata: dict = field(default_factory=dict)
    verdict: str = field(init=False)

    def __post_init__(self):
        if self.comparison not in COMPARISONS:
            raise ValueError(f"comparison must be one of {COMPARISONS}")
        self.estimate, self.target = float(self.estimate), float(self.target)
        self.standard_error, self.tolerance = _f(self.standard_error), _f(self.tolerance)
        self.verdict = self._decide()

    def _decide(self) -> str:
        c, e, t = self.comparison, self.estimate, self.target
        if c == "report":
            return "report-only"
        if c == "within_se":
            ok = abs(e - t) <= SIGMA * self.standard_error
        elif c == "within_tol":
            ok = abs(e - t) <= self.tolerance
        elif c == "at_most":
            ok = e <= t
        else:
            ok = e >= t
        return "pass" if ok else "fail"

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CheckResult:
    name: str
    criterion: int
    reports: list
    rerun: bool = False

    @property
    def passed(self) -> bool:
        return not any(r.failed for r in self.reports)

    def to_dict(self) -> dict:
        return {"name": self.name, "criterion": self.criterion, "passed": self.passed,
                "rerun": self.rerun, "reports": [r.to_dict() for r in self.reports]}


@dataclass
class VerifySuite:
    config: ExperimentConfig
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        body = {"config": self.config.to_dict(), "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks]}
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    def summary_lines(self) -> list[str]:
        return [f"[{'PASS' if c.passed else 'FAIL'}] criterion {c.criterion:2d} {c.name}"
                + (" (rerun at 4N)" if c.rerun else "") for c in self.checks]


def mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def _seed(cfg: ExperimentConfig, check: int, sub: int = 0) -> int:
    return derive_seed(cfg.seed, 1000 * check + sub)


# --------------------------------------------------------------------------
# criterion 1


def check_covariance_quadrature(cfg, scale=1):
    tol = 1e-3 * cfg.tolerance_scale
    out = []
    for H in (0.3, 0.5, 0.75):
        p = HurstParams(H)
        for t in (0.5, 1.0, 2.0):
            for s in (0.5, 1.0, 2.0):
                exact = covariance_closed(t, s, p)
                rel = abs(covariance_quadrature(t, s, p, tol=1e-5)[0] - exact) / abs(exact)
                out.append(StatReport(f"H={H} t={t} s={s} rel_err", rel, tol, comparison="at_most"))
    return out


# --------------------------------------------------------------------------
# criterion 2


def check_brownian_reduction(cfg, scale=1):
    p = HurstParams(0.5)
    grid = np.array([-2.0, -1.5, -1.0, -0.25, 0.25, 0.5, 1.0, 3.0])
    worst = 0.0
    for t in grid:
        for s in grid:
            if t * s > 0:
                worst = max(worst, abs(covariance_closed(t, s, p) - min(abs(t), abs(s))))
    out = [StatReport("H=0.5 same-sign covariance = min(|t|,|s|)", worst, 1e-15, comparison="at_most")]
    n = cfg.n * scale
    times = np.array([0.0, 1.0, 2.0])
    paths = {"exact": synth_exact(times, p, seed=_seed(cfg, 2), n_paths=n).values[:, 0]}
    R, h = 4.0, 1.0 / 64
    paths["kernel"] = _kernel_batch(times, p, _seed(cfg, 2, 1), n, R, h)
    for name, x in paths.items():
        d1, d2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 1]
        for label, v in (("Var(X1-X0)", d1 ** 2), ("Var(X2-X1)", d2 ** 2)):
            m, se = mean_se(v)
            out.append(StatReport(f"{name} {label}", m, 1.0, se, n))
        m, se = mean_se(d1 * d2)
        out.append(StatReport(f"{name} Cov(increments)", m, 0.0, se, n))
        out.append(StatReport(f"{name} X_0", float(np.max(np.abs(x[:, 0]))), 0.0, comparison="at_most"))
    return out


def _kernel_batch(times, p, seed, n, R, h, chunk=500, subgrid="sample"):
    """``(n, len(times))`` kernel-method draws, generated in chunks."""
    rows = []
    for start in range(0, n, chunk):
        fields = noise_batch(seed, min(chunk, n - start), R, h, start=start)
        rows.append(synth_kernel(times, p, fields, subgrid=subgrid).values[:, 0])
    return np.concatenate(rows)


# --------------------------------------------------------------------------
# criterion 3


def _cov_reports(tag, x, C, n, comparison="within_se"):
    iu = np.triu_indices(C.shape[0])
    prod = x[:, :, None] * x[:, None, :]
    est = prod.mean(axis=0)
    se = prod.std(axis=0, ddof=1) / math.sqrt(n)
    if comparison == "report":
        z = np.abs(est - C)[iu] / se[iu]
        return [StatReport(f"{tag} max |z| over entries", float(z.max()), 0.0, n=n, comparison="report",
                           metadata={"max_abs_error": float(np.abs(est - C)[iu].max())})]
    return [StatReport(f"{tag} C[{i},{j}]", est[i, j], C[i, j], se[i, j], n) for i, j in zip(*iu)]


def check_mc_covariance(cfg, scale=1):
    """Exact and kernel samplers are asserted; the mollified, Poisson and
    Gamma families approximate fBm by construction and are reported."""
    times = parse_grid(cfg.grid)
    n = cfg.n * scale
    out = []
    for H in cfg.H:
        p = HurstParams(H)
        C = covariance_matrix(times, p)
        if "exact" in cfg.methods:
            x = synth_exact(times, p, seed=_seed(cfg, 3, 0), n_paths=n).values[:, 0]
            out += _cov_reports(f"exact H={H}", x, C, n)
        if "gamma" in cfg.methods:
            x = synth_gamma(times, p, 0.01, seed=_seed(cfg, 3, 1), n_paths=n).values[:, 0]
            out += _cov_reports(f"gamma(0.01) H={H}", x, C, n, "report")
        grid_methods = [m for m in ("kernel", "mollified", "poisson") if m in cfg.methods]
        if not grid_methods:
            continue
        cal = calibrate_noise_step(times, p)
        R, h = cal["R"], cal["h"]
        weights = {}
        if "mollified" in grid_methods:
            weights["mollified(triangle,0.1)"] = mollified_weights(times, p, R, h, Mollifier("triangle", 0.1))
        if "poisson" in grid_methods:
            weights["poisson(0.5)"] = poisson_weights(times, p, R, h, 0.5)
        draws = {k: [] for k in weights}
        kern = []
        seed = _seed(cfg, 3, 2)
        for start in range(0, n, 500):
            fields = noise_batch(seed, min(500, n - start), R, h, start=start)
            if "kernel" in grid_methods:
                kern.append(synth_kernel(times, p, fields).values[:, 0])
            inc = np.stack([f.increments[0] for f in fields])
            for k, W in weights.items():
                draws[k].append(inc @ W.T)
        if kern:
            out += _cov_reports(f"kernel H={H}", np.concatenate(kern), C, n)
            out[-1].metadata.update({"R": R, "h": h, "grid_deficit": cal["grid_deficit"],
                                     "tail_deficit": cal["tail_deficit"]})
        for k, rows in draws.items():
            out += _cov_reports(f"{k} H={H}", np.concatenate(rows), C, n, "report")
    return out


# --------------------------------------------------------------------------
# criterion 4


def check_riemann_cauchy(cfg, scale=1):
    p = HurstParams(0.6)
    n = cfg.n_small * scale
    path = synth_exact(np.linspace(0.0, 1.0, 513), p, seed=_seed(cfg, 4), n_paths=n)
    levels = [16, 32, 64, 128, 256]
    sums = {m: riemann_sum(path, path, PartitionSpec.uniform(0.0, 1.0, m))[..., 0, 0] for m in levels}
    gaps = [float(np.mean((sums[2 * m] - sums[m]) ** 2)) for m in levels[:-1]]
    out = []
    for i in range(len(gaps) - 1):
        out.append(StatReport(f"E(S_{2 * levels[i]}-S_{levels[i]})^2 / E(S_{4 * levels[i]}-S_{2 * levels[i]})^2",
                              gaps[i] / gaps[i + 1], 2.0, n=n, comparison="at_least",
                              metadata={"gaps": gaps}))
    return out


# --------------------------------------------------------------------------
# criterion 5


def check_discrepancy_rate(cfg, scale=1):
    out = []
    ns = [2 ** j for j in range(3, 10)]
    for H, hp in ((0.6, 0.4), (0.4, 0.3)):
        p = HurstParams(H)
        phi = weierstrass(hp)
        disc = [riemann_kernel_discrepancy(phi, PartitionSpec.uniform(0.0, 1.0, m), p, 2 ** 16) for m in ns]
        slope = float(np.polyfit(np.log(1.0 / np.array(ns)), np.log(disc), 1)[0])
        bound = min(hp, H + hp - 0.5) - 0.1
        out.append(StatReport(f"H={H} H'={hp} slope of log N2(D) vs log delta", slope, bound,
                              comparison="at_least", metadata={"delta": [1.0 / m for m in ns], "N2": disc}))
    return out


# --------------------------------------------------------------------------
# criteria 6 and 7


def strat_self_integral_rms(H: float, n: int, a: float = 0.0, b: float = 1.0) -> float:
    """Exact absolute L2 error of the midpoint sum of ``int X dX`` on ``n``
    uniform cells of ``[a, b]`` against ``(X_b^2 - X_a^2) / 2``.

    The error is ``sum_i (A_i^2 - B_i^2) / 2`` with ``A_i, B_i`` the two
    half-cell increments; its variance follows from Isserlis' theorem and
    the fractional Gaussian noise covariance at half-cell lag.
    """
    p = HurstParams(H)
    half = (b - a) / (2 * n)
    h2 = 2.0 * H

    def rho(k):
        k = np.abs(k)
        return p.k_2alpha * half ** h2 * (np.abs(k + 1) ** h2 + np.abs(k - 1) ** h2 - 2.0 * k ** h2)

    lags = np.arange(-(n - 1), n)
    count = n - np.abs(lags)
    two = 2.0 * lags
    var = 0.5 * float(np.sum(count * (2.0 * rho(two) ** 2 - rho(two - 1) ** 2 - rho(two + 1) ** 2)))
    return math.sqrt(var)


def strat_self_integral_error(H: float, n: int, a: float = 0.0, b: float = 1.0) -> float:
    """:func:`strat_self_integral_rms` relative to the RMS of the target."""
    p = HurstParams(H)
    sa, sb, cab = covariance_closed(a, a, p), covariance_closed(b, b, p), covariance_closed(a, b, p)
    target = (3.0 * sb ** 2 + 3.0 * sa ** 2 - 2.0 * (sa * sb + 2.0 * cab ** 2)) / 4.0
    return strat_self_integral_rms(H, n, a, b) / math.sqrt(target)


def check_stratonovich_self(cfg, scale=1):
    H, m = 0.4, cfg.partition_cells
    p = HurstParams(H)
    n = cfg.n_small * scale
    path = synth_exact(np.linspace(0.0, 1.0, 2 * m + 1), p, seed=_seed(cfg, 6), n_paths=n)
    strat = stratonovich_integral(Polynomial.univariate([0, 1]), path, PartitionSpec.uniform(0.0, 1.0, m))
    xb = path.values[:, 0, -1]
    target = 0.5 * xb ** 2
    rel = math.sqrt(np.mean((strat.value[:, 0, 0] - target) ** 2) / np.mean(target ** 2))
    exact = strat_self_integral_error(H, m)
    tol = 0.05 * cfg.tolerance_scale
    return [
        StatReport(f"H={H} n={m} relative L2 error (Monte Carlo)", rel, tol, n=n, comparison="at_most"),
        StatReport(f"H={H} n={m} relative L2 error (closed form)", exact, tol, comparison="at_most"),
        StatReport(f"H={H} n={2 * m} relative L2 error (closed form)", strat_self_integral_error(H, 2 * m), tol,
                   comparison="report"),
    ]


def check_ito_consistency(cfg, scale=1):
    p = HurstParams(0.5)
    m = cfg.partition_cells
    n = cfg.n_small * scale
    path = synth_exact(np.linspace(0.0, 1.0, 2 * m + 1), p, seed=_seed(cfg, 7), n_paths=n)
    sk = skorohod_integral(Polynomial.univariate([0, 1]), path, PartitionSpec.uniform(0.0, 1.0, m), p)
    x1 = path.values[:, 0, -1]
    err = math.sqrt(np.mean((sk.value[:, 0, 0] - (0.5 * x1 ** 2 - 0.5)) ** 2))
    return [StatReport(f"n={m} L2 distance to X_1^2/2 - 1/2", err, 0.05 * cfg.tolerance_scale, n=n,
                       comparison="at_most", metadata={"correction": float(np.asarray(sk.correction_value).flat[0])})]


# --------------------------------------------------------------------------
# criterion 8


def check_skorohod_zero_mean(cfg, scale=1):
    n = cfg.n * scale
    out = []
    for i, H in enumerate((0.4, 0.6)):
        p = HurstParams(H)
        path = synth_exact(np.linspace(0.0, 1.0, 513), p, seed=_seed(cfg, 8, i), n_paths=n)
        sk = skorohod_integral(Polynomial.univariate([0, 0, 1]), path, PartitionSpec.uniform(0.0, 1.0, 256), p)
        m, se = mean_se(sk.value[:, 0, 0])
        out.append(StatReport(f"H={H} E[int X^2 (skorohod) dX]", m, 0.0, se, n))
    return out


# --------------------------------------------------------------------------
# criterion 9


def check_chen(cfg, scale=1):
    p = HurstParams(0.35)
    times = np.linspace(0.0, 1.0, 257)
    paths = synth_exact(times, p, d=2, seed=_seed(cfg, 9), n_paths=100)
    rng = stream(_seed(cfg, 9, 1), purpose="derive")
    worst = 0.0
    for i in range(100):
        path = paths.select(i)
        for _ in range(20):
            a, c, b = np.sort(rng.choice(len(times), 3, replace=False))
            a, c, b = times[a], times[c], times[b]
            res = chen_check(path, a, c, b)
            scale_ = max(1.0, float(np.abs(level2(path, a, b).values).max()))
            worst = max(worst, float(np.abs(res).max()) / scale_)
    return [StatReport("max relative Chen residual (100 paths x 20 triples)", worst, 1e-10, comparison="at_most")]


# --------------------------------------------------------------------------
# criterion 10


def check_scaling(cfg, scale=1):
    n = cfg.n_small * scale
    lengths = [1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0]
    out = []
    for i, H in enumerate((0.35, 0.5, 0.75)):
        p = HurstParams(H)
        path = synth_exact(np.linspace(0.0, 1.0, 1025), p, d=2, seed=_seed(cfg, 10, i), n_paths=n)
        for level in (2, 3):
            rep = scaling_report(path, lengths, level)
            out.append(StatReport(f"H={H} level {level} slope", rep["slope"], rep["target"], n=n,
                                  comparison="within_tol", tolerance=0.5 * cfg.tolerance_scale,
                                  metadata={"mean_sq_norms": rep["mean_sq_norms"]}))
    return out


# --------------------------------------------------------------------------
# criterion 11


def _decreasing(name, values, params, n, extra=None):
    out = []
    for k in range(len(values) - 1):
        out.append(StatReport(f"{name}: {params[k]} -> {params[k + 1]} ratio", values[k] / values[k + 1], 1.0,
                              n=n, comparison="at_least",
                              metadata={"values": list(map(float, values)), **(extra or {})}))
    return out


def check_approximations(cfg, scale=1):
    n = cfg.n_small * scale
    t = np.array([0.5, 1.0])
    R, h = 50.0, 1.0 / 32
    out = []
    for i, H in enumerate(cfg.H):
        p = HurstParams(H)
        fields = noise_batch(_seed(cfg, 11, i), n, R, h)
        inc = np.stack([f.increments[0] for f in fields])
        W = kernel_weights(t, p, R, h)
        base = inc @ W.T

        def coupled(Wm):
            mc = float(np.mean((inc @ Wm.T - base)[:, -1] ** 2))
            exact = float(h * np.sum((Wm - W)[-1] ** 2))
            return mc, exact

        widths = [0.4, 0.2, 0.1]
        mc, ex = zip(*(coupled(mollified_weights(t, p, R, h, Mollifier("triangle", w))) for w in widths))
        out += _decreasing(f"H={H} mollifier width", mc, widths, n, {"exact": list(ex)})
        ys = [2.0, 1.0, 0.5]
        mc, ex = zip(*(coupled(poisson_weights(t, p, R, h, y)) for y in ys))
        out += _decreasing(f"H={H} Poisson y", mc, ys, n, {"exact": list(ex)})
        grid = parse_grid(cfg.grid)
        C = covariance_matrix(grid, p)
        lams = [1.0, 0.1, 0.01]
        dist = [float(np.abs(gamma_covariance_matrix(grid, p, lam) - C).max()) for lam in lams]
        out += _decreasing(f"H={H} Gamma lambda (covariance distance)", dist, lams, 0)
    return out


# --------------------------------------------------------------------------
# criterion 12


def check_inversion(cfg, scale=1):
    out = []
    for H in (0.3, 0.7):
        p = HurstParams(H)
        res = [convolution_identity_check(1.0, p, h=2.0 ** -k, L=8.0) for k in (10, 11, 12)]
        errs = [r["max_error"] for r in res]
        meta = {"max_error": errs, "probe_error": [r["probe_error"] for r in res]}
        out.append(StatReport(f"H={H} identity error at h=2^-10", errs[0], 0.05 * cfg.tolerance_scale,
                              comparison="at_most", metadata=meta))
        for k in range(2):
            out.append(StatReport(f"H={H} identity error ratio h=2^-{10 + k} -> 2^-{11 + k}",
                                  errs[k] / errs[k + 1], 1.0, comparison="at_least", metadata=meta))
    n = cfg.n_small * scale
    R, h = 16.0, 1.0 / 32
    grid = h * np.arange(-int(R / h), int(R / h) + 1)
    for i, H in enumerate((0.3, 0.7)):
        p = HurstParams(H)
        rows, truth = [], []
        seed = _seed(cfg, 12, i)
        for start in range(0, n, 250):
            fields = noise_batch(seed, min(250, n - start), 2 * R, h, start=start)
            x = synth_kernel(grid, p, fields, subgrid="omit")
            rows.append(recover_bm(x, [1.0], p, R)[:, 0, 0])
            truth.append(np.array([f.brownian([1.0])[0, 0] for f in fields]))
        b_hat, b = np.concatenate(rows), np.concatenate(truth)
        rho = float(np.corrcoef(b_hat, b)[0, 1])
        out.append(StatReport(f"H={H} corr(B_hat_1, B_1) at R={R:g}, h={h:g}", rho, 0.95, n=n,
                              comparison="at_least", metadata={"var_B_hat": float(b_hat.var(ddof=1))}))
    # round trip along the R ladder; report-only (see the notes on H near 1/2)
    for i, H in enumerate((0.3, 0.5 + 1e-3)):
        p = HurstParams(H)
        ladder = []
        for R_k, h_k in ((4.0, 1 / 8), (8.0, 1 / 16), (16.0, 1 / 32)):
            fields = noise_batch(_seed(cfg, 12, 10 + i), 100, 2 * R_k, h_k)
            ladder.append(round_trip_fbm(fields, p, [1.0], R_k, h_k))
        meta = {"R": [r["R"] for r in ladder], "bm_error": [r["bm_error"][0] for r in ladder],
                "fbm_error": [r["fbm_error"][0] for r in ladder]}
        out.append(StatReport(f"H={H:g} round-trip relative error of B_1 at R=16", meta["bm_error"][-1], 0.05,
                              n=100, comparison="report", metadata=meta))
    return out


# --------------------------------------------------------------------------
# criterion 13


def check_piecewise_linear(cfg, scale=1):
    p = HurstParams(0.6)
    n = cfg.n_small * scale
    path = synth_exact(np.linspace(0.0, 1.0, 513), p, seed=_seed(cfg, 13), n_paths=n)
    F = Polynomial.univariate([0, 0, 1])
    out = []
    rms = {"strat": [], "skorohod": []}
    levels = [64, 128, 256]
    for m in levels:
        part = PartitionSpec.uniform(0.0, 1.0, m)
        pl = young_pl_integral(F, path, part).value[:, 0, 0]
        st = stratonovich_integral(F, path, part).value[:, 0, 0]
        sk = skorohod_integral(F, path, part, p).value[:, 0, 0]
        d_st = pl - st
        d_sk = pl - correction_discrete(F, path, part, p)[:, 0, 0] - sk
        rms["strat"].append(float(np.sqrt(np.mean(d_st ** 2))))
        rms["skorohod"].append(float(np.sqrt(np.mean(d_sk ** 2))))
        if m == levels[-1]:
            for label, d in (("young_pl - stratonovich", d_st), ("young_pl - correction - skorohod", d_sk)):
                mu, se = mean_se(d)
                out.append(StatReport(f"n={m} E[{label}]", mu, 0.0, se, n))
    for label, vals in rms.items():
        out += _decreasing(f"RMS difference to {label}", vals, levels, n)
    return out


# --------------------------------------------------------------------------
# registry and driver


@dataclass(frozen=True)
class Check:
    name: str
    criterion: int
    func: Callable
    statistical: bool
    group: str


CHECKS = (
    Check("covariance_quadrature", 1, check_covariance_quadrature, False, "kernels"),
    Check("brownian_reduction", 2, check_brownian_reduction, True, "synthesis"),
    Check("mc_covariance", 3, check_mc_covariance, True, "synthesis"),
    Check("riemann_cauchy", 4, check_riemann_cauchy, True, "integrals"),
    Check("kernel_discrepancy_rate", 5, check_discrepancy_rate, False, "integrals"),
    Check("stratonovich_self_integral", 6, check_stratonovich_self, True, "integrals"),
    Check("ito_consistency", 7, check_ito_consistency, True, "integrals"),
    Check("skorohod_zero_mean", 8, check_skorohod_zero_mean, True, "integrals"),
    Check("chen_identity", 9, check_chen, False, "roughpath"),
    Check("scaling_norms", 10, check_scaling, True, "roughpath"),
    Check("approximation_families", 11, check_approximations, True, "synthesis"),
    Check("inversion", 12, check_inversion, True, "inversion"),
    Check("piecewise_linear_limits", 13, check_piecewise_linear, True, "integrals"),
)
CHECK_NAMES = tuple(c.name for c in CHECKS)
GROUPS = tuple(sorted({c.group for c in CHECKS}))


def select_checks(selectors) -> list[str]:
    """Expand group names (``kernels``, ``synthesis``, ...) and check names."""
    names = []
    for s in selectors:
        if s in GROUPS:
            names += [c.name for c in CHECKS if c.group == s]
        elif s in CHECK_NAMES:
            names.append(s)
        else:
            raise FracflowError("CONFIG_INVALID", f"unknown check or group {s!r}")
    return [c for c in CHECK_NAMES if c in names]


def run_check(check: Check, cfg: ExperimentConfig) -> CheckResult:
    result = CheckResult(check.name, check.criterion, check.func(cfg, 1))
    # a larger sample can only change Monte Carlo verdicts (n > 0)
    if check.statistical and any(r.failed and r.n > 0 for r in result.reports):
        result = CheckResult(check.name, check.criterion, check.func(cfg, 4), rerun=True)
    return result


def run_verify(cfg: ExperimentConfig, progress: Callable[[str], None] | None = None) -> VerifySuite:
    """Run the configured checks in registry order; write the JSON report
    to ``cfg.output`` when set."""
    cfg.validate()
    results = []
    for check in CHECKS:
        if check.name not in cfg.checks:
            continue
        res = run_check(check, cfg)
        results.append(res)
        if progress:
            progress(f"[{'PASS' if res.passed else 'FAIL'}] criterion {check.criterion:2d} {check.name}")
    suite = VerifySuite(cfg, results)
    if cfg.output:
        out = Path(cfg.output)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "verify_report.json").write_text(suite.to_json())
        except OSError as exc:
            raise FracflowError("IO", str(exc)) from exc
    return suite
