"""Monte Carlo driver and statistics for concatenated QEC under fluctuating noise.

A run draws N0 perturbed channels, pushes them through L concatenation
levels (consecutive blocks of n channels map to one effective channel), and
at every level compares the N_l = N0 / n^l samples against the strict
average channel from the deterministic recursion:

    mean:  eta_bar[mu,nu] = (1/N_l) sum_i eta_i[mu,nu]
    SD:    d_eta[mu,nu]   = sqrt((1/N_l) sum_i (eta_i[mu,nu] - eta_avg[mu,nu])^2)

with the strict average (not the sample mean) inside the square, hence the
divisor N_l rather than N_l - 1.  Attenuation ratios divide consecutive SDs.
"""

from __future__ import annotations

import concurrent.futures
import json
import multiprocessing
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from .codes import CodeSpec, get_code
from .effective import AverageRecursion, CodeKernel, average_recursion, get_kernel
from .noise import (
    BaseModelSpec,
    PerturbedModelSpec,
    average_perturbed,
    perturbed_channel_batch,
    sample_unitary_batch,
)

RATIO_FLOOR = 1e-15

#: desk-scale sample-count defaults (the paper's full runs use 50000-268912)
DEFAULT_N0 = {"five": 12500, "steane": 9800, "shor": 7290}

# regression constants for the rough SD estimate (5-qubit provenance)
SD_FIT_LINEAR = 0.354143
SD_FIT_QUAD = 0.0112724
RATIO_FIT_OFFSET = 0.861795
RATIO_FIT_SCALE = 0.300709


class ThresholdError(RuntimeError):
    """Raised when the threshold bisection finds no sign change."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    code: str
    base: BaseModelSpec
    k: float
    n0: int
    levels: int
    seed: int
    bins: int = 60
    out_dir: str | None = None
    allow_large_k: bool = False

    def __post_init__(self):
        code = get_code(self.code)
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.n0 % code.n**self.levels:
            raise ValueError(
                f"n0 = {self.n0} is not divisible by {code.n}^{self.levels}; "
                "per-level sample counts must stay integral"
            )
        self.perturbed_spec()  # validates k range

    def perturbed_spec(self) -> PerturbedModelSpec:
        return PerturbedModelSpec(self.base, self.k, allow_large_k=self.allow_large_k)

    def to_dict(self) -> dict:
        out = {
            "code": self.code,
            "base": self.base.to_dict(),
            "k": self.k,
            "n0": self.n0,
            "levels": self.levels,
            "seed": self.seed,
            "bins": self.bins,
        }
        if self.out_dir is not None:
            out["out_dir"] = self.out_dir
        if self.allow_large_k:
            out["allow_large_k"] = True
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        return cls(
            code=obj["code"],
            base=BaseModelSpec.from_dict(obj["base"]),
            k=float(obj["k"]),
            n0=int(obj["n0"]),
            levels=int(obj["levels"]),
            seed=int(obj["seed"]),
            bins=int(obj.get("bins", 60)),
            out_dir=obj.get("out_dir"),
            allow_large_k=bool(obj.get("allow_large_k", False)),
        )


# ---------------------------------------------------------------------------
# per-level statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelStats:
    level: int
    n_samples: int
    strict_avg_ptm: np.ndarray = field(repr=False)
    strict_avg_fidelity: float = 0.0
    sample_mean_ptm: np.ndarray = field(repr=False, default=None)
    sample_mean_fidelity: float = 0.0
    sd_ptm: np.ndarray = field(repr=False, default=None)
    sd_fidelity: float = 0.0
    ratio_fidelity: float | None = None
    ratio_ptm: np.ndarray | None = field(repr=False, default=None)
    fidelity_min: float = 0.0
    fidelity_max: float = 0.0
    hist_edges: np.ndarray = field(repr=False, default=None)
    hist_counts: np.ndarray = field(repr=False, default=None)

    @property
    def error_rate(self) -> float:
        """Average error rate r = 1 - F at this level."""
        return 1.0 - self.strict_avg_fidelity


def _level_stats(
    level: int,
    ptms: np.ndarray,
    strict_ptm: np.ndarray,
    strict_f: float,
    prev: LevelStats | None,
    bins: int,
) -> LevelStats:
    n_l = ptms.shape[0]
    fids = np.trace(ptms, axis1=1, axis2=2) / 4.0
    mean_ptm = ptms.mean(axis=0)
    sd_ptm = np.sqrt(np.mean((ptms - strict_ptm[None, :, :]) ** 2, axis=0))
    sd_f = float(np.sqrt(np.mean((fids - strict_f) ** 2)))

    ratio_f = None
    ratio_ptm = None
    if prev is not None:
        ratio_f = prev.sd_fidelity / sd_f if sd_f > RATIO_FLOOR else None
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio_ptm = np.where(sd_ptm > RATIO_FLOOR, prev.sd_ptm / sd_ptm, np.nan)

    fmin, fmax = float(fids.min()), float(fids.max())
    counts, edges = np.histogram(fids, bins=bins, range=(fmin, fmax))
    return LevelStats(
        level=level,
        n_samples=n_l,
        strict_avg_ptm=strict_ptm,
        strict_avg_fidelity=strict_f,
        sample_mean_ptm=mean_ptm,
        sample_mean_fidelity=float(fids.mean()),
        sd_ptm=sd_ptm,
        sd_fidelity=sd_f,
        ratio_fidelity=ratio_f,
        ratio_ptm=ratio_ptm,
        fidelity_min=fmin,
        fidelity_max=fmax,
        hist_edges=edges,
        hist_counts=counts,
    )


# ---------------------------------------------------------------------------
# parallel block evaluation
# ---------------------------------------------------------------------------

_WORKER_KERNEL: CodeKernel | None = None


def _init_worker(kernel: CodeKernel) -> None:
    global _WORKER_KERNEL
    _WORKER_KERNEL = kernel


def _eval_chunk(args):
    start, channels = args
    return start, _WORKER_KERNEL.evaluate_blocks(channels)


def _map_level(kernel: CodeKernel, channels: np.ndarray, workers: int) -> np.ndarray:
    """One concatenation step.  Block b consumes channels[b*n:(b+1)*n].

    Every block is an independent pure evaluation and results land in block
    order, so the output is identical for any worker count.
    """
    n = kernel.n
    n_blocks = channels.shape[0] // n
    if workers <= 1 or n_blocks < 2 * workers:
        return kernel.evaluate_blocks(channels)
    out = np.empty((n_blocks, 4, 4))
    chunk = max(1, -(-n_blocks // (workers * 4)))
    tasks = [
        (b, channels[b * n : min(b + chunk, n_blocks) * n])
        for b in range(0, n_blocks, chunk)
    ]
    ctx = multiprocessing.get_context("fork")
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=workers, mp_context=ctx, initializer=_init_worker, initargs=(kernel,)
    ) as pool:
        for start, block_out in pool.map(_eval_chunk, tasks):
            out[start : start + block_out.shape[0]] = block_out
    return out


# ---------------------------------------------------------------------------
# the driver
# ---------------------------------------------------------------------------

def run_montecarlo(cfg: ExperimentConfig, workers: int = 1) -> list[LevelStats]:
    """Sample, concatenate, and aggregate; returns stats for levels 0..L.

    Reproducibility contract: identical (config, seed) produce bit-identical
    statistics for any worker count.  Sampling is a single vectorized draw
    from a counter-based generator keyed by the seed; block evaluations are
    pure and reduced in block order.
    """
    code = get_code(cfg.code)
    kernel = get_kernel(code)
    spec = cfg.perturbed_spec()

    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    theta, gamma, phi = sample_unitary_batch(rng, cfg.n0)
    channels = perturbed_channel_batch(spec, theta, gamma, phi)

    strict = average_recursion(code, average_perturbed(spec), cfg.levels)
    stats = [_level_stats(0, channels, strict.ptms[0], strict.fidelities[0], None, cfg.bins)]
    for level in range(1, cfg.levels + 1):
        channels = _map_level(kernel, channels, workers)
        stats.append(
            _level_stats(
                level, channels, strict.ptms[level], strict.fidelities[level],
                stats[-1], cfg.bins,
            )
        )
    return stats


# ---------------------------------------------------------------------------
# derived reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoughEstimate:
    """SD-of-fidelity estimates from the fitted attenuation law."""

    sd: tuple[float, ...]
    ratios: tuple[float, ...]  # ratios[l-1] applies between levels l-1 and l


def rough_estimate_sd(k: float, fidelities) -> RoughEstimate:
    """Iterate the fitted law: dF(0) from k, then dF(l) = dF(l-1) / R(l).

    R(l) depends only on the average effective fidelity entering level l.
    The fit's provenance is the 5-qubit code; using it elsewhere
    extrapolates.
    """
    sd0 = SD_FIT_LINEAR * k - SD_FIT_QUAD * k**2
    sds = [sd0]
    ratios = []
    for f in list(fidelities)[1:]:
        if f >= 1.0:
            raise ValueError(f"fidelity {f} >= 1: attenuation fit diverges")
        r = RATIO_FIT_OFFSET + RATIO_FIT_SCALE / np.sqrt(1.0 - f)
        ratios.append(float(r))
        sds.append(sds[-1] / r)
    return RoughEstimate(sd=tuple(sds), ratios=tuple(ratios))


@dataclass(frozen=True)
class AttenuationRow:
    level: int
    ratio_fidelity: float | None
    diagonal: tuple  # R for eta_11, eta_22, eta_33 (None where absent)
    off_diagonal: tuple  # R for the six (mu != nu, mu,nu >= 1) entries
    first_column: tuple  # R for eta_10, eta_20, eta_30
    offdiag_speedup: float | None  # min off-diagonal R / min diagonal R


_DIAG = [(1, 1), (2, 2), (3, 3)]
_OFFDIAG = [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)]
_FIRST_COL = [(1, 0), (2, 0), (3, 0)]


def attenuation_report(stats: list[LevelStats]) -> list[AttenuationRow]:
    """Per-level attenuation ratios plus the diagonal/off-diagonal speed summary."""
    if len(stats) < 2:
        raise ValueError("need at least one concatenation level")
    rows = []
    for st in stats[1:]:
        def pick(entries):
            vals = []
            for mu, nu in entries:
                r = st.ratio_ptm[mu, nu] if st.ratio_ptm is not None else np.nan
                vals.append(None if not np.isfinite(r) else float(r))
            return tuple(vals)

        diag = pick(_DIAG)
        off = pick(_OFFDIAG)
        present_diag = [r for r in diag if r is not None]
        present_off = [r for r in off if r is not None]
        speedup = None
        if present_diag and present_off:
            speedup = min(present_off) / min(present_diag)
        rows.append(
            AttenuationRow(
                level=st.level,
                ratio_fidelity=st.ratio_fidelity,
                diagonal=diag,
                off_diagonal=off,
                first_column=pick(_FIRST_COL),
                offdiag_speedup=speedup,
            )
        )
    return rows


@dataclass(frozen=True)
class OscillationRow:
    level: int
    eta_xx: float
    eta_zz: float
    dominant: str  # "x", "z" or "degenerate"
    pauli_distance: float  # largest off-diagonal magnitude of the sample mean


@dataclass(frozen=True)
class OscillationReport:
    rows: tuple[OscillationRow, ...]
    alternates: bool | None  # None when any level is degenerate


def shor_oscillation_report(stats: list[LevelStats]) -> OscillationReport:
    """Track which of the X/Z diagonal entries dominates at each level.

    The dominant entry should flip between consecutive levels l >= 1 for the
    Shor code.  Levels whose X/Z gap is below the sample-mean noise floor are
    flagged degenerate and excluded from the alternation claim.
    """
    if len(stats) < 3:
        raise ValueError("oscillation report needs at least 2 concatenation levels")
    rows = []
    for st in stats:
        m = st.sample_mean_ptm
        xx, zz = float(m[1, 1]), float(m[3, 3])
        gap_floor = 5.0 * (st.sd_ptm[1, 1] + st.sd_ptm[3, 3]) / (2.0 * np.sqrt(st.n_samples))
        if abs(xx - zz) <= gap_floor + 1e-12:
            dominant = "degenerate"
        else:
            dominant = "x" if xx > zz else "z"
        off = max(abs(float(m[mu, nu])) for mu in range(1, 4) for nu in range(4) if mu != nu)
        rows.append(OscillationRow(st.level, xx, zz, dominant, off))
    doms = [r.dominant for r in rows[1:]]
    alternates: bool | None
    if any(d == "degenerate" for d in doms):
        alternates = None
    else:
        alternates = all(a != b for a, b in zip(doms, doms[1:]))
    return OscillationReport(rows=tuple(rows), alternates=alternates)


# ---------------------------------------------------------------------------
# threshold search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdResult:
    threshold_fidelity: float  # F_avg(0) at which one round leaves F unchanged
    base_fidelity: float  # the base-model f realizing that average
    ratios: tuple[float, ...]  # per-level R_F from the on-threshold MC run
    stats: list[LevelStats] = field(repr=False, default=None)


def threshold_search(
    code: CodeSpec,
    base_kind: str,
    k: float,
    *,
    base_seed: int | None = None,
    n0: int | None = None,
    levels: int = 2,
    seed: int = 20240921,
    tol: float = 1e-7,
    workers: int = 1,
) -> ThresholdResult:
    """Bisection on the initial average fidelity until F_avg(1) = F_avg(0).

    Follows with one desk-scale Monte Carlo run at the found point and
    reports the per-level SD attenuation ratios.
    """
    if base_kind == "fixture":
        raise ValueError("threshold search needs a base kind with adjustable fidelity")

    def base_for(f0: float) -> BaseModelSpec:
        f = (f0 - 0.5 * k) / (1.0 - k)
        return BaseModelSpec(base_kind, f=f, seed=base_seed)

    def gap(f0: float) -> float:
        spec = PerturbedModelSpec(base_for(f0), k)
        rec = average_recursion(code, average_perturbed(spec), 1)
        return rec.fidelities[1] - f0

    lo = 0.7501
    hi = 1.0 - 0.5 * k - 1e-9  # keep the base fidelity f <= 1
    glo, ghi = gap(lo), gap(hi)
    if glo * ghi > 0:
        raise ThresholdError(
            f"no sign change on ({lo}, {hi:.6f}): gap({lo}) = {glo:.3e}, gap({hi:.6f}) = {ghi:.3e}"
        )
    f0 = 0.5 * (lo + hi)
    for _ in range(200):
        f0 = 0.5 * (lo + hi)
        g = gap(f0)
        if abs(g) < tol:
            break
        if (g < 0) == (glo < 0):
            lo, glo = f0, g
        else:
            hi = f0
    else:
        raise ThresholdError(f"bisection did not reach |gap| < {tol}")

    base = base_for(f0)
    cfg = ExperimentConfig(
        code=code.name,
        base=base,
        k=k,
        n0=n0 if n0 is not None else DEFAULT_N0[code.name],
        levels=levels,
        seed=seed,
    )
    stats = run_montecarlo(cfg, workers=workers)
    ratios = tuple(st.ratio_fidelity for st in stats[1:])
    return ThresholdResult(
        threshold_fidelity=f0, base_fidelity=base.f, ratios=ratios, stats=stats
    )


# ---------------------------------------------------------------------------
# file outputs
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    """Locale-independent scientific notation, 17 significant digits."""
    return f"{x:.16e}"


def write_run_outputs(
    cfg: ExperimentConfig,
    stats: list[LevelStats],
    out_dir: str,
    wall_time_s: float | None = None,
) -> None:
    """Write manifest.json, level_stats.csv and the per-level matrix/histogram CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    import concatqec

    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "versions": {
            "concatqec": concatqec.__version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": wall_time_s,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    lines = ["level,F_avg_strict,F_bar,dF,R_F,F_min,F_max"]
    for st in stats:
        rf = "" if st.ratio_fidelity is None else _fmt(st.ratio_fidelity)
        lines.append(
            ",".join(
                [
                    str(st.level),
                    _fmt(st.strict_avg_fidelity),
                    _fmt(st.sample_mean_fidelity),
                    _fmt(st.sd_fidelity),
                    rf,
                    _fmt(st.fidelity_min),
                    _fmt(st.fidelity_max),
                ]
            )
        )
    with open(os.path.join(out_dir, "level_stats.csv"), "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")

    for st in stats:
        for tag, matrix in (("avg", st.sample_mean_ptm), ("sd", st.sd_ptm)):
            path = os.path.join(out_dir, f"qpm_{tag}_l{st.level}.csv")
            with open(path, "w", newline="") as fh:
                for row in matrix:
                    fh.write(",".join(_fmt(x) for x in row) + "\n")
        path = os.path.join(out_dir, f"fidelity_hist_l{st.level}.csv")
        with open(path, "w", newline="") as fh:
            fh.write("bin_low,bin_high,count\n")
            for lo_edge, hi_edge, count in zip(
                st.hist_edges[:-1], st.hist_edges[1:], st.hist_counts
            ):
                fh.write(f"{_fmt(lo_edge)},{_fmt(hi_edge)},{int(count)}\n")


def run_and_write(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> list[LevelStats]:
    start = time.perf_counter()
    stats = run_montecarlo(cfg, workers=workers)
    write_run_outputs(cfg, stats, out_dir, wall_time_s=time.perf_counter() - start)
    return stats
