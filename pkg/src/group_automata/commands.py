from __future__ import annotations

import logging
from collections.abc import Callable
from typing import Any

import numpy as np

from group_automata.automaton.core import Word
from group_automata.automaton.core import iterate
from group_automata.cesaro.lemma import SumSpec
from group_automata.cesaro.lemma import build_Rtilde
from group_automata.cesaro.lemma import lemma41_diagnostic
from group_automata.cesaro.output import Mode
from group_automata.cesaro.scan import cesaro_scan
from group_automata.cesaro.scan import cross_check
from group_automata.chains.rng import child_seeds
from group_automata.chains.sampler import chi_square_uniformity
from group_automata.chains.sampler import check_levels
from group_automata.chains.sampler import lag_one_correlation
from group_automata.chains.sampler import regeneration_blocks
from group_automata.chains.sampler import regeneration_rate
from group_automata.chains.sampler import sample_path
from group_automata.config import ExperimentConfig
from group_automata.group.digits import density_set
from group_automata.group.digits import density_sets_prime
from group_automata.renewal.core import RenewalStats
from group_automata.renewal.core import epsilon_curve
from group_automata.renewal.core import residual_distribution
from group_automata.renewal.core import residual_tail_exact
from group_automata.renewal.core import simulate_renewal
from group_automata.renewal.laws import InterarrivalLaw
from group_automata.renewal.laws import regeneration_law
from group_automata.report import CsvReport
from group_automata.verify import run_checks

logger = logging.getLogger(__name__)


def _report(config: ExperimentConfig, columns: list[str], **metadata: Any) -> CsvReport:
    return CsvReport(
        command=config.command,
        columns=columns,
        metadata={"config-sha256": config.digest(), "seed": config.seed, **metadata},
    )


def cmd_simulate(config: ExperimentConfig) -> CsvReport:
    """Path x_0..x_{N-1}, its uniforms, levels and certified regeneration times."""
    kernel = config.build_kernel()
    run = config.experiment
    sample = sample_path(kernel, run.past, run.N, config.seed, run.tail_tol)
    tolerance = dict(zip(sample.regens.tolist(), sample.tail_tolerance.tolist()))
    phi: list[int | None] = [None] * sample.N
    if run.m:
        params = config.params()
        spec = kernel.spec
        image = iterate(Word.from_codes(0, sample.xs.tolist(), spec), run.m, params)
        phi[: len(image)] = [spec.code(g) for g in image.elems]

    report = _report(
        config,
        ["n", "x", "u", "level", "regeneration", "tolerance", "phi"],
        kernel=kernel.family,
        m=run.m,
    )
    for n in range(sample.N):
        report.add(
            {
                "n": n,
                "x": int(sample.xs[n]),
                "u": float(sample.us[n]),
                "level": int(sample.levels[n]),
                "regeneration": n in tolerance,
                "tolerance": tolerance.get(n),
                "phi": phi[n],
            }
        )
    gaps = np.diff(sample.regens)
    report.summary = {
        "regenerations": len(sample.regens),
        "candidates": len(sample.candidates),
        "regeneration_density": len(sample.regens) / sample.N,
        "a_minus_1": float(check_levels(kernel)[0]),
        "beta": regeneration_rate(kernel),
        "mean_gap": float(gaps.mean()) if len(gaps) else None,
    }
    logger.info(
        "Simulated %d steps - regenerations: %d, mean gap: %s",
        sample.N,
        len(sample.regens),
        report.summary["mean_gap"],
    )
    return report


def cmd_cesaro(config: ExperimentConfig) -> CsvReport:
    """Cesaro-averaged cylinder laws along the M grid, optionally cross-checked."""
    kernel = config.build_kernel()
    params = config.params()
    run = config.experiment
    grid = run.grid()
    scan = cesaro_scan(
        kernel,
        run.past,
        run.J,
        grid,
        params,
        mode=run.mode,
        seed=config.seed,
        g_values=run.g,
        trials=run.trials,
    )
    report = _report(
        config,
        ["M", "cylinder", "probability", "tv", "stderr"],
        mode=run.mode.value,
        kernel=kernel.family,
        J=",".join(str(j) for j in scan.J),
    )
    report.extend(scan.rows())
    report.summary = {"final_tv": scan.tv[-1]}
    if run.cross_check:
        check = cross_check(kernel, run.past, run.J, grid, params, config.seed, run.trials)
        report.summary |= {
            "cross_check_max_abs_delta": check.max_abs_delta,
            "cross_check_max_sigma": check.max_sigma,
            "cross_check_passed": check.passed,
        }
        if not check.passed:
            report.failure = (
                f"Monte Carlo deviates from exact by {check.max_sigma:.2f} sigma "
                f"(threshold {check.threshold})"
            )
    return report


def _renewal_source(config: ExperimentConfig) -> tuple[RenewalStats, InterarrivalLaw, dict[str, Any]]:
    run = config.experiment
    if config.kernel is None:
        law = config.build_law()
        stats = simulate_renewal(law, run.N, config.seed)
        return stats, law, {"source": law.name}

    kernel = config.build_kernel()
    sample = sample_path(kernel, run.past, run.N, config.seed, run.tail_tol)
    stats = RenewalStats(times=sample.regens, span=sample.N)
    extra: dict[str, Any] = {"source": f"{kernel.family} regenerations"}
    if len(sample.regens):
        _, pvalue = chi_square_uniformity(sample.xs[sample.regens], kernel.q)
        extra["chi_square_pvalue"] = pvalue
    lengths = [block.length for block in regeneration_blocks(sample)]
    if len(lengths) >= 3:
        r, spread = lag_one_correlation(lengths, seed=config.seed)
        extra["lag_one_correlation"] = r
        extra["lag_one_band"] = 3 * spread
    return stats, regeneration_law(kernel), extra


def cmd_regen_stats(config: ExperimentConfig) -> CsvReport:
    """Empirical interarrival and residual-time laws against their exact values."""
    run = config.experiment
    stats, law, extra = _renewal_source(config)
    K = run.K
    n = run.residual_n
    survival_hat = stats.survival_hat(K)
    survival = law.survival(K)
    fbar_hat = stats.fbar_hat(K)
    fbar = law.tail_sum(K)
    eps = epsilon_curve(law, K) if law.period == 1 else None
    report = _report(
        config,
        [
            "k",
            "survival_hat",
            "survival_exact",
            "fbar_hat",
            "fbar_exact",
            "residual_hat",
            "residual_stderr",
            "residual_exact",
            "epsilon",
        ],
        residual_n=n,
    )
    for k in range(K + 1):
        residual = residual_distribution(stats, n, k)
        report.add(
            {
                "k": k,
                "survival_hat": float(survival_hat[k]),
                "survival_exact": float(survival[k]),
                "fbar_hat": float(fbar_hat[k]),
                "fbar_exact": float(fbar[k]),
                "residual_hat": residual.estimate,
                "residual_stderr": residual.stderr,
                "residual_exact": residual_tail_exact(law, n, k),
                "epsilon": None if eps is None else float(eps[k]),
            }
        )
    gaps = stats.interarrivals
    report.summary = {
        "events": len(stats.times),
        "beta_hat": stats.beta_hat,
        "beta": law.beta,
        "mean_gap": float(gaps.mean()) if len(gaps) else None,
        **extra,
    }
    return report


def cmd_density(config: ExperimentConfig) -> CsvReport:
    """|R_M|/M, |R'_M| and |R''_M| along M = p^t."""
    d = config.density
    p = config.group.p
    report = _report(
        config,
        ["t", "M", "size_R", "density_R", "size_R_prime", "size_R_double_prime"],
        alpha=d.alpha,
        eps=d.eps,
        eps_prime=d.eps_prime,
        ell=d.ell,
    )
    for t in range(d.t_min, d.t_max + 1):
        M = p**t
        size, density = density_set(M, d.alpha, p)
        size_prime, size_double = density_sets_prime(M, d.ell, d.eps, d.eps_prime, p)
        report.add(
            {
                "t": t,
                "M": M,
                "size_R": size,
                "density_R": density,
                "size_R_prime": size_prime,
                "size_R_double_prime": size_double,
            }
        )
        logger.debug("density t=%d: |R_M|/M = %.6f", t, density)
    return report


def cmd_lemma41(config: ExperimentConfig) -> CsvReport:
    """Deviation of (phi^{m+j} x)_0 from uniform against the constructive bound, per m."""
    kernel = config.build_kernel()
    params = config.params()
    lemma = config.lemma
    J = tuple(sorted(set(lemma.J)))
    report = _report(
        config,
        [
            "m",
            "joint",
            "n_star",
            "deviation",
            "stderr",
            "bound",
            "vacuous",
            "miss_fraction",
            "within_bound",
        ],
        kernel=kernel.family,
        J=",".join(str(j) for j in J),
    )
    outside = []
    for m, seed in zip(lemma.m, child_seeds(config.seed, len(lemma.m))):
        if len(J) == 1:
            result = lemma41_diagnostic(
                SumSpec.automaton(m + J[0], params),
                kernel,
                config.experiment.past,
                lemma.trials,
                seed,
            )
        else:
            family = build_Rtilde(m, J, config.group.p, lemma.M, lemma.eps, lemma.eps_prime)
            result = lemma41_diagnostic(
                [SumSpec.automaton(m + j, params) for j in family.J],
                kernel,
                config.experiment.past,
                lemma.trials,
                seed,
                family=[family.sets[j].tolist() for j in family.J],
            )
        report.add({"m": m, **result.model_dump(), "within_bound": result.within_bound})
        if not result.within_bound:
            outside.append(m)
    if outside:
        report.failure = f"deviation exceeds the bound for m in {outside}"
    return report


def cmd_verify(config: ExperimentConfig) -> CsvReport:
    """PASS/FAIL line per invariant check."""
    results = run_checks(
        config.params(),
        section=config.section,
        samples=config.verify.samples,
        seed=config.seed,
        inject_fault=config.verify.inject_fault,
    )
    report = _report(config, ["section", "check", "status", "detail"])
    report.extend(results)
    failed = [f"{r.section.value}/{r.check}" for r in results if not r.passed]
    report.summary = {"passed": len(results) - len(failed), "failed": len(failed)}
    if failed:
        report.failure = f"failed checks: {', '.join(failed)}"
    return report


COMMANDS: dict[str, Callable[[ExperimentConfig], CsvReport]] = {
    "simulate": cmd_simulate,
    "cesaro": cmd_cesaro,
    "regen-stats": cmd_regen_stats,
    "density": cmd_density,
    "lemma41": cmd_lemma41,
    "verify": cmd_verify,
}
