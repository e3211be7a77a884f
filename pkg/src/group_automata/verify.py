"""The invariant suite behind `group-automata verify`.

Checks register themselves per section with `@check`; each returns
(passed, detail) and any library error it raises counts as a failure.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from dataclasses import field
from enum import Enum

import numpy as np
from pydantic import BaseModel

from group_automata.automaton.core import AutomatonParams
from group_automata.automaton.core import Word
from group_automata.automaton.core import apply_closed_form
from group_automata.automaton.core import iterate
from group_automata.cesaro.exact import exact_sum_distribution
from group_automata.cesaro.lemma import SumSpec
from group_automata.cesaro.lemma import build_Rtilde
from group_automata.cesaro.lemma import validate_rtilde
from group_automata.cesaro.output import Mode
from group_automata.cesaro.scan import cesaro_scan
from group_automata.chains.kernels import Kernel
from group_automata.chains.kernels import MarkovKernel
from group_automata.chains.kernels import MixtureKernel
from group_automata.chains.kernels import ProductKernel
from group_automata.chains.kernels import a_scalar_enumerated
from group_automata.chains.layout import build_layout
from group_automata.chains.sampler import chi_square_uniformity
from group_automata.chains.sampler import sample_path
from group_automata.errors import ConfigError
from group_automata.errors import GroupAutomataError
from group_automata.errors import IneligibleError
from group_automata.group.core import GroupSpec
from group_automata.group.core import is_unit_scalar
from group_automata.group.digits import density_set
from group_automata.group.digits import lucas_binomial
from group_automata.group.system import check_system_S
from group_automata.renewal.core import epsilon
from group_automata.renewal.core import miss_probability
from group_automata.renewal.core import residual_distribution
from group_automata.renewal.core import residual_tail_exact
from group_automata.renewal.core import simulate_renewal
from group_automata.renewal.laws import GeometricLaw
from group_automata.renewal.laws import TwoPointLaw

logger = logging.getLogger(__name__)

RTILDE_M = 1 << 20
LUCAS_TOP = 1000
SYSTEM_COUNT = 200
CLOSED_FORM_M = 64

SMALL_GROUPS = (
    GroupSpec.cyclic(2),
    GroupSpec.cyclic(2, 2),
    GroupSpec.cyclic(3),
    GroupSpec(p=2, exponents=(1, 1)),
)


class Section(str, Enum):
    GROUP = "group"
    AUTOMATON = "automaton"
    CHAINS = "chains"
    RENEWAL = "renewal"
    CESARO = "cesaro"


class CheckResult(BaseModel):
    section: Section
    check: str
    status: str
    detail: str

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def line(self) -> str:
        return f"{self.status} {self.section.value}/{self.check}: {self.detail}"


@dataclass
class VerifyContext:
    params: AutomatonParams
    samples: int = 200
    seed: int = 0
    inject_fault: bool = False
    rng: np.random.Generator = field(init=False)

    def __post_init__(self) -> None:
        self.rng = np.random.default_rng(self.seed)


CheckFn = Callable[[VerifyContext], tuple[bool, str]]

REGISTRY: dict[Section, list[tuple[str, CheckFn]]] = {section: [] for section in Section}


def check(section: Section, name: str) -> Callable[[CheckFn], CheckFn]:
    def register(fn: CheckFn) -> CheckFn:
        REGISTRY[section].append((name, fn))
        return fn

    return register


def _reduced(used: int, full: int) -> str:
    return f" (reduced scale; full is {full})" if used < full else ""


@check(Section.GROUP, "lucas-vs-factorial")
def _lucas(ctx: VerifyContext) -> tuple[bool, str]:
    top = min(5 * ctx.samples, LUCAS_TOP)
    for p in (2, 3, 5):
        for m in range(top + 1):
            for k in range(m + 1):
                if lucas_binomial(m, k, p) != math.comb(m, k) % p:
                    return False, f"C({m}, {k}) mod {p}"
    return True, f"m, k <= {top}, p in 2, 3, 5" + _reduced(top, LUCAS_TOP)


def _h_prime_matrix(rng: np.random.Generator, ell: int, spec: GroupSpec) -> list[list[int]]:
    p, mod = spec.p, spec.exponent_modulus
    units = [a for a in range(1, mod) if a % p]
    matrix = rng.integers(0, mod, size=(ell, ell)).tolist()
    for i in range(ell):
        matrix[i][i] = int(rng.choice(units))
        for j in range(i + 1, ell):
            matrix[i][j] = p * int(rng.integers(0, mod))
    return matrix


@check(Section.GROUP, "system-S")
def _system(ctx: VerifyContext) -> tuple[bool, str]:
    count = min(ctx.samples, SYSTEM_COUNT)
    for i in range(count):
        spec = SMALL_GROUPS[i % len(SMALL_GROUPS)]
        ell = int(ctx.rng.integers(1, 4))
        matrix = _h_prime_matrix(ctx.rng, ell, spec)
        if not check_system_S(matrix, spec):
            return False, f"{matrix} over {spec} has a nonzero solution"
    return True, f"{count} (H') systems uniquely solvable" + _reduced(count, SYSTEM_COUNT)


@check(Section.GROUP, "density-increasing")
def _density(ctx: VerifyContext) -> tuple[bool, str]:
    values = [density_set(1 << t, 0.4, 2)[1] for t in range(8, 15)]
    ok = all(b > a for a, b in zip(values, values[1:]))
    return ok, "R_M density along M = 2^8..2^14: " + ", ".join(f"{v:.4f}" for v in values)


@check(Section.AUTOMATON, "coprime-parameters")
def _coprime(ctx: VerifyContext) -> tuple[bool, str]:
    spec = ctx.params.spec
    mu = ctx.params.mu * spec.p if ctx.inject_fault else ctx.params.mu
    bad = [
        f"{name}={value}"
        for name, value in (("mu", mu), ("nu", ctx.params.nu))
        if not is_unit_scalar(value, spec)
    ]
    if bad:
        return False, f"is_unit_scalar fails for {', '.join(bad)} with p={spec.p}"
    return True, f"mu={mu}, nu={ctx.params.nu} prime to p={spec.p}"


@check(Section.AUTOMATON, "closed-form-vs-iterate")
def _closed_form(ctx: VerifyContext) -> tuple[bool, str]:
    for spec in SMALL_GROUPS:
        params = AutomatonParams(mu=1, nu=1 if spec.p == 2 else 2, spec=spec)
        for _ in range(max(1, ctx.samples // len(SMALL_GROUPS))):
            m = int(ctx.rng.integers(0, CLOSED_FORM_M + 1))
            codes = ctx.rng.integers(0, spec.q, size=m + 1)
            w = Word.from_codes(0, codes.tolist(), spec)
            if apply_closed_form(w, m, 0, params) != iterate(w, m, params)[0]:
                return False, f"closed form differs from iterate over {spec} at m={m}"
    return True, f"{ctx.samples} random words, m <= {CLOSED_FORM_M}"


def _test_kernels() -> list[Kernel]:
    z2 = GroupSpec.cyclic(2)
    return [
        ProductKernel.bernoulli(0.3),
        MarkovKernel.sticky(z2, 0.7),
        MarkovKernel.sticky(GroupSpec.cyclic(3), 0.6, order=2),
        MixtureKernel.sticky(z2, 0.7),
    ]


@check(Section.CHAINS, "layout-coverage")
def _layout(ctx: VerifyContext) -> tuple[bool, str]:
    for kernel in _test_kernels():
        for _ in range(10):
            past = ctx.rng.integers(0, kernel.q, size=24).tolist()
            layout = build_layout(kernel, past, 16)
            if layout.covered > 1.0 + 1e-12:
                return False, f"{kernel.family} layout covers {layout.covered}"
            if kernel.memory is not None and layout.covered < 1.0 - 1e-12:
                return False, f"{kernel.family} layout leaves {1 - layout.covered:.3e} uncovered"
    return True, "lengths nonnegative, finite-memory layouts cover [0, 1)"


@check(Section.CHAINS, "a-scalars-vs-enumeration")
def _a_scalars(ctx: VerifyContext) -> tuple[bool, str]:
    for kernel in _test_kernels():
        for k in range(4):
            if abs(kernel.a_scalar(k) - a_scalar_enumerated(kernel, k)) > 1e-12:
                return False, f"{kernel.family} a_{k}"
    return True, "a_0..a_3 match brute force"


@check(Section.CHAINS, "regeneration-uniformity")
def _uniformity(ctx: VerifyContext) -> tuple[bool, str]:
    kernel = MarkovKernel.sticky(GroupSpec.cyclic(2), 0.7)
    sample = sample_path(kernel, [1], 50_000, ctx.seed)
    _, pvalue = chi_square_uniformity(sample.xs[sample.regens], kernel.q)
    return pvalue >= 0.001, f"{len(sample.regens)} regenerations, chi-square p={pvalue:.4f}"


@check(Section.RENEWAL, "geometric-miss")
def _geometric(ctx: VerifyContext) -> tuple[bool, str]:
    law = GeometricLaw(0.25)
    A = range(8)
    est = miss_probability(law, A, 4000, ctx.seed)
    exact = 0.75**8
    ok = abs(est.estimate - exact) <= 4 * max(est.stderr, 1e-3)
    return ok, f"estimate {est.estimate:.4f} +- {est.stderr:.4f}, exact {exact:.4f}"


@check(Section.RENEWAL, "epsilon-dominates")
def _dominates(ctx: VerifyContext) -> tuple[bool, str]:
    law = GeometricLaw(0.25)
    for n in (4, 8, 16):
        est = miss_probability(law, range(n), 2000, ctx.seed + n)
        bound = epsilon(law, n)
        if bound < est.estimate - 3 * est.stderr:
            return False, f"eps({n}) = {bound:.4f} below estimate {est.estimate:.4f}"
    return True, "eps(|A|) >= miss probability for |A| in 4, 8, 16"


@check(Section.RENEWAL, "residual-exact")
def _residual(ctx: VerifyContext) -> tuple[bool, str]:
    law = TwoPointLaw(1, 3, 0.5)
    stats = simulate_renewal(law, 100_000, ctx.seed, stationary=False)
    est = residual_distribution(stats, 6, 1)
    exact = residual_tail_exact(law, 6, 1)
    ok = abs(est.estimate - exact) <= 4 * max(est.stderr, 1e-3)
    return ok, f"F_6(1): {est.estimate:.4f} +- {est.stderr:.4f} vs {exact:.4f}"


@check(Section.CESARO, "parity-oracle")
def _parity(ctx: VerifyContext) -> tuple[bool, str]:
    theta = 0.3
    kernel = ProductKernel.bernoulli(theta)
    for k in range(1, 7):
        n = 1 << k
        sums = SumSpec(R=tuple(range(n)), coeffs=(1,) * n, spec=kernel.spec)
        got = exact_sum_distribution(sums, kernel).probabilities[0]
        want = (1 + (1 - 2 * theta) ** n) / 2
        if abs(got - want) > 1e-10:
            return False, f"P(S=0) = {got} for 2^{k} ones, expected {want}"
    return True, "P(S=0) = (1 + (1-2 theta)^n)/2 for n = 2..64"


@check(Section.CESARO, "uniform-fixed-point")
def _fixed_point(ctx: VerifyContext) -> tuple[bool, str]:
    spec = ctx.params.spec
    report = cesaro_scan(
        ProductKernel.uniform(spec), [], (0, 1), [1 << t for t in range(7)], ctx.params, Mode.EXACT
    )
    worst = max(report.tv)
    return worst <= 1e-10, f"max tv {worst:.2e} under the uniform product law"


@check(Section.CESARO, "rtilde-h1-h3")
def _rtilde(ctx: VerifyContext) -> tuple[bool, str]:
    found: dict[int, int] = {}
    for p in (2, 3):
        found[p] = 0
        for _ in range(20 * ctx.samples):
            m = int(ctx.rng.integers(0, RTILDE_M - 2))
            try:
                family = build_Rtilde(m, (0, 1), p, RTILDE_M, eps=0.47, eps_prime=0.02)
            except IneligibleError:
                continue
            validate_rtilde(m, family.J, family.sets, p)
            found[p] += 1
            if found[p] == ctx.samples:
                break
    counts = ", ".join(f"p={p}: {n}" for p, n in found.items())
    return all(found.values()), f"eligible (m, J) families passing (H1)-(H3): {counts}"


def run_checks(
    params: AutomatonParams,
    section: str | None = None,
    samples: int = 200,
    seed: int = 0,
    inject_fault: bool = False,
) -> list[CheckResult]:
    if section is None:
        sections = list(Section)
    else:
        try:
            sections = [Section(section)]
        except ValueError as e:
            choices = ", ".join(s.value for s in Section)
            raise ConfigError(f"unknown verify section {section!r}; choose from {choices}") from e
    ctx = VerifyContext(params=params, samples=samples, seed=seed, inject_fault=inject_fault)
    results = []
    for sec in sections:
        for name, fn in REGISTRY[sec]:
            try:
                ok, detail = fn(ctx)
            except GroupAutomataError as e:
                ok, detail = False, f"{type(e).__name__}: {e}"
            result = CheckResult(
                section=sec, check=name, status="PASS" if ok else "FAIL", detail=detail
            )
            log = logger.info if ok else logger.warning
            log("%s", result.line())
            results.append(result)
    return results
