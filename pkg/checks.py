"""
The built-in verification suites, one per command of the command line.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from arithcore import ShiftSet
from divisorsums import AdcHypothesis, adc_sweep
from errors import ConfigError
from eulerprod import (B_closed_form_22, B_value, G_cap, G_closed_form, G_first_shift, H_closed_form_22,
                       H_direct, H_eval, H_residue_probe, Z_direct, Z_eval)
from moments import (MomentConfig, polynomial_identity_checks, consistency_report, g_k, gamma_quotient_sum_check,
                     residual_trend, asymptotic_range_lint, w_kl)
from specfun import stirling_validation
from suites import RunContext, SuiteResult, register_suite
from sympoly import verify_comb_identity
from weights import OmegaWeight, PhiCutoff, omega_hat_decay_ratios, partition_of_unity_defect, phi_residue_probe

DEFAULT_I = [[0.01, 0.0], [0.02, 0.0]]
DEFAULT_J = [[0.015, 0.0], [0.025, 0.0]]
B_PRIME_CUTOFF = 1_000_000


def cx(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def shift_set(pairs, label: str) -> ShiftSet:
    try:
        return ShiftSet.from_pairs(pairs, label=label)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad shift set {label}: {e}") from e


def int_range(value) -> list[int]:
    """'1..10', '3' or a list of integers."""
    if isinstance(value, str):
        lo, sep, hi = value.partition("..")
        try:
            return list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
        except ValueError as e:
            raise ConfigError(f"bad integer range {value!r}") from e
    if isinstance(value, (int, float)):
        return [int(value)]
    return [int(v) for v in value]


def float_list(value) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        return [float(v) for v in value.split(",")]
    return [float(v) for v in value]


def _fraction_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@register_suite("polys", k=3, l=3)
def polys(params: dict, ctx: RunContext) -> SuiteResult:
    """w_{k,l} coefficients and the exact identities of the polynomial layer."""
    cg = w_kl(int(params["k"]), int(params["l"]))
    report = polynomial_identity_checks()
    coefficients = cg.coefficients()
    degree = len(coefficients) - 1
    payload = {
        "k": cg.k, "l": cg.l,
        "w_coefficients": [_fraction_text(c) for c in coefficients],
        "gamma": [_fraction_text(g) for g in cg.gamma_values],
        "identities": report.checks,
        "g3": _fraction_text(g_k(3)), "g4": _fraction_text(g_k(4)),
        "tolerance": 0,
    }
    rows = [{"degree": degree - i, "coefficient": _fraction_text(c)} for i, c in enumerate(coefficients)]
    return SuiteResult("polys", report.passed, payload, {"w_coefficients": rows})


@register_suite("sym-verify", a_max=4, m_max=5, trials=100)
def sym_verify(params: dict, ctx: RunContext) -> SuiteResult:
    """Direct F_a against its q-coefficient expansion at random points."""
    rows = []
    for a in range(1, int(params["a_max"]) + 1):
        for m in range(1, int(params["m_max"]) + 1):
            r = verify_comb_identity(a, m, int(params["trials"]), ctx.seed)
            rows.append({"a": a, "m": m, "trials": r.trials, "max_discrepancy": r.max_discrepancy,
                         "max_symmetry_defect": r.max_symmetry_defect, "tolerance": r.tolerance,
                         "passed": r.passed})
    passed = all(row["passed"] for row in rows)
    return SuiteResult("sym-verify", passed, {"cases": len(rows), "passed_cases": sum(r["passed"] for r in rows)},
                       {"comb_identity": rows})


def _dirichlet_tail(N: float, sigma: float, kl: int) -> float:
    """integral over x > N of (log x)^{kl-1}/(kl-1)! x^{-1-sigma} dx."""
    log_n = math.log(N)
    return N ** (-sigma) * sum(log_n**j / (math.factorial(j) * sigma ** (kl - j)) for j in range(kl))


def _random_shift_set(rng: np.random.Generator, k: int, label: str) -> ShiftSet:
    while True:
        shifts = rng.uniform(-0.05, 0.05, k) + 1j * rng.uniform(-0.05, 0.05, k)
        candidate = ShiftSet(tuple(complex(a) for a in shifts), label=label)
        if candidate.separation() > 0.01:
            return candidate


@register_suite("euler-check", I=DEFAULT_I, J=DEFAULT_J, s=[1.5, 0.8, 0.3], N=1_000_000,
                g_trials=20, g_primes=[2, 3, 5], g_max_power=4)
def euler_check(params: dict, ctx: RunContext) -> SuiteResult:
    """Z series against its Euler product, the k = l = 2 closed form of B, and the three forms of G."""
    I, J = shift_set(params["I"], "I"), shift_set(params["J"], "J")
    N = int(params["N"])
    z_rows = []
    passed = True
    for s in float_list(params["s"]):
        direct = Z_direct(I, J, s, N, ctx.policy.sieve_cap)
        euler = Z_eval(I, J, s, ctx.policy)
        gap = euler.relative_gap(direct)
        series_tail = _dirichlet_tail(N, s, I.k * J.k) / abs(euler.value)
        ok = gap <= 1e-3 if s >= 1.5 else gap <= max(1e-3, 10 * series_tail)
        passed &= ok
        z_rows.append({"s": s, "direct": cx(direct), "euler": cx(euler.value), "relative_gap": gap,
                       "product_tail": euler.tail_estimate, "series_tail": series_tail, "passed": ok})
    payload = {"I": I.to_pairs(), "J": J.to_pairs(), "N": N}
    if I.k == 2 and J.k == 2:
        closed = B_closed_form_22(I, J)
        # A converges like sum p^{-2}, so the closed form needs a longer product than Z
        value = B_value(I, J, ctx.policy.with_overrides(prime_cutoff=max(ctx.policy.prime_cutoff, B_PRIME_CUTOFF)))
        gap = value.relative_gap(closed)
        payload["B_closed_form"] = {"closed": cx(closed), "euler": cx(value.value), "relative_gap": gap,
                                    "tail": value.tail_estimate, "tolerance": 1e-6}
        passed &= gap <= 1e-6
    rng = np.random.default_rng(ctx.seed)
    g_rows = []
    worst = 0.0
    for trial in range(int(params["g_trials"])):
        A = _random_shift_set(rng, 2 + trial % 3, "G")
        for p in params["g_primes"]:
            for n in range(1, int(params["g_max_power"]) + 1):
                for i1 in range(A.k):
                    s = 1 - A[i1]
                    values = (G_cap(A, s, p**n), G_closed_form(A, s, p, n), G_first_shift(A, i1, p, n))
                    scale = max(abs(v) for v in values)
                    gap = max(abs(x - y) for x in values for y in values) / max(scale, 1e-300)
                    worst = max(worst, gap)
                    g_rows.append({"trial": trial, "k": A.k, "p": p, "n": n, "i1": i1, "relative_gap": gap})
    payload["G_max_relative_gap"] = worst
    payload["G_tolerance"] = 1e-10
    passed &= worst <= 1e-10
    return SuiteResult("euler-check", passed, payload, {"z_series": z_rows, "g_forms": g_rows})


@register_suite("h-check", I=DEFAULT_I, J=DEFAULT_J, s=1.5, R=10_000, Q=10_000, offsets=[1e-4, 1e-5])
def h_check(params: dict, ctx: RunContext) -> SuiteResult:
    """H double series against its zeta factorization, and the residue probe at its pole."""
    I, J = shift_set(params["I"], "I"), shift_set(params["J"], "J")
    s = complex(params["s"])
    rows = []
    passed = True
    for i1 in range(I.k):
        for i2 in range(J.k):
            direct = H_direct(I, J, i1, i2, s, int(params["R"]), int(params["Q"]), ctx.policy.sieve_cap)
            product = H_eval(I, J, i1, i2, s, ctx.policy)
            allowed = direct.tail_estimate + product.tail_estimate * abs(product.value) + 1e-8 * abs(product.value)
            gap = abs(direct.value - product.value)
            probes = H_residue_probe(I, J, i1, i2, float_list(params["offsets"]), ctx.policy)
            stability = abs(probes[0] / probes[1] - 1) if len(probes) > 1 else 0.0
            ok = gap <= allowed and stability <= 0.05
            row = {"i1": i1, "i2": i2, "direct": cx(direct.value), "factorized": cx(product.value),
                   "abs_gap": gap, "allowed": allowed, "residues": [cx(p) for p in probes],
                   "residue_stability": stability, "passed": ok}
            if I.k == 2 and J.k == 2:
                row["closed_form_gap"] = product.relative_gap(H_closed_form_22(I, J, i1, i2, s))
                row["closed_form_tolerance"] = max(1e-6, product.tail_estimate)
                ok &= row["closed_form_gap"] <= row["closed_form_tolerance"]
                row["passed"] = ok
            passed &= ok
            rows.append(row)
    return SuiteResult("h-check", passed, {"s": cx(s), "R": params["R"], "Q": params["Q"]}, {"h_values": rows})


@register_suite("adc", I=DEFAULT_I, J=DEFAULT_J, X=[1e3, 1e4, 1e5], r="1..10", method="euler",
                theta=0.75, C=0.0, beta=0.5, threshold=0.10)
def adc(params: dict, ctx: RunContext) -> SuiteResult:
    """Brute-force additive divisor sums against the conjectured main term over boxes and shifts."""
    I, J = shift_set(params["I"], "I"), shift_set(params["J"], "J")
    boxes = float_list(params["X"])
    hyp = AdcHypothesis(float(params["theta"]), float(params["C"]), float(params["beta"]))
    try:
        sweep = adc_sweep(I, J, boxes, int_range(params["r"]), hyp, ctx.jobs, params["method"])
    except ValueError as e:
        raise ConfigError(str(e)) from e
    rows = [{"X": c.X, "r": c.r, "brute": cx(c.brute), "main": cx(c.main), "delta": cx(c.delta),
             "relative": c.relative} for c in sweep.comparisons]
    summaries = [{"X": s.X, "H": s.H, "total_abs_delta": s.total_abs_delta,
                  "relative_discrepancy": s.relative_discrepancy, "ratio_to_bound": s.ratio_to_bound}
                 for s in sweep.summaries]
    relative = [s.relative_discrepancy for s in sorted(sweep.summaries, key=lambda s: s.X)]
    decreasing = all(x > y for x, y in zip(relative, relative[1:]))
    passed = decreasing and bool(relative) and relative[-1] < float(params["threshold"])
    payload = {"summaries": summaries, "decreasing": decreasing, "threshold": params["threshold"],
               "hypothesis": {"theta": hyp.theta, "C": hyp.C, "beta": hyp.beta}}
    return SuiteResult("adc", passed, payload, {"adc": rows, "adc_summary": summaries})


@register_suite("moment", k=2, l=2, T=[500.0, 1000.0, 2000.0], eta=0.2, b=0.8, rho=0.1,
                residual_threshold=0.15, diagonal_tolerance=1e-4)
def moment(params: dict, ctx: RunContext) -> SuiteResult:
    """Direct moment against M0 + M1 over a grid of heights."""
    heights = sorted(float_list(params["T"]))
    try:
        configs = [MomentConfig.standard(int(params["k"]), int(params["l"]), T, float(params["eta"]),
                                         float(params["b"]), float(params["rho"]), ctx.policy) for T in heights]
    except ValueError as e:
        raise ConfigError(str(e)) from e
    reports = consistency_report(configs, ctx.jobs)
    ratios, decreasing = residual_trend(reports)
    rows = []
    for cfg, r in zip(configs, reports):
        rows.append({"T": r.T, "eta": r.eta, "K": cfg.K, "direct": cx(r.direct), "diag_direct": cx(r.diag_direct),
                     "m0": cx(r.m0), "m1": cx(r.m1), "residual": cx(r.residual),
                     "relative_residual": r.relative_residual, "diagonal_gap": r.diagonal_gap,
                     **{k: v for k, v in r.tails.items()}})
    diagonal_ok = all(r.diagonal_gap <= float(params["diagonal_tolerance"]) for r in reports)
    passed = decreasing and diagonal_ok and ratios[-1] <= float(params["residual_threshold"])
    lint = asymptotic_range_lint(configs[0])
    payload = {
        "reports": rows,
        "per_swap_terms": {str(r.T): {f"{i1},{i2}": cx(v) for (i1, i2), v in r.per_swap_terms.items()}
                           for r in reports},
        "relative_residuals": ratios, "decreasing": decreasing, "diagonal_ok": diagonal_ok,
        "in_asymptotic_range": lint.in_range, "lint": lint.messages,
    }
    return SuiteResult("moment", passed, payload, {"moment": rows})


@register_suite("weights-probe", T=1000.0, b=0.8, rho=0.1, samples=10_000, x_max=1e8, decay_windows=2)
def weights_probe(params: dict, ctx: RunContext) -> SuiteResult:
    """Partition of unity, the Phi residue, the decay of omega_hat and the Gamma-quotient asymptotics."""
    rng = np.random.default_rng(ctx.seed)
    x = np.exp(rng.uniform(0.0, math.log(float(params["x_max"])), int(params["samples"])))
    partition_defect = partition_of_unity_defect(x)

    residue = phi_residue_probe(PhiCutoff(float(params["rho"])))
    residue_defect = abs(residue - 1)

    T = float(params["T"])
    omega = OmegaWeight.standard(T, float(params["b"]))
    ratios = omega_hat_decay_ratios(omega, int(params["decay_windows"]))
    decay_ok = all(r <= 1 / 8 for r in ratios)

    fits = stirling_validation(seed=ctx.seed)
    constants = [f.constant for f in fits]
    stirling_ok = max(constants) <= 2 * min(constants)
    merge = gamma_quotient_sum_check(seed=ctx.seed)

    passed = partition_defect <= 1e-12 and residue_defect <= 1e-6 and decay_ok and stirling_ok
    payload = {
        "partition_defect": partition_defect, "partition_tolerance": 1e-12,
        "phi_residue": residue, "phi_residue_tolerance": 1e-6,
        "decay_ratios": ratios, "decay_ratio_bound": 1 / 8,
        "stirling_constants": {str(f.t): f.constant for f in fits}, "stirling_stable": stirling_ok,
        "gamma_merge_gap": {str(t): gap for t, gap in merge.items()},
    }
    return SuiteResult("weights-probe", passed, payload)
