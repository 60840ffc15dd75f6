"""
sparsedisj command line.

Every subcommand writes one report (JSON by default) to --out or stdout and
exits 0 when everything it asserts holds, 2 when a verification failed (the
report, counterexamples included, is still written) and 1 on a usage or
configuration error.
"""
from argparse import ArgumentParser, Namespace
from math import sqrt
from typing import Callable, Sequence
import logging
import sys
import time

from ..channel import (ConstantProtocol, InvariantViolation, Output, ProtocolError, SharedRandomness, run_trials,
                       zero_round_baseline_error)
from ..disjointness import (ExistsEqualReduction, FolkloreHashing, Schedule, SparseDisjointness,
                            UniformPointPairs, folklore_false_positive_bound, input_factory,
                            iterated_log, log_star, make_protocol, normalized_bits, within_band)
from ..disjointness.schedule import DEFAULT_C
from ..downshift import (BudgetExceeded, PipelineRefused, WitnessNotFound, downshift_suite,
                         isoperimetry_pipeline, isoperimetry_suite, list_lemma_suite, verify_conjecture)
from ..downshift.verify import conjecture_suite
from ..downshift.concave import ConcaveTable
from ..embedding import EmbeddingParams, estimate_empty_rate, estimate_lemma_error
from ..grid import GridParams, GridSet
from .config import ConfigError, ExperimentConfig, FORMATS, default_jobs
from .goldens import golden_transcripts, record_goldens
from .reports import Report, write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
COMMON = ('subcommand', 'handler', 'seed', 'trials', 'out', 'format', 'jobs', 'verbose')


class _Parser(ArgumentParser):
    """Usage errors exit with 1, the code for every invalid configuration."""
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma separated list of integers: {text!r}")


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _simulate_disjointness(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    k = p['k']
    m = p['m'] or 16 * k * k
    _require(m >= 2 * k, f"universe m={m} cannot hold two disjoint {k}-sets")
    protocol = make_protocol(p['protocol'], k, p['r'], p['c'], not p['no_early_stop'], p['hash_bits'])
    summary = run_trials(protocol, input_factory(p['inputs'], m, k), cfg.trials, cfg.seed, cfg.jobs)
    results = {'m': m, 'summary': summary}
    verdicts = {'one_sided': summary.false_disjoint == 0}
    bound = None
    if isinstance(protocol, SparseDisjointness):
        results['schedule'] = protocol.schedule
        bound = protocol.schedule.error_bound()
    elif isinstance(protocol, FolkloreHashing):
        bound = folklore_false_positive_bound(k, protocol.params['hash_bits'])
    if bound is not None:
        results['error_bound'] = bound
        if p['inputs'] == "disjoint":
            verdicts['error_bound'] = summary.ci95[0] <= bound
    return Report(cfg.config, results, verdicts)


def _simulate_exists_equal(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    n = p['n']
    _require(n >= 1, f"dimension n must be positive: {n}")
    grid = GridParams(4 * n, n)
    baseline = zero_round_baseline_error(n)
    if p['protocol'] == "constant":
        protocol = ConstantProtocol(Output.DISJOINT)
    else:
        protocol = ExistsEqualReduction(make_protocol(p['protocol'], n, p['r'], p['c']), grid)
    summary = run_trials(protocol, UniformPointPairs(grid), cfg.trials, cfg.seed, cfg.jobs)
    verdicts = {}
    if p['protocol'] == "constant":
        err = float(baseline.error)
        sigma = sqrt(err * (1 - err) / summary.trials) if summary.trials else 0.0
        verdicts['matches_baseline'] = abs(summary.error_rate - err) <= 4 * sigma
    else:
        verdicts['one_sided'] = summary.false_disjoint == 0
    return Report(cfg.config, {'grid': grid, 'summary': summary, 'zero_round_baseline': baseline}, verdicts)


def _verify_downshift(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    params = GridParams(p['t'], p['n'])
    rng = SharedRandomness(cfg.seed).stream("downshift")
    report = downshift_suite(params, p['random_sets'], rng, p['density'])
    _require(report.sets_checked > 0, f"{params} is too large to enumerate; pass --random-sets")
    return Report(cfg.config, report, {'downshift': report.verdict})


def _verify_list_lemma(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    params = GridParams(p['t'], p['n'])
    report = list_lemma_suite(params, p['M'], p['f'], p['I'])
    return Report(cfg.config, report, {'list_lemma': report.verdict})


def _verify_conjecture(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    if p['suite']:
        reports = conjecture_suite(p['budget'], p['f'], p['t_max'], p['n_max'], cfg.jobs)
        verdicts = {f"t{r.params['t']}n{r.params['n']}k{r.params['k']}M{r.params['M']}-{r.params['f']}": r.verdict
                    for r in reports}
        return Report(cfg.config, reports, verdicts)
    for name in ('t', 'n', 'k', 'M'):
        _require(p[name] is not None, f"verify-conjecture needs --{name} unless --suite is given")
    reports = [verify_conjecture(p['t'], p['n'], p['k'], p['M'], name, p['budget'], cfg.jobs) for name in p['f']]
    results = reports[0] if len(reports) == 1 else reports
    return Report(cfg.config, results, {r.params['f']: r.verdict for r in reports})


def _verify_isoperimetry(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    params = GridParams(p['t'], p['n'])
    rng = SharedRandomness(cfg.seed)
    samples = p['samples'] or cfg.trials or 10 ** 5
    if p['random_sets']:
        _require(not p['box'], "--box and --random-sets are exclusive")
        density = 0.5 if p['density'] is None else p['density']
        report = isoperimetry_suite(params, p['random_sets'], rng.stream("sets"), density,
                                    p['side'], p['M'], samples)
        _require(report.sets_checked > 0, f"every one of {p['random_sets']} random sets was refused")
        verdicts = {'consequences': report.consequence_failures == 0}
        if not report.forced:
            verdicts['theorem_empty'] = report.theorem_empty_failures == 0
            verdicts['theorem_log'] = report.theorem_log_failures == 0
        return Report(cfg.config, report, verdicts)
    if p['box']:
        S = GridSet.box(params, p['box'])
    elif p['density'] is not None:
        S = GridSet.random(params, rng.stream("set"), p['density'])
    else:
        S = GridSet.full(params)
    _require(len(S) > 0, "the input set is empty")
    T, report = isoperimetry_pipeline(S, p['side'], p['M'], samples, rng.stream("isoperimetry"))
    verdicts = {'consequence_empty': report.consequence_empty, 'consequence_log': report.consequence_log}
    if not report.forced:
        verdicts['theorem_empty'] = report.theorem_empty
        verdicts['theorem_log'] = report.theorem_log
    return Report(cfg.config, {'S_size': len(S), 'T_size': len(T), 'pipeline': report}, verdicts)


def _embedding_params(p: dict) -> EmbeddingParams:
    base = EmbeddingParams.desk() if p['preset'] == "desk" else EmbeddingParams.load(p['preset'])
    overrides = {k: p[k] for k in ('n', 'M', 'R', 'side', 't') if p[k] is not None}
    if not overrides:
        return base
    if 'n' in overrides and 't' not in overrides:
        overrides['t'] = 0
    return EmbeddingParams.from_dict(base.config | overrides)


def _estimate_embedding_error(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    params = _embedding_params(p)
    cases = ("match0", "matchR") if p['case'] == "both" else (p['case'],)
    results = {'params': params}
    verdicts = {}
    for case in cases:
        report = estimate_lemma_error(params, case, cfg.trials, cfg.seed, cfg.jobs, p['bypass'])
        results[case] = report
        if not p['bypass']:
            verdicts[case] = report.verdict
            if report.exact_within_3sigma is not None:
                verdicts[f"{case}_exact"] = report.exact_within_3sigma
    if p['empty_rate']:
        report = estimate_empty_rate(params, p['empty_rate'], cfg.seed)
        results['empty_rate'] = report
        verdicts['empty_rate'] = report.verdict
    return Report(cfg.config, results, verdicts)


def _sweep(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    rows = []
    runs = []
    band: dict[int, list[float]] = {}
    for k in p['k']:
        m = p['m'] or 16 * k * k
        for r in p['r']:
            if k < 4 or not 1 <= r <= log_star(k):
                logger.warning(f"sweep: skipping k={k} r={r}, r must lie in 1..log*(k)")
                continue
            protocol = SparseDisjointness(Schedule.compute(k, r, p['c']))
            summary = run_trials(protocol, input_factory(p['inputs'], m, k), cfg.trials, cfg.seed, cfg.jobs)
            rows.append({
                'k': k,
                'r': r,
                'total_bits': summary.mean_bits,
                'bits_over_k_logr_k': summary.mean_bits / (k * iterated_log(r, k)),
                'error_rate': summary.error_rate,
            })
            runs.append(summary)
            band.setdefault(r, []).append(normalized_bits(k, r, p['c']))
    _require(bool(rows), "sweep has no valid (k, r) combination")
    for r, ratios in band.items():
        logger.info(f"sweep: r={r} full-run bits/(k log^(r) k) {min(ratios):.4g}..{max(ratios):.4g}")
    verdicts = {
        'one_sided': all(s.false_disjoint == 0 for s in runs),
        'bits_band': all(within_band(ratios) for ratios in band.values()),
    }
    return Report(cfg.config, runs, verdicts, rows=rows)


def _goldens(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    _require(bool(p['record']) != bool(p['check']), "goldens needs exactly one of --record or --check")
    if p['record']:
        record_goldens(p['record'])
        return Report(cfg.config, {'recorded': p['record']}, {})
    check = golden_transcripts(p['check'])
    return Report(cfg.config, check, {'goldens': check.verdict})


def _common(parser: ArgumentParser, trials: int = 0) -> None:
    parser.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    parser.add_argument("--trials", type=int, default=trials, help=f"number of trials (default {trials})")
    parser.add_argument("--format", choices=FORMATS, default=None, help="report format")
    parser.add_argument("--out", default="-", help="report path, - for stdout")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes (default $SPARSEDISJ_JOBS or all cores)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")


def build_parser() -> ArgumentParser:
    parser = _Parser(prog="sparsedisj", description="Sparse set disjointness simulations and grid isoperimetry verifiers")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sp = sub.add_parser("simulate-disjointness", help="Monte Carlo runs of a disjointness protocol")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--m", type=int, default=None, help="universe size (default 16k^2)")
    sp.add_argument("--c", type=float, default=DEFAULT_C)
    sp.add_argument("--protocol", choices=("sparse", "hw", "folklore"), default="sparse")
    sp.add_argument("--inputs", choices=("disjoint", "intersecting"), default="disjoint")
    sp.add_argument("--hash-bits", type=int, default=None)
    sp.add_argument("--no-early-stop", action="store_true")
    _common(sp, 1000)
    sp.set_defaults(handler=_simulate_disjointness)

    sp = sub.add_parser("simulate-exists-equal", help="exists-equal through the disjointness reduction")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--c", type=float, default=DEFAULT_C)
    sp.add_argument("--protocol", choices=("sparse", "hw", "folklore", "constant"), default="sparse")
    _common(sp, 1000)
    sp.set_defaults(handler=_simulate_exists_equal)

    sp = sub.add_parser("verify-downshift", help="down-shift invariants over all or random subsets")
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--random-sets", type=int, default=0)
    sp.add_argument("--density", type=float, default=0.5)
    _common(sp)
    sp.set_defaults(handler=_verify_downshift)

    sp = sub.add_parser("verify-list-lemma", help="perimeter never grows under down, over all subsets")
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--M", type=_int_list, default=[1])
    sp.add_argument("--f", type=_str_list, default=list(ConcaveTable.names()))
    sp.add_argument("--I", type=_int_list, default=None)
    _common(sp)
    sp.set_defaults(handler=_verify_list_lemma)

    sp = sub.add_parser("verify-conjecture", help="is the box the perimeter minimiser among equal-size sets")
    sp.add_argument("--t", type=int, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--f", type=_str_list, default=["counting"])
    sp.add_argument("--budget", type=int, default=10 ** 7)
    sp.add_argument("--suite", action="store_true", help="every configuration that fits the budget")
    sp.add_argument("--t-max", type=int, default=4)
    sp.add_argument("--n-max", type=int, default=3)
    _common(sp)
    sp.set_defaults(handler=_verify_conjecture)

    sp = sub.add_parser("verify-isoperimetry", help="down, box witness, extract T and the N_x statistics")
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--box", type=_int_list, default=None, help="S is the box with these sides")
    sp.add_argument("--density", type=float, default=None, help="S is a random set of this density")
    sp.add_argument("--side", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--random-sets", type=int, default=0, help="run the pipeline on this many random S")
    _common(sp)
    sp.set_defaults(handler=_verify_isoperimetry)

    sp = sub.add_parser("estimate-embedding-error", help="Monte Carlo of the embedding error constants")
    sp.add_argument("--preset", default="desk", help="desk or a JSON parameter file")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--R", type=int, default=None)
    sp.add_argument("--side", type=int, default=None)
    sp.add_argument("--t", type=int, default=None)
    sp.add_argument("--case", choices=("match0", "matchR", "both"), default="both")
    sp.add_argument("--empty-rate", type=int, default=0, metavar="TRIALS",
                    help="also estimate Pr[N_X empty] over this many uniform X")
    sp.add_argument("--bypass", action="store_true", help="use X in place of X'")
    _common(sp, 10 ** 4)
    sp.set_defaults(handler=_estimate_embedding_error)

    sp = sub.add_parser("sweep", help="bits and error rate of the sparse protocol over k and r")
    sp.add_argument("--k", type=_int_list, default=[64, 256, 1024, 4096])
    sp.add_argument("--r", type=_int_list, default=[1, 2, 3])
    sp.add_argument("--m", type=int, default=None, help="universe size (default 16k^2)")
    sp.add_argument("--c", type=float, default=DEFAULT_C)
    sp.add_argument("--inputs", choices=("disjoint", "intersecting"), default="disjoint")
    _common(sp, 200)
    sp.set_defaults(handler=_sweep, default_format="csv")

    sp = sub.add_parser("goldens", help="record or check the golden transcripts")
    sp.add_argument("--record", default=None, metavar="PATH")
    sp.add_argument("--check", default=None, metavar="PATH")
    _common(sp)
    sp.set_defaults(handler=_goldens)
    return parser


def setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def make_config(args: Namespace) -> ExperimentConfig:
    params = {k: v for k, v in vars(args).items() if k not in COMMON and k != 'default_format'}
    cfg = ExperimentConfig(args.subcommand, params)
    cfg.config = {
        'seed': args.seed,
        'trials': args.trials,
        'out': args.out,
        'format': args.format or getattr(args, 'default_format', "json"),
        'jobs': args.jobs if args.jobs is not None else default_jobs(),
    }
    cfg.validate()
    return cfg


def dispatch(cfg: ExperimentConfig, handler: Callable[[ExperimentConfig], Report]) -> Report:
    start = time.perf_counter()
    report = handler(cfg)
    report.wall_clock = time.perf_counter() - start
    return report


def main(argv: Sequence[str]|None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        cfg = make_config(args)
        logger.info(f"running {cfg}")
        report = dispatch(cfg, args.handler)
    except (ConfigError, BudgetExceeded, PipelineRefused, ProtocolError, ValueError, OverflowError) as e:
        print(f"sparsedisj {args.subcommand}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, WitnessNotFound) as e:
        logger.error(f"{args.subcommand}: self-check failed: {e}")
        print(f"sparsedisj {args.subcommand}: {e}", file=sys.stderr)
        return EXIT_FAILED
    write_report(report, cfg.out_path, cfg.format)
    if not report.verdict:
        logger.warning(f"{report}")
        return EXIT_FAILED
    return EXIT_OK
