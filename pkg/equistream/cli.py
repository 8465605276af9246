"""``equistream`` command line: verification suites, benchmarks, fixtures and convention dumps.

Machine-readable output goes to stdout or ``--out``; diagnostics go to stderr through the logger.
Exit codes: 0 success, 1 failed property or correctness gate, 2 usage error.
"""
import argparse
import sys
from typing import List

import numpy as np
from pydantic import ValidationError

from equistream.core.attention.fixture import AttentionFixture, save_fixture
from equistream.core.bench import (
    build_neighbors,
    gen_fcc_system,
    run_attention_bench,
    run_tp_bench,
    save_system,
)
from equistream.core.config.bench import ATTENTION_VARIANTS, PRECISIONS, BenchCfg, TPBenchCfg
from equistream.core.config.verify import SUITES, ToleranceCfg, VerifyCfg
from equistream.core.eaas.reindex import dump_reindex_rules
from equistream.core.errors import CorrectnessGateError
from equistream.core.message.translation import dump_translation_tables
from equistream.core.so3.conventions import dump_conventions
from equistream.core.util import log, set_log_level
from equistream.core.verify import run_suites
from equistream.macros import gm
from equistream_extension import import_extensions

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _int_list(text: str) -> List[int]:
    try:
        values = [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma-separated integers, got {text!r}')
    if not values:
        raise argparse.ArgumentTypeError('expected at least one integer')
    return values


def _variant_list(text: str) -> List[str]:
    values = [v.strip() for v in text.split(',') if v.strip()]
    unknown = [v for v in values if v not in ATTENTION_VARIANTS]
    if unknown or not values:
        raise argparse.ArgumentTypeError(f'variants must be a subset of {",".join(ATTENTION_VARIANTS)}, got {text!r}')
    return values


def _tolerance(text: str):
    key, sep, value = text.partition('=')
    if not sep or key not in ToleranceCfg.model_fields:
        raise argparse.ArgumentTypeError(f'expected key=value with key in {sorted(ToleranceCfg.model_fields)}')
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'tolerance {key} must be a number, got {value!r}')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-level', default='warning', choices=['debug', 'info', 'warning', 'error', 'critical'])
    common.add_argument('--seed', type=int, default=None, help='base seed (default: $EQUISTREAM_SEED or 0)')
    common.add_argument('--out', default=None, help='write the result here instead of stdout')

    parser = argparse.ArgumentParser(prog='equistream', description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest='command', required=True)

    verify = sub.add_parser('verify', parents=[common], help='run property suites')
    verify.add_argument('--suite', action='append', choices=SUITES, help='suite to run, repeatable (default: all)')
    verify.add_argument('--tol', action='append', type=_tolerance, default=[], metavar='KEY=VALUE')
    verify.add_argument('--draws', type=int, default=None, help='random draws of the EAAS exactness sweep')
    verify.add_argument('--rotations', type=int, default=None, help='random rotations per equivariance check')

    attn = sub.add_parser('bench-attn', parents=[common], help='attention aggregation sweep (CSV)')
    attn.add_argument('--sweep-n', type=_int_list, default=None)
    attn.add_argument('--k', type=int, default=None)
    attn.add_argument('--heads', type=int, default=None)
    attn.add_argument('--channels', type=int, default=None, help='value channels per degree and head')
    attn.add_argument('--d-k', type=int, default=None)
    attn.add_argument('--lmax', type=int, default=None, help='value degrees 0..lmax, (lmax+1)^2 components each')
    attn.add_argument('--precision', choices=PRECISIONS, default=None)
    attn.add_argument('--warmup', type=int, default=None)
    attn.add_argument('--iters', type=int, default=None)
    attn.add_argument('--variants', type=_variant_list, default=None)
    attn.add_argument('--max-elements', type=int, default=None)
    attn.add_argument('--workers', type=int, default=None, help='also time the threaded streaming path')
    attn.add_argument('--point-budget', type=float, default=None, help='seconds per (variant, N) timing loop')

    tp = sub.add_parser('bench-tp', parents=[common], help='dense vs axis-aligned tensor product sweep (CSV)')
    tp.add_argument('--sweep-n', type=_int_list, default=None, help='products per call')
    tp.add_argument('--lmax', type=int, default=None)
    tp.add_argument('--channels', type=int, default=None)
    tp.add_argument('--precision', choices=PRECISIONS, default=None)
    tp.add_argument('--warmup', type=int, default=None)
    tp.add_argument('--iters', type=int, default=None)

    gen = sub.add_parser('gen-system', parents=[common], help='write an FCC system fixture')
    gen.add_argument('--n', type=int, required=True)
    gen.add_argument('--a', type=float, default=3.8)
    gen.add_argument('--k', type=int, default=64)
    gen.add_argument('--r-cut', type=float, default=6.0)
    gen.add_argument('--attention', action='store_true', help='write an attention fixture on this geometry')
    gen.add_argument('--heads', type=int, default=16)
    gen.add_argument('--d-k', type=int, default=4)
    gen.add_argument('--channels', type=int, default=4)

    conv = sub.add_parser('dump-conventions', parents=[common], help='conventions manifest (TOML)')
    conv.add_argument('--lmax', type=int, default=None)

    paths = sub.add_parser('dump-paths', parents=[common], help='re-index rules and translation tables')
    paths.add_argument('--what', choices=['reindex', 'translation', 'all'], default='all')
    paths.add_argument('--lmax', type=int, default=None)
    return parser


def _emit(text: str, out: str = None):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(text)
        log.info(f'wrote {out}')


def _overrides(args, mapping) -> dict:
    return {field: getattr(args, flag) for flag, field in mapping.items() if getattr(args, flag) is not None}


def cmd_verify(args) -> int:
    cfg = VerifyCfg(
        seed=args.seed,
        tolerances=ToleranceCfg(**dict(args.tol)),
        **_overrides(args, {'suite': 'suites', 'draws': 'draws', 'rotations': 'rotations'}),
    )
    report = run_suites(cfg)
    _emit(report.text(), args.out)
    for failure in report.failures:
        log.error(f'{failure.suite}/{failure.name} failed; replay with: {report.replay_command(failure.suite)}')
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_bench_attn(args) -> int:
    fields = {
        'sweep_n': 'sweep_n',
        'k': 'k',
        'heads': 'heads',
        'channels': 'channels',
        'd_k': 'd_k',
        'lmax': 'lmax',
        'precision': 'precision',
        'warmup': 'warmup',
        'iters': 'iters',
        'variants': 'variants',
        'max_elements': 'max_elements',
        'workers': 'workers',
        'point_budget': 'point_budget_s',
    }
    cfg = BenchCfg(seed=args.seed, **_overrides(args, fields))
    report = run_attention_bench(cfg)
    _emit(report.to_csv(), args.out)
    return EXIT_OK


def cmd_bench_tp(args) -> int:
    fields = {
        'sweep_n': 'counts',
        'lmax': 'lmax',
        'channels': 'channels',
        'precision': 'precision',
        'warmup': 'warmup',
        'iters': 'iters',
    }
    cfg = TPBenchCfg(seed=args.seed, **_overrides(args, fields))
    report = run_tp_bench(cfg)
    _emit(report.to_csv(), args.out)
    return EXIT_OK


def cmd_gen_system(args) -> int:
    system = gen_fcc_system(args.n, args.a, args.seed)
    idx = build_neighbors(system, args.k, args.r_cut)
    if not args.attention:
        save_system(args.out, system, idx)
        return EXIT_OK
    rng = np.random.default_rng(args.seed)
    fixture = AttentionFixture(
        q=rng.standard_normal((args.n, args.heads, args.d_k)),
        k=rng.standard_normal((args.n, args.heads, args.d_k)),
        values=rng.standard_normal((args.n, args.heads, args.channels)),
        idx=idx,
        seed=args.seed,
        positions=system.positions,
        extra={'a': np.array(args.a), 'r_cut': np.array(args.r_cut)},
    )
    save_fixture(args.out, fixture)
    return EXIT_OK


def cmd_dump_conventions(args) -> int:
    _emit(dump_conventions(args.lmax), args.out)
    return EXIT_OK


def cmd_dump_paths(args) -> int:
    lmax = gm.L_MAX if args.lmax is None else args.lmax
    parts = []
    if args.what in ('reindex', 'all'):
        parts.append(dump_reindex_rules(lmax))
    if args.what in ('translation', 'all'):
        parts.append(dump_translation_tables(min(lmax, 2) if args.lmax is None else lmax))
    _emit('\n'.join(parts), args.out)
    return EXIT_OK


COMMANDS = {
    'verify': cmd_verify,
    'bench-attn': cmd_bench_attn,
    'bench-tp': cmd_bench_tp,
    'gen-system': cmd_gen_system,
    'dump-conventions': cmd_dump_conventions,
    'dump-paths': cmd_dump_paths,
}


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    set_log_level(args.log_level)
    if args.seed is None:
        args.seed = gm.SEED
    if args.command == 'gen-system' and args.out is None:
        parser.error('gen-system writes a binary archive and needs --out')
    import_extensions()
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        parser.error(f'invalid options: {e}')
    except CorrectnessGateError as e:
        log.error(f'correctness gate failed: {e}')
        return EXIT_FAILED
    except ValueError as e:
        parser.error(str(e))


if __name__ == '__main__':
    sys.exit(main())
