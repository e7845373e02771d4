"""Command line entry point: ``permdecode <command> [<subcommand>] [options]``.

Exit codes: 0 success, 1 usage error, 2 config or data error, 3 failed audit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import plc, rm
from .codes import CodeFamily, enumerate_code, export_codebook, min_hamming_distance, min_ulam_distance
from .gradcheck import run_gradcheck
from .harness import (
    ConfigError,
    MdDecoder,
    MlpDecoder,
    SweepConfig,
    TrainConfig,
    UlamDecoder,
    evaluate_bler,
    plc_sync_grid,
    plc_unsync_grid,
    records_csv,
    proposition_audit,
    rm_grid,
    run_sweep,
    stream,
    train,
)
from .neural import MlpSpec, ModelFormatError, load_model, save_model

EXIT_USAGE, EXIT_DATA, EXIT_AUDIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _codebook(args):
    return enumerate_code(CodeFamily(args.family, args.n))


def _plc_params(args) -> plc.PlcParams:
    p_i = args.p_i if args.p_i is not None else args.p_id
    p_d = args.p_d if args.p_d is not None else args.p_id
    c_max = args.c_max or (args.n if p_i == p_d == 0 else args.n + 3)
    return plc.PlcParams(args.p_bg, args.p_im, args.p_pfd, p_i, p_d, args.l_max, c_max)


def _rm_params(args) -> rm.RmParams:
    levels = rm.default_levels(args.n)
    sigma2 = args.sigma2
    if sigma2 is None:
        sigma2 = args.sigma2_gap_multiple * min(b - a for a, b in zip(levels, levels[1:]))
    return rm.RmParams(args.sigma1, sigma2, args.p_large, levels)


def _channel(args):
    return _rm_params(args) if args.channel == "rm" else _plc_params(args)


# -- commands ---------------------------------------------------------------


def cmd_codes_enum(args) -> int:
    _emit(export_codebook(_codebook(args)), args.out)
    return 0


def cmd_codes_audit(args) -> int:
    cb = _codebook(args)
    info = {"family": args.family, "n": args.n, "size": len(cb)}
    if len(cb) >= 2:
        info["min_hamming"] = min_hamming_distance(cb)
        if len(cb) <= 3000:
            info["min_ulam"] = min_ulam_distance(cb)
    _emit(json.dumps(info) + "\n", args.out)
    return 0


def cmd_plc_sim(args) -> int:
    cb = _codebook(args)
    params = _plc_params(args)
    rng = stream(args.seed, 0)
    lines = []
    for _ in range(args.trials):
        c = cb[int(rng.integers(len(cb)))]
        m = plc.transmit(c, params, rng)
        lines.append(f"# codeword {' '.join(map(str, c))} occupied={m.occupied}")
        lines += ["".join(map(str, row)) for row in m.bits]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_rm_sim(args) -> int:
    cb = _codebook(args)
    params = _rm_params(args)
    rng = stream(args.seed, 0)
    lines = []
    for _ in range(args.trials):
        c = cb[int(rng.integers(len(cb)))]
        charges = rm.perturb(rm.encode_charges(c, params.levels), params, rng)
        got = rm.read_ranking(charges)
        lines.append(
            f"{' '.join(map(str, c))} -> {' '.join(map(str, got))} "
            f"charges {' '.join(f'{v:.3f}' for v in charges)}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_md_eval(args) -> int:
    cb = _codebook(args)
    params = _channel(args)
    if args.decoder == "ulam":
        dec = UlamDecoder(cb)
    else:
        dec = MdDecoder(cb, erasure=args.decoder == "md_erasure")
    rec = evaluate_bler(dec, cb, params, args.trials, args.seed, args.workers)
    _emit(records_csv([rec]), args.out)
    return 0


def cmd_nn_train(args) -> int:
    cb = _codebook(args)
    if args.channel == "rm":
        grid = rm_grid(args.n, args.p_large, args.sigma2, args.sigma2_gap_multiple)
        spec = MlpSpec.rm(args.n, args.hidden)
    elif args.channel == "plc_sync":
        grid = plc_sync_grid(args.n, args.p_im, args.p_pfd)
        spec = MlpSpec.plc(args.n, args.n, args.hidden)
    else:
        grid = plc_unsync_grid(args.n, args.p_id, args.p_im, args.p_pfd)
        spec = MlpSpec.plc(args.n, grid[0].c_max, args.hidden)
    cfg = TrainConfig(args.delta, grid, args.batch_size, args.lr, args.epochs, args.seed)
    weights, trace = train(spec, cb, cfg)
    save_model(weights, args.model)
    summary = {"best_epoch": trace.best_epoch, "losses": trace.losses, "val_bler": trace.val_bler}
    sys.stderr.write(json.dumps(summary) + "\n")
    return 0


def cmd_nn_eval(args) -> int:
    cb = _codebook(args)
    _, weights = load_model(args.model)
    params = _channel(args)
    rec = evaluate_bler(MlpDecoder(weights), cb, params, args.trials, args.seed, args.workers)
    _emit(records_csv([rec]), args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = SweepConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    records = run_sweep(cfg, args.out, args.workers)
    if not args.out:
        sys.stdout.write(records_csv(records))
    return 0


def cmd_gradcheck(args) -> int:
    results = run_gradcheck(args.configs, args.seed)
    worst = max(r.max_rel_error for r in results)
    for k, r in enumerate(results, 1):
        print(f"config {k}: {r.spec.input_kind} n={r.spec.n} h={r.spec.hidden} "
              f"params={r.checked} max_rel_err={r.max_rel_error:.3e}")
    ok = worst < args.tol
    print(f"{'PASS' if ok else 'FAIL'}: worst relative error {worst:.3e} (tolerance {args.tol:g})")
    return 0 if ok else EXIT_AUDIT


def cmd_proposition_audit(args) -> int:
    cb = _codebook(args)
    report = proposition_audit(cb)
    print(f"{cb.family.label}: size={len(cb)} d={report.min_distance} budget={report.budget} "
          f"patterns/codeword={report.patterns} failures={len(report.failures)}")
    for idx, pat in report.failures[:10]:
        print(f"  codeword #{idx} pattern {pat}")
    return 0 if report.ok else EXIT_AUDIT


# -- parser -----------------------------------------------------------------


def _common(p, family="tenengolts_even", n=6):
    p.add_argument("--family", default=family, choices=["tenengolts", "tenengolts_even", "interleaved"])
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")


def _plc_flags(p):
    p.add_argument("--p-bg", type=float, default=0.0)
    p.add_argument("--p-im", type=float, default=0.0)
    p.add_argument("--p-pfd", type=float, default=0.0)
    p.add_argument("--p-id", type=float, default=0.0, help="p_i = p_d")
    p.add_argument("--p-i", type=float)
    p.add_argument("--p-d", type=float)
    p.add_argument("--l-max", type=int, default=1)
    p.add_argument("--c-max", type=int, help="default n when synchronized, else n + 3")


def _rm_flags(p):
    p.add_argument("--sigma1", type=float, default=0.1)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--sigma2-gap-multiple", type=float, default=2.0)
    p.add_argument("--p-large", type=float, default=0.0)


def _eval_flags(p):
    p.add_argument("--channel", choices=["plc", "rm"], default="plc")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    _plc_flags(p)
    _rm_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="permdecode", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    codes = sub.add_parser("codes").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = codes.add_parser("enum", help="write the codebook")
    _common(p)
    p.set_defaults(func=cmd_codes_enum)
    p = codes.add_parser("audit", help="size and minimum distances")
    _common(p)
    p.set_defaults(func=cmd_codes_audit)

    p = sub.add_parser("plc").add_subparsers(dest="action", required=True, parser_class=_Parser).add_parser("sim")
    _common(p)
    _plc_flags(p)
    p.add_argument("--trials", type=int, default=1)
    p.set_defaults(func=cmd_plc_sim)

    p = sub.add_parser("rm").add_subparsers(dest="action", required=True, parser_class=_Parser).add_parser("sim")
    _common(p, "interleaved", 9)
    _rm_flags(p)
    p.add_argument("--trials", type=int, default=1)
    p.set_defaults(func=cmd_rm_sim)

    p = sub.add_parser("md").add_subparsers(dest="action", required=True, parser_class=_Parser).add_parser("eval")
    _common(p)
    _eval_flags(p)
    p.add_argument("--decoder", choices=["md_plain", "md_erasure", "ulam"], default="md_plain")
    p.set_defaults(func=cmd_md_eval)

    nn = sub.add_parser("nn").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = nn.add_parser("train")
    _common(p)
    p.add_argument("--channel", choices=["plc_sync", "plc", "rm"], default="plc_sync")
    p.add_argument("--model", required=True)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--delta", type=int, default=1000)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--p-im", type=float, default=0.001)
    p.add_argument("--p-pfd", type=float, default=0.001)
    p.add_argument("--p-id", type=float, default=0.001)
    _rm_flags(p)
    p.set_defaults(func=cmd_nn_train)
    p = nn.add_parser("eval")
    _common(p)
    _eval_flags(p)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_nn_eval)

    p = sub.add_parser("sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gradcheck")
    p.add_argument("--configs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("proposition-audit")
    _common(p)
    p.set_defaults(func=cmd_proposition_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ModelFormatError, OSError, ValueError) as exc:
        print(f"permdecode: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
