"""Command-line entry point: ``raptorcrypt <subcommand> ...``.

Exit codes: 0 ok, 1 usage/parameter error, 2 infeasible threshold,
3 mixed key ids, 4 undecodable, 5 malformed input file, 6 invalid verdict
under --strict, 7 receipt does not verify.
"""
from __future__ import annotations

import argparse
import os
import random
import sys
import tempfile
from pathlib import Path

from . import commitment as cm
from . import receipt as rc
from . import threshold as th
from .config import Config, load_config
from .errors import (DuplicateMember, InfeasibleThreshold, InvalidKey, InvalidParameter,
                     MalformedFile, MalformedFragment, MixedKeyId)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_MIXED_KEY = 3
EXIT_UNDECODABLE = 4
EXIT_MALFORMED = 5
EXIT_INVALID_VERDICT = 6
EXIT_BAD_RECEIPT = 7


class CommandError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def atomic_write(path, data: bytes, mode=None):
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        if mode is not None:
            os.chmod(tmp, mode)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _config(args) -> Config:
    cfg = load_config(args.config)
    return cfg.updated(
        seed=args.seed,
        overhead_hi=getattr(args, "overhead_hi", None),
        overhead_lo=getattr(args, "overhead_lo", None),
        c=getattr(args, "c", None),
        delta=getattr(args, "delta", None),
        symbol_size=getattr(args, "symbol_size", None),
        prime_bits=getattr(args, "bits", None) if args.command == "commit" else None,
        receipt_bits=getattr(args, "bits", None) if args.command == "receipt-keygen" else None,
    )


def _rng(cfg):
    return random.Random(cfg.seed) if cfg.seed is not None else None


def _plan(args, cfg, overhead_hi=None):
    try:
        return th.plan_threshold(args.n, args.s, args.key_bytes, cfg.symbol_size,
                                 overhead_hi or cfg.overhead_hi, cfg.overhead_lo,
                                 cfg.c, cfg.delta)
    except InfeasibleThreshold as exc:
        raise CommandError(str(exc), EXIT_INFEASIBLE) from None


def cmd_plan(args, out):
    cfg = _config(args)
    plan = _plan(args, cfg)
    print(f"n={plan.n} s={plan.s} k={plan.k} f={plan.f} symbol_size={plan.symbol_size} "
          f"total_symbols={plan.total_symbols}", file=out)
    print(f"s*f={plan.s * plan.f} >= ceil({plan.overhead_hi}*k)={plan.min_total_symbols}", file=out)
    print(f"(s-1)*f={(plan.s - 1) * plan.f} <= floor({plan.overhead_lo}*k)={plan.max_short_symbols}",
          file=out)
    print(f"max_threshold={th.max_threshold(cfg.overhead_hi, cfg.overhead_lo)}", file=out)
    return EXIT_OK


def cmd_split(args, out):
    cfg = _config(args)
    rng = _rng(cfg)
    if args.key_hex is not None:
        print("warning: --key-hex splits a caller-supplied key; partial decodes of s-1 "
              "fragments can leak structure of non-random keys", file=sys.stderr)
        try:
            key = bytes.fromhex(args.key_hex)
        except ValueError:
            raise CommandError("--key-hex is not valid hex", EXIT_USAGE) from None
        args.key_bytes = len(key)
    if args.key_bytes is None or args.key_bytes < 1:
        raise CommandError("--key-bytes must be >= 1", EXIT_USAGE)
    plan = _plan(args, cfg)
    if args.key_hex is None:
        key = rng.randbytes(args.key_bytes) if rng else os.urandom(args.key_bytes)
    key_id = rng.randbytes(th.KEY_ID_LEN) if rng else th.new_key_id()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = len(str(plan.n - 1))
    for frag in th.split_key(key, plan, key_id):
        atomic_write(out_dir / f"member_{frag.member_id:0{width}d}.rcf", frag.to_bytes())
    key_path = Path(args.key_out) if args.key_out else out_dir / "key.bin"
    atomic_write(key_path, key, mode=0o600)
    print(f"wrote {plan.n} fragments (k={plan.k}, f={plan.f}, s={plan.s}) to {out_dir}; "
          f"key_id={key_id.hex()}; key in {key_path}", file=out)
    return EXIT_OK


def cmd_combine(args, out):
    fragments = []
    for path in args.fragments:
        try:
            fragments.append(th.Fragment.from_bytes(Path(path).read_bytes()))
        except MalformedFragment as exc:
            raise CommandError(f"{path}: {exc}", EXIT_MALFORMED) from None
    try:
        report = th.combine_report(fragments)
    except MixedKeyId as exc:
        raise CommandError(str(exc), EXIT_MIXED_KEY) from None
    except (DuplicateMember, MalformedFragment) as exc:
        raise CommandError(str(exc), EXIT_MALFORMED) from None
    if not report.ok:
        raise CommandError(f"undecodable: rank {report.rank} < k={fragments[0].k} "
                           f"from {len(fragments)} fragments", EXIT_UNDECODABLE)
    if args.output:
        atomic_write(args.output, report.recovered, mode=0o600)
        print(f"recovered {len(report.recovered)}-byte key into {args.output}", file=out)
    else:
        print(report.recovered.hex(), file=out)
    return EXIT_OK


def cmd_simulate(args, out):
    cfg = _config(args)
    seed = cfg.seed if cfg.seed is not None else 0
    overheads = args.overhead_hi_list or [cfg.overhead_hi]
    print("overhead_hi,subset_size,trials,success_ratio", file=out)
    for hi in overheads:
        plan = _plan(args, cfg, overhead_hi=hi)
        sizes = args.subset_sizes or list(range(plan.s - 1, plan.n + 1))
        for size in sizes:
            if not 1 <= size <= plan.n:
                raise CommandError(f"subset size {size} outside 1..{plan.n}", EXIT_USAGE)
            ratio = th.simulate_decodability(plan, size, args.trials, seed)
            print(f"{hi},{size},{args.trials},{ratio:.6f}", file=out)
    return EXIT_OK


def cmd_commit(args, out):
    cfg = _config(args)
    try:
        sel = cm.SelectionSet(args.universe, args.choose or [])
    except InvalidParameter as exc:
        raise CommandError(str(exc), EXIT_USAGE) from None
    commitments, reveals = cm.commit_selection(sel, cfg.prime_bits, cfg.seed)
    if args.reveal_chosen_only:
        reveals = [r for r in reveals if r.index in sel.chosen]
    atomic_write(args.out, cm.format_commitments(commitments, sel.universe).encode())
    atomic_write(args.reveal_out, cm.format_reveals(reveals, sel.universe).encode(), mode=0o600)
    print(f"committed U={sel.universe} ({len(sel.chosen)} chosen) to {args.out}; "
          f"reveal keys in {args.reveal_out}", file=out)
    return EXIT_OK


def cmd_verify(args, out):
    try:
        universe, commitments = cm.parse_commitments(Path(args.commitments).read_text("utf-8"))
        reveal_universe, reveals = cm.parse_reveals(Path(args.reveals).read_text("utf-8"))
    except MalformedFile as exc:
        raise CommandError(str(exc), EXIT_MALFORMED) from None
    if reveal_universe != universe:
        raise CommandError(f"reveal file has U={reveal_universe}, commitments U={universe}",
                           EXIT_MALFORMED)
    report = cm.verify_selection(commitments, reveals)
    for index, verdict in report.verdicts.items():
        print(f"{index} {verdict.value}", file=out)
    print(report.summary(), file=out)
    if args.strict and report.count(cm.Verdict.INVALID):
        return EXIT_INVALID_VERDICT
    return EXIT_OK


def cmd_receipt_keygen(args, out):
    cfg = _config(args)
    try:
        keypair = rc.receipt_keygen(cfg.receipt_bits, _rng(cfg))
    except InvalidParameter as exc:
        raise CommandError(str(exc), EXIT_USAGE) from None
    atomic_write(args.out, rc.format_private_key(keypair).encode(), mode=0o600)
    print(f"wrote {cfg.receipt_bits}-bit receipt key to {args.out}", file=out)
    return EXIT_OK


def cmd_receipt_sign(args, out):
    try:
        keypair = rc.parse_private_key(Path(args.key).read_text("utf-8"))
    except MalformedFile as exc:
        raise CommandError(f"{args.key}: {exc}", EXIT_MALFORMED) from None
    signature = rc.receipt_sign(Path(args.file).read_bytes(), keypair)
    text = rc.format_receipt(keypair.public, signature)
    if args.output:
        atomic_write(args.output, text.encode())
    else:
        out.write(text)
    return EXIT_OK


def cmd_receipt_verify(args, out):
    try:
        public, signature = rc.parse_receipt(Path(args.receipt).read_text("utf-8"))
    except MalformedFile as exc:
        raise CommandError(f"{args.receipt}: {exc}", EXIT_MALFORMED) from None
    if rc.receipt_verify(Path(args.file).read_bytes(), signature, public):
        print("valid", file=out)
        return EXIT_OK
    print("invalid", file=out)
    return EXIT_BAD_RECEIPT


def _add_globals(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default,
                        help="base RNG seed; makes every output reproducible")
    parser.add_argument("--config", default=default,
                        help="JSON config file (default: $RAPTOR_THRESHOLD_CONFIG)")


def _add_threshold_args(p, need_key_bytes=True):
    p.add_argument("-n", type=int, required=True, help="group size")
    p.add_argument("-s", type=int, required=True, help="members required to decode")
    p.add_argument("--key-bytes", type=int, required=need_key_bytes, help="key length in bytes")
    p.add_argument("--symbol-size", type=int, help="bytes per symbol (default 1)")
    p.add_argument("--overhead-lo", type=float, help="max symbols of s-1 members, as a multiple of k")
    p.add_argument("--c", type=float, help="robust soliton c")
    p.add_argument("--delta", type=float, help="robust soliton delta")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raptorcrypt",
        description="Fountain-code presence thresholds and private subset commitments.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute fragment sizes for an s-of-n split")
    _add_threshold_args(p)
    p.add_argument("--overhead-hi", type=float, help="symbols of s members, as a multiple of k")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("split", help="generate a key and write n fragment files")
    _add_threshold_args(p, need_key_bytes=False)
    p.add_argument("--overhead-hi", type=float)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--key-out", help="where to write the key (default OUT_DIR/key.bin)")
    p.add_argument("--key-hex", help="split this key instead of a fresh one (testing)")
    p.set_defaults(func=cmd_split, key_bytes=32)

    p = sub.add_parser("combine", help="recover the key from fragment files")
    p.add_argument("fragments", nargs="+")
    p.add_argument("-o", "--output", help="write the key here instead of printing hex")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("simulate", help="measure decode success ratios as CSV")
    _add_threshold_args(p)
    p.add_argument("--overhead-hi", dest="overhead_hi_list", type=_float_list,
                   help="one overhead or a comma-separated sweep")
    p.add_argument("--subset-sizes", type=_int_list, help="default: s-1 .. n")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("commit", help="commit to a secret subset of 1..U")
    p.add_argument("--universe", type=int, required=True)
    p.add_argument("--choose", type=_int_list, help="comma-separated chosen indices")
    p.add_argument("--bits", type=int, help="bits per prime factor (default 512)")
    p.add_argument("--out", required=True, help="commitment file to publish")
    p.add_argument("--reveal-out", required=True, help="reveal file to keep private")
    p.add_argument("--reveal-chosen-only", action="store_true",
                   help="only write reveal keys for chosen indices")
    p.set_defaults(func=cmd_commit)

    p = sub.add_parser("verify", help="check reveal keys against commitments")
    p.add_argument("commitments")
    p.add_argument("reveals")
    p.add_argument("--strict", action="store_true", help="exit 6 if any index is Invalid")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("receipt-keygen", help="create an RSA receipt key")
    p.add_argument("--bits", type=int, help="modulus bits (default 2048)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_receipt_keygen)

    p = sub.add_parser("receipt-sign", help="sign a file as a receipt")
    p.add_argument("--key", required=True)
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_receipt_sign)

    p = sub.add_parser("receipt-verify", help="check a receipt against a file")
    p.add_argument("file")
    p.add_argument("receipt")
    p.set_defaults(func=cmd_receipt_verify)

    for subparser in sub.choices.values():
        _add_globals(subparser, suppress=True)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for infeasible plans
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args, out)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidParameter, InvalidKey) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
