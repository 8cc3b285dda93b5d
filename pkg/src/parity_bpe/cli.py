"""Command-line surface: train, encode, decode, eval, compare, synth.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
All outputs embed provenance (config hash plus input digests) sufficient to
re-run the command.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .corpus import NormUnit, load_labeled_corpus, load_parallel_dev
from .errors import ConfigError, DataError, InternalError, ParityBpeError
from .metrics import RENYI_ALPHA_DEFAULT, full_report, load_gold_tsv
from .parity import (
    DEV_SOURCE_PARALLEL,
    DEV_SOURCE_TRAINING,
    ParityConfig,
    compute_cr,
    train_no_dev,
    train_parity,
)
from .synthetic import SyntheticSpec, generate_synthetic
from .tokenizer import TokenizerModel, escape_token, unescape_token
from .trainer import train_classical


def _digest_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def _digest_config(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()[:16]


def _read_lines(path: str | None) -> list[bytes]:
    data = sys.stdin.buffer.read() if path in (None, "-") else Path(path).read_bytes()
    records = data.split(b"\n")
    if records and records[-1] == b"":
        records.pop()
    return records


def _open_out(path: str | None):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _extract_config_path(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def build_parser() -> _Parser:
    parser = _Parser(prog="parity-bpe", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    train = sub.add_parser("train", parents=[], help="learn a merge list from a labeled corpus")
    train.add_argument("--corpus", help="manifest.json of the labeled training corpus")
    train.add_argument("--merges", type=int, help="total merge budget")
    mode = train.add_mutually_exclusive_group()
    mode.add_argument("--classical", action="store_true", help="global frequency objective")
    mode.add_argument("--parity", action="store_true", help="min-max per-language objective")
    train.add_argument("--dev", help="directory of aligned <lang>.txt dev files")
    train.add_argument(
        "--no-dev",
        action="store_true",
        help="measure compression on the training corpus (bytes unit)",
    )
    train.add_argument(
        "--unit",
        choices=[u.value for u in NormUnit],
        default=NormUnit.LINES.value,
        help="normalization unit for dev compression rates (default: lines)",
    )
    train.add_argument("--window", type=int, default=100, help="moving-window size (0 disables)")
    train.add_argument("--alpha", type=float, default=2.0, help="window quota multiplier")
    train.add_argument(
        "--hybrid-split",
        type=float,
        default=0.0,
        help="fraction of the budget trained with the global objective first",
    )
    train.add_argument("--limit-per-language", type=int, default=None)
    train.add_argument("--model-out", default="model.bpe")
    train.add_argument("--log-out", default=None, help="default: <model-out>.log.jsonl")
    train.add_argument("--config", default=None, help="JSON file overriding flag defaults")
    train.set_defaults(func=cmd_train)

    encode = sub.add_parser("encode", help="tokenize input lines with a saved model")
    encode.add_argument("--model", required=True)
    encode.add_argument("--input", default=None, help="input file (default: stdin)")
    encode.add_argument("--output", default=None, help="output file (default: stdout)")
    encode.add_argument(
        "--format", choices=["tokens", "ids"], default="tokens",
        help="escaped token strings or numeric token ids",
    )
    encode.set_defaults(func=cmd_encode)

    decode = sub.add_parser("decode", help="invert encode output back to bytes")
    decode.add_argument("--model", required=True)
    decode.add_argument("--input", default=None)
    decode.add_argument("--output", default=None, help="output file (default: stdout)")
    decode.add_argument("--format", choices=["tokens", "ids"], default="tokens")
    decode.set_defaults(func=cmd_decode)

    evaluate = sub.add_parser("eval", help="intrinsic metric report on a parallel dev corpus")
    evaluate.add_argument("--model", help="model file to evaluate")
    evaluate.add_argument("--dev", help="directory of aligned <lang>.txt files")
    evaluate.add_argument("--langs", default=None, help="comma-separated subset of languages")
    evaluate.add_argument("--out", default=None, help="report JSON (default: stdout)")
    evaluate.add_argument("--csv", default=None, help="optional per-language CSV")
    evaluate.add_argument("--gold", default=None, help="gold segmentation TSV")
    evaluate.add_argument("--renyi-alpha", type=float, default=RENYI_ALPHA_DEFAULT)
    evaluate.add_argument("--config", default=None, help="JSON file overriding flag defaults")
    evaluate.set_defaults(func=cmd_eval)

    compare = sub.add_parser("compare", help="side-by-side metric table for several models")
    compare.add_argument("models", nargs="+", help="two or more model files")
    compare.add_argument("--dev", required=True)
    compare.add_argument("--langs", default=None)
    compare.add_argument("--csv", default=None)
    compare.add_argument("--renyi-alpha", type=float, default=RENYI_ALPHA_DEFAULT)
    compare.set_defaults(func=cmd_compare)

    synth = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    synth.add_argument("--out", help="output directory")
    synth.add_argument("--langs", default="aa,bb,cc", help="comma-separated language codes")
    synth.add_argument("--proportions", default=None, help="comma-separated byte proportions")
    synth.add_argument("--dev-lines", type=int, default=100)
    synth.add_argument("--train-bytes", type=int, default=600_000)
    synth.add_argument("--vocab-size", type=int, default=400)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--config", default=None, help="JSON synthetic spec")
    synth.set_defaults(func=cmd_synth)

    parser.subcommands = {
        "train": train,
        "encode": encode,
        "decode": decode,
        "eval": evaluate,
        "compare": compare,
        "synth": synth,
    }
    return parser


def _require(args, name: str):
    value = getattr(args, name.replace("-", "_"), None)
    if value is None:
        raise ConfigError(f"--{name} is required")
    return value


def cmd_train(args) -> int:
    manifest = Path(_require(args, "corpus"))
    merges = _require(args, "merges")
    if not (args.classical or args.parity or args.no_dev):
        raise ConfigError("choose a mode: --classical or --parity [--no-dev]")
    if args.classical and args.no_dev:
        raise ConfigError("--no-dev only applies to --parity")

    corpus = load_labeled_corpus(manifest, args.limit_per_language)
    resolved = {
        "command": "train",
        "corpus": str(manifest),
        "merges": merges,
        "mode": "classical" if args.classical else "parity",
        "no_dev": bool(args.no_dev),
        "dev": args.dev,
        "unit": args.unit,
        "window": args.window,
        "alpha": args.alpha,
        "hybrid_split": args.hybrid_split,
        "limit_per_language": args.limit_per_language,
    }

    if args.classical:
        model, log = train_classical(corpus, merges)
        summary_table = compute_cr(corpus, model, NormUnit.BYTES)
    elif args.no_dev:
        if NormUnit(args.unit) is not NormUnit.BYTES and args.unit != NormUnit.LINES.value:
            raise ConfigError("--no-dev forces --unit bytes")
        config = ParityConfig(
            total_merges=merges,
            global_merges=int(merges * args.hybrid_split),
            window_size=args.window,
            alpha=args.alpha,
            unit=NormUnit.BYTES,
            dev_source=DEV_SOURCE_TRAINING,
        )
        model, log = train_no_dev(corpus, config)
        summary_table = compute_cr(corpus, model, NormUnit.BYTES)
    else:
        dev_dir = _require(args, "dev")
        dev = load_parallel_dev(dev_dir, list(corpus.languages))
        config = ParityConfig(
            total_merges=merges,
            global_merges=int(merges * args.hybrid_split),
            window_size=args.window,
            alpha=args.alpha,
            unit=NormUnit(args.unit),
            dev_source=DEV_SOURCE_PARALLEL,
        )
        model, log = train_parity(corpus, dev, config)
        summary_table = compute_cr(dev, model, NormUnit(args.unit))

    model_out = Path(args.model_out)
    log_out = Path(args.log_out) if args.log_out else Path(str(model_out) + ".log.jsonl")
    model.save(model_out)
    log.to_jsonl(log_out)

    input_digests = {"manifest": _digest_file(manifest)}
    for entry in json.loads(manifest.read_text(encoding="utf-8"))["languages"]:
        input_digests[entry["lang"]] = _digest_file(manifest.parent / entry["path"])
    if resolved["mode"] == "parity" and not resolved["no_dev"]:
        for lang in corpus.languages:
            input_digests[f"dev/{lang}"] = _digest_file(Path(args.dev) / f"{lang}.txt")

    summary = {
        "merges_learned": len(log),
        "stopped_early": log.stopped_early,
        "stop_reason": log.stop_reason,
        "cr_unit": summary_table.unit.value,
        "per_language_cr": summary_table.snapshot(),
    }
    meta = {
        "config": resolved,
        "config_hash": _digest_config(resolved),
        "inputs": input_digests,
        "summary": summary,
    }
    Path(str(model_out) + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    print(f"model: {model_out} ({len(log)} merges)")
    print(f"log:   {log_out}")
    print(f"final per-language CR ({summary_table.unit.value}):")
    for lang in summary_table.langs:
        print(f"  {lang}: {summary_table.cr(lang):.6f}")
    if log.stopped_early:
        print(f"stopped early: {log.stop_reason}")
    return 0


def cmd_encode(args) -> int:
    model = TokenizerModel.load(args.model)
    out, close = _open_out(args.output)
    try:
        for record in _read_lines(args.input):
            if args.format == "ids":
                out.write(" ".join(str(i) for i in model.encode_ids(record)) + "\n")
            else:
                out.write(" ".join(escape_token(t) for t in model.encode(record)) + "\n")
    finally:
        if close:
            out.close()
    return 0


def cmd_decode(args) -> int:
    model = TokenizerModel.load(args.model)
    out = sys.stdout.buffer if args.output in (None, "-") else open(args.output, "wb")
    try:
        for record in _read_lines(args.input):
            fields = record.split()
            if args.format == "ids":
                try:
                    ids = [int(f) for f in fields]
                except ValueError as exc:
                    raise DataError(f"bad token id in input: {exc}") from None
                out.write(model.decode_ids(ids) + b"\n")
            else:
                tokens = [unescape_token(f.decode("ascii")) for f in fields]
                out.write(model.decode(tokens) + b"\n")
    finally:
        if out is not sys.stdout.buffer:
            out.close()
    return 0


def _dev_languages(dev_dir: Path, langs_flag: str | None) -> list[str]:
    if langs_flag:
        return sorted(langs_flag.split(","))
    langs = sorted(p.stem for p in dev_dir.glob("*.txt"))
    if not langs:
        raise DataError(f"no <lang>.txt files in {dev_dir}")
    return langs


def _report_for(model_path: Path, dev, args):
    model = TokenizerModel.load(model_path)
    gold = load_gold_tsv(args.gold) if getattr(args, "gold", None) else None
    provenance = {
        "model": str(model_path),
        "model_digest": _digest_file(model_path),
        "dev": str(args.dev),
        "config_hash": _digest_config(
            {"dev": str(args.dev), "renyi_alpha": args.renyi_alpha, "model": str(model_path)}
        ),
    }
    return full_report(
        model, dev, renyi_alpha=args.renyi_alpha, gold=gold, provenance=provenance
    )


def _write_csv(path: str, report) -> None:
    import csv

    langs = sorted(report.per_language)
    metrics = sorted(report.per_language[langs[0]])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["language"] + metrics)
        for lang in langs:
            writer.writerow([lang] + [report.per_language[lang][m] for m in metrics])
        writer.writerow(
            ["GLOBAL"] + [report.global_metrics.get(m, "") for m in metrics]
        )


def cmd_eval(args) -> int:
    model_path = Path(_require(args, "model"))
    dev_dir = Path(_require(args, "dev"))
    dev = load_parallel_dev(dev_dir, _dev_languages(dev_dir, args.langs))
    report = _report_for(model_path, dev, args)
    text = report.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.csv:
        _write_csv(args.csv, report)
    return 0


_COMPARE_ROWS = [
    "type_token_ratio",
    "fertility",
    "cr_lines_ratio_of_sums",
    "cr_bytes_ratio_of_sums",
    "renyi_entropy",
    "vocab_utilization",
    "avg_token_rank",
    "gini_tokens_per_line",
]


def cmd_compare(args) -> int:
    if len(args.models) < 2:
        raise ConfigError("compare needs at least two model files")
    dev_dir = Path(args.dev)
    dev = load_parallel_dev(dev_dir, _dev_languages(dev_dir, args.langs))
    model_paths = sorted((Path(p) for p in args.models), key=lambda p: p.name)
    args.gold = None
    reports = {p: _report_for(p, dev, args) for p in model_paths}

    sizes = {p: reports[p].provenance["vocab_size"] for p in model_paths}
    if len(set(sizes.values())) > 1:
        detail = ", ".join(f"{p.name}={s}" for p, s in sizes.items())
        print(f"warning: vocabulary sizes differ ({detail})", file=sys.stderr)

    rows = []
    for metric in _COMPARE_ROWS:
        rows.append((metric, [reports[p].global_metrics[metric] for p in model_paths]))
    for agg in ("min", "max", "spread"):
        values = []
        for p in model_paths:
            crs = [
                stats["cr_lines_ratio_of_sums"]
                for stats in reports[p].per_language.values()
            ]
            if agg == "min":
                values.append(min(crs))
            elif agg == "max":
                values.append(max(crs))
            else:
                values.append(max(crs) - min(crs))
        rows.append((f"per_lang_cr_lines_{agg}", values))

    name_width = max(len(r[0]) for r in rows)
    header = "metric".ljust(name_width) + "".join(
        f"  {p.name:>18}" for p in model_paths
    )
    print(header)
    print("-" * len(header))
    lines = []
    for metric, values in rows:
        line = metric.ljust(name_width) + "".join(f"  {v:>18.6f}" for v in values)
        print(line)
        lines.append((metric, values))

    if args.csv:
        import csv

        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric"] + [p.name for p in model_paths])
            for metric, values in lines:
                writer.writerow([metric] + values)
    return 0


def cmd_synth(args) -> int:
    out_dir = _require(args, "out")
    if args.config:
        spec = SyntheticSpec.from_json(args.config)
    else:
        codes = [c for c in args.langs.split(",") if c]
        if args.proportions:
            proportions = [float(x) for x in args.proportions.split(",")]
        else:
            proportions = [1.0 / len(codes)] * len(codes)
        spec = SyntheticSpec.default(
            codes,
            proportions,
            dev_lines=args.dev_lines,
            total_train_bytes=args.train_bytes,
            vocab_size=args.vocab_size,
        )
    stats = generate_synthetic(spec, args.seed, out_dir)
    print(f"wrote synthetic corpus to {out_dir} (seed {args.seed})")
    for lang, info in sorted(stats["languages"].items()):
        print(
            f"  {lang}: {info['train_lines']} train lines, "
            f"{info['train_text_bytes']} text bytes"
        )
    return 0


def _known_dests(parser: argparse.ArgumentParser) -> set[str]:
    return {a.dest for a in parser._actions if a.dest != "help"}


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        command = next((a for a in argv if not a.startswith("-")), None)
        config_path = _extract_config_path(argv)
        # synth interprets --config itself as a SyntheticSpec document
        if config_path and command in parser.subcommands and command != "synth":
            subparser = parser.subcommands[command]
            try:
                overrides = json.loads(Path(config_path).read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise DataError(f"config file not found: {config_path}") from None
            except json.JSONDecodeError as exc:
                raise DataError(f"malformed config {config_path}: {exc}") from None
            if not isinstance(overrides, dict):
                raise ConfigError(f"config {config_path} must be a JSON object")
            overrides = {k.replace("-", "_"): v for k, v in overrides.items()}
            unknown = set(overrides) - _known_dests(subparser)
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            subparser.set_defaults(**overrides)
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help()
            return 1
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except ParityBpeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
