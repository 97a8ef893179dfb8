"""Command-line entry point: ``weatdebias audit|debias|eval|neighbors``.

Exit codes: 0 success, 1 usage or validation error, 2 runtime/data error.
"""

import argparse
import json
import logging
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .hardweat import HardWeatError, HardWeatParams, hardweat, validate_classes
from .lexicon import LexiconError, load_lexicon, resolve_lexicon
from .numkit import DegenerateInputError
from .qualeval import analogy_accuracy, load_analogy, load_similarity, spearman_similarity
from .softweat import SoftWeatError, SoftWeatParams, softweat
from .vecspace import (
    EmbeddingFormatError,
    MissingWordError,
    load_embedding,
    load_frequencies,
    nearest_neighbors,
    save_embedding,
)
from .weat import DEFAULT_SAMPLES, UnequalTargetsError, run_tests

logger = logging.getLogger("weatdebias")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _load(args, path):
    e = load_embedding(path, args.format, lowercase_fallback=args.lowercase_fallback)
    if getattr(args, "freq", None):
        e = e.with_frequencies(load_frequencies(args.freq))
    return e


def _resolve(args, e):
    lex = load_lexicon(args.lexicon)
    resolved = resolve_lexicon(e, lex)
    for name, miss in resolved.missing.items():
        print(f"warning: {name}: {len(miss)} word(s) not in vocabulary: {', '.join(miss)}",
              file=sys.stderr)
    return resolved


def _manifest(args, argv, started, outputs, params, caught):
    return {
        "command": ["weatdebias", *argv],
        "tool_version": __version__,
        "inputs": {k: str(v) for k, v in (("embedding", getattr(args, "embedding", None)),
                                          ("lexicon", getattr(args, "lexicon", None)))
                   if v is not None},
        "outputs": outputs,
        "params": params,
        "seed": args.seed,
        "started": started,
        "finished": _now(),
        "warnings": [str(w.message) for w in caught],
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_audit(args):
    e = _load(args, args.embedding)
    resolved = _resolve(args, e)
    report = run_tests(e, resolved.tests, args.n_samples, args.seed, args.strict,
                       absolute=not args.signed, skipped=resolved.skipped)
    print(report.format_table())
    outputs = {}
    if args.json:
        _write_json(args.json, report.to_dict())
        outputs["report"] = str(args.json)
    return outputs, {"n_samples": args.n_samples, "signed": args.signed, "strict": args.strict}


def cmd_debias(args):
    if args.mode == "soft" and args.lam is None:
        raise UsageError("debias soft requires --lambda")
    e = _load(args, args.embedding)
    resolved = _resolve(args, e)
    report_path = args.json or f"{args.output}.report.json"
    if args.mode == "hard":
        problems = validate_classes(resolved)
        if problems:
            raise LexiconError(problems)
        params = HardWeatParams(
            angle_threshold=args.angle_threshold,
            max_iterations=args.max_iterations,
            radius_ratio_min=args.radius_ratio,
            seed=args.seed,
            neutral_scope=args.neutral_scope,
            plane=args.plane,
            align_word_circles=not args.unaligned,
            n_samples=args.n_samples,
        )
        res = hardweat(e, resolved, params)
        extra = {"iterations": res.iterations, "guard_passed": res.guard_passed,
                 "centroid": res.centroid.tolist(),
                 "bias_levels_used": res.bias_levels}
    else:
        pairs = None
        if args.pairs:
            pairs = json.loads(Path(args.pairs).read_text(encoding="utf-8"))
        params = SoftWeatParams(
            lam=args.lam,
            neighbors_k=args.neighbors,
            max_rank=args.max_rank,
            selection_threshold=args.threshold,
            normalize_output=not args.no_normalize,
            manual_pairs=pairs,
            protect_attributes=not args.move_attributes,
            sequential=not args.joint,
            mean_over_extended=args.extended_mean,
            n_samples=args.n_samples,
            seed=args.seed,
        )
        res = softweat(e, resolved, params)
        extra = {"selection": res.selection, "plans": [p.to_dict() for p in res.plans]}
    save_embedding(res.embedding, args.output, args.format)
    _write_json(report_path, {"mode": args.mode, "before": res.before.to_dict(),
                              "after": res.after.to_dict(), **extra})
    print("before:")
    print(res.before.format_table())
    print("\nafter:")
    print(res.after.format_table())
    if args.mode == "hard":
        print(f"\niterations: {res.iterations}")
    p = {k: v for k, v in vars(params).items()}
    return {"embedding": str(args.output), "report": str(report_path)}, p


def cmd_eval(args):
    if not args.similarity and not args.analogy:
        raise UsageError("eval needs at least one --similarity or --analogy dataset")
    e = _load(args, args.embedding)
    rows = []
    for path in args.similarity or []:
        try:
            res = spearman_similarity(e, load_similarity(path))
            rows.append({"dataset": Path(path).stem, "kind": "similarity",
                         "score": round(100.0 * res.rho, 2), "raw": res.rho,
                         "used": res.used, "skipped": res.skipped})
        except (OSError, ValueError) as exc:
            rows.append({"dataset": Path(path).stem, "kind": "similarity", "error": str(exc)})
    for path in args.analogy or []:
        try:
            res = analogy_accuracy(e, load_analogy(path), args.max_rank)
            rows.append({"dataset": Path(path).stem, "kind": "analogy",
                         "score": round(res.accuracy, 2), "raw": res.accuracy,
                         "used": res.used, "skipped": res.skipped,
                         "sections": {k: {"correct": c, "used": u} for k, (c, u) in res.sections.items()}})
        except (OSError, ValueError) as exc:
            rows.append({"dataset": Path(path).stem, "kind": "analogy", "error": str(exc)})
    print(f"{'dataset':<20} {'kind':<11} {'score':>8} {'used':>6} {'skipped':>8}")
    for r in rows:
        if "error" in r:
            print(f"{r['dataset']:<20} {r['kind']:<11} error: {r['error']}")
        else:
            print(f"{r['dataset']:<20} {r['kind']:<11} {r['score']:8.2f} {r['used']:6d} {r['skipped']:8d}")
    outputs = {}
    if args.json:
        _write_json(args.json, {"results": rows})
        outputs["report"] = str(args.json)
    status = EXIT_RUNTIME if rows and all("error" in r for r in rows) else EXIT_OK
    return outputs, {"max_rank": args.max_rank}, status


def cmd_neighbors(args):
    e = _load(args, args.embedding)
    k = min(args.k, len(e) - 1)
    for word, cos in nearest_neighbors(e, args.word, max(k, 1), args.max_rank) if k else []:
        print(f"{word}\t{cos:.6f}")
    return {}, {"k": args.k, "max_rank": args.max_rank}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="top-level random seed")
    p.add_argument("--format", choices=("plain", "header"), default="plain",
                   help="embedding text format (input and output)")
    p.add_argument("--json", metavar="PATH", help="write the JSON report here")
    p.add_argument("--strict", action="store_true",
                   help="reject WEAT tests with unequal target sizes instead of trimming")
    p.add_argument("--lowercase-fallback", action="store_true",
                   help="retry failed lookups with the lowercased token")
    p.add_argument("--manifest", metavar="PATH", help="run manifest path")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="weatdebias", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("audit", parents=[common], help="measure WEAT bias")
    p.add_argument("embedding")
    p.add_argument("lexicon")
    p.add_argument("--n-samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--signed", action="store_true", help="aggregate signed d into bias levels")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("debias", help="debias an embedding")
    modes = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in ("hard", "soft"):
        m = modes.add_parser(mode, parents=[common])
        m.add_argument("embedding")
        m.add_argument("lexicon")
        m.add_argument("-o", "--output", required=True)
        m.add_argument("--n-samples", type=int, default=DEFAULT_SAMPLES)
        m.set_defaults(func=cmd_debias)
        if mode == "hard":
            m.add_argument("--angle-threshold", type=float, default=45.0)
            m.add_argument("--max-iterations", type=int, default=50)
            m.add_argument("--radius-ratio", type=float, default=10.0)
            m.add_argument("--plane", choices=("center-only", "center-and-attributes"),
                           default="center-and-attributes")
            m.add_argument("--neutral-scope", choices=("all_vocab", "listed"), default="all_vocab")
            m.add_argument("--unaligned", action="store_true",
                           help="start every word circle at the same angle")
        else:
            m.add_argument("--lambda", dest="lam", type=float)
            m.add_argument("--neighbors", type=int, default=20)
            m.add_argument("--max-rank", type=int, default=50_000)
            m.add_argument("--threshold", type=float, default=0.6)
            m.add_argument("--no-normalize", action="store_true")
            m.add_argument("--pairs", metavar="JSON",
                           help="manual selection: {subclass: [attribute set, ...]}")
            m.add_argument("--joint", action="store_true",
                           help="plan every subclass against the input embedding")
            m.add_argument("--extended-mean", action="store_true",
                           help="take the mean over the extended word list")
            m.add_argument("--move-attributes", action="store_true",
                           help="allow attribute words into neighbourhoods")
            m.add_argument("--freq", metavar="FILE", help="token<TAB>count frequency file")

    p = sub.add_parser("eval", parents=[common], help="similarity / analogy quality")
    p.add_argument("embedding")
    p.add_argument("--similarity", action="append", metavar="FILE")
    p.add_argument("--analogy", action="append", metavar="FILE")
    p.add_argument("--max-rank", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("neighbors", parents=[common], help="nearest neighbours of a word")
    p.add_argument("embedding")
    p.add_argument("word")
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--max-rank", type=int)
    p.add_argument("--freq", metavar="FILE")
    p.set_defaults(func=cmd_neighbors)
    return parser


def _manifest_path(args, outputs):
    if args.manifest:
        return args.manifest
    if getattr(args, "output", None):
        return f"{args.output}.manifest.json"
    if outputs.get("report"):
        return f"{outputs['report']}.manifest.json"
    return None


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = _now()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            out = args.func(args)
        except (UsageError, LexiconError, HardWeatError, UnequalTargetsError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except MissingWordError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        except (OSError, EmbeddingFormatError, SoftWeatError, DegenerateInputError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    caught = [w for w in caught if not issubclass(w.category, DeprecationWarning)]
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    outputs, params = out[0], out[1]
    status = out[2] if len(out) > 2 else EXIT_OK
    path = _manifest_path(args, outputs)
    if path:
        _write_json(path, _manifest(args, argv, started, outputs, params, caught))
    return status


if __name__ == "__main__":
    sys.exit(main())
