import argparse
import itertools
import json
import logging
import sys

import requests

from OCRRevise import OCRRevise as ocr
from OCRRevise.common.types import ErrorCategory
from OCRRevise.exceptions import CorpusFormatError, MetricsError, OCRReviseError
from OCRRevise.pipeline.pipeline_api import EXPORT_STYLES

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_MAX_SEED = 2 ** 64


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("{prog}: error: {message}\n".format(prog=self.prog, message=message))
        raise _UsageError(message)


def _seed(value):
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("invalid seed {0!r}".format(value))
    if not 0 <= seed < _MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer, got {0}".format(value))
    return seed


def _positive(value):
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("invalid number {0!r}".format(value))
    if number < 1:
        raise argparse.ArgumentTypeError("must be at least 1, got {0}".format(value))
    return number


def _nonNegative(value):
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("invalid number {0!r}".format(value))
    if number < 0:
        raise argparse.ArgumentTypeError("must not be negative, got {0}".format(value))
    return number


def _kValues(value):
    try:
        values = sorted({int(part) for part in value.split(",")})
    except ValueError:
        raise argparse.ArgumentTypeError("invalid cut-offs {0!r}".format(value))
    if not values or values[0] < 1:
        raise argparse.ArgumentTypeError("cut-offs must be positive, got {0}".format(value))
    return values


def buildParser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", help="Contamination profile file (key = value lines)")
    common.add_argument("--seed", type=_seed, help="Master seed, overrides the profile's master_seed")
    common.add_argument("--confusion-file", help="Confusion table file (<char> -> <chars> lines)")
    common.add_argument("--out", help="Output file. Defaults to standard output where allowed")
    common.add_argument("--verbose", action="store_true", help="Log progress at INFO level")

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("--in", dest="source", required=True, help="Corpus directory, JSONL file or URL")
    corpus.add_argument("--format", choices=("plain_dir", "jsonl"), default="jsonl", help="Corpus format")
    corpus.add_argument("--jobs", type=_positive, default=1, help="Number of worker processes")
    corpus.add_argument("--limit", type=_nonNegative, help="Maximum number of documents")
    corpus.add_argument("--skip", type=_nonNegative, default=0, help="Number of leading documents to skip")

    parser = _ArgumentParser(prog="ocrrevise", description="Build, correct and evaluate OCR error corpora.")
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=_ArgumentParser)
    commands.required = True

    contaminate = commands.add_parser("contaminate", parents=[common, corpus], help="Contaminate documents")
    contaminate.add_argument("--only", choices=[c.value for c in ErrorCategory], help="Inject a single error category")
    contaminate.add_argument("--include-events", action="store_true", help="Add events and layout to every record")

    synthesize = commands.add_parser("synthesize", parents=[common, corpus], help="Build parallel pairs as JSONL")
    synthesize.add_argument("--only", choices=[c.value for c in ErrorCategory], help="Inject a single error category")
    synthesize.add_argument("--prompt-file", help="System prompt file")
    synthesize.add_argument("--include-events", action="store_true", help="Add events and layout to every record")
    synthesize.add_argument("--style", choices=EXPORT_STYLES, default="revise", help="Record layout")

    train = commands.add_parser("train-lm", parents=[common, corpus], help="Train the corrector's models")
    train.add_argument("--smoothing-k", type=float, default=0.1, help="Additive smoothing constant")

    correct = commands.add_parser("correct", parents=[common], help="Correct contaminated documents")
    correct.add_argument("--pairs", required=True, help="Pair JSONL whose inputs are corrected")
    correct.add_argument("--model", required=True, help="Model file from train-lm")
    correct.add_argument("--jobs", type=_positive, default=1, help="Number of worker processes")
    correct.add_argument("--max-edits", type=int, choices=(1, 2), default=2, help="Token repair budget")
    correct.add_argument("--only", choices=[c.value for c in ErrorCategory], help="Correct a single error category")

    evaluate = commands.add_parser("evaluate", parents=[common], help="Report CER/WER before and after correction")
    evaluate.add_argument("--pairs", required=True, help="Pair JSONL")
    evaluate.add_argument("--corrected", required=True, help="Corrected JSONL from correct")

    retrieval = commands.add_parser("retrieval-eval", parents=[common], help="Report BM25 Recall@K")
    retrieval.add_argument("--pairs", required=True, help="Pair JSONL")
    retrieval.add_argument("--corrected", help="Corrected JSONL from correct")
    retrieval.add_argument("--k", type=_kValues, default=[1, 3, 5], help="Comma-separated cut-offs")

    dump = commands.add_parser("dump-defaults", parents=[common], help="Print the default profile")
    dump.add_argument("--confusion", action="store_true", help="Print the default confusion table instead")

    return parser


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _requireOut(args):
    if not args.out:
        raise _UsageError("{0} needs --out".format(args.command))


def _toolkit(args):
    return ocr.OCRRevise(
        profile=args.profile,
        seed=args.seed,
        confusion=args.confusion_file,
        prompt=getattr(args, "prompt_file", None),
    )


def _contaminationProfile(toolkit, args):
    if getattr(args, "only", None):
        return toolkit.profile.singleCategoryProfile(args.only, base=toolkit.contamination_profile)
    return toolkit.contamination_profile


def _readCorrected(toolkit, path):
    corrected = {}
    for lineNumber, record in toolkit.common_funcs.readJsonl(path):
        if not isinstance(record.get("id"), str) or not isinstance(record.get("text"), str):
            raise CorpusFormatError("OCRRevise: Line {0} of {1} lacks an id or text.".format(lineNumber, path))
        corrected[record["id"]] = record["text"]
    return corrected


def _contaminate(toolkit, args):
    corpus = toolkit.pipeline.ingestCorpus(args.source, format=args.format)
    documents = toolkit.pipeline.contaminate(
        corpus, _contaminationProfile(toolkit, args), jobs=args.jobs, skip=args.skip, limit=args.limit
    )
    lines = []
    for document in documents:
        record = {"id": document.id, "text": document.text}
        if args.include_events:
            record["events"] = [event.toRecord() for event in document.events]
            record["layout"] = document.layout.toRecord()
        lines.append(json.dumps(record, ensure_ascii=False) + "\n")
    _emit("".join(lines), args.out)


def _synthesize(toolkit, args):
    _requireOut(args)
    corpus = toolkit.pipeline.ingestCorpus(args.source, format=args.format)
    pairs = toolkit.pipeline.synthesize(
        corpus, _contaminationProfile(toolkit, args), jobs=args.jobs, skip=args.skip, limit=args.limit
    )
    toolkit.pipeline.exportJsonl(
        pairs, toolkit.prompt_template, args.out, include_events=args.include_events, style=args.style
    )


def _train(toolkit, args):
    _requireOut(args)
    corpus = toolkit.pipeline.ingestCorpus(args.source, format=args.format)
    corpus = itertools.islice(corpus, args.skip, None if args.limit is None else args.skip + args.limit)
    models = toolkit.corrector.trainModels(corpus, smoothing_k=args.smoothing_k)
    toolkit.corrector.saveModels(models, args.out)


def _correct(toolkit, args):
    pairs = toolkit.pipeline.readPairs(args.pairs)
    models = toolkit.corrector.loadModels(args.model)
    corrections = toolkit.corrector.correctMany(
        [(pair.id, pair.contaminated) for pair in pairs],
        models,
        profile_hint=toolkit.contamination_profile,
        max_edits=args.max_edits,
        jobs=args.jobs,
        only=args.only,
    )
    lines = []
    for docId, correction in corrections:
        record = {
            "id": docId,
            "text": correction.text,
            "columns": list(correction.chosen_columns_per_section),
            "diagnostics": correction.stage_diagnostics,
        }
        lines.append(json.dumps(record, ensure_ascii=False) + "\n")
    _emit("".join(lines), args.out)


def _evaluate(toolkit, args):
    pairs = toolkit.pipeline.readPairs(args.pairs)
    report = toolkit.metrics.evaluatePairs(_readCorrected(toolkit, args.corrected), pairs)
    if args.out:
        _emit(json.dumps(report.toRecord(), sort_keys=True, indent=2) + "\n", args.out)
    else:
        _emit(toolkit.metrics.reportToFrame(report).to_string() + "\n", None)


def _retrieval(toolkit, args):
    pairs = toolkit.pipeline.readPairs(args.pairs)
    queries = toolkit.metrics.synthesizeQueries(
        [(pair.id, pair.clean) for pair in pairs], toolkit.contamination_profile.master_seed
    )
    variants = [
        ("clean", [(pair.id, pair.clean) for pair in pairs]),
        ("contaminated", [(pair.id, pair.contaminated) for pair in pairs]),
    ]
    if args.corrected:
        corrected = _readCorrected(toolkit, args.corrected)
        unmatched = sorted(set(corrected).symmetric_difference(pair.id for pair in pairs))
        if unmatched:
            raise MetricsError("OCRRevise: Unmatched document ids: {ids}".format(ids=", ".join(unmatched)))
        variants.append(("corrected", [(pair.id, corrected[pair.id]) for pair in pairs]))

    reports = [toolkit.metrics.bm25Recall(docs, queries, args.k, variant=name) for name, docs in variants]
    if args.out:
        _emit(json.dumps([r.toRecord() for r in reports], sort_keys=True, indent=2) + "\n", args.out)
    else:
        _emit(toolkit.metrics.reportToFrame(reports).to_string() + "\n", None)


def _dumpDefaults(toolkit, args):
    if args.confusion:
        _emit(toolkit.channels.dumpConfusionTable(toolkit.channels.defaultConfusionTable()), args.out)
    else:
        _emit(toolkit.profile.formatProfile(toolkit.profile.defaultProfile()), args.out)


_COMMANDS = {
    "contaminate": _contaminate,
    "synthesize": _synthesize,
    "train-lm": _train,
    "correct": _correct,
    "evaluate": _evaluate,
    "retrieval-eval": _retrieval,
    "dump-defaults": _dumpDefaults,
}


def run(argv):
    """Runs one ocrrevise command.

    Returns:
        int: 0 on success, 1 on a usage error, 2 on a data or validation error.
    """

    parser = buildParser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )

    try:
        toolkit = _toolkit(args)
        _COMMANDS[args.command](toolkit, args)
    except _UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write("ocrrevise: error: {0}\n".format(e))
        return EXIT_USAGE
    except (OCRReviseError, OSError, requests.exceptions.RequestException) as e:
        logging.error(getattr(e, "message", None) or str(e))
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
