"""Batch pipeline driver: ingest -> classify -> rank -> summarize -> evaluate,
plus the annotation service and report generation.

Every subcommand is re-runnable: the same inputs and seeds produce
byte-identical outputs (artifact JSON is sorted and timestamp-free).
Failures exit nonzero with a machine-readable {"code", "message"} line on
stderr. A config file of `key = value` lines supplies flag defaults;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .annotation import SessionStore, qa_sample
from .corpus import Dataset, ingest, normalize, tfidf_index
from .embeddings import load_embeddings
from .metrics import coverage_report, relevance_distribution, rouge, summary_diversity
from .ranker import DmmrParams, build_candidates, load_candidates, save_candidates
from .reports import dataset_report, render_markdown
from .summarizers import METHOD_NAMES, SummaryRecord, summarize
from .taxonomy import TopicAssignment, TopicLexicon, classify, expand_lexicon
from .textnorm import load_stopwords, simple_tokens, tokenize

logger = logging.getLogger(__name__)


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def load_config(path) -> dict[str, str]:
    """`key = value` lines; '#' comments; later keys win."""
    out: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip().strip("'\"")
    return out


def _typed_config(parser: argparse.ArgumentParser, config: dict[str, str]) -> dict:
    """Convert config strings with each matching argument's declared type."""
    actions: dict[str, argparse.Action] = {}
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
            else:
                actions.setdefault(action.dest, action)
    typed = {}
    for key, value in config.items():
        action = actions.get(key)
        if action is None:
            logger.warning("config: ignoring unknown key %r", key)
            continue
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            typed[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            typed[key] = action.type(value)
        else:
            typed[key] = value
    return typed


def _install_defaults(parser: argparse.ArgumentParser, typed: dict) -> None:
    # subparsers parse into a fresh namespace, so defaults must be installed
    # on every parser that owns the destination, not just the root
    stack = [parser]
    while stack:
        p = stack.pop()
        own = set()
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
            else:
                own.add(action.dest)
        p.set_defaults(**{k: v for k, v in typed.items() if k in own})


def cmd_ingest(args) -> int:
    ds = ingest(args.input, format=args.format, strict=args.strict,
                name=args.name, keywords_path=args.keywords,
                summary_budget=args.budget)
    if not args.raw:
        stop = load_stopwords(args.stopwords)
        ds = normalize(ds, stop)
    ds.save(args.out)
    print(f"wrote {args.out}: {len(ds.tweets)} tweets"
          f" ({'raw' if args.raw else 'normalized'})")
    return 0


def cmd_classify(args) -> int:
    ds = Dataset.load(args.dataset)
    lexicon = TopicLexicon.load(args.lexicon)
    if args.expand > 0:
        lexicon = expand_lexicon(ds, lexicon, args.expand, threshold=args.threshold)
        if args.lexicon_out:
            lexicon.save(args.lexicon_out)
    assignment = classify(ds, lexicon, args.threshold)
    assignment.save(args.out)
    print(f"wrote {args.out}: {assignment.classified_count()} classified, "
          f"{len(assignment.dropped)} dropped")
    return 0


def cmd_rank(args) -> int:
    ds = Dataset.load(args.dataset)
    assignment = TopicAssignment.load(args.assignment)
    lexicon = TopicLexicon.load(args.lexicon)
    index = tfidf_index(ds)
    params = DmmrParams(lambda_=args.lambda_, sim=args.sim)
    table = load_embeddings(args.embeddings) if args.embeddings else None
    cands = build_candidates(ds, assignment, index, lexicon, params, table=table)
    save_candidates(cands, ds, args.out)
    total = sum(c.source_size for c in cands)
    short = sum(len(c.ranked_ids) for c in cands)
    print(f"wrote {args.out}: {short} of {total} tweets shortlisted "
          f"({100.0 * short / total:.2f}%)")
    return 0


def cmd_summarize(args) -> int:
    ds = Dataset.load(args.dataset)
    record = summarize(args.method, ds, args.budget, seed=args.seed)
    record.save(args.out)
    print(f"wrote {args.out}: {len(record.tweet_ids)} tweets by {args.method}")
    return 0


def cmd_evaluate(args) -> int:
    ds = Dataset.load(args.dataset)
    record = SummaryRecord.load(args.summary)
    out: dict = {"summary": record.to_dict()}
    if args.assignment:
        assignment = TopicAssignment.load(args.assignment)
        out["coverage"] = coverage_report(record, assignment).to_dict()
    labels = {t.id: t.relevance_label for t in ds.tweets if t.relevance_label}
    if all(tid in labels for tid in record.tweet_ids):
        out["relevance"] = relevance_distribution(record, labels)
    if args.embeddings:
        table = load_embeddings(args.embeddings)
        out["diversity"] = summary_diversity(record, ds, table)
    _write_json(out, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_rouge(args) -> int:
    sys_text = Path(args.system).read_text(encoding="utf-8")
    ref_text = Path(args.reference).read_text(encoding="utf-8")
    if args.raw_tokens:
        sys_tokens = simple_tokens(sys_text)
        ref_tokens = simple_tokens(ref_text)
    else:
        stop = load_stopwords(args.stopwords)
        sys_tokens = tokenize(sys_text, stop)
        ref_tokens = tokenize(ref_text, stop)
    scores = rouge(sys_tokens, ref_tokens)
    print(json.dumps(scores.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_qa_sample(args) -> int:
    assignment = TopicAssignment.load(args.assignment)
    sample = qa_sample(assignment, args.seed)
    _write_json(sample.to_dict(), args.out)
    total = sum(len(ids) for ids in sample.by_topic.values())
    print(f"wrote {args.out}: {total} tweets sampled across "
          f"{len(sample.by_topic)} topics")
    return 0


def cmd_serve(args) -> int:
    from .service import ApiConfig, serve

    config = ApiConfig(data_dir=Path(args.data_dir), host=args.host,
                       port=args.port, auth_token=args.token,
                       allow_short=args.allow_short)
    serve(config)
    return 0


def cmd_report(args) -> int:
    data_dir = Path(args.data_dir)
    ds_dir = data_dir / "datasets" / args.dataset
    ds = Dataset.load(ds_dir / "dataset.json")
    assignment = None
    if (ds_dir / "assignment.json").exists():
        assignment = TopicAssignment.load(ds_dir / "assignment.json")
    candidates = None
    if (ds_dir / "candidates.json").exists():
        candidates = load_candidates(ds_dir / "candidates.json")
    store = None
    if (data_dir / "events.jsonl").exists():
        store = SessionStore.replay(data_dir / "events.jsonl")
    table = None
    if (data_dir / "embeddings.txt").exists():
        table = load_embeddings(data_dir / "embeddings.txt")

    report = dataset_report(ds, assignment=assignment, candidates=candidates,
                            store=store, table=table,
                            include_rouge=args.rouge, seed=args.seed)
    _write_json(report, args.out)
    print(f"wrote {args.out}")
    if args.markdown:
        Path(args.markdown).write_text(render_markdown(report), encoding="utf-8")
        print(f"wrote {args.markdown}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crisissumm",
        description="Semi-automated ground-truth summaries for disaster tweet corpora")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value file supplying flag defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a JSONL/CSV corpus and normalize it")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--name", help="dataset name (default: input file stem)")
    p.add_argument("--keywords", help="disaster keyword file (one term per line)")
    p.add_argument("--stopwords", help="stopword file override")
    p.add_argument("--budget", type=int, default=40, help="summary budget")
    p.add_argument("--strict", action="store_true",
                   help="fail on malformed records instead of skipping")
    p.add_argument("--raw", action="store_true", help="skip normalization")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("classify", help="assign topics via the weighted lexicon")
    p.add_argument("--dataset", required=True)
    p.add_argument("--lexicon", help="topic lexicon JSON (default: bundled)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--expand", type=int, default=0,
                   help="pseudo-relevance-feedback terms to add per topic")
    p.add_argument("--lexicon-out", help="write the expanded lexicon here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("rank", help="rank topics and build annotator shortlists")
    p.add_argument("--dataset", required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--lexicon", help="topic lexicon JSON (default: bundled)")
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.7,
                   help="relevance/diversity trade-off in [0,1]")
    p.add_argument("--sim", choices=("tfidf_cosine", "embedding_cosine"),
                   default="tfidf_cosine")
    p.add_argument("--embeddings", help="word vectors (needed for embedding_cosine)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("summarize", help="run an extractive baseline")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", required=True, choices=METHOD_NAMES)
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="coverage/relevance/diversity for one summary")
    p.add_argument("--dataset", required=True)
    p.add_argument("--summary", required=True)
    p.add_argument("--assignment")
    p.add_argument("--embeddings")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rouge", help="ROUGE-1/2/L F1 between two text files")
    p.add_argument("--system", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--raw-tokens", action="store_true",
                   help="case-folded split only (skip stopwords/stemming)")
    p.add_argument("--stopwords")
    p.set_defaults(func=cmd_rouge)

    p = sub.add_parser("qa-sample", help="draw the quality-assessment sample")
    p.add_argument("--assignment", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_qa_sample)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--token", help="static bearer token")
    p.add_argument("--allow-short", action="store_true",
                   help="allow finalizing under budget")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="emit the evaluation matrices for a dataset")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--rouge", action="store_true",
                   help="include the summarizer ROUGE matrix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--markdown", help="also render markdown here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # config supplies defaults only; explicit flags always win, so
        # re-parse with the typed config installed as parser defaults
        parser = build_parser()
        _install_defaults(parser, _typed_config(parser, load_config(args.config)))
        args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as e:  # noqa: BLE001 - single CLI error boundary
        code = getattr(e, "code", e.__class__.__name__.lower())
        print(json.dumps({"code": str(code), "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
