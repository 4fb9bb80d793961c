"""Command-line surface.

Subcommands map onto the library: ``match`` (rule-based label prediction),
``train``/``classify`` (drug-type classifier), ``correct`` (match + detect +
fix approval numbers), ``query`` (drug info lookup), ``dedup`` (company
lists), ``parse-dosage`` (debug parser), and ``gen`` (synthetic corpus).

Exit codes: 0 success, 1 usage/config error, 2 input-data error.
Diagnostics go to stderr; data goes to stdout or ``--output``.  Every
subcommand accepts ``--config FILE`` (a JSON object mirroring its flags;
explicit flags win).
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .bayes import (
    MissingClassError,
    ModelFormatError,
    TooSmallError,
    build_vocabulary,
    derive_training_labels,
    fit,
    load_model,
    predict,
    save_model,
    top_tokens,
    train_test_split,
)
from .correction import run_pipeline
from .druginfo import build_index, query
from .dosage import normalize_strength, parse_dosage
from .fuzzy import dedup_manufacturers
from .matcher import MatcherConfig, Metrics, evaluate, evaluate_binary, predict_batch
from .records import BadHeaderError, DrugType, LoadResult, MalformedApprovalNumber, MatchLabel, load_dataset
from .synth import GeneratorConfig, InvalidConfigError, generate, write_corpus_csv, write_truth_csv
from .textnorm import EmptyResultError, clean_name, load_brand_lexicon, tokenize


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1, not argparse's default 2
        raise _UsageError(f"{self.prog}: {message}")


DEFAULTS: dict[str, dict] = {
    "match": {
        "input": None,
        "output": None,
        "format": "csv",
        "name_threshold": 90,
        "require_quantity_evidence": True,
        "brand_lexicon": None,
        "figures": None,
    },
    "train": {
        "input": None,
        "model": None,
        "alpha": 1.0,
        "test_fraction": 0.1,
        "seed": 0,
        "token_mode": "unigram",
        "brand_lexicon": None,
        "figures": None,
    },
    "classify": {"model": None, "name": None, "brand_lexicon": None},
    "correct": {
        "input": None,
        "model": None,
        "min_confidence": 0.5,
        "name_threshold": 90,
        "require_quantity_evidence": True,
        "output": None,
        "brand_lexicon": None,
        "figures": None,
    },
    "query": {"input": None, "name": None, "threshold": 90, "format": "table", "brand_lexicon": None},
    "dedup": {"manufacturers": None, "threshold": 90, "format": "text", "output": None},
    "parse-dosage": {"output": None},
    "gen": {
        "out": None,
        "truth_out": None,
        "n_pairs": 1000,
        "match_fraction": 0.5,
        "unit_rescale": True,
        "package_refactor": True,
        "brand_prefix": True,
        "symbol_noise": True,
        "dosage_drop": True,
        "manufacturer_variants": True,
        "znz_flip_fraction": 0.0,
        "digit_flip_fraction": 0.0,
        "seed": 0,
        "class_token_overlap": 0.1,
    },
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "match": ("input",),
    "train": ("input", "model"),
    "classify": ("model", "name"),
    "correct": ("input", "model"),
    "query": ("input", "name"),
    "dedup": ("manufacturers",),
    "parse-dosage": (),
    "gen": ("out",),
}

S = argparse.SUPPRESS


def build_parser() -> _Parser:
    parser = _Parser(prog="drugmatch", description=__doc__)
    parser.add_argument("--version", action="version", version=f"drugmatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("match", help="predict match labels for record pairs")
    p.add_argument("--input", default=S, help="dataset CSV")
    p.add_argument("--output", default=S, help="write decisions here instead of stdout")
    p.add_argument("--format", default=S, choices=("csv", "json"))
    p.add_argument("--name-threshold", type=int, default=S)
    p.add_argument("--no-require-quantity-evidence", dest="require_quantity_evidence", action="store_false", default=S)
    p.add_argument("--brand-lexicon", default=S, help="brand list file, one per line")
    p.add_argument("--figures", default=S, help="directory for report figures")

    p = sub.add_parser("train", help="fit the drug-type classifier from approval letters")
    p.add_argument("--input", default=S)
    p.add_argument("--model", default=S, help="where to write the model JSON")
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--test-fraction", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--token-mode", default=S, choices=("unigram", "bigram"))
    p.add_argument("--brand-lexicon", default=S)
    p.add_argument("--figures", default=S)

    p = sub.add_parser("classify", help="classify one drug name")
    p.add_argument("--model", default=S)
    p.add_argument("--name", default=S)
    p.add_argument("--brand-lexicon", default=S)

    p = sub.add_parser("correct", help="match, then detect and fix approval inconsistencies")
    p.add_argument("--input", default=S)
    p.add_argument("--model", default=S)
    p.add_argument("--min-confidence", type=float, default=S)
    p.add_argument("--name-threshold", type=int, default=S)
    p.add_argument("--no-require-quantity-evidence", dest="require_quantity_evidence", action="store_false", default=S)
    p.add_argument("--output", default=S)
    p.add_argument("--brand-lexicon", default=S)
    p.add_argument("--figures", default=S)

    p = sub.add_parser("query", help="popularity and manufacturers for a drug name")
    p.add_argument("--input", default=S)
    p.add_argument("--name", default=S)
    p.add_argument("--threshold", type=int, default=S)
    p.add_argument("--format", default=S, choices=("table", "json"))
    p.add_argument("--brand-lexicon", default=S)

    p = sub.add_parser("dedup", help="duplicate and unique company lists")
    p.add_argument("--manufacturers", default=S, help="company list file, one per line")
    p.add_argument("--threshold", type=int, default=S)
    p.add_argument("--format", default=S, choices=("text", "json"))
    p.add_argument("--output", default=S)

    p = sub.add_parser("parse-dosage", help="parse dosage strings from stdin, one per line")
    p.add_argument("--output", default=S)

    p = sub.add_parser("gen", help="generate a labeled synthetic corpus")
    p.add_argument("--out", default=S, help="corpus CSV path")
    p.add_argument("--truth-out", default=S, help="sidecar truth CSV (default: <out>.truth.csv)")
    p.add_argument("--n-pairs", type=int, default=S)
    p.add_argument("--match-fraction", type=float, default=S)
    p.add_argument("--no-unit-rescale", dest="unit_rescale", action="store_false", default=S)
    p.add_argument("--no-package-refactor", dest="package_refactor", action="store_false", default=S)
    p.add_argument("--no-brand-prefix", dest="brand_prefix", action="store_false", default=S)
    p.add_argument("--no-symbol-noise", dest="symbol_noise", action="store_false", default=S)
    p.add_argument("--no-dosage-drop", dest="dosage_drop", action="store_false", default=S)
    p.add_argument("--no-manufacturer-variants", dest="manufacturer_variants", action="store_false", default=S)
    p.add_argument("--znz-flip-fraction", type=float, default=S)
    p.add_argument("--digit-flip-fraction", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--class-token-overlap", type=float, default=S)

    for name, sp in sub.choices.items():
        sp.add_argument("--config", default=S, help="JSON file mirroring this command's flags")
    return parser


def _merge_options(command: str, provided: dict) -> dict:
    config_path = provided.pop("config", None)
    from_config = {}
    if config_path is not None:
        try:
            from_config = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise _UsageError(f"cannot read config file {config_path}: {exc}") from exc
        if not isinstance(from_config, dict):
            raise _UsageError(f"config file {config_path} must hold a JSON object")
        unknown = set(from_config) - set(DEFAULTS[command])
        if unknown:
            raise _UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
    merged = {**DEFAULTS[command], **from_config, **provided}
    missing = [k for k in REQUIRED[command] if merged.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise _UsageError(f"drugmatch {command}: missing required option(s): {flags}")
    return merged


@contextmanager
def _out_stream(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _jdump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def _load(path: str) -> LoadResult:
    result = load_dataset(path)
    for err in result.bad_rows:
        print(f"drugmatch: line {err.line_no}: {err.reason} (row skipped)", file=sys.stderr)
    return result


def _lexicon(v: dict) -> frozenset[str]:
    if v.get("brand_lexicon"):
        return load_brand_lexicon(v["brand_lexicon"])
    return frozenset()


def _choice(v: dict, key: str, allowed: tuple[str, ...]) -> str:
    value = v[key]
    if value not in allowed:
        raise _UsageError(f"{key} must be one of {allowed}, got {value!r}")
    return value


def _figures_dir(v: dict) -> Path | None:
    if not v.get("figures"):
        return None
    path = Path(v["figures"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _metrics_payload(m: Metrics) -> dict:
    return {
        "accuracy": m.accuracy,
        "precision": m.precision,
        "recall": m.recall,
        "confusion": {"tp": m.tp, "fp": m.fp, "fn": m.fn, "tn": m.tn},
    }


def _strength_repr(s) -> str | None:
    return s.render() if s is not None else None


def cmd_match(v: dict) -> int:
    fmt = _choice(v, "format", ("csv", "json"))
    result = _load(v["input"])
    cfg = MatcherConfig(
        name_threshold=v["name_threshold"],
        require_quantity_evidence=v["require_quantity_evidence"],
    )
    lexicon = _lexicon(v)
    decisions = predict_batch(result.pairs, cfg, lexicon)
    scored = [(d.label, p.gold_label) for d, p in zip(decisions, result.pairs) if p.gold_label is not None]
    metrics = evaluate([p for p, _ in scored], [g for _, g in scored]) if scored else None

    with _out_stream(v["output"]) as out:
        if fmt == "csv":
            out.write(
                "pair_index,label,reason,clean_name_1,clean_name_2,name_ratio,"
                "strength_1,strength_2,package_total_1,package_total_2\n"
            )
            for i, d in enumerate(decisions):
                e = d.evidence
                row = [
                    str(i),
                    str(d.label.value),
                    d.reason.value,
                    e.name1 or "",
                    e.name2 or "",
                    "" if e.name_ratio is None else str(e.name_ratio),
                    _strength_repr(e.strength1) or "",
                    _strength_repr(e.strength2) or "",
                    "" if e.total1 is None else str(e.total1),
                    "" if e.total2 is None else str(e.total2),
                ]
                out.write(",".join(row) + "\n")
        else:
            out.write(_jdump({"format": "drugmatch/decisions", "version": 1}) + "\n")
            for i, d in enumerate(decisions):
                e = d.evidence
                out.write(
                    _jdump(
                        {
                            "pair_index": i,
                            "label": d.label.value,
                            "reason": d.reason.value,
                            "evidence": {
                                "clean_name_1": e.name1,
                                "clean_name_2": e.name2,
                                "name_ratio": e.name_ratio,
                                "strength_1": _strength_repr(e.strength1),
                                "strength_2": _strength_repr(e.strength2),
                                "package_total_1": e.total1,
                                "package_total_2": e.total2,
                            },
                        }
                    )
                    + "\n"
                )
            if metrics is not None:
                out.write(_jdump({"metrics": _metrics_payload(metrics)}) + "\n")
    if fmt == "csv" and metrics is not None:
        print(
            f"drugmatch: accuracy={metrics.accuracy:.4f}"
            f" precision={'n/a' if metrics.precision is None else f'{metrics.precision:.4f}'}"
            f" recall={'n/a' if metrics.recall is None else f'{metrics.recall:.4f}'}"
            f" tp={metrics.tp} fp={metrics.fp} fn={metrics.fn} tn={metrics.tn}",
            file=sys.stderr,
        )

    figures = _figures_dir(v)
    if figures is not None:
        from . import report

        report.save_reason_breakdown(decisions, figures / "match_reasons.png")
        if metrics is not None:
            report.save_confusion_matrix(metrics, figures / "match_confusion.png")
    return 0


def _token_mode(v: dict) -> str:
    return {"unigram": "char_unigram", "bigram": "char_bigram"}[_choice(v, "token_mode", ("unigram", "bigram"))]


def cmd_train(v: dict) -> int:
    token_mode = _token_mode(v)
    result = _load(v["input"])
    lexicon = _lexicon(v)
    data = derive_training_labels(result.pairs, lexicon, token_mode)
    train_set, test_set = train_test_split(data, v["test_fraction"], v["seed"])
    vocab = build_vocabulary(train_set)
    model = fit(train_set, vocab, v["alpha"], token_mode)
    preds = [predict(model, item.tokens)[0] for item in test_set]
    metrics = evaluate_binary(preds, [item.klass for item in test_set], DrugType.TRADITIONAL_CHINESE)
    save_model(model, v["model"])
    print(
        _jdump(
            {
                "format": "drugmatch/train-report",
                "version": 1,
                "examples": {"total": len(data), "train": len(train_set), "test": len(test_set)},
                "vocabulary_size": vocab.size,
                "alpha": model.alpha,
                "token_mode": model.token_mode,
                "model_path": str(v["model"]),
                "metrics": _metrics_payload(metrics),
            }
        )
    )
    figures = _figures_dir(v)
    if figures is not None:
        from . import report

        report.save_confusion_matrix(
            metrics,
            figures / "train_confusion.png",
            positive_name="traditional chinese",
            negative_name="western",
            title="Drug-type classifier (test split)",
        )
        report.save_token_frequency(top_tokens(train_set, 15), figures / "train_top_tokens.png")
    return 0


def cmd_classify(v: dict) -> int:
    model = load_model(v["model"])
    cleaned = clean_name(v["name"], _lexicon(v))
    drug_type, posterior = predict(model, tokenize(cleaned, model.token_mode))
    print(
        _jdump(
            {
                "format": "drugmatch/classification",
                "version": 1,
                "name": v["name"],
                "cleaned": cleaned.text,
                "drug_type": drug_type.value,
                "posterior": {c.value: p for c, p in posterior.items()},
            }
        )
    )
    return 0


def cmd_correct(v: dict) -> int:
    result = _load(v["input"])
    model = load_model(v["model"])
    lexicon = _lexicon(v)
    cfg = MatcherConfig(
        name_threshold=v["name_threshold"],
        require_quantity_evidence=v["require_quantity_evidence"],
    )
    pipeline = run_pipeline(result.pairs, model, cfg, v["min_confidence"], lexicon)
    with _out_stream(v["output"]) as out:
        out.write(_jdump({"format": "drugmatch/correction-report", "version": 1}) + "\n")
        for row in pipeline.rows:
            if row.decision.label is not MatchLabel.MATCH:
                continue
            c = row.correction
            out.write(
                _jdump(
                    {
                        "pair_index": row.index,
                        "label": row.decision.label.value,
                        "kind": c.kind.value if c else None,
                        "action": c.action.value if c else None,
                        "chosen": str(c.chosen) if c and c.chosen else None,
                        "confidence": c.confidence if c else None,
                        "predicted_type": c.predicted_type.value if c and c.predicted_type else None,
                    }
                )
                + "\n"
            )
        summary = pipeline.summary
        out.write(
            _jdump(
                {
                    "summary": {
                        "pairs": summary.pairs,
                        "matches": summary.matches,
                        "inconsistencies": {k.value: n for k, n in summary.inconsistencies.items()},
                        "auto_corrected": summary.auto_corrected,
                        "manual_review": summary.manual_review,
                    }
                }
            )
            + "\n"
        )
    figures = _figures_dir(v)
    if figures is not None:
        from . import report

        report.save_inconsistency_breakdown(pipeline, figures / "correction_kinds.png")
    return 0


def cmd_query(v: dict) -> int:
    fmt = _choice(v, "format", ("table", "json"))
    result = _load(v["input"])
    lexicon = _lexicon(v)
    records = [r for pair in result.pairs for r in (pair.source1, pair.source2)]
    index = build_index(records, v["threshold"], lexicon)
    info = query(index, v["name"], lexicon)
    if fmt == "json":
        print(
            _jdump(
                {
                    "format": "drugmatch/drug-info",
                    "version": 1,
                    "name": info.name,
                    "popularity": info.popularity,
                    "manufacturer_count": info.manufacturer_count,
                    "manufacturer_name_count": info.manufacturer_name_count,
                    "duplicated_groups": [list(g) for g in info.duplicated_groups],
                }
            )
        )
    else:
        print(f"name:                {info.name}")
        print(f"popularity:          {info.popularity}")
        print(f"manufacturers:       {info.manufacturer_count}")
        print(f"manufacturer names:  {info.manufacturer_name_count}")
        if info.duplicated_groups:
            print("duplicated groups:")
            for group in info.duplicated_groups:
                print("  - " + " | ".join(group))
        else:
            print("duplicated groups:   none")
    return 0


def cmd_dedup(v: dict) -> int:
    fmt = _choice(v, "format", ("text", "json"))
    path = Path(v["manufacturers"])
    names = [
        line.strip()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    clusters = dedup_manufacturers(names, v["threshold"])
    duplicates = clusters.duplicated_groups()
    with _out_stream(v["output"]) as out:
        if fmt == "json":
            out.write(
                _jdump(
                    {
                        "format": "drugmatch/company-dedup",
                        "version": 1,
                        "threshold": v["threshold"],
                        "duplicates": [list(g) for g in duplicates],
                        "unique": list(clusters.representatives),
                    }
                )
                + "\n"
            )
        else:
            out.write(f"duplicated companies ({len(duplicates)} groups):\n")
            for group in duplicates:
                out.write("  " + " | ".join(group) + "\n")
            out.write(f"unique companies ({len(clusters.representatives)}):\n")
            for name in clusters.representatives:
                out.write("  " + name + "\n")
    return 0


def cmd_parse_dosage(v: dict) -> int:
    with _out_stream(v["output"]) as out:
        out.write(_jdump({"format": "drugmatch/parsed-dosage", "version": 1}) + "\n")
        for line in sys.stdin:
            raw = line.rstrip("\n")
            parsed = parse_dosage(raw)
            payload = {
                "input": raw,
                "strength": None,
                "strength_normalized": None,
                "package": None,
                "residue": list(parsed.residue),
            }
            if parsed.strength is not None:
                norm = normalize_strength(parsed.strength)
                payload["strength"] = parsed.strength.render()
                payload["strength_normalized"] = norm.render()
            if parsed.package is not None:
                payload["package"] = {
                    "factors": [{"count": f.count, "word": f.word} for f in parsed.package.factors],
                    "total": parsed.package.total,
                }
            out.write(_jdump(payload) + "\n")
    return 0


def cmd_gen(v: dict) -> int:
    cfg = GeneratorConfig(
        n_pairs=v["n_pairs"],
        match_fraction=v["match_fraction"],
        unit_rescale=v["unit_rescale"],
        package_refactor=v["package_refactor"],
        brand_prefix=v["brand_prefix"],
        symbol_noise=v["symbol_noise"],
        dosage_drop=v["dosage_drop"],
        manufacturer_variants=v["manufacturer_variants"],
        znz_flip_fraction=v["znz_flip_fraction"],
        digit_flip_fraction=v["digit_flip_fraction"],
        seed=v["seed"],
        class_token_overlap=v["class_token_overlap"],
    )
    corpus = generate(cfg)
    write_corpus_csv(corpus, v["out"])
    truth_path = v["truth_out"] or str(v["out"]) + ".truth.csv"
    write_truth_csv(corpus, truth_path)
    print(
        f"drugmatch: wrote {len(corpus.pairs)} pairs to {v['out']}"
        f" ({len(corpus.planted)} planted approval corruptions; truth in {truth_path})",
        file=sys.stderr,
    )
    return 0


_RUNNERS = {
    "match": cmd_match,
    "train": cmd_train,
    "classify": cmd_classify,
    "correct": cmd_correct,
    "query": cmd_query,
    "dedup": cmd_dedup,
    "parse-dosage": cmd_parse_dosage,
    "gen": cmd_gen,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
        provided = vars(namespace)
        command = provided.pop("command")
        options = _merge_options(command, provided)
        return _RUNNERS[command](options)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (BadHeaderError, ModelFormatError, MissingClassError, TooSmallError, EmptyResultError, MalformedApprovalNumber) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
