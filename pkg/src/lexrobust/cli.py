"""``lexrobust`` command line: mix, stoi, train-lm, features, analyze-hrs, fit, select, report.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import audio as audio_mod
from .audio import AudioError, NoiseCondition, load_wav, mix_at_snr, resample, write_wav
from .hrs import (
    COMPARISON_FIELDS, IN_CONTEXT, SCORE_FIELDS, SINGLE_WORD, AnalysisError, compare_pairs,
    comparison_rows, compute_hrs, load_comparisons, load_responses, score_rows,
)
from .lexicon import LexiconError, OOVError, default_lexicon, load_lexicon, load_pairs
from .lm import ModelFormatError, load_model, save_model, train
from .regression import (
    Coefficient, DesignMatrix, FitResult, RegressionError, StepwiseResult, fit_report, format_table, ols_fit,
    read_numeric_columns, stepwise_select,
)
from .report import report, report_rows
from .selector import (
    FEATURE_NAMES, ConditionModel, SelectionError, WordAudio, canonical_models, choose,
    extract_features, load_models, save_models, snr_band_for,
)
from .stoi import StoiError, compute_stoi

DATA_ERRORS = (
    AudioError, StoiError, LexiconError, OOVError, ModelFormatError, AnalysisError,
    RegressionError, SelectionError, FileNotFoundError, IsADirectoryError, PermissionError,
    UnicodeDecodeError, csv.Error, json.JSONDecodeError, KeyError, ValueError,
)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- helpers ------------------------------------------------------------------------

def _lexicon(path):
    return load_lexicon(path) if path else default_lexicon()


def _write_csv(path, fields, rows):
    def emit(fh):
        writer = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(rows)

    if path in (None, "-"):
        buf = io.StringIO()
        emit(buf)
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_rows(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


MANIFEST_FIELDS = ("pair_id", "word", "clean_path", "noisy_path")


def load_audio_manifest(path) -> dict[str, dict[str, WordAudio]]:
    """``pair_id -> word -> WordAudio``; paths are relative to the manifest."""
    base = Path(path).parent
    fields, rows = _read_rows(path)
    missing = set(MANIFEST_FIELDS) - set(fields)
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
    out: dict[str, dict[str, WordAudio]] = {}
    for line, row in enumerate(rows, 2):
        try:
            clean = load_wav(base / row["clean_path"])
            noisy = load_wav(base / row["noisy_path"])
            start, end = (row.get("span_start") or "").strip(), (row.get("span_end") or "").strip()
            span = (int(start), int(end)) if start and end else None
        except (AudioError, ValueError, FileNotFoundError) as exc:
            raise DataError(f"{path}:{line}: {exc}") from None
        out.setdefault(row["pair_id"], {})[row["word"]] = WordAudio(clean, noisy, span)
    return out


FEATURE_FIELDS = ("pair_id", "condition_snr_db", "noise_id", "winner", "alternative") + FEATURE_NAMES


def _feature_row(pair_id, cond, winner, alt, fv, diff_hrs=None) -> dict:
    row = {"pair_id": pair_id, "condition_snr_db": f"{cond.snr_db:g}", "noise_id": cond.noise_id,
           "winner": winner, "alternative": alt}
    for name, value in fv.as_dict().items():
        row[name] = "" if value is None else repr(value)
    if diff_hrs is not None:
        row["diff.HRS"] = repr(diff_hrs)
    row["log_base"] = "e"
    return row


# -- subcommands --------------------------------------------------------------------

def cmd_mix(args):
    speech = load_wav(args.speech)
    noise = load_wav(args.noise)
    if noise.sample_rate != speech.sample_rate:
        noise = resample(noise, speech.sample_rate)
    offset = args.offset
    if offset is None:
        offset = int(np.random.default_rng(args.seed).integers(len(noise)))
    mixed = mix_at_snr(speech, noise, NoiseCondition(args.snr, args.noise_id), offset)
    write_wav(args.out, mixed, args.encoding)
    info = dict(mixed.meta, seed=args.seed, achieved_snr_db=audio_mod.achieved_snr(speech, mixed))
    print(json.dumps(info, sort_keys=True))


def cmd_stoi(args):
    print(f"{compute_stoi(load_wav(args.clean), load_wav(args.degraded)):.6f}")


def cmd_train_lm(args):
    with open(args.corpus, encoding="utf-8") as fh:
        model = train([line for line in fh if line.strip()], args.order, args.discount)
    save_model(model, args.out)
    print(f"trained order-{model.order} model: {len(model.vocab)} vocabulary entries, "
          f"{len(model.ngram_counts)} distinct {model.order}-grams", file=sys.stderr)


def _inputs(args):
    lexicon = _lexicon(args.lexicon)
    pairs = load_pairs(args.pairs)
    lm = load_model(args.lm)
    manifest = load_audio_manifest(args.audio_manifest) if args.audio_manifest else None
    return lexicon, pairs, lm, manifest


def cmd_features(args):
    lexicon, pairs, lm, manifest = _inputs(args)
    by_id = {p.pair_id: p for p in pairs}
    rows = []
    fields = list(FEATURE_FIELDS)
    if args.comparisons:
        fields.append("diff.HRS")
        for comp in load_comparisons(args.comparisons):
            if args.snr is not None and comp.condition.snr_db != args.snr:
                continue
            if comp.pair_id not in by_id:
                raise DataError(f"{args.comparisons}: pair {comp.pair_id!r} not in {args.pairs}")
            pair = by_id[comp.pair_id]
            alt = comp.word_b if comp.winner == comp.word_a else comp.word_a
            audio = manifest.get(pair.pair_id) if manifest is not None else None
            fv = extract_features(pair, (comp.winner, alt), lm, lexicon, audio)
            rows.append(_feature_row(pair.pair_id, comp.condition, comp.winner, alt, fv, comp.diff_hrs))
    else:
        if args.snr is None:
            raise UsageError("features: --snr is required without --comparisons")
        cond = NoiseCondition(args.snr, args.noise_id)
        for pair in pairs:
            audio = manifest.get(pair.pair_id) if manifest is not None else None
            fv = extract_features(pair, (pair.word_a, pair.word_b), lm, lexicon, audio)
            rows.append(_feature_row(pair.pair_id, cond, pair.word_a, pair.word_b, fv))
    fields.append("log_base")
    _write_csv(args.out, fields, rows)


def cmd_analyze_hrs(args):
    if args.pairs and args.scores_out in (None, "-") and args.comparisons_out in (None, "-"):
        raise UsageError("analyze-hrs: with --pairs, send scores or comparisons to a file")
    lexicon = _lexicon(args.lexicon)
    scores = compute_hrs(load_responses(args.responses), lexicon, args.mode)
    _write_csv(args.scores_out, SCORE_FIELDS, score_rows(scores))
    if args.pairs:
        comps = compare_pairs(scores, load_pairs(args.pairs))
        _write_csv(args.comparisons_out, COMPARISON_FIELDS, comparison_rows(comps))


def _fit_one(data, response, predictors, direction) -> FitResult | StepwiseResult:
    design = DesignMatrix.from_mapping(data, response, predictors)
    if direction == "none":
        return ols_fit(design)
    return stepwise_select(design, direction)


def cmd_fit(args):
    fields, rows = _read_rows(args.features)
    if args.response not in fields:
        raise DataError(f"{args.features}: response column {args.response!r} not found")
    if args.predictors:
        predictors = [p.strip() for p in args.predictors.split(",") if p.strip()]
    else:
        predictors = [f for f in FEATURE_NAMES if f in fields and all(r.get(f) for r in rows)]
    missing = [p for p in predictors if p not in fields]
    if missing:
        raise DataError(f"{args.features}: predictor column(s) not found: {', '.join(missing)}")

    if args.per_condition:
        if "condition_snr_db" not in fields:
            raise DataError(f"{args.features}: --per-condition needs a condition_snr_db column")
        groups: dict[float, list[dict]] = {}
        for r in rows:
            groups.setdefault(float(r["condition_snr_db"]), []).append(r)
        keys = sorted(groups, reverse=True)
    else:
        groups, keys = {math.nan: rows}, [math.nan]

    reports, tables, models = [], [], []
    for snr in keys:
        data = read_numeric_columns(groups[snr], [args.response] + predictors)
        result = _fit_one(data, args.response, predictors, args.direction)
        fit = result.fit if isinstance(result, StepwiseResult) else result
        title = None if math.isnan(snr) else f"SNR {snr:g}"
        tables.append(format_table(fit, title))
        payload = json.loads(fit_report(result))
        if not math.isnan(snr):
            payload["condition_snr_db"] = snr
            lo, hi = snr_band_for(snr)
            models.append(ConditionModel.from_fit(fit, lo, hi, f"SNR {snr:g}"))
        reports.append(payload)

    sys.stdout.write("\n\n".join(tables) + "\n")
    if args.json_out:
        body = reports[0] if len(reports) == 1 and not args.per_condition else reports
        _write_text(args.json_out, json.dumps(body, indent=2) + "\n")
    if args.models_out:
        if not models:
            raise UsageError("fit: --models-out requires --per-condition")
        save_models(models, args.models_out)


DECISION_FIELDS = ("pair_id", "condition_snr_db", "chosen", "alternative", "predicted_gain", "tie", "model") + FEATURE_NAMES


def cmd_select(args):
    lexicon, pairs, lm, manifest = _inputs(args)
    models = load_models(args.models) if args.models else canonical_models()
    cond = NoiseCondition(args.snr, args.noise_id)
    rows = []
    for pair in pairs:
        audio = manifest.get(pair.pair_id) if manifest is not None else None
        d = choose(pair, cond, models, lm, lexicon, audio)
        row = {"pair_id": d.pair_id, "condition_snr_db": f"{args.snr:g}", "chosen": d.chosen,
               "alternative": d.alternative, "predicted_gain": repr(d.predicted_gain),
               "tie": int(d.tie), "model": d.model_label}
        for name, value in d.features.as_dict().items():
            row[name] = "" if value is None else repr(value)
        rows.append(row)
    _write_csv(args.out, DECISION_FIELDS, rows)


def cmd_report(args):
    comps = load_comparisons(args.comparisons)
    fits = []
    for path in args.fits or ():
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        for entry in payload if isinstance(payload, list) else [payload]:
            fits.append(_fit_from_json(entry))
    _write_text(args.out, report(comps, fits))
    if args.csv_out:
        rows = report_rows(comps)
        _write_csv(args.csv_out, list(rows[0]), rows)


def _fit_from_json(entry) -> tuple[str, FitResult]:
    coefs = tuple(
        Coefficient(c["name"], c["estimate"], c["se"], float(c["t"]), c["p"]) for c in entry["coefficients"]
    )
    fit = FitResult(coefs, entry["rss"], entry["df_resid"], entry["n"],
                    tuple(c.name for c in coefs[1:]), entry["response"], np.empty(0), np.empty((0, 0)))
    title = f"SNR {entry['condition_snr_db']:g}" if "condition_snr_db" in entry else "fit"
    return title, fit


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lexrobust", description="Noise-robust synonym selection pipeline.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mix", help="mix speech with noise at a target SNR")
    p.add_argument("--speech", required=True)
    p.add_argument("--noise", required=True)
    p.add_argument("--snr", type=float, required=True, help="target SNR in dB")
    p.add_argument("--seed", type=int, default=0, help="seeds the noise segment offset")
    p.add_argument("--offset", type=int, default=None, help="explicit noise offset (overrides --seed)")
    p.add_argument("--noise-id", default="babble")
    p.add_argument("--encoding", choices=("pcm16", "float32"), default="pcm16")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("stoi", help="STOI score of a degraded signal against its clean reference")
    p.add_argument("--clean", required=True)
    p.add_argument("--degraded", required=True)
    p.set_defaults(func=cmd_stoi)

    p = sub.add_parser("train-lm", help="train a Kneser-Ney n-gram model")
    p.add_argument("--corpus", required=True, help="UTF-8 text, one utterance per line")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--discount", type=float, default=0.75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_lm)

    def selection_inputs(p):
        p.add_argument("--pairs", required=True)
        p.add_argument("--lexicon", default=None, help="pronouncing dictionary (default: $LEXROBUST_LEXICON or bundled)")
        p.add_argument("--lm", required=True, help="model written by train-lm")
        p.add_argument("--audio-manifest", default=None)
        p.add_argument("--noise-id", default="babble")
        p.add_argument("--out", default="-")

    p = sub.add_parser("features", help="write the six per-pair features as CSV")
    selection_inputs(p)
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--comparisons", default=None, help="analyze-hrs comparisons CSV; orients by observed winner and adds diff.HRS")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("analyze-hrs", help="score transcripts and compare synonym pairs")
    p.add_argument("--responses", required=True)
    p.add_argument("--pairs", default=None)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--mode", choices=(SINGLE_WORD, IN_CONTEXT), default=IN_CONTEXT)
    p.add_argument("--scores-out", default="-")
    p.add_argument("--comparisons-out", default="-")
    p.set_defaults(func=cmd_analyze_hrs)

    p = sub.add_parser("fit", help="OLS fit with optional AIC stepwise selection")
    p.add_argument("--features", required=True)
    p.add_argument("--response", default="diff.HRS")
    p.add_argument("--predictors", default=None, help="comma-separated; default: all feature columns present")
    p.add_argument("--direction", choices=("none", "backward", "both"), default="both")
    p.add_argument("--per-condition", action="store_true", help="fit each condition_snr_db separately")
    p.add_argument("--json-out", default=None)
    p.add_argument("--models-out", default=None, help="write per-condition models for select")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="choose the noise-robust synonym of each pair")
    selection_inputs(p)
    p.add_argument("--models", default=None, help="models JSON (default: bundled canonical models)")
    p.add_argument("--snr", type=float, required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("report", help="per-condition summary of pair comparisons")
    p.add_argument("--comparisons", required=True)
    p.add_argument("--fits", nargs="*", default=None, help="JSON fit reports from fit --json-out")
    p.add_argument("--out", default="-")
    p.add_argument("--csv-out", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except DataError as exc:
        print(f"lexrobust: {exc}", file=sys.stderr)
        return 2
    except DATA_ERRORS as exc:
        msg = f"missing key {exc}" if type(exc) is KeyError else str(exc)
        print(f"lexrobust: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
