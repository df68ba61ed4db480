import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import DEMO_DATA
from lexrobust.audio import NoiseCondition, mix_at_snr, write_wav
from lexrobust.cli import main
from lexrobust.hrs import RESPONSE_FIELDS
from lexrobust.lexicon import load_pairs
from lexrobust.synth import babble, simulate_responses, speech_like

SUBCOMMANDS = ["mix", "stoi", "train-lm", "features", "analyze-hrs", "fit", "select", "report"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """Wav files, LM, pairs and simulated responses for the whole pipeline."""
    d = tmp_path_factory.mktemp("cli")
    speech = speech_like(np.random.default_rng(1), 1.5, 16000)
    write_wav(d / "speech.wav", speech)
    write_wav(d / "noise.wav", babble(np.random.default_rng(2), 3.0, 16000))
    pairs = load_pairs(DEMO_DATA / "pairs.csv")
    records = simulate_responses(pairs, [5, 0, -5], np.random.default_rng(3))
    with open(d / "responses.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESPONSE_FIELDS)
        for r in records:
            w.writerow([r.stimulus_id, r.participant_id, r.target, f"{r.condition.snr_db:g}",
                        r.condition.noise_id, r.transcript])
    assert main(["train-lm", "--corpus", str(DEMO_DATA / "corpus.txt"), "--out", str(d / "lm.txt")]) == 0
    return d


def test_help_everywhere(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "analyze-hrs" in out
    for cmd in SUBCOMMANDS:
        code, out, _ = run(capsys, cmd, "--help")
        assert code == 0, cmd
        assert "usage:" in out


def test_usage_errors(capsys):
    code, _, err = run(capsys, "stoi", "--clean", "a.wav", "--degraded", "a.wav", "--bogus")
    assert code == 1 and "usage:" in err
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1


def test_stoi_self(capsys, work):
    code, out, _ = run(capsys, "stoi", "--clean", work / "speech.wav", "--degraded", work / "speech.wav")
    assert (code, out) == (0, "1.000000\n")


def test_stoi_missing_file(capsys, work):
    code, _, err = run(capsys, "stoi", "--clean", work / "nope.wav", "--degraded", work / "speech.wav")
    assert code == 2 and "nope.wav" in err


def test_mix_deterministic_and_exact(capsys, work):
    outs = []
    for name in ("m1.wav", "m2.wav"):
        code, out, _ = run(capsys, "mix", "--speech", work / "speech.wav", "--noise", work / "noise.wav",
                           "--snr", -5, "--seed", 9, "--out", work / name)
        assert code == 0
        outs.append(json.loads(out))
    assert (work / "m1.wav").read_bytes() == (work / "m2.wav").read_bytes()
    assert outs[0] == outs[1]
    assert abs(outs[0]["achieved_snr_db"] + 5) < 0.01
    code, out, _ = run(capsys, "stoi", "--clean", work / "speech.wav", "--degraded", work / "m1.wav")
    assert code == 0 and 0 < float(out) < 1


def test_mix_resamples_noise(capsys, work, tmp_path):
    noise = babble(np.random.default_rng(5), 3.0, 8000)
    write_wav(tmp_path / "n8k.wav", noise)
    code, out, _ = run(capsys, "mix", "--speech", work / "speech.wav", "--noise", tmp_path / "n8k.wav",
                       "--snr", 0, "--out", tmp_path / "m.wav")
    assert code == 0 and abs(json.loads(out)["achieved_snr_db"]) < 0.01


def test_train_lm_errors(capsys, tmp_path):
    (tmp_path / "empty.txt").write_text("\n\n")
    code, _, err = run(capsys, "train-lm", "--corpus", tmp_path / "empty.txt", "--out", tmp_path / "lm.txt")
    assert code == 2 and "empty corpus" in err


def test_pipeline(capsys, work):
    d = work
    code, _, _ = run(capsys, "analyze-hrs", "--responses", d / "responses.csv", "--pairs", DEMO_DATA / "pairs.csv",
                     "--scores-out", d / "scores.csv", "--comparisons-out", d / "comparisons.csv")
    assert code == 0
    scores = read_csv(d / "scores.csv")
    comps = read_csv(d / "comparisons.csv")
    assert len(scores) == 72 and len(comps) == 36
    for c in comps:
        assert float(c["diff_hrs"]) == abs(float(c["hrs_a"]) - float(c["hrs_b"]))

    code, _, _ = run(capsys, "features", "--pairs", DEMO_DATA / "pairs.csv", "--lm", d / "lm.txt",
                     "--comparisons", d / "comparisons.csv", "--out", d / "features.csv")
    assert code == 0
    feats = read_csv(d / "features.csv")
    assert len(feats) == 36
    assert {r["log_base"] for r in feats} == {"e"}
    assert all(r["STOI"] == "" for r in feats)

    code, out, _ = run(capsys, "fit", "--features", d / "features.csv",
                       "--predictors", "log.prob,diff.log.prob,ph.len,diff.ph.len", "--per-condition",
                       "--json-out", d / "fits.json", "--models-out", d / "models.json")
    assert code == 0
    assert "SNR 5" in out and "SNR -5" in out and "Estimate" in out
    fits = json.loads((d / "fits.json").read_text())
    assert [f["condition_snr_db"] for f in fits] == [5, 0, -5]
    assert all("trace" in f for f in fits)

    code, _, _ = run(capsys, "select", "--pairs", DEMO_DATA / "pairs.csv", "--lm", d / "lm.txt",
                     "--models", d / "models.json", "--snr", 0, "--out", d / "decisions.csv")
    assert code == 0
    decisions = read_csv(d / "decisions.csv")
    assert len(decisions) == 12
    pairs = {p.pair_id: p for p in load_pairs(DEMO_DATA / "pairs.csv")}
    for row in decisions:
        assert row["chosen"] in pairs[row["pair_id"]].words

    code, out, _ = run(capsys, "report", "--comparisons", d / "comparisons.csv", "--fits", d / "fits.json",
                       "--csv-out", d / "report.csv")
    assert code == 0
    assert "diff.HRS histogram" in out and "five-number" in out
    assert len(read_csv(d / "report.csv")) == 3


def test_select_canonical_text_condition(capsys, work):
    code, out, _ = run(capsys, "select", "--pairs", DEMO_DATA / "pairs.csv", "--lm", work / "lm.txt", "--snr", 5)
    assert code == 0
    assert len(list(csv.DictReader(out.splitlines()))) == 12


def test_select_stoi_model_needs_audio(capsys, work):
    code, _, err = run(capsys, "select", "--pairs", DEMO_DATA / "pairs.csv", "--lm", work / "lm.txt", "--snr", -5)
    assert code == 2 and "no audio" in err


def test_select_with_audio_manifest(capsys, work, tmp_path):
    pairs = load_pairs(DEMO_DATA / "pairs.csv")[:2]
    (tmp_path / "pairs.csv").write_text(
        "pair_id,word_a,word_b,context\n" + "".join(f'{p.pair_id},{p.word_a},{p.word_b},"{p.context}"\n' for p in pairs)
    )
    noise = babble(np.random.default_rng(6), 3.0, 16000)
    lines = ["pair_id,word,clean_path,noisy_path,span_start,span_end"]
    for i, p in enumerate(pairs):
        for j, w in enumerate(p.words):
            clean = speech_like(np.random.default_rng(40 + 2 * i + j), 1.2, 16000)
            write_wav(tmp_path / f"{w}.wav", clean)
            write_wav(tmp_path / f"{w}_n.wav", mix_at_snr(clean, noise, NoiseCondition(-5), 100 * j))
            lines.append(f"{p.pair_id},{w},{w}.wav,{w}_n.wav,0,16000")
    (tmp_path / "manifest.csv").write_text("\n".join(lines) + "\n")
    code, out, err = run(capsys, "select", "--pairs", tmp_path / "pairs.csv", "--lm", work / "lm.txt",
                         "--audio-manifest", tmp_path / "manifest.csv", "--snr", -5)
    assert code == 0, err
    rows = list(csv.DictReader(out.splitlines()))
    assert all(-1 <= float(r["STOI"]) <= 1 for r in rows)


def test_fit_missing_response_column(capsys, tmp_path):
    (tmp_path / "f.csv").write_text("log.prob,ph.len\n1,2\n2,3\n3,5\n4,4\n")
    code, _, err = run(capsys, "fit", "--features", tmp_path / "f.csv")
    assert code == 2 and "diff.HRS" in err


def test_fit_non_numeric_cell(capsys, tmp_path):
    (tmp_path / "f.csv").write_text("diff.HRS,ph.len\n0.1,2\n0.2,x\n0.3,5\n0.1,4\n")
    code, _, err = run(capsys, "fit", "--features", tmp_path / "f.csv", "--predictors", "ph.len")
    assert code == 2 and "row 3" in err


def test_analyze_hrs_data_error(capsys, tmp_path):
    (tmp_path / "r.csv").write_text("stimulus_id,participant_id\n")
    code, _, err = run(capsys, "analyze-hrs", "--responses", tmp_path / "r.csv")
    assert code == 2 and "missing column" in err


def test_pipeline_byte_identical(work, tmp_path):
    def once(tag):
        out = tmp_path / tag
        out.mkdir()
        main(["analyze-hrs", "--responses", str(work / "responses.csv"), "--pairs", str(DEMO_DATA / "pairs.csv"),
              "--scores-out", str(out / "s.csv"), "--comparisons-out", str(out / "c.csv")])
        main(["train-lm", "--corpus", str(DEMO_DATA / "corpus.txt"), "--out", str(out / "lm.txt")])
        main(["select", "--pairs", str(DEMO_DATA / "pairs.csv"), "--lm", str(out / "lm.txt"), "--snr", "0",
              "--out", str(out / "d.csv")])
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    assert once("a") == once("b")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lexrobust", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "train-lm" in proc.stdout
