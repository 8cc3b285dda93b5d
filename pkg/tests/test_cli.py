import io
import json
import random
from types import SimpleNamespace

import pytest

from parity_bpe import MetricReport, TokenizerModel, full_report, load_parallel_dev
from parity_bpe.cli import main

EXAMPLE_MODEL = "parity-bpe v1\nmerges:\nb\ta\nba\tb\n"


@pytest.fixture()
def example_model(tmp_path):
    path = tmp_path / "example.bpe"
    path.write_text(EXAMPLE_MODEL)
    return path


def run(argv, monkeypatch=None, stdin: bytes = b""):
    if monkeypatch is not None:
        monkeypatch.setattr("sys.stdin", SimpleNamespace(buffer=io.BytesIO(stdin)))
    return main([str(a) for a in argv])


class TestTrain:
    def test_classical(self, tmp_path, synth_dir, capsys):
        model_out = tmp_path / "classical.bpe"
        code = run(
            [
                "train", "--classical", "--merges", "60",
                "--corpus", synth_dir / "manifest.json", "--model-out", model_out,
            ]
        )
        assert code == 0
        assert model_out.exists()
        assert (tmp_path / "classical.bpe.log.jsonl").exists()
        meta = json.loads((tmp_path / "classical.bpe.meta.json").read_text())
        assert meta["summary"]["merges_learned"] == 60
        assert meta["config_hash"]
        assert "manifest" in meta["inputs"]
        out = capsys.readouterr().out
        assert "final per-language CR" in out

    def test_parity_with_paper_defaults(self, tmp_path, synth_dir):
        model_out = tmp_path / "parity.bpe"
        code = run(
            [
                "train", "--parity", "--merges", "60",
                "--corpus", synth_dir / "manifest.json",
                "--dev", synth_dir / "dev",
                "--window", "100", "--alpha", "2",
                "--model-out", model_out,
            ]
        )
        assert code == 0
        log_lines = (tmp_path / "parity.bpe.log.jsonl").read_text().splitlines()
        first = json.loads(log_lines[0])
        assert first["mode"] == "parity"
        assert first["lang"]
        assert first["cr_snapshot"]

    def test_hybrid_prefix_matches_classical(self, tmp_path, synth_dir):
        classical_out = tmp_path / "c.bpe"
        hybrid_out = tmp_path / "h.bpe"
        assert run(
            ["train", "--classical", "--merges", "40",
             "--corpus", synth_dir / "manifest.json", "--model-out", classical_out]
        ) == 0
        assert run(
            ["train", "--parity", "--hybrid-split", "0.5", "--merges", "40",
             "--corpus", synth_dir / "manifest.json", "--dev", synth_dir / "dev",
             "--model-out", hybrid_out]
        ) == 0
        classical = TokenizerModel.load(classical_out)
        hybrid = TokenizerModel.load(hybrid_out)
        assert hybrid.merges[:20] == classical.merges[:20]

    def test_no_dev(self, tmp_path, synth_dir):
        model_out = tmp_path / "nodev.bpe"
        code = run(
            ["train", "--parity", "--no-dev", "--merges", "30",
             "--corpus", synth_dir / "manifest.json", "--model-out", model_out]
        )
        assert code == 0
        meta = json.loads((tmp_path / "nodev.bpe.meta.json").read_text())
        assert meta["summary"]["cr_unit"] == "bytes"

    def test_missing_mode_is_usage_error(self, synth_dir, capsys):
        code = run(["train", "--merges", "10", "--corpus", synth_dir / "manifest.json"])
        assert code == 1
        assert "mode" in capsys.readouterr().err

    def test_bad_corpus_is_data_error(self, tmp_path, capsys):
        code = run(
            ["train", "--classical", "--merges", "5",
             "--corpus", tmp_path / "nope.json", "--model-out", tmp_path / "m.bpe"]
        )
        assert code == 2

    def test_config_file_supplies_defaults(self, tmp_path, synth_dir):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({
            "corpus": str(synth_dir / "manifest.json"),
            "merges": 25,
            "classical": True,
            "model_out": str(tmp_path / "fromcfg.bpe"),
        }))
        assert run(["train", "--config", config]) == 0
        assert TokenizerModel.load(tmp_path / "fromcfg.bpe").merges
        # explicit flags override config values
        assert run(["train", "--config", config, "--merges", "5",
                    "--model-out", tmp_path / "override.bpe"]) == 0
        assert len(TokenizerModel.load(tmp_path / "override.bpe").merges) == 5

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"mystery": 1}))
        assert run(["train", "--config", config]) == 1
        assert "unknown config keys" in capsys.readouterr().err


class TestEncodeDecode:
    def test_paper_example_tokens(self, example_model, tmp_path, capsys, monkeypatch):
        code = run(["encode", "--model", example_model], monkeypatch, stdin=b"babab\n")
        assert code == 0
        assert capsys.readouterr().out == "ba bab\n"

    def test_pipe_roundtrip(self, example_model, tmp_path, classical_run):
        model, _ = classical_run
        model_path = tmp_path / "trained.bpe"
        model.save(model_path)
        rng = random.Random(31)
        lines = []
        for _ in range(50):
            # newline-free printable-ish records
            lines.append(bytes(rng.randrange(32, 127) for _ in range(rng.randint(0, 40))))
        src = tmp_path / "input.txt"
        src.write_bytes(b"\n".join(lines) + b"\n")
        encoded = tmp_path / "encoded.txt"
        decoded = tmp_path / "decoded.txt"
        assert run(["encode", "--model", model_path, "--input", src, "--output", encoded]) == 0
        assert run(["decode", "--model", model_path, "--input", encoded, "--output", decoded]) == 0
        assert decoded.read_bytes() == src.read_bytes()

    def test_id_roundtrip(self, example_model, tmp_path):
        src = tmp_path / "in.txt"
        src.write_bytes(b"babab\nbb\n")
        enc = tmp_path / "enc.txt"
        dec = tmp_path / "dec.txt"
        assert run(["encode", "--model", example_model, "--input", src,
                    "--output", enc, "--format", "ids"]) == 0
        assert enc.read_text().splitlines()[0] == "256 257"
        assert run(["decode", "--model", example_model, "--input", enc,
                    "--output", dec, "--format", "ids"]) == 0
        assert dec.read_bytes() == src.read_bytes()

    def test_empty_stdin(self, example_model, capsys, monkeypatch):
        code = run(["encode", "--model", example_model], monkeypatch, stdin=b"")
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_unknown_id_is_data_error(self, example_model, tmp_path, capsys):
        src = tmp_path / "bad.txt"
        src.write_text("999999\n")
        code = run(["decode", "--model", example_model, "--input", src, "--format", "ids"])
        assert code == 2

    def test_missing_model_is_data_error(self, tmp_path):
        assert run(["encode", "--model", tmp_path / "none.bpe", "--input", "-"]) == 2


class TestEval:
    def test_identity_report(self, tmp_path, synth_dir, capsys):
        model_path = tmp_path / "identity.bpe"
        TokenizerModel([]).save(model_path)
        out = tmp_path / "report.json"
        code = run(["eval", "--model", model_path, "--dev", synth_dir / "dev", "--out", out])
        assert code == 0
        report = MetricReport.from_json(out.read_text())
        assert report.global_metrics["cr_bytes_ratio_of_sums"] == 1.0
        assert report.provenance["model_digest"]

    def test_matches_library_call(self, tmp_path, synth_dir, classical_run, dev):
        model, _ = classical_run
        model_path = tmp_path / "m.bpe"
        model.save(model_path)
        out = tmp_path / "report.json"
        assert run(["eval", "--model", model_path, "--dev", synth_dir / "dev", "--out", out]) == 0
        report = MetricReport.from_json(out.read_text())
        expected = full_report(TokenizerModel.load(model_path), dev)
        assert report.global_metrics == expected.global_metrics
        assert report.per_language == expected.per_language

    def test_csv_written(self, tmp_path, synth_dir):
        model_path = tmp_path / "identity.bpe"
        TokenizerModel([]).save(model_path)
        csv_path = tmp_path / "per_lang.csv"
        assert run(["eval", "--model", model_path, "--dev", synth_dir / "dev",
                    "--out", tmp_path / "r.json", "--csv", csv_path]) == 0
        rows = csv_path.read_text().splitlines()
        assert rows[0].startswith("language,")
        assert len(rows) == 1 + 3 + 1  # header + langs + global

    def test_gold_flag(self, tmp_path, synth_dir):
        model_path = tmp_path / "identity.bpe"
        TokenizerModel([]).save(model_path)
        gold = tmp_path / "gold.tsv"
        gold.write_text("ab\ta|b\n")
        out = tmp_path / "report.json"
        assert run(["eval", "--model", model_path, "--dev", synth_dir / "dev",
                    "--gold", gold, "--out", out]) == 0
        report = MetricReport.from_json(out.read_text())
        assert report.global_metrics["morph_boundary_recall"] == 1.0


class TestCompare:
    def test_parity_shows_lower_gini(self, tmp_path, synth_dir, classical_run, parity_run, capsys):
        cpath = tmp_path / "a_classical.bpe"
        ppath = tmp_path / "b_parity.bpe"
        classical_run[0].save(cpath)
        parity_run[0].save(ppath)
        csv_path = tmp_path / "compare.csv"
        code = run(["compare", cpath, ppath, "--dev", synth_dir / "dev", "--csv", csv_path])
        assert code == 0
        out = capsys.readouterr().out
        assert "gini_tokens_per_line" in out
        import csv as csvmod

        with open(csv_path) as fh:
            rows = {row[0]: row[1:] for row in csvmod.reader(fh)}
        gini_row = [float(x) for x in rows["gini_tokens_per_line"]]
        assert gini_row[1] < gini_row[0]

    def test_same_model_identical_columns(self, tmp_path, synth_dir, capsys):
        p1 = tmp_path / "m1.bpe"
        p2 = tmp_path / "m2.bpe"
        TokenizerModel([(b"a", b"b")]).save(p1)
        TokenizerModel([(b"a", b"b")]).save(p2)
        csv_path = tmp_path / "cmp.csv"
        assert run(["compare", p1, p2, "--dev", synth_dir / "dev", "--csv", csv_path]) == 0
        import csv as csvmod

        with open(csv_path) as fh:
            for row in csvmod.reader(fh):
                if row[0] != "metric":
                    assert row[1] == row[2]

    def test_three_models_ordered_by_filename(self, tmp_path, synth_dir, capsys):
        paths = [tmp_path / name for name in ("c.bpe", "a.bpe", "b.bpe")]
        for p in paths:
            TokenizerModel([(b"a", b"b")]).save(p)
        assert run(["compare", *paths, "--dev", synth_dir / "dev"]) == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert header.index("a.bpe") < header.index("b.bpe") < header.index("c.bpe")

    def test_reports_differ_only_in_model_fields(self, tmp_path, synth_dir):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        m1, m2 = tmp_path / "m1.bpe", tmp_path / "m2.bpe"
        TokenizerModel([]).save(m1)
        TokenizerModel([(b"a", b"b")]).save(m2)
        assert run(["eval", "--model", m1, "--dev", synth_dir / "dev", "--out", out1]) == 0
        assert run(["eval", "--model", m2, "--dev", synth_dir / "dev", "--out", out2]) == 0
        r1 = MetricReport.from_json(out1.read_text())
        r2 = MetricReport.from_json(out2.read_text())
        assert set(r1.per_language) == set(r2.per_language)
        for key in ("languages", "n_lines", "renyi_alpha", "dev"):
            assert r1.provenance[key] == r2.provenance[key]
        for key in ("model", "model_digest", "vocab_size"):
            assert r1.provenance[key] != r2.provenance[key]

    def test_vocab_mismatch_warns(self, tmp_path, synth_dir, capsys):
        p1 = tmp_path / "m1.bpe"
        p2 = tmp_path / "m2.bpe"
        TokenizerModel([]).save(p1)
        TokenizerModel([(b"a", b"b")]).save(p2)
        assert run(["compare", p1, p2, "--dev", synth_dir / "dev"]) == 0
        assert "vocabulary sizes differ" in capsys.readouterr().err

    def test_needs_two_models(self, tmp_path, synth_dir):
        p1 = tmp_path / "m1.bpe"
        TokenizerModel([]).save(p1)
        assert run(["compare", p1, "--dev", synth_dir / "dev"]) == 1


class TestSynth:
    def test_deterministic(self, tmp_path):
        args = ["synth", "--langs", "xx,yy", "--proportions", "0.5,0.5",
                "--dev-lines", "5", "--train-bytes", "3000", "--seed", "9"]
        assert run(args + ["--out", tmp_path / "one"]) == 0
        assert run(args + ["--out", tmp_path / "two"]) == 0
        for rel in ("manifest.json", "train/xx.jsonl", "dev/yy.txt"):
            assert (tmp_path / "one" / rel).read_bytes() == (tmp_path / "two" / rel).read_bytes()

    def test_bad_proportions_usage_error(self, tmp_path, capsys):
        assert run(["synth", "--out", tmp_path / "x", "--langs", "a,b",
                    "--proportions", "0.9,0.3"]) == 1

    def test_spec_config_file(self, tmp_path):
        config = tmp_path / "spec.json"
        config.write_text(json.dumps({
            "languages": ["pp", "qq"],
            "proportions": [0.6, 0.4],
            "dev_lines": 4,
            "total_train_bytes": 2000,
        }))
        out = tmp_path / "corpus"
        assert run(["synth", "--config", config, "--out", out]) == 0
        dev = load_parallel_dev(out / "dev", ["pp", "qq"])
        assert dev.n_lines == 4


class TestUsage:
    def test_no_command_shows_help(self, capsys):
        assert main([]) == 1

    def test_unknown_flag(self, capsys):
        assert main(["train", "--frobnicate"]) == 1
