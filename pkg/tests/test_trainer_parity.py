from fractions import Fraction

import pytest

from parity_bpe import (
    ConfigError,
    CorpusError,
    CRTable,
    DataError,
    LabeledCorpus,
    NormUnit,
    ParallelDevCorpus,
    ParityConfig,
    SelectionWindow,
    TokenizerModel,
    compute_cr,
    select_language,
    train_classical,
    train_no_dev,
    train_parity,
)

from .oracles import audit_selection_windows


def dev_of(lines_by_lang: dict[str, list[bytes]]) -> ParallelDevCorpus:
    return ParallelDevCorpus(tuple(sorted(lines_by_lang)), lines_by_lang)


class TestParityConfig:
    def test_defaults_match_conventions(self):
        config = ParityConfig(total_merges=100)
        assert config.window_size == 100
        assert config.alpha == 2.0
        assert config.unit is NormUnit.LINES

    def test_with_split_half(self):
        config = ParityConfig.with_split(500, 0.5)
        assert config.global_merges == 250

    def test_invalid_configs(self):
        with pytest.raises(ConfigError):
            ParityConfig(total_merges=10, global_merges=11).validate()
        with pytest.raises(ConfigError):
            ParityConfig(total_merges=10, window_size=-1).validate()
        with pytest.raises(ConfigError):
            ParityConfig(total_merges=10, alpha=0).validate()
        with pytest.raises(ConfigError):
            ParityConfig(
                total_merges=10, dev_source="training_as_dev", unit=NormUnit.LINES
            ).validate()

    def test_quota_exact_rational(self):
        config = ParityConfig(total_merges=10, window_size=6, alpha=2)
        assert config.quota(3) == Fraction(4)
        config = ParityConfig(total_merges=10, window_size=100, alpha=1.5)
        assert config.quota(7) == Fraction(3, 2) * 100 / 7


class TestComputeCr:
    def test_identity_bytes_is_one(self, dev):
        table = compute_cr(dev, TokenizerModel([]), NormUnit.BYTES)
        for lang in dev.languages:
            assert table.cr(lang) == 1.0

    def test_lines_unit_is_lines_over_tokens(self):
        dev = dev_of({"aa": [b"ab cd", b"ab", b"cd", b"ab"]})
        model = TokenizerModel([])
        table = compute_cr(dev, model, NormUnit.LINES)
        total_tokens = sum(model.token_count(line) for line in dev.lines["aa"])
        assert table.unit_totals["aa"] == 4
        assert table.cr("aa") == 4 / total_tokens

    def test_four_lines_forty_tokens(self):
        # construct 4 lines of 10 bytes each: identity model gives 40 tokens
        dev = dev_of({"aa": [b"0123456789"] * 4})
        table = compute_cr(dev, TokenizerModel([]), NormUnit.LINES)
        assert table.cr("aa") == 0.1

    def test_parallel_lines_unit_identical_across_langs(self, dev):
        table = compute_cr(dev, TokenizerModel([]), NormUnit.LINES)
        assert len({table.unit_totals[lang] for lang in dev.languages}) == 1

    def test_labeled_corpus_bytes(self):
        corpus = LabeledCorpus.from_multisets({"aa": {b"abab": 2}})
        table = compute_cr(corpus, TokenizerModel([(b"a", b"b")]), NormUnit.BYTES)
        assert table.unit_totals["aa"] == 8
        assert table.token_totals["aa"] == 4
        assert table.cr("aa") == 2.0

    def test_zero_unit_total_rejected(self):
        with pytest.raises(DataError, match="zero"):
            CRTable(NormUnit.LINES, ("aa",), {"aa": 0}, {"aa": 5})


class TestSelectLanguage:
    CONFIG = ParityConfig(total_merges=10, window_size=6, alpha=2)

    def test_argmin(self):
        window = SelectionWindow(6)
        lang, fallback = select_language(
            {"en": 3.0, "de": 2.5, "sw": 1.8}, window, self.CONFIG
        )
        assert (lang, fallback) == ("sw", False)

    def test_over_quota_excluded(self):
        window = SelectionWindow(6)
        for _ in range(4):
            window.push("sw")
        lang, fallback = select_language(
            {"en": 3.0, "de": 2.5, "sw": 1.8}, window, self.CONFIG
        )
        assert (lang, fallback) == ("de", False)

    def test_all_excluded_falls_back_to_argmin(self):
        config = ParityConfig(total_merges=10, window_size=2, alpha=0.5)
        window = SelectionWindow(2)
        window.push("en")
        window.push("de")
        # quota = 0.5*2/2 = 0.5; count+1 > quota for every language
        lang, fallback = select_language({"en": 3.0, "de": 2.5}, window, config)
        assert (lang, fallback) == ("de", True)

    def test_tie_breaks_on_language_code(self):
        window = SelectionWindow(0)
        config = ParityConfig(total_merges=10, window_size=0)
        lang, _ = select_language({"bb": 1.0, "aa": 1.0}, window, config)
        assert lang == "aa"


class TestTrainParity:
    def test_pure_global_prelude_equals_classical(self, corpus, dev, classical_run):
        config = ParityConfig(total_merges=120, global_merges=120, window_size=0)
        model, log = train_parity(corpus, dev, config)
        classical_model, _ = classical_run
        assert model.merges == classical_model.merges[:120]
        assert all(step.mode == "global" for step in log)

    def test_hybrid_prefix_equality(self, hybrid_run, classical_run):
        hybrid_model, hybrid_log = hybrid_run
        classical_model, _ = classical_run
        assert hybrid_model.merges[:250] == classical_model.merges[:250]
        assert [s.mode for s in hybrid_log[:250]] == ["global"] * 250
        assert [s.mode for s in hybrid_log[250:]] == ["parity"] * (len(hybrid_log) - 250)

    def test_two_languages_equalize(self, tmp_path):
        from parity_bpe import SyntheticSpec, generate_synthetic, load_labeled_corpus, load_parallel_dev

        spec = SyntheticSpec.default(["aa", "bb"], [0.9, 0.1], dev_lines=60)
        spec.total_train_bytes = 120_000
        generate_synthetic(spec, seed=5, out_dir=tmp_path)
        corpus = load_labeled_corpus(tmp_path / "manifest.json")
        dev = load_parallel_dev(tmp_path / "dev", ["aa", "bb"])
        config = ParityConfig(total_merges=300, window_size=0)
        model, log = train_parity(corpus, dev, config)
        table = compute_cr(dev, model, NormUnit.LINES)
        crs = [table.cr(lang) for lang in dev.languages]
        assert abs(crs[0] - crs[1]) / max(crs) < 0.10
        tail = [step.lang for step in log[-60:]]
        assert set(tail) == {"aa", "bb"}

    def test_selection_follows_argmin_of_snapshot(self, parity_run):
        _, log = parity_run
        for step in log:
            assert step.mode == "parity"
            if step.fallback or step.skipped:
                continue
            argmin = min(step.cr_snapshot.items(), key=lambda kv: (kv[1], kv[0]))[0]
            assert step.lang == argmin

    def test_skipped_languages_precede_choice_in_cr_order(self, parity_run):
        _, log = parity_run
        for step in log:
            for skipped in step.skipped:
                key = (step.cr_snapshot[skipped], skipped)
                assert key <= (step.cr_snapshot[step.lang], step.lang)

    def test_dev_token_totals_match_reencode(self, corpus, dev):
        config = ParityConfig(total_merges=80, window_size=0)
        model, log = train_parity(corpus, dev, config)
        table = compute_cr(dev, model, NormUnit.LINES)
        assert log[-1].dev_tokens == table.token_totals

    def test_merge_decreases_selected_language_tokens(self, parity_run):
        _, log = parity_run
        for step in log:
            assert step.replacements[step.lang] >= 1

    def test_merge_applied_to_all_languages(self):
        # overlapping alphabets: the pair exists in both languages
        corpus = LabeledCorpus.from_multisets(
            {"aa": {b"xy": 10}, "bb": {b"xy": 2, b"qxyq": 1}}
        )
        dev = dev_of({"aa": [b"xy xy"], "bb": [b"qxyq"]})
        config = ParityConfig(total_merges=1, window_size=0)
        model, log = train_parity(corpus, dev, config)
        assert log[0].left == b"x" and log[0].right == b"y"
        assert log[0].replacements["aa"] >= 1 and log[0].replacements["bb"] >= 1
        assert model.encode(b"qxyq") == [b"q", b"xy", b"q"]

    def test_window_quota_respected(self, window_run):
        _, log = window_run
        selections = [(s.lang, s.fallback) for s in log if s.mode == "parity"]
        assert audit_selection_windows(selections, window_size=6, quota=4) == []

    def test_dev_missing_language_rejected(self, corpus):
        dev = dev_of({"aa": [b"x"], "bb": [b"y"]})
        config = ParityConfig(total_merges=5, window_size=0)
        with pytest.raises(CorpusError, match="missing languages"):
            train_parity(corpus, dev, config)

    def test_early_stop_when_no_language_has_pairs(self):
        corpus = LabeledCorpus.from_multisets({"aa": {b"ab": 1}, "bb": {b"cd": 1}})
        dev = dev_of({"aa": [b"ab"], "bb": [b"cd"]})
        config = ParityConfig(total_merges=5, window_size=0)
        model, log = train_parity(corpus, dev, config)
        assert len(model.merges) == 0
        assert log.stopped_early

    def test_skip_to_next_language_when_shard_exhausted(self):
        # 'bb' has the worse CR but no pair with count >= 2
        corpus = LabeledCorpus.from_multisets(
            {"aa": {b"xyxy": 5}, "bb": {b"pq": 1}}
        )
        dev = dev_of({"aa": [b"xy"], "bb": [b"pqpqpqpq"]})
        config = ParityConfig(total_merges=1, window_size=0)
        _, log = train_parity(corpus, dev, config)
        assert log[0].lang == "aa"
        assert log[0].skipped == ["bb"]


class TestTrainNoDev:
    def test_requires_training_as_dev(self, corpus):
        config = ParityConfig(total_merges=5, window_size=0)
        with pytest.raises(ConfigError):
            train_no_dev(corpus, config)

    def test_single_language_degenerates_to_classical(self):
        corpus = LabeledCorpus.from_multisets(
            {"solo": {b"abab": 4, b"abc": 3, b"cab": 2}}
        )
        config = ParityConfig(
            total_merges=6, window_size=0, unit=NormUnit.BYTES, dev_source="training_as_dev"
        )
        nodev_model, nodev_log = train_no_dev(corpus, config)
        classical_model, _ = train_classical(corpus, 6)
        assert nodev_model.merges == classical_model.merges
        assert all(step.lang == "solo" for step in nodev_log)

    def test_symmetric_corpus_alternates_by_tiebreak(self):
        # 'bb' is 'aa' with bytes relabeled: identical statistics
        aa = {b"abab": 6, b"abc": 3}
        bb = {w.translate(bytes.maketrans(b"abc", b"nop")): c for w, c in aa.items()}
        corpus = LabeledCorpus.from_multisets({"aa": aa, "bb": bb})
        config = ParityConfig(
            total_merges=6, window_size=0, unit=NormUnit.BYTES, dev_source="training_as_dev"
        )
        _, log = train_no_dev(corpus, config)
        assert [s.lang for s in log] == ["aa", "bb", "aa", "bb", "aa", "bb"]

    def test_cr_table_matches_bytes_recompute(self, corpus):
        config = ParityConfig(
            total_merges=60, window_size=0, unit=NormUnit.BYTES, dev_source="training_as_dev"
        )
        model, log = train_no_dev(corpus, config)
        table = compute_cr(corpus, model, NormUnit.BYTES)
        assert log[-1].dev_tokens == table.token_totals
        snapshot_crs = log[-1].cr_snapshot
        # snapshot is taken before the final merge; recompute with the prefix
        prefix_model = TokenizerModel(list(model.merges)[:-1])
        prefix_table = compute_cr(corpus, prefix_model, NormUnit.BYTES)
        for lang in corpus.languages:
            assert snapshot_crs[lang] == pytest.approx(prefix_table.cr(lang), abs=0)
