"""Min-max merge learning: drive each merge from the worst-compressed language.

At every step the language with the lowest compression rate on the reference
corpus is selected (optionally rate-limited by a moving window), the best
pair inside that language's training shard is merged, and the merge is
applied to every language's shard and to the reference-corpus token totals.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction

from .corpus import LabeledCorpus, NormUnit, ParallelDevCorpus, pretokenize, unit_length
from .errors import ConfigError, CorpusError, DataError
from .tokenizer import TokenizerModel
from .trainer import MIN_PAIR_COUNT, TrainerState, TrainLog, TrainStep

DEV_SOURCE_PARALLEL = "parallel_dev"
DEV_SOURCE_TRAINING = "training_as_dev"


@dataclass
class ParityConfig:
    """Knobs for min-max training.

    ``global_merges`` is the hybrid prelude length (0 for pure parity
    training); ``window_size`` 0 disables moving-window balancing. With
    ``training_as_dev`` the training corpus itself provides compression
    rates, measured in bytes.
    """

    total_merges: int
    global_merges: int = 0
    window_size: int = 100
    alpha: float = 2.0
    unit: NormUnit = NormUnit.LINES
    dev_source: str = DEV_SOURCE_PARALLEL
    min_count: int = MIN_PAIR_COUNT

    @classmethod
    def with_split(cls, total_merges: int, split: float = 0.5, **kwargs) -> "ParityConfig":
        """Hybrid config: the first ``split`` fraction of merges is global."""
        if not 0.0 <= split <= 1.0:
            raise ConfigError(f"hybrid split must be in [0, 1], got {split}")
        return cls(total_merges, global_merges=int(total_merges * split), **kwargs)

    def validate(self) -> None:
        if self.total_merges < 0:
            raise ConfigError(f"merge budget must be >= 0, got {self.total_merges}")
        if not 0 <= self.global_merges <= self.total_merges:
            raise ConfigError(
                f"global merges must be in [0, {self.total_merges}], got {self.global_merges}"
            )
        if self.window_size < 0:
            raise ConfigError(f"window size must be >= 0, got {self.window_size}")
        if self.alpha_fraction <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha!r}")
        if self.dev_source not in (DEV_SOURCE_PARALLEL, DEV_SOURCE_TRAINING):
            raise ConfigError(f"unknown dev source {self.dev_source!r}")
        if self.dev_source == DEV_SOURCE_TRAINING and NormUnit(self.unit) is not NormUnit.BYTES:
            raise ConfigError("training_as_dev requires the bytes normalization unit")
        if self.min_count < 1:
            raise ConfigError(f"min count must be >= 1, got {self.min_count}")

    @property
    def alpha_fraction(self) -> Fraction:
        # str() keeps decimal CLI values exact (Fraction("1.5") == 3/2).
        return Fraction(str(self.alpha))

    def quota(self, n_langs: int) -> Fraction | None:
        """Window occupancy bound per language; None when the window is off."""
        if self.window_size == 0:
            return None
        return self.alpha_fraction * self.window_size / n_langs

    def as_dict(self) -> dict:
        return {
            "total_merges": self.total_merges,
            "global_merges": self.global_merges,
            "window_size": self.window_size,
            "alpha": self.alpha,
            "unit": NormUnit(self.unit).value,
            "dev_source": self.dev_source,
            "min_count": self.min_count,
        }


class SelectionWindow:
    """Ring buffer of the most recent language selections."""

    def __init__(self, size: int):
        self.size = size
        self._recent: deque[str] = deque(maxlen=size) if size > 0 else deque(maxlen=0)

    def push(self, lang: str) -> None:
        if self.size > 0:
            self._recent.append(lang)

    def count(self, lang: str) -> int:
        return sum(1 for x in self._recent if x == lang)

    def contents(self) -> tuple[str, ...]:
        return tuple(self._recent)


@dataclass
class CRTable:
    """Per-language compression bookkeeping in ratio-of-sums form.

    ``cr(lang)`` is the fixed unit total divided by the current token total;
    token totals shrink as merges are appended.
    """

    unit: NormUnit
    langs: tuple[str, ...]
    unit_totals: dict[str, int]
    token_totals: dict[str, int]

    def __post_init__(self):
        for lang in self.langs:
            if self.unit_totals.get(lang, 0) <= 0:
                raise DataError(f"zero {NormUnit(self.unit).value} total for language {lang!r}")
            if self.token_totals.get(lang, 0) <= 0:
                raise DataError(f"zero token total for language {lang!r}")

    def cr(self, lang: str) -> float:
        return self.unit_totals[lang] / self.token_totals[lang]

    def snapshot(self) -> dict[str, float]:
        return {lang: self.cr(lang) for lang in self.langs}


def compute_cr(
    dev: ParallelDevCorpus | LabeledCorpus, model: TokenizerModel, unit: NormUnit
) -> CRTable:
    """Compression-rate table of ``model`` over a reference corpus."""
    unit = NormUnit(unit)
    unit_totals: dict[str, int] = {}
    token_totals: dict[str, int] = {}
    if isinstance(dev, ParallelDevCorpus):
        for lang in dev.languages:
            unit_totals[lang] = sum(unit_length(line, unit) for line in dev.lines[lang])
            token_totals[lang] = sum(model.token_count(line) for line in dev.lines[lang])
        langs = dev.languages
    else:
        for lang in dev.languages:
            unit_totals[lang] = dev.unit_totals[lang][unit]
            token_totals[lang] = sum(
                model.token_count(word) * count
                for word, count in dev.per_language[lang].items()
            )
        langs = dev.languages
    return CRTable(unit, tuple(langs), unit_totals, token_totals)


def _ordered_candidates(
    crs: dict[str, float], window: SelectionWindow, quota: Fraction | None
) -> tuple[list[str], list[str]]:
    """Languages by ascending (CR, code), split into within-quota and excluded.

    A language is excluded when selecting it would push its occupancy of the
    moving window (current selection included) above the quota.
    """
    order = sorted(crs, key=lambda lang: (crs[lang], lang))
    if quota is None:
        return order, []
    allowed = [lang for lang in order if window.count(lang) + 1 <= quota]
    blocked = [lang for lang in order if window.count(lang) + 1 > quota]
    return allowed, blocked


def select_language(
    table: CRTable | dict[str, float], window: SelectionWindow, config: ParityConfig
) -> tuple[str, bool]:
    """Worst-compressed language after window filtering.

    Returns (language, fallback); fallback is True when every language was
    excluded by the window and the unfiltered argmin was used instead.
    """
    crs = table.snapshot() if isinstance(table, CRTable) else dict(table)
    if not crs:
        raise DataError("no languages to select from")
    allowed, blocked = _ordered_candidates(crs, window, config.quota(len(crs)))
    if allowed:
        return allowed[0], False
    return blocked[0], True


def _run_minmax(
    state: TrainerState,
    config: ParityConfig,
    unit_totals: list[int],
    token_totals: list[int],
    on_step,
) -> tuple[TokenizerModel, TrainLog]:
    """Shared hybrid/parity loop over a live token-total vector."""
    langs = state.langs
    n_langs = len(langs)
    for li, lang in enumerate(langs):
        if unit_totals[li] <= 0:
            raise DataError(f"zero {NormUnit(config.unit).value} total for language {lang!r}")
        if token_totals[li] <= 0:
            raise DataError(f"zero token total for language {lang!r}")

    window = SelectionWindow(config.window_size)
    quota = config.quota(n_langs)
    log = TrainLog()

    for k in range(1, config.total_merges + 1):
        snapshot = None
        chosen = None
        fallback = False
        skipped: list[str] = []
        if k <= config.global_merges:
            sel = state.select_global()
            if sel is None:
                log.stopped_early = True
                log.stop_reason = f"no pair with count >= {config.min_count} after {k - 1} merges"
                break
            mode = "global"
        else:
            snapshot = {
                lang: unit_totals[li] / token_totals[li] for li, lang in enumerate(langs)
            }
            allowed, blocked = _ordered_candidates(snapshot, window, quota)
            sel = None
            for lang in allowed + blocked:
                sel = state.select_for_lang(lang)
                if sel is not None:
                    chosen = lang
                    break
                skipped.append(lang)
            if sel is None:
                log.stopped_early = True
                log.stop_reason = (
                    f"no language has a pair with count >= {config.min_count} "
                    f"after {k - 1} merges"
                )
                break
            fallback = chosen not in allowed
            window.push(chosen)
            mode = "parity"

        pair, count = sel
        info = state.apply(pair)
        record = TrainStep(
            step=k,
            left=info.left,
            right=info.right,
            count=count,
            mode=mode,
            lang=chosen,
            fallback=fallback,
            skipped=skipped,
            cr_snapshot=snapshot,
            dev_tokens={lang: token_totals[li] for li, lang in enumerate(langs)},
            replacements={lang: info.train_repl[li] for li, lang in enumerate(langs)},
        )
        log.append(record)
        if on_step is not None:
            on_step(state, record)

    return state.to_model(), log


def train_parity(
    train: LabeledCorpus,
    dev: ParallelDevCorpus,
    config: ParityConfig,
    on_step=None,
) -> tuple[TokenizerModel, TrainLog]:
    """Min-max training with compression rates measured on a parallel dev set."""
    config.validate()
    if config.dev_source != DEV_SOURCE_PARALLEL:
        raise ConfigError("train_parity requires dev_source='parallel_dev'; use train_no_dev")
    missing = [lang for lang in train.languages if lang not in dev.languages]
    if missing:
        raise CorpusError(f"dev corpus missing languages: {missing}")

    unit = NormUnit(config.unit)
    dev_words: dict[str, Counter] = {}
    unit_totals: list[int] = []
    for lang in train.languages:
        words = Counter()
        total = 0
        for line in dev.lines[lang]:
            words.update(pretokenize(line))
            total += unit_length(line, unit)
        dev_words[lang] = words
        unit_totals.append(total)

    state = TrainerState(train, dev_words=dev_words, min_count=config.min_count)
    return _run_minmax(state, config, unit_totals, state.dev.token_totals, on_step)


def train_no_dev(
    train: LabeledCorpus, config: ParityConfig, on_step=None
) -> tuple[TokenizerModel, TrainLog]:
    """Min-max training with byte-unit compression rates on the training corpus."""
    config.validate()
    if config.dev_source != DEV_SOURCE_TRAINING:
        raise ConfigError("train_no_dev requires dev_source='training_as_dev'")
    state = TrainerState(train, min_count=config.min_count)
    unit_totals = [train.unit_totals[lang][NormUnit.BYTES] for lang in state.langs]
    return _run_minmax(state, config, unit_totals, state.train.token_totals, on_step)
