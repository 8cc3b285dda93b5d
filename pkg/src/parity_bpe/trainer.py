"""Greedy merge learning over a tokenized corpus.

The trainer keeps every unique pre-token as a token-id sequence together
with its per-language multiplicity. Adjacent-pair counts are maintained
incrementally per language; selection uses lazily-invalidated max-heaps
keyed on (count, left bytes, right bytes) so ties break deterministically
on the lexicographically smallest byte spans.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import _kernels
from .corpus import LabeledCorpus
from .errors import ConfigError, CorpusError, InternalError
from .tokenizer import TokenizerModel, escape_token, unescape_token

# Pairs occurring once are never merged; they cannot compress held-out text.
MIN_PAIR_COUNT = 2


@dataclass
class TrainStep:
    """One learned merge and the statistics that justified it."""

    step: int
    left: bytes
    right: bytes
    count: int
    mode: str  # "global" or "parity"
    lang: str | None = None
    fallback: bool = False
    skipped: list[str] = field(default_factory=list)
    cr_snapshot: dict[str, float] | None = None
    dev_tokens: dict[str, int] | None = None
    replacements: dict[str, int] | None = None

    def to_record(self) -> dict:
        rec = {
            "step": self.step,
            "left": escape_token(self.left),
            "right": escape_token(self.right),
            "count": self.count,
            "mode": self.mode,
        }
        if self.lang is not None:
            rec["lang"] = self.lang
        if self.fallback:
            rec["fallback"] = True
        if self.skipped:
            rec["skipped"] = self.skipped
        if self.cr_snapshot is not None:
            rec["cr_snapshot"] = self.cr_snapshot
        if self.dev_tokens is not None:
            rec["dev_tokens"] = self.dev_tokens
        if self.replacements is not None:
            rec["replacements"] = self.replacements
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "TrainStep":
        return cls(
            step=rec["step"],
            left=unescape_token(rec["left"]),
            right=unescape_token(rec["right"]),
            count=rec["count"],
            mode=rec["mode"],
            lang=rec.get("lang"),
            fallback=rec.get("fallback", False),
            skipped=rec.get("skipped", []),
            cr_snapshot=rec.get("cr_snapshot"),
            dev_tokens=rec.get("dev_tokens"),
            replacements=rec.get("replacements"),
        )


class TrainLog:
    """Ordered record of learned merges, one entry per merge."""

    def __init__(self):
        self.steps: list[TrainStep] = []
        self.stopped_early = False
        self.stop_reason: str | None = None

    def append(self, step: TrainStep) -> None:
        self.steps.append(step)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for step in self.steps:
                fh.write(json.dumps(step.to_record(), sort_keys=True) + "\n")

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "TrainLog":
        log = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    log.append(TrainStep.from_record(json.loads(line)))
        return log


class _WordStore:
    """Unique token sequences with per-language counts and a pair index.

    ``index[pair][word_id]`` is the positional occurrence count of the pair
    inside that word; ``pair_counts[pair]`` (when tracked) is the per-language
    occurrence count weighted by word multiplicity. ``token_totals`` tracks
    the per-language total token count and shrinks by one per replacement.
    """

    def __init__(self, n_langs: int, track_pairs: bool):
        self.n_langs = n_langs
        self.words: list[tuple[int, ...]] = []
        self.counts: list[list[int]] = []
        self.index: dict[tuple[int, int], dict[int, int]] = {}
        self.pair_counts: dict[tuple[int, int], list[int]] | None = (
            {} if track_pairs else None
        )
        self.token_totals = [0] * n_langs

    def add_word(self, tokens: tuple[int, ...], counts_vec: list[int]) -> None:
        wid = len(self.words)
        self.words.append(tokens)
        self.counts.append(counts_vec)
        for li, c in enumerate(counts_vec):
            self.token_totals[li] += len(tokens) * c
        for pair, occ in _kernels.count_pairs(tokens).items():
            slot = self.index.setdefault(pair, {})
            slot[wid] = occ
            if self.pair_counts is not None:
                vec = self.pair_counts.get(pair)
                if vec is None:
                    vec = self.pair_counts[pair] = [0] * self.n_langs
                for li, c in enumerate(counts_vec):
                    if c:
                        vec[li] += occ * c

    def apply_merge(self, a: int, b: int, c: int):
        """Replace (a, b) with c in every word containing it.

        Returns (per-language replacement counts, per-pair count deltas).
        """
        n_langs = self.n_langs
        occ_map = self.index.get((a, b))
        repl = [0] * n_langs
        changed: dict[tuple[int, int], list[int]] = {}
        if not occ_map:
            return repl, changed
        for wid in list(occ_map):
            new_tokens, n_rep, deltas = _kernels.merge_and_deltas(
                self.words[wid], a, b, c
            )
            if not n_rep:
                continue
            self.words[wid] = new_tokens
            cvec = self.counts[wid]
            for li in range(n_langs):
                if cvec[li]:
                    repl[li] += n_rep * cvec[li]
            for pair, d in deltas.items():
                slot = self.index.get(pair)
                if d > 0:
                    if slot is None:
                        slot = self.index[pair] = {}
                    slot[wid] = slot.get(wid, 0) + d
                else:
                    remaining = slot[wid] + d
                    if remaining:
                        slot[wid] = remaining
                    else:
                        del slot[wid]
                        if not slot:
                            del self.index[pair]
                acc = changed.get(pair)
                if acc is None:
                    acc = changed[pair] = [0] * n_langs
                for li in range(n_langs):
                    if cvec[li]:
                        acc[li] += d * cvec[li]
        for li in range(n_langs):
            self.token_totals[li] -= repl[li]
        if self.pair_counts is not None:
            for pair, dvec in changed.items():
                vec = self.pair_counts.get(pair)
                if vec is None:
                    vec = self.pair_counts[pair] = [0] * n_langs
                alive = False
                for li in range(n_langs):
                    vec[li] += dvec[li]
                    if vec[li]:
                        alive = True
                if not alive:
                    del self.pair_counts[pair]
        return repl, changed


@dataclass
class MergeInfo:
    """Outcome of applying one merge across the trainer state."""

    left: bytes
    right: bytes
    result: bytes
    new_id: int
    canonical_id: int
    train_repl: list[int]
    dev_repl: list[int] | None


class TrainerState:
    """Mutable training state: vocabulary, word stores, selection heaps."""

    def __init__(
        self,
        corpus: LabeledCorpus,
        dev_words: dict[str, dict[bytes, int]] | None = None,
        min_count: int = MIN_PAIR_COUNT,
    ):
        if not corpus.languages:
            raise CorpusError("empty corpus: no languages")
        self.langs: list[str] = list(corpus.languages)
        self.lang_index = {lang: i for i, lang in enumerate(self.langs)}
        self.min_count = min_count
        self.vocab: list[bytes] = [bytes([i]) for i in range(256)]
        self.first_id: dict[bytes, int] = {span: i for i, span in enumerate(self.vocab)}
        self.merges: list[tuple[bytes, bytes]] = []
        self._merged_pairs: set[tuple[bytes, bytes]] = set()

        n_langs = len(self.langs)
        self.train = _WordStore(n_langs, track_pairs=True)
        self._fill_store(self.train, {l: corpus.per_language[l] for l in self.langs})
        if not self.train.words:
            raise CorpusError("empty corpus: no pre-tokens")

        self.dev: _WordStore | None = None
        if dev_words is not None:
            missing = [l for l in self.langs if l not in dev_words]
            if missing:
                raise CorpusError(f"dev corpus missing languages: {missing}")
            self.dev = _WordStore(n_langs, track_pairs=False)
            self._fill_store(self.dev, {l: dev_words[l] for l in self.langs})

        self.global_heap: list = []
        self.lang_heaps: list[list] = [[] for _ in range(n_langs)]
        for pair, vec in self.train.pair_counts.items():
            self._push_entries(pair, vec, range(n_langs))

    def _fill_store(self, store: _WordStore, multisets: dict[str, dict[bytes, int]]):
        combined: dict[bytes, list[int]] = {}
        n_langs = len(self.langs)
        for li, lang in enumerate(self.langs):
            for word, count in multisets[lang].items():
                vec = combined.get(word)
                if vec is None:
                    vec = combined[word] = [0] * n_langs
                vec[li] += count
        for word in sorted(combined):
            store.add_word(tuple(word), combined[word])

    def _push_entries(self, pair, vec, lang_indices) -> None:
        a, b = pair
        lb, rb = self.vocab[a], self.vocab[b]
        total = sum(vec)
        if total > 0:
            heapq.heappush(self.global_heap, (-total, lb, rb, a, b))
        for li in lang_indices:
            if vec[li] > 0:
                heapq.heappush(self.lang_heaps[li], (-vec[li], lb, rb, a, b))

    def _select(self, heap, value_of, consume: bool):
        """Pop until the top entry matches its live count; that is the argmax."""
        pc = self.train.pair_counts
        while heap:
            entry = heapq.heappop(heap)
            negc, _, _, a, b = entry
            vec = pc.get((a, b))
            if vec is None:
                continue
            current = value_of(vec)
            if current != -negc:
                continue
            if current < self.min_count:
                return None
            if not consume:
                heapq.heappush(heap, entry)
            return (a, b), current
        return None

    def select_global(self, consume: bool = True):
        """Best pair by summed count across languages, or None if exhausted."""
        return self._select(self.global_heap, sum, consume)

    def select_for_lang(self, lang: str, consume: bool = True):
        """Best pair within one language's shard, or None if exhausted."""
        li = self.lang_index[lang]
        return self._select(self.lang_heaps[li], lambda vec: vec[li], consume)

    def apply(self, pair: tuple[int, int]) -> MergeInfo:
        """Record the merge and replace its occurrences in all stores."""
        a, b = pair
        left, right = self.vocab[a], self.vocab[b]
        byte_pair = (left, right)
        if byte_pair in self._merged_pairs:
            raise InternalError(f"pair merged twice: {escape_token(left)!r}+{escape_token(right)!r}")
        self._merged_pairs.add(byte_pair)
        result = left + right
        new_id = len(self.vocab)
        self.vocab.append(result)
        canonical = self.first_id.setdefault(result, new_id)
        self.merges.append(byte_pair)

        train_repl, changed = self.train.apply_merge(a, b, canonical)
        pc = self.train.pair_counts
        n_langs = len(self.langs)
        for p, dvec in changed.items():
            vec = pc.get(p)
            if vec is None or not any(dvec):
                continue
            self._push_entries(p, vec, [li for li in range(n_langs) if dvec[li]])

        dev_repl = None
        if self.dev is not None:
            dev_repl, _ = self.dev.apply_merge(a, b, canonical)
        return MergeInfo(left, right, result, new_id, canonical, train_repl, dev_repl)

    def resolve_pair(self, left: bytes, right: bytes) -> tuple[int, int] | None:
        """Canonical id pair for two byte spans, or None if either is unknown."""
        a = self.first_id.get(left)
        b = self.first_id.get(right)
        if a is None or b is None:
            return None
        return a, b

    def global_pair_counts(self) -> dict[tuple[bytes, bytes], int]:
        """Summed pair counts keyed by byte spans (test/inspection view)."""
        return {
            (self.vocab[a], self.vocab[b]): sum(vec)
            for (a, b), vec in self.train.pair_counts.items()
        }

    def lang_pair_counts(self, lang: str) -> dict[tuple[bytes, bytes], int]:
        li = self.lang_index[lang]
        return {
            (self.vocab[a], self.vocab[b]): vec[li]
            for (a, b), vec in self.train.pair_counts.items()
            if vec[li]
        }

    def tokenized_words(self, store: str = "train"):
        """Yield (token byte spans, per-language counts) for inspection."""
        ws = self.train if store == "train" else self.dev
        for tokens, cvec in zip(ws.words, ws.counts):
            spans = tuple(self.vocab[t] for t in tokens)
            yield spans, {lang: cvec[li] for li, lang in enumerate(self.langs) if cvec[li]}

    def to_model(self) -> TokenizerModel:
        return TokenizerModel(list(self.merges))


def init_state(corpus: LabeledCorpus) -> TrainerState:
    """Tokenize the corpus into singleton bytes and build pair counts."""
    return TrainerState(corpus)


def select_merge(state: TrainerState):
    """Max-count pair under the global objective without consuming it.

    Returns ((left bytes, right bytes), count) or None when no pair meets
    the minimum count.
    """
    sel = state.select_global(consume=False)
    if sel is None:
        return None
    (a, b), count = sel
    return (state.vocab[a], state.vocab[b]), count


def apply_merge(state: TrainerState, pair: tuple[bytes, bytes]) -> MergeInfo | None:
    """Apply a merge given as byte spans; returns None if the pair is absent."""
    ids = state.resolve_pair(*pair)
    if ids is None or ids not in state.train.index:
        return None
    return state.apply(ids)


def train_classical(
    corpus: LabeledCorpus, num_merges: int, on_step=None
) -> tuple[TokenizerModel, TrainLog]:
    """Greedy global BPE: repeatedly merge the highest-count adjacent pair."""
    if num_merges < 0:
        raise ConfigError(f"merge budget must be >= 0, got {num_merges}")
    state = TrainerState(corpus)
    log = TrainLog()
    for k in range(num_merges):
        sel = state.select_global()
        if sel is None:
            log.stopped_early = True
            log.stop_reason = f"no pair with count >= {state.min_count} after {k} merges"
            break
        pair, count = sel
        info = state.apply(pair)
        record = TrainStep(
            step=k + 1,
            left=info.left,
            right=info.right,
            count=count,
            mode="global",
            replacements={
                lang: info.train_repl[li] for li, lang in enumerate(state.langs)
            },
        )
        log.append(record)
        if on_step is not None:
            on_step(state, record)
    return state.to_model(), log
