"""Deterministic synthetic multilingual corpus generator.

Each language gets a disjoint byte alphabet and a Zipf-distributed word
inventory. Training files are independent per language; dev files are
line-aligned renderings of shared message index sequences, so line i is the
same "content" expressed in every language's inventory.
"""

from __future__ import annotations

import json
import random
from bisect import bisect_right
from dataclasses import dataclass
from itertools import islice, product
from pathlib import Path

from .errors import ConfigError

# Pool of ASCII characters carved into disjoint per-language alphabets.
_ALPHABET_POOL = (
    "abcdefghijklmnopqrstuvwxyz"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "0123456789"
    "!#$%&'()*+,-./:;<=>?@"
)
_ALPHABET_SIZE = 13


@dataclass
class SyntheticLanguage:
    code: str
    alphabet: str


@dataclass
class SyntheticSpec:
    """Mixture description consumed by :func:`generate_synthetic`."""

    languages: list[SyntheticLanguage]
    proportions: list[float]
    dev_lines: int = 100
    total_train_bytes: int = 600_000
    vocab_size: int = 400
    zipf_exponent: float = 1.1
    words_per_line: tuple[int, int] = (6, 12)

    @classmethod
    def default(
        cls,
        codes: list[str],
        proportions: list[float],
        dev_lines: int = 100,
        **kwargs,
    ) -> "SyntheticSpec":
        """Assign disjoint ASCII alphabets to ``codes`` automatically."""
        if len(codes) * _ALPHABET_SIZE > len(_ALPHABET_POOL):
            raise ConfigError(
                f"at most {len(_ALPHABET_POOL) // _ALPHABET_SIZE} languages "
                "supported with auto-assigned alphabets"
            )
        langs = [
            SyntheticLanguage(code, _ALPHABET_POOL[i * _ALPHABET_SIZE : (i + 1) * _ALPHABET_SIZE])
            for i, code in enumerate(codes)
        ]
        return cls(languages=langs, proportions=list(proportions), dev_lines=dev_lines, **kwargs)

    def validate(self) -> None:
        if not self.languages:
            raise ConfigError("synthetic spec lists no languages")
        if len(self.proportions) != len(self.languages):
            raise ConfigError("one proportion required per language")
        if any(p <= 0 for p in self.proportions):
            raise ConfigError("proportions must be positive")
        if abs(sum(self.proportions) - 1.0) > 1e-9:
            raise ConfigError(f"proportions must sum to 1 (got {sum(self.proportions)!r})")
        codes = [l.code for l in self.languages]
        if len(set(codes)) != len(codes):
            raise ConfigError("duplicate language codes")
        byte_sets = []
        for lang in self.languages:
            if not lang.alphabet:
                raise ConfigError(f"empty alphabet for {lang.code!r}")
            bs = set(lang.alphabet.encode("utf-8"))
            if 0x20 in bs or any(b in bs for b in b"\t\n\r\x0b\x0c"):
                raise ConfigError(f"alphabet for {lang.code!r} contains whitespace")
            byte_sets.append((lang.code, bs))
        for i, (code_a, a) in enumerate(byte_sets):
            for code_b, b in byte_sets[i + 1 :]:
                if a & b:
                    raise ConfigError(
                        f"overlapping alphabets: {code_a!r} and {code_b!r} share bytes"
                    )
        if self.dev_lines < 0 or self.vocab_size < 2 or self.total_train_bytes <= 0:
            raise ConfigError("dev_lines, vocab_size, and total_train_bytes must be positive")
        lo, hi = self.words_per_line
        if not (1 <= lo <= hi):
            raise ConfigError("words_per_line must be a (low, high) pair with 1 <= low <= high")

    @classmethod
    def from_json(cls, path: str | Path) -> "SyntheticSpec":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        langs = data.get("languages", [])
        if langs and isinstance(langs[0], str):
            spec = cls.default(
                langs,
                data["proportions"],
                dev_lines=data.get("dev_lines", 100),
            )
        else:
            spec = cls(
                languages=[SyntheticLanguage(l["code"], l["alphabet"]) for l in langs],
                proportions=data["proportions"],
                dev_lines=data.get("dev_lines", 100),
            )
        for key in ("total_train_bytes", "vocab_size", "zipf_exponent"):
            if key in data:
                setattr(spec, key, data[key])
        if "words_per_line" in data:
            spec.words_per_line = tuple(data["words_per_line"])
        return spec


def _word_inventory(alphabet: str, size: int) -> list[str]:
    """Enumerate ``size`` words over ``alphabet``, shortest first."""
    words = []
    length = 2
    while len(words) < size:
        needed = size - len(words)
        words.extend(
            "".join(chars) for chars in islice(product(alphabet, repeat=length), needed)
        )
        length += 1
    return words


def _zipf_cumweights(n: int, exponent: float) -> list[float]:
    acc, out = 0.0, []
    for i in range(n):
        acc += 1.0 / (i + 1) ** exponent
        out.append(acc)
    return out


class _MessageSampler:
    """Samples word-index sequences from a Zipf distribution."""

    def __init__(self, rng: random.Random, spec: SyntheticSpec):
        self._rng = rng
        self._cum = _zipf_cumweights(spec.vocab_size, spec.zipf_exponent)
        self._total = self._cum[-1]
        self._lo, self._hi = spec.words_per_line

    def line_indices(self) -> list[int]:
        n = self._rng.randint(self._lo, self._hi)
        return [
            bisect_right(self._cum, self._rng.random() * self._total) for _ in range(n)
        ]


def generate_synthetic(spec: SyntheticSpec, seed: int, out_dir: str | Path) -> dict:
    """Write a labeled training corpus plus an aligned dev corpus.

    Emits ``train/<lang>.jsonl``, ``manifest.json``, ``dev/<lang>.txt``, and
    ``synth_stats.json`` under ``out_dir``. Pure function of (spec, seed):
    repeated runs produce byte-identical files. Returns the stats dict.
    """
    spec.validate()
    out_dir = Path(out_dir)
    (out_dir / "train").mkdir(parents=True, exist_ok=True)
    (out_dir / "dev").mkdir(parents=True, exist_ok=True)

    inventories = {
        lang.code: _word_inventory(lang.alphabet, spec.vocab_size) for lang in spec.languages
    }
    stats: dict = {"seed": seed, "languages": {}, "dev_lines": spec.dev_lines}

    manifest = {"languages": []}
    for lang, proportion in zip(spec.languages, spec.proportions):
        target = proportion * spec.total_train_bytes
        sampler = _MessageSampler(random.Random(f"{seed}/{lang.code}/train"), spec)
        inventory = inventories[lang.code]
        path = out_dir / "train" / f"{lang.code}.jsonl"
        emitted_bytes = 0
        emitted_lines = 0
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            while emitted_bytes < target:
                text = " ".join(inventory[i] for i in sampler.line_indices())
                fh.write(json.dumps({"text": text, "lang": lang.code}) + "\n")
                emitted_bytes += len(text.encode("utf-8"))
                emitted_lines += 1
        manifest["languages"].append({"lang": lang.code, "path": f"train/{lang.code}.jsonl"})
        stats["languages"][lang.code] = {
            "proportion": proportion,
            "train_text_bytes": emitted_bytes,
            "train_lines": emitted_lines,
        }

    dev_sampler = _MessageSampler(random.Random(f"{seed}/dev"), spec)
    messages = [dev_sampler.line_indices() for _ in range(spec.dev_lines)]
    for lang in spec.languages:
        inventory = inventories[lang.code]
        path = out_dir / "dev" / f"{lang.code}.txt"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for indices in messages:
                fh.write(" ".join(inventory[i] for i in indices) + "\n")

    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    (out_dir / "synth_stats.json").write_text(
        json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return stats
