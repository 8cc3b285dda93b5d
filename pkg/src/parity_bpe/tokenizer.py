"""The tokenizer triple: vocabulary, deterministic encode, concatenative decode.

A model is fully determined by its ordered merge list. The vocabulary is the
256 singleton bytes plus each merge's concatenated result; encoding applies
merges by ascending rank inside each pre-token and never crosses pre-token
boundaries. Decoding is byte concatenation, so round-trips are lossless for
arbitrary byte input.
"""

from __future__ import annotations

from pathlib import Path

from . import _kernels
from .corpus import pretokenize
from .errors import ModelFormatError

MODEL_HEADER = "parity-bpe v1"

_PRINTABLE = frozenset(range(0x21, 0x7F)) - {0x5C}  # visible ASCII minus backslash


def escape_token(token: bytes) -> str:
    """Escape a byte span for the text model format (\\xHH for non-printables)."""
    return "".join(chr(b) if b in _PRINTABLE else f"\\x{b:02x}" for b in token)


def unescape_token(text: str) -> bytes:
    """Inverse of :func:`escape_token`; raises on malformed escapes."""
    out = bytearray()
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 3 >= n or text[i + 1] != "x":
                raise ModelFormatError(f"malformed escape in token {text!r}")
            try:
                out.append(int(text[i + 2 : i + 4], 16))
            except ValueError:
                raise ModelFormatError(f"malformed escape in token {text!r}") from None
            i += 4
        else:
            code = ord(ch)
            if code not in _PRINTABLE:
                raise ModelFormatError(f"unescaped byte {code:#x} in token {text!r}")
            out.append(code)
            i += 1
    return bytes(out)


class TokenizerModel:
    """Immutable byte-level BPE model built from an ordered merge list.

    Token ids follow model order: ids 0-255 are the singleton bytes, id
    256+k is the result of merge k. When two merges produce identical bytes
    the earliest id is the canonical one and is the only id emitted by
    ``encode_ids``.
    """

    def __init__(self, merges: list[tuple[bytes, bytes]]):
        vocab = [bytes([i]) for i in range(256)]
        first_id = {span: i for i, span in enumerate(vocab)}
        table: dict[tuple[int, int], tuple[int, int]] = {}
        merge_rank: dict[tuple[bytes, bytes], int] = {}
        for k, (left, right) in enumerate(merges):
            for operand in (left, right):
                if not operand:
                    raise ModelFormatError(f"merge {k}: empty operand")
                if operand not in first_id:
                    raise ModelFormatError(
                        f"merge {k}: operand not producible: {escape_token(operand)!r}"
                    )
            pair = (left, right)
            if pair in merge_rank:
                raise ModelFormatError(
                    f"merge {k}: duplicate pair "
                    f"{escape_token(left)!r} + {escape_token(right)!r}"
                )
            result = left + right
            vocab.append(result)
            first_id.setdefault(result, 256 + k)
            merge_rank[pair] = k
            table[(first_id[left], first_id[right])] = (k, first_id[result])

        self.merges: tuple[tuple[bytes, bytes], ...] = tuple(merges)
        self.merge_rank = merge_rank
        self.id_to_bytes: tuple[bytes, ...] = tuple(vocab)
        self.vocabulary: frozenset[bytes] = frozenset(vocab)
        self._first_id = first_id
        self._table = table
        self._word_cache: dict[bytes, list[int]] = {}

    @property
    def vocab_size(self) -> int:
        """Number of distinct byte spans in the vocabulary."""
        return len(self.vocabulary)

    def _encode_word(self, word: bytes) -> list[int]:
        cached = self._word_cache.get(word)
        if cached is None:
            cached = _kernels.encode_ids(list(word), self._table)
            self._word_cache[word] = cached
        return cached

    def encode_ids(self, text: bytes) -> list[int]:
        """Tokenize ``text`` into canonical token ids."""
        out: list[int] = []
        for word in pretokenize(text):
            out.extend(self._encode_word(word))
        return out

    def encode(self, text: bytes) -> list[bytes]:
        """Tokenize ``text`` into token byte spans."""
        vocab = self.id_to_bytes
        return [vocab[i] for i in self.encode_ids(text)]

    def token_count(self, text: bytes) -> int:
        """Length of ``encode(text)`` without building the token list."""
        return sum(len(self._encode_word(word)) for word in pretokenize(text))

    def decode(self, tokens) -> bytes:
        """Concatenate token byte spans; every token must be in the vocabulary."""
        spans = []
        for token in tokens:
            if not isinstance(token, (bytes, bytearray)):
                raise ModelFormatError(f"token must be bytes, got {type(token).__name__}")
            if bytes(token) not in self.vocabulary:
                raise ModelFormatError(f"token not in vocabulary: {escape_token(token)!r}")
            spans.append(bytes(token))
        return b"".join(spans)

    def decode_ids(self, ids) -> bytes:
        """Concatenate token ids; ids must be valid model-order ids."""
        vocab = self.id_to_bytes
        spans = []
        for i in ids:
            if not 0 <= i < len(vocab):
                raise ModelFormatError(f"unknown token id: {i}")
            spans.append(vocab[i])
        return b"".join(spans)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(MODEL_HEADER + "\n")
            fh.write("merges:\n")
            for left, right in self.merges:
                fh.write(f"{escape_token(left)}\t{escape_token(right)}\n")

    @classmethod
    def load(cls, path: str | Path) -> "TokenizerModel":
        path = Path(path)
        try:
            text = path.read_text(encoding="ascii")
        except FileNotFoundError:
            raise ModelFormatError(f"model file not found: {path}") from None
        except UnicodeDecodeError as exc:
            raise ModelFormatError(f"{path}: not a text model file ({exc})") from None
        if text.endswith("\n"):
            text = text[:-1]
        lines = text.split("\n")
        if not lines or lines[0] != MODEL_HEADER:
            found = lines[0] if lines else ""
            raise ModelFormatError(
                f"{path}: unsupported model version {found!r} (expected {MODEL_HEADER!r})"
            )
        if len(lines) < 2 or lines[1] != "merges:":
            raise ModelFormatError(f"{path}: missing 'merges:' section")
        merges = []
        for lineno, line in enumerate(lines[2:], start=3):
            parts = line.split("\t")
            if len(parts) != 2:
                raise ModelFormatError(f"{path}:{lineno}: malformed merge line {line!r}")
            try:
                merges.append((unescape_token(parts[0]), unescape_token(parts[1])))
            except ModelFormatError as exc:
                raise ModelFormatError(f"{path}:{lineno}: {exc}") from None
        try:
            return cls(merges)
        except ModelFormatError as exc:
            raise ModelFormatError(f"{path}: {exc}") from None


def save_model(model: TokenizerModel, path: str | Path) -> None:
    model.save(path)


def load_model(path: str | Path) -> TokenizerModel:
    return TokenizerModel.load(path)
