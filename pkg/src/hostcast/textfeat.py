"""Tokenization, vocabularies, lexicons, and per-thread feature assembly.

Feature vectors are sparse (index, value) pairs over a fixed layout of
namespaced groups.  The nine groups:

- ``U``          bag of words over the observed comments
- ``lex``        hate/profanity lexicon hits (9 values)
- ``w2v``        max/mean aggregate of word vectors (200 values)
- ``n-w2v``      same aggregate using the character n-gram table
- ``final-com``  U + n-w2v + lex computed on the last observed comment
- ``prev-com``   U + n-w2v + lex over observed commenters' latest comments
                 elsewhere, plus a missing-history indicator
- ``prev-post``  U + n-w2v + lex over the author's previous post's comments,
                 plus a missing-history indicator
- ``trend``      four summaries of per-comment hostility posteriors
- ``user``       commenter heterogeneity and mention fraction (2 values)

Group layouts are deterministic for a fixed (vocabulary, group set), so a
subset's layout is always a projection of a superset's.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, Post

MENTION = "MENTION"

GROUP_ORDER = (
    "U",
    "lex",
    "w2v",
    "n-w2v",
    "final-com",
    "prev-com",
    "prev-post",
    "trend",
    "user",
)

HATE_CATEGORIES = (
    "class",
    "disability",
    "ethnicity",
    "gender",
    "nationality",
    "religion",
)

LEX_FEATURE_NAMES = tuple(
    [f"hate_{cat}" for cat in HATE_CATEGORIES]
    + ["hate_total", "profane_any", "profane_count"]
)
# Count-valued lexicon features get z-scored; binaries do not.
_LEX_STANDARDIZE = (False,) * 6 + (True, False, True)

TREND_FEATURE_NAMES = ("count_above", "frac_above", "max_slope", "range")
USER_FEATURE_NAMES = ("unique_ratio", "mention_frac")

# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

_EMOJI_RANGES = (
    (0x1F1E6, 0x1F1FF),
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F780, 0x1F7FF),
    (0x1F900, 0x1F9FF),
    (0x1FA70, 0x1FAFF),
    (0x2600, 0x26FF),
    (0x2700, 0x27BF),
    (0x2B00, 0x2BFF),
)

_EMOJI_CLASS = "".join(f"{chr(lo)}-{chr(hi)}" for lo, hi in _EMOJI_RANGES)
_TOKEN_RE = re.compile(rf"@\w+|[\w']+|[{_EMOJI_CLASS}]")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; each emoji codepoint is its own token and any
    @-mention collapses to the MENTION sentinel.

    Multi-codepoint emoji (ZWJ sequences, variation selectors, skin tones
    outside the listed ranges) are split at the codepoint level; joiner and
    selector codepoints are dropped.
    """
    out = []
    for m in _TOKEN_RE.finditer(text):
        tok = m.group(0)
        if tok.startswith("@") and len(tok) > 1:
            out.append(MENTION)
        else:
            out.append(tok.lower())
    return out


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vocabulary:
    """Token to dense column index; indices follow sorted token order."""

    index: Mapping[str, int]
    min_count: int = 1

    @property
    def size(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __getitem__(self, token: str) -> int:
        return self.index[token]

    def tokens(self) -> list[str]:
        return sorted(self.index, key=self.index.get)


def build_vocab(token_seqs: Iterable[Sequence[str]], min_count: int = 2) -> Vocabulary:
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for seq in token_seqs:
        counts.update(seq)
    kept = sorted(tok for tok, c in counts.items() if c >= min_count)
    return Vocabulary(index={tok: i for i, tok in enumerate(kept)}, min_count=min_count)


# ---------------------------------------------------------------------------
# Lexicons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lexicons:
    """Six hate-word categories plus a separate profanity list, all lowercase."""

    hate: Mapping[str, frozenset[str]]
    profane: frozenset[str]

    def __post_init__(self):
        if tuple(sorted(self.hate)) != HATE_CATEGORIES:
            raise ValueError(f"hate lexicon must have categories {HATE_CATEGORIES}")
        for cat, words in self.hate.items():
            for w in words:
                if w != w.lower():
                    raise ValueError(f"hate[{cat}] entry {w!r} is not lowercase")
        for w in self.profane:
            if w != w.lower():
                raise ValueError(f"profane entry {w!r} is not lowercase")


def _read_wordlist(path: Path) -> frozenset[str]:
    words = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word:
            words.add(word.lower())
    return frozenset(words)


def load_lexicons(hate_dir: str | Path, profane_path: str | Path) -> Lexicons:
    """Load `<category>.txt` files (one word per line) plus the profane list."""
    hate_dir = Path(hate_dir)
    hate = {}
    for cat in HATE_CATEGORIES:
        path = hate_dir / f"{cat}.txt"
        if not path.exists():
            raise FileNotFoundError(f"missing hate lexicon file: {path}")
        hate[cat] = _read_wordlist(path)
    return Lexicons(hate=hate, profane=_read_wordlist(Path(profane_path)))


def default_lexicons() -> Lexicons:
    """Small test lexicon bundled with the package.

    Real deployments supply their own word lists; the bundled one exists so
    the pipeline and tests run out of the box.
    """
    root = Path(__file__).parent / "data" / "lexicons"
    return load_lexicons(root / "hate", root / "profane.txt")


def lexicon_features(tokens: Sequence[str], lexicons: Lexicons) -> np.ndarray:
    """Nine values: six per-category binaries, total hate count, profane
    binary, profane count.  Occurrences count once per category membership."""
    out = np.zeros(len(LEX_FEATURE_NAMES))
    total = 0
    for i, cat in enumerate(HATE_CATEGORIES):
        words = lexicons.hate[cat]
        hits = sum(1 for t in tokens if t in words)
        if hits:
            out[i] = 1.0
            total += hits
    out[6] = float(total)
    profane_hits = sum(1 for t in tokens if t in lexicons.profane)
    out[7] = 1.0 if profane_hits else 0.0
    out[8] = float(profane_hits)
    return out


# ---------------------------------------------------------------------------
# Embedding aggregation
# ---------------------------------------------------------------------------


def embed_parts(tokens: Sequence[str], table) -> tuple[np.ndarray, np.ndarray, int]:
    """(sum, max, count) over the token vectors found in the table.

    Parts combine exactly across concatenation: sums add, maxes take the
    elementwise max, counts add.
    """
    vec_sum = np.zeros(table.dim)
    vec_max = np.zeros(table.dim)
    n = 0
    for tok in tokens:
        v = table.vector(tok)
        if v is None:
            continue
        if n == 0:
            vec_max = v.astype(float).copy()
        else:
            np.maximum(vec_max, v, out=vec_max)
        vec_sum += v
        n += 1
    return vec_sum, vec_max, n


def aggregate_from_parts(parts: tuple[np.ndarray, np.ndarray, int]) -> np.ndarray:
    vec_sum, vec_max, n = parts
    if n == 0:
        return np.zeros(2 * len(vec_sum))
    return np.concatenate([vec_max, vec_sum / n])


def embed_aggregate(tokens: Sequence[str], table) -> np.ndarray:
    """Per-dimension max concatenated with per-dimension mean (2*dim values);
    tokens absent from the table are skipped, and an all-absent input yields
    zeros."""
    return aggregate_from_parts(embed_parts(tokens, table))


def combine_embed_parts(parts_list):
    """Exact combination of per-piece (sum, max, count) parts."""
    dim = len(parts_list[0][0]) if parts_list else 0
    vec_sum = np.zeros(dim)
    vec_max = np.zeros(dim)
    n = 0
    for s, m, c in parts_list:
        if c == 0:
            continue
        if n == 0:
            vec_max = m.copy()
        else:
            np.maximum(vec_max, m, out=vec_max)
        vec_sum = vec_sum + s
        n += c
    return vec_sum, vec_max, n


# ---------------------------------------------------------------------------
# Layout and vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureVector:
    """Sparse vector plus the index range claimed by each feature group."""

    indices: np.ndarray
    values: np.ndarray
    groups: Mapping[str, tuple[int, int]]
    dim: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True)
class FeatureLayout:
    """Deterministic index layout for a (vocabulary, group set) pair."""

    groups: tuple[str, ...]
    names: tuple[str, ...]
    offsets: Mapping[str, int]
    sizes: Mapping[str, int]
    standardize: np.ndarray
    fingerprint: str

    @property
    def dim(self) -> int:
        return len(self.names)

    def group_range(self, group: str) -> tuple[int, int]:
        start = self.offsets[group]
        return start, start + self.sizes[group]


def _sub_block_names(prefix: str, vocab: Vocabulary, embed_dim: int):
    """U + n-w2v + lex sub-layout reused by final-com / prev-com / prev-post."""
    names = [f"{prefix}:U:{tok}" for tok in vocab.tokens()]
    std = [False] * vocab.size
    names += [f"{prefix}:n-w2v:max{i:03d}" for i in range(embed_dim)]
    names += [f"{prefix}:n-w2v:avg{i:03d}" for i in range(embed_dim)]
    std += [True] * (2 * embed_dim)
    names += [f"{prefix}:lex:{n}" for n in LEX_FEATURE_NAMES]
    std += list(_LEX_STANDARDIZE)
    return names, std


def make_layout(
    groups: Iterable[str], vocab: Vocabulary, embed_dim: int = 100
) -> FeatureLayout:
    requested = set(groups)
    unknown = requested - set(GROUP_ORDER)
    if unknown:
        raise ValueError(f"unknown feature group(s): {sorted(unknown)}")
    ordered = tuple(g for g in GROUP_ORDER if g in requested)

    names: list[str] = []
    std: list[bool] = []
    offsets: dict[str, int] = {}
    sizes: dict[str, int] = {}
    for g in ordered:
        offsets[g] = len(names)
        if g == "U":
            names += [f"U:{tok}" for tok in vocab.tokens()]
            std += [False] * vocab.size
        elif g == "lex":
            names += [f"lex:{n}" for n in LEX_FEATURE_NAMES]
            std += list(_LEX_STANDARDIZE)
        elif g in ("w2v", "n-w2v"):
            names += [f"{g}:max{i:03d}" for i in range(embed_dim)]
            names += [f"{g}:avg{i:03d}" for i in range(embed_dim)]
            std += [True] * (2 * embed_dim)
        elif g in ("final-com", "prev-com", "prev-post"):
            sub, sub_std = _sub_block_names(g, vocab, embed_dim)
            names += sub
            std += sub_std
            if g != "final-com":
                names.append(f"{g}:missing_history")
                std.append(False)
        elif g == "trend":
            names += [f"trend:{n}" for n in TREND_FEATURE_NAMES]
            std += [True] * 4
        elif g == "user":
            names += [f"user:{n}" for n in USER_FEATURE_NAMES]
            std += [True] * 2
        sizes[g] = len(names) - offsets[g]

    digest = hashlib.sha256("\x00".join(names).encode("utf-8")).hexdigest()[:16]
    return FeatureLayout(
        groups=ordered,
        names=tuple(names),
        offsets=offsets,
        sizes=sizes,
        standardize=np.asarray(std, dtype=bool),
        fingerprint=digest,
    )


# ---------------------------------------------------------------------------
# Block builders
# ---------------------------------------------------------------------------


def unigram_counts(tokens: Sequence[str]) -> Counter:
    return Counter(tokens)


def _counts_to_sparse(counts: Mapping[str, int], vocab: Vocabulary):
    pairs = sorted(
        (vocab[tok], float(c)) for tok, c in counts.items() if tok in vocab
    )
    if not pairs:
        return np.empty(0, dtype=np.int64), np.empty(0)
    idx, vals = zip(*pairs)
    return np.asarray(idx, dtype=np.int64), np.asarray(vals)


def bow(tokens: Sequence[str], vocab: Vocabulary) -> FeatureVector:
    """Unigram counts over the vocabulary; out-of-vocabulary tokens ignored."""
    idx, vals = _counts_to_sparse(unigram_counts(tokens), vocab)
    return FeatureVector(
        indices=idx,
        values=vals,
        groups={"U": (0, vocab.size)},
        dim=vocab.size,
    )


@dataclass
class FeatureResources:
    """Shared inputs for feature assembly.

    `posteriors` maps post id to the per-comment hostility posteriors used by
    the trend group; only the first k_observed entries are consumed.
    """

    vocab: Vocabulary
    lexicons: Lexicons
    word_table: object | None = None
    subword_table: object | None = None
    corpus: Corpus | None = None
    posteriors: Mapping[str, Sequence[float]] | None = None
    trend_threshold: float = 0.3
    _tokens: dict = field(default_factory=dict, repr=False)

    def tokens_of(self, post: Post, comment_idx: int) -> list[str]:
        key = (post.id, comment_idx)
        cached = self._tokens.get(key)
        if cached is None:
            cached = tokenize(post.comments[comment_idx].text)
            self._tokens[key] = cached
        return cached


def observed_tokens(post: Post, k_observed: int, res: FeatureResources) -> list[str]:
    toks: list[str] = []
    for i in range(k_observed):
        toks.extend(res.tokens_of(post, i))
    return toks


def _require(cond: bool, what: str):
    if not cond:
        raise ValueError(what)


def prev_comment_source_tokens(
    post: Post, k_observed: int, res: FeatureResources
) -> tuple[list[str], bool]:
    """Concatenated latest outside comments of the observed commenters.

    Returns (tokens, missing) where missing is True when no observed
    commenter has any qualifying history.  The cutoff is the absolute time of
    the k-th observed comment; comments on the target post never qualify.
    """
    _require(res.corpus is not None, "prev-com features require a corpus")
    cutoff = post.created_at + post.comments[k_observed - 1].t
    seen: set[str] = set()
    toks: list[str] = []
    found = False
    for i in range(k_observed):
        author = post.comments[i].author
        if author in seen:
            continue
        seen.add(author)
        prior = res.corpus.latest_comment_before(author, cutoff, post.id)
        if prior is not None:
            toks.extend(tokenize(prior.text))
            found = True
    return toks, not found


def prev_post_source_tokens(
    post: Post, res: FeatureResources
) -> tuple[list[str], bool]:
    """Concatenated comments of the author's most recent earlier post."""
    _require(res.corpus is not None, "prev-post features require a corpus")
    prev = res.corpus.latest_post_before(post.author, post.created_at, post.id)
    if prev is None:
        return [], True
    toks: list[str] = []
    for c in prev.comments:
        toks.extend(tokenize(c.text))
    return toks, False


def user_activity_features(post: Post, k_observed: int) -> np.ndarray:
    """(unique commenters / k, fraction of observed comments with a mention)."""
    _require(k_observed >= 1, "k_observed must be >= 1")
    _require(k_observed <= len(post.comments), "k_observed exceeds comment count")
    authors = {post.comments[i].author for i in range(k_observed)}
    mentions = sum(
        1 for i in range(k_observed) if MENTION in tokenize(post.comments[i].text)
    )
    return np.array([len(authors) / k_observed, mentions / k_observed])


def _sub_block_values(tokens, vocab, lexicons, table, missing: bool | None):
    """Dense values of a U + n-w2v + lex sub-block (+ optional indicator)."""
    out = np.zeros(vocab.size + 2 * table.dim + len(LEX_FEATURE_NAMES) + (0 if missing is None else 1))
    idx, vals = _counts_to_sparse(unigram_counts(tokens), vocab)
    out[idx] = vals
    out[vocab.size : vocab.size + 2 * table.dim] = embed_aggregate(tokens, table)
    off = vocab.size + 2 * table.dim
    out[off : off + len(LEX_FEATURE_NAMES)] = lexicon_features(tokens, lexicons)
    if missing is not None:
        out[-1] = 1.0 if missing else 0.0
    return out


def final_comment_features(
    post: Post, k_observed: int, res: FeatureResources
) -> np.ndarray:
    _require(k_observed >= 1, "k_observed must be >= 1")
    _require(k_observed <= len(post.comments), "k_observed exceeds comment count")
    _require(res.subword_table is not None, "final-com requires the subword table")
    toks = res.tokens_of(post, k_observed - 1)
    return _sub_block_values(toks, res.vocab, res.lexicons, res.subword_table, None)


def prev_comment_features(
    post: Post, k_observed: int, res: FeatureResources
) -> np.ndarray:
    _require(res.subword_table is not None, "prev-com requires the subword table")
    toks, missing = prev_comment_source_tokens(post, k_observed, res)
    return _sub_block_values(toks, res.vocab, res.lexicons, res.subword_table, missing)


def prev_post_features(post: Post, res: FeatureResources) -> np.ndarray:
    _require(res.subword_table is not None, "prev-post requires the subword table")
    toks, missing = prev_post_source_tokens(post, res)
    return _sub_block_values(toks, res.vocab, res.lexicons, res.subword_table, missing)


def assemble(
    post: Post,
    k_observed: int,
    groups: Iterable[str],
    res: FeatureResources,
    layout: FeatureLayout | None = None,
) -> FeatureVector:
    """Concatenated namespaced vector over exactly the requested groups."""
    _require(k_observed >= 1, "k_observed must be >= 1")
    _require(k_observed <= len(post.comments), "k_observed exceeds comment count")
    embed_dim = None
    for table in (res.subword_table, res.word_table):
        if table is not None:
            embed_dim = table.dim
            break
    if layout is None:
        layout = make_layout(groups, res.vocab, embed_dim=embed_dim or 100)
    else:
        if tuple(g for g in GROUP_ORDER if g in set(groups)) != layout.groups:
            raise ValueError("layout does not match the requested groups")

    obs = observed_tokens(post, k_observed, res)
    indices: list[np.ndarray] = []
    values: list[np.ndarray] = []
    group_ranges: dict[str, tuple[int, int]] = {}

    def emit_dense(group: str, dense: np.ndarray):
        start, end = layout.group_range(group)
        assert end - start == len(dense)
        nz = np.nonzero(dense)[0]
        indices.append(nz + start)
        values.append(dense[nz])

    for g in layout.groups:
        group_ranges[g] = layout.group_range(g)
        if g == "U":
            idx, vals = _counts_to_sparse(unigram_counts(obs), res.vocab)
            indices.append(idx + layout.offsets[g])
            values.append(vals)
        elif g == "lex":
            emit_dense(g, lexicon_features(obs, res.lexicons))
        elif g == "w2v":
            _require(res.word_table is not None, "w2v requires the word table")
            emit_dense(g, embed_aggregate(obs, res.word_table))
        elif g == "n-w2v":
            _require(res.subword_table is not None, "n-w2v requires the subword table")
            emit_dense(g, embed_aggregate(obs, res.subword_table))
        elif g == "final-com":
            emit_dense(g, final_comment_features(post, k_observed, res))
        elif g == "prev-com":
            emit_dense(g, prev_comment_features(post, k_observed, res))
        elif g == "prev-post":
            emit_dense(g, prev_post_features(post, res))
        elif g == "trend":
            _require(res.posteriors is not None, "trend requires posterior series")
            series = res.posteriors.get(post.id)
            _require(series is not None, f"no posterior series for post {post.id!r}")
            _require(
                len(series) >= k_observed,
                f"posterior series for post {post.id!r} shorter than k_observed",
            )
            from .trend import trend_features

            emit_dense(
                g, trend_features(list(series)[:k_observed], res.trend_threshold)
            )
        elif g == "user":
            emit_dense(g, user_activity_features(post, k_observed))

    all_idx = np.concatenate(indices) if indices else np.empty(0, dtype=np.int64)
    all_vals = np.concatenate(values) if values else np.empty(0)
    return FeatureVector(
        indices=all_idx.astype(np.int64),
        values=all_vals,
        groups=group_ranges,
        dim=layout.dim,
    )


def dump_feature_vector(
    fv: FeatureVector, layout: FeatureLayout, path: str | Path
) -> None:
    """Debug CSV: group,index,name,value for every nonzero entry."""
    ranges = sorted(
        ((start, end, g) for g, (start, end) in fv.groups.items())
    )

    def group_of(i: int) -> str:
        for start, end, g in ranges:
            if start <= i < end:
                return g
        return "?"

    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("group,index,name,value\n")
        for i, v in zip(fv.indices, fv.values):
            fh.write(f"{group_of(int(i))},{int(i)},{layout.names[int(i)]},{v!r}\n")
