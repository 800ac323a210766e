"""Thread corpus: data model, JSONL persistence, synthesis, summary stats.

A corpus is a set of posts; each post carries a time-ordered sequence of
comments with binary hostility labels.  Comment timestamps are seconds
relative to the creation of their post, and every post carries an absolute
creation time so that cross-post user histories can be ordered globally.
"""

from __future__ import annotations

import json
import logging
import math
from bisect import bisect_left
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)

HOURS = 3600.0
DAYS = 86400.0


class CorpusFormatError(ValueError):
    """A corpus file or record violates the JSONL schema."""


@dataclass(frozen=True)
class Comment:
    """One comment: unique id within its post, author, text, relative time, label."""

    id: str
    author: str
    text: str
    t: float
    hostile: bool


@dataclass(frozen=True)
class Post:
    """A post and its comments, ordered by (t, id)."""

    id: str
    author: str
    created_at: float
    comments: tuple[Comment, ...]

    @property
    def hostile(self) -> bool:
        return any(c.hostile for c in self.comments)

    def hostile_count(self) -> int:
        return sum(1 for c in self.comments if c.hostile)

    def first_hostile_index(self) -> int | None:
        for i, c in enumerate(self.comments):
            if c.hostile:
                return i
        return None

    def first_hostile_t(self) -> float | None:
        i = self.first_hostile_index()
        return None if i is None else self.comments[i].t


def _sorted_comments(comments: Iterable[Comment]) -> tuple[Comment, ...]:
    return tuple(sorted(comments, key=lambda c: (c.t, c.id)))


class Corpus:
    """Immutable view over posts plus author and commenter indexes.

    Building the corpus validates post/comment invariants: unique post ids,
    unique comment ids within a post, non-negative relative times, and
    comments ordered by (t, id).
    """

    def __init__(self, posts: Sequence[Post]):
        by_id: dict[str, Post] = {}
        for post in posts:
            if post.id in by_id:
                raise CorpusFormatError(f"duplicate post id {post.id!r}")
            seen: set[str] = set()
            prev_key: tuple[float, str] | None = None
            for c in post.comments:
                if c.t < 0:
                    raise CorpusFormatError(
                        f"post {post.id!r}: comment {c.id!r} has negative t"
                    )
                if c.id in seen:
                    raise CorpusFormatError(
                        f"post {post.id!r}: duplicate comment id {c.id!r}"
                    )
                seen.add(c.id)
                key = (c.t, c.id)
                if prev_key is not None and key < prev_key:
                    raise CorpusFormatError(
                        f"post {post.id!r}: comments not ordered by (t, id)"
                    )
                prev_key = key
            by_id[post.id] = post

        self.posts: tuple[Post, ...] = tuple(posts)
        self._by_id = by_id

        posts_by_author: dict[str, list[Post]] = {}
        for post in self.posts:
            posts_by_author.setdefault(post.author, []).append(post)
        for plist in posts_by_author.values():
            plist.sort(key=lambda p: (p.created_at, p.id))
        self._posts_by_author = posts_by_author

        # user -> [(absolute time, post id, comment)], ascending in time
        comments_by_user: dict[str, list[tuple[float, str, Comment]]] = {}
        for post in self.posts:
            for c in post.comments:
                comments_by_user.setdefault(c.author, []).append(
                    (post.created_at + c.t, post.id, c)
                )
        for clist in comments_by_user.values():
            clist.sort(key=lambda rec: (rec[0], rec[1], rec[2].id))
        self._comments_by_user = comments_by_user

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self) -> Iterator[Post]:
        return iter(self.posts)

    def post(self, post_id: str) -> Post:
        return self._by_id[post_id]

    def posts_by(self, author: str) -> list[Post]:
        return list(self._posts_by_author.get(author, []))

    def comments_by(self, user: str) -> list[tuple[float, str, Comment]]:
        return list(self._comments_by_user.get(user, []))

    def hostile_posts(self) -> list[Post]:
        return [p for p in self.posts if p.hostile]

    def nonhostile_posts(self) -> list[Post]:
        return [p for p in self.posts if not p.hostile]

    def n_comments(self) -> int:
        return sum(len(p.comments) for p in self.posts)

    def latest_post_before(
        self, author: str, created_at: float, exclude_post_id: str
    ) -> Post | None:
        """Most recent post by `author` created strictly before `created_at`."""
        best: Post | None = None
        for post in self._posts_by_author.get(author, []):
            if post.id == exclude_post_id or post.created_at >= created_at:
                continue
            if best is None or (post.created_at, post.id) > (best.created_at, best.id):
                best = post
        return best

    def latest_comment_before(
        self, user: str, abs_time: float, exclude_post_id: str
    ) -> Comment | None:
        """Most recent comment by `user` strictly before `abs_time`, off the excluded post."""
        recs = self._comments_by_user.get(user)
        if not recs:
            return None
        idx = bisect_left(recs, abs_time, key=lambda rec: rec[0])
        for j in range(idx - 1, -1, -1):
            if recs[j][1] != exclude_post_id:
                return recs[j][2]
        return None


# ---------------------------------------------------------------------------
# JSONL persistence
#
# One post object per line:
#   {"id","author","created_at","comments":[{"id","author","text","t","hostile"}]}
# ---------------------------------------------------------------------------


def _parse_post(obj: dict, lineno: int) -> Post:
    try:
        pid = obj["id"]
        author = obj["author"]
        created_at = obj["created_at"]
        raw_comments = obj["comments"]
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"line {lineno}: missing field {exc}") from exc
    if not isinstance(pid, str) or not isinstance(author, str):
        raise CorpusFormatError(f"line {lineno}: post id/author must be strings")
    if not isinstance(created_at, (int, float)) or isinstance(created_at, bool):
        raise CorpusFormatError(f"line {lineno}: created_at must be a number")
    if not isinstance(raw_comments, list):
        raise CorpusFormatError(f"line {lineno}: comments must be a list")

    comments = []
    for k, c in enumerate(raw_comments):
        try:
            comment = Comment(
                id=c["id"],
                author=c["author"],
                text=c["text"],
                t=float(c["t"]),
                hostile=bool(c["hostile"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(
                f"line {lineno}: bad comment record #{k}: {exc}"
            ) from exc
        if comment.t < 0:
            raise CorpusFormatError(
                f"line {lineno}: comment {comment.id!r} has negative t"
            )
        comments.append(comment)
    return Post(
        id=pid,
        author=author,
        created_at=float(created_at),
        comments=_sorted_comments(comments),
    )


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a JSONL corpus; comments are re-sorted by (t, id)."""
    path = Path(path)
    posts: list[Post] = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
            post = _parse_post(obj, lineno)
            if post.id in seen:
                raise CorpusFormatError(
                    f"line {lineno}: duplicate post id {post.id!r} "
                    f"(first seen on line {seen[post.id]})"
                )
            seen[post.id] = lineno
            posts.append(post)
    return Corpus(posts)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for post in corpus.posts:
            obj = {
                "id": post.id,
                "author": post.author,
                "created_at": post.created_at,
                "comments": [
                    {
                        "id": c.id,
                        "author": c.author,
                        "text": c.text,
                        "t": c.t,
                        "hostile": c.hostile,
                    }
                    for c in post.comments
                ],
            }
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------------------
# Synthetic corpora
# ---------------------------------------------------------------------------

# Master token pools for the generator.  Config fields select prefix sizes.
_INNOCUOUS_POOL = (
    "love this pic photo so cute omg wow nice amazing beautiful great happy "
    "bday birthday congrats party fun best friend friends lol haha smile "
    "sweet cool awesome perfect goals queen king fam squad crew vibes mood "
    "day night weekend summer beach sun sunset lake trip travel school game "
    "team win song music dance video edit filter caption post follow like "
    "comment share tag story snap dog cat puppy food pizza cake yum good "
    "morning see you later soon today tomorrow yesterday new old little big "
    "pretty style hair outfit shoes dress look looks fire lit clean fresh "
    "real true same mine yours ours his hers they them everyone nobody "
    "always never maybe please thanks thank welcome sorry miss hope wish "
    "think know feel felt made make making went going come coming back home "
    "house room class test grade teacher coach practice tryouts season "
    "playoffs goal score match run walk ride bike car mall movie show "
    "episode book read write drawing art paint sing play played playing won "
    "lost tied crazy wild chill calm soft loud quiet early late first last "
    "next top bottom left right side middle over under again still just "
    "very super really totally honestly literally actually basically kinda "
    "sorta gonna wanna"
).split()

_HOSTILE_OUT_POOL = (
    "luzer sukk sukks stupidd dumbb uglyy grossen cringey ratioed clownish "
    "fraudy fakee posern tryhard wannabe flopped floppin washed mid basicc "
    "sloppyy messyy nastyy rattyy dustyy crustyy musty cappin delulu npc "
    "bozo bozos goofy goober dork dorkus lamer lameo weirdo weirddo creepo "
    "snakey fakies hater haterz salty saltyy pressedy triggeredd yikess "
    "embarassing embarassin shameful shamefull pitiful pitifull worthlesss "
    "talentless braindeadd airheadd boofhead dingus doofus nimrod chump "
    "chumps scrub scrubs peasant peasants pleb plebs simp simps sheep"
).split()

# Words that also appear in the bundled test lexicons, so lexicon features
# fire on a configurable minority of hostile comments.
_HOSTILE_LEX_POOL = (
    "suck sucks stfu loser idiot trash dumb wtf crap moron pathetic freak "
    "femblot dimwit povvo cultling offlander zogling"
).split()

_TENSION_POOL = (
    "drama fight beef heated messy tea shade salty pressed triggered yikes "
    "awkward tense blocked exposed receipts"
).split()

_EMOJI_INNOCUOUS = ("🎂", "❤", "😀", "✨", "🔥", "💯", "🎉", "😂", "🙌", "🌟")
_EMOJI_HOSTILE = ("😡", "💀", "🤬", "👿", "🙄", "🤡", "😤", "🗑", "👎", "😒")

ARCHETYPES = 4


@dataclass(frozen=True)
class SynthConfig:
    """Generator knobs; the corpus is a pure function of this config.

    Hostile posts are drawn from four temporal archetypes: (0) a small burst
    of hostility right after creation, (1) a small burst after a long delay,
    (2) and (3) the same onsets with several times the hostile volume and
    wider bursts.  Counts and rates default to the shape of a mid-sized
    annotated corpus (about 1.1k posts, 31k comments, 13% hostile).
    """

    n_users: int = 900
    n_author_pool: int = 300
    n_posts: int = 1134
    hostile_post_fraction: float = 0.521
    cluster_mix: tuple[float, float, float, float] = (0.30, 0.25, 0.225, 0.225)

    # hostile timing/volume, one entry per archetype
    onset_mean_hours: tuple[float, ...] = (0.7, 19.0, 0.7, 19.0)
    onset_shape: tuple[float, ...] = (1.0, 4.0, 1.0, 4.0)
    onset_cap_hours: tuple[float, ...] = (3.0, 96.0, 3.0, 96.0)
    hostile_extra_lambda: tuple[float, ...] = (2.0, 2.0, 9.0, 11.0)
    hostile_burst_hours: tuple[float, ...] = (1.2, 1.8, 7.0, 10.0)

    # innocuous volume and timing
    innocuous_log_mu_hostile: float = 2.89
    innocuous_log_mu_clean: float = 2.32
    innocuous_log_sigma: float = 1.0
    timescale_log_mu_hours: float = math.log(60.0)
    timescale_log_sigma: float = 0.9

    # vocabulary sizes (prefixes of the module pools)
    n_innocuous_words: int = 160
    n_hostile_out_words: int = 60
    n_hostile_lexicon_words: int = 12
    n_tension_words: int = 16
    n_emoji: int = 10

    # text generation rates
    comment_len_poisson: float = 5.0
    hostile_token_rate: float = 0.55
    hostile_lexicon_rate: float = 0.15
    hostile_second_person_rate: float = 0.5
    tension_max: float = 0.5
    tension_ramp_hours: float = 6.0
    tension_background: float = 0.04
    profane_noise_rate: float = 0.02
    hostile_noise_rate: float = 0.02

    # mention / emoji rates
    innocuous_mention_rate: float = 0.10
    hostile_mention_rate: float = 0.30
    first_hostile_mention_rate: tuple[float, ...] = (0.2, 0.2, 0.8, 0.85)
    first_hostile_profane_rate: tuple[float, ...] = (0.15, 0.15, 0.6, 0.65)
    first_hostile_second_person_rate: tuple[float, ...] = (0.5, 0.5, 0.8, 0.8)
    innocuous_emoji_rate: float = 0.25
    hostile_emoji_rate: float = 0.30

    # user population
    author_vulnerable_fraction: float = 0.30
    vulnerable_hostile_author_rate: float = 0.75
    vulnerable_clean_author_rate: float = 0.15
    commenter_zipf_exponent: float = 0.8
    hostile_user_beta: tuple[float, float] = (0.6, 3.0)

    span_days: float = 240.0
    seed: int = 0

    def __post_init__(self):
        if len(self.cluster_mix) != ARCHETYPES:
            raise ValueError("cluster_mix must have 4 entries")
        if any(p < 0 or p > 1 for p in self.cluster_mix):
            raise ValueError("cluster_mix entries must lie in [0, 1]")
        if abs(sum(self.cluster_mix) - 1.0) > 1e-9:
            raise ValueError("cluster_mix must sum to 1")
        for name in (
            "hostile_post_fraction",
            "hostile_token_rate",
            "hostile_lexicon_rate",
            "hostile_second_person_rate",
            "tension_max",
            "tension_background",
            "profane_noise_rate",
            "hostile_noise_rate",
            "innocuous_mention_rate",
            "hostile_mention_rate",
            "innocuous_emoji_rate",
            "hostile_emoji_rate",
            "author_vulnerable_fraction",
            "vulnerable_hostile_author_rate",
            "vulnerable_clean_author_rate",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in (
            "onset_mean_hours",
            "onset_shape",
            "onset_cap_hours",
            "hostile_extra_lambda",
            "hostile_burst_hours",
            "first_hostile_mention_rate",
            "first_hostile_profane_rate",
            "first_hostile_second_person_rate",
        ):
            if len(getattr(self, name)) != ARCHETYPES:
                raise ValueError(f"{name} must have 4 entries")


def _zipf_weights(n: int, exponent: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1, dtype=float) ** exponent
    return w / w.sum()


class _WordSampler:
    """Cumulative-probability token sampler with a mild frequency skew."""

    def __init__(self, words: Sequence[str], exponent: float = 0.7):
        self.words = np.asarray(words, dtype=object)
        self.cum = np.cumsum(_zipf_weights(len(words), exponent))

    def draw(self, rng: np.random.Generator, size: int) -> list[str]:
        if size <= 0:
            return []
        idx = np.searchsorted(self.cum, rng.random(size), side="right")
        return list(self.words[idx])


def generate_synthetic(cfg: SynthConfig) -> Corpus:
    """Generate a corpus from the config; deterministic given cfg.seed."""
    if cfg.n_users <= 0 or cfg.n_posts <= 0:
        raise ValueError("degenerate config: n_users and n_posts must be positive")
    if cfg.n_author_pool <= 0 or cfg.n_author_pool > cfg.n_users:
        raise ValueError("n_author_pool must lie in [1, n_users]")
    for name, pool in (
        ("n_innocuous_words", _INNOCUOUS_POOL),
        ("n_hostile_out_words", _HOSTILE_OUT_POOL),
        ("n_hostile_lexicon_words", _HOSTILE_LEX_POOL),
        ("n_tension_words", _TENSION_POOL),
        ("n_emoji", _EMOJI_INNOCUOUS),
    ):
        if getattr(cfg, name) < 1 or getattr(cfg, name) > len(pool):
            raise ValueError(f"{name} must lie in [1, {len(pool)}]")

    rng = np.random.default_rng(cfg.seed)

    users = [f"u{i:04d}" for i in range(cfg.n_users)]
    vulnerable = rng.random(cfg.n_users) < cfg.author_vulnerable_fraction
    hostility_prop = rng.beta(*cfg.hostile_user_beta, size=cfg.n_users)

    pool_idx = np.arange(cfg.n_author_pool)
    pool_weights = _zipf_weights(cfg.n_author_pool, cfg.commenter_zipf_exponent)
    vuln_pool = pool_idx[vulnerable[:cfg.n_author_pool]]
    nonvuln_pool = pool_idx[~vulnerable[:cfg.n_author_pool]]
    if len(vuln_pool) == 0:
        vuln_pool = pool_idx
    if len(nonvuln_pool) == 0:
        nonvuln_pool = pool_idx

    commenter_weights = _zipf_weights(cfg.n_users, cfg.commenter_zipf_exponent)
    commenter_cum = np.cumsum(commenter_weights)
    hostile_weights = hostility_prop / hostility_prop.sum()
    hostile_cum = np.cumsum(hostile_weights)

    inn_words = _WordSampler(_INNOCUOUS_POOL[: cfg.n_innocuous_words])
    out_words = _WordSampler(_HOSTILE_OUT_POOL[: cfg.n_hostile_out_words])
    lex_words = _WordSampler(_HOSTILE_LEX_POOL[: cfg.n_hostile_lexicon_words])
    tension_words = _WordSampler(_TENSION_POOL[: cfg.n_tension_words])
    inn_emoji = _EMOJI_INNOCUOUS[: cfg.n_emoji]
    host_emoji = _EMOJI_HOSTILE[: cfg.n_emoji]

    created = np.sort(rng.uniform(0.0, cfg.span_days * DAYS, size=cfg.n_posts))
    n_hostile_posts = int(round(cfg.hostile_post_fraction * cfg.n_posts))
    hostile_flags = np.zeros(cfg.n_posts, dtype=bool)
    hostile_flags[
        rng.choice(cfg.n_posts, size=n_hostile_posts, replace=False)
    ] = True

    def draw_user(cum: np.ndarray) -> int:
        return int(np.searchsorted(cum, rng.random(), side="right"))

    def innocuous_text(p_tension: float) -> str:
        length = 2 + int(rng.poisson(cfg.comment_len_poisson))
        toks = inn_words.draw(rng, length)
        if rng.random() < p_tension:
            toks.extend(tension_words.draw(rng, 1 + int(rng.random() < 0.4)))
        if rng.random() < cfg.profane_noise_rate:
            toks.extend(lex_words.draw(rng, 1))
        if rng.random() < cfg.hostile_noise_rate:
            toks.extend(out_words.draw(rng, 1))
        if rng.random() < cfg.innocuous_mention_rate:
            toks.append("@" + users[draw_user(commenter_cum)])
        if rng.random() < cfg.innocuous_emoji_rate:
            toks.extend(
                inn_emoji[draw_user(commenter_cum) % len(inn_emoji)]
                for _ in range(1 + int(rng.random() < 0.4))
            )
        order = rng.permutation(len(toks))
        return " ".join(toks[i] for i in order)

    def hostile_text(mention_rate: float, profane_rate: float, you_rate: float) -> str:
        length = 2 + int(rng.poisson(cfg.comment_len_poisson))
        toks: list[str] = []
        for _ in range(length):
            if rng.random() < cfg.hostile_token_rate:
                toks.extend(out_words.draw(rng, 1))
            else:
                toks.extend(inn_words.draw(rng, 1))
        if rng.random() < profane_rate:
            toks.extend(lex_words.draw(rng, 1 + int(rng.random() < 0.3)))
        if rng.random() < you_rate:
            toks.append("you")
        if rng.random() < mention_rate:
            toks.append("@" + users[draw_user(commenter_cum)])
        if rng.random() < cfg.hostile_emoji_rate:
            toks.append(host_emoji[draw_user(commenter_cum) % len(host_emoji)])
        order = rng.permutation(len(toks))
        return " ".join(toks[i] for i in order)

    posts: list[Post] = []
    for i in range(cfg.n_posts):
        pid = f"p{i:05d}"
        is_hostile = bool(hostile_flags[i])

        if is_hostile:
            src = vuln_pool if rng.random() < cfg.vulnerable_hostile_author_rate else nonvuln_pool
        else:
            src = vuln_pool if rng.random() < cfg.vulnerable_clean_author_rate else nonvuln_pool
        w = pool_weights[src]
        author_i = int(rng.choice(src, p=w / w.sum()))
        author = users[author_i]

        mu = cfg.innocuous_log_mu_hostile if is_hostile else cfg.innocuous_log_mu_clean
        n_inn = 1 + int(math.floor(rng.lognormal(mu, cfg.innocuous_log_sigma)))
        timescale_h = rng.lognormal(cfg.timescale_log_mu_hours, cfg.timescale_log_sigma)
        inn_times = rng.exponential(timescale_h, size=n_inn) * HOURS

        events: list[tuple[float, bool, bool]] = [(t, False, False) for t in inn_times]

        onset_s = None
        arch = None
        if is_hostile:
            arch = int(rng.choice(ARCHETYPES, p=np.asarray(cfg.cluster_mix)))
            shape = cfg.onset_shape[arch]
            onset_h = min(
                rng.gamma(shape, cfg.onset_mean_hours[arch] / shape),
                cfg.onset_cap_hours[arch],
            )
            onset_s = onset_h * HOURS
            m = 1 + int(rng.poisson(cfg.hostile_extra_lambda[arch]))
            events.append((onset_s, True, True))
            for _ in range(m - 1):
                dt = rng.exponential(cfg.hostile_burst_hours[arch]) * HOURS
                events.append((onset_s + dt, True, False))

        events.sort(key=lambda e: e[0])

        comments: list[Comment] = []
        for j, (t, hostile, is_first_hostile) in enumerate(events):
            if hostile:
                commenter = users[draw_user(hostile_cum)]
                if is_first_hostile:
                    text = hostile_text(
                        cfg.first_hostile_mention_rate[arch],
                        cfg.first_hostile_profane_rate[arch],
                        cfg.first_hostile_second_person_rate[arch],
                    )
                else:
                    text = hostile_text(
                        cfg.hostile_mention_rate,
                        cfg.hostile_lexicon_rate,
                        cfg.hostile_second_person_rate,
                    )
            else:
                commenter = users[draw_user(commenter_cum)]
                if is_hostile and onset_s is not None:
                    gap_h = max(0.0, (onset_s - t) / HOURS)
                    p_tension = cfg.tension_background + (
                        cfg.tension_max - cfg.tension_background
                    ) * math.exp(-gap_h / cfg.tension_ramp_hours)
                else:
                    p_tension = cfg.tension_background
                text = innocuous_text(p_tension)
            comments.append(
                Comment(
                    id=f"c{j:04d}",
                    author=commenter,
                    text=text,
                    t=float(t),
                    hostile=hostile,
                )
            )

        posts.append(
            Post(
                id=pid,
                author=author,
                created_at=float(created[i]),
                comments=_sorted_comments(comments),
            )
        )

    return Corpus(posts)


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

STAT_NAMES = (
    "comments_per_post",
    "hostile_comments_per_post",
    "duration_days",
    "first_hostile_hours",
    "unique_users_per_post",
)


@dataclass
class StatsReport:
    """Aggregate counts plus rank-sorted (descending) per-post series.

    `hostile_comments_per_post` and `first_hostile_hours` are computed over
    hostile posts only; the other three series cover every post.  Durations
    are reported in days and hostility onsets in hours.
    """

    n_posts: int
    n_hostile_posts: int
    n_comments: int
    n_hostile_comments: int
    comments_on_hostile_posts: int
    series: dict[str, np.ndarray] = field(default_factory=dict)

    def table_rows(self) -> list[tuple[str, int, int, int]]:
        clean_posts = self.n_posts - self.n_hostile_posts
        clean_comments = self.n_comments - self.comments_on_hostile_posts
        return [
            (
                "hostile_posts",
                self.n_hostile_posts,
                self.comments_on_hostile_posts,
                self.n_hostile_comments,
            ),
            ("non_hostile_posts", clean_posts, clean_comments, 0),
            ("total", self.n_posts, self.n_comments, self.n_hostile_comments),
        ]

    def write(self, outdir: str | Path) -> list[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        table = outdir / "summary_table.csv"
        with table.open("w", encoding="utf-8") as fh:
            fh.write("rows,posts,comments,hostile_comments\n")
            for row in self.table_rows():
                fh.write(",".join(str(v) for v in row) + "\n")
        written.append(table)
        for name in STAT_NAMES:
            path = outdir / f"{name}.csv"
            with path.open("w", encoding="utf-8") as fh:
                fh.write("rank,value\n")
                for rank, value in enumerate(self.series[name], start=1):
                    fh.write(f"{rank},{value!r}\n")
            written.append(path)
        return written


def corpus_stats(corpus: Corpus) -> StatsReport:
    """Summary counts and rank-sorted series for a non-empty corpus."""
    if len(corpus) == 0:
        raise ValueError("corpus_stats requires a non-empty corpus")

    comments_per_post = []
    unique_users = []
    durations = []
    hostile_counts = []
    first_hostile = []
    n_hostile_comments = 0
    comments_on_hostile = 0
    n_hostile_posts = 0

    for post in corpus.posts:
        n = len(post.comments)
        comments_per_post.append(float(n))
        unique_users.append(float(len({c.author for c in post.comments})))
        durations.append((post.comments[-1].t if n else 0.0) / DAYS)
        if post.hostile:
            n_hostile_posts += 1
            comments_on_hostile += n
            h = post.hostile_count()
            n_hostile_comments += h
            hostile_counts.append(float(h))
            first_hostile.append(post.first_hostile_t() / HOURS)

    def ranked(values: list[float]) -> np.ndarray:
        return np.sort(np.asarray(values, dtype=float))[::-1]

    return StatsReport(
        n_posts=len(corpus),
        n_hostile_posts=n_hostile_posts,
        n_comments=corpus.n_comments(),
        n_hostile_comments=n_hostile_comments,
        comments_on_hostile_posts=comments_on_hostile,
        series={
            "comments_per_post": ranked(comments_per_post),
            "hostile_comments_per_post": ranked(hostile_counts),
            "duration_days": ranked(durations),
            "first_hostile_hours": ranked(first_hostile),
            "unique_users_per_post": ranked(unique_users),
        },
    )
