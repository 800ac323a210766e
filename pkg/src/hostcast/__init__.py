"""hostcast: forecasting the arrival and escalation of hostile comments.

The package models a discussion thread as a post plus a time-ordered
sequence of labeled comments, and provides:

- a corpus data model with JSONL persistence and a calibrated synthetic
  generator (`hostcast.corpus`),
- text feature extraction over observed comment windows (`hostcast.textfeat`),
- skip-gram and character n-gram embedding training (`hostcast.embed`),
- L2-regularized logistic regression (`hostcast.linmodel`),
- comment-level hostility scoring with nested fold isolation and the
  posterior trend summaries built on it (`hostcast.trend`),
- shift/scale-invariant time-series clustering of hourly hostility
  series (`hostcast.ksc`),
- metrics, fold plans and matched negative sampling (`hostcast.evaluation`),
- the cross-validated forecasting experiments (`hostcast.experiment`),
- a reproducible command line front end (`hostcast.cli`).
"""

__version__ = "0.1.0"

from .corpus import Comment, Corpus, CorpusFormatError, Post, SynthConfig

__all__ = [
    "Comment",
    "Corpus",
    "CorpusFormatError",
    "Post",
    "SynthConfig",
    "__version__",
]
