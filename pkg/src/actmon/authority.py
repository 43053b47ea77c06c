"""The authority: the entity that supplies true labels for warned inputs.

The oracle variant answers instantly from the stream's ground truth; the
interactive variant (see the service module) blocks the session until a
human answers or the timeout expires. A timeout preserves the budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AuthorityQuery:
    query_id: int
    input_index: int  # position in the stream
    pixels: np.ndarray
    width: int
    height: int
    channels: int
    predicted_class: int  # original vocabulary
    predicted_name: str
    confidence: float | None  # distance for the quantitative monitor
    enqueued_at: int  # logical time = inputs seen


@dataclass(frozen=True)
class AuthorityAnswer:
    query_id: int
    true_class: int  # original vocabulary


class Authority:
    """Answers labeling queries; returns None on timeout (budget-preserving skip)."""

    def ask(self, query: AuthorityQuery) -> AuthorityAnswer | None:
        raise NotImplementedError


class OracleAuthority(Authority):
    """Simulated authority backed by the stream's ground-truth labels."""

    def __init__(self, stream):
        self._stream = stream

    def ask(self, query: AuthorityQuery) -> AuthorityAnswer:
        return AuthorityAnswer(query.query_id, self._stream.label_at(query.input_index))
