"""Recursive LDA topic-count refinement seeded by a truncated HDP."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
