"""Evaluation harness: prompting strategies, answer parsing, scoring,
correlation analysis, and the published-table consistency check."""

from .parsing import UNPARSED, parse_answer
from .prompting import (
    ANSWER_MAX_TOKENS,
    COT_MAX_TOKENS,
    LETTERS,
    STRATEGY_KINDS,
    PromptStrategy,
    format_instruction,
    options_block,
    render_prompt,
    select_exemplars,
)
from .published import (
    DEFAULT_TOLERANCE,
    DEFAULT_WEIGHTS,
    load_published_table,
    verify_published_table,
)
from .runner import MOCK_TIMESTAMP, evaluate_model, read_run, write_run
from .scoring import (
    ScoreTable,
    parse_report_csv,
    rank_runs,
    render_report,
    score_run,
    score_table_from_dict,
)
from .stats import correlation_analysis, pearson

__all__ = [
    "ANSWER_MAX_TOKENS",
    "COT_MAX_TOKENS",
    "DEFAULT_TOLERANCE",
    "DEFAULT_WEIGHTS",
    "LETTERS",
    "MOCK_TIMESTAMP",
    "STRATEGY_KINDS",
    "UNPARSED",
    "PromptStrategy",
    "ScoreTable",
    "correlation_analysis",
    "evaluate_model",
    "format_instruction",
    "load_published_table",
    "options_block",
    "parse_answer",
    "parse_report_csv",
    "pearson",
    "rank_runs",
    "read_run",
    "render_prompt",
    "render_report",
    "score_run",
    "score_table_from_dict",
    "select_exemplars",
    "verify_published_table",
    "write_run",
]
