"""Composite-task agent workflows, flywheel conversion, and batch appliers."""

from .appliers import (
    ALL_DIMENSIONS,
    BINARY_DIMENSIONS,
    SCALED_DIMENSIONS,
    ApplierError,
    FunctionTagSet,
    QuerySuggestionSet,
    ReviewScoreCard,
    apply_over_store,
    generate_function_tags,
    generate_query_suggestions,
    score_review_dimensions,
    shortest_unique_prefix,
)
from .runner import (
    WORKFLOW_IDS,
    WORKFLOW_STEPS,
    WorkflowSpec,
    WorkflowTrace,
    run_workflow,
    similar_profile_summary,
    trace_to_instruction,
    workflow_spec,
)

__all__ = [
    "ALL_DIMENSIONS",
    "BINARY_DIMENSIONS",
    "SCALED_DIMENSIONS",
    "WORKFLOW_IDS",
    "WORKFLOW_STEPS",
    "ApplierError",
    "FunctionTagSet",
    "QuerySuggestionSet",
    "ReviewScoreCard",
    "WorkflowSpec",
    "WorkflowTrace",
    "apply_over_store",
    "generate_function_tags",
    "generate_query_suggestions",
    "run_workflow",
    "score_review_dimensions",
    "shortest_unique_prefix",
    "similar_profile_summary",
    "trace_to_instruction",
    "workflow_spec",
]
