"""Multiple-choice benchmark construction under quality-control gates."""

from .build import (
    GENERATORS,
    assemble_benchmark,
    build_all_tasks,
    build_task_questions,
    read_benchmark,
    validate_benchmark_body,
    write_benchmark,
)
from .distance import (
    DEFAULT_DISTANCE_EDGES_M,
    DISTANCE_BUCKET_LABELS,
    EARTH_RADIUS_M,
    compute_distance,
    distance_bucket,
)
from .distractors import sample_distractors, shuffle_options
from .oracles import verify_ground_truth
from .qc import (
    AnnotationVerdict,
    DaySample,
    QCConfig,
    QCVerdict,
    TrendVerdict,
    check_stat_sufficiency,
    detect_stable_trend,
    gate_annotations,
)
from .questions import BenchmarkQuestion, GenContext, question_from_dict
from .registry import (
    CATEGORIES,
    CATEGORY_LABELS,
    EXPECTED_CATEGORY_SIZES,
    TASKS,
    TASKS_BY_ID,
    TaskType,
    check_registry,
    task,
    tasks_in_category,
)
from .textconv import normalize_value, parse_address, parse_attributes

__all__ = [
    "CATEGORIES",
    "CATEGORY_LABELS",
    "DEFAULT_DISTANCE_EDGES_M",
    "DISTANCE_BUCKET_LABELS",
    "EARTH_RADIUS_M",
    "EXPECTED_CATEGORY_SIZES",
    "GENERATORS",
    "TASKS",
    "TASKS_BY_ID",
    "AnnotationVerdict",
    "BenchmarkQuestion",
    "DaySample",
    "GenContext",
    "QCConfig",
    "QCVerdict",
    "TaskType",
    "TrendVerdict",
    "assemble_benchmark",
    "build_all_tasks",
    "build_task_questions",
    "check_registry",
    "check_stat_sufficiency",
    "compute_distance",
    "detect_stable_trend",
    "distance_bucket",
    "gate_annotations",
    "normalize_value",
    "parse_address",
    "parse_attributes",
    "question_from_dict",
    "read_benchmark",
    "sample_distractors",
    "shuffle_options",
    "task",
    "tasks_in_category",
    "validate_benchmark_body",
    "verify_ground_truth",
    "write_benchmark",
]
