"""The full task registry: four categories, 41 task types.

Option-count policy: yes/no and polarity judgments get exactly two options;
selection tasks get four; the hard business-district retrieval task gets ten;
the daypart task lists all five dayparts.  Nothing may exceed twenty options.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DataError

CATEGORIES = (
    "service_fundamentals",
    "service_with_context",
    "user_service_interaction",
    "composite",
)

CATEGORY_LABELS = {
    "service_fundamentals": "Service Fundamentals",
    "service_with_context": "Service with Context",
    "user_service_interaction": "User-Service Interaction",
    "composite": "Composite Tasks",
}

MAX_OPTIONS = 20
MIN_OPTIONS = 2


@dataclass(frozen=True)
class TaskType:
    id: str
    name: str
    category: str
    option_count: int  # 2 = binary; otherwise 4..20

    @property
    def is_binary(self) -> bool:
        return self.option_count == 2


_SF = "service_fundamentals"
_SWC = "service_with_context"
_USI = "user_service_interaction"
_COMP = "composite"

TASKS: tuple[TaskType, ...] = (
    # Service Fundamentals (18)
    TaskType("category_prediction", "Category Prediction", _SF, 4),
    TaskType("attribute_mining", "Attribute Mining", _SF, 4),
    TaskType("attribute_value_extraction", "Attribute Value Extraction", _SF, 4),
    TaskType("multilevel_category_prediction", "Multi-level Category Prediction", _SF, 4),
    TaskType("category_merchant_selection", "Category-based Merchant Selection", _SF, 4),
    TaskType("attribute_category_selection", "Attribute-based Category Selection", _SF, 4),
    TaskType("same_category_judgment", "Same-category Judgment", _SF, 2),
    TaskType("same_category_selection", "Same-category Selection", _SF, 4),
    TaskType("attribute_value_reasonableness", "Attribute Value Reasonableness", _SF, 2),
    TaskType("attribute_value_identification", "Attribute Value Identification", _SF, 4),
    TaskType("attribute_value_synonym", "Attribute Value Synonym Detection", _SF, 2),
    TaskType("attribute_value_containment", "Attribute Value Containment", _SF, 2),
    TaskType("attribute_compatibility", "Attribute Compatibility", _SF, 2),
    TaskType("mathematical_operations", "Mathematical Operations", _SF, 4),
    TaskType("function_tag_prediction", "Function Tag Prediction", _SF, 4),
    TaskType("brand_positioning", "Brand Positioning", _SF, 2),
    TaskType("brand_similarity", "Brand Similarity", _SF, 4),
    TaskType("category_complementarity", "Category Complementarity", _SF, 4),
    # Service with Context (10)
    TaskType("weather_impact_qualitative", "Weather Impact (Qualitative)", _SWC, 2),
    TaskType("weather_impact_quantitative", "Weather Impact (Quantitative)", _SWC, 4),
    TaskType("seasonal_impact_qualitative", "Seasonal Impact (Qualitative)", _SWC, 2),
    TaskType("seasonal_impact_quantitative", "Seasonal Impact (Quantitative)", _SWC, 4),
    TaskType("nearest_merchant_selection", "Nearest Merchant Selection", _SWC, 4),
    TaskType("distance_estimation", "Distance Estimation", _SWC, 4),
    TaskType("administrative_division", "Administrative Division", _SWC, 4),
    TaskType("business_district_identification", "Business District Identification", _SWC, 10),
    TaskType("operating_hours_prediction", "Operating Hours Prediction", _SWC, 4),
    TaskType("peak_hours_prediction", "Peak Hours Prediction", _SWC, 5),
    # User-Service Interaction (10)
    TaskType("target_group_identification", "Target Group Identification", _USI, 4),
    TaskType("user_preference_prediction", "User Preference Prediction", _USI, 4),
    TaskType("review_information_points", "Review Information Points", _USI, 4),
    TaskType("review_guidance_value", "Review Guidance Value", _USI, 2),
    TaskType("review_colloquialism", "Review Colloquialism", _USI, 2),
    TaskType("review_real_examples", "Review Real Examples", _USI, 2),
    TaskType("review_language_appeal", "Review Language Appeal", _USI, 2),
    TaskType("non_marketing_content", "Non-marketing Content", _USI, 2),
    TaskType("human_written_content", "Human-written Content", _USI, 2),
    TaskType("overall_review_usefulness", "Overall Review Usefulness", _USI, 2),
    # Composite (3)
    TaskType("recommendation", "Recommendation", _COMP, 4),
    TaskType("search", "Search", _COMP, 4),
    TaskType("content_marketing", "Content Marketing", _COMP, 4),
)

TASKS_BY_ID = {task.id: task for task in TASKS}

EXPECTED_CATEGORY_SIZES = {
    "service_fundamentals": 18,
    "service_with_context": 10,
    "user_service_interaction": 10,
    "composite": 3,
}


def task(task_id: str) -> TaskType:
    try:
        return TASKS_BY_ID[task_id]
    except KeyError as exc:
        raise DataError(f"unknown task type {task_id!r}") from exc


def tasks_in_category(category: str) -> list[TaskType]:
    return [t for t in TASKS if t.category == category]


def check_registry() -> None:
    """Registry self-check: 18 + 10 + 10 + 3 = 41 uniquely named tasks."""
    if len(TASKS) != 41 or len(TASKS_BY_ID) != 41:
        raise DataError(f"task registry has {len(TASKS)} entries, expected 41")
    for category, expected in EXPECTED_CATEGORY_SIZES.items():
        actual = len(tasks_in_category(category))
        if actual != expected:
            raise DataError(f"category {category} has {actual} tasks, expected {expected}")
    for t in TASKS:
        if not (t.option_count == 2 or MIN_OPTIONS <= t.option_count <= MAX_OPTIONS):
            raise DataError(f"task {t.id} has invalid option count {t.option_count}")
