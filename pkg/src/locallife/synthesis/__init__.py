"""Instruction-data synthesis: template, narrative, and question agents plus
the two baseline generation modes."""

from .dataset import (
    DEFAULT_COMBINATIONS,
    MODES,
    REFERENCE_HYPERPARAMETERS,
    SynthesisBudget,
    SynthesisReport,
    export_training_file,
    read_training_file,
    synthesize_dataset,
    validate_pair,
)
from .fields import field_text, hours_text, minute_text, profile_text, timestamp_text
from .narrative import NarrativeText, Rejection, generate_instruction, run_narrative_agent
from .templates import (
    FieldCombination,
    TemplateGenerationResult,
    TemplateSpec,
    generate_templates,
    instantiate_templates,
)

__all__ = [
    "DEFAULT_COMBINATIONS",
    "MODES",
    "REFERENCE_HYPERPARAMETERS",
    "FieldCombination",
    "NarrativeText",
    "Rejection",
    "SynthesisBudget",
    "SynthesisReport",
    "TemplateGenerationResult",
    "TemplateSpec",
    "export_training_file",
    "field_text",
    "generate_instruction",
    "generate_templates",
    "hours_text",
    "instantiate_templates",
    "minute_text",
    "profile_text",
    "read_training_file",
    "synthesize_dataset",
    "timestamp_text",
    "validate_pair",
]
