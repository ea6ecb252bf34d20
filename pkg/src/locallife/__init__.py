"""Toolkit for local-life-service LLMs: benchmark construction, instruction
data synthesis, model evaluation, agent workflows, and batch feature
generation."""

__version__ = "0.1.0"
