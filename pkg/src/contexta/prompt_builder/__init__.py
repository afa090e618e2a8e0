"""Compiles scenario triggers into structured four-section prompt documents.

Each scenario ships a template with Role / Task / Requirement / Style
Reference sections. Building interpolates trigger metrics into the text and
appends a context block (scenario identity, metrics, recent interaction
history); rendering emits the sections in a fixed order under a
scenario-category preamble, so output is golden-file comparable.
"""

from .builder import (
    InteractionEntry,
    InteractionHistory,
    MissingTemplate,
    PromptBuildError,
    PromptSpec,
    TemplateSet,
    build,
    render,
)

__all__ = [
    "InteractionEntry",
    "InteractionHistory",
    "MissingTemplate",
    "PromptBuildError",
    "PromptSpec",
    "TemplateSet",
    "build",
    "render",
]
