"""Prompt templates and deterministic message assembly.

The four system prompts ship as UTF-8 fixture files under ``prompts/`` and
are loaded byte-for-byte; rendering never alters the source sentence.
"""

from dataclasses import dataclass
from importlib import resources
from typing import Optional

TEMPLATE_IDS = ("baseline_translate", "rag_translate_a", "rag_translate_b", "refine")

# Templates whose system text instructs a 50-character output cap. The cap is
# enforced by the prompt alone; pipelines only record violations as
# diagnostics, never truncate.
_OUTPUT_CHAR_LIMITS = {"baseline_translate": 50, "refine": 50}

_GLOSSARY_TEMPLATES = ("rag_translate_a", "rag_translate_b")


class PromptRenderError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    system_text: str
    slots: frozenset[str]
    output_char_limit: Optional[int] = None


@dataclass(frozen=True)
class RenderedPrompt:
    system_text: str
    user_text: str


def _load_system_text(template_id: str) -> str:
    path = resources.files("ragmt").joinpath(f"prompts/{template_id}.txt")
    return path.read_bytes().decode("utf-8")


def get_template(template_id: str) -> PromptTemplate:
    """Return the template with its verbatim system text."""
    if template_id not in TEMPLATE_IDS:
        raise ValueError(f"unknown template id: {template_id!r}")
    slots = {"user_text"}
    if template_id in _GLOSSARY_TEMPLATES:
        slots.add("glossary")
    return PromptTemplate(
        id=template_id,
        system_text=_load_system_text(template_id),
        slots=frozenset(slots),
        output_char_limit=_OUTPUT_CHAR_LIMITS.get(template_id),
    )


def render(template: PromptTemplate, user_text: str, glossary: Optional[str] = None) -> RenderedPrompt:
    """Assemble the user message; byte-deterministic, sentence kept verbatim.

    Retrieval templates wrap the sentence with its glossary block::

        Glossary:
        <glossary lines or (none)>

        Sentence:
        <sentence>

    Non-retrieval templates pass the sentence through unchanged.
    """
    wants_glossary = "glossary" in template.slots
    if wants_glossary and glossary is None:
        raise PromptRenderError(f"template {template.id!r} requires a glossary")
    if not wants_glossary and glossary is not None:
        raise PromptRenderError(f"template {template.id!r} does not accept a glossary")
    if wants_glossary:
        body = glossary if glossary else "(none)"
        message = f"Glossary:\n{body}\n\nSentence:\n{user_text}"
    else:
        message = user_text
    return RenderedPrompt(system_text=template.system_text, user_text=message)
