"""Instruction-tuning dataset construction and completion parsing.

Prompts have four parts in fixed order: scenario description, instruction,
text input, response. One record is emitted per (sample, annotation) pair,
so every annotator's label becomes its own prompt/completion example. The
export is a JSONL file suitable for external LLM fine-tuning; completions
coming back from such a model are parsed with :func:`parse_response`.

Template files use bracketed section headers::

    [scenario]
    ...
    [instruction]
    ...
    [input]
    ... {text} ...
    [response]
    ... {label} ...

Section order is enforced at load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import AnnotatedSample, Annotation, Corpus, LabelSchema
from .errors import TemplateError, UnknownAnnotator, Unparseable

SECTION_ORDER = ("scenario", "instruction", "input", "response")
TRAILING_PUNCT = ".,;:!?\"'"


@dataclass(frozen=True)
class PromptTemplate:
    scenario: str
    instruction: str
    input_slot: str
    response_slot: str

    def __post_init__(self):
        for name, text in (("scenario", self.scenario), ("instruction", self.instruction)):
            if "{text}" in text or "{label}" in text:
                raise TemplateError(f"{name} section must not contain placeholders")
        if self.input_slot.count("{text}") != 1:
            raise TemplateError("input section needs exactly one {text} placeholder")
        if self.response_slot.count("{label}") != 1:
            raise TemplateError("response section needs exactly one {label} placeholder")

    def render_prompt(self, text: str) -> str:
        # single-pass substitution: braces inside the sample text stay verbatim
        return "\n\n".join(
            [self.scenario, self.instruction, self.input_slot.replace("{text}", text, 1)]
        )

    def render_completion(self, label_name: str) -> str:
        return self.response_slot.replace("{label}", label_name, 1)


@dataclass(frozen=True)
class InstructionRecord:
    prompt: str
    completion: str
    sample_id: str
    annotator_id: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "prompt": self.prompt,
                "completion": self.completion,
                "sample_id": self.sample_id,
                "annotator_id": self.annotator_id,
            },
            ensure_ascii=False,
        )


def load_template(path) -> PromptTemplate:
    """Parse a bracket-sectioned template file, enforcing section order."""
    sections: dict[str, list[str]] = {}
    current = None
    order_seen = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped.startswith("[") and stripped.endswith("]"):
                current = stripped[1:-1]
                if current not in SECTION_ORDER:
                    raise TemplateError(f"unknown section {current!r} in {path}")
                if current in sections:
                    raise TemplateError(f"duplicate section {current!r} in {path}")
                sections[current] = []
                order_seen.append(current)
                continue
            if current is None:
                if stripped:
                    raise TemplateError(f"text before first section in {path}")
                continue
            sections[current].append(line.rstrip("\n"))
    if tuple(order_seen) != SECTION_ORDER:
        raise TemplateError(
            f"sections must be {list(SECTION_ORDER)} in order, got {order_seen} in {path}"
        )
    parts = {name: "\n".join(lines).strip() for name, lines in sections.items()}
    return PromptTemplate(parts["scenario"], parts["instruction"], parts["input"], parts["response"])


def build_record(
    sample: AnnotatedSample, annotation: Annotation, template: PromptTemplate, schema: LabelSchema
) -> InstructionRecord:
    if annotation not in sample.annotations:
        raise ValueError(f"annotation does not belong to sample {sample.sample_id}")
    return InstructionRecord(
        template.render_prompt(sample.text),
        template.render_completion(schema.labels[annotation.label]),
        sample.sample_id,
        annotation.annotator_id,
    )


def export_dataset(
    corpus: Corpus, template: PromptTemplate, path, annotator_filter: str | None = None
) -> int:
    """Write one JSONL line per (sample, annotation) pair in deterministic
    (sample_id, annotator_id) order. Returns the number of lines written."""
    if annotator_filter is not None and annotator_filter not in corpus.annotators:
        raise UnknownAnnotator(annotator_filter)
    records = []
    for sample in corpus.samples:
        for annotation in sample.annotations:
            if annotator_filter is not None and annotation.annotator_id != annotator_filter:
                continue
            records.append(build_record(sample, annotation, template, corpus.schema))
    records.sort(key=lambda r: (r.sample_id, r.annotator_id))
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(record.to_json() + "\n")
    except OSError as exc:
        raise OSError(f"failed writing instruction dataset to {path}: {exc}") from exc
    return len(records)


def parse_response(completion: str, schema: LabelSchema) -> int:
    """Map a model completion back to a label index.

    Whitespace and trailing punctuation are stripped and matching is
    case-insensitive, but otherwise the completion must equal exactly one
    schema label name.
    """
    text = completion.strip().rstrip(TRAILING_PUNCT).strip()
    matches = [i for i, name in enumerate(schema.labels) if name.casefold() == text.casefold()]
    if len(matches) != 1:
        raise Unparseable(f"completion {completion!r} does not name a unique label")
    return matches[0]
