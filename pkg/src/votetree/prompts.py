"""Prompt construction for the two generation stages.

Stage one turns an instruction into a program-style prompt embedding the
action and object inventories plus in-context example plans; stage two asks
for the pooled unique commands to be reordered into complete plans.  Both
formatters are pure: identical inputs give byte-identical prompt text, and
the text's hash keys replay fixtures and response caches.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .errors import ConfigError, EmptyCommandPoolError
from .plans import Command, UniqueCommandSet

PROG = "prog"
REORDER = "reorder"

# Sampling defaults for the two stages: plan generation runs cool and wide,
# reordering runs warmer with fewer samples.
PROG_TEMPERATURE = 0.1
PROG_NUM_SAMPLES = 30
REORDER_TEMPERATURE = 0.65
REORDER_NUM_SAMPLES = 20


@dataclass(frozen=True)
class SamplingConfig:
    temperature: float = PROG_TEMPERATURE
    num_samples: int = PROG_NUM_SAMPLES
    max_length: int = 80
    seed: int = 0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be positive, got {self.num_samples}")


def default_sampling(stage: str, seed: int = 0) -> SamplingConfig:
    if stage == PROG:
        return SamplingConfig(PROG_TEMPERATURE, PROG_NUM_SAMPLES, seed=seed)
    if stage == REORDER:
        return SamplingConfig(REORDER_TEMPERATURE, REORDER_NUM_SAMPLES, seed=seed)
    raise ConfigError(f"unknown stage {stage!r}")


@dataclass(frozen=True)
class PromptDocument:
    """A fully rendered prompt plus the metadata used to build it."""

    kind: str
    text: str
    instruction: str
    context: dict = field(default_factory=dict)

    @property
    def content_hash(self) -> str:
        """Stable identity for fixtures and caches (kind + text)."""
        digest = hashlib.sha256(f"{self.kind}\n{self.text}".encode("utf-8"))
        return digest.hexdigest()[:16]


def instruction_slug(instruction: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", instruction.strip().lower()).strip("_")
    return slug or "task"


@dataclass(frozen=True)
class ExamplePlan:
    """One in-context demonstration: an instruction and its plan lines."""

    instruction: str
    plan: tuple[str, ...]


@dataclass(frozen=True)
class ReorderExample:
    """A reorder demonstration: scrambled command pool and the solved order."""

    instruction: str
    commands: tuple[str, ...]
    plan: tuple[str, ...]


def format_prog_prompt(
    instruction: str,
    actions: Sequence[str],
    objects: Sequence[str],
    examples: Sequence[ExamplePlan] = (),
) -> PromptDocument:
    """Build the program-style generation prompt.

    The action and object inventories each appear exactly once, sorted; the
    prompt ends with the open ``def`` header for the target instruction so a
    generator completes the body.
    """
    if not actions:
        raise ConfigError("prog prompt needs a non-empty action inventory")
    if not objects:
        raise ConfigError("prog prompt needs a non-empty object inventory")

    action_list = sorted(set(actions))
    object_list = sorted(set(objects))
    lines = [
        "from actions import " + ", ".join(action_list),
        "",
        "objects = [" + ", ".join(f"'{o}'" for o in object_list) + "]",
        "",
    ]
    for ex in examples:
        lines.append(f"def {instruction_slug(ex.instruction)}():")
        for cmd in ex.plan:
            lines.append(f"    {_program_call(cmd)}")
        lines.append("")
    lines.append(f"def {instruction_slug(instruction)}():")
    text = "\n".join(lines) + "\n"
    return PromptDocument(
        kind=PROG,
        text=text,
        instruction=instruction,
        context={
            "actions": action_list,
            "objects": object_list,
            "num_examples": len(examples),
        },
    )


def _program_call(command_text: str) -> str:
    """Render ``action(a, b)`` as ``action('a', 'b')`` for the prompt body."""
    cmd = Command.parse(command_text)
    return f"{cmd.action}(" + ", ".join(f"'{a}'" for a in cmd.args) + ")"


def format_reorder_prompt(
    unique: UniqueCommandSet,
    instruction: str,
    examples: Sequence[ReorderExample] = (),
) -> PromptDocument:
    """Build the reordering prompt over the pooled unique commands.

    Every pool member is listed once in stable sorted order; the prompt asks
    for output as one canonical command per line, which feeds straight back
    into the plan parser.
    """
    if len(unique) == 0:
        raise EmptyCommandPoolError("cannot build a reorder prompt from an empty command pool")

    lines = [
        "# Reorder the given commands into a plan that completes the task.",
        "# Output one command per line, in execution order.",
        "",
    ]
    for ex in examples:
        lines.append(f"Task: {ex.instruction}")
        lines.append("Commands:")
        lines.extend(f"  {c}" for c in ex.commands)
        lines.append("Plan:")
        lines.extend(f"  {c}" for c in ex.plan)
        lines.append("")
    pool = sorted(unique.canonical_forms)
    lines.append(f"Task: {instruction}")
    lines.append("Commands:")
    lines.extend(f"  {c}" for c in pool)
    lines.append("Plan:")
    text = "\n".join(lines) + "\n"
    return PromptDocument(
        kind=REORDER,
        text=text,
        instruction=instruction,
        context={"pool": pool, "num_examples": len(examples)},
    )


# -- bundled defaults ---------------------------------------------------------

def _load_bundled(name: str) -> dict:
    with resources.files("votetree.data").joinpath(name).open(encoding="utf-8") as fh:
        return json.load(fh)


def default_prog_examples() -> list[ExamplePlan]:
    raw = _load_bundled("prompt_examples.json")["prog_examples"]
    return [ExamplePlan(e["instruction"], tuple(e["plan"])) for e in raw]


def default_reorder_examples() -> list[ReorderExample]:
    raw = _load_bundled("prompt_examples.json")["reorder_examples"]
    return [
        ReorderExample(e["instruction"], tuple(e["commands"]), tuple(e["plan"]))
        for e in raw
    ]


def seen_task_names() -> frozenset[str]:
    """Instructions used as in-context examples (excluded from the eval split)."""
    return frozenset(e.instruction for e in default_prog_examples())
