"""Plan text parsing and command normalization.

Generated plans are program-style call sequences (``find('salmon')`` lines,
``#`` comments, ``def task():`` headers, ``assert (...) else: ...`` recovery
blocks).  Parsing is line-oriented and never aborts: lines it cannot read
become diagnostics and the extracted command sequence is returned as a Plan.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import EmptyCommandPoolError

# Aliases mapped onto canonical action names during normalization.
ACTION_ALIASES = {"walk": "find", "put": "putback"}

_CALL_RE = re.compile(r"([A-Za-z_]\w*)\s*\(([^()]*)\)")
_DEF_RE = re.compile(r"^\s*def\s+\w+\s*\(")
_SAMPLE_SEP_RE = re.compile(r"^---\s*sample\s+(\d+)\s*---\s*$", re.MULTILINE)

PROVENANCES = ("generated", "reordered", "goal")


def _clean_token(raw: str) -> str:
    token = raw.strip().strip("'\"").strip().lower()
    return re.sub(r"\s+", "_", token)


@dataclass(frozen=True, order=True)
class Command:
    """One action applied to one or two objects; the atomic executable unit."""

    action: str
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.action:
            raise ValueError("command has an empty action token")
        if len(self.args) not in (1, 2):
            raise ValueError(f"command {self.action!r} needs 1 or 2 arguments, got {len(self.args)}")

    @property
    def canonical_form(self) -> str:
        return f"{self.action}({','.join(self.args)})"

    @classmethod
    def parse(cls, text: str) -> "Command":
        """Parse one ``action(arg[,arg])`` string, normalizing tokens."""
        m = _CALL_RE.search(text)
        if not m or m.group(0).strip() != text.strip():
            raise ValueError(f"cannot parse command string {text!r}")
        action, argtext = m.groups()
        args = [a for a in (_clean_token(p) for p in argtext.split(",")) if a]
        return normalize_command(action, args)

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.canonical_form


def normalize_command(action: str, args: list[str] | tuple[str, ...]) -> Command:
    """Lowercase, trim and de-quote tokens; map aliases to canonical actions.

    Unknown actions pass through unchanged; whether they execute is decided
    by the environment, not the parser.
    """
    token = _clean_token(action)
    if not token:
        raise ValueError("empty action token")
    token = ACTION_ALIASES.get(token, token)
    return Command(action=token, args=tuple(_clean_token(a) for a in args))


@dataclass(frozen=True)
class Plan:
    """An ordered command sequence attributed to one generator sample."""

    commands: tuple[Command, ...]
    provenance: str = "generated"
    sample_index: int = 0

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"bad plan provenance {self.provenance!r}")
        if not self.commands and self.provenance != "generated":
            raise ValueError(f"{self.provenance} plans must be non-empty")

    def __len__(self) -> int:
        return len(self.commands)


def render_plan(plan: Plan) -> str:
    """Serialize a plan canonically: one ``action(arg[,arg])`` per line."""
    return "\n".join(c.canonical_form for c in plan.commands)


@dataclass(frozen=True)
class ParseDiagnostic:
    code: str
    line_no: int = 0
    text: str = ""


def parse_plan_text(
    text: str,
    known_actions: set[str] | frozenset[str] | None = None,
    provenance: str = "generated",
    sample_index: int = 0,
) -> tuple[Plan, list[ParseDiagnostic]]:
    """Extract the command sequence from one generated plan text.

    Comment lines, function headers and assertion conditions are recognized
    scaffolding; action calls inside ``else:`` recovery branches are kept, in
    order.  Unparseable lines become diagnostics, never errors.  A degenerate
    sample parses to an empty Plan plus a ``no_commands_found`` diagnostic
    (the Plan is built with provenance "generated" in that case, since only
    generated plans may be empty).
    """
    commands: list[Command] = []
    diagnostics: list[ParseDiagnostic] = []

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line or _DEF_RE.match(line) or line in ("pass", "return"):
            continue

        scaffold = False
        if line.startswith("assert"):
            scaffold = True
            _, _, line = line.partition("else:")
            line = line.strip()
        elif line.startswith("else:"):
            scaffold = True
            line = line[len("else:"):].strip()
        if not line:
            continue

        calls = _CALL_RE.findall(line)
        if not calls:
            if not scaffold:
                diagnostics.append(ParseDiagnostic("unparseable_line", line_no, raw_line.strip()))
            continue
        for action, argtext in calls:
            args = [a for a in (_clean_token(p) for p in argtext.split(",")) if a]
            try:
                command = normalize_command(action, args)
            except ValueError:
                diagnostics.append(ParseDiagnostic("bad_arity", line_no, f"{action}({argtext})"))
                continue
            if known_actions is not None and command.action not in known_actions:
                diagnostics.append(
                    ParseDiagnostic("unknown_action", line_no, command.canonical_form)
                )
            commands.append(command)

    if not commands:
        diagnostics.append(ParseDiagnostic("no_commands_found"))
        return Plan((), provenance="generated", sample_index=sample_index), diagnostics
    return Plan(tuple(commands), provenance=provenance, sample_index=sample_index), diagnostics


def split_corpus(text: str) -> list[str]:
    """Split a multi-plan document on ``--- sample k ---`` separators."""
    if not _SAMPLE_SEP_RE.search(text):
        return [text]
    parts = _SAMPLE_SEP_RE.split(text)
    # split() yields [prefix, idx, body, idx, body, ...]; drop indices and
    # an empty leading prefix.
    bodies = [parts[i] for i in range(2, len(parts), 2)]
    if parts[0].strip():
        bodies.insert(0, parts[0])
    return bodies


@dataclass(frozen=True)
class UniqueCommandSet:
    """Deduplicated pool of commands appearing across generated plans."""

    commands: tuple[Command, ...]
    source_count: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.commands)

    def __contains__(self, command: Command) -> bool:
        return command.canonical_form in self.source_count

    @property
    def canonical_forms(self) -> list[str]:
        return [c.canonical_form for c in self.commands]


def extract_unique_commands(plans: list[Plan]) -> UniqueCommandSet:
    """Union all plan commands, deduplicated by canonical form.

    ``source_count`` maps each canonical form to the number of input plans
    containing it (presence, not occurrence count).
    """
    by_key: dict[str, Command] = {}
    source_count: dict[str, int] = {}
    for plan in plans:
        seen_in_plan = set()
        for command in plan.commands:
            key = command.canonical_form
            by_key.setdefault(key, command)
            if key not in seen_in_plan:
                source_count[key] = source_count.get(key, 0) + 1
                seen_in_plan.add(key)
    if not by_key:
        raise EmptyCommandPoolError("empty_command_pool: no commands in any generated plan")
    ordered = tuple(by_key[k] for k in sorted(by_key))
    return UniqueCommandSet(commands=ordered, source_count=source_count)
