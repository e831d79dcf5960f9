"""Symbolic household environment.

A scene is a set of objects with boolean properties plus a set of state
predicates (object states and inter-object relations).  Actions are declared
in a data catalog as precondition/effect schemas over the parameters ``?1``
and ``?2``; executing a command applies the matching schema to an immutable
``WorldState`` value and returns a new state, or a structured failure that
leaves the input state untouched.

The agent is implicit: the reserved token ``agent`` may appear in predicates
(e.g. ``CLOSE_TO(agent, fridge)``) but is not an object of the scene.  Held
objects travel with the agent, so a ``CLOSE_TO(agent, x)`` precondition is
also satisfied whenever ``x`` is currently held.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CatalogError, DatasetError, SceneError
from .plans import Command, Plan

AGENT = "agent"
HAND_CAPACITY = 2

UNARY_PREDICATES = frozenset(
    {"OPEN", "CLOSED", "ON", "OFF", "CLEAN", "DIRTY", "HELD_BY_AGENT"}
)
BINARY_PREDICATES = frozenset({"INSIDE", "ON_TOP", "CLOSE_TO", "FACING"})

# Mutually exclusive unary state pairs; no object may hold both at once.
EXCLUSIVE_PAIRS = (("OPEN", "CLOSED"), ("ON", "OFF"), ("CLEAN", "DIRTY"))

# Pseudo-predicate allowed only in precondition templates: true while the
# agent has a free hand.  It never appears in a WorldState.
HANDS_FREE = "HANDS_FREE"

_PRED_RE = re.compile(r"^\s*([A-Z_]+)\s*\(\s*([^(),\s]+)\s*(?:,\s*([^(),\s]+)\s*)?\)\s*$")
_TOKEN_RE = re.compile(r"^[a-z][a-z0-9_]*$")


@dataclass(frozen=True)
class ObjectInstance:
    """One object of a scene: an id, a category token and property flags."""

    id: str
    class_name: str
    properties: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not _TOKEN_RE.match(self.class_name):
            raise SceneError(
                f"object {self.id!r}: class_name must be a non-empty lowercase token, "
                f"got {self.class_name!r}"
            )


@dataclass(frozen=True, order=True)
class StatePredicate:
    """A unary object state (``OPEN(fridge)``) or binary relation (``INSIDE(a, b)``)."""

    predicate: str
    subject: str
    object: str | None = None

    def __post_init__(self) -> None:
        if self.predicate in UNARY_PREDICATES:
            if self.object is not None:
                raise ValueError(f"{self.predicate} is unary, got second object {self.object!r}")
        elif self.predicate in BINARY_PREDICATES:
            if self.object is None:
                raise ValueError(f"{self.predicate} is binary and needs a second object")
        else:
            valid = sorted(UNARY_PREDICATES | BINARY_PREDICATES)
            raise ValueError(f"unknown predicate token {self.predicate!r}; expected one of {valid}")

    @property
    def kind(self) -> str:
        return "unary" if self.object is None else "binary"

    @classmethod
    def parse(cls, text: str) -> "StatePredicate":
        """Parse ``PRED(subj)`` / ``PRED(subj, obj)`` strings."""
        m = _PRED_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse predicate string {text!r}")
        pred, subj, obj = m.groups()
        return cls(pred, subj, obj)

    def render(self) -> str:
        if self.object is None:
            return f"{self.predicate}({self.subject})"
        return f"{self.predicate}({self.subject}, {self.object})"

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.render()


@dataclass(frozen=True)
class WorldState:
    """Immutable predicate set describing the environment at one instant.

    ``held`` and ``agent_location`` are derived views over the predicate set,
    which is the single source of truth.
    """

    predicates: frozenset[StatePredicate] = frozenset()

    @property
    def held(self) -> frozenset[str]:
        return frozenset(p.subject for p in self.predicates if p.predicate == "HELD_BY_AGENT")

    @property
    def agent_location(self) -> str | None:
        """The object the agent is currently CLOSE_TO, if any."""
        for p in self.predicates:
            if p.predicate == "CLOSE_TO" and p.subject == AGENT:
                return p.object
        return None

    def holds(self, predicate: StatePredicate) -> bool:
        return predicate in self.predicates

    def invariant_violations(self) -> list[str]:
        """Return human-readable invariant violations (empty when valid)."""
        errs: list[str] = []
        by_subject: dict[str, set[str]] = {}
        for p in self.predicates:
            if p.kind == "unary":
                by_subject.setdefault(p.subject, set()).add(p.predicate)
        for subj, preds in sorted(by_subject.items()):
            for a, b in EXCLUSIVE_PAIRS:
                if a in preds and b in preds:
                    errs.append(f"{subj} holds both {a} and {b}")
        if len(self.held) > HAND_CAPACITY:
            errs.append(f"agent holds {len(self.held)} objects, capacity is {HAND_CAPACITY}")
        return errs


@dataclass(frozen=True)
class _Template:
    """One predicate template over ``?1``/``?2``/``agent``/``*`` arguments."""

    predicate: str
    args: tuple[str, ...]
    negated: bool = False

    def substitute(self, binding: Mapping[str, str]) -> tuple[str, ...]:
        return tuple(binding.get(a, a) for a in self.args)


def _parse_template(text: str, arity: int, allow_wildcard: bool) -> _Template:
    negated = text.lstrip().startswith("!")
    body = text.lstrip().lstrip("!")
    m = _PRED_RE.match(body)
    if not m:
        raise CatalogError(f"cannot parse template {text!r}")
    pred, a1, a2 = m.groups()
    args = (a1,) if a2 is None else (a1, a2)
    known = UNARY_PREDICATES | BINARY_PREDICATES | {HANDS_FREE}
    if pred not in known:
        raise CatalogError(f"template {text!r}: unknown predicate {pred!r}")
    for a in args:
        if a.startswith("?"):
            if a not in ("?1", "?2") or int(a[1]) > arity:
                raise CatalogError(f"template {text!r}: parameter {a!r} not declared (arity {arity})")
        elif a == "*":
            if not allow_wildcard:
                raise CatalogError(f"template {text!r}: wildcard only allowed in delete effects")
        elif a != AGENT:
            raise CatalogError(f"template {text!r}: literal {a!r} (only ?1, ?2, agent, * allowed)")
    return _Template(pred, args, negated)


@dataclass(frozen=True)
class ActionSchema:
    """Declares one action: arity, property gates, preconditions and effects."""

    name: str
    arity: int
    required_properties: tuple[frozenset[str], ...]
    preconditions: tuple[_Template, ...]
    add_effects: tuple[_Template, ...]
    del_effects: tuple[_Template, ...]


class ActionCatalog:
    """The full action vocabulary, loaded from a JSON schema list."""

    def __init__(self, schemas: Iterable[ActionSchema]):
        self.schemas: dict[str, ActionSchema] = {}
        for s in schemas:
            if s.name in self.schemas:
                raise CatalogError(f"duplicate action schema {s.name!r}")
            self.schemas[s.name] = s

    def __contains__(self, name: str) -> bool:
        return name in self.schemas

    def __len__(self) -> int:
        return len(self.schemas)

    def get(self, name: str) -> ActionSchema | None:
        return self.schemas.get(name)

    @property
    def action_names(self) -> list[str]:
        return sorted(self.schemas)

    @classmethod
    def from_documents(cls, docs: Iterable[Mapping]) -> "ActionCatalog":
        schemas = []
        for doc in docs:
            try:
                name = doc["name"]
                arity = int(doc["arity"])
            except (KeyError, TypeError, ValueError) as exc:
                raise CatalogError(f"bad schema entry {doc!r}: {exc}") from exc
            if arity not in (1, 2):
                raise CatalogError(f"action {name!r}: arity must be 1 or 2, got {arity}")
            req = doc.get("required_properties", [])
            if len(req) > arity:
                raise CatalogError(f"action {name!r}: more property lists than parameters")
            req_padded = tuple(
                frozenset(req[i]) if i < len(req) else frozenset() for i in range(arity)
            )
            schemas.append(
                ActionSchema(
                    name=name,
                    arity=arity,
                    required_properties=req_padded,
                    preconditions=tuple(
                        _parse_template(t, arity, allow_wildcard=False)
                        for t in doc.get("preconditions", [])
                    ),
                    add_effects=tuple(
                        _parse_template(t, arity, allow_wildcard=False)
                        for t in doc.get("add", [])
                    ),
                    del_effects=tuple(
                        _parse_template(t, arity, allow_wildcard=True)
                        for t in doc.get("del", [])
                    ),
                )
            )
        return cls(schemas)

    @classmethod
    def from_file(cls, path: str | Path) -> "ActionCatalog":
        with open(path, encoding="utf-8") as fh:
            return cls.from_documents(json.load(fh))


@dataclass(frozen=True)
class Scene:
    """A loaded scene: object catalog plus the initial world state."""

    scene_id: str
    objects: Mapping[str, ObjectInstance]
    initial_state: WorldState


def load_scene(document: Mapping | str | Path) -> Scene:
    """Load and validate a scene document (a dict, JSON path or JSON text).

    Raises SceneError naming the offending entry on malformed input,
    duplicate ids or predicate references to unknown objects.
    """
    if isinstance(document, (str, Path)):
        path = Path(document)
        if path.exists():
            document = json.loads(path.read_text(encoding="utf-8"))
        else:
            document = json.loads(str(document))
    if not isinstance(document, Mapping):
        raise SceneError(f"scene document must be a mapping, got {type(document).__name__}")

    scene_id = document.get("scene_id")
    if not scene_id:
        raise SceneError("scene document is missing 'scene_id'")

    objects: dict[str, ObjectInstance] = {}
    for entry in document.get("objects", []):
        try:
            obj = ObjectInstance(
                id=entry["id"],
                class_name=entry.get("class_name", entry["id"]),
                properties=frozenset(entry.get("properties", [])),
            )
        except (KeyError, TypeError) as exc:
            raise SceneError(f"scene {scene_id}: malformed object entry {entry!r}: {exc}") from exc
        if obj.id == AGENT:
            raise SceneError(f"scene {scene_id}: object id {AGENT!r} is reserved")
        if obj.id in objects:
            raise SceneError(f"scene {scene_id}: duplicate object id {obj.id!r}")
        objects[obj.id] = obj

    predicates: set[StatePredicate] = set()
    for text in document.get("init", []):
        try:
            pred = StatePredicate.parse(text)
        except ValueError as exc:
            raise SceneError(f"scene {scene_id}: bad init predicate {text!r}: {exc}") from exc
        for ref in (pred.subject, pred.object):
            if ref is not None and ref != AGENT and ref not in objects:
                raise SceneError(
                    f"scene {scene_id}: init predicate {text!r} references unknown object {ref!r}"
                )
        predicates.add(pred)

    state = WorldState(frozenset(predicates))
    violations = state.invariant_violations()
    if violations:
        raise SceneError(f"scene {scene_id}: invalid initial state: {'; '.join(violations)}")
    return Scene(scene_id=scene_id, objects=objects, initial_state=state)


# -- command execution -------------------------------------------------------

FAIL_UNKNOWN_ACTION = "unknown_action"
FAIL_UNKNOWN_OBJECT = "unknown_object"
FAIL_ARITY_MISMATCH = "arity_mismatch"
FAIL_MISSING_PROPERTY = "missing_property"
FAIL_PRECONDITION = "precondition_unsatisfied"


@dataclass(frozen=True)
class ExecutionOutcome:
    """Result of executing one command: the next state, or a failure reason."""

    ok: bool
    state: WorldState
    reason: str | None = None
    detail: str | None = None


class World:
    """Static execution context: an action catalog bound to a scene's objects."""

    def __init__(self, catalog: ActionCatalog, objects: Mapping[str, ObjectInstance]):
        self.catalog = catalog
        self.objects = dict(objects)

    @property
    def object_ids(self) -> list[str]:
        return sorted(self.objects)

    def _precondition_met(self, state: WorldState, tpl: _Template, binding: Mapping[str, str]) -> bool:
        args = tpl.substitute(binding)
        if tpl.predicate == HANDS_FREE:
            result = len(state.held) < HAND_CAPACITY
        else:
            pred = StatePredicate(tpl.predicate, args[0], args[1] if len(args) > 1 else None)
            result = state.holds(pred)
            # Held objects travel with the agent.
            if not result and tpl.predicate == "CLOSE_TO" and args[0] == AGENT:
                result = args[1] in state.held
        return not result if tpl.negated else result

    def execute(self, state: WorldState, command: Command) -> ExecutionOutcome:
        """Apply ``command`` to ``state``.

        Total over arbitrary commands: unknown actions/objects, arity and
        property mismatches and unsatisfied preconditions come back as
        failures with the input state unchanged.
        """
        schema = self.catalog.get(command.action)
        if schema is None:
            return ExecutionOutcome(False, state, FAIL_UNKNOWN_ACTION, command.action)
        if len(command.args) != schema.arity:
            return ExecutionOutcome(
                False, state, FAIL_ARITY_MISMATCH,
                f"{command.action} expects {schema.arity} argument(s), got {len(command.args)}",
            )
        for arg in command.args:
            if arg not in self.objects:
                return ExecutionOutcome(False, state, FAIL_UNKNOWN_OBJECT, arg)
        for i, required in enumerate(schema.required_properties):
            missing = required - self.objects[command.args[i]].properties
            if missing:
                return ExecutionOutcome(
                    False, state, FAIL_MISSING_PROPERTY,
                    f"{command.args[i]} lacks {sorted(missing)}",
                )

        binding = {f"?{i + 1}": arg for i, arg in enumerate(command.args)}
        for tpl in schema.preconditions:
            if not self._precondition_met(state, tpl, binding):
                polarity = "not " if tpl.negated else ""
                return ExecutionOutcome(
                    False, state, FAIL_PRECONDITION,
                    f"requires {polarity}{tpl.predicate}{tpl.substitute(binding)}",
                )

        predicates = set(state.predicates)
        for tpl in schema.del_effects:
            args = tpl.substitute(binding)
            if "*" in args:
                predicates = {
                    p for p in predicates
                    if not (
                        p.predicate == tpl.predicate
                        and all(a == "*" or a == b for a, b in zip(args, _pred_args(p)))
                    )
                }
            else:
                predicates.discard(
                    StatePredicate(tpl.predicate, args[0], args[1] if len(args) > 1 else None)
                )
        for tpl in schema.add_effects:
            args = tpl.substitute(binding)
            predicates.add(
                StatePredicate(tpl.predicate, args[0], args[1] if len(args) > 1 else None)
            )
        return ExecutionOutcome(True, WorldState(frozenset(predicates)))


def _pred_args(p: StatePredicate) -> tuple[str, ...]:
    return (p.subject,) if p.object is None else (p.subject, p.object)


def state_diff(initial: WorldState, final: WorldState) -> frozenset[StatePredicate]:
    """Predicates present in ``final`` but not in ``initial``."""
    return final.predicates - initial.predicates


@dataclass(frozen=True)
class GoalSpec:
    """Target conditions for one task, explicit or derived from a goal plan."""

    task_name: str
    goal_conditions: frozenset[StatePredicate]
    source: str = "explicit"

    def __post_init__(self) -> None:
        if not self.goal_conditions:
            raise DatasetError(f"task {self.task_name!r}: goal_conditions must be non-empty")
        if self.source not in ("explicit", "derived_from_goal_plan"):
            raise ValueError(f"bad GoalSpec source {self.source!r}")


def simulate_plan(world: World, initial: WorldState, plan: Plan) -> WorldState:
    """Run every command of ``plan``; raise DatasetError on the first failure."""
    state = initial
    for i, command in enumerate(plan.commands):
        outcome = world.execute(state, command)
        if not outcome.ok:
            raise DatasetError(
                f"goal plan step {i} {command.canonical_form!r} failed: "
                f"{outcome.reason} ({outcome.detail})"
            )
        state = outcome.state
    return state


def derive_goal_conditions(world: World, initial: WorldState, goal_plan: Plan,
                           task_name: str) -> GoalSpec:
    """Simulate the ground-truth plan and take the state diff as the goal."""
    try:
        final = simulate_plan(world, initial, goal_plan)
    except DatasetError as exc:
        raise DatasetError(f"task {task_name!r}: {exc}") from exc
    diff = state_diff(initial, final)
    if not diff:
        raise DatasetError(f"task {task_name!r}: goal plan produces an empty state diff")
    return GoalSpec(task_name=task_name, goal_conditions=diff, source="derived_from_goal_plan")


@dataclass(frozen=True)
class Task:
    """One dataset entry: instruction, scene binding, goal plan, optional goals."""

    task_name: str
    scene_id: str
    goal_plan: Plan
    goal_conditions: frozenset[StatePredicate] | None = None


def load_tasks(path: str | Path) -> list[Task]:
    """Load the task file: a JSON list of task entries."""
    with open(path, encoding="utf-8") as fh:
        docs = json.load(fh)
    tasks = []
    for doc in docs:
        try:
            commands = tuple(Command.parse(c) for c in doc["goal_plan"])
            conditions = doc.get("goal_conditions")
            tasks.append(
                Task(
                    task_name=doc["task_name"],
                    scene_id=doc["scene_id"],
                    goal_plan=Plan(commands=commands, provenance="goal", sample_index=0),
                    goal_conditions=(
                        frozenset(StatePredicate.parse(p) for p in conditions)
                        if conditions else None
                    ),
                )
            )
        except (KeyError, ValueError) as exc:
            raise DatasetError(f"bad task entry {doc!r}: {exc}") from exc
    return tasks
