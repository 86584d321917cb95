"""Modification YAML dialect: parsing, validation, clamping, serialization.

The wire format (documented bit-exactly in ``docs/modification-schema.md``)
organizes multiplicative changes at three scopes:

* ``global`` - velocity/force multipliers for every waypoint, plus the
  ``stop`` and ``clarification`` flags;
* one entry per body landmark - ``attract`` / ``velocity`` / ``force``
  multipliers anchored to that landmark;
* ``waypoint <i>`` entries - velocity/force multipliers for single 1-based
  waypoints.

Multipliers are positive reals: > 1 increases a quantity (or attracts the
executor), < 1 decreases (or repels).  Decreases are written as fractions
with a numerator of 1 (``1/2.0``).  A value of exactly 1.0 means "no change"
and is normalized away on parse, so serialization never emits it.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import yaml

logger = logging.getLogger(__name__)

# Cumulative per-utterance change is bounded to avoid drastic jumps.
MULTIPLIER_MIN = 1.0 / 3.0
MULTIPLIER_MAX = 3.0

# Question substituted when a reply asks for clarification without one.
FALLBACK_QUESTION = "Could you tell me more about what you'd like me to change?"

_GLOBAL_KEY = "global"
_WAYPOINT_KEY_RE = re.compile(r"^waypoint\s+(\d+)$")
_FRACTION_RE = re.compile(r"^1\s*/\s*(\S+)$")
_FENCE_RE = re.compile(r"```[ \t]*(?:yaml)?[ \t]*\n(.*?)```", re.DOTALL)


class SpecParseError(ValueError):
    """Modification YAML that does not follow the dialect."""


class ReplyFormatError(ValueError):
    """Raw interpreter reply whose fenced YAML block cannot be parsed."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


def parse_multiplier(value) -> float:
    """Positive multiplier from a decimal or a ``1/<decimal>`` fraction string."""
    if isinstance(value, bool):
        raise SpecParseError(f"expected a multiplier, got boolean {value!r}")
    if isinstance(value, (int, float)):
        result = float(value)
    elif isinstance(value, str):
        text = value.strip()
        m = _FRACTION_RE.match(text)
        try:
            if m:
                denominator = float(m.group(1))
                if denominator <= 0 or not math.isfinite(denominator):
                    raise SpecParseError(f"fraction denominator must be > 0 in {value!r}")
                result = 1.0 / denominator
            else:
                result = float(text)
        except ValueError:
            raise SpecParseError(f"malformed multiplier {value!r}") from None
    else:
        raise SpecParseError(f"expected a multiplier, got {value!r}")
    if not math.isfinite(result) or result <= 0:
        raise SpecParseError(f"multiplier must be a positive finite number, got {value!r}")
    return result


def format_multiplier(value: float) -> str:
    """Inverse of :func:`parse_multiplier` for the dialect's conventions.

    Values >= 1 are written as plain decimals (full precision).  Values < 1
    are written ``1/x`` with the denominator rendered to at most 4 significant
    digits; this is exact for multipliers that originate from such fractions,
    which is the dialect's domain.
    """
    if value >= 1.0:
        return repr(value)
    denominator = 1.0 / value
    text = f"{denominator:.4g}"
    if "." not in text and "e" not in text:
        text += ".0"
    return f"1/{text}"


@dataclass(frozen=True)
class GlobalChange:
    """Whole-trajectory velocity/force multipliers plus stop/clarification flags."""

    velocity: Optional[float] = None
    force: Optional[float] = None
    stop: bool = False
    clarification: bool = False

    @property
    def is_default(self) -> bool:
        return (
            self.velocity is None
            and self.force is None
            and not self.stop
            and not self.clarification
        )


@dataclass(frozen=True)
class LandmarkChange:
    """Landmark-anchored multipliers; attract moves the path, the rest scale it."""

    attract: Optional[float] = None
    velocity: Optional[float] = None
    force: Optional[float] = None

    @property
    def is_empty(self) -> bool:
        return self.attract is None and self.velocity is None and self.force is None


@dataclass(frozen=True)
class WaypointChange:
    """Multipliers for one waypoint, addressed by its 1-based index."""

    index: int
    velocity: Optional[float] = None
    force: Optional[float] = None

    @property
    def is_empty(self) -> bool:
        return self.velocity is None and self.force is None


@dataclass(frozen=True)
class ModificationSpec:
    """One utterance's worth of parsed changes across all three scopes."""

    global_: GlobalChange = field(default_factory=GlobalChange)
    landmarks: dict[str, LandmarkChange] = field(default_factory=dict)
    waypoints: dict[int, WaypointChange] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "ModificationSpec":
        return cls()

    @property
    def is_empty(self) -> bool:
        return self.global_.is_default and not self.landmarks and not self.waypoints

    @property
    def has_modifications(self) -> bool:
        """True when applying the spec could change the trajectory (flags aside)."""
        if self.global_.velocity is not None or self.global_.force is not None:
            return True
        return bool(self.landmarks) or bool(self.waypoints)


@dataclass(frozen=True)
class InterpreterReply:
    """Parsed interpreter output: the spec plus the sentence spoken back.

    ``needs_clarification`` mirrors the spec's flag; when set, the spec carries
    no changes and ``feedback`` is the question to relay to the user.
    """

    spec: ModificationSpec
    feedback: Optional[str] = None
    needs_clarification: bool = False
    latency_s: float = field(default=0.0, compare=False)


class _WarnDuplicatesLoader(yaml.SafeLoader):
    """SafeLoader that logs duplicate mapping keys (last occurrence wins)."""


def _construct_mapping(loader, node, deep=False):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            logger.warning("duplicate YAML key %r: last occurrence wins", key)
        seen.add(key)
    return yaml.SafeLoader.construct_mapping(loader, node, deep=deep)


_WarnDuplicatesLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping
)


def _field_multiplier(entry: Mapping, name: str) -> Optional[float]:
    if name not in entry:
        return None
    value = parse_multiplier(entry[name])
    if value == 1.0:  # explicit "no change"
        return None
    return value


def _parse_flag(entry: Mapping, name: str) -> bool:
    value = entry.get(name, False)
    if not isinstance(value, bool):
        raise SpecParseError(f"global {name} must be true or false, got {value!r}")
    return value


def parse_spec(text: Optional[str], known_landmarks: Optional[list[str]] = None) -> ModificationSpec:
    """Parse modification YAML into a :class:`ModificationSpec`.

    Top-level keys route to the three scopes: ``global``, ``waypoint <i>``,
    and landmark names.  Unknown keys and malformed values raise
    :class:`SpecParseError`.  An absent or empty document is the empty spec.
    Fields equal to 1.0 are dropped (no change); entries left empty by that
    normalization are dropped too.  When ``known_landmarks`` is given,
    landmark entries outside it are dropped with a warning instead of
    failing, to tolerate interpreter drift.
    """
    if text is None or not text.strip():
        return ModificationSpec.empty()
    try:
        doc = yaml.load(text, Loader=_WarnDuplicatesLoader)
    except yaml.YAMLError as exc:
        raise SpecParseError(f"invalid YAML: {exc}") from exc
    if doc is None:
        return ModificationSpec.empty()
    if not isinstance(doc, dict):
        raise SpecParseError(f"modification YAML must be a mapping, got {type(doc).__name__}")

    global_change = GlobalChange()
    landmarks: dict[str, LandmarkChange] = {}
    waypoints: dict[int, WaypointChange] = {}

    for key, entry in doc.items():
        if not isinstance(key, str):
            raise SpecParseError(f"unknown top-level key {key!r}")
        if key == _GLOBAL_KEY:
            if not isinstance(entry, dict):
                raise SpecParseError("global entry must be a mapping")
            unknown = set(entry) - {"velocity", "force", "stop", "clarification"}
            if unknown:
                raise SpecParseError(f"unknown field(s) in global entry: {sorted(unknown)}")
            global_change = GlobalChange(
                velocity=_field_multiplier(entry, "velocity"),
                force=_field_multiplier(entry, "force"),
                stop=_parse_flag(entry, "stop"),
                clarification=_parse_flag(entry, "clarification"),
            )
            continue
        wp_match = _WAYPOINT_KEY_RE.match(key.strip())
        if wp_match:
            index = int(wp_match.group(1))
            if not isinstance(entry, dict):
                raise SpecParseError(f"entry {key!r} must be a mapping")
            unknown = set(entry) - {"velocity", "force"}
            if unknown:
                raise SpecParseError(f"unknown field(s) in {key!r}: {sorted(unknown)}")
            change = WaypointChange(
                index=index,
                velocity=_field_multiplier(entry, "velocity"),
                force=_field_multiplier(entry, "force"),
            )
            if not entry:
                raise SpecParseError(f"entry {key!r} must contain velocity or force")
            if not change.is_empty:
                waypoints[index] = change
            continue
        if key.strip().startswith("waypoint"):
            raise SpecParseError(f"waypoint key without integer index: {key!r}")
        # Anything else is a landmark entry.
        if not isinstance(entry, dict):
            raise SpecParseError(f"unknown top-level key {key!r}")
        unknown = set(entry) - {"attract", "velocity", "force"}
        if unknown:
            raise SpecParseError(f"unknown field(s) in landmark entry {key!r}: {sorted(unknown)}")
        if not entry:
            raise SpecParseError(f"landmark entry {key!r} must contain at least one field")
        if known_landmarks is not None and key not in known_landmarks:
            logger.warning("dropping change for unknown landmark %r", key)
            continue
        change = LandmarkChange(
            attract=_field_multiplier(entry, "attract"),
            velocity=_field_multiplier(entry, "velocity"),
            force=_field_multiplier(entry, "force"),
        )
        if not change.is_empty:
            landmarks[key] = change

    return ModificationSpec(global_=global_change, landmarks=landmarks, waypoints=waypoints)


def serialize_spec(spec: ModificationSpec) -> str:
    """Render a spec back to the compact dialect.

    Only fields carrying changes are emitted (never a 1.0 multiplier, never
    ``stop: false``); the ``clarification`` flag is always written when the
    global entry exists at all.  An empty spec serializes to the empty string.
    Round-trips bitwise through :func:`parse_spec`.
    """
    lines: list[str] = []
    for index in sorted(spec.waypoints):
        change = spec.waypoints[index]
        if change.is_empty:
            continue
        lines.append(f"waypoint {index}:")
        if change.force is not None:
            lines.append(f"    force: {format_multiplier(change.force)}")
        if change.velocity is not None:
            lines.append(f"    velocity: {format_multiplier(change.velocity)}")
    g = spec.global_
    if not g.is_default:
        lines.append("global:")
        lines.append(f"    clarification: {'true' if g.clarification else 'false'}")
        if g.force is not None:
            lines.append(f"    force: {format_multiplier(g.force)}")
        if g.stop:
            lines.append("    stop: true")
        if g.velocity is not None:
            lines.append(f"    velocity: {format_multiplier(g.velocity)}")
    for name in sorted(spec.landmarks):
        change = spec.landmarks[name]
        if change.is_empty:
            continue
        lines.append(f"{name}:")
        if change.attract is not None:
            lines.append(f"    attract: {format_multiplier(change.attract)}")
        if change.force is not None:
            lines.append(f"    force: {format_multiplier(change.force)}")
        if change.velocity is not None:
            lines.append(f"    velocity: {format_multiplier(change.velocity)}")
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def _clamp(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    return min(max(value, MULTIPLIER_MIN), MULTIPLIER_MAX)


def clamp_spec(spec: ModificationSpec) -> ModificationSpec:
    """Clamp every multiplier into [1/3, 3]; flags pass through untouched."""
    g = spec.global_
    return ModificationSpec(
        global_=replace(g, velocity=_clamp(g.velocity), force=_clamp(g.force)),
        landmarks={
            name: LandmarkChange(
                attract=_clamp(c.attract), velocity=_clamp(c.velocity), force=_clamp(c.force)
            )
            for name, c in spec.landmarks.items()
        },
        waypoints={
            index: WaypointChange(
                index=c.index, velocity=_clamp(c.velocity), force=_clamp(c.force)
            )
            for index, c in spec.waypoints.items()
        },
    )


def restrict_landmarks(spec: ModificationSpec, allowed: list[str]) -> ModificationSpec:
    """Drop (with a warning) landmark entries outside the session's vocabulary."""
    unknown = [name for name in spec.landmarks if name not in allowed]
    if not unknown:
        return spec
    for name in unknown:
        logger.warning("dropping change for unknown landmark %r", name)
    kept = {name: c for name, c in spec.landmarks.items() if name not in unknown}
    return replace(spec, landmarks=kept)


def reciprocal_spec(spec: ModificationSpec) -> ModificationSpec:
    """Spec that reverses every multiplier of ``spec``; flags are reset."""

    def inv(value: Optional[float]) -> Optional[float]:
        return None if value is None else 1.0 / value

    return ModificationSpec(
        global_=GlobalChange(velocity=inv(spec.global_.velocity), force=inv(spec.global_.force)),
        landmarks={
            name: LandmarkChange(
                attract=inv(c.attract), velocity=inv(c.velocity), force=inv(c.force)
            )
            for name, c in spec.landmarks.items()
        },
        waypoints={
            index: WaypointChange(index=c.index, velocity=inv(c.velocity), force=inv(c.force))
            for index, c in spec.waypoints.items()
        },
    )


def extract_reply(raw_text: str) -> InterpreterReply:
    """Split a raw interpreter reply into spec and feedback sentence.

    The spec is read from the first fenced ```` ```yaml ```` block; the first
    nonempty line after the block is the feedback sentence.  Text without a
    fenced block is an ignored utterance (empty spec, no feedback).  A fenced
    block that fails to parse raises :class:`ReplyFormatError` carrying the
    raw text for logging.

    A reply asking for clarification must not change the trajectory: if the
    flag is set alongside scaling/attract/stop changes, the changes are
    dropped with a warning, and a missing question falls back to a generic one.
    """
    if not raw_text or not raw_text.strip():
        return InterpreterReply(spec=ModificationSpec.empty())
    match = _FENCE_RE.search(raw_text)
    if not match:
        return InterpreterReply(spec=ModificationSpec.empty())
    try:
        spec = parse_spec(match.group(1))
    except SpecParseError as exc:
        raise ReplyFormatError(f"unparseable modification block: {exc}", raw=raw_text) from exc
    feedback = None
    for line in raw_text[match.end():].splitlines():
        if line.strip():
            feedback = line.strip()
            break
    needs_clarification = spec.global_.clarification
    if needs_clarification:
        if spec.has_modifications or spec.global_.stop:
            logger.warning("clarification reply carried changes; dropping them")
        spec = ModificationSpec(global_=GlobalChange(clarification=True))
        if feedback is None:
            logger.warning("clarification reply carried no question; using fallback")
            feedback = FALLBACK_QUESTION
    return InterpreterReply(
        spec=spec, feedback=feedback, needs_clarification=needs_clarification
    )
