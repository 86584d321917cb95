"""Utterance interpretation: prompts, backends, and the deterministic mock.

The pipeline is the same for every backend: build a prompt from the
trajectory context, the utterance, and the most recent conversation turn;
ask the backend to complete it; parse the fenced YAML block out of the raw
reply; clamp the multipliers and drop changes for landmarks the session does
not know.  Backends are pluggable:

* :class:`LlmBackend` - HTTPS chat-completion endpoint (configured via the
  ``BRIDGE_LLM_URL`` / ``BRIDGE_LLM_MODEL`` / ``BRIDGE_LLM_API_KEY``
  environment variables);
* :class:`ScriptedBackend` - canned utterance -> reply map for replays;
* :class:`MockBackend` - offline rule grammar (see :func:`mock_interpret`)
  rendered through the same raw-reply format, so the full pipeline is
  exercised without any network.

The prompt's fixed text lives in versioned asset files whose content hashes
are recorded below; tests assert them so template drift is always a
deliberate edit.
"""

from __future__ import annotations

import logging
import os
import re
import textwrap
import time
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Protocol

import httpx

from .schema import (
    FALLBACK_QUESTION,
    GlobalChange,
    InterpreterReply,
    LandmarkChange,
    ModificationSpec,
    clamp_spec,
    parse_spec,
    reciprocal_spec,
    restrict_landmarks,
    serialize_spec,
    extract_reply,
)
from .trajectory import (
    CANONICAL_LANDMARKS,
    DEFAULT_PROXIMITY_THRESHOLD,
    LandmarkSet,
    Trajectory,
    to_context_yaml,
)

logger = logging.getLogger(__name__)

MAIN_PROMPT_SHA256 = "eaa8e11d7c75c6e31b86097438f125f8c308280ace75d2087c90f7fd276f308f"
CLARIFICATION_PROMPT_SHA256 = "031d861cbb6e8cdf29cdbe5fbc59aebb9e3d09aa916242922eb084b22c834530"

# Dynamic slots in the templates.
_SLOT_TRAJECTORY = "[[TRAJECTORY_YAML]]"
_SLOT_UTTERANCE = "[[UTTERANCE]]"
_SLOT_HISTORY = "[[HISTORY]]"
_SLOT_QUESTION = "[[QUESTION]]"
_SLOT_ANSWER = "[[ANSWER]]"

# Fixed template lines the mock backend uses to recover its inputs.
UTTERANCE_MARKER = "The following is the user's utterance:"
HISTORY_MARKER = "The following is the history of previous utterances and responses, if any:"
QUESTION_MARKER = "The robot's question:"
ANSWER_MARKER = "The user's answer:"
_MAIN_TAIL_MARKER = "Output your response in the form of the given YAML block"
_CLAR_TAIL_MARKER = "Output your response wrapped in yaml"

DEFAULT_BACKEND_TIMEOUT_S = 10.0


@dataclass(frozen=True)
class ConversationTurn:
    """One completed exchange: what the user said, the YAML applied, the feedback."""

    utterance: str
    reply_yaml: str
    feedback: Optional[str] = None


class History:
    """Conversation memory: only the most recent completed turn is kept."""

    def __init__(self, last: Optional[ConversationTurn] = None):
        self.last = last

    def record(self, turn: ConversationTurn) -> None:
        self.last = turn


@dataclass(frozen=True)
class PendingClarification:
    """Open question awaiting the user's answer."""

    question: str
    utterance: str  # the utterance that triggered the question


@dataclass(frozen=True)
class PromptTemplates:
    """Fixed prompt texts; defaults come from the packaged asset files."""

    main: str
    clarification: str

    @classmethod
    def load(
        cls, main_path: Optional[str] = None, clarification_path: Optional[str] = None
    ) -> "PromptTemplates":
        assets = resources.files(__package__) / "assets"
        if main_path:
            with open(main_path, encoding="utf-8") as fh:
                main = fh.read()
        else:
            main = (assets / "main_prompt.txt").read_text(encoding="utf-8")
        if clarification_path:
            with open(clarification_path, encoding="utf-8") as fh:
                clarification = fh.read()
        else:
            clarification = (assets / "clarification_prompt.txt").read_text(encoding="utf-8")
        return cls(main=main, clarification=clarification)


_default_templates: Optional[PromptTemplates] = None


def default_templates() -> PromptTemplates:
    global _default_templates
    if _default_templates is None:
        _default_templates = PromptTemplates.load()
    return _default_templates


def _render_history(turn: Optional[ConversationTurn]) -> str:
    """History section in the same style as the in-prompt examples; empty if none."""
    if turn is None:
        return ""
    yaml_block = textwrap.indent(turn.reply_yaml.rstrip("\n"), "    ") if turn.reply_yaml else ""
    return f'Previous Utterance: "{turn.utterance}"\nPrevious Response:\n{yaml_block}'


def build_main_prompt(
    context_yaml: str,
    utterance: str,
    history: Optional[ConversationTurn] = None,
    templates: Optional[PromptTemplates] = None,
) -> str:
    """Fill the fixed main template with trajectory YAML, utterance, and history."""
    template = (templates or default_templates()).main
    return (
        template.replace(_SLOT_TRAJECTORY, context_yaml)
        .replace(_SLOT_UTTERANCE, utterance)
        .replace(_SLOT_HISTORY, _render_history(history))
    )


def build_clarification_prompt(
    question: str,
    answer: str,
    context_yaml: str,
    templates: Optional[PromptTemplates] = None,
) -> str:
    """Concise second-stage prompt: format rules, trajectory, question, answer."""
    if not answer or not answer.strip():
        raise ValueError("clarification answer must be nonempty")
    template = (templates or default_templates()).clarification
    return (
        template.replace(_SLOT_TRAJECTORY, context_yaml)
        .replace(_SLOT_QUESTION, question)
        .replace(_SLOT_ANSWER, answer)
    )


class BackendError(RuntimeError):
    """Backend timeout or failure; the session treats the utterance as ignored."""


class InterpreterBackend(Protocol):
    timeout_s: float

    def complete(self, prompt: str) -> str:
        """Raw completion text for the prompt; raises BackendError on failure."""
        ...


class LlmBackend:
    """Chat-completion client for an OpenAI-style HTTPS endpoint."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        timeout_s: float = DEFAULT_BACKEND_TIMEOUT_S,
        client: Optional[httpx.Client] = None,
    ):
        self.base_url = base_url
        self.model = model
        self.api_key = api_key
        self.timeout_s = timeout_s
        self._client = client

    @classmethod
    def from_env(cls, timeout_s: float = DEFAULT_BACKEND_TIMEOUT_S) -> "LlmBackend":
        url = os.environ.get("BRIDGE_LLM_URL", "")
        model = os.environ.get("BRIDGE_LLM_MODEL", "")
        if not url or not model:
            raise BackendError("BRIDGE_LLM_URL and BRIDGE_LLM_MODEL must be set")
        return cls(url, model, os.environ.get("BRIDGE_LLM_API_KEY", ""), timeout_s)

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0.0,
        }
        try:
            if self._client is not None:
                response = self._client.post(
                    self.base_url, json=payload, headers=headers, timeout=self.timeout_s
                )
            else:
                response = httpx.post(
                    self.base_url, json=payload, headers=headers, timeout=self.timeout_s
                )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except httpx.TimeoutException as exc:
            raise BackendError(f"LLM request timed out after {self.timeout_s}s") from exc
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError(f"LLM request failed: {exc}") from exc


class ScriptedBackend:
    """Canned replies keyed by utterance text, for deterministic replays.

    The backend recovers the user's text from the prompt's fixed markers (the
    same way the mock does) and looks it up: exact match first, then the
    longest key contained in the text.  Unmatched utterances complete to the
    empty string (an ignored utterance).
    """

    def __init__(self, replies: dict[str, str], timeout_s: float = DEFAULT_BACKEND_TIMEOUT_S):
        self.replies = dict(replies)
        self.timeout_s = timeout_s

    def complete(self, prompt: str) -> str:
        text = _user_text_from_prompt(prompt).strip()
        if text in self.replies:
            return self.replies[text]
        for key in sorted(self.replies, key=lambda k: (-len(k), k)):
            if key in text:
                return self.replies[key]
        logger.warning("scripted backend has no reply for %r; ignoring utterance", text)
        return ""


# ---------------------------------------------------------------------------
# Deterministic rule-grammar mock (table documented in docs/mock-grammar.md).

_INCREASE = {"default": 2.0, "small": 1.25, "big": 3.0}


def _magnitude(text: str) -> str:
    if "a little" in text or "slightly" in text:
        return "small"
    if "a lot" in text or "much" in text:
        return "big"
    return "default"


def _multiplier(text: str, increase: bool) -> float:
    value = _INCREASE[_magnitude(text)]
    return value if increase else 1.0 / value


def _normalize(utterance: str) -> str:
    text = utterance.lower()
    text = re.sub(r"[^\w\s/]", " ", text)
    return re.sub(r"\s+", " ", text).strip()


def _landmark_pattern(vocabulary: tuple[str, ...]) -> str:
    names = sorted(vocabulary, key=len, reverse=True)
    return "|".join(re.escape(name) for name in names)


def _question_reply(question: str = FALLBACK_QUESTION) -> InterpreterReply:
    return InterpreterReply(
        spec=ModificationSpec(global_=GlobalChange(clarification=True)),
        feedback=question,
        needs_clarification=True,
    )


def mock_interpret(
    utterance: str,
    traj_context: str = "",
    history: Optional[ConversationTurn] = None,
    vocabulary: tuple[str, ...] = CANONICAL_LANDMARKS,
) -> InterpreterReply:
    """Deterministic keyword grammar standing in for the LLM.

    Pure function of (utterance, history): "faster"/"slower" scale global
    velocity, "harder"/"more pressure" and "softer"/"gentler" scale global
    force, "near/around my <landmark>" scopes those changes to the landmark,
    "closer to / away from my <landmark>" sets the attract field, "a
    little/slightly" and "a lot/much" pick 1.25x or 3x instead of the default
    2x, "stop" stops, and "undo" replays the reciprocal of the last turn.
    Anything else yields an open clarifying question.
    """
    text = _normalize(utterance)
    lm_pat = _landmark_pattern(vocabulary)

    if re.search(r"\bundo\b", text) or "forget what i just said" in text:
        previous = parse_spec(history.reply_yaml) if history is not None else None
        if previous is None or not previous.has_modifications:
            return _question_reply("I don't have a recent change to undo; what would you like me to change?")
        return InterpreterReply(
            spec=reciprocal_spec(previous),
            feedback="I'm undoing the previous change.",
            needs_clarification=False,
        )

    if re.search(r"\bstop\b", text) and "stop here" not in text:
        return InterpreterReply(
            spec=ModificationSpec(global_=GlobalChange(stop=True)),
            feedback="Stopping now.",
            needs_clarification=False,
        )

    landmarks: dict[str, LandmarkChange] = {}
    global_velocity: Optional[float] = None
    global_force: Optional[float] = None
    sentences: list[str] = []

    closer = re.search(rf"closer to my ({lm_pat})", text)
    away = re.search(rf"(?:away|further|farther) from my ({lm_pat})", text)
    if closer:
        name = closer.group(1)
        landmarks[name] = LandmarkChange(attract=_multiplier(text, increase=True))
        sentences.append(f"I'm moving closer to your {name}.")
    elif away:
        name = away.group(1)
        landmarks[name] = LandmarkChange(attract=_multiplier(text, increase=False))
        sentences.append(f"I'm moving farther from your {name}.")

    scope = re.search(rf"(?:near|around) my ({lm_pat})", text)
    velocity: Optional[float] = None
    force: Optional[float] = None
    if re.search(r"\bfaster\b", text):
        velocity = _multiplier(text, increase=True)
    elif re.search(r"\bslower\b", text):
        velocity = _multiplier(text, increase=False)
    if re.search(r"\bharder\b", text) or "more pressure" in text:
        force = _multiplier(text, increase=True)
    elif re.search(r"\bsofter\b", text) or re.search(r"\bgentler\b", text):
        force = _multiplier(text, increase=False)

    if velocity is not None or force is not None:
        if scope:
            name = scope.group(1)
            existing = landmarks.get(name, LandmarkChange())
            landmarks[name] = LandmarkChange(
                attract=existing.attract, velocity=velocity, force=force
            )
            where = f" around your {name}"
        else:
            global_velocity = velocity
            global_force = force
            where = ""
        if velocity is not None:
            sentences.append(
                f"I'm {'increasing' if velocity > 1 else 'decreasing'} the speed{where}."
            )
        if force is not None:
            sentences.append(
                f"I'm applying {'more' if force > 1 else 'less'} pressure{where}."
            )

    if not landmarks and global_velocity is None and global_force is None:
        return _question_reply()

    spec = ModificationSpec(
        global_=GlobalChange(velocity=global_velocity, force=global_force),
        landmarks=landmarks,
    )
    return InterpreterReply(spec=spec, feedback=sentences[0], needs_clarification=False)


def render_raw_reply(reply: InterpreterReply) -> str:
    """Raw completion text (fenced YAML + sentence) for a structured reply."""
    yaml_block = serialize_spec(reply.spec)
    parts = [f"```yaml\n{yaml_block}```"]
    if reply.feedback:
        parts.append(reply.feedback)
    return "\n".join(parts)


def _section(prompt: str, start_marker: str, end_marker: str) -> str:
    start = prompt.index(start_marker) + len(start_marker)
    end = prompt.index(end_marker, start)
    return prompt[start:end].strip("\n")


def _user_text_from_prompt(prompt: str) -> str:
    """The utterance (main prompt) or answer (clarification prompt) section."""
    if QUESTION_MARKER in prompt and ANSWER_MARKER in prompt:
        return _section(prompt, ANSWER_MARKER, _CLAR_TAIL_MARKER)
    return _section(prompt, UTTERANCE_MARKER, HISTORY_MARKER)


def _history_from_prompt(section: str) -> Optional[ConversationTurn]:
    match = re.search(r'Previous Utterance: "(.*)"', section)
    if not match:
        return None
    yaml_text = ""
    marker = "Previous Response:\n"
    at = section.find(marker)
    if at >= 0:
        yaml_text = textwrap.dedent(section[at + len(marker):])
    return ConversationTurn(utterance=match.group(1), reply_yaml=yaml_text)


class MockBackend:
    """Offline backend: recovers the inputs from the prompt and runs the grammar."""

    def __init__(
        self,
        timeout_s: float = DEFAULT_BACKEND_TIMEOUT_S,
        vocabulary: tuple[str, ...] = CANONICAL_LANDMARKS,
    ):
        self.timeout_s = timeout_s
        self.vocabulary = vocabulary

    def complete(self, prompt: str) -> str:
        if QUESTION_MARKER in prompt and ANSWER_MARKER in prompt:
            answer = _section(prompt, ANSWER_MARKER, _CLAR_TAIL_MARKER).strip()
            reply = mock_interpret(answer, vocabulary=self.vocabulary)
        else:
            utterance = _section(prompt, UTTERANCE_MARKER, HISTORY_MARKER).strip()
            history_text = _section(prompt, HISTORY_MARKER, _MAIN_TAIL_MARKER)
            history = _history_from_prompt(history_text)
            reply = mock_interpret(utterance, history=history, vocabulary=self.vocabulary)
        return render_raw_reply(reply)


def interpret(
    utterance: str,
    traj: Trajectory,
    lms: LandmarkSet,
    history: History,
    backend: InterpreterBackend,
    threshold: float = DEFAULT_PROXIMITY_THRESHOLD,
    templates: Optional[PromptTemplates] = None,
) -> InterpreterReply:
    """Full pipeline for one utterance; raises BackendError / ReplyFormatError."""
    if not utterance or not utterance.strip():
        raise ValueError("utterance must be nonempty")
    context = to_context_yaml(traj, lms, threshold)
    prompt = build_main_prompt(context, utterance, history.last, templates)
    started = time.perf_counter()
    raw = backend.complete(prompt)
    reply = extract_reply(raw)
    spec = restrict_landmarks(clamp_spec(reply.spec), lms.names())
    return InterpreterReply(
        spec=spec,
        feedback=reply.feedback,
        needs_clarification=reply.needs_clarification,
        latency_s=time.perf_counter() - started,
    )


def interpret_clarification(
    question: str,
    answer: str,
    traj: Trajectory,
    lms: LandmarkSet,
    backend: InterpreterBackend,
    threshold: float = DEFAULT_PROXIMITY_THRESHOLD,
    templates: Optional[PromptTemplates] = None,
) -> InterpreterReply:
    """Second-stage pipeline for the user's answer to a clarifying question."""
    context = to_context_yaml(traj, lms, threshold)
    prompt = build_clarification_prompt(question, answer, context, templates)
    started = time.perf_counter()
    raw = backend.complete(prompt)
    reply = extract_reply(raw)
    spec = restrict_landmarks(clamp_spec(reply.spec), lms.names())
    return InterpreterReply(
        spec=spec,
        feedback=reply.feedback,
        needs_clarification=reply.needs_clarification,
        latency_s=time.perf_counter() - started,
    )
