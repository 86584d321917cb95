"""Loading and saving of the on-disk formats (YAML or JSON).

Formats are documented in ``docs/file-formats.md`` with JSON-Schema files
under ``docs/schemas/``.  Errors name the offending file and record so CLI
diagnostics stay actionable.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Optional

import yaml

from .modify import ApplyParams
from .trajectory import LandmarkSet, Trajectory, validate


class FileFormatError(ValueError):
    """Input file that does not match its documented schema."""


def _load_document(path: str | Path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise FileFormatError(f"{path}: not valid {'JSON' if path.suffix == '.json' else 'YAML'}: {exc}") from exc


def load_trajectory(path: str | Path) -> Trajectory:
    """Trajectory from a list of `{t, pos: [x,y,z], vel, force}` records."""
    doc = _load_document(path)
    if not isinstance(doc, list):
        raise FileFormatError(f"{path}: trajectory file must contain a list of waypoint records")
    try:
        traj = Trajectory.from_records(doc)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    violations = validate(traj)
    if violations:
        raise FileFormatError(f"{path}: " + "; ".join(violations))
    return traj


def save_trajectory(path: str | Path, traj: Trajectory) -> None:
    path = Path(path)
    records = traj.to_records()
    if path.suffix == ".json":
        path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    else:
        path.write_text(yaml.safe_dump(records, sort_keys=False), encoding="utf-8")


def load_landmarks(path: str | Path) -> LandmarkSet:
    """LandmarkSet from a `name -> [x, y, z]` mapping."""
    doc = _load_document(path)
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: landmark file must contain a name -> [x,y,z] mapping")
    try:
        return LandmarkSet.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def load_params(path: Optional[str | Path], base: Optional[ApplyParams] = None) -> ApplyParams:
    """ApplyParams with file overrides on top of the defaults (or ``base``)."""
    if path is None:
        return base or ApplyParams()
    doc = _load_document(path)
    if doc is None:
        return base or ApplyParams()
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: params file must contain a mapping")
    try:
        return ApplyParams.from_mapping(doc, base)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def load_replies(path: str | Path) -> dict[str, str]:
    """Scripted-backend reply map: utterance -> canned raw reply text."""
    doc = _load_document(path)
    if not isinstance(doc, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in doc.items()
    ):
        raise FileFormatError(f"{path}: replies file must map utterance strings to reply strings")
    return doc


def params_from_mapping(overrides: Optional[Mapping], base: Optional[ApplyParams] = None) -> ApplyParams:
    """ApplyParams from an in-memory override mapping (scenario/API payloads)."""
    if not overrides:
        return base or ApplyParams()
    return ApplyParams.from_mapping(overrides, base)
