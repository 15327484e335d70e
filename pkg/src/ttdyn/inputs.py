"""Loading and validating JSON inputs."""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from . import words as W
from .errors import ParseError, TtdynError, ValidationError
from .stallings import SubgroupSystem
from .trainmap import TopRep, validate


def corpus_path(name: str) -> Path:
    """Path of a file shipped in the package corpus."""
    return Path(str(resources.files("ttdyn") / "corpus" / name))


def resolve(path) -> Path:
    p = Path(path)
    if not p.exists() and not p.is_absolute():
        alt = corpus_path(p.name)
        if alt.exists():
            return alt
    return p


def file_hash(path) -> str:
    return hashlib.sha256(Path(resolve(path)).read_bytes()).hexdigest()


def load_json(path):
    p = resolve(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"{p}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def parse_toprep(data, check: bool = True) -> TopRep:
    try:
        f = TopRep.from_json(data)
    except TtdynError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed topological representative: {exc}") from exc
    unknown = set(data.get("edge_map", {})) - set(f.graph.edge_ids)
    if unknown:
        raise ValidationError(f"edge map references unknown edges {sorted(unknown)}")
    for eid, img in f.edge_map.items():
        try:
            W.check_word(img)
        except TtdynError as exc:
            raise ValidationError(f"image of {eid}: {exc}") from exc
        bad = {c.lower() for c in img} - set(f.graph.edge_ids)
        if bad:
            raise ValidationError(f"image of {eid} uses unknown edges {sorted(bad)}")
    if check:
        rep = validate(f)
        if not rep["valid"]:
            raise ValidationError("; ".join(rep["problems"]))
    return f


def load_toprep(path, check: bool = True) -> TopRep:
    f = parse_toprep(load_json(path), check)
    if not f.name:
        object.__setattr__(f, "name", Path(path).stem)
    return f


def parse_automorphism(data) -> W.BasisAutomorphism:
    try:
        if "images" in data:
            aut = W.BasisAutomorphism.from_json(data)
        else:
            aut = parse_toprep(data).to_automorphism()
    except TtdynError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed automorphism: {exc}") from exc
    try:
        W.invert(aut)
    except TtdynError as exc:
        raise ValidationError(str(exc)) from exc
    return aut


def load_automorphism(path) -> W.BasisAutomorphism:
    """An automorphism file, or the automorphism induced by a representative file."""
    return parse_automorphism(load_json(path))


def load_system(path) -> SubgroupSystem:
    data = load_json(path)
    try:
        return SubgroupSystem.from_json(data)
    except TtdynError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed subgroup system: {exc}") from exc
