"""Experiment configuration documents.

A config is a JSON object validated by the pydantic models below; the
complete grammar lives in ``docs/config.md``. Parsing happens in two passes:
pydantic checks shapes and fills defaults, then
[validate_references][gurevich_lab.config.validate_references] builds the
shift, group and labels to check that every cross-reference resolves.
"""
import json
import logging
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import pydantic
from gurevich_lab.exceptions import InputError, ParseError, ValidationError
from gurevich_lab.extension import SkewSystem, make_skew
from gurevich_lab.groups import Group, build_group, evaluate_word
from gurevich_lab.sft import Sft, new_sft
from gurevich_lab.thermo import EdgePotential
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

ExperimentKind = Literal[
    "entropy",
    "pressure",
    "gurevich",
    "abelian-min",
    "amenability-gap",
    "flow-count",
    "equidistribution",
    "ld",
    "transfer-bounds",
]

NEEDS_GROUP = {
    "gurevich",
    "abelian-min",
    "amenability-gap",
    "equidistribution",
    "ld",
    "transfer-bounds",
}

Word = List[int]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SystemConfig(_Model):
    alphabet_size: int = Field(..., ge=1)
    transitions: List[List[int]]


class PotentialConfig(_Model):
    """Edge function: a default, per-symbol values, and per-edge overrides."""

    default: Optional[float] = None
    vertex: Optional[List[float]] = None
    depends_on: Literal["source", "target"] = "source"
    edges: List[Tuple[int, int, float]] = Field(default_factory=list)


class GroupConfig(_Model):
    kind: Literal["lattice", "finite", "free", "heisenberg"]
    rank: int = Field(0, ge=0)
    table: Optional[List[List[int]]] = None
    identity: int = 0
    generators: Optional[List[Word]] = None


class LabelsConfig(_Model):
    """Edge labels as words in the generators (signed, 1-based)."""

    by: Literal["source", "target", "edge"] = "source"
    words: Optional[List[Word]] = None
    edges: List[Tuple[int, int, Word]] = Field(default_factory=list)


class ParamsConfig(_Model):
    n_max: int = Field(40, ge=1)
    T_max: int = Field(20, ge=1)
    tol: float = Field(1e-9, gt=0)
    ball_cap: int = Field(10**8, ge=1)
    depth: int = Field(6, ge=1)
    depth_cap: int = Field(64, ge=1)
    method: Literal["auto", "dp", "radial"] = "auto"
    verdict_tolerance: float = Field(0.05, gt=0)
    ns: List[int] = Field(default_factory=lambda: [12, 24])
    delta: float = Field(0.1, gt=0)
    radii: List[int] = Field(default_factory=lambda: [2, 4, 6, 8])


class OutputConfig(_Model):
    directory: str = "reports"
    format: Literal["json", "csv"] = "json"


class ExperimentConfig(_Model):
    name: str
    kind: ExperimentKind
    system: SystemConfig
    potential: Optional[PotentialConfig] = None
    roof: Optional[PotentialConfig] = None
    observable: Optional[PotentialConfig] = None
    group: Optional[GroupConfig] = None
    labels: Optional[LabelsConfig] = None
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def with_params(self, **changes: Any) -> "ExperimentConfig":
        return self.model_copy(update={"params": self.params.model_copy(update=changes)})


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config document.

    Raises:
        ParseError: When the text is not valid JSON (with its line number).
        ValidationError: When a field is malformed or a cross-reference
            (label edges, word indices, potential entries) does not resolve.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno)
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object", line=1)
    try:
        config = ExperimentConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        error = exc.errors()[0]
        key = ".".join(str(part) for part in error["loc"]) or "config"
        raise ValidationError(key, error["msg"])
    validate_references(config)
    return config


def render_config(config: ExperimentConfig) -> str:
    """Canonical rendering: sorted keys, two-space indent, trailing newline."""
    data = config.model_dump(mode="json", exclude_none=True)
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def load_config(path_or_name: Union[str, Path]) -> ExperimentConfig:
    """Read a config file, or a shipped config by bare name (``z_example``)."""
    path = Path(path_or_name)
    if path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        name = path.name if path.suffix == ".cfg" else f"{path.name}.cfg"
        shipped = resources.files("gurevich_lab") / "configs" / name
        if not shipped.is_file():
            raise ValidationError("config", f"no such file or shipped config: {path_or_name}")
        text = shipped.read_text(encoding="utf-8")
    return parse_config(text)


def shipped_configs() -> List[str]:
    folder = resources.files("gurevich_lab") / "configs"
    return sorted(
        entry.name[: -len(".cfg")]
        for entry in folder.iterdir()
        if entry.name.endswith(".cfg")
    )


def build_sft(config: ExperimentConfig) -> Sft:
    return new_sft(config.system.alphabet_size, config.system.transitions)


def build_potential(sft: Sft, potential: Optional[PotentialConfig]) -> Optional[EdgePotential]:
    """Edge potential from its description; ``None`` stays ``None``.

    Per-symbol ``vertex`` values (or the ``default``) fill every allowed
    transition first, then ``edges`` entries override single transitions.
    """
    if potential is None:
        return None
    if potential.vertex is None:
        return EdgePotential.from_triples(sft, potential.edges, potential.default)
    if len(potential.vertex) != sft.alphabet_size:
        raise InputError("vertex", f"expected {sft.alphabet_size} values")
    values = dict(
        EdgePotential.from_vertex_values(sft, potential.vertex, potential.depends_on).values
    )
    for i, j, value in potential.edges:
        if not sft.allows(i, j):
            raise InputError("edges", f"transition ({i}, {j}) is not allowed")
        values[(i, j)] = float(value)
    return EdgePotential(values)


def build_group_from(config: GroupConfig) -> Group:
    return build_group(
        config.kind,
        rank=config.rank,
        table=config.table,
        identity_index=config.identity,
        generator_words=config.generators,
    )


def build_skew(config: ExperimentConfig) -> Optional[SkewSystem]:
    """The extension described by ``group`` and ``labels`` (``None`` without a group)."""
    if config.group is None:
        return None
    sft = build_sft(config)
    group = build_group_from(config.group)
    labels_config = config.labels or LabelsConfig(by="edge")
    labels: Dict[Tuple[int, int], Any] = {}
    if labels_config.by in ("source", "target"):
        words = labels_config.words or []
        if len(words) != sft.alphabet_size:
            raise InputError("words", f"expected one word per symbol ({sft.alphabet_size})")
        index = 0 if labels_config.by == "source" else 1
        letters = [evaluate_word(group, word) for word in words]
        labels = {edge: letters[edge[index]] for edge in sft.edges}
    for i, j, word in labels_config.edges:
        labels[(i, j)] = evaluate_word(group, word)
    return make_skew(sft, group, labels)


def validate_references(config: ExperimentConfig) -> None:
    """Build every described object once, reporting failures by config key.

    Raises:
        ValidationError: Naming the section and key that failed.
    """
    section = "system"
    try:
        sft = build_sft(config)
        for section in ("potential", "roof", "observable"):
            potential = build_potential(sft, getattr(config, section))
            if section == "roof" and potential is not None and not potential.is_roof():
                raise InputError("values", "roof must be strictly positive")
        section = "group"
        if config.group is not None:
            build_group_from(config.group)
            section = "labels"
            build_skew(config)
    except InputError as exc:
        key = section if exc.key == section else f"{section}.{exc.key}"
        raise ValidationError(key, exc.msg)
    if config.kind in NEEDS_GROUP and config.group is None:
        raise ValidationError("group", f"experiment kind {config.kind!r} needs a group")
    if config.kind == "flow-count" and config.roof is None:
        raise ValidationError("roof", "flow-count experiments need a roof function")
    if config.kind == "ld" and config.observable is None:
        raise ValidationError("observable", "ld experiments need an observable")
    logger.debug("config %s validated", config.name)
