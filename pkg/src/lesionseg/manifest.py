"""Database manifests: which cases exist, their modalities, files and splits.

A manifest file is YAML with one entry per database::

    databases:
      - database_id: dbA
        modalities: [FLAIR, T1]
        cases:
          - case_id: c000
            split: train
            volumes: {FLAIR: dbA/c000/FLAIR.nii.gz, T1: dbA/c000/T1.nii.gz}
            label: dbA/c000/label.nii.gz

Volume and label paths are relative to the data root and default to the
``<database_id>/<case_id>/<MODALITY>.<ext>`` layout when omitted. Every
train case must provide all of its database's modalities plus a label;
eval cases may declare a modality subset for subset-inference experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import yaml

from .errors import ConfigError
from .registry import ModalitySet, normalize_modality_name

SPLITS = ("train", "eval")


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    split: str
    volumes: dict[str, str]
    label: str | None
    modalities: tuple[str, ...]  # modalities this case actually provides

    def volume_path(self, modality: str) -> str:
        try:
            return self.volumes[modality]
        except KeyError:
            raise ConfigError(
                f"case {self.case_id!r} has no volume for modality {modality!r}"
            ) from None


@dataclass
class DatabaseManifest:
    database_id: str
    modalities: ModalitySet
    cases: list[CaseRecord] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for case in self.cases:
            if case.case_id in seen:
                raise ConfigError(
                    f"database {self.database_id!r} lists case {case.case_id!r} twice"
                )
            seen.add(case.case_id)

    def train_cases(self) -> list[CaseRecord]:
        return [c for c in self.cases if c.split == "train"]

    def eval_cases(self) -> list[CaseRecord]:
        return [c for c in self.cases if c.split == "eval"]

    def case(self, case_id: str) -> CaseRecord:
        for c in self.cases:
            if c.case_id == case_id:
                return c
        raise ConfigError(f"database {self.database_id!r} has no case {case_id!r}")


def _default_volume_path(db_id: str, case_id: str, modality: str, ext: str) -> str:
    return f"{db_id}/{case_id}/{modality}.{ext}"


def _parse_case(raw: dict, db_id: str, db_modalities: Sequence[str], ext: str) -> CaseRecord:
    case_id = str(raw["case_id"])
    split = raw.get("split", "train")
    if split not in SPLITS:
        raise ConfigError(f"case {case_id!r}: split must be one of {SPLITS}, got {split!r}")
    declared = raw.get("modalities")
    if declared is None:
        modalities = tuple(db_modalities)
    else:
        modalities = tuple(normalize_modality_name(m) for m in declared)
        unknown = [m for m in modalities if m not in db_modalities]
        if unknown:
            raise ConfigError(
                f"case {case_id!r} declares modalities {unknown} outside its database set"
            )
    volumes_raw = {
        normalize_modality_name(k): v for k, v in (raw.get("volumes") or {}).items()
    }
    volumes = {
        m: volumes_raw.get(m, _default_volume_path(db_id, case_id, m, ext))
        for m in modalities
    }
    label = raw.get("label", f"{db_id}/{case_id}/label.{ext}")
    if split == "train":
        if set(modalities) != set(db_modalities):
            raise ConfigError(
                f"train case {case_id!r} must provide all modalities of {db_id!r}"
            )
        if label is None:
            raise ConfigError(f"train case {case_id!r} has no label")
    return CaseRecord(case_id, split, volumes, label, modalities)


def parse_manifests(doc: dict) -> list[DatabaseManifest]:
    """Build manifests from a parsed YAML document."""
    if not isinstance(doc, dict) or "databases" not in doc:
        raise ConfigError("manifest file must contain a top-level 'databases' list")
    manifests = []
    for entry in doc["databases"]:
        db_id = str(entry["database_id"])
        ext = entry.get("format", "nii.gz")
        names = tuple(normalize_modality_name(m) for m in entry.get("modalities", ()))
        modset = ModalitySet(db_id, names)
        cases = [_parse_case(c, db_id, names, ext) for c in entry.get("cases", [])]
        manifests.append(DatabaseManifest(db_id, modset, cases))
    if not manifests:
        raise ConfigError("manifest file declares no databases")
    return manifests


def load_manifests(path: str | Path) -> list[DatabaseManifest]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"manifest file not found: {path}")
    with open(path) as f:
        doc = yaml.safe_load(f)
    return parse_manifests(doc)


def manifests_to_doc(manifests: Iterable[DatabaseManifest]) -> dict:
    doc = {"databases": []}
    for m in manifests:
        doc["databases"].append(
            {
                "database_id": m.database_id,
                "modalities": list(m.modalities.present),
                "cases": [
                    {
                        "case_id": c.case_id,
                        "split": c.split,
                        "modalities": list(c.modalities),
                        "volumes": dict(c.volumes),
                        "label": c.label,
                    }
                    for c in m.cases
                ],
            }
        )
    return doc


def save_manifests(path: str | Path, manifests: Iterable[DatabaseManifest]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(manifests_to_doc(manifests), f, sort_keys=False)


def modality_sets(manifests: Iterable[DatabaseManifest]) -> list[ModalitySet]:
    return [m.modalities for m in manifests]
