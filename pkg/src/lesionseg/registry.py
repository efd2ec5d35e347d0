"""Global modality vocabulary and channel assignment.

Every model in this package takes a fixed multi-channel input whose width
equals the number of unique modalities across all training databases.
The registry owns that vocabulary and the name -> channel mapping; channel
semantics are positional, so the ordering is persisted with every
checkpoint and never silently reordered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import RegistryError

# Channel order used for the seven well-known MRI contrasts. Any modality
# outside this list is appended in first-appearance order.
CANONICAL_MODALITIES = ("PD", "FLAIR", "SWI", "T1", "T1c", "T2", "DWI")

# Spelling normalization applied at manifest-load time only; the registry
# itself treats names as case-sensitive exact strings.
_NAME_ALIASES = {
    "pd": "PD",
    "flair": "FLAIR",
    "swi": "SWI",
    "t1": "T1",
    "t1c": "T1c",
    "t1ce": "T1c",
    "t1gd": "T1c",
    "t2": "T2",
    "dwi": "DWI",
}


def normalize_modality_name(name: str) -> str:
    """Map common spelling variants (``t1``, ``T1CE``) onto canonical names.

    Unknown names are passed through unchanged.
    """
    return _NAME_ALIASES.get(name.strip().lower(), name.strip())


@dataclass(frozen=True)
class ModalitySet:
    """The modalities one database provides."""

    database_id: str
    present: tuple[str, ...]

    def __post_init__(self):
        if not self.present:
            raise RegistryError(f"database {self.database_id!r} declares no modalities")
        if len(set(self.present)) != len(self.present):
            raise RegistryError(f"database {self.database_id!r} declares duplicate modalities")

    def __len__(self) -> int:
        return len(self.present)


@dataclass(frozen=True)
class ModalityRegistry:
    """Ordered modality vocabulary; immutable after construction."""

    modalities: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if len(set(self.modalities)) != len(self.modalities):
            raise RegistryError("registry modalities must be unique")
        if not self.modalities:
            raise RegistryError("registry must contain at least one modality")
        object.__setattr__(self, "index", {m: i for i, m in enumerate(self.modalities)})

    @property
    def num_channels(self) -> int:
        return len(self.modalities)

    def __len__(self) -> int:
        return len(self.modalities)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def channel_of(self, name: str) -> int:
        """Return the stable 0-based input channel for a modality name."""
        try:
            return self.index[name]
        except KeyError:
            raise RegistryError(
                f"unknown modality {name!r}; registry has {list(self.modalities)}"
            ) from None

    def channels_of(self, names: Iterable[str]) -> list[int]:
        return [self.channel_of(n) for n in names]

    def to_list(self) -> list[str]:
        """Serializable form: the ordered name list."""
        return list(self.modalities)

    @classmethod
    def from_list(cls, names: Sequence[str]) -> "ModalityRegistry":
        return cls(tuple(names))


def build_registry(modality_sets: Sequence[ModalitySet]) -> ModalityRegistry:
    """Build the registry from all databases' modality declarations.

    The vocabulary is the union of all declared modalities. Well-known
    contrasts sort in canonical order; anything else is appended in the
    order it first appears across the declarations. Rebuilding from the
    same declarations always yields an identical index map.
    """
    if not modality_sets:
        raise RegistryError("cannot build a registry from an empty manifest list")
    seen: list[str] = []
    for ms in modality_sets:
        for name in ms.present:
            if name not in seen:
                seen.append(name)
    canonical = [m for m in CANONICAL_MODALITIES if m in seen]
    extra = [m for m in seen if m not in CANONICAL_MODALITIES]
    return ModalityRegistry(tuple(canonical + extra))
