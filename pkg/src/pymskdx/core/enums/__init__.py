from enum import Enum
from typing import Optional


class AssertionStatus(str, Enum):
    DEFINITE = "DEFINITE"
    POSSIBLE = "POSSIBLE"
    ABSENT = "ABSENT"

    @classmethod
    def from_text(cls, text: str) -> Optional["AssertionStatus"]:
        """Interpreta la columna Word; None si no es una de las tres palabras."""
        cleaned = text.strip().strip("\"'*.`").strip().upper()
        try:
            return cls(cleaned)
        except ValueError:
            return None

    @property
    def is_positive(self) -> bool:
        return self is not AssertionStatus.ABSENT


class Provenance(str, Enum):
    TEACHER_VOTE = "teacher_vote"
    GOLD = "gold"
    MODEL_PREDICTION = "model_prediction"


class Modality(str, Enum):
    CR = "CR"
    CT = "CT"
    MR = "MR"
    US = "US"
    OTHER = "other"

    @classmethod
    def from_text(cls, text: Optional[str]) -> "Modality":
        if not text:
            return cls.OTHER
        mapping = {
            "CR": cls.CR, "XR": cls.CR, "X-RAY": cls.CR, "DX": cls.CR, "RADIOGRAPH": cls.CR,
            "CT": cls.CT,
            "MR": cls.MR, "MRI": cls.MR,
            "US": cls.US, "ULTRASOUND": cls.US,
        }
        return mapping.get(text.strip().upper(), cls.OTHER)


class VoteMode(str, Enum):
    SET_LEVEL = "set_level"
    PER_LABEL = "per_label"

    @classmethod
    def from_text(cls, text: str) -> "VoteMode":
        mapping = {
            "set": cls.SET_LEVEL,
            "set_level": cls.SET_LEVEL,
            "per-label": cls.PER_LABEL,
            "per_label": cls.PER_LABEL,
        }
        try:
            return mapping[text.strip().lower()]
        except KeyError:
            raise ValueError(f"Modo de votación no soportado: {text}") from None


class SplitOrder(str, Enum):
    FIRST_ORDER = "first_order"
    SECOND_ORDER = "second_order"

    @classmethod
    def from_text(cls, text: str) -> "SplitOrder":
        mapping = {
            "first": cls.FIRST_ORDER,
            "first_order": cls.FIRST_ORDER,
            "second": cls.SECOND_ORDER,
            "second_order": cls.SECOND_ORDER,
        }
        try:
            return mapping[text.strip().lower()]
        except KeyError:
            raise ValueError(f"Orden de estratificación no soportado: {text}") from None


class TemplateKind(str, Enum):
    TEACHER_LABELING = "teacher_labeling"
    FINE_TUNE = "fine_tune"


class MacroScope(str, Enum):
    SUPPORTED = "supported"
    UNION = "union"
