from __future__ import annotations

import enum


class Label(str, enum.Enum):
    """Defect class; true defects map to +1 in the SVM, pseudo defects to -1."""

    TRUE = "true"
    PSEUDO = "pseudo"

    @property
    def sign(self) -> int:
        return 1 if self is Label.TRUE else -1

    @classmethod
    def from_sign(cls, s: float) -> "Label":
        # y(x) == 0 goes to TRUE: an escaped true defect costs more than a re-inspection
        return cls.TRUE if s >= 0 else cls.PSEUDO


LABEL_MAP = {Label.TRUE.value: 1, Label.PSEUDO.value: -1}
