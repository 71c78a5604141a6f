# src/pymskdx/utils/normalizations.py
from typing import Final

# Apóstrofes y comillas tipográficas que los LLM y los editores suelen introducir.
TYPOGRAPHIC_QUOTES: Final[str] = "‘’‚‛′´ʼʹ`“”„‟"
_QUOTE_TABLE: Final = str.maketrans({ch: "'" for ch in TYPOGRAPHIC_QUOTES})


def normalize_name(raw: str) -> str:
    """
    Normaliza un nombre de patología para compararlo contra el vocabulario.

    Case-folding, comillas tipográficas -> apóstrofe ASCII, espacios colapsados
    y recortados. Idempotente.
    """
    folded = raw.casefold().translate(_QUOTE_TABLE)
    return " ".join(folded.split())


def normalize_token(raw: str) -> str:
    """Normaliza un elemento de lista separada por comas (quita un punto final)."""
    token = normalize_name(raw)
    if token.endswith("."):
        token = token[:-1].rstrip()
    return token
