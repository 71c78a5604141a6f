import re
from pathlib import Path
from typing import Union

from pydantic import BaseModel, ConfigDict, field_validator

from pymskdx.core.enums import TemplateKind
from pymskdx.core.vocabulary import Vocabulary
from pymskdx.exceptions import EmptyImpressionError, PromptError
from pymskdx.utils.cache import text_digest

IMPRESSION_PLACEHOLDER = "{IMPRESSION}"
PATHOLOGIES_PLACEHOLDER = "{LIST OF PATHOLOGIES}"
_PLACEHOLDER_RE = re.compile(r"\{IMPRESSION\}|\{LIST OF PATHOLOGIES\}")

# Cuerpos byte-exactos; templates/*.txt guarda las copias de referencia.
TEACHER_LABELING_BODY = """\
You are a musculoskeletal radiologist reading the radiology impression below. Your task is to list \
only those pathologic conditions from the list of pathologies below that are explicitly mentioned \
in the radiology impression as either possible or definite. The pathology should be included \
strictly if it is specifically named in the report. Do not infer the presence or absence of a \
pathology that is not explicitly named in the report. If a pathology is not clearly mentioned, it \
should not be included in the output. If a pathology is specifically excluded with phrases such as \
"no fracture", or "without evidence of", or "no evidence of", or "without", or "within normal \
limits", please list that pathology as ABSENT. Present your answer in a CSV format with the columns \
PathologyID, PathologyName, and Word. Use 'DEFINITE' as the "Word" if the pathology is explicitly \
mentioned as confirmed present, and 'POSSIBLE' if the pathology is explicitly suggested as a \
possibility. If a pathology is explicitly excluded, list it as 'ABSENT'. Please explain your \
answers. BEGIN RADIOLOGY IMPRESSION {IMPRESSION} END RADIOLOGY IMPRESSION List of Pathologies: \
{LIST OF PATHOLOGIES}."""

FINE_TUNE_BODY = """\
You are a musculoskeletal radiologist. Your task is to list only those pathologic conditions from \
the list of pathologies that are explicitly mentioned in the radiology impression as either \
possible or definite. The pathology should be included strictly if it is specifically named in the \
report. Do not infer the presence or absence of a pathology that is not explicitly named in the \
report. If a pathology is not clearly mentioned, it should not be included in the output. If a \
pathology is specifically excluded with phrases such as "no fracture", or "without evidence of", or \
"no evidence of", or "without", or "within normal limits", please do not list that pathology. \
Present your answer in a comma-separated list of pathology names. Include the pathology name in the \
output list if it is explicitly mentioned as confirmed present, or if it is explicitly suggested as \
a possibility. If a pathology is explicitly excluded, exclude it from the output list. BEGIN \
RADIOLOGY IMPRESSION {IMPRESSION} END RADIOLOGY IMPRESSION.  Here is a List of Pathologies: {LIST \
OF PATHOLOGIES}."""


class PromptTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: TemplateKind
    body: str

    @field_validator("body")
    @classmethod
    def _placeholders_once(cls, body: str) -> str:
        for placeholder in (IMPRESSION_PLACEHOLDER, PATHOLOGIES_PLACEHOLDER):
            count = body.count(placeholder)
            if count != 1:
                raise ValueError(f"{placeholder} aparece {count} veces; se esperaba exactamente 1")
        return body


TEACHER_LABELING = PromptTemplate(kind=TemplateKind.TEACHER_LABELING, body=TEACHER_LABELING_BODY)
FINE_TUNE = PromptTemplate(kind=TemplateKind.FINE_TUNE, body=FINE_TUNE_BODY)


def template_for(kind: TemplateKind) -> PromptTemplate:
    return TEACHER_LABELING if kind is TemplateKind.TEACHER_LABELING else FINE_TUNE


def pathology_list(vocab: Vocabulary) -> str:
    """Nombres canónicos separados por ", " en orden de id."""
    return ", ".join(vocab.canonical_names())


def render(template: PromptTemplate, impression: str, vocab: Vocabulary) -> str:
    if not impression or not impression.strip():
        raise EmptyImpressionError("la impresión está vacía")

    replacements = {
        IMPRESSION_PLACEHOLDER: impression,
        PATHOLOGIES_PLACEHOLDER: pathology_list(vocab),
    }
    # Una sola pasada: el texto sustituido nunca se vuelve a escanear.
    return _PLACEHOLDER_RE.sub(lambda m: replacements[m.group(0)], template.body)


def template_digest(template: PromptTemplate) -> str:
    return text_digest(template.body)


def load_template_file(path: Union[str, Path], kind: TemplateKind) -> PromptTemplate:
    body = Path(path).read_bytes().decode("utf-8")
    try:
        return PromptTemplate(kind=kind, body=body)
    except ValueError as exc:
        raise PromptError(f"plantilla inválida en {path}: {exc}") from exc
