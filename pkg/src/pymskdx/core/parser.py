import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from pymskdx.core.enums import AssertionStatus, Provenance
from pymskdx.core.models import Assertion, LabelSet
from pymskdx.core.vocabulary import Vocabulary
from pymskdx.exceptions import MalformedRowError, NoCsvFoundError
from pymskdx.utils.logger import get_logger
from pymskdx.utils.normalizations import normalize_name, normalize_token

logger = get_logger(classname="Parser")

HEADER_RE = re.compile(r"^\s*pathologyid\s*,\s*pathologyname\s*,\s*word\s*$", re.IGNORECASE)
NONE_TOKEN = "none"
_NAME_STRIP = "\"'*` "


@dataclass(frozen=True)
class TeacherReply:
    """Resultado detallado de interpretar una respuesta CSV del profesor."""
    assertions: List[Assertion] = field(default_factory=list)
    malformed: List[MalformedRowError] = field(default_factory=list)
    header_line: Optional[int] = None


def _split_row(line: str) -> Optional[List[str]]:
    fields = line.split(",")
    if len(fields) != 3 or AssertionStatus.from_text(fields[2]) is None:
        return None
    return fields


def _reported_id(raw: str) -> Optional[int]:
    cleaned = raw.strip().strip(_NAME_STRIP)
    return int(cleaned) if cleaned.isdigit() else None


def parse_teacher_csv_detailed(raw: str, vocab: Vocabulary) -> TeacherReply:
    """
    Localiza la región CSV anclada en la cabecera ``PathologyID,PathologyName,Word``.

    La región va desde la cabecera hasta la última fila válida (3 campos y
    estado reconocido); las líneas inválidas intermedias se reportan como
    MalformedRowError sin abortar. El nombre manda sobre el id reportado.
    """
    lines = raw.splitlines()
    header = next((i for i, line in enumerate(lines) if HEADER_RE.match(line)), None)
    if header is None:
        raise NoCsvFoundError("no se encontró la cabecera PathologyID,PathologyName,Word")

    last_valid = header
    for i in range(header + 1, len(lines)):
        if _split_row(lines[i]) is not None:
            last_valid = i

    assertions: List[Assertion] = []
    malformed: List[MalformedRowError] = []
    for i in range(header + 1, last_valid + 1):
        line = lines[i]
        if not line.strip():
            continue
        fields = _split_row(line)
        if fields is None:
            reason = "se esperaban 3 campos" if len(line.split(",")) != 3 else "estado desconocido"
            malformed.append(MalformedRowError(i + 1, line, reason))
            continue

        surface = " ".join(fields[1].strip().strip(_NAME_STRIP).split())
        entry = vocab.get(surface)
        assertions.append(Assertion(
            pathology_id=entry.id if entry else None,
            surface_name=surface,
            status=AssertionStatus.from_text(fields[2]),
            reported_id=_reported_id(fields[0]),
        ))

    for error in malformed:
        logger.warning(str(error))
    return TeacherReply(assertions=assertions, malformed=malformed, header_line=header + 1)


def parse_teacher_csv(raw: str, vocab: Vocabulary) -> List[Assertion]:
    return parse_teacher_csv_detailed(raw, vocab).assertions


def parse_student_list(raw: str, vocab: Vocabulary, report_id: str = "") -> LabelSet:
    """Interpreta la primera línea no vacía como lista de nombres separados por comas."""
    first = next((line for line in raw.splitlines() if line.strip()), "")

    labels: List[int] = []
    oov: List[str] = []
    for token in first.split(","):
        name = normalize_token(token)
        if not name or name == NONE_TOKEN:
            continue
        entry = vocab.get(name)
        if entry is None:
            oov.append(name)
        else:
            labels.append(entry.id)

    return LabelSet(report_id=report_id, labels=labels, oov_names=oov, provenance=Provenance.MODEL_PREDICTION)


def assertions_to_label_set(
        assertions: Iterable[Assertion],
        report_id: str,
        provenance: Provenance = Provenance.MODEL_PREDICTION,
) -> LabelSet:
    labels: List[int] = []
    oov: List[str] = []
    for assertion in assertions:
        if not assertion.status.is_positive:
            continue
        if assertion.is_oov:
            oov.append(normalize_name(assertion.surface_name))
        else:
            labels.append(assertion.pathology_id)
    return LabelSet(report_id=report_id, labels=labels, oov_names=oov, provenance=provenance)
