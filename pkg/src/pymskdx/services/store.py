# src/pymskdx/services/store.py
import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from pymskdx.core.enums import Provenance
from pymskdx.core.models import (FineTunePair, LabelSet, ReportRecord, RunManifest, RunRecord, SplitAssignment,
                                 SplitQuality)
from pymskdx.core.parser import parse_student_list
from pymskdx.core.prompts import FINE_TUNE, render
from pymskdx.core.vocabulary import Vocabulary
from pymskdx.exceptions import (DuplicateIdError, InvalidRecordError, MalformedJsonError, MissingFieldError,
                                MissingLabelsError)
from pymskdx.utils.cache import file_digest
from pymskdx.utils.logger import get_logger

logger = get_logger(classname="Store")

PathLike = Union[str, Path]
EMPTY_COMPLETION = "None"
REPORT_FIELDS = ("report_id", "modality", "impression")
PART_FILENAMES = {0: "train.jsonl", 1: "validation.jsonl"}


# -------------------------------------------------
#                  JSONL genérico                  #
# -------------------------------------------------

def iter_jsonl(path: PathLike) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """(número de línea, objeto) por cada línea no vacía."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedJsonError(f"JSON inválido: {exc.msg}", line_no=line_no) from exc
            if not isinstance(record, dict):
                raise InvalidRecordError("se esperaba un objeto JSON", line_no=line_no)
            yield line_no, record


def write_jsonl(path: PathLike, rows: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
    return path


def _require(record: Dict[str, Any], fields: Sequence[str], line_no: int) -> None:
    for name in fields:
        if name not in record:
            raise MissingFieldError(f"falta el campo {name!r}", line_no=line_no, report_id=record.get("report_id"))


def _check_unique(report_id: str, seen: Dict[str, int], line_no: int) -> None:
    if report_id in seen:
        raise DuplicateIdError(f"report_id {report_id!r} repetido (primera aparición en línea {seen[report_id]})",
                               line_no=line_no, report_id=report_id)
    seen[report_id] = line_no


# -------------------------------------------------
#                     Corpus                      #
# -------------------------------------------------

def ingest_reports(path: PathLike) -> List[ReportRecord]:
    records: List[ReportRecord] = []
    seen: Dict[str, int] = {}
    for line_no, raw in iter_jsonl(path):
        _require(raw, REPORT_FIELDS, line_no)
        try:
            record = ReportRecord.model_validate(raw)
        except ValidationError as exc:
            raise InvalidRecordError(f"registro inválido: {exc.errors()[0]['msg']}", line_no=line_no,
                                     report_id=raw.get("report_id")) from exc
        _check_unique(record.report_id, seen, line_no)
        records.append(record)
    logger.info(f"Corpus leído de {Path(path).name}: {len(records)} reportes")
    return records


def write_reports(records: Iterable[ReportRecord], path: PathLike) -> Path:
    return write_jsonl(path, (
        {"report_id": r.report_id, "modality": r.modality.value, "anatomy": r.anatomy, "impression": r.impression}
        for r in records
    ))


# -------------------------------------------------
#                Etiquetas y corridas             #
# -------------------------------------------------

def read_labels(path: PathLike, default_provenance: Provenance = Provenance.GOLD) -> Dict[str, LabelSet]:
    labels: Dict[str, LabelSet] = {}
    seen: Dict[str, int] = {}
    for line_no, raw in iter_jsonl(path):
        _require(raw, ("report_id", "labels"), line_no)
        _check_unique(str(raw["report_id"]), seen, line_no)
        try:
            labels[raw["report_id"]] = LabelSet(
                report_id=raw["report_id"],
                labels=raw["labels"],
                oov_names=raw.get("oov", []),
                provenance=raw.get("provenance", default_provenance),
            )
        except (ValidationError, TypeError) as exc:
            raise InvalidRecordError(f"etiquetas inválidas: {exc}", line_no=line_no,
                                     report_id=raw.get("report_id")) from exc
    return labels


def write_labels(label_sets: Iterable[LabelSet], path: PathLike) -> Path:
    return write_jsonl(path, (
        {"report_id": ls.report_id, "labels": list(ls.labels), "oov": list(ls.oov_names),
         "provenance": ls.provenance.value}
        for ls in label_sets
    ))


def read_raw_predictions(path: PathLike, vocab: Vocabulary) -> Dict[str, LabelSet]:
    """Salidas crudas del modelo estudiante (``{"report_id", "output"}``) interpretadas como listas."""
    predictions: Dict[str, LabelSet] = {}
    seen: Dict[str, int] = {}
    for line_no, raw in iter_jsonl(path):
        _require(raw, ("report_id", "output"), line_no)
        report_id = str(raw["report_id"])
        _check_unique(report_id, seen, line_no)
        predictions[report_id] = parse_student_list(str(raw["output"]), vocab, report_id=report_id)
    return predictions


def read_runs(path: PathLike) -> List[RunRecord]:
    runs: List[RunRecord] = []
    for line_no, raw in iter_jsonl(path):
        _require(raw, ("report_id", "run_index", "raw_text"), line_no)
        try:
            runs.append(RunRecord.model_validate(raw))
        except ValidationError as exc:
            raise InvalidRecordError(f"corrida inválida: {exc.errors()[0]['msg']}", line_no=line_no,
                                     report_id=raw.get("report_id")) from exc
    return runs


def write_runs(runs: Iterable[RunRecord], path: PathLike) -> Path:
    return write_jsonl(path, (
        {"report_id": r.report_id, "run_index": r.run_index, "raw_text": r.raw_text,
         "labels": list(r.labels), "oov": list(r.oov), "attempt_count": r.attempt_count}
        for r in runs
    ))


# -------------------------------------------------
#                    Partición                    #
# -------------------------------------------------

def write_assignment(assignment: SplitAssignment, path: PathLike) -> Path:
    return write_jsonl(path, ({"report_id": rid, "part": part} for rid, part in assignment.parts.items()))


def read_assignment(path: PathLike) -> SplitAssignment:
    parts: Dict[str, int] = {}
    seen: Dict[str, int] = {}
    for line_no, raw in iter_jsonl(path):
        _require(raw, ("report_id", "part"), line_no)
        _check_unique(str(raw["report_id"]), seen, line_no)
        if not isinstance(raw["part"], int) or raw["part"] < 0:
            raise InvalidRecordError("part debe ser un entero no negativo", line_no=line_no,
                                     report_id=raw["report_id"])
        parts[str(raw["report_id"])] = raw["part"]
    n_parts = max(2, max(parts.values(), default=0) + 1)
    return SplitAssignment(parts=parts, n_parts=n_parts)


def write_quality(quality: SplitQuality, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(quality.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


# -------------------------------------------------
#                Dataset de fine-tune             #
# -------------------------------------------------

def completion_for(label_set: LabelSet, vocab: Vocabulary) -> str:
    """Nombres canónicos en orden alfabético separados por ", "; "None" si no hay etiquetas."""
    names = vocab.names_for(label_set)
    return ", ".join(names) if names else EMPTY_COMPLETION


def emit_finetune_pairs(
        reports: Sequence[ReportRecord],
        labels: Mapping[str, LabelSet],
        vocab: Vocabulary,
) -> List[FineTunePair]:
    pairs: List[FineTunePair] = []
    for report in reports:
        label_set = labels.get(report.report_id)
        if label_set is None:
            raise MissingLabelsError(f"sin etiquetas votadas para {report.report_id}", report_id=report.report_id)
        pairs.append(FineTunePair(prompt=render(FINE_TUNE, report.impression, vocab),
                                  completion=completion_for(label_set, vocab)))
    return pairs


def write_finetune(pairs: Iterable[FineTunePair], path: PathLike) -> Path:
    return write_jsonl(path, ({"prompt": p.prompt, "completion": p.completion} for p in pairs))


def write_finetune_parts(
        reports: Sequence[ReportRecord],
        pairs: Sequence[FineTunePair],
        assignment: SplitAssignment,
        out_dir: PathLike,
) -> Dict[int, Path]:
    """Un archivo por parte: 0 → train.jsonl, 1 → validation.jsonl, resto → part_<i>.jsonl."""
    grouped: Dict[int, List[FineTunePair]] = {}
    for report, pair in zip(reports, pairs):
        part = assignment.parts.get(report.report_id)
        if part is None:
            raise MissingLabelsError(f"{report.report_id} no figura en la asignación", report_id=report.report_id)
        grouped.setdefault(part, []).append(pair)

    out_dir = Path(out_dir)
    written = {}
    for part in range(assignment.n_parts):
        filename = PART_FILENAMES.get(part, f"part_{part}.jsonl")
        written[part] = write_finetune(grouped.get(part, []), out_dir / filename)
    return written


# -------------------------------------------------
#                    Manifiesto                   #
# -------------------------------------------------

def output_digests(outputs: Iterable[PathLike]) -> Dict[str, str]:
    return {Path(p).name: file_digest(p) for p in outputs}


def write_manifest(manifest: RunManifest, path: PathLike, outputs: Iterable[PathLike] = ()) -> Path:
    """Escribe el manifiesto con los sha256 de ``outputs`` (por nombre de archivo)."""
    path = Path(path)
    digests = dict(manifest.outputs)
    digests.update(output_digests(outputs))
    final = manifest.model_copy(update={"outputs": dict(sorted(digests.items()))})
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(final.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Manifiesto escrito en {path} ({len(final.outputs)} salidas)")
    return path


def read_manifest(path: PathLike) -> RunManifest:
    try:
        return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise InvalidRecordError(f"manifiesto inválido: {exc}") from exc


def verify_manifest(path: PathLike, base_dir: Optional[PathLike] = None) -> Dict[str, bool]:
    """Recalcula los digests de las salidas (relativas al directorio del manifiesto)."""
    manifest = read_manifest(path)
    base = Path(base_dir) if base_dir is not None else Path(path).parent
    results = {}
    for name, digest in manifest.outputs.items():
        target = base / name
        results[name] = target.exists() and file_digest(target) == digest
    return results
