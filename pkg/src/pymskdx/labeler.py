# src/pymskdx/labeler.py
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from pymskdx import __version__
from pymskdx.core.enums import VoteMode
from pymskdx.core.gateway import LlmBackend, backend_identity, create_backend
from pymskdx.core.models import LabelSet, ReportRecord, RunManifest, RunRecord
from pymskdx.core.prompts import FINE_TUNE, TEACHER_LABELING, template_digest
from pymskdx.core.vocabulary import Vocabulary, configured_vocabulary
from pymskdx.exceptions import MskDxError, NetworkError
from pymskdx.services import store
from pymskdx.services.labeling_service import LabelingOutcome, LabelingService
from pymskdx.utils.cache import file_digest
from pymskdx.utils.logger import get_logger

LABELS_FILE = "labels.jsonl"
RUNS_FILE = "runs.jsonl"
MANIFEST_FILE = "manifest.json"


class TeacherLabeler:
    """
    Fachada del etiquetado con modelo profesor.
    Orquesta el backend (LlmBackend), el servicio de etiquetado y la persistencia.
    """

    def __init__(self,
                 vocab: Optional[Vocabulary] = None,
                 backend: Optional[LlmBackend] = None,
                 backend_kind: Optional[str] = None,
                 runs_per_report: Optional[int] = None,
                 temperature: Optional[float] = None,
                 vote_mode: Optional[Union[VoteMode, str]] = None,
                 max_in_flight: Optional[int] = None):

        self.logger = get_logger(classname="TeacherLabeler")
        self.vocab = vocab if vocab is not None else configured_vocabulary()
        self.backend = backend if backend is not None else create_backend(backend_kind, self.vocab)
        self.service = LabelingService(
            vocab=self.vocab,
            backend=self.backend,
            runs_per_report=runs_per_report,
            temperature=temperature,
            vote_mode=vote_mode,
            max_in_flight=max_in_flight,
        )

    def label(self, reports: Sequence[ReportRecord]) -> LabelingOutcome:
        try:
            return self.service.label_reports(reports)
        except MskDxError:
            raise
        except Exception as e:
            self.logger.error(f"Error inesperado al etiquetar: {e}")
            raise NetworkError(f"Error al etiquetar: {e}") from e

    def revote(self, runs: Sequence[RunRecord], mode: Optional[Union[VoteMode, str]] = None) -> List[LabelSet]:
        if isinstance(mode, str):
            mode = VoteMode.from_text(mode)
        return self.service.revote(runs, mode)

    def label_file(self, corpus: Union[str, Path], out_dir: Union[str, Path]) -> LabelingOutcome:
        """Etiqueta un corpus JSONL y deja labels.jsonl, runs.jsonl y manifest.json en ``out_dir``."""
        out_dir = Path(out_dir)
        reports = store.ingest_reports(corpus)
        outcome = self.label(reports)

        labels_path = store.write_labels(outcome.label_sets, out_dir / LABELS_FILE)
        runs_path = store.write_runs(outcome.runs, out_dir / RUNS_FILE)
        store.write_manifest(
            self.manifest("label", inputs={"corpus": corpus}),
            out_dir / MANIFEST_FILE,
            outputs=[labels_path, runs_path],
        )
        return outcome

    def _seeds(self) -> Dict[str, int]:
        seed = getattr(self.backend, "seed", None)
        return {"backend": seed} if seed is not None else {}

    def manifest(self, command: str, inputs: Optional[Dict[str, Union[str, Path]]] = None) -> RunManifest:
        return RunManifest(
            tool_version=__version__,
            command=command,
            template_hashes={
                TEACHER_LABELING.kind.value: template_digest(TEACHER_LABELING),
                FINE_TUNE.kind.value: template_digest(FINE_TUNE),
            },
            vocabulary_hash=self.vocab.digest(),
            backend=backend_identity(self.backend),
            seeds=self._seeds(),
            vote_mode=self.service.vote_mode,
            runs_per_report=self.service.runs_per_report,
            temperature=self.service.temperature,
            inputs=input_digests(inputs or {}),
        )


def input_digests(inputs: Dict[str, Union[str, Path]]) -> Dict[str, str]:
    return {name: file_digest(path) for name, path in sorted(inputs.items())}


def label_corpus(reports: Iterable[ReportRecord], **kwargs) -> List[LabelSet]:
    """Atajo: etiqueta ``reports`` con la configuración por defecto y devuelve los conjuntos votados."""
    return TeacherLabeler(**kwargs).label(list(reports)).label_sets
