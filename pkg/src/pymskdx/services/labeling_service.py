# src/pymskdx/services/labeling_service.py
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

from pymskdx.config.settings import config
from pymskdx.core.enums import Provenance, VoteMode
from pymskdx.core.gateway import BatchItem, LlmBackend, is_failure
from pymskdx.core.models import CompletionRequest, LabelSet, ReportRecord, RunRecord
from pymskdx.core.parser import assertions_to_label_set, parse_teacher_csv_detailed
from pymskdx.core.prompts import TEACHER_LABELING, render
from pymskdx.core.vocabulary import Vocabulary
from pymskdx.core.voting import group_runs, hallucination_tally, majority_vote
from pymskdx.exceptions import NoCsvFoundError
from pymskdx.utils.logger import get_logger


@dataclass
class LabelingOutcome:
    """Resultado de etiquetar un lote: conjuntos votados, corridas crudas y fallos por reporte."""

    label_sets: List[LabelSet] = field(default_factory=list)
    runs: List[RunRecord] = field(default_factory=list)
    failures: Dict[str, str] = field(default_factory=dict)
    unparsable_runs: int = 0
    malformed_rows: int = 0

    @property
    def n_labeled(self) -> int:
        return len(self.label_sets)

    @property
    def all_failed(self) -> bool:
        return bool(self.failures) and not self.label_sets


class LabelingService:
    """
    Etiquetado con el modelo profesor: prompt → N corridas → parseo → votación.

    Una corrida cuya respuesta no trae la tabla CSV cuenta como conjunto vacío;
    un fallo del backend en cualquiera de las corridas invalida el reporte.
    """

    def __init__(
            self,
            vocab: Vocabulary,
            backend: LlmBackend,
            runs_per_report: Optional[int] = None,
            temperature: Optional[float] = None,
            vote_mode: Optional[Union[VoteMode, str]] = None,
            max_in_flight: Optional[int] = None,
            model_name: Optional[str] = None,
    ):
        self.logger = get_logger(classname="LabelingService")
        self.vocab = vocab
        self.backend = backend
        self.runs_per_report = runs_per_report if runs_per_report is not None else config.RUNS_PER_REPORT
        self.temperature = temperature if temperature is not None else config.TEMPERATURE
        vote_mode = vote_mode if vote_mode is not None else config.VOTE_MODE
        self.vote_mode = vote_mode if isinstance(vote_mode, VoteMode) else VoteMode.from_text(vote_mode)
        self.max_in_flight = max_in_flight
        self.model_name = model_name or config.MODEL_NAME

    def build_requests(self, report: ReportRecord) -> List[CompletionRequest]:
        prompt = render(TEACHER_LABELING, report.impression, self.vocab)
        return [
            CompletionRequest(
                model_name=self.model_name,
                prompt=prompt,
                temperature=self.temperature,
                max_tokens=config.MAX_TOKENS,
                run_index=run_index,
                runs_per_report=self.runs_per_report,
                report_id=report.report_id,
            )
            for run_index in range(self.runs_per_report)
        ]

    def label_reports(self, reports: Sequence[ReportRecord]) -> LabelingOutcome:
        outcome = LabelingOutcome()
        if not reports:
            return outcome

        requests_ = [req for report in reports for req in self.build_requests(report)]
        self.logger.info(
            f"Etiquetando {len(reports)} reportes ({self.runs_per_report} corridas, T={self.temperature})"
        )
        results = self.backend.complete_batch(requests_, max_in_flight=self.max_in_flight)

        n = self.runs_per_report
        for position, report in enumerate(reports):
            self._collect(report, results[position * n:(position + 1) * n], outcome)

        self.logger.info(f"Reportes etiquetados: {outcome.n_labeled}, fallidos: {len(outcome.failures)}")
        if outcome.unparsable_runs:
            self.logger.warning(f"Corridas sin tabla CSV (contadas como vacías): {outcome.unparsable_runs}")
        tally = hallucination_tally(run.to_run_output() for run in outcome.runs)
        if tally:
            self.logger.info(f"Nombres fuera de vocabulario: {tally}")
        return outcome

    def revote(self, runs: Sequence[RunRecord], mode: Optional[VoteMode] = None) -> List[LabelSet]:
        """Vuelve a votar corridas persistidas, sin consultar al backend."""
        mode = mode or self.vote_mode
        grouped = group_runs(run.to_run_output() for run in runs)
        return [majority_vote(report_runs, mode) for report_runs in grouped.values()]

    # -------------------------------------------------
    #                METODOS PRIVADOS                 #
    # -------------------------------------------------

    def _collect(self, report: ReportRecord, results: Sequence[BatchItem], outcome: LabelingOutcome) -> None:
        failed = [item for item in results if is_failure(item)]
        if failed:
            outcome.failures[report.report_id] = str(failed[0])
            self.logger.warning(f"Reporte {report.report_id} sin etiquetar: {failed[0]}")
            return

        records = []
        for run_index, result in enumerate(results):
            label_set = self._parse_run(report.report_id, result.raw_text, outcome)
            records.append(RunRecord(
                report_id=report.report_id,
                run_index=run_index,
                raw_text=result.raw_text,
                attempt_count=result.attempt_count,
                labels=label_set.labels,
                oov=label_set.oov_names,
            ))

        outcome.runs.extend(records)
        outcome.label_sets.append(majority_vote([r.to_run_output() for r in records], self.vote_mode))

    def _parse_run(self, report_id: str, raw_text: str, outcome: LabelingOutcome) -> LabelSet:
        try:
            reply = parse_teacher_csv_detailed(raw_text, self.vocab)
        except NoCsvFoundError:
            outcome.unparsable_runs += 1
            self.logger.debug(f"Respuesta sin CSV para {report_id}")
            return LabelSet(report_id=report_id, provenance=Provenance.MODEL_PREDICTION)
        outcome.malformed_rows += len(reply.malformed)
        return assertions_to_label_set(reply.assertions, report_id)
