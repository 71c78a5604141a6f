from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pymskdx.core.enums import AssertionStatus, Modality, Provenance, SplitOrder, VoteMode


# --- Vocabulario ---

class PathologyEntry(BaseModel):
    """Una de las patologías canónicas del vocabulario."""
    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=1)
    canonical_name: str = Field(min_length=1)
    category: str = Field(min_length=1)
    aliases: FrozenSet[str] = frozenset()


# --- Corpus ---

class ReportRecord(BaseModel):
    """Impresión radiológica (unidad del corpus); se asume des-identificada."""
    model_config = ConfigDict(frozen=True)

    report_id: str = Field(min_length=1)
    modality: Modality = Modality.OTHER
    anatomy: Optional[str] = None
    impression: str

    @field_validator("modality", mode="before")
    @classmethod
    def _coerce_modality(cls, value: Any) -> Modality:
        if isinstance(value, Modality):
            return value
        return Modality.from_text(value)

    @field_validator("impression")
    @classmethod
    def _impression_not_empty(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("la impresión está vacía")
        return value


# --- Salidas del LLM ---

class Assertion(BaseModel):
    """Fila interpretada de la respuesta CSV del modelo profesor."""
    model_config = ConfigDict(frozen=True)

    pathology_id: Optional[int] = None  # None = fuera de vocabulario
    surface_name: str
    status: AssertionStatus
    reported_id: Optional[int] = None

    @property
    def is_oov(self) -> bool:
        return self.pathology_id is None


class LabelSet(BaseModel):
    """Conjunto de etiquetas de un reporte (votado, gold o predicho)."""
    model_config = ConfigDict(frozen=True)

    report_id: str
    labels: Tuple[int, ...] = ()
    oov_names: Tuple[str, ...] = ()
    provenance: Provenance = Provenance.MODEL_PREDICTION

    @field_validator("labels", mode="before")
    @classmethod
    def _sorted_unique(cls, value: Any) -> Tuple[int, ...]:
        return tuple(sorted(set(value)))

    @field_validator("oov_names", mode="before")
    @classmethod
    def _sorted_multiset(cls, value: Any) -> Tuple[str, ...]:
        return tuple(sorted(value))

    @property
    def label_set(self) -> FrozenSet[int]:
        return frozenset(self.labels)

    def to_names(self, vocab: Any) -> List[str]:
        """Nombres canónicos en orden alfabético (``vocab`` es un ``Vocabulary``)."""
        return vocab.names_for(self)


class RunOutput(BaseModel):
    """Conjunto de etiquetas de una corrida del profesor sobre un reporte."""
    model_config = ConfigDict(frozen=True)

    report_id: str
    run_index: int = Field(ge=0)
    label_set: LabelSet

    @model_validator(mode="after")
    def _same_report(self) -> "RunOutput":
        if self.label_set.report_id != self.report_id:
            raise ValueError("label_set.report_id no coincide con report_id")
        return self


class RunRecord(BaseModel):
    """Salida cruda persistida de una corrida; permite re-votar sin re-consultar."""

    report_id: str
    run_index: int = Field(ge=0)
    raw_text: str
    attempt_count: int = Field(ge=1)
    labels: Tuple[int, ...] = ()
    oov: Tuple[str, ...] = ()

    def to_run_output(self) -> RunOutput:
        return RunOutput(
            report_id=self.report_id,
            run_index=self.run_index,
            label_set=LabelSet(report_id=self.report_id, labels=self.labels, oov_names=self.oov,
                               provenance=Provenance.MODEL_PREDICTION),
        )


# --- Gateway ---

class CompletionRequest(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_name: str
    prompt: str
    temperature: float = Field(default=1.0, ge=0.0)
    max_tokens: int = Field(default=1024, gt=0)
    run_index: int = Field(default=0, ge=0)
    runs_per_report: int = Field(default=3, gt=0)
    report_id: Optional[str] = None

    @model_validator(mode="after")
    def _run_index_in_range(self) -> "CompletionRequest":
        if self.run_index >= self.runs_per_report:
            raise ValueError(f"run_index {self.run_index} >= runs_per_report {self.runs_per_report}")
        return self


class CompletionResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw_text: str
    latency_ms: int = Field(ge=0)
    attempt_count: int = Field(ge=1)


# --- Partición ---

class SplitSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    ratios: Tuple[float, ...] = (0.5969, 0.4031)
    seed: int = 42
    order: SplitOrder = SplitOrder.FIRST_ORDER

    @field_validator("ratios")
    @classmethod
    def _valid_ratios(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(value) < 2:
            raise ValueError("se requieren al menos 2 partes")
        if any(r <= 0 for r in value):
            raise ValueError("todas las proporciones deben ser positivas")
        if abs(sum(value) - 1.0) > 1e-9:
            raise ValueError(f"las proporciones suman {sum(value)}, no 1")
        return value

    @property
    def n_parts(self) -> int:
        return len(self.ratios)


class SplitAssignment(BaseModel):
    """report_id -> índice de parte, en el orden del corpus."""

    parts: Dict[str, int]
    n_parts: int = Field(ge=2)
    label_proportions: Dict[int, List[float]] = Field(default_factory=dict)

    def part_sizes(self) -> List[int]:
        sizes = [0] * self.n_parts
        for part in self.parts.values():
            sizes[part] += 1
        return sizes

    def members(self, part: int) -> List[str]:
        return [report_id for report_id, p in self.parts.items() if p == part]


class SplitQuality(BaseModel):
    ratios: Tuple[float, ...]
    part_sizes: List[int]
    desired_sizes: List[float]
    support: Dict[int, int]
    per_label: Dict[int, List[float]]
    per_label_max: Dict[int, float]
    max_deviation: float
    mean_deviation: float


# --- Evaluación ---

class EvalPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    report_id: str
    modality: Modality = Modality.OTHER
    gold: LabelSet
    predicted: LabelSet

    @model_validator(mode="after")
    def _same_report(self) -> "EvalPair":
        if not (self.gold.report_id == self.predicted.report_id == self.report_id):
            raise ValueError("gold y predicted deben compartir report_id")
        return self


class ClassMetrics(BaseModel):
    tp: int = 0
    fp: int = 0
    fn: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    support: int = 0


class MetricsReport(BaseModel):
    n_reports: int
    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    f1_micro: float = Field(ge=0.0, le=1.0)
    f1_macro: float = Field(ge=0.0, le=1.0)
    tp: int
    fp: int
    fn: int
    oov_predictions: int = 0
    hallucination_rate: float = 0.0
    per_class: Dict[int, ClassMetrics] = Field(default_factory=dict)
    per_modality: Dict[str, "MetricsReport"] = Field(default_factory=dict)


class ConfusionPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    gold_label: int
    predicted_label: int
    count: int


# --- Dataset / manifiesto ---

class FineTunePair(BaseModel):
    model_config = ConfigDict(frozen=True)

    prompt: str
    completion: str


class RunManifest(BaseModel):
    """Metadatos de reproducibilidad de un comando del pipeline."""

    created_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    tool_version: str
    command: str
    template_hashes: Dict[str, str] = Field(default_factory=dict)
    vocabulary_hash: Optional[str] = None
    backend: Dict[str, Any] = Field(default_factory=dict)
    seeds: Dict[str, int] = Field(default_factory=dict)
    vote_mode: Optional[VoteMode] = None
    runs_per_report: Optional[int] = None
    temperature: Optional[float] = None
    split_spec: Optional[SplitSpec] = None
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)


# --- QLoRA (hiperparámetros) ---

class TargetModule(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    d_out: int = Field(gt=0)
    d_in: int = Field(gt=0)


class TrainingHyperparameters(BaseModel):
    """Se registran por fidelidad; no hay bucle de entrenamiento."""
    model_config = ConfigDict(frozen=True)

    optimizer: str = "adamw_8bit"
    learning_rate: float = 3e-4
    weight_decay: float = 0.01
    lr_scheduler: str = "reduce_on_plateau"
    epochs: int = 5
    batch_size: Optional[int] = None


class LoraConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    rank: int = Field(default=64, gt=0)
    alpha: float = Field(default=16.0, gt=0)
    dropout: float = Field(default=0.05, ge=0.0, lt=1.0)
    bias: str = "none"
    target_modules: Tuple[TargetModule, ...] = ()
    layer_count: int = Field(default=1, gt=0)
    training: TrainingHyperparameters = Field(default_factory=TrainingHyperparameters)

    @model_validator(mode="after")
    def _rank_fits_targets(self) -> "LoraConfig":
        for module in self.target_modules:
            if self.rank > min(module.d_out, module.d_in):
                raise ValueError(f"rank {self.rank} excede min(d_out, d_in) de {module.name}")
        return self

    @property
    def scale(self) -> float:
        return self.alpha / self.rank


class ArchSpec(BaseModel):
    """Formas de los módulos objetivo de una arquitectura (data/archs/*.json)."""
    model_config = ConfigDict(frozen=True)

    name: str
    layer_count: int = Field(gt=0)
    target_modules: Tuple[TargetModule, ...] = Field(min_length=1)
