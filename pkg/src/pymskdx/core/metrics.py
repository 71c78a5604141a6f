from collections import Counter
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from pymskdx.config.settings import config
from pymskdx.core.enums import MacroScope, Modality, Provenance
from pymskdx.core.models import ClassMetrics, ConfusionPair, EvalPair, LabelSet, MetricsReport
from pymskdx.exceptions import EmptyInputError, MissingReportError
from pymskdx.utils.logger import get_logger

logger = get_logger(classname="Metrics")

TABLE_COLUMNS = ("Support", "Precision", "Recall", "F1 Micro", "F1 Macro")


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_score(precision: float, recall: float) -> float:
    return _ratio(2 * precision * recall, precision + recall)


def _class_counts(pairs: Sequence[EvalPair]) -> Tuple[Dict[int, List[int]], int]:
    """label -> [tp, fp, fn] y total de predicciones fuera de vocabulario."""
    counts: Dict[int, List[int]] = {}
    oov = 0
    for pair in pairs:
        gold, predicted = pair.gold.label_set, pair.predicted.label_set
        for label in gold | predicted:
            row = counts.setdefault(label, [0, 0, 0])
            if label in gold and label in predicted:
                row[0] += 1
            elif label in predicted:
                row[1] += 1
            else:
                row[2] += 1
        oov += len(pair.predicted.oov_names)
    return counts, oov


def _evaluate(pairs: Sequence[EvalPair], count_oov_as_fp: bool, macro_scope: MacroScope) -> MetricsReport:
    counts, oov = _class_counts(pairs)

    per_class: Dict[int, ClassMetrics] = {}
    for label, (tp, fp, fn) in sorted(counts.items()):
        precision, recall = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
        per_class[label] = ClassMetrics(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall,
                                        f1=f1_score(precision, recall), support=tp + fn)

    tp = sum(c.tp for c in per_class.values())
    fp = sum(c.fp for c in per_class.values()) + (oov if count_oov_as_fp else 0)
    fn = sum(c.fn for c in per_class.values())
    precision, recall = _ratio(tp, tp + fp), _ratio(tp, tp + fn)

    if macro_scope is MacroScope.SUPPORTED:
        macro_classes = [c for c in per_class.values() if c.support > 0]
    else:
        macro_classes = list(per_class.values())
    f1_macro = _ratio(sum(c.f1 for c in macro_classes), len(macro_classes))

    in_vocab_predictions = sum(len(p.predicted.labels) for p in pairs)
    return MetricsReport(
        n_reports=len(pairs),
        precision=precision,
        recall=recall,
        f1_micro=f1_score(precision, recall),
        f1_macro=f1_macro,
        tp=tp,
        fp=fp,
        fn=fn,
        oov_predictions=oov,
        hallucination_rate=_ratio(oov, in_vocab_predictions + oov),
        per_class=per_class,
    )


def evaluate(
        pairs: Sequence[EvalPair],
        count_oov_as_fp: Optional[bool] = None,
        macro_scope: Optional[MacroScope] = None,
) -> MetricsReport:
    """
    Métricas multi-etiqueta micro/macro, por clase y por modalidad.

    Convenciones: 0/0 = 0; el F1 macro promedia solo clases con soporte gold
    (``MacroScope.SUPPORTED``) o todas las vistas (``MacroScope.UNION``).
    """
    if not pairs:
        raise EmptyInputError("no hay pares para evaluar")
    count_oov_as_fp = config.COUNT_OOV_AS_FP if count_oov_as_fp is None else count_oov_as_fp
    macro_scope = MacroScope(config.MACRO_SCOPE) if macro_scope is None else macro_scope

    report = _evaluate(pairs, count_oov_as_fp, macro_scope)

    groups: Dict[str, List[EvalPair]] = {}
    for pair in pairs:
        groups.setdefault(pair.modality.value, []).append(pair)
    per_modality = {m: _evaluate(g, count_oov_as_fp, macro_scope) for m, g in sorted(groups.items())}
    return report.model_copy(update={"per_modality": per_modality})


def confusion_pairs(pairs: Sequence[EvalPair], top_k: Optional[int] = None) -> List[ConfusionPair]:
    """Conteo FN×FP por reporte: cada etiqueta omitida g contra cada etiqueta espuria p."""
    if not pairs:
        raise EmptyInputError("no hay pares para analizar")
    top_k = config.CONFUSION_TOP_K if top_k is None else top_k
    if top_k < 1:
        raise ValueError("top_k debe ser positivo")

    tally: Counter = Counter()
    for pair in pairs:
        gold, predicted = pair.gold.label_set, pair.predicted.label_set
        for g in gold - predicted:
            for p in predicted - gold:
                tally[(g, p)] += 1

    ranked = sorted(tally.items(), key=lambda item: (-item[1], item[0]))
    return [ConfusionPair(gold_label=g, predicted_label=p, count=n) for (g, p), n in ranked[:top_k]]


def to_table(report: MetricsReport) -> str:
    """Tabla alineada: global y luego una fila por modalidad."""
    rows = [("Overall", report)] + [(m, r) for m, r in report.per_modality.items()]
    header = ["Subset", *TABLE_COLUMNS]
    body = [
        [name, str(r.n_reports), f"{r.precision:.3f}", f"{r.recall:.3f}", f"{r.f1_micro:.3f}", f"{r.f1_macro:.3f}"]
        for name, r in rows
    ]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i]) for i, cell in enumerate(row))
             for row in [header, *body]]
    return "\n".join(lines)


def align_predictions(
        gold: Mapping[str, LabelSet],
        predicted: Mapping[str, LabelSet],
        modalities: Optional[Mapping[str, Modality]] = None,
        missing_as_empty: bool = True,
) -> List[EvalPair]:
    """
    Empareja gold y predicciones por report_id, en el orden del gold.

    Un reporte gold sin predicción se evalúa como predicción vacía (con
    advertencia) o lanza MissingReportError si ``missing_as_empty`` es falso.
    """
    modalities = modalities or {}
    pairs = []
    missing = 0
    for report_id, gold_set in gold.items():
        predicted_set = predicted.get(report_id)
        if predicted_set is None:
            if not missing_as_empty:
                raise MissingReportError("sin predicción para el reporte", report_id=report_id)
            missing += 1
            logger.warning(f"Sin predicción para {report_id}; se evalúa como conjunto vacío")
            predicted_set = LabelSet(report_id=report_id, provenance=Provenance.MODEL_PREDICTION)
        pairs.append(EvalPair(report_id=report_id, modality=modalities.get(report_id, Modality.OTHER),
                              gold=gold_set, predicted=predicted_set))

    extra = len(set(predicted) - set(gold))
    if missing or extra:
        logger.info(f"Predicciones faltantes: {missing}; predicciones sin gold (ignoradas): {extra}")
    return pairs
