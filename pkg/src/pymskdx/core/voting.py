from collections import Counter
from typing import Dict, FrozenSet, Iterable, List, Sequence

from pymskdx.core.enums import Provenance, VoteMode
from pymskdx.core.models import LabelSet, RunOutput
from pymskdx.exceptions import MixedReportsError, NoRunsError


def _per_label(sets: Sequence[FrozenSet[int]]) -> FrozenSet[int]:
    counts = Counter(label for s in sets for label in s)
    return frozenset(label for label, count in counts.items() if 2 * count > len(sets))


def _set_level(sets: Sequence[FrozenSet[int]]) -> FrozenSet[int]:
    counts = Counter(sets)
    top = max(counts.values())
    winners = [s for s, count in counts.items() if count == top]
    if len(winners) == 1:
        return winners[0]
    # Sin pluralidad estricta (p. ej. 3 corridas distintas): mayoría por etiqueta.
    return _per_label(sets)


def majority_vote(runs: Sequence[RunOutput], mode: VoteMode = VoteMode.SET_LEVEL) -> LabelSet:
    """
    Agrega las corridas del profesor de un reporte en un único LabelSet.

    El resultado conserva, ordenados, los nombres fuera de vocabulario de todas
    las corridas; nunca entran en ``labels``.
    """
    if not runs:
        raise NoRunsError("no hay corridas para votar")
    report_ids = {run.report_id for run in runs}
    if len(report_ids) > 1:
        raise MixedReportsError(f"corridas de reportes distintos: {sorted(report_ids)}")

    sets = [run.label_set.label_set for run in runs]
    voted = _set_level(sets) if mode is VoteMode.SET_LEVEL else _per_label(sets)

    return LabelSet(
        report_id=runs[0].report_id,
        labels=voted,
        oov_names=[name for run in runs for name in run.label_set.oov_names],
        provenance=Provenance.TEACHER_VOTE,
    )


def hallucination_tally(runs: Iterable[RunOutput]) -> Dict[str, int]:
    """Frecuencia de cada nombre fuera de vocabulario, de mayor a menor."""
    counts = Counter(name for run in runs for name in run.label_set.oov_names)
    return dict(sorted(counts.items(), key=lambda item: (-item[1], item[0])))


def group_runs(runs: Iterable[RunOutput]) -> Dict[str, List[RunOutput]]:
    """Agrupa por report_id preservando el orden de primera aparición."""
    grouped: Dict[str, List[RunOutput]] = {}
    for run in runs:
        grouped.setdefault(run.report_id, []).append(run)
    return grouped
