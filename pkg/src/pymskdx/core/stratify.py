from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from pymskdx.core.enums import SplitOrder
from pymskdx.core.models import LabelSet, SplitAssignment, SplitQuality, SplitSpec
from pymskdx.config.settings import config
from pymskdx.exceptions import DuplicateIdError, EmptyCorpusError, InvalidSplitSpecError, SplitError
from pymskdx.utils.logger import get_logger

logger = get_logger(classname="Stratifier")

Corpus = Sequence[Tuple[str, LabelSet]]
Key = Tuple[int, ...]


def _check_corpus(corpus: Corpus) -> None:
    if not corpus:
        raise EmptyCorpusError("el corpus está vacío")
    seen = set()
    for report_id, _ in corpus:
        if report_id in seen:
            raise DuplicateIdError(f"report_id repetido: {report_id}", report_id=report_id)
        seen.add(report_id)


def _keys_for(labels: Tuple[int, ...], order: SplitOrder) -> List[List[Key]]:
    """Claves por fase: pares primero (segundo orden) y luego etiquetas individuales."""
    singles = [(label,) for label in labels]
    if order is SplitOrder.SECOND_ORDER:
        return [list(combinations(labels, 2)), singles]
    return [singles]


class IterativeStratifier:
    """
    Estratificación iterativa multi-etiqueta con deseos reales (no redondeados).

    Desempates: mayor deseo de la clave, luego mayor deseo global, luego la
    parte de menor índice. Los ejemplos sin etiquetas van al mayor deseo
    global y, en empate, también a la parte de menor índice.
    """

    def __init__(self, corpus: Corpus, spec: SplitSpec):
        _check_corpus(corpus)
        self.corpus = corpus
        self.spec = spec
        self.ratios = np.asarray(spec.ratios, dtype=float)

        self.phases: List[List[List[Key]]] = [_keys_for(ls.labels, spec.order) for _, ls in corpus]
        n_phases = 2 if spec.order is SplitOrder.SECOND_ORDER else 1
        self.example_keys: List[List[Key]] = [[k for phase in ex for k in phase] for ex in self.phases]

        support: Dict[Key, int] = {}
        for keys in self.example_keys:
            for key in keys:
                support[key] = support.get(key, 0) + 1

        self.overall = len(corpus) * self.ratios
        self.desired: Dict[Key, np.ndarray] = {key: count * self.ratios for key, count in support.items()}
        self.remaining: Dict[Key, int] = dict(support)
        self.part = np.full(len(corpus), -1, dtype=int)
        self.n_phases = n_phases

    def _best_parts(self, scores: np.ndarray, candidates: np.ndarray) -> np.ndarray:
        values = scores[candidates]
        return candidates[np.isclose(values, values.max(), rtol=0.0, atol=1e-9)]

    def _assign(self, index: int, part: int) -> None:
        self.part[index] = part
        self.overall[part] -= 1
        for key in self.example_keys[index]:
            self.desired[key][part] -= 1
            self.remaining[key] -= 1

    def _choose_part(self, key: Key) -> int:
        parts = np.arange(len(self.ratios))
        parts = self._best_parts(self.desired[key], parts)
        if len(parts) > 1:
            parts = self._best_parts(self.overall, parts)
        return int(parts[0])

    def _run_phase(self, phase: int) -> None:
        members: Dict[Key, List[int]] = {}
        for index, ex in enumerate(self.phases):
            for key in ex[phase]:
                members.setdefault(key, []).append(index)

        while True:
            pending = [key for key in members if self.remaining[key] > 0]
            if not pending:
                return
            key = min(pending, key=lambda k: (self.remaining[k], k))
            for index in members[key]:
                if self.part[index] < 0:
                    self._assign(index, self._choose_part(key))

    def run(self) -> SplitAssignment:
        for phase in range(self.n_phases):
            self._run_phase(phase)

        for index in np.flatnonzero(self.part < 0):
            # argmax devuelve el primer máximo: menor índice de parte en empate.
            self._assign(int(index), int(np.argmax(np.round(self.overall, 9))))

        return _build_assignment(self.corpus, self.part, len(self.ratios))


def _build_assignment(corpus: Corpus, parts: np.ndarray, n_parts: int) -> SplitAssignment:
    if (parts < 0).any():
        raise SplitError("quedaron reportes sin asignar")
    mapping = {report_id: int(p) for (report_id, _), p in zip(corpus, parts)}
    return SplitAssignment(parts=mapping, n_parts=n_parts,
                           label_proportions=label_proportions(corpus, mapping, n_parts))


def label_proportions(corpus: Corpus, mapping: Dict[str, int], n_parts: int) -> Dict[int, List[float]]:
    counts: Dict[int, np.ndarray] = {}
    for report_id, label_set in corpus:
        for label in label_set.labels:
            counts.setdefault(label, np.zeros(n_parts, dtype=int))[mapping[report_id]] += 1
    return {label: (c / c.sum()).tolist() for label, c in sorted(counts.items())}


def iterative_stratify(corpus: Corpus, spec: SplitSpec) -> SplitAssignment:
    assignment = IterativeStratifier(corpus, spec).run()
    logger.info(f"Partición iterativa ({spec.order.value}): tamaños {assignment.part_sizes()}")
    return assignment


def random_split(corpus: Corpus, spec: SplitSpec) -> SplitAssignment:
    """Partición uniforme aleatoria con semilla; línea base de comparación."""
    _check_corpus(corpus)
    n = len(corpus)
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    bounds = np.round(np.cumsum(spec.ratios) * n).astype(int)
    bounds[-1] = n

    parts = np.empty(n, dtype=int)
    start = 0
    for part, stop in enumerate(bounds):
        parts[order[start:stop]] = part
        start = stop
    return _build_assignment(corpus, parts, spec.n_parts)


def part_sizes(assignment: SplitAssignment) -> List[int]:
    return assignment.part_sizes()


def split_quality(assignment: SplitAssignment, corpus: Corpus, spec: SplitSpec) -> SplitQuality:
    """|fracción lograda − proporción deseada| por etiqueta y parte; etiquetas sin soporte se omiten."""
    missing = [report_id for report_id, _ in corpus if report_id not in assignment.parts]
    if missing:
        raise SplitError(f"la asignación no cubre {len(missing)} reportes (p. ej. {missing[0]})")

    ratios = np.asarray(spec.ratios, dtype=float)
    proportions = label_proportions(corpus, assignment.parts, assignment.n_parts)
    support: Dict[int, int] = {}
    for _, label_set in corpus:
        for label in label_set.labels:
            support[label] = support.get(label, 0) + 1

    per_label = {label: np.abs(np.asarray(p) - ratios).tolist() for label, p in proportions.items()}
    all_devs = [d for devs in per_label.values() for d in devs]

    return SplitQuality(
        ratios=spec.ratios,
        part_sizes=assignment.part_sizes(),
        desired_sizes=(len(corpus) * ratios).tolist(),
        support=dict(sorted(support.items())),
        per_label=per_label,
        per_label_max={label: max(devs) for label, devs in per_label.items()},
        max_deviation=max(all_devs) if all_devs else 0.0,
        mean_deviation=float(np.mean(all_devs)) if all_devs else 0.0,
    )


def make_split_spec(
        ratios: Optional[Sequence[float]] = None,
        seed: Optional[int] = None,
        order: Optional[Union[SplitOrder, str]] = None,
) -> SplitSpec:
    """SplitSpec con los valores configurados para lo que no se indique."""
    if order is None or isinstance(order, str):
        order = SplitOrder.from_text(order or config.SPLIT_ORDER)
    try:
        return SplitSpec(
            ratios=tuple(ratios if ratios is not None else config.SPLIT_RATIOS),
            seed=config.SPLIT_SEED if seed is None else seed,
            order=order,
        )
    except ValidationError as exc:
        raise InvalidSplitSpecError(f"especificación de partición inválida: {exc.errors()[0]['msg']}") from exc
