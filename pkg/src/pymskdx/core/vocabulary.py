from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Union

from pymskdx.config.settings import config
from pymskdx.core.models import LabelSet, PathologyEntry
from pymskdx.exceptions import BadCountError, DuplicateNameError, MalformedFileError, PathologyNotFoundError
from pymskdx.utils.logger import get_logger
from pymskdx.utils.normalizations import normalize_name

logger = get_logger(classname="Vocabulary")

# Alias público: la regla de normalización es parte del contrato del vocabulario.
normalize = normalize_name

PACKAGED_VOCABULARY = "pathologies.tsv"


class Vocabulary:
    """
    Vocabulario inmutable de patologías MSK.

    Las entradas se mantienen en orden de id (orden de listado). El índice
    cubre nombres canónicos y alias normalizados; la búsqueda es exacta tras
    normalizar, nunca por distancia de edición.
    """

    def __init__(self, entries: Iterable[PathologyEntry]):
        ordered = sorted(entries, key=lambda e: e.id)
        index: Dict[str, int] = {}
        by_id: Dict[int, PathologyEntry] = {}

        for entry in ordered:
            if entry.id in by_id:
                raise MalformedFileError(f"id {entry.id} repetido")
            by_id[entry.id] = entry
            key = normalize_name(entry.canonical_name)
            if key in index:
                raise DuplicateNameError(f"nombre repetido: {key!r}")
            index[key] = entry.id

        for entry in ordered:
            for alias in sorted(entry.aliases):
                key = normalize_name(alias)
                owner = index.get(key)
                if owner is None:
                    index[key] = entry.id
                elif owner != entry.id:
                    raise DuplicateNameError(f"alias {key!r} ya pertenece a la entrada {owner}")

        self._entries: tuple[PathologyEntry, ...] = tuple(ordered)
        self._by_id = by_id
        self._index = index

    # --- búsqueda ---

    def lookup(self, name: str) -> PathologyEntry:
        entry = self.get(name)
        if entry is None:
            raise PathologyNotFoundError(name)
        return entry

    def get(self, name: str) -> Optional[PathologyEntry]:
        entry_id = self._index.get(normalize_name(name))
        return None if entry_id is None else self._by_id[entry_id]

    def entry(self, pathology_id: int) -> PathologyEntry:
        try:
            return self._by_id[pathology_id]
        except KeyError:
            raise PathologyNotFoundError(str(pathology_id)) from None

    def __contains__(self, pathology_id: object) -> bool:
        return pathology_id in self._by_id

    # --- vistas ---

    @property
    def entries(self) -> tuple[PathologyEntry, ...]:
        return self._entries

    @property
    def ids(self) -> List[int]:
        return [e.id for e in self._entries]

    def canonical_names(self) -> List[str]:
        return [e.canonical_name for e in self._entries]

    def categories(self) -> List[str]:
        seen: Dict[str, None] = {}
        for entry in self._entries:
            seen.setdefault(entry.category, None)
        return list(seen)

    def names_for(self, label_set: LabelSet) -> List[str]:
        """Nombres canónicos de las etiquetas, en orden alfabético."""
        return sorted(self.entry(i).canonical_name for i in label_set.labels)

    def digest(self) -> str:
        return hashlib.sha256(serialize_vocabulary(self).encode("utf-8")).hexdigest()

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[PathologyEntry]:
        return iter(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"Vocabulary({len(self)} entradas, {len(self.categories())} categorías)"


def lookup(vocab: Vocabulary, name: str) -> PathologyEntry:
    return vocab.lookup(name)


def parse_vocabulary(
        text: str,
        strict: Optional[bool] = None,
        expected_size: Optional[int] = None,
) -> Vocabulary:
    """Interpreta el formato TSV ``id<TAB>nombre<TAB>categoría<TAB>alias|alias``."""
    strict = config.VOCAB_STRICT if strict is None else strict
    expected_size = config.VOCAB_EXPECTED_SIZE if expected_size is None else expected_size

    entries: List[PathologyEntry] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise MalformedFileError(f"se esperaban 3 o 4 campos, hay {len(fields)}", line_no)
        raw_id, raw_name, raw_category = fields[0], fields[1], fields[2]
        try:
            pathology_id = int(raw_id.strip())
        except ValueError:
            raise MalformedFileError(f"id no numérico: {raw_id!r}", line_no) from None

        name = normalize_name(raw_name)
        category = " ".join(raw_category.split())
        if pathology_id < 1 or not name or not category:
            raise MalformedFileError("id, nombre o categoría inválidos", line_no)
        if "," in name:
            raise MalformedFileError(f"el nombre no puede contener comas: {name!r}", line_no)

        aliases = frozenset(
            normalize_name(a) for a in (fields[3].split("|") if len(fields) == 4 else []) if a.strip()
        )
        entries.append(PathologyEntry(id=pathology_id, canonical_name=name, category=category, aliases=aliases))

    vocab = Vocabulary(entries)
    if strict and len(vocab) != expected_size:
        raise BadCountError(f"el vocabulario tiene {len(vocab)} entradas; se esperaban {expected_size}")
    return vocab


def load_vocabulary(
        source: Union[str, Path],
        strict: Optional[bool] = None,
        expected_size: Optional[int] = None,
) -> Vocabulary:
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedFileError(f"{path} no es UTF-8: {exc}") from exc
    vocab = parse_vocabulary(text, strict=strict, expected_size=expected_size)
    logger.info(f"Vocabulario cargado desde {path.name}: {len(vocab)} entradas, {len(vocab.categories())} categorías")
    return vocab


def serialize_vocabulary(vocab: Vocabulary) -> str:
    lines = [
        "\t".join([str(e.id), e.canonical_name, e.category, "|".join(sorted(e.aliases))])
        for e in vocab
    ]
    return "".join(f"{line}\n" for line in lines)


def dump_vocabulary(vocab: Vocabulary, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(serialize_vocabulary(vocab), encoding="utf-8")
    return path


@lru_cache(maxsize=4)
def _packaged_vocabulary(expected_size: int) -> Vocabulary:
    text = (resources.files("pymskdx") / "data" / PACKAGED_VOCABULARY).read_text(encoding="utf-8")
    return parse_vocabulary(text, strict=True, expected_size=expected_size)


def default_vocabulary() -> Vocabulary:
    """Vocabulario empaquetado con la librería, validado contra ``VOCAB_EXPECTED_SIZE``."""
    return _packaged_vocabulary(config.VOCAB_EXPECTED_SIZE)


def configured_vocabulary(path: Optional[Union[str, Path]] = None) -> Vocabulary:
    """Vocabulario indicado por argumento o por ``VOCAB_PATH``; si no, el empaquetado."""
    source = path or config.VOCAB_PATH
    if source is None:
        return default_vocabulary()
    return load_vocabulary(source)

