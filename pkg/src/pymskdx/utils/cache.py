# src/pymskdx/utils/cache.py
import hashlib
from pathlib import Path
from typing import Any, Union


def get_cache_key(*parts: Any) -> str:
    """Genera una clave estable (sha256) a partir de las partes de una petición."""
    key_string = "\x1f".join(str(part) for part in parts)
    return hashlib.sha256(key_string.encode("utf-8")).hexdigest()


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_digest(path: Union[str, Path], chunk_size: int = 1 << 16) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()
