import hashlib
import os
import threading
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import diskcache as dc
import numpy as np
import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from pymskdx.config.settings import config
from pymskdx.core.models import CompletionRequest, CompletionResult
from pymskdx.core.vocabulary import Vocabulary
from pymskdx.exceptions import AuthenticationError, BackendUnavailableError, NetworkError, ResponseTruncatedError
from pymskdx.utils.cache import get_cache_key
from pymskdx.utils.logger import get_logger

API_KEY_ENV = "DX_API_KEY"
RETRY_STATUSES = [429, 500, 502, 503, 504]

BatchItem = Union[CompletionResult, Exception]


class LlmBackend(ABC):
    """Contrato común de los backends de chat-completion."""

    name: str = "abstract"

    def __init__(self):
        self.logger = get_logger(classname=type(self).__name__)
        self._lock = threading.Lock()
        self._request_count = 0

    @abstractmethod
    def _complete(self, request: CompletionRequest) -> CompletionResult:
        ...

    @abstractmethod
    def identity(self) -> Dict[str, Any]:
        """Descripción del backend para el manifiesto (sin credenciales)."""

    def complete(self, request: CompletionRequest) -> CompletionResult:
        with self._lock:
            self._request_count += 1
        return self._complete(request)

    @property
    def request_count(self) -> int:
        return self._request_count

    def complete_batch(self, requests_: Sequence[CompletionRequest], max_in_flight: Optional[int] = None) -> List[BatchItem]:
        """
        Ejecuta ``requests_`` con a lo sumo ``max_in_flight`` peticiones en vuelo.

        El resultado está alineado posicionalmente con la entrada; un fallo
        individual queda como instancia de excepción en su posición.
        """
        max_in_flight = config.MAX_IN_FLIGHT if max_in_flight is None else max_in_flight
        if max_in_flight < 1:
            raise ValueError("max_in_flight debe ser >= 1")
        if not requests_:
            return []

        results: List[Optional[BatchItem]] = [None] * len(requests_)
        with ThreadPoolExecutor(max_workers=min(max_in_flight, len(requests_))) as pool:
            futures = [pool.submit(self.complete, request) for request in requests_]
            for position, future in enumerate(futures):
                try:
                    results[position] = future.result()
                except Exception as exc:
                    self.logger.warning(f"Petición {position} falló: {exc}")
                    results[position] = exc

        return results  # type: ignore[return-value]


class HttpChatBackend(LlmBackend):
    """
    Backend HTTP con formato JSON de chat-completion.

    Los reintentos (timeouts, errores de conexión, 429 y 5xx) los hace el
    ``Retry`` de urllib3 montado en la sesión, con backoff exponencial acotado
    y hasta ``max_attempts`` intentos; 401/403 no se reintentan.
    """

    name = "http"

    def __init__(
            self,
            url: Optional[str] = None,
            model_name: Optional[str] = None,
            *,
            timeout: Optional[float] = None,
            max_attempts: Optional[int] = None,
            backoff_base: Optional[float] = None,
            backoff_max: Optional[float] = None,
            use_cache: Optional[bool] = None,
            session: Optional[requests.Session] = None,
    ):
        super().__init__()
        self.url = url or config.DX_API_URL
        if not self.url:
            raise NetworkError("DX_API_URL no configurado para el backend HTTP")

        self.api_key = os.environ.get(API_KEY_ENV)
        if not self.api_key:
            raise AuthenticationError(f"Variable de entorno {API_KEY_ENV} no definida")

        self.model_name = model_name or config.MODEL_NAME
        self.timeout = config.HTTP_TIMEOUT if timeout is None else timeout
        self.max_attempts = config.HTTP_MAX_ATTEMPTS if max_attempts is None else max_attempts
        if self.max_attempts < 1:
            raise ValueError("max_attempts debe ser >= 1")
        backoff_base = config.HTTP_BACKOFF_BASE if backoff_base is None else backoff_base
        backoff_max = config.HTTP_BACKOFF_MAX if backoff_max is None else backoff_max

        # Sesión con reintentos a nivel de transporte
        self.session = session or requests.Session()
        retries = Retry(
            total=self.max_attempts - 1,
            backoff_factor=backoff_base,
            backoff_max=backoff_max,
            status_forcelist=RETRY_STATUSES,
            allowed_methods=["POST"],
            raise_on_status=False,
        )
        adapter = HTTPAdapter(max_retries=retries)
        self.session.mount("https://", adapter)
        self.session.mount("http://", adapter)
        self.session.headers.update({
            "Authorization": f"Bearer {self.api_key}",
            "Content-Type": "application/json",
        })

        use_cache = config.USE_CACHE if use_cache is None else use_cache
        if use_cache:
            cache_dir = config.get_cache_path()
            self.cache: Optional[dc.Cache] = dc.Cache(str(cache_dir))
            self.logger.info(f"Caché de respuestas habilitada en: {cache_dir}")
        else:
            self.cache = None

    def identity(self) -> Dict[str, Any]:
        return {"backend": self.name, "model": self.model_name, "url": self.url}

    def _payload(self, request: CompletionRequest) -> Dict[str, Any]:
        return {
            "model": request.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }

    def _complete(self, request: CompletionRequest) -> CompletionResult:
        cache_key = None
        if self.cache is not None:
            cache_key = get_cache_key(self.url, request.model_name, request.prompt, request.temperature,
                                      request.max_tokens, request.run_index)
            cached = self.cache.get(cache_key)
            if cached:
                self.logger.debug(f"Respuesta recuperada de caché (key={cache_key[:8]}...)")
                return CompletionResult(**cached)

        started = time.perf_counter()
        try:
            response = self.session.post(self.url, json=self._payload(request), timeout=self.timeout)
        except (requests.exceptions.RetryError, requests.Timeout, requests.ConnectionError) as exc:
            self.logger.warning(f"Reintentos agotados tras {self.max_attempts} intentos: {exc}")
            raise BackendUnavailableError(f"Reintentos agotados: {type(exc).__name__}: {exc}",
                                          attempt_count=self.max_attempts) from exc

        attempts = self._attempts(response)
        status = response.status_code
        if status in (401, 403):
            raise AuthenticationError(f"El backend rechazó la credencial (HTTP {status})")
        if status in RETRY_STATUSES:
            self.logger.warning(f"HTTP {status} tras {attempts} intentos")
            raise BackendUnavailableError(f"Reintentos agotados: HTTP {status}", attempt_count=attempts)
        if status >= 400:
            raise NetworkError(f"Error HTTP no recuperable: {status}")

        result = self._read_response(response, attempts, started)
        if self.cache is not None and cache_key:
            self.cache.set(cache_key, result.model_dump())
        return result

    @staticmethod
    def _attempts(response: requests.Response) -> int:
        """Intentos consumidos según el historial del ``Retry`` de urllib3."""
        retries = getattr(response.raw, "retries", None)
        history = getattr(retries, "history", None)
        return len(history) + 1 if isinstance(history, tuple) else 1

    @staticmethod
    def _read_response(response: requests.Response, attempts: int, started: float) -> CompletionResult:
        try:
            data = response.json()
            choice = data["choices"][0]
            text = choice["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise NetworkError(f"Respuesta con formato inesperado: {exc}") from exc

        if choice.get("finish_reason") == "length":
            raise ResponseTruncatedError("La respuesta se truncó por max_tokens")

        latency_ms = int(round((time.perf_counter() - started) * 1000))
        return CompletionResult(raw_text=text or "", latency_ms=latency_ms, attempt_count=attempts)


class MockBackend(LlmBackend):
    """
    Backend determinista para pruebas y corridas offline.

    La respuesta es función pura de (seed, sha256(prompt), run_index): un
    subconjunto base del vocabulario elegido por el hash del prompt, perturbado
    por corrida con ``flip_probability``.
    """

    name = "mock"
    OOV_NAMES = ("bone dragon", "green fever", "osseous shimmer", "tendon bloom")

    def __init__(
            self,
            vocab: Vocabulary,
            seed: Optional[int] = None,
            *,
            flip_probability: Optional[float] = None,
            max_labels: Optional[int] = None,
            oov_probability: Optional[float] = None,
            canned_reply: Optional[str] = None,
            fail_predicate: Optional[Callable[[CompletionRequest], bool]] = None,
    ):
        super().__init__()
        self.vocab = vocab
        self.seed = config.MOCK_SEED if seed is None else seed
        self.flip_probability = config.MOCK_FLIP_PROBABILITY if flip_probability is None else flip_probability
        self.max_labels = config.MOCK_MAX_LABELS if max_labels is None else max_labels
        self.oov_probability = config.MOCK_OOV_PROBABILITY if oov_probability is None else oov_probability
        self.canned_reply = canned_reply
        self.fail_predicate = fail_predicate

    def identity(self) -> Dict[str, Any]:
        return {
            "backend": self.name,
            "seed": self.seed,
            "flip_probability": self.flip_probability,
            "max_labels": self.max_labels,
            "oov_probability": self.oov_probability,
            "canned": self.canned_reply is not None,
        }

    def _complete(self, request: CompletionRequest) -> CompletionResult:
        if self.fail_predicate is not None and self.fail_predicate(request):
            raise BackendUnavailableError("Falla simulada del backend mock", attempt_count=1)
        if self.canned_reply is not None:
            return CompletionResult(raw_text=self.canned_reply, latency_ms=0, attempt_count=1)
        return CompletionResult(raw_text=self._reply(request.prompt, request.run_index), latency_ms=0,
                                attempt_count=1)

    def _reply(self, prompt: str, run_index: int) -> str:
        prompt_hash = int.from_bytes(hashlib.sha256(prompt.encode("utf-8")).digest()[:8], "big")
        entries = self.vocab.entries

        base_rng = np.random.default_rng([self.seed, prompt_hash])
        chosen = set()
        if entries:
            size = int(base_rng.integers(0, min(self.max_labels, len(entries)) + 1))
            chosen = {int(i) for i in base_rng.choice(len(entries), size=size, replace=False)}

        run_rng = np.random.default_rng([self.seed, prompt_hash, run_index + 1])
        kept = {i for i in sorted(chosen) if run_rng.random() >= self.flip_probability}
        if entries and run_rng.random() < self.flip_probability:
            kept.add(int(run_rng.integers(0, len(entries))))

        rows = []
        for index in sorted(kept):
            entry = entries[index]
            status = "POSSIBLE" if (prompt_hash + entry.id) % 3 == 0 else "DEFINITE"
            rows.append(f"{entry.id},{entry.canonical_name},{status}")
        if run_rng.random() < self.oov_probability:
            rows.append(f"0,{self.OOV_NAMES[int(run_rng.integers(0, len(self.OOV_NAMES)))]},DEFINITE")

        lines = ["Based on the impression, these pathologies are explicitly named:", "",
                 "PathologyID,PathologyName,Word", *rows, "",
                 "Each row reflects the wording used in the impression."]
        return "\n".join(lines)


def backend_identity(backend: LlmBackend) -> Dict[str, Any]:
    return backend.identity()


def create_backend(kind: Optional[str], vocab: Vocabulary, **kwargs: Any) -> LlmBackend:
    kind = (kind or config.BACKEND).lower()
    if kind == "mock":
        return MockBackend(vocab, **kwargs)
    if kind == "http":
        return HttpChatBackend(**kwargs)
    raise ValueError(f"Backend no soportado: {kind}")


def is_failure(item: BatchItem) -> bool:
    return isinstance(item, Exception)


__all__ = [
    "LlmBackend", "HttpChatBackend", "MockBackend", "BatchItem",
    "backend_identity", "create_backend", "is_failure", "API_KEY_ENV",
]
