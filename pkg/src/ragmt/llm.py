"""Backend-neutral chat-completion client with a content-addressed cache.

Every request has a canonical serialization (fixed field order, UTF-8, no
insignificant whitespace) whose SHA-256 digest keys the on-disk cache. A
cache entry is one JSON file, written atomically via temp-file-then-rename,
so warm-cache and replay runs are bit-reproducible and network-free.
"""

import hashlib
import json
import logging
import os
import time
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Protocol

logger = logging.getLogger(__name__)

RETRY_BASE_DELAY = 1.0
RETRY_FACTOR = 2.0
RETRY_MAX_ATTEMPTS = 5


class BackendError(RuntimeError):
    """Terminal backend failure; carries the HTTP status when one exists."""

    def __init__(self, message: str, status: Optional[int] = None):
        super().__init__(message)
        self.status = status


class CacheMissError(BackendError):
    """Replay-mode lookup failed; carries the missing request digest."""

    def __init__(self, key: str):
        super().__init__(f"replay cache miss for request {key}")
        self.key = key


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    system_text: str
    user_text: str
    temperature: float = 0.0
    max_output_chars: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "temperature", float(self.temperature))
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_output_chars is not None and self.max_output_chars <= 0:
            raise ValueError("max_output_chars must be positive")

    def canonical_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "system_text": self.system_text,
            "user_text": self.user_text,
            "temperature": self.temperature,
            "max_output_chars": self.max_output_chars,
        }

    @classmethod
    def from_canonical_dict(cls, obj: dict) -> "ChatRequest":
        return cls(
            model_id=obj["model_id"],
            system_text=obj["system_text"],
            user_text=obj["user_text"],
            temperature=obj["temperature"],
            max_output_chars=obj["max_output_chars"],
        )


@dataclass(frozen=True)
class ChatResponse:
    text: str
    backend_id: str
    from_cache: bool
    latency_ms: float


def canonical_json(obj: dict) -> str:
    """Stable serialization: insertion order, UTF-8 text, no extra whitespace."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def object_key(obj: dict) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def cache_key(request: ChatRequest) -> str:
    """SHA-256 hex digest of the request's canonical serialization."""
    return object_key(request.canonical_dict())


def rfc3339_now() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(timezone.utc)
    return moment.isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class CacheEntry:
    key: str
    request: dict
    response_text: str
    created_at: str

    @classmethod
    def build(cls, request_obj: dict, response_text: str) -> "CacheEntry":
        return cls(
            key=object_key(request_obj),
            request=request_obj,
            response_text=response_text,
            created_at=rfc3339_now(),
        )

    def chat_request(self) -> ChatRequest:
        return ChatRequest.from_canonical_dict(self.request)


class ResponseCache:
    """One JSON document per entry, filename ``<key>.json``.

    Reads verify the stored digest against the stored request; a mismatch or
    unparseable file is ignored with a warning and treated as a miss.
    """

    def __init__(self, directory):
        self.directory = Path(directory)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[CacheEntry]:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            entry = CacheEntry(
                key=raw["key"],
                request=raw["request"],
                response_text=raw["response_text"],
                created_at=raw["created_at"],
            )
        except (ValueError, KeyError, TypeError) as exc:
            logger.warning("ignoring unreadable cache entry %s: %s", path.name, exc)
            return None
        if entry.key != key or object_key(entry.request) != key:
            logger.warning("ignoring corrupted cache entry %s: digest mismatch", path.name)
            return None
        return entry

    def put(self, entry: CacheEntry) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(entry.key)
        payload = {
            "key": entry.key,
            "request": entry.request,
            "response_text": entry.response_text,
            "created_at": entry.created_at,
        }
        tmp = path.with_name(f"{path.name}.{uuid.uuid4().hex}.tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
        os.replace(tmp, path)


class Backend(Protocol):
    backend_id: str

    def complete(self, request: ChatRequest) -> str: ...


class MockBackend:
    """Deterministic backend: exact-match rule table, default echoes the user text."""

    def __init__(self, rules: Optional[dict[str, str]] = None):
        self.backend_id = "mock"
        self.rules = dict(rules or {})
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        return self.rules.get(request.user_text, request.user_text)


class ReplayBackend:
    """Never touches the network; any live call is a cache miss by definition."""

    def __init__(self):
        self.backend_id = "replay"
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        raise CacheMissError(cache_key(request))


def request_with_retry(call: Callable, description: str, sleep: Optional[Callable[[float], None]] = None):
    """Run one HTTP call with exponential backoff on transport errors and 429/5xx.

    At most RETRY_MAX_ATTEMPTS attempts with delays 1, 2, 4, 8 s between them
    (15 s total, under the 31 s budget). Other non-2xx statuses fail fast.
    """
    import requests

    if sleep is None:
        sleep = time.sleep
    last_error: Exception | None = None
    for attempt in range(1, RETRY_MAX_ATTEMPTS + 1):
        try:
            response = call()
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_error = exc
            if attempt < RETRY_MAX_ATTEMPTS:
                delay = RETRY_BASE_DELAY * RETRY_FACTOR ** (attempt - 1)
                logger.warning("%s: transport error (%s), retrying in %.0fs", description, exc, delay)
                sleep(delay)
            continue
        if response.status_code == 429 or response.status_code >= 500:
            last_error = BackendError(
                f"{description}: HTTP {response.status_code}", status=response.status_code
            )
            if attempt < RETRY_MAX_ATTEMPTS:
                delay = RETRY_BASE_DELAY * RETRY_FACTOR ** (attempt - 1)
                logger.warning("%s: HTTP %d, retrying in %.0fs", description, response.status_code, delay)
                sleep(delay)
            continue
        if response.status_code < 200 or response.status_code >= 300:
            raise BackendError(
                f"{description}: HTTP {response.status_code}", status=response.status_code
            )
        return response
    if isinstance(last_error, BackendError):
        raise last_error
    raise BackendError(f"{description}: {last_error}") from last_error


class HttpBackend:
    """Chat-completions-style POST to a configurable endpoint.

    The secret comes from ``RAGMT_API_KEY``; for an ``Authorization`` header
    it is sent as a bearer token, for any other header name it is sent raw.
    """

    def __init__(
        self,
        base_url: str,
        path: str = "/v1/chat/completions",
        auth_header: str = "Authorization",
        timeout: float = 60.0,
        sleep: Optional[Callable[[float], None]] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.path = path
        self.auth_header = auth_header
        self.timeout = timeout
        self.backend_id = f"http:{self.base_url}"
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        secret = os.environ.get("RAGMT_API_KEY")
        if secret:
            if self.auth_header.lower() == "authorization":
                headers[self.auth_header] = f"Bearer {secret}"
            else:
                headers[self.auth_header] = secret
        return headers

    def complete(self, request: ChatRequest) -> str:
        import requests

        body = {
            "model": request.model_id,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.temperature,
        }

        def call():
            return requests.post(
                self.base_url + self.path,
                json=body,
                headers=self._headers(),
                timeout=self.timeout,
            )

        response = request_with_retry(call, description=self.backend_id, sleep=self._sleep)
        try:
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"{self.backend_id}: malformed response body: {exc}") from exc


def send(backend, request: ChatRequest) -> ChatResponse:
    """One backend round-trip; output is stripped, and empty output is an error."""
    started = time.monotonic()
    text = backend.complete(request).strip()
    latency_ms = (time.monotonic() - started) * 1000.0
    if not text:
        raise BackendError(f"{backend.backend_id}: empty response")
    return ChatResponse(text=text, backend_id=backend.backend_id, from_cache=False, latency_ms=latency_ms)


def send_cached(backend, cache: ResponseCache, request: ChatRequest) -> ChatResponse:
    """Serve from the cache when possible; persist fresh responses atomically."""
    key = cache_key(request)
    entry = cache.get(key)
    if entry is not None:
        return ChatResponse(
            text=entry.response_text,
            backend_id=backend.backend_id,
            from_cache=True,
            latency_ms=0.0,
        )
    response = send(backend, request)
    cache.put(CacheEntry.build(request.canonical_dict(), response.text))
    return response
