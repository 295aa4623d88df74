"""Chat-completions endpoint client with retry and backoff."""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

import httpx

log = logging.getLogger(__name__)

ENV_BASE, ENV_KEY, ENV_MODEL = "TSART_API_BASE", "TSART_API_KEY", "TSART_MODEL"

_RETRYABLE_STATUS = {408, 409, 425, 429}


class EndpointError(RuntimeError):
    """The model endpoint could not produce a completion."""


class EndpointTimeout(EndpointError):
    pass


class EndpointUnavailable(EndpointError):
    pass


class MalformedResponse(EndpointError):
    pass


class ChatModel(Protocol):
    def chat(self, messages: list[dict]) -> str: ...


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    api_key: str = field(default="", repr=False)
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 0.5
    max_in_flight: int = 8

    def __post_init__(self) -> None:
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")

    @classmethod
    def from_env(cls, **overrides) -> "EndpointConfig":
        """Read TSART_API_BASE / TSART_API_KEY / TSART_MODEL; non-None overrides win."""
        values = {
            "base_url": os.environ.get(ENV_BASE, ""),
            "api_key": os.environ.get(ENV_KEY, ""),
            "model": os.environ.get(ENV_MODEL, ""),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        if not values["base_url"] or not values["model"]:
            raise ValueError(f"endpoint needs a base URL and model ({ENV_BASE}, {ENV_MODEL})")
        return cls(**values)

    def with_temperature(self, temperature: float) -> "EndpointConfig":
        return replace(self, temperature=temperature)


def redact(text: str, secret: str) -> str:
    return text.replace(secret, "***") if secret else text


class EndpointClient:
    """Thread-safe client; a semaphore caps concurrent in-flight requests."""

    def __init__(
        self,
        config: EndpointConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._http = httpx.Client(timeout=config.timeout, transport=transport)
        self._gate = threading.BoundedSemaphore(config.max_in_flight)
        self._sleep = sleep

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "EndpointClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def url(self) -> str:
        return self.config.base_url.rstrip("/") + "/chat/completions"

    def chat(self, messages: list[dict]) -> str:
        cfg = self.config
        body = {"model": cfg.model, "messages": messages, "temperature": cfg.temperature}
        headers = {"Authorization": f"Bearer {cfg.api_key}"} if cfg.api_key else {}
        last: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                delay = cfg.backoff_base * 2 ** (attempt - 1)
                log.info("retrying %s in %.2fs (attempt %d)", self.url, delay, attempt + 1)
                self._sleep(delay)
            log.debug("POST %s model=%s messages=%d", self.url, cfg.model, len(messages))
            try:
                with self._gate:
                    resp = self._http.post(self.url, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                last = EndpointTimeout(f"request to {self.url} timed out")
                log.warning("timeout: %s", redact(str(exc), cfg.api_key))
                continue
            except httpx.TransportError as exc:
                last = EndpointUnavailable(redact(f"cannot reach {self.url}: {exc}", cfg.api_key))
                log.warning("%s", last)
                continue
            if resp.status_code in _RETRYABLE_STATUS or resp.status_code >= 500:
                last = EndpointUnavailable(f"{self.url} returned HTTP {resp.status_code}")
                log.warning("%s", last)
                continue
            if resp.status_code >= 400:
                raise EndpointError(
                    redact(f"{self.url} returned HTTP {resp.status_code}: {resp.text[:200]}", cfg.api_key)
                )
            content = _extract_content(resp)
            log.debug("response from %s: %d chars", self.url, len(content))
            return content
        assert last is not None
        raise last


def _extract_content(resp: httpx.Response) -> str:
    try:
        content = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        raise MalformedResponse(f"unexpected response body: {resp.text[:200]!r}") from None
    if not isinstance(content, str):
        raise MalformedResponse("response content is not text")
    return content


def chat(config: EndpointConfig, messages: list[dict], transport: httpx.BaseTransport | None = None) -> str:
    """One completion from a chat-completions compatible endpoint."""
    with EndpointClient(config, transport=transport) as client:
        return client.chat(messages)
