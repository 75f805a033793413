"""Run lineage extraction against a chat-completion endpoint.

Credentials are read from the environment variable named in the endpoint
config; config files never hold the secret itself.
"""
from __future__ import annotations

import json
import logging
import os
import socket
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence
from urllib.parse import urlsplit

import yaml

from .corpus import Corpus, GoldRecord, PredictionRecord, script_difficulty
from .prompts import build_prompt, spec_for_script, task_query

log = logging.getLogger(__name__)


class EndpointUnreachable(RuntimeError):
    pass


class RequestFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    api_key_env: Optional[str] = None
    path: str = "/v1/chat/completions"
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout: float = 120.0
    max_attempts: int = 3
    backoff: float = 1.0
    workers: int = 4
    requests_per_second: Optional[float] = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def url(self) -> str:
        return self.base_url.rstrip("/") + "/" + self.path.lstrip("/")

    def headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            token = os.environ.get(self.api_key_env)
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers


def load_endpoint_config(path) -> EndpointConfig:
    data = yaml.safe_load(Path(path).read_text("utf-8")) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: endpoint config must be a mapping")
    for secret in ("api_key", "token", "authorization"):
        if secret in data:
            raise ValueError(f"{path}: put credentials in an environment variable "
                             f"and reference it with api_key_env, not {secret!r}")
    known = set(EndpointConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"{path}: unknown endpoint keys {sorted(unknown)}")
    return EndpointConfig(**data)


Transport = Callable[[str, dict, dict, float], dict]


def http_post_json(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    req = urllib.request.Request(url, json.dumps(payload).encode("utf-8"), headers, method="POST")
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return json.loads(resp.read().decode("utf-8"))


def probe(endpoint: EndpointConfig, timeout: float = 5.0) -> None:
    """Open and close a TCP connection to the endpoint host."""
    parts = urlsplit(endpoint.base_url)
    port = parts.port or (443 if parts.scheme == "https" else 80)
    try:
        with socket.create_connection((parts.hostname, port), timeout=min(timeout, endpoint.timeout)):
            pass
    except OSError as exc:
        raise EndpointUnreachable(f"{endpoint.base_url}: {exc}") from None


class _RateLimiter:
    def __init__(self, per_second: Optional[float]):
        self.interval = 1.0 / per_second if per_second else 0.0
        self.lock = threading.Lock()
        self.next_at = 0.0

    def wait(self):
        if not self.interval:
            return
        with self.lock:
            now = time.monotonic()
            delay = self.next_at - now
            self.next_at = max(now, self.next_at) + self.interval
        if delay > 0:
            time.sleep(delay)


def _content(body: dict) -> str:
    try:
        return body["choices"][0]["message"]["content"] or ""
    except (KeyError, IndexError, TypeError):
        raise RequestFailed(f"unexpected response shape: {str(body)[:200]}") from None


class PromptCache:
    """Per-script prompt prefixes, built once per run."""

    def __init__(self, corpus: Corpus, strategy: str):
        self.corpus, self.strategy = corpus, strategy
        self.prompts: dict[str, str] = {}
        self.builds = 0
        self.lock = threading.Lock()

    def get(self, script_id: str) -> str:
        with self.lock:
            if script_id not in self.prompts:
                entry = self.corpus.entries[script_id]
                spec = spec_for_script(self.strategy, entry.script, entry.examples,
                                       script_difficulty(entry.script))
                self.prompts[script_id] = build_prompt(spec)
                self.builds += 1
            return self.prompts[script_id]


def run_extraction(
    corpus: Corpus,
    gold: Sequence[GoldRecord],
    strategy: str,
    endpoint: EndpointConfig,
    trial_id: str,
    seed: Optional[int] = None,
    transport: Transport = http_post_json,
    check_reachable: bool = True,
    cache: Optional[PromptCache] = None,
) -> list[PredictionRecord]:
    """One prediction record per gold task, in gold order.

    A task whose request still fails after all retries gets an empty
    response and a note; it is never dropped.
    """
    missing = sorted({g.task.script_id for g in gold} - set(corpus.entries))
    if missing:
        raise KeyError(f"gold references scripts absent from the corpus: {missing}")
    if check_reachable:
        probe(endpoint)
    cache = cache or PromptCache(corpus, strategy)
    for sid in dict.fromkeys(g.task.script_id for g in gold):
        cache.get(sid)
    limiter = _RateLimiter(endpoint.requests_per_second)
    headers = endpoint.headers()

    def one(record: GoldRecord) -> PredictionRecord:
        payload = {
            "model": endpoint.model,
            "messages": [
                {"role": "system", "content": cache.get(record.task.script_id)},
                {"role": "user", "content": task_query(record.task.target_schema)},
            ],
            "temperature": endpoint.temperature,
            "max_tokens": endpoint.max_tokens,
        }
        if seed is not None:
            payload["seed"] = seed
        last_error = ""
        for attempt in range(1, endpoint.max_attempts + 1):
            limiter.wait()
            try:
                text = _content(transport(endpoint.url, payload, headers, endpoint.timeout))
                return PredictionRecord(record.task, text, trial_id, seed)
            except (OSError, urllib.error.URLError, RequestFailed, ValueError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                log.warning("%s attempt %d failed: %s", record.task.key, attempt, last_error)
                if attempt < endpoint.max_attempts:
                    time.sleep(endpoint.backoff * 2 ** (attempt - 1))
        return PredictionRecord(record.task, "", trial_id, seed,
                                note=f"request failed after {endpoint.max_attempts} attempts: {last_error}")

    with ThreadPoolExecutor(max_workers=endpoint.workers) as pool:
        return list(pool.map(one, gold))
