"""Model providers: chat completion and text embedding.

Remote providers speak the OpenAI-compatible HTTP shape. A deterministic
feature-hashing embedder ships as the offline fallback so the whole
pipeline runs without network access. Stub chat providers support tests
and the CLI's --stub-llm mode.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np
import requests

from .errors import ProviderUnavailable
from .tokens import tokenize


class ChatProvider(Protocol):
    id: str

    def complete(self, prompt: str, temperature: float = 0.0) -> str: ...


class EmbeddingProvider(Protocol):
    id: str
    dimension: int

    def embed_many(self, texts: Sequence[str]) -> np.ndarray: ...


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # zero vectors stay zero
    return (matrix / norms).astype(np.float32)


def embed(text: str, provider: EmbeddingProvider) -> np.ndarray:
    """Unit-normalized embedding for one text (float32)."""
    return provider.embed_many([text])[0]


class HashedTfEmbedder:
    """Feature-hashed term-frequency vectors, unit length.

    Buckets come from md5 so vectors are stable across processes and
    platforms. Quality is far below a learned model but behavior is
    deterministic, which the offline pipeline and tests rely on.
    """

    def __init__(self, dimension: int = 256) -> None:
        self.dimension = dimension
        self.id = f"hashed-tf-{dimension}"
        self._bucket_cache: dict[str, int] = {}

    def _bucket(self, token: str) -> int:
        b = self._bucket_cache.get(token)
        if b is None:
            digest = hashlib.md5(token.encode("utf-8")).hexdigest()
            b = int(digest[:8], 16) % self.dimension
            self._bucket_cache[token] = b
        return b

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        matrix = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            for token in tokenize(text):
                matrix[i, self._bucket(token)] += 1.0
        return _normalize_rows(matrix)


@dataclass
class OpenAiCompatChat:
    """Chat completions against any OpenAI-compatible endpoint."""

    base_url: str
    model: str
    api_key: Optional[str] = None
    timeout: float = 120.0

    @property
    def id(self) -> str:
        return f"chat:{self.model}"

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def complete(self, prompt: str, temperature: float = 0.0) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }
        url = self.base_url.rstrip("/") + "/chat/completions"
        try:
            resp = requests.post(url, json=payload, headers=self._headers(), timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"chat endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(f"chat endpoint returned {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"chat endpoint returned an unexpected shape: {exc}") from exc


@dataclass
class OpenAiCompatEmbedder:
    """Embeddings against any OpenAI-compatible endpoint."""

    base_url: str
    model: str
    api_key: Optional[str] = None
    dimension: int = 0  # learned from the first response when left at 0
    timeout: float = 120.0

    @property
    def id(self) -> str:
        return f"embed:{self.model}"

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        payload = {"model": self.model, "input": list(texts)}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = self.base_url.rstrip("/") + "/embeddings"
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"embedding endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(
                f"embedding endpoint returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            data = sorted(resp.json()["data"], key=lambda d: d["index"])
            matrix = np.array([d["embedding"] for d in data], dtype=np.float64)
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"embedding endpoint returned an unexpected shape: {exc}") from exc
        if matrix.ndim != 2 or matrix.shape[0] != len(texts):
            raise ProviderUnavailable("embedding endpoint returned the wrong number of vectors")
        if self.dimension == 0:
            self.dimension = int(matrix.shape[1])
        return _normalize_rows(matrix)


# --- stubs ---------------------------------------------------------------------

@dataclass
class StaticChatStub:
    """Always answers with the same text; records every prompt it saw."""

    reply: str
    id: str = "stub:static"
    prompts: list[str] = field(default_factory=list)

    def complete(self, prompt: str, temperature: float = 0.0) -> str:
        self.prompts.append(prompt)
        return self.reply


@dataclass
class ScriptedChatStub:
    """Plays back a fixed sequence of replies."""

    replies: list[str]
    id: str = "stub:scripted"
    prompts: list[str] = field(default_factory=list)

    def complete(self, prompt: str, temperature: float = 0.0) -> str:
        self.prompts.append(prompt)
        if not self.replies:
            raise ProviderUnavailable("scripted stub ran out of replies")
        return self.replies.pop(0)


_CONTEXT_BLOCK_RE = re.compile(r"Context:\n(.*?)\n\nQuestion:", re.DOTALL)


@dataclass
class ContextEchoStub:
    """Echoes the context block of a prompt back as the answer.

    Good enough to exercise the full retrieval-to-answer path offline:
    whatever facts retrieval surfaced come back verbatim.
    """

    id: str = "stub:context-echo"
    prompts: list[str] = field(default_factory=list)

    def complete(self, prompt: str, temperature: float = 0.0) -> str:
        self.prompts.append(prompt)
        m = _CONTEXT_BLOCK_RE.search(prompt)
        if m:
            return m.group(1).strip()
        return prompt.strip()


# --- environment resolution ------------------------------------------------------

def resolve_chat_provider(stub: bool = False) -> ChatProvider:
    """Chat provider from LLM_* env vars; stub=True short-circuits to the echo stub."""
    if stub:
        return ContextEchoStub()
    base = os.environ.get("LLM_API_BASE")
    model = os.environ.get("LLM_MODEL")
    if not base or not model:
        raise ProviderUnavailable(
            "no chat provider configured: set LLM_API_BASE and LLM_MODEL, or use the stub"
        )
    return OpenAiCompatChat(base_url=base, model=model, api_key=os.environ.get("LLM_API_KEY"))


def resolve_embedder() -> EmbeddingProvider:
    """Embedder from EMBED_* env vars; EMBED_FALLBACK=1 forces the hashed fallback."""
    if os.environ.get("EMBED_FALLBACK") == "1":
        return HashedTfEmbedder()
    base = os.environ.get("EMBED_API_BASE")
    model = os.environ.get("EMBED_MODEL")
    if base and model:
        return OpenAiCompatEmbedder(base_url=base, model=model, api_key=os.environ.get("EMBED_API_KEY"))
    return HashedTfEmbedder()
