"""HTTP chat-completion client with retries, transcripts, and a stub backend.

The client sends the conventional two-message (system/user) JSON payload and
returns the completion text. Transient failures (connection errors, timeouts,
HTTP 429/5xx) are retried with exponential backoff; other HTTP errors fail
immediately. No sampling parameters are transmitted. Endpoints with the
``stub://`` scheme are served locally and deterministically, which keeps test
and fixture runs off the network.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass

import requests

from . import prompts

STUB_SCHEME = "stub://"
TRANSIENT_STATUSES = frozenset({429, 500, 502, 503, 504})


class LlmError(Exception):
    """Request failed after exhausting retries, or a non-transient failure."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class LlmConfigError(LlmError):
    pass


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str = "default"
    api_key_env: str = "KC_API_KEY"
    timeout: float = 60.0
    max_retries: int = 3
    parallelism: int = 1
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.timeout <= 0:
            raise LlmConfigError("timeout must be > 0")
        if self.max_retries < 0:
            raise LlmConfigError("max_retries must be >= 0")
        if self.parallelism < 1:
            raise LlmConfigError("parallelism must be >= 1")

    @property
    def is_stub(self) -> bool:
        return self.endpoint.startswith(STUB_SCHEME)


def _resolve_api_key(config: LlmConfig) -> str:
    key = os.environ.get(config.api_key_env)
    if not key:
        raise LlmConfigError(
            f"API key environment variable {config.api_key_env!r} is not set"
        )
    return key


def ensure_ready(config: LlmConfig) -> None:
    """Fail fast (before any batch work) when the API key is unresolvable."""
    if not config.is_stub:
        _resolve_api_key(config)


def _request_payload(config: LlmConfig, bundle) -> dict:
    return {
        "model": config.model,
        "messages": [
            {"role": "system", "content": bundle.system_text},
            {"role": "user", "content": bundle.user_text},
        ],
    }


def _extract_text(body: dict) -> str:
    try:
        return body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise LlmError(f"malformed completion response: {exc}")


def _write_transcript(transcript_dir, record: dict) -> None:
    if transcript_dir is None:
        return
    os.makedirs(transcript_dir, exist_ok=True)
    blob = json.dumps(record, sort_keys=True, ensure_ascii=False).encode("utf-8")
    digest = hashlib.sha256(blob).hexdigest()
    path = os.path.join(transcript_dir, f"{digest}.json")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(blob.decode("utf-8"))
    os.replace(tmp, path)


def complete(config: LlmConfig, bundle, transcript_dir=None, sleep=time.sleep) -> str:
    """Send a bundle to the configured endpoint and return the completion text."""
    if config.is_stub:
        text = stub_complete(bundle)
        _write_transcript(
            transcript_dir,
            {
                "endpoint": config.endpoint,
                "request": _request_payload(config, bundle),
                "response_text": text,
                "variant": bundle.variant,
            },
        )
        return text

    key = _resolve_api_key(config)
    payload = _request_payload(config, bundle)
    headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}
    last_error = None
    for attempt in range(config.max_retries + 1):
        if attempt:
            sleep(config.backoff_base * (2 ** (attempt - 1)))
        try:
            resp = requests.post(
                config.endpoint, json=payload, headers=headers, timeout=config.timeout
            )
        except requests.RequestException as exc:
            last_error = LlmError(f"connection failure: {exc}")
            continue
        if resp.status_code == 200:
            text = _extract_text(resp.json())
            _write_transcript(
                transcript_dir,
                {
                    "endpoint": config.endpoint,
                    "request": payload,
                    "status": resp.status_code,
                    "response_text": text,
                    "variant": bundle.variant,
                },
            )
            return text
        if resp.status_code in TRANSIENT_STATUSES:
            last_error = LlmError(
                f"transient HTTP {resp.status_code}", status=resp.status_code
            )
            continue
        raise LlmError(
            f"HTTP {resp.status_code} from {config.endpoint}: {resp.text[:200]}",
            status=resp.status_code,
        )
    raise LlmError(
        f"request failed after {config.max_retries + 1} attempts: {last_error}",
        status=getattr(last_error, "status", None),
    )


def complete_with_format_retry(config: LlmConfig, bundle, parse, transcript_dir=None, sleep=time.sleep):
    """Call the endpoint, parse the response, and retry once on a format error.

    The single retry appends a format reminder to the user message; a second
    malformed response is a hard error for the caller to record.
    """
    text = complete(config, bundle, transcript_dir=transcript_dir, sleep=sleep)
    try:
        return parse(text)
    except prompts.ResponseFormatError as first:
        reminder = prompts.PromptBundle(
            system_text=bundle.system_text,
            user_text=bundle.user_text
            + "\n\nYour previous response did not follow the required format "
            f"({first}). Respond again, following the layout exactly.",
            variant=bundle.variant,
            substitutions=bundle.substitutions,
        )
        text = complete(config, reminder, transcript_dir=transcript_dir, sleep=sleep)
        return parse(text)


# --- Deterministic stub backend -------------------------------------------


def stub_complete(bundle) -> str:
    """Produce a format-compliant canned response derived only from the bundle."""
    if bundle.variant == prompts.ENRICHMENT:
        kc_id = bundle.substitutions.get("kc_id", 0)
        return (
            f"LABEL: Recurring code pattern {kc_id}\n"
            "DESC: The snippet shows a recurring structural pattern in the student's solution.\n"
        )
    kc_section = bundle.substitutions.get("kc_section", "")
    kc_labels = [
        line[2:].split(":", 1)[0].strip()
        for line in kc_section.splitlines()
        if line.startswith("- ")
    ]
    if kc_labels:
        overview = (
            "This practice problem exercises the following skills: "
            + "; ".join(kc_labels)
            + "."
        )
    else:
        overview = "This practice problem reviews the core logic of the original task."
    lines = [
        "QUESTION: Write a method that scans an integer array and counts the "
        "elements that satisfy a combined condition.",
        f"OVERVIEW: {overview}",
        "STEP 1: Declare a counter initialized to zero before the loop.",
        "```java",
        "int count = 0;",
        "```",
        "STEP 2: Loop over every element of the array with an index-based for loop.",
        "```java",
        "for (int i = 0; i < arr.length; i++) {",
        "    int value = arr[i];",
        "}",
        "```",
        "STEP 3: Combine the two tests with parentheses so the grouping of && and "
        "|| is explicit, and increment the counter when the condition holds.",
        "```java",
        "if ((value > 0 && value % 2 == 0) || value == target) {",
        "    count = count + 1;",
        "}",
        "```",
        "STEP 4: Return the counter after the loop finishes.",
        "```java",
        "return count;",
        "```",
    ]
    return "\n".join(lines) + "\n"
