"""Knowledge-base retrieval over segments, glossary assembly, dictionary MT.

Unmatched segments fall back to their source text verbatim, so the
dictionary translator never drops characters and punctuation survives
in place.
"""

import os
from dataclasses import dataclass

from .lexicon import Lexicon
from .segmenter import Segment, segment


@dataclass(frozen=True)
class RetrievedTerm:
    source_text: str
    target_text: str
    matched: bool


def retrieve(lexicon: Lexicon, segments: list[Segment]) -> list[RetrievedTerm]:
    """Map each segment to its knowledge-base target, or to itself on a miss."""
    terms = []
    for seg in segments:
        entry = lexicon.lookup(seg.text)
        if entry is not None:
            terms.append(RetrievedTerm(seg.text, entry.target_surface, True))
        else:
            terms.append(RetrievedTerm(seg.text, seg.text, False))
    return terms


def glossary_block(terms: list[RetrievedTerm]) -> str:
    """One ``source => target`` line per matched term, first occurrence only."""
    seen = set()
    lines = []
    for term in terms:
        if term.matched and term.source_text not in seen:
            seen.add(term.source_text)
            lines.append(f"{term.source_text} => {term.target_text}")
    return "\n".join(lines)


def dictionary_translate(lexicon: Lexicon, text: str) -> str:
    """Literal dictionary MT: segment, substitute targets, keep misses verbatim."""
    return "".join(t.target_text for t in retrieve(lexicon, segment(lexicon, text)))


@dataclass(frozen=True)
class DictEndpoint:
    """Remote dictionary-MT service: plain-text POST in, plain-text out."""

    base_url: str
    timeout: float = 30.0

    def canonical_request(self, text: str) -> dict:
        return {"kind": "external_dict", "base_url": self.base_url, "text": text}


def external_dictionary_translate(endpoint: DictEndpoint, text: str, cache=None) -> str:
    """Translate via the remote dictionary service, caching like LLM responses.

    Sends UTF-8 plain text, returns the response body verbatim. Retries
    transport failures and 429/5xx like the chat client; a bearer token is
    attached from ``RAGMT_DICT_TOKEN`` when set.
    """
    from . import llm

    request_obj = endpoint.canonical_request(text)
    key = llm.object_key(request_obj)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit.response_text

    headers = {"Content-Type": "text/plain; charset=utf-8"}
    token = os.environ.get("RAGMT_DICT_TOKEN")
    if token:
        headers["Authorization"] = f"Bearer {token}"

    def call():
        import requests

        return requests.post(
            endpoint.base_url,
            data=text.encode("utf-8"),
            headers=headers,
            timeout=endpoint.timeout,
        )

    response = llm.request_with_retry(call, description=f"dictionary MT at {endpoint.base_url}")
    translated = response.content.decode("utf-8")
    if cache is not None:
        cache.put(llm.CacheEntry.build(request_obj, translated))
    return translated
