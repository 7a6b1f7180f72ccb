"""Preference survey: bundle construction, response log, tally, HTTP service.

A bundle pairs each selected test sample with two model output
distributions, blind-labelled A and B by a seeded coin flip. Provenance
(which side came from which model) lives only in the server-side bundle
file and is never serialized to clients; it is consulted again only at
tally time. Responses append to a JSONL log, one line per response, which
makes the log crash-safe and trivially auditable.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from typing import Literal

from fastapi import FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import Corpus
from .errors import DuplicateResponse, InvalidRequest, UnknownItem
from .evalstats import PreferenceCounts, preference_test, render_table
from .featurize import featurize
from .model import SoftmaxClassifier, predict_distribution
from .rng import SplitMix64

CHOICES = ("A", "B", "no_difference")
PROVENANCES = ("baseline", "multi_label")


@dataclass(frozen=True)
class SurveyItem:
    item_id: str
    sample_id: str
    text: str
    dist_a: tuple[float, ...]
    dist_b: tuple[float, ...]
    a_is: str  # provenance of side A: "baseline" or "multi_label"

    def client_view(self) -> dict:
        """The wire payload for participants; carries no provenance."""
        return {
            "item_id": self.item_id,
            "text": self.text,
            "dist_A": list(self.dist_a),
            "dist_B": list(self.dist_b),
        }


@dataclass
class SurveyBundle:
    bundle_id: str
    labels: tuple[str, ...]
    items: list[SurveyItem]
    seed: int

    def item(self, item_id: str) -> SurveyItem:
        for it in self.items:
            if it.item_id == item_id:
                return it
        raise UnknownItem(item_id)


@dataclass(frozen=True)
class SurveyResponse:
    participant_id: str
    item_id: str
    choice: str
    timestamp: int  # UTC seconds

    def __post_init__(self):
        if self.choice not in CHOICES:
            raise ValueError(f"choice must be one of {CHOICES}, got {self.choice!r}")


def build_bundle(
    corpus: Corpus,
    baseline: SoftmaxClassifier,
    multilabel: SoftmaxClassifier,
    k: int,
    seed: int,
) -> SurveyBundle:
    """Draw k test samples without replacement and pair both models'
    distributions for each, with seeded A/B side assignment."""
    test = corpus.split("test")
    if k < 1 or k > len(test):
        raise InvalidRequest(f"k must be in [1, {len(test)}], got {k}")
    if baseline.schema != multilabel.schema:
        raise InvalidRequest("models must share one label schema")
    rng = SplitMix64(seed)
    picks = rng.sample_without_replacement(len(test), k)
    items = []
    for i, pick in enumerate(picks):
        sample = test[pick]
        fv = featurize(sample.text, baseline.space)
        dist_base = predict_distribution(baseline, fv).probs
        fv_m = featurize(sample.text, multilabel.space)
        dist_multi = predict_distribution(multilabel, fv_m).probs
        if rng.coin():
            dist_a, dist_b, a_is = dist_base, dist_multi, "baseline"
        else:
            dist_a, dist_b, a_is = dist_multi, dist_base, "multi_label"
        items.append(SurveyItem(f"item_{i}", sample.sample_id, sample.text, dist_a, dist_b, a_is))
    return SurveyBundle(f"bundle_{seed}", corpus.schema.labels, items, seed)


def save_bundle(bundle: SurveyBundle, path) -> None:
    doc = {
        "bundle_id": bundle.bundle_id,
        "labels": list(bundle.labels),
        "seed": bundle.seed,
        "items": [
            {
                "item_id": it.item_id,
                "sample_id": it.sample_id,
                "text": it.text,
                "dist_a": list(it.dist_a),
                "dist_b": list(it.dist_b),
                "a_is": it.a_is,
            }
            for it in bundle.items
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def load_bundle(path) -> SurveyBundle:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    items = [
        SurveyItem(
            d["item_id"],
            d["sample_id"],
            d["text"],
            tuple(d["dist_a"]),
            tuple(d["dist_b"]),
            d["a_is"],
        )
        for d in doc["items"]
    ]
    return SurveyBundle(doc["bundle_id"], tuple(doc["labels"]), items, doc["seed"])


class ResponseLog:
    """Append-only JSONL response store with duplicate rejection.

    Appends are serialized through a lock; tally readers see a consistent
    snapshot (read to current end of file).
    """

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._seen: set[tuple[str, str]] = set()
        if os.path.exists(path):
            for response in self.read_all():
                self._seen.add((response.participant_id, response.item_id))

    def read_all(self) -> list[SurveyResponse]:
        if not os.path.exists(self.path):
            return []
        responses = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                d = json.loads(line)
                responses.append(
                    SurveyResponse(d["participant"], d["item_id"], d["choice"], d["timestamp"])
                )
        return responses

    def answered_by(self, participant_id: str) -> set[str]:
        return {item for pid, item in self._seen if pid == participant_id}

    def record(self, response: SurveyResponse, bundle: SurveyBundle) -> None:
        bundle.item(response.item_id)  # raises UnknownItem
        with self._lock:
            key = (response.participant_id, response.item_id)
            if key in self._seen:
                raise DuplicateResponse(f"{response.participant_id} already answered {response.item_id}")
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "participant": response.participant_id,
                            "item_id": response.item_id,
                            "choice": response.choice,
                            "timestamp": response.timestamp,
                        }
                    )
                    + "\n"
                )
            self._seen.add(key)


def tally(responses, bundle: SurveyBundle) -> PreferenceCounts:
    """De-blind A/B choices via bundle provenance and count per category."""
    counts = {"baseline": 0, "multi_label": 0, "no_difference": 0}
    for response in responses:
        item = bundle.item(response.item_id)
        if response.choice == "no_difference":
            counts["no_difference"] += 1
        elif response.choice == "A":
            counts[item.a_is] += 1
        else:
            other = "multi_label" if item.a_is == "baseline" else "baseline"
            counts[other] += 1
    return PreferenceCounts(counts["baseline"], counts["multi_label"], counts["no_difference"])


ADMIN_TOKEN_ENV = "ANNODIS_ADMIN_TOKEN"


class ResponseBody(BaseModel):
    participant: str
    item_id: str
    choice: Literal["A", "B", "no_difference"]


def create_app(bundle: SurveyBundle, log: ResponseLog, static_dir=None):
    """FastAPI app exposing the three survey endpoints plus static UI files."""
    app = FastAPI(title="annodis survey")

    @app.get("/api/bundle/next")
    def next_item(participant: str):
        answered = log.answered_by(participant)
        total = len(bundle.items)
        for item in bundle.items:
            if item.item_id not in answered:
                payload = item.client_view()
                payload["labels"] = list(bundle.labels)
                payload["progress"] = {"answered": len(answered), "total": total}
                return payload
        return {"done": True, "progress": {"answered": len(answered), "total": total}}

    @app.post("/api/response")
    def post_response(body: ResponseBody):
        response = SurveyResponse(body.participant, body.item_id, body.choice, int(time.time()))
        try:
            log.record(response, bundle)
        except UnknownItem:
            raise HTTPException(status_code=404, detail=f"unknown item {body.item_id}")
        except DuplicateResponse:
            raise HTTPException(status_code=409, detail="already answered")
        return {"status": "ok"}

    @app.get("/api/results")
    def results(request: Request):
        expected = os.environ.get(ADMIN_TOKEN_ENV)
        provided = request.headers.get("x-admin-token") or request.query_params.get("token")
        if not expected or provided != expected:
            raise HTTPException(status_code=403, detail="admin token required")
        counts = tally(log.read_all(), bundle)
        if counts.total == 0:
            return {"total": 0, "note": "no responses yet"}
        result = preference_test(counts)
        doc = result.to_dict()
        doc["total"] = counts.total
        doc["table"] = render_table(result)
        return doc

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
