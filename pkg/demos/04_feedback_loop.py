"""
The steward feedback loop
=========================

Crosswalk results arrive as a review queue.  A steward accepts the good
ones and overrides the bad ones; every decision lands in an append-only
log, and retraining folds that ground truth into a classifier that wins
the next time the same kind of column shows up.
"""

import tempfile
from pathlib import Path

from metaharmon import marine_litter_schema, train_classifier
from metaharmon.service import ReviewService, load_decision_log

schema = marine_litter_schema()

with tempfile.TemporaryDirectory() as tmp:
    service = ReviewService(schema, log_dir=tmp)

    # A survey team submits their column headers.  'derelict gear' is
    # field jargon the edit-distance matcher has no hope with.
    run = service.submit(
        {
            "source": {
                "dataset_id": "beach-survey-2024",
                "columns": [{"name": "straw"}, {"name": "derelict gear"}],
            }
        }
    )
    print(f"run {run['run_id']}:")
    for item in run["items"]:
        r = item["result"]
        print(
            f"  {item['item_id']}  {r['source_column']!r} -> {r['matched_entry_id']}"
            f" score={r['score']} {r['confidence']}"
        )

    # The queue surfaces the weakest match first; that is where steward
    # attention pays off.
    pending = service.pending(run["run_id"])
    weakest = pending[0]
    print(f"\nweakest pending: {weakest['result']['source_column']!r}")

    # The steward knows derelict gear means abandoned fishing nets.
    service.decide(weakest["item_id"], {"action": "override", "entry_id": "e0014"})
    service.decide(pending[1]["item_id"], {"action": "accept"})
    print("decisions recorded:", [r.decision for r in service.records])

    # Retraining builds a nearest-centroid classifier from the log.
    print("retrain ->", service.retrain())

    # Resubmitting the same jargon now goes straight to the right entry.
    rerun = service.submit(
        {"source": {"dataset_id": "beach-survey-2024b", "columns": [{"name": "derelict gear"}]}}
    )
    r = rerun["items"][0]["result"]
    print(f"\nresubmitted 'derelict gear' -> {r['matched_entry_id']} via {r['method']}")
    print("  path:", "/".join(r["predicted_path"]))

    # The log alone reconstructs the classifier: same entries, same
    # centroids, byte for byte.
    records = load_decision_log(Path(tmp) / "decisions.ndjson")
    replayed = train_classifier(records, schema)
    same = (replayed.centroids == service.classifier.centroids).all()
    print(f"\nreplayed {len(records)} log records; centroids identical: {bool(same)}")
