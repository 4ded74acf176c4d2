"""Annotation service walkthrough: open a session, build a summary to budget,
finalize, rate it, and read the report — all against an in-process service
over a temporary data directory.

    python demos/annotation_flow.py
"""

import random
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from crisissumm import build_candidates, classify, normalize, tfidf_index
from crisissumm.corpus import Dataset, Tweet
from crisissumm.ranker import save_candidates
from crisissumm.service import ApiConfig, create_app
from crisissumm.taxonomy import TopicLabel, TopicLexicon

rng = random.Random(3)
lexicon = TopicLexicon.load()

# -- fixture data directory ---------------------------------------------------
topics = [t for t in TopicLabel if t is not TopicLabel.IRRELEVANT]
tweets = tuple(
    Tweet(id=f"t{i:03d}",
          raw_text=" ".join(rng.sample(sorted(lexicon.seeds(topics[i % len(topics)])), 3)
                            + [f"site{i}"]))
    for i in range(80)
)
dataset = normalize(Dataset(name="drill", tweets=tweets, summary_budget=6))
assignment = classify(dataset, lexicon, 0.5)
candidates = build_candidates(dataset, assignment, tfidf_index(dataset), lexicon)

workdir = Path(tempfile.mkdtemp(prefix="crisissumm-demo-"))
ds_dir = workdir / "datasets" / dataset.name
ds_dir.mkdir(parents=True)
dataset.save(ds_dir / "dataset.json")
assignment.save(ds_dir / "assignment.json")
save_candidates(candidates, dataset, ds_dir / "candidates.json")
print(f"data directory: {workdir}")

# -- the annotator's flow, over HTTP ------------------------------------------
client = TestClient(create_app(ApiConfig(data_dir=workdir)))

view = client.post("/sessions", json={
    "dataset": "drill", "annotator_id": "annotator-1",
    "mode": "GroundTruth", "shuffle_seed": 11,
}).json()
sid = view["session_id"]
print(f"opened session {sid}: budget {view['budget']}, "
      f"{len(view['candidates'])} topic tabs")

picked = 0
for topic, ids in view["candidates"].items():
    for tid in ids:
        if picked == view["budget"]:
            break
        client.post(f"/sessions/{sid}/toggle", json={"topic": topic, "tweet_id": tid})
        picked += 1

over = client.post(f"/sessions/{sid}/toggle",
                   json={"topic": topic, "tweet_id": ids[-1]})
print(f"41st-style overdraft rejected: HTTP {over.status_code} "
      f"({over.json()['message']})")

record = client.post(f"/sessions/{sid}/finalize").json()["record"]
print(f"finalized: {len(record['tweet_ids'])} tweets by {record['method']}")

client.post(f"/sessions/{sid}/ratings", json={
    "rater_id": "meta-1", "coverage": 4.7, "relevance": 4.8, "diversity": 4.8,
})
report = client.get("/reports/drill").json()
row = report["ratings"][0]
print(f"report echoes rating: coverage {row['coverage']}, "
      f"relevance {row['relevance']}, diversity {row['diversity']}")
print(f"coverage: {report['coverage']['per_summary'][0]['topics_present']} topics "
      f"present, missed {report['coverage']['per_summary'][0]['missed'] or 'none'}")
