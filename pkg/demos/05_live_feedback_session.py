"""Hosting a live human-judged session.

Writes a synthetic dataset and a HUMAN-mode config, then starts the
feedback service.  Point the browser dashboard (frontend/) at it, or drive
the HTTP API directly:

    GET  /api/session/default/pending
    POST /api/session/default/judgment
         {"comparison_id": 1, "outcome": "A", "confidence": "STRONG"}
    GET  /api/session/default/state?downsample=2
    WS   /api/session/default/events

Run:  python demos/05_live_feedback_session.py [port]
"""

import json
import sys
from pathlib import Path

from prefscan.dataset import save_dataset
from prefscan.server import serve
from prefscan.session import ExperimentConfig
from prefscan.synthetic import make_stripe_dataset

workdir = Path("live_session")
workdir.mkdir(exist_ok=True)
ds_dir = workdir / "dataset"
if not (ds_dir / "dataset.json").exists():
    save_dataset(make_stripe_dataset(24, 24, smooth=True), ds_dir)
    print(f"wrote synthetic dataset to {ds_dir}")

cfg = ExperimentConfig(
    dataset_path=str(ds_dir),
    judge_type="human",
    n_initial_random=6,
    n_steps=8,
    epochs=200,          # keep retraining snappy between judgments
    window=7,
    seed=0,
)
(workdir / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1))
print(f"wrote {workdir / 'config.json'}")

from prefscan.dataset import load_dataset

port = int(sys.argv[1]) if len(sys.argv) > 1 else 8765
print(f"serving on http://127.0.0.1:{port} - open the frontend/ dashboard "
      f"or poll the API; ctrl-c to stop")
serve(cfg, load_dataset(ds_dir), port=port, out_dir=workdir / "trace")
