"""Command-line entry points.

    prefscan run     --config cfg.json [--variant ties=on,weights=on]
                     [--seed N] [--out DIR] [--resume] [--checkpoint]
    prefscan predict --model SNAPSHOT_DIR --dataset PATH --out DIR
    prefscan analyze --dataset PATH --map loop_area|char_angle|wall_charge
                     --out DIR [--radius R]
    prefscan serve   --config cfg.json --port P [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import (
    ConfigurationError,
    DataError,
    FormatError,
    InputError,
    NumericalError,
)

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _load_config(path):
    from .session import ExperimentConfig
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config is not valid JSON: {e}")
    return ExperimentConfig.from_dict(raw)


def _parse_variant(text):
    """'ties=on,weights=off' -> (True, False)."""
    ties, weights = True, True
    for part in text.split(","):
        key, _, val = part.partition("=")
        if val not in ("on", "off"):
            raise ConfigurationError(f"variant values must be on/off, got {part!r}")
        if key == "ties":
            ties = val == "on"
        elif key == "weights":
            weights = val == "on"
        else:
            raise ConfigurationError(f"unknown variant key {key!r}")
    return ties, weights


def cmd_run(args) -> int:
    from .session import run_experiment
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
        cfg.oracle.seed = args.seed
    if args.variant:
        cfg = cfg.with_variant(*_parse_variant(args.variant))
    if cfg.judge_type != "oracle":
        raise ConfigurationError(
            "run is headless; HUMAN-mode sessions go through `prefscan serve`")
    trace = run_experiment(cfg, out_dir=args.out, checkpoint=args.checkpoint,
                           resume=args.resume)
    print(f"completed {trace.session.step} steps; "
          f"{len(trace.session.measured)} candidates measured; "
          f"{len(trace.session.comparisons)} comparisons collected")
    if args.out:
        print(f"trace exported to {args.out}")
    return 0


def cmd_predict(args) -> int:
    import numpy as np
    from .dataset import load_dataset, write_map_container
    from .session import predict_only
    ds = load_dataset(args.dataset)
    mean, var = predict_only(args.model, ds)
    h, w = ds.shape
    write_map_container(args.out, "predicted_utility",
                        {"utility_mean": mean.reshape(h, w),
                         "utility_variance": var.reshape(h, w)})
    k = min(args.top_k, mean.size)
    order = np.argsort(mean, kind="stable")
    overlay = {
        "topk": [{"id": int(i), "row": int(i) // w, "col": int(i) % w,
                  "utility": float(mean[i])} for i in order[::-1][:k]],
        "bottomk": [{"id": int(i), "row": int(i) // w, "col": int(i) % w,
                     "utility": float(mean[i])} for i in order[:k]],
    }
    Path(args.out, "overlays.json").write_text(
        json.dumps(overlay, sort_keys=True, separators=(",", ":")) + "\n")
    print(f"predicted utility over {h}x{w} grid -> {args.out}")
    return 0


def cmd_analyze(args) -> int:
    from .analysis import AngleConfig, analysis_map
    from .dataset import load_dataset, write_map_container
    ds = load_dataset(args.dataset)
    arr = analysis_map(ds, args.map, angle_cfg=AngleConfig(radius=args.radius),
                       radius=args.radius)
    write_map_container(args.out, args.map, {args.map: arr})
    if args.png:
        from PIL import Image
        import numpy as np
        from .dataset import normalize_scalars
        img = normalize_scalars(arr)
        Image.fromarray((img * 255).astype(np.uint8), mode="L").save(
            Path(args.out) / f"{args.map}.png")
    print(f"{args.map} map for {ds.name} -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .dataset import load_dataset
    from .server import serve
    cfg = _load_config(args.config)
    if cfg.judge_type != "human":
        raise ConfigurationError(
            "serve hosts HUMAN-mode sessions; set judge_type to 'human'")
    ds = load_dataset(cfg.dataset_path)
    print(f"serving session 'default' on {args.host}:{args.port}")
    serve(cfg, ds, port=args.port, host=args.host, out_dir=args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prefscan", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a headless oracle-mode experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--variant", default=None,
                     help="ablation switches, e.g. ties=on,weights=off")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None)
    run.add_argument("--checkpoint", action="store_true")
    run.add_argument("--resume", action="store_true")
    run.set_defaults(fn=cmd_run)

    pred = sub.add_parser("predict", help="re-apply a saved model to a dataset")
    pred.add_argument("--model", required=True)
    pred.add_argument("--dataset", required=True)
    pred.add_argument("--out", required=True)
    pred.add_argument("--top-k", type=int, default=50)
    pred.set_defaults(fn=cmd_predict)

    ana = sub.add_parser("analyze", help="compute a ground-truth map")
    ana.add_argument("--dataset", required=True)
    ana.add_argument("--map", required=True,
                     choices=["loop_area", "char_angle", "wall_charge"])
    ana.add_argument("--out", required=True)
    ana.add_argument("--radius", type=int, default=5)
    ana.add_argument("--png", action="store_true")
    ana.set_defaults(fn=cmd_analyze)

    srv = sub.add_parser("serve", help="host a HUMAN-mode feedback session")
    srv.add_argument("--config", required=True)
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--out", default=None)
    srv.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigurationError, InputError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FormatError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
