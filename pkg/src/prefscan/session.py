"""Experiment orchestration: seed, judge, train, predict, acquire, repeat.

A session owns the dataset, the measured set, every comparison made, and
the current model.  Each step selects a pair of unmeasured candidates,
collects up to three judgments (pair vs each other, each vs the current
best), retrains, and re-predicts the full utility map.  Traces are written
incrementally so a crash or suspension leaves a resumable, byte-stable
record on disk.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .acquisition import AcquisitionConfig, SelectionResult, current_best, select_pair
from .analysis import AngleConfig, analysis_map
from .dataset import (
    Dataset,
    PayloadKind,
    all_patch_inputs,
    load_dataset,
    normalize_scalars,
)
from .errors import (
    CandidatesExhausted,
    ConfigurationError,
    FormatError,
    StateError,
)
from .gp import (
    KernelHyperparams,
    LikelihoodConfig,
    PreferenceModel,
    predict_utility,
    train_joint,
)
from .judgments import (
    DEFAULT_CONFIDENCE_WEIGHTS,
    ComparisonRecord,
    Confidence,
    Judgment,
    record_from_judgment,
)
from .network import Architecture, init_params
from .oracle import Oracle, OracleConfig
from .persist import load_model, save_model

ORACLE_SCALARS = ("structure", "loop_area", "char_angle", "wall_charge")


@dataclass
class ExperimentConfig:
    dataset_path: str = ""
    judge_type: str = "oracle"                # "oracle" | "human"
    oracle: OracleConfig = field(default_factory=OracleConfig)
    oracle_scalar: str = "loop_area"
    n_initial_random: int = 10
    n_steps: int = 20
    epochs: int = 1000
    likelihood: LikelihoodConfig = field(default_factory=LikelihoodConfig)
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    window: int = 9
    hidden: tuple = (16,)
    latent_dim: int = 2
    activation: str = "tanh"
    seed: int = 0
    learning_rate: float = 1e-2
    angle_radius: int = 5
    top_k: int = 50
    export_png: bool = False
    confidence_weights: dict = field(
        default_factory=lambda: {k.value: v
                                 for k, v in DEFAULT_CONFIDENCE_WEIGHTS.items()})

    def __post_init__(self):
        if self.n_initial_random < 2:
            raise ConfigurationError(
                f"n_initial_random must be >= 2, got {self.n_initial_random}")
        if self.n_steps < 0:
            raise ConfigurationError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.judge_type not in ("oracle", "human"):
            raise ConfigurationError(f"unknown judge type {self.judge_type!r}")
        if self.oracle_scalar not in ORACLE_SCALARS:
            raise ConfigurationError(
                f"unknown oracle scalar {self.oracle_scalar!r}")
        if self.n_steps > 0 and not self.acquisition.covers(self.n_steps):
            raise ConfigurationError(
                f"beta schedule does not cover steps 1..{self.n_steps}")

    @property
    def weight_table(self) -> dict:
        return {Confidence(k): float(v)
                for k, v in self.confidence_weights.items()}

    def architecture(self) -> Architecture:
        sizes = (self.window * self.window, *self.hidden, self.latent_dim)
        return Architecture(sizes, self.activation)

    def with_variant(self, ties_on: bool, weights_on: bool) -> "ExperimentConfig":
        """Ablation variant: toggles tie support and confidence weighting.

        With ties off the oracle is forced-choice as well (tie band 0), so
        no TIE judgment can reach the likelihood.
        """
        lik = LikelihoodConfig(
            tie_tolerance=self.likelihood.tie_tolerance,
            noise_scale=self.likelihood.noise_scale,
            tie_support_enabled=ties_on,
            confidence_weighting_enabled=weights_on)
        oracle = OracleConfig(**{**self.oracle.to_dict(),
                                 "tie_band": self.oracle.tie_band if ties_on else 0.0})
        return replace(self, likelihood=lik, oracle=oracle)

    def to_dict(self) -> dict:
        return {
            "dataset_path": self.dataset_path,
            "judge_type": self.judge_type,
            "oracle": self.oracle.to_dict(),
            "oracle_scalar": self.oracle_scalar,
            "n_initial_random": self.n_initial_random,
            "n_steps": self.n_steps,
            "epochs": self.epochs,
            "likelihood": self.likelihood.to_dict(),
            "acquisition": self.acquisition.to_dict(),
            "window": self.window,
            "hidden": list(self.hidden),
            "latent_dim": self.latent_dim,
            "activation": self.activation,
            "seed": self.seed,
            "learning_rate": self.learning_rate,
            "angle_radius": self.angle_radius,
            "top_k": self.top_k,
            "export_png": self.export_png,
            "confidence_weights": dict(self.confidence_weights),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "oracle" in d:
            d["oracle"] = OracleConfig.from_dict(d["oracle"])
        if "likelihood" in d:
            d["likelihood"] = LikelihoodConfig.from_dict(d["likelihood"])
        if "acquisition" in d:
            d["acquisition"] = AcquisitionConfig.from_dict(d["acquisition"])
        if "hidden" in d:
            d["hidden"] = tuple(d["hidden"])
        return cls(**d)


@dataclass
class StepTrace:
    step: int
    beta: float
    first: int
    second: int
    requests: tuple
    judgments: list
    objective: float
    mean_map: np.ndarray
    var_map: np.ndarray
    duration: float = 0.0
    audit: list | None = None      # oracle's noisy scalars per judgment

    def to_record(self) -> dict:
        """Canonical exported form.  Wall-clock duration is deliberately
        left out so identical (config, seed) runs export identical bytes."""
        rec = {
            "step": self.step,
            "beta": self.beta,
            "first": int(self.first),
            "second": int(self.second),
            "requests": [[int(a), int(b)] for a, b in self.requests],
            "judgments": [j.to_dict() for j in self.judgments],
            "objective": float(self.objective),
        }
        if self.audit is not None:
            rec["oracle_scalars"] = [[float(a), float(b)] for a, b in self.audit]
        return rec


@dataclass
class SessionState:
    cfg: ExperimentConfig
    dataset: Dataset
    inputs: np.ndarray                 # (H*W, window^2) normalized patches
    model: PreferenceModel
    rng: np.random.Generator
    measured: list = field(default_factory=list)
    judgments: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)   # global-id records
    step: int = 0
    mean_map: np.ndarray | None = None
    var_map: np.ndarray | None = None
    init_judgments: list = field(default_factory=list)
    init_audit: list | None = None
    traces: list = field(default_factory=list)
    finished: bool = False

    def local_records(self):
        """Comparison records re-indexed into the measured set for the GP."""
        pos = {mid: i for i, mid in enumerate(self.measured)}
        return [ComparisonRecord(pos[c.a], pos[c.b], c.outcome, c.weight)
                for c in self.comparisons]

    def grid_posterior(self):
        if self.mean_map is None:
            raise StateError("session has no utility map yet")
        return self.mean_map, self.var_map

    def current_best_id(self) -> int:
        return current_best(self.mean_map, self.measured)


def _initial_pairs(order):
    """floor(n/2) disjoint pairs in draw order plus a ring-closure pair."""
    pairs = [(order[i], order[i + 1]) for i in range(0, len(order) - 1, 2)]
    closure = (order[-1], order[0])
    keys = {(min(a, b), max(a, b)) for a, b in pairs}
    if (min(closure), max(closure)) not in keys:
        pairs.append(closure)
    return pairs


def _append_judgments(session: SessionState, judgments) -> None:
    table = session.cfg.weight_table
    for j in judgments:
        session.judgments.append(j)
        session.comparisons.append(record_from_judgment(j, table))


def _retrain(session: SessionState, a_warm=None):
    session.model.train_inputs = session.inputs[session.measured]
    session.model.train_ids = np.asarray(session.measured, dtype=np.intp)
    result = train_joint(session.model, session.local_records(),
                         session.cfg.epochs,
                         learning_rate=session.cfg.learning_rate, a0=a_warm)
    mean, var = predict_utility(session.model.posterior, session.inputs)
    session.mean_map, session.var_map = mean, var
    return result


def build_judge(cfg: ExperimentConfig, dataset: Dataset):
    """Oracle judge over the configured ground-truth scalar, normalized."""
    if cfg.judge_type != "oracle":
        raise ConfigurationError(
            "human judge must be supplied by the caller (see the feedback "
            "service); only oracle judges are built from config")
    if cfg.oracle_scalar == "structure":
        raw = dataset.structure
    else:
        raw = analysis_map(dataset, cfg.oracle_scalar,
                           angle_cfg=AngleConfig(radius=cfg.angle_radius),
                           radius=cfg.angle_radius)
    return Oracle(normalize_scalars(raw).ravel(), cfg.oracle)


def initialize_session(cfg: ExperimentConfig, dataset: Dataset,
                       judge) -> SessionState:
    """Draw the initial random candidates, judge them, train the first model.

    The n initial points are paired off in draw order (disjoint pairs plus a
    ring-closure pair) so every initial point appears in at least one
    comparison.
    """
    n_cand = dataset.n_candidates
    if n_cand < cfg.n_initial_random:
        raise ConfigurationError(
            f"dataset has {n_cand} candidates, fewer than "
            f"n_initial_random={cfg.n_initial_random}")
    rng = np.random.default_rng(cfg.seed)
    order = [int(i) for i in rng.choice(n_cand, size=cfg.n_initial_random,
                                        replace=False)]
    inputs = all_patch_inputs(dataset.structure, cfg.window)
    arch = cfg.architecture()
    model = PreferenceModel(
        net=init_params(arch, cfg.seed),
        hyper=KernelHyperparams.default(cfg.latent_dim),
        likelihood=cfg.likelihood)
    session = SessionState(cfg=cfg, dataset=dataset, inputs=inputs,
                           model=model, rng=rng, measured=list(order))
    judgments = judge.judge(_initial_pairs(order))
    session.init_judgments = list(judgments)
    session.init_audit = getattr(judge, "last_audit", None)
    _append_judgments(session, judgments)
    _retrain(session)
    return session


def run_step(session: SessionState, judge) -> StepTrace:
    """One active-learning iteration; raises CandidatesExhausted at the end."""
    t0 = time.monotonic()
    step = session.step + 1
    sel: SelectionResult = select_pair(
        session.mean_map, session.var_map, session.cfg.acquisition,
        session.measured, step)
    # Selection marks the pair measured (their payloads are now revealed),
    # then the judgments are collected.
    session.measured.extend([sel.first, sel.second])
    judgments = judge.judge(sel.requests)
    audit = getattr(judge, "last_audit", None)
    if len(judgments) != len(sel.requests):
        raise StateError(
            f"judge returned {len(judgments)} judgments for "
            f"{len(sel.requests)} requests")
    _append_judgments(session, judgments)
    a_warm = None
    if session.model.posterior is not None:
        a_warm = np.concatenate([session.model.posterior.alpha, [0.0, 0.0]])
    result = _retrain(session, a_warm=a_warm)
    session.step = step
    trace = StepTrace(step=step, beta=sel.beta, first=sel.first,
                      second=sel.second, requests=sel.requests,
                      judgments=list(judgments),
                      objective=result.final_objective,
                      mean_map=session.mean_map.copy(),
                      var_map=session.var_map.copy(),
                      duration=time.monotonic() - t0, audit=audit)
    session.traces.append(trace)
    return trace


# ---------------------------------------------------------------------------
# Trace export


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class TraceExporter:
    """Incremental, byte-stable trace writer.

    Per-step artifacts (JSONL line + map pair) are flushed as each step
    completes; summary artifacts (sampling list, histogram, overlays,
    map header) are rewritten at finalize.
    """

    def __init__(self, out_dir, cfg: ExperimentConfig, resume: bool = False):
        self.root = Path(out_dir)
        self.maps_dir = self.root / "maps"
        self.maps_dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        if not resume and (self.root / "steps.jsonl").exists():
            (self.root / "steps.jsonl").unlink()
        (self.root / "config.json").write_text(_dumps(cfg.to_dict()) + "\n")

    def write_init(self, session: SessionState) -> None:
        rec = {
            "measured": [int(i) for i in session.measured],
            "judgments": [j.to_dict() for j in session.init_judgments],
            "objective": float(-session.model.posterior.evidence),
        }
        if session.init_audit is not None:
            rec["oracle_scalars"] = [[float(a), float(b)]
                                     for a, b in session.init_audit]
        (self.root / "init.json").write_text(_dumps(rec) + "\n")

    def append_step(self, session: SessionState, trace: StepTrace) -> None:
        with open(self.root / "steps.jsonl", "a") as fh:
            fh.write(_dumps(trace.to_record()) + "\n")
        h, w = session.dataset.shape
        for name, arr in (("mean", trace.mean_map), ("var", trace.var_map)):
            path = self.maps_dir / f"step_{trace.step:04d}_{name}.f32"
            path.write_bytes(np.ascontiguousarray(
                arr.reshape(h, w), dtype="<f4").tobytes())
        if self.cfg.export_png:
            self._write_pngs(session, trace)

    def _write_pngs(self, session: SessionState, trace: StepTrace) -> None:
        from PIL import Image
        h, w = session.dataset.shape
        for name, arr in (("mean", trace.mean_map), ("var", trace.var_map)):
            img = normalize_scalars(arr.reshape(h, w))
            Image.fromarray((img * 255).astype(np.uint8), mode="L").save(
                self.maps_dir / f"step_{trace.step:04d}_{name}.png")

    def finalize(self, session: SessionState) -> None:
        h, w = session.dataset.shape
        entries = []
        for step in range(1, session.step + 1):
            for name in ("mean", "var"):
                fname = f"step_{step:04d}_{name}.f32"
                if (self.maps_dir / fname).is_file():
                    entries.append({"id": f"step_{step:04d}_{name}",
                                    "file": fname, "shape": [h, w],
                                    "dtype": "f32le"})
        (self.maps_dir / "maps.json").write_text(
            _dumps({"name": "utility_maps", "height": h, "width": w,
                    "arrays": entries}) + "\n")

        sampling = []
        for i, cid in enumerate(session.measured):
            r, c = session.dataset.pixel_of(cid)
            origin = ("initial" if i < session.cfg.n_initial_random
                      else f"step_{(i - session.cfg.n_initial_random) // 2 + 1}")
            sampling.append({"id": int(cid), "row": r, "col": c,
                             "origin": origin})
        (self.root / "sampling.json").write_text(_dumps(sampling) + "\n")

        self._write_histogram(session)
        self._write_overlays(session)
        summary = {
            "steps_completed": session.step,
            "measured_count": len(session.measured),
            "comparison_count": len(session.comparisons),
            "finished": session.finished,
            "final_objective": (float(-session.model.posterior.evidence)
                                if session.model.posterior else None),
        }
        (self.root / "summary.json").write_text(_dumps(summary) + "\n")

    def _ground_truth_scalars(self, session: SessionState):
        ds = session.dataset
        if ds.payload_kind is PayloadKind.SPECTRAL:
            return "loop_area", analysis_map(ds, "loop_area")
        return "char_angle", analysis_map(
            ds, "char_angle", angle_cfg=AngleConfig(radius=session.cfg.angle_radius))

    def _write_histogram(self, session: SessionState) -> None:
        kind, raw = self._ground_truth_scalars(session)
        normed = normalize_scalars(raw).ravel()
        values = normed[session.measured]
        edges = np.linspace(0.0, 1.0, 11)
        counts, _ = np.histogram(values, bins=edges)
        rec = {"scalar": kind,
               "bin_edges": [round(float(e), 1) for e in edges],
               "counts": [int(c) for c in counts],
               "values": [float(v) for v in values]}
        (self.root / "histogram.json").write_text(_dumps(rec) + "\n")

    def _write_overlays(self, session: SessionState) -> None:
        k = min(self.cfg.top_k, session.mean_map.size)
        order = np.argsort(session.mean_map, kind="stable")
        for name, ids in (("bottomk", order[:k]), ("topk", order[::-1][:k])):
            cells = []
            for cid in ids:
                r, c = session.dataset.pixel_of(int(cid))
                cells.append({"id": int(cid), "row": r, "col": c,
                              "utility": float(session.mean_map[cid])})
            (self.root / f"{name}.json").write_text(_dumps(cells) + "\n")


# ---------------------------------------------------------------------------
# Checkpoint / resume


def save_checkpoint(session: SessionState, path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    save_model(session.model.posterior, session.cfg.window, root / "model")
    state = {
        "config": session.cfg.to_dict(),
        "step": session.step,
        "measured": [int(i) for i in session.measured],
        "judgments": [j.to_dict() for j in session.judgments],
        "init_judgments": [j.to_dict() for j in session.init_judgments],
        "rng": session.rng.bit_generator.state,
        "finished": session.finished,
    }
    for name, arr in (("mean_map", session.mean_map),
                      ("var_map", session.var_map)):
        (root / f"{name}.f64").write_bytes(
            np.ascontiguousarray(arr, dtype="<f8").tobytes())
    (root / "session.json").write_text(
        json.dumps(state, sort_keys=True, indent=1) + "\n")


def load_checkpoint(path, dataset: Dataset) -> SessionState:
    root = Path(path)
    state_path = root / "session.json"
    if not state_path.is_file():
        raise FormatError(f"no session.json under {path}")
    state = json.loads(state_path.read_text())
    cfg = ExperimentConfig.from_dict(state["config"])
    posterior, window = load_model(root / "model")
    inputs = all_patch_inputs(dataset.structure, cfg.window)
    model = PreferenceModel(net=posterior.net, hyper=posterior.hyper,
                            likelihood=cfg.likelihood,
                            train_inputs=inputs[state["measured"]],
                            train_ids=np.asarray(state["measured"], dtype=np.intp),
                            posterior=posterior)
    rng = np.random.default_rng()
    rng.bit_generator.state = state["rng"]
    n = dataset.n_candidates
    session = SessionState(
        cfg=cfg, dataset=dataset, inputs=inputs, model=model, rng=rng,
        measured=[int(i) for i in state["measured"]],
        judgments=[Judgment.from_dict(d) for d in state["judgments"]],
        step=int(state["step"]),
        mean_map=np.frombuffer((root / "mean_map.f64").read_bytes(),
                               dtype="<f8").copy(),
        var_map=np.frombuffer((root / "var_map.f64").read_bytes(),
                              dtype="<f8").copy(),
        init_judgments=[Judgment.from_dict(d)
                        for d in state["init_judgments"]],
        finished=bool(state.get("finished", False)))
    if session.mean_map.size != n or session.var_map.size != n:
        raise FormatError("checkpoint maps do not match the dataset grid")
    table = cfg.weight_table
    session.comparisons = [record_from_judgment(j, table)
                           for j in session.judgments]
    return session


# ---------------------------------------------------------------------------
# Experiment driver


@dataclass
class ExperimentTrace:
    cfg: ExperimentConfig
    session: SessionState
    steps: list

    @property
    def mean_map(self):
        return self.session.mean_map

    @property
    def measured(self):
        return list(self.session.measured)


def run_experiment(cfg: ExperimentConfig, dataset: Dataset = None,
                   judge=None, out_dir=None, checkpoint: bool = False,
                   resume: bool = False) -> ExperimentTrace:
    """Initialize (or resume) a session and run the configured steps.

    Oracle-mode runs are fully determined by (config, seed).  Candidate
    exhaustion ends the run cleanly.  With ``out_dir`` the trace is
    exported incrementally; with ``checkpoint`` a resumable snapshot is
    rewritten after initialization and after every step.
    """
    if dataset is None:
        if not cfg.dataset_path:
            raise ConfigurationError("config has no dataset path")
        dataset = load_dataset(cfg.dataset_path)
    if judge is None:
        judge = build_judge(cfg, dataset)

    exporter = (TraceExporter(out_dir, cfg, resume=resume)
                if out_dir is not None else None)
    ckpt_dir = (Path(out_dir) / "checkpoint") if (checkpoint and out_dir) else None

    session = None
    if resume:
        if ckpt_dir is None or not (ckpt_dir / "session.json").is_file():
            raise StateError("resume requested but no checkpoint found")
        session = load_checkpoint(ckpt_dir, dataset)
        if hasattr(judge, "load_state_dict"):
            state = json.loads((ckpt_dir / "judge.json").read_text())
            judge.load_state_dict(state)
    if session is None:
        session = initialize_session(cfg, dataset, judge)
        if exporter:
            exporter.write_init(session)
        if ckpt_dir:
            _checkpoint(session, judge, ckpt_dir)

    while session.step < cfg.n_steps and not session.finished:
        try:
            trace = run_step(session, judge)
        except CandidatesExhausted:
            session.finished = True
            break
        if exporter:
            exporter.append_step(session, trace)
        if ckpt_dir:
            _checkpoint(session, judge, ckpt_dir)
    if session.step >= cfg.n_steps:
        session.finished = True
    if exporter:
        exporter.finalize(session)
    return ExperimentTrace(cfg=cfg, session=session, steps=list(session.traces))


def _checkpoint(session: SessionState, judge, ckpt_dir: Path) -> None:
    save_checkpoint(session, ckpt_dir)
    if hasattr(judge, "state_dict"):
        (ckpt_dir / "judge.json").write_text(
            json.dumps(judge.state_dict(), sort_keys=True) + "\n")


def predict_only(model_dir, dataset: Dataset):
    """Re-apply a persisted model to a (possibly different) dataset region."""
    posterior, window = load_model(model_dir)
    inputs = all_patch_inputs(dataset.structure, window)
    return predict_utility(posterior, inputs)
