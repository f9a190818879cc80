"""Command-line interface for the engine's batch operations and the server."""

from __future__ import annotations

import json
import pickle
import sys

import click

from . import io as rcio
from .config import EngineConfig
from .familiarity import accumulate as accumulate_matrix
from .familiarity import build_matrix, predict_matrix, train_pmf
from .model import normalize_significances
from .questions import build_tree
from .selection import SelectionProblem, select
from .sim import BehaviorModel, WorldSizes, generate_world, run_scenario, saturating_accuracy
from .significance import build_visit_graph, infer_significance


def _load_config(path) -> EngineConfig:
    return EngineConfig.load(path) if path else EngineConfig()


@click.group()
def main():
    """Crowd-verified route recommendation engine."""


@main.command()
@click.option("--landmarks", "landmarks_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(landmarks_path, out_path):
    """Validate a landmark file and write it back with normalized significances."""
    index = rcio.load_landmarks(landmarks_path)
    rcio.dump_jsonl(out_path, [
        {"id": lm.id, "name": lm.name, "lat": lm.location.lat,
         "lon": lm.location.lon, "significance": lm.significance}
        for lm in index.landmarks])
    click.echo(f"{len(index)} landmarks written to {out_path}")


@main.command()
@click.option("--checkins", "checkins_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--max-iters", default=1000, show_default=True)
@click.option("--tol", default=1e-9, show_default=True)
def significance(checkins_path, out_path, max_iters, tol):
    """Infer landmark significance scores from check-in records."""
    graph = build_visit_graph(rcio.load_checkins(checkins_path))
    scores = infer_significance(graph, max_iters=max_iters, tol=tol)
    rcio.write_significance(out_path, scores)
    click.echo(f"{len(scores)} significance scores written to {out_path}")


@main.command("select-landmarks")
@click.option("--routes", "routes_path", required=True, type=click.Path(exists=True))
@click.option("--significance", "sig_path", required=True, type=click.Path(exists=True))
@click.option("--algorithm", type=click.Choice(["brute", "ils", "greedy"]),
              default="greedy", show_default=True)
@click.option("--relax-min-size", is_flag=True)
def select_landmarks(routes_path, sig_path, algorithm, relax_min_size):
    """Pick the question landmark set for a candidate-route file."""
    candidates = rcio.load_landmark_routes(routes_path)
    sig = {r["id"]: r["significance"] for r in rcio._lines(sig_path)}
    problem = SelectionProblem(candidates, sig, relax_min_size=relax_min_size)
    result = select(problem, algorithm)
    click.echo(json.dumps({
        "chosen": sorted(result.chosen),
        "value": result.value,
        "algorithm": result.algorithm,
        "stats": {"nodes_expanded": result.stats.nodes_expanded,
                  "sets_tested": result.stats.sets_tested},
    }, indent=2))


@main.command("build-tree")
@click.option("--routes", "routes_path", required=True, type=click.Path(exists=True))
@click.option("--significance", "sig_path", required=True, type=click.Path(exists=True))
@click.option("--landmarks", "selected", required=True,
              help="comma-separated selected landmark ids")
def build_tree_cmd(routes_path, sig_path, selected):
    """Build the question tree for a selected landmark set."""
    candidates = rcio.load_landmark_routes(routes_path)
    sig = {r["id"]: r["significance"] for r in rcio._lines(sig_path)}
    tree = build_tree(selected.split(","), candidates, sig)
    click.echo(json.dumps(tree.to_dict(), indent=2))


@main.command("train-pmf")
@click.option("--workers", "workers_path", required=True, type=click.Path(exists=True))
@click.option("--landmarks", "landmarks_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def train_pmf_cmd(workers_path, landmarks_path, config_path, out_path):
    """Build the familiarity matrix and train the latent factors."""
    cfg = _load_config(config_path)
    index = rcio.load_landmarks(landmarks_path)
    workers = rcio.load_workers(workers_path)
    matrix = build_matrix(workers, index, cfg.familiarity)
    p = cfg.pmf
    factors = train_pmf(matrix, d=p.d, lambda_w=p.lambda_w, lambda_l=p.lambda_l,
                        learning_rate=p.learning_rate, max_iters=p.max_iters,
                        tol=p.tol, seed=p.seed)
    with open(out_path, "wb") as fh:
        pickle.dump({"matrix": matrix, "factors": factors, "config": cfg.pmf}, fh)
    click.echo(f"trained: objective {factors.final_objective:.6g}, "
               f"gradient norm {factors.final_gradient_norm:.6g}, "
               f"effective rank {factors.effective_rank()}")


@main.command("accumulate")
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True))
@click.option("--landmarks", "landmarks_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def accumulate_cmd(ckpt_path, landmarks_path, config_path, out_path):
    """Predict the full familiarity matrix and spatially accumulate it."""
    cfg = _load_config(config_path)
    with open(ckpt_path, "rb") as fh:
        ckpt = pickle.load(fh)
    index = rcio.load_landmarks(landmarks_path)
    predicted = predict_matrix(ckpt["matrix"], ckpt["factors"])
    acc = accumulate_matrix(predicted, index, cfg.familiarity.eta_dis_km)
    with open(out_path, "wb") as fh:
        pickle.dump(acc, fh)
    click.echo(f"accumulated matrix with {len(acc.entries)} nonzero entries")


@main.command("rank-workers")
@click.option("--accumulated", "acc_path", required=True, type=click.Path(exists=True))
@click.option("--workers", "workers_path", required=True, type=click.Path(exists=True))
@click.option("--landmarks", "selected", required=True,
              help="comma-separated task landmark ids")
@click.option("--deadline-hours", default=24.0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
def rank_workers(acc_path, workers_path, selected, deadline_hours, config_path):
    """Rank eligible workers for a task landmark set by rated voting."""
    from .assignment import top_k_workers
    cfg = _load_config(config_path)
    with open(acc_path, "rb") as fh:
        acc = pickle.load(fh)
    workers = rcio.load_workers(workers_path)
    tally = top_k_workers(selected.split(","), acc, workers, cfg.eligibility,
                          deadline_hours)
    click.echo(json.dumps({
        "top_k": [[wid, score] for wid, score in tally.ranked],
        "shortfall": tally.shortfall,
        "totals": tally.totals,
        "per_landmark": tally.per_landmark,
    }, indent=2))


@main.command()
@click.option("--landmarks", "landmarks_path", required=True, type=click.Path(exists=True))
@click.option("--workers", "workers_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--store", "store_path", default="routecrowd.db", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(landmarks_path, workers_path, config_path, store_path, host, port):
    """Run the network API."""
    import uvicorn
    from .api import create_app
    from .service import Engine
    from .store import KeyValueStore
    cfg = _load_config(config_path)
    index = rcio.load_landmarks(landmarks_path)
    workers = rcio.load_workers(workers_path)
    sig = {lm.id: lm.significance for lm in index.landmarks}
    engine = Engine(index, sig, workers, config=cfg, store=KeyValueStore(store_path))
    engine.retrain()
    uvicorn.run(create_app(engine), host=host, port=port)


@main.command()
@click.option("--seed", default=7, show_default=True)
@click.option("--landmarks", "n_landmarks", default=60, show_default=True)
@click.option("--workers", "n_workers", default=25, show_default=True)
@click.option("--requests", "n_requests", default=8, show_default=True)
@click.option("--accuracy-rate", default=None, type=float,
              help="behavior accuracy saturation rate; omit for perfect workers")
@click.option("--report", "report_path", type=click.Path())
def simulate(seed, n_landmarks, n_workers, n_requests, accuracy_rate, report_path):
    """Generate a synthetic world and run the full pipeline over it."""
    world = generate_world(seed, WorldSizes(n_landmarks, n_workers, n_requests))
    behavior = BehaviorModel(saturating_accuracy(accuracy_rate), seed=seed) \
        if accuracy_rate is not None else BehaviorModel(seed=seed)
    report = run_scenario(world, behavior)
    rows = [{
        "request": o.request_id, "method": o.method, "state": o.state,
        "resolved_route": o.resolved_route,
        "matches_ground_truth": o.matches_ground_truth,
        "early_stop": o.early_stop,
        "questions": o.questions_per_worker,
    } for o in report.outcomes]
    if report_path:
        rcio.dump_jsonl(report_path, rows)
    click.echo(json.dumps(report.summary(), indent=2))


if __name__ == "__main__":
    sys.exit(main())
