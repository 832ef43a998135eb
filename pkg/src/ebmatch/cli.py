"""Command-line client for the matching engine service.

Every subcommand is a thin HTTP client: with ``--server`` it talks to a
running service (file paths in the request are then interpreted on the
server), otherwise it spins the service up in-process and talks to it over
an in-memory transport, so one-shot batch use needs no running daemon.
Settings resolve as flags > config file > defaults; the config file is flat
JSON and unknown keys are rejected.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

_CONFIG_KEYS = {
    "w_f", "g_ratio", "p_ratio", "t_ratio", "pt_ratio",
    "k", "min_intra_sim", "seg_threshold",
    "max_outer_iterations", "max_reassign_rounds",
    "clusters", "cover_threshold", "score_floor", "max_cover_rounds",
    "jobs", "seed",
}


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise click.ClickException(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"config file is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise click.ClickException("config file must hold a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise click.ClickException(f"unknown config key(s): {sorted(unknown)}")
    return raw


def _resolve(ctx: click.Context, config: dict, **flags):
    """Apply flags > config > defaults for the given parameter values."""
    out = {}
    for name, value in flags.items():
        source = ctx.get_parameter_source(name)
        if source is not None and source.name == "COMMANDLINE":
            out[name] = value
        elif name in config:
            out[name] = config[name]
        else:
            out[name] = value
    return out


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server.rstrip("/"), timeout=httpx.Timeout(None))
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        if isinstance(detail, list):  # pydantic validation errors
            detail = "; ".join(
                f"{'.'.join(str(p) for p in err.get('loc', []))}: {err.get('msg')}"
                for err in detail
            )
        raise click.ClickException(str(detail))
    return response.json()


def _jsonl(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _check_jobs(jobs: int):
    # --jobs (and --seed) are accepted for interface stability; the engine
    # is single-process and fully deterministic, so they change nothing.
    if jobs < 1:
        raise click.ClickException(f"--jobs must be >= 1, got {jobs}")


server_option = click.option("--server", default=None, help="Base URL of a running service; default runs in-process.")
config_option = click.option("--config", "config_path", default=None, help="Flat JSON config file (flags win).")
jobs_option = click.option("--jobs", default=1, show_default=True, type=int, help="Reserved; engine is single-process.")
seed_option = click.option("--seed", default=None, type=int, help="Reserved; all algorithms are deterministic.")


def _weight_options(fn):
    for name in ("pt_ratio", "t_ratio", "p_ratio", "g_ratio"):
        fn = click.option(f"--{name.replace('_', '-')}", name, default=0.5, show_default=True, type=float)(fn)
    return click.option("--w-f", "w_f", default=0.5, show_default=True, type=float)(fn)


@click.group()
@click.version_option()
def cli():
    """Example-based translation matching engine."""


@cli.command()
@click.option("--fw", "fw_path", required=True, help="Function-word lexicon (TSV).")
@click.option("--tags", "tag_path", required=True, help="Tag lexicon (TSV).")
@click.option("--sentence", required=True, help="Sentence to encode.")
@server_option
def encode(fw_path, tag_path, sentence, server):
    """Print the pattern of a sentence (debug view)."""
    with _client(server) as client:
        data = _post(client, "/encode", {
            "text": sentence, "fw_path": fw_path, "tag_path": tag_path,
        })
    click.echo(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))


@cli.command()
@click.option("--archive", "archive_path", required=True, help="Archive file (JSONL or TSV).")
@click.option("--fw", "fw_path", required=True)
@click.option("--tags", "tag_path", required=True)
@click.option("--out", "out_path", required=True, help="Where to write the model JSON.")
@click.option("--k", default=None, type=int, help="Target cluster count.")
@click.option("--min-intra-sim", default=None, type=float, help="Quality threshold on intra-cluster similarity.")
@click.option("--seg-threshold", default=0.8, show_default=True, type=float)
@click.option("--max-outer-iterations", default=10, show_default=True, type=int)
@click.option("--max-reassign-rounds", default=50, show_default=True, type=int)
@_weight_options
@config_option
@jobs_option
@seed_option
@server_option
@click.pass_context
def learn(ctx, archive_path, fw_path, tag_path, out_path, k, min_intra_sim,
          seg_threshold, max_outer_iterations, max_reassign_rounds,
          w_f, g_ratio, p_ratio, t_ratio, pt_ratio,
          config_path, jobs, seed, server):
    """Cluster and segment an archive; save the model."""
    config = _load_config_file(config_path)
    values = _resolve(
        ctx, config,
        k=k, min_intra_sim=min_intra_sim, seg_threshold=seg_threshold,
        max_outer_iterations=max_outer_iterations,
        max_reassign_rounds=max_reassign_rounds,
        w_f=w_f, g_ratio=g_ratio, p_ratio=p_ratio, t_ratio=t_ratio,
        pt_ratio=pt_ratio, jobs=jobs, seed=seed,
    )
    _check_jobs(values["jobs"])
    if values["k"] is None and values["min_intra_sim"] is None:
        raise click.ClickException("set --k and/or --min-intra-sim")
    payload = {
        "archive_path": archive_path,
        "fw_path": fw_path,
        "tag_path": tag_path,
        "out_path": out_path,
        "weights": {name: values[name] for name in
                    ("w_f", "g_ratio", "p_ratio", "t_ratio", "pt_ratio")},
        "learn": {
            "k_target": values["k"],
            "min_intra_sim": values["min_intra_sim"],
            "seg_threshold": values["seg_threshold"],
            "max_outer_iterations": values["max_outer_iterations"],
            "max_reassign_rounds": values["max_reassign_rounds"],
        },
    }
    with _client(server) as client:
        data = _post(client, "/learn", payload)
    click.echo(f"model written to {data['model_path']}")
    click.echo(f"clusters: {data['clusters']}  entries: {data['entries']}")
    click.echo(f"outer iterations: {data['outer_iterations']}")
    for it, (count, created) in enumerate(
        zip(data["entry_counts"], data["segments_created"]), start=1
    ):
        click.echo(f"  iteration {it}: {count} entries, {created} new segments")


def _query_params(values: dict) -> dict:
    return {
        "clusters_to_search": values["clusters"],
        "cover_threshold": values["cover_threshold"],
        "score_floor": values["score_floor"],
        "max_cover_rounds": values["max_cover_rounds"],
    }


@cli.command()
@click.option("--model", "model_path", required=True, help="Model JSON written by learn.")
@click.option("--sentence", "sentences", multiple=True, help="Sentence to query; repeatable. Default: read stdin lines.")
@click.option("--fw", "fw_path", default=None, help="Override the recorded function-word lexicon path.")
@click.option("--tags", "tag_path", default=None, help="Override the recorded tag lexicon path.")
@click.option("--clusters", default=1, show_default=True, type=int, help="How many favourite clusters to search.")
@click.option("--cover-threshold", default=0.8, show_default=True, type=float)
@click.option("--score-floor", default=0.3, show_default=True, type=float)
@click.option("--max-cover-rounds", default=32, show_default=True, type=int)
@config_option
@jobs_option
@seed_option
@server_option
@click.pass_context
def query(ctx, model_path, sentences, fw_path, tag_path, clusters,
          cover_threshold, score_floor, max_cover_rounds,
          config_path, jobs, seed, server):
    """Print proposal JSONL for stdin sentences or --sentence."""
    config = _load_config_file(config_path)
    values = _resolve(
        ctx, config,
        clusters=clusters, cover_threshold=cover_threshold,
        score_floor=score_floor, max_cover_rounds=max_cover_rounds,
        jobs=jobs, seed=seed,
    )
    _check_jobs(values["jobs"])
    texts = list(sentences)
    if not texts:
        stdin = click.get_text_stream("stdin")
        texts = [line.strip() for line in stdin if line.strip()]
    if not texts:
        raise click.ClickException("no sentences given (use --sentence or stdin)")
    payload = {
        "model_path": model_path,
        "sentences": texts,
        "fw_path": fw_path,
        "tag_path": tag_path,
        "query": _query_params(values),
    }
    with _client(server) as client:
        data = _post(client, "/query", payload)
    for result in data["results"]:
        index = result["sentence_index"]
        for proposal in result["proposals"]:
            record = dict(proposal)
            record["sentence_index"] = index
            click.echo(_jsonl(record))
        summary = dict(result["summary"])
        summary["sentence_index"] = index
        click.echo(_jsonl({"summary": summary}))


@cli.command()
@click.option("--model", "model_path", required=True)
@click.option("--test", "test_path", required=True, help="Test sentences, one per line.")
@click.option("--fw", "fw_path", default=None)
@click.option("--tags", "tag_path", default=None)
@click.option("--clusters", default=1, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True, help="Emit the machine-readable report instead of the table.")
@config_option
@jobs_option
@seed_option
@server_option
@click.pass_context
def evaluate(ctx, model_path, test_path, fw_path, tag_path, clusters, as_json,
             config_path, jobs, seed, server):
    """MISSED / MISSED-BY table for pruned retrieval on a test set."""
    config = _load_config_file(config_path)
    values = _resolve(ctx, config, clusters=clusters, jobs=jobs, seed=seed)
    _check_jobs(values["jobs"])
    try:
        lines = Path(test_path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise click.ClickException(f"test file not found: {test_path}")
    texts = [line.strip() for line in lines if line.strip()]
    if not texts:
        raise click.ClickException(f"test file {test_path} holds no sentences")
    payload = {
        "model_path": model_path,
        "sentences": texts,
        "fw_path": fw_path,
        "tag_path": tag_path,
        "query": {"clusters_to_search": values["clusters"]},
    }
    with _client(server) as client:
        data = _post(client, "/evaluate", payload)
    if as_json:
        data.pop("table")
        click.echo(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        click.echo(data["table"])


@cli.command()
@click.option("--archive", "archive_path", default=None)
@click.option("--model", "model_path", default=None)
@click.option("--fw", "fw_path", default=None)
@click.option("--tags", "tag_path", default=None)
@server_option
def stats(archive_path, model_path, fw_path, tag_path, server):
    """Corpus statistics of an archive or a learned model."""
    payload = {
        "archive_path": archive_path,
        "model_path": model_path,
        "fw_path": fw_path,
        "tag_path": tag_path,
    }
    with _client(server) as client:
        data = _post(client, "/stats", payload)
    click.echo(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8470, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


main = cli

if __name__ == "__main__":
    sys.exit(main())
