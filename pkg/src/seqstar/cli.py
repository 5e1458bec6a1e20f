"""Command-line front end.

The CLI is a thin client of the verification service: it reads local files,
ships their contents to the service endpoints, and writes the returned
reports. By default it talks to an in-process instance of the app over an
ASGI transport (no server required); pass --server to use a running one.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

CANONICAL_KINDS = ("sfsi", "sfai", "mfsi", "mfai")


class CliError(click.ClickException):
    exit_code = 1


def _post(path: str, payload: dict, server: str | None) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            resp = client.post(path, json=payload)
    else:
        from .service.app import app

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://seqstar.internal",
                                         timeout=None) as client:
                return await client.post(path, json=payload)

        resp = asyncio.run(go())
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise CliError(f"service error ({resp.status_code}): {detail}")
    return resp.json()


def _read_json_file(path: str, what: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise CliError(f"{what} file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{what} file {path} is not valid JSON: {exc}")


def _read_dataset_file(path: str) -> list[dict]:
    p = Path(path)
    if not p.exists():
        raise CliError(f"dataset file not found: {path}")
    rows = []
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}:{lineno}: not valid JSON: {exc}")
    if not rows:
        raise CliError(f"dataset file {path} holds no sequences")
    return rows


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    cfg = _read_json_file(path, "config")
    if not isinstance(cfg, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    return cfg


def _effective(flag, config: dict, key: str, default):
    """Flags override the config file, which overrides built-in defaults."""
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


@click.group()
def main():
    """Robustness verification of sequence classifiers."""


@main.command()
@click.option("--model", "model_path", type=str, default=None,
              help="Model JSON file.")
@click.option("--data", "data_path", type=str, default=None,
              help="Dataset JSON-lines file.")
@click.option("--kinds", type=str, default=None,
              help="Comma list from sfsi,sfai,mfsi,mfai.")
@click.option("--epsilons", type=str, default=None,
              help="Comma list of percentages, e.g. 50,60,70,80,90.")
@click.option("--feature", type=int, default=None,
              help="Target feature for SFSI/SFAI.")
@click.option("--instance", type=int, default=None,
              help="Target time instance for SFSI/MFSI.")
@click.option("--mode", type=click.Choice(["interval", "secant", "exact_relu"]),
              default=None)
@click.option("--budget", type=int, default=None,
              help="Falsifier sample budget per sequence.")
@click.option("--seed", type=int, default=None)
@click.option("--split-budget", type=int, default=None,
              help="Cap on exact ReLU union size.")
@click.option("--out-json", type=str, default=None)
@click.option("--out-csv", type=str, default=None)
@click.option("--jobs", type=int, default=None,
              help="Parallel verification tasks.")
@click.option("--timing", type=click.Choice(["wall", "off"]), default=None,
              help="'off' zeroes runtime fields for reproducible reports.")
@click.option("--config", "config_path", type=str, default=None,
              help="JSON config file; flags take precedence.")
@click.option("--server", type=str, default=None,
              help="URL of a running service; default runs in-process.")
def verify(model_path, data_path, kinds, epsilons, feature, instance, mode,
           budget, seed, split_budget, out_json, out_csv, jobs, timing,
           config_path, server):
    """Run a verification campaign and print the PR table."""
    cfg = _load_config(config_path)
    model_path = _effective(model_path, cfg, "model", None)
    data_path = _effective(data_path, cfg, "data", None)
    if not model_path:
        raise CliError("no model file given (--model or config)")
    if not data_path:
        raise CliError("no dataset file given (--data or config)")
    kinds = _effective(kinds, cfg, "kinds", "sfsi,sfai,mfsi,mfai")
    if isinstance(kinds, str):
        kinds = [k.strip() for k in kinds.split(",") if k.strip()]
    bad = [k for k in kinds if k.lower() not in CANONICAL_KINDS]
    if bad:
        raise CliError(f"unknown perturbation kinds: {', '.join(bad)}")
    epsilons = _effective(epsilons, cfg, "epsilons", "50,60,70,80,90")
    if isinstance(epsilons, str):
        try:
            epsilons = [float(e) for e in epsilons.split(",") if e.strip()]
        except ValueError as exc:
            raise CliError(f"bad epsilon list: {exc}")

    payload = {
        "model": _read_json_file(model_path, "model"),
        "dataset": _read_dataset_file(data_path),
        "kinds": [k.upper() for k in kinds],
        "epsilons": epsilons,
        "options": {
            "mode": _effective(mode, cfg, "mode", "interval"),
            "falsifier_budget": _effective(budget, cfg, "budget", 1000),
            "seed": _effective(seed, cfg, "seed", 0),
            "split_budget": _effective(split_budget, cfg, "split_budget",
                                       10_000),
            "jobs": _effective(jobs, cfg, "jobs", 1),
            "timing": _effective(timing, cfg, "timing", "wall"),
            "target_feature": _effective(feature, cfg, "feature", 0),
            "target_instance": _effective(instance, cfg, "instance", 0),
        },
    }
    result = _post("/campaign", payload, server)

    out_json = _effective(out_json, cfg, "out_json", None)
    out_csv = _effective(out_csv, cfg, "out_csv", None)
    if out_csv:
        Path(out_csv).write_text(result["csv"])
    if out_json:
        Path(out_json).write_text(
            json.dumps(result["report"], sort_keys=True, indent=2) + "\n")
    click.echo(result["table"], nl=False)


@main.command()
@click.argument("model_path", type=str)
@click.option("--server", type=str, default=None)
def inspect(model_path, server):
    """Print layer-by-layer structure of a model file."""
    payload = {"model": _read_json_file(model_path, "model")}
    result = _post("/model/inspect", payload, server)
    for line in result["summary"]:
        click.echo(line)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8100)
def serve(host, port):
    """Run the verification service."""
    import uvicorn

    uvicorn.run("seqstar.service.app:app", host=host, port=port,
                log_level="info")


if __name__ == "__main__":
    sys.exit(main())
