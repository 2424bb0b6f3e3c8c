"""Command-line client for the simulator service.

Each subcommand reads a JSON run-configuration document, submits it to the
service (an in-process instance by default, or --server for a remote one),
polls the job, and writes a result document plus CSV tables.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""
from __future__ import annotations

import asyncio
import csv
import json
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
POLL_INTERVAL = 0.25


def _make_client(server: str | None) -> httpx.AsyncClient:
    if server:
        return httpx.AsyncClient(base_url=server, timeout=None)
    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.AsyncClient(transport=transport,
                             base_url="http://kponet.internal", timeout=None)


def _run_job(server: str | None, endpoint: str, payload: dict) -> dict:
    async def drive():
        async with _make_client(server) as client:
            resp = await client.post(endpoint, json=payload)
            if resp.status_code == 422:
                raise SystemExit(
                    _fail(f"invalid configuration: {resp.text}", EXIT_CONFIG)
                )
            resp.raise_for_status()
            job_id = resp.json()["id"]
            while True:
                job = (await client.get(f"/api/jobs/{job_id}")).json()
                if job["status"] == "done":
                    return job["result"]
                if job["status"] == "error":
                    msg = job.get("error") or "unknown error"
                    code = EXIT_CONFIG if msg.startswith("config:") else EXIT_NUMERICAL
                    raise SystemExit(_fail(msg, code))
                await asyncio.sleep(POLL_INTERVAL)

    return asyncio.run(drive())


def _fail(msg: str, code: int) -> int:
    click.echo(f"error: {msg}", err=True)
    return code


def _load_config(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(_fail(f"cannot read config {path}: {exc}", EXIT_CONFIG))


def _write_json(doc: dict, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    click.echo(f"wrote {path}")


def _write_csv(path: Path, header: list[str], rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow(row)
    click.echo(f"wrote {path}")


@click.group()
def main():
    """Kerr-oscillator-network Ising solver."""


def _common(fn):
    fn = click.argument("config", type=click.Path(exists=True, dir_okay=False))(fn)
    fn = click.option("--out", "-o", default="result.json", show_default=True,
                      help="result document path")(fn)
    fn = click.option("--csv", "csv_path", default=None,
                      help="CSV table path (defaults next to --out)")(fn)
    fn = click.option("--server", default=None,
                      help="service URL; default runs in-process")(fn)
    return fn


def _csv_default(out: str, suffix: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + suffix + ".csv")


@main.command()
@_common
def solve(config, out, csv_path, server):
    """One protocol run: metrics for a single instance."""
    doc = _load_config(config)
    result = _run_job(server, "/api/solve", doc)
    _write_json(result, Path(out))
    probs = result["metrics"]["config_probs"]
    _write_csv(Path(csv_path) if csv_path else _csv_default(out, "_configs"),
               ["config_bits", "probability"],
               [[k, repr(v)] for k, v in sorted(probs.items())])


@main.command()
@_common
def strategy(config, out, csv_path, server):
    """Best-of-(N+1): ground plus every vacuum-start excited variant."""
    doc = _load_config(config)
    result = _run_job(server, "/api/strategy", doc)
    _write_json(result, Path(out))
    rows = [
        [a["protocol"]["kind"], a["protocol"]["special_mode"] or 0,
         repr(a["metrics"]["failure_probability"]),
         repr(a["metrics"]["residual_energy"])]
        for a in result["arms"]
    ]
    _write_csv(Path(csv_path) if csv_path else _csv_default(out, "_arms"),
               ["kind", "special_mode", "failure_probability", "residual_energy"],
               rows)


@main.command()
@_common
def batch(config, out, csv_path, server):
    """Random-instance batch: ground vs best-of metrics per instance."""
    doc = _load_config(config)
    result = _run_job(server, "/api/batch", doc)
    _write_json(result, Path(out))
    cols = ["index", "instance_seed", "ground_failure", "ground_residual",
            "strategy_failure", "strategy_residual", "strategy_kind",
            "strategy_mode"]
    rows = [[_csv_cell(r[k]) for k in cols] for r in result["rows"]]
    _write_csv(Path(csv_path) if csv_path else _csv_default(out, "_table"),
               cols, rows)


@main.command("sweep-kappa")
@_common
def sweep_kappa(config, out, csv_path, server):
    """Success probability vs decay rate for the three protocols."""
    doc = _load_config(config)
    result = _run_job(server, "/api/sweep-kappa", doc)
    _write_json(result, Path(out))
    cols = ["kappa", "protocol", "success_probability", "std_error", "n_traj_done"]
    rows = [[_csv_cell(r[k]) for k in cols] for r in result["table"]]
    _write_csv(Path(csv_path) if csv_path else _csv_default(out, "_table"),
               cols, rows)


@main.command()
@_common
def spectrum(config, out, csv_path, server):
    """Excitation gaps along the ramp in the low-energy reduced basis."""
    doc = _load_config(config)
    result = _run_job(server, "/api/spectrum", doc)
    _write_json(result, Path(out))
    rows = [[_csv_cell(v) for v in row] for row in result["rows"]]
    _write_csv(Path(csv_path) if csv_path else _csv_default(out, "_table"),
               result["columns"], rows)


@main.command()
@_common
def landscape(config, out, csv_path, server):
    """Exhaustive energy landscape against the optimal configuration."""
    doc = _load_config(config)
    result = _run_job(server, "/api/landscape", doc)
    _write_json(result, Path(out))
    rows = [[row[0], row[1], repr(float(row[2]))] for row in result["rows"]]
    _write_csv(Path(csv_path) if csv_path else _csv_default(out, "_table"),
               result["columns"], rows)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8788, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


if __name__ == "__main__":
    main()
