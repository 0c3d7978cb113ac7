"""Command-line client for the laboratory service.

The CLI never computes anything itself: it posts configs to the blowuplab
HTTP API and writes the returned artifacts to disk. By default it talks to an
in-process instance of the service; `--server` points it at a remote one.
Exit codes: 0 all declared expectations pass, 1 an expectation failed,
2 config or transport error.
"""

from __future__ import annotations

import json
import os
import re
import sys
import tempfile
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_CONFIG = 2


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # starlette's in-process client warns about the httpx major version;
        # harmless here, and httpx2 is not packaged everywhere yet
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

        from .service.app import app

        return TestClient(app, raise_server_exceptions=False)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp_", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        click.echo(
            f"config error: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            err=True,
        )
        sys.exit(EXIT_CONFIG)


def _seed_override() -> int | None:
    raw = os.environ.get("BLOWUPLAB_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        click.echo(f"config error: BLOWUPLAB_SEED must be an integer (got {raw!r})", err=True)
        sys.exit(EXIT_CONFIG)


def _post(client, url: str, payload: dict) -> dict:
    resp = client.post(url, json=payload)
    if resp.status_code != 200:
        try:
            body = resp.json()
            detail = body.get("message") or body.get("detail") or resp.text
        except ValueError:
            detail = resp.text
        click.echo(f"config error ({resp.status_code}): {detail}", err=True)
        sys.exit(EXIT_CONFIG)
    return resp.json()


def _write_scenario_dir(base: Path, payload: dict) -> None:
    out = base / _safe_name(payload["name"])
    if payload.get("trajectory_csv"):
        _atomic_write(out / "trajectory.csv", payload["trajectory_csv"])
    for kind, report in payload.get("reports", {}).items():
        _atomic_write(out / f"report_{kind}.json", _dump_json(report))
    if payload.get("conjugate"):
        _atomic_write(out / "conjugate.json", _dump_json(payload["conjugate"]))
    for kind, summary in payload.get("diagnostics", {}).items():
        _atomic_write(out / f"diagnostic_{kind}.json", _dump_json(summary))
    for kind, csv_text in payload.get("diagnostics_csv", {}).items():
        _atomic_write(out / f"diagnostic_{kind}.csv", csv_text)
    if payload.get("expectations"):
        _atomic_write(out / "expectations.json", _dump_json(payload["expectations"]))


@click.group()
def main():
    """Numerical laboratory for blowup criteria of fixed-point strain dynamics."""


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--jobs", default=1, show_default=True, help="Scenario-level parallelism.")
@click.option("--tol", "tol", default=None, type=float, help="Override relative tolerance.")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
def run(config_path, out_dir, jobs, tol, server):
    """Run every scenario in CONFIG_PATH and write trajectories and reports."""
    config = _load_config(config_path)
    with _client(server) as client:
        result = _post(
            client,
            "/batch/run",
            {"config": config, "seed_override": _seed_override(), "tol_override": tol,
             "jobs": jobs},
        )
    base = Path(out_dir)
    for payload in result["scenarios"]:
        _write_scenario_dir(base, payload)
    _atomic_write(base / "summary.csv", result["summary_csv"])
    _atomic_write(
        base / "summary.json",
        _dump_json(
            {
                "all_ok": result["all_ok"],
                "scenarios": [
                    {"name": p["name"], "ok": p["ok"], "summary": p["summary"]}
                    for p in result["scenarios"]
                ],
            }
        ),
    )
    n = len(result["scenarios"])
    n_ok = sum(1 for p in result["scenarios"] if p["ok"])
    for p in result["scenarios"]:
        mark = "PASS" if p["ok"] else "FAIL"
        click.echo(f"{p['name']}: {mark} (terminated={p['summary']['terminated']})")
    click.echo(f"{n_ok}/{n} PASS")
    sys.exit(EXIT_OK if result["all_ok"] else EXIT_EXPECTATION)


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--param", required=True, help="Dotted numeric scenario field, e.g. pressure_rr.H.value")
@click.option("--values", required=True, help="Comma-separated list of values.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--jobs", default=1, show_default=True)
@click.option("--tol", "tol", default=None, type=float, help="Override relative tolerance.")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
def sweep(config_path, param, values, out_dir, jobs, tol, server):
    """Sweep one scenario parameter over VALUES and aggregate the reports."""
    config = _load_config(config_path)
    try:
        parsed = [float(v) for v in values.split(",") if v.strip() != ""]
    except ValueError:
        click.echo(f"config error: values must be numeric (got {values!r})", err=True)
        sys.exit(EXIT_CONFIG)
    if not parsed:
        click.echo("config error: empty sweep value list", err=True)
        sys.exit(EXIT_CONFIG)
    with _client(server) as client:
        result = _post(
            client,
            "/batch/sweep",
            {"config": config, "param": param, "values": parsed,
             "seed_override": _seed_override(), "tol_override": tol, "jobs": jobs},
        )
    base = Path(out_dir)
    _atomic_write(base / "sweep.csv", result["csv"])
    for point in result["reports"]:
        tag = f"point_{point['value']:.17g}"
        for payload in point["scenarios"]:
            _write_scenario_dir(base / tag, payload)
    for row in result["rows"]:
        click.echo(
            f"{row['parameter']}={row['value']:g} {row['scenario']}"
            + (f" [{row['check']}]" if row["check"] else "")
            + f": {row['status'] or 'ran'}"
        )
    sys.exit(EXIT_OK if result["all_ok"] else EXIT_EXPECTATION)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Serve the laboratory API."""
    import uvicorn

    uvicorn.run("blowuplab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
