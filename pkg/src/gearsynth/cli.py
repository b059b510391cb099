"""Command-line client for the gearsynth HTTP service.

Every subcommand talks to the HTTP API: against ``--server URL`` (or
``GEARSYNTH_SERVER``) when given, otherwise against an in-process instance of
the service, so no separate server is needed for local batch work.

Exit codes: 0 success, 1 domain failure (grammar violations, invalid inputs,
unreachable completer), 2 environment/I-O failure.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import httpx

EXIT_DOMAIN = 1
EXIT_ENV = 2


class Api:
    """Thin request wrapper mapping transport and HTTP failures to exit codes.

    With no --server the service app runs in-process behind an ASGI
    transport, so the CLI always goes through the same HTTP surface."""

    def __init__(self, server: str | None, catalogue: str | None):
        self.server = server
        self.app = None
        if server is None:
            from .service.app import create_app

            self.app = create_app(catalogue)

    def _request(self, method: str, path: str, payload: dict | None):
        if self.server:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                return client.request(method, path, json=payload)

        import asyncio

        async def go():
            transport = httpx.ASGITransport(app=self.app)
            async with httpx.AsyncClient(transport=transport, timeout=None,
                                         base_url="http://gearsynth.internal") as client:
                return await client.request(method, path, json=payload)

        return asyncio.run(go())

    def call(self, method: str, path: str, payload: dict | None = None) -> dict:
        try:
            response = self._request(method, path, payload)
        except httpx.HTTPError as exc:
            click.echo(f"error: cannot reach service: {exc}", err=True)
            raise SystemExit(EXIT_ENV) from exc
        if response.status_code >= 500:
            click.echo(f"error: service failure: {response.text}", err=True)
            raise SystemExit(EXIT_ENV)
        if response.status_code >= 400:
            detail = response.json().get("detail", response.text)
            click.echo(f"error: {detail}", err=True)
            raise SystemExit(EXIT_DOMAIN)
        return response.json()


def _read_sequence_lines(path: str) -> list[list[str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        raise SystemExit(EXIT_ENV) from exc
    return [line.split() for line in text.splitlines() if line.strip()]


@click.group()
@click.option("--server", envvar="GEARSYNTH_SERVER", default=None,
              help="Service URL; defaults to an in-process service.")
@click.option("--catalogue", envvar="GEARSYNTH_CATALOGUE", default=None,
              help="Catalogue data file for the in-process service.")
@click.pass_context
def main(ctx, server, catalogue):
    """Gear-train configuration synthesis toolkit."""
    ctx.obj = {"server": server, "catalogue": catalogue}


def _api(ctx) -> Api:
    return Api(ctx.obj["server"], ctx.obj["catalogue"])


@main.command()
@click.argument("sequence_file")
@click.pass_context
def validate(ctx, sequence_file):
    """Validate one whitespace-separated token sequence per line."""
    sequences = _read_sequence_lines(sequence_file)
    if not sequences:
        return
    data = _api(ctx).call("POST", "/sequences/validate", {"sequences": sequences})
    for i, item in enumerate(data["results"], start=1):
        if item["ok"]:
            click.echo(f"line {i}: ok")
        else:
            click.echo(f"line {i}: {item['violation']['message']}")
    if not data["all_ok"]:
        raise SystemExit(EXIT_DOMAIN)


@main.command()
@click.argument("sequence_file")
@click.option("--format", "fmt", type=click.Choice(["table", "record"]),
              default="table")
@click.pass_context
def simulate(ctx, sequence_file, fmt):
    """Simulate valid sequences; errors name the offending lines."""
    sequences = _read_sequence_lines(sequence_file)
    if not sequences:
        return
    data = _api(ctx).call("POST", "/sequences/simulate", {"sequences": sequences})
    bad = [(i, item) for i, item in enumerate(data["results"], start=1)
           if not item["ok"]]
    if bad:
        for i, item in bad:
            click.echo(f"line {i}: {item['error']}", err=True)
        raise SystemExit(EXIT_DOMAIN)
    if fmt == "record":
        for item in data["results"]:
            record = dict(item["result"])
            record["feasible"] = item["feasible"]
            record["requirements"] = item["requirements"]
            click.echo(json.dumps(record))
        return
    header = f"{'line':>4}  {'s':>12}  {'p (m)':>30}  {'m':>12}  " \
             f"{'in':>11}  {'out':>11}  {'kg':>9}  feas"
    click.echo(header)
    for i, item in enumerate(data["results"], start=1):
        r = item["result"]
        p = " ".join(f"{v: .4f}" for v in r["p"])
        m = " ".join(f"{v:+d}" for v in r["m"])
        click.echo(f"{i:>4}  {r['s']:>12.6g}  {p:>30}  {m:>12}  "
                   f"{r['tau_in']:>11}  {r['tau_out']:>11}  "
                   f"{r['weight_kg']:>9.4f}  {'yes' if item['feasible'] else 'no'}")


@main.command()
@click.option("--n", default=10, show_default=True)
@click.option("--max-components", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--construction", type=click.Choice(["walk", "two-stage"]),
              default="walk", show_default=True)
@click.pass_context
def random(ctx, n, max_components, seed, construction):
    """Print random grammar-valid sequences."""
    data = _api(ctx).call("POST", "/sequences/random", {
        "n": n, "max_components": max_components, "seed": seed,
        "construction": construction})
    for tokens in data["sequences"]:
        click.echo(" ".join(tokens))


@main.command("enumerate")
@click.option("--max-components", default=10, show_default=True)
@click.option("--list", "list_all", is_flag=True, help="Print every sequence.")
@click.pass_context
def enumerate_cmd(ctx, max_components, list_all):
    """Count (and optionally list) component-type sequences."""
    data = _api(ctx).call("POST", "/sequences/enumerate", {
        "max_components": max_components, "include_sequences": list_all})
    click.echo(f"count: {data['count']}")
    if list_all:
        for variables in data["sequences"]:
            click.echo(" | ".join(variables))


@main.command("gen-dataset")
@click.option("--n", required=True, type=int)
@click.option("--max-components", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True)
@click.pass_context
def gen_dataset(ctx, n, max_components, seed, out_dir):
    """Generate a dataset of valid+feasible records under OUT."""
    data = _api(ctx).call("POST", "/dataset/generate", {
        "n": n, "max_components": max_components, "seed": seed,
        "out_dir": out_dir})
    click.echo(json.dumps(data, indent=2))


@main.command()
@click.option("--records", "records_path", required=True)
@click.option("--out", "out_dir", required=True)
@click.option("--val-frac", default=0.0005, show_default=True)
@click.option("--test-frac", default=0.0005, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def split(ctx, records_path, out_dir, val_frac, test_frac, seed):
    """Split a records file into train/val/test files."""
    data = _api(ctx).call("POST", "/dataset/split", {
        "records_path": records_path, "out_dir": out_dir,
        "val_frac": val_frac, "test_frac": test_frac, "seed": seed})
    click.echo(json.dumps(data, indent=2))


@main.command("eval")
@click.argument("pairs_file")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def eval_cmd(ctx, pairs_file, as_json):
    """Evaluate dataset-format lines (8 scalars | predicted sequence)."""
    pairs = []
    try:
        for line in Path(pairs_file).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            left, right = line.split("|", 1)
            pairs.append({"requirements": [float(v) for v in left.split()],
                          "sequence": right.split()})
    except (OSError, ValueError) as exc:
        click.echo(f"error: cannot parse {pairs_file}: {exc}", err=True)
        raise SystemExit(EXIT_ENV) from exc
    data = _api(ctx).call("POST", "/evaluate", {"pairs": pairs})
    if as_json:
        click.echo(json.dumps(data["report"], indent=2))
    else:
        click.echo(data["table"])


def _parse_req(req: tuple[float, ...] | None, req_file: str | None) -> list[float]:
    if req:
        return list(req)
    if req_file:
        try:
            line = Path(req_file).read_text(encoding="utf-8").splitlines()[0]
        except (OSError, IndexError) as exc:
            click.echo(f"error: cannot read requirements from {req_file}: {exc}",
                       err=True)
            raise SystemExit(EXIT_ENV) from exc
        part = line.split("|", 1)[0]
        return [float(v) for v in part.split()]
    click.echo("error: provide --req or --req-file", err=True)
    raise SystemExit(EXIT_ENV)


@main.command()
@click.option("--method", type=click.Choice(["eda", "mcts", "eda+c", "mcts+c",
                                             "random", "completer"]), required=True)
@click.option("--req", nargs=8, type=float, default=None,
              help="8 requirement scalars: tau_in tau_out s px py pz m_index m_sign")
@click.option("--req-file", default=None,
              help="File whose first line holds the requirement scalars.")
@click.option("--budget", default=10_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--prefix-len", default=6, show_default=True)
@click.option("--population", default=100, show_default=True)
@click.option("--completer", "completer_spec", default=None,
              help="random | exec:<cmd> | tcp:host:port (required for +c methods)")
@click.option("--workers", default=1, show_default=True)
@click.pass_context
def search(ctx, method, req, req_file, budget, seed, prefix_len, population,
           completer_spec, workers):
    """Search for a sequence meeting the given requirements."""
    requirements = _parse_req(req, req_file)
    if method.endswith("+c") or method == "completer":
        if completer_spec is None:
            click.echo("error: CompleterUnreachable: method "
                       f"{method!r} needs --completer", err=True)
            raise SystemExit(EXIT_DOMAIN)
    data = _api(ctx).call("POST", "/search", {
        "method": method, "requirements": requirements, "budget": budget,
        "seed": seed, "prefix_len": prefix_len, "population": population,
        "completer": completer_spec, "workers": workers})
    click.echo(f"method: {data['method']}   seed: {data['seed']}   "
               f"catalogue: {data['catalogue_version']}")
    click.echo(f"candidates evaluated: {data['candidates_evaluated']}   "
               f"wall time: {data['wall_time_s']:.2f}s")
    if data["best_sequence"] is None:
        click.echo("no candidate found")
        raise SystemExit(EXIT_DOMAIN)
    click.echo(f"best sequence: {' '.join(data['best_sequence'])}")
    click.echo(f"score: {data['best_score']:.6g}   feasible: {data['best_feasible']}"
               f"   valid: {data['best_valid']}")
    if data["sim"]:
        r = data["sim"]
        click.echo(f"s={r['s']:.6g}  p=({', '.join(f'{v:.4f}' for v in r['p'])})  "
                   f"m={tuple(r['m'])}  {r['tau_in']} -> {r['tau_out']}  "
                   f"weight={r['weight_kg']:.4f} kg")
    if data["fitness_terms"]:
        terms = {k: v for k, v in data["fitness_terms"].items()
                 if v is not None and k not in ("valid", "feasible")}
        click.echo("fitness terms: " + json.dumps(terms))


@main.command()
@click.option("--methods", default="eda,mcts", show_default=True,
              help="Comma-separated: eda,mcts,eda+c,mcts+c,random,completer")
@click.option("--n-problems", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--budgets", default=None,
              help="Comma-separated overrides, e.g. eda=1000,mcts=1000")
@click.option("--completer", "completer_spec", default=None)
@click.option("--workers", default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def benchmark(ctx, methods, n_problems, seed, budgets, completer_spec, workers,
              as_json):
    """Run the search-method benchmark on derived problems."""
    budget_map = None
    if budgets:
        budget_map = {}
        for pair in budgets.split(","):
            name, _, value = pair.partition("=")
            budget_map[name.strip()] = int(value)
    data = _api(ctx).call("POST", "/benchmark", {
        "methods": [m.strip() for m in methods.split(",")],
        "n_problems": n_problems, "seed": seed, "budgets": budget_map,
        "completer": completer_spec, "workers": workers})
    if as_json:
        click.echo(json.dumps(data, indent=2))
        return
    click.echo(f"problems: {data['n_problems']}   seed: {data['seed']}")
    click.echo(data["table"])
    for name, info in data["methods"].items():
        click.echo(f"{name}: {info['candidates_evaluated']} candidates in "
                   f"{info['wall_time_s']:.1f}s "
                   f"({info['per_candidate_s']*1000:.2f} ms/candidate), "
                   f"feasible best on {info['feasible_runs']}/{data['n_problems']}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(ctx.obj["catalogue"]), host=host, port=port)


@main.command("serve-completer")
@click.option("--transport", type=click.Choice(["stdio", "tcp"]), default="stdio",
              show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def serve_completer(ctx, transport, host, port, seed):
    """Serve the random completer over the wire protocol (debug/baseline)."""
    from .catalogue import load_catalogue
    from .dsl import vocabulary_hash
    from .search import RandomCompleter
    from .wire import serve_completer_stdio, serve_completer_tcp

    cat = load_catalogue(ctx.obj["catalogue"])
    vocab_hash = vocabulary_hash(cat)
    if transport == "stdio":
        serve_completer_stdio(RandomCompleter(cat, seed=seed), vocab_hash)
        return
    server, bound = serve_completer_tcp(lambda: RandomCompleter(cat, seed=seed),
                                        vocab_hash, host, port)
    click.echo(f"listening on {host}:{bound}", err=True)
    try:
        import threading

        threading.Event().wait()
    except KeyboardInterrupt:
        server.shutdown()


if __name__ == "__main__":
    main()
