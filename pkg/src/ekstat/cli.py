"""Batch CLI: every subcommand is a thin client of the query service.

Without --server the service app runs in-process (sharing the on-disk
histogram cache); with --server requests go to a remote ekstat service.
Tables render as CSV (default) or JSON with 12-significant-digit floats,
counts as exact integers.

Exit codes: 0 success, 1 domain/usage errors, 2 I/O and cache errors.
"""

from __future__ import annotations

import asyncio
import csv
import io
import json
import sys

import click
import httpx

from .cache import ENV_CACHE_DIR
from .sieve import DEFAULT_SEGMENT_LEN, paper_w

ENV_SERVER_URL = "EK_SERVER_URL"

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2

COLUMNS = {
    "sieve": ("x", "w", "total", "cache_path", "built", "elapsed_seconds"),
    "counts": ("k", "ell", "pi_k", "pi_k_ell"),
    "ekdist": ("k", "y", "empirical_cdf", "phi", "abs_deviation",
               "ks_distance", "d_k"),
    "locallaw": ("k", "ell", "empirical", "predicted", "predicted_taylor",
                 "rel_deviation", "rel_deviation_taylor"),
    "charfn": ("t", "exact_re", "exact_im", "predicted_re", "predicted_im",
               "abs_error", "T", "berry_esseen"),
    "predict": ("k", "empirical", "main_term", "correction", "predicted",
                "relative_deviation", "range_warning"),
}


def _fail(message: str, code: int):
    click.echo(f"ekstat: error: {message}", err=True)
    sys.exit(code)


def _resolve_w(w: str, x: int) -> int:
    """Accept an explicit integer or the literal 'paper' for the asymptotic
    formula exp(log x/(loglog x)^2), clamped to [16, x]."""
    if w.strip().lower() == "paper":
        value = paper_w(x)
        click.echo(
            f"ekstat: note: paper-formula w = {value} at x = {x}; the formula "
            "is asymptotic and tiny at desk scale -- consider an explicit w "
            "(e.g. --w 1000 or --w 100000) for informative local-law tables.",
            err=True)
        return value
    try:
        value = int(w)
    except ValueError:
        _fail(f"cannot resolve w={w!r}: expected an integer or 'paper'",
              EXIT_DOMAIN)
    if value < 2:
        _fail(f"w={value} out of range: need w >= 2", EXIT_DOMAIN)
    if value > x:
        click.echo(f"ekstat: note: w={value} exceeds x; clamped to w=x={x} "
                   "(identical statistics)", err=True)
        value = x
    return value


def _parse_k_list(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.replace(" ", "").split(",") if part]
    except ValueError:
        _fail(f"cannot parse k list {text!r}", EXIT_DOMAIN)
    if not ks:
        _fail("k list is empty", EXIT_DOMAIN)
    return ks


def _post(server: str | None, cache_path: str | None, path: str,
          payload: dict) -> dict:
    try:
        if server:
            with httpx.Client(base_url=server, timeout=None) as client:
                response = client.post(path, json=payload)
        else:
            from .service import create_app
            app = create_app(cache_dir=cache_path)

            async def call():
                transport = httpx.ASGITransport(app=app)
                async with httpx.AsyncClient(transport=transport, timeout=None,
                                             base_url="http://ekstat") as client:
                    return await client.post(path, json=payload)

            response = asyncio.run(call())
    except httpx.HTTPError as exc:
        _fail(f"service unreachable: {exc}", EXIT_IO)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        detail = response.text
    if response.status_code in (400, 422):
        _fail(f"{detail}", EXIT_DOMAIN)
    _fail(f"{detail}", EXIT_IO)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _quantize(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _quantize(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_quantize(v) for v in value]
    return value


def _render(command: str, meta: dict, rows: list[dict], fmt: str) -> str:
    columns = COLUMNS[command]
    if fmt == "json":
        body = {"meta": _quantize(meta),
                "rows": [{c: _quantize(row[c]) for c in columns}
                         for row in rows]}
        return json.dumps(body, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        click.echo(text, nl=False)
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        _fail(f"cannot write {out_path}: {exc}", EXIT_IO)


def common_options(fn):
    decorators = [
        click.option("--x", type=int, default=10 ** 8, show_default=True,
                     help="Range upper bound."),
        click.option("--w", type=str, default="paper", show_default=True,
                     help="Smoothness cutoff: an integer or 'paper'."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default="csv", show_default=True),
        click.option("--out-path", type=str, default=None,
                     help="Write the table here instead of stdout."),
        click.option("--cache-path", type=str, default=None,
                     envvar=ENV_CACHE_DIR,
                     help="Histogram cache directory."),
        click.option("--threads", type=int, default=1, show_default=True),
        click.option("--segment-len", type=int, default=DEFAULT_SEGMENT_LEN),
        click.option("--build/--no-build", default=True,
                     help="Permit sieving when the histogram is not cached."),
        click.option("--server", type=str, default=None, envvar=ENV_SERVER_URL,
                     help="Remote service URL; default runs in-process."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


@click.group()
def main():
    """Exact sieve statistics of omega(n-1) on classes omega(n)=k, with the
    matching analytic predictions."""


def _base_payload(x, w, threads, segment_len, build) -> dict:
    return {"x": x, "w": _resolve_w(w, x), "threads": threads,
            "segment_len": segment_len, "build": build}


@main.command()
@common_options
@click.option("--rebuild", is_flag=True, default=False,
              help="Force a fresh sieve even when cached.")
def sieve(x, w, fmt, out_path, cache_path, threads, segment_len, build,
          server, rebuild):
    """Build (or load) the histogram for (x, w) and store it in the cache."""
    payload = _base_payload(x, w, threads, segment_len, build)
    payload["rebuild"] = rebuild
    data = _post(server, cache_path, "/sieve", payload)
    _emit(_render("sieve", data["meta"], [data["meta"]], fmt), out_path)


@main.command()
@common_options
@click.option("--k", "k_list", type=str, default="1,2,3,4,5,6,7,8",
              show_default=True, help="Comma-separated classes.")
@click.option("--ell-max", type=int, default=None,
              help="Largest ell row; default trims at the last nonzero count.")
def counts(x, w, fmt, out_path, cache_path, threads, segment_len, build,
           server, k_list, ell_max):
    """Table of class counts pi_k and local counts pi_{k,ell}."""
    payload = _base_payload(x, w, threads, segment_len, build)
    payload.update(k_list=_parse_k_list(k_list), ell_max=ell_max)
    data = _post(server, cache_path, "/counts", payload)
    _emit(_render("counts", data["meta"], data["rows"], fmt), out_path)


@main.command()
@common_options
@click.option("--k", "k_list", type=str, default="1,2,3,4,5,6,7,8",
              show_default=True)
@click.option("--C", "C", type=float, default=10.0, show_default=True,
              help="Tail-statistic constant.")
@click.option("--truncated/--full", default=False,
              help="Distribution of omega(n-1, w) instead of omega(n-1).")
@click.option("--centering", type=click.Choice(["x", "w"]), default="x",
              show_default=True, help="Center at loglog x or loglog w.")
def ekdist(x, w, fmt, out_path, cache_path, threads, segment_len, build,
           server, k_list, C, truncated, centering):
    """Gaussian-law table: empirical CDF vs the normal CDF, KS distance and
    the large-prime tail count."""
    payload = _base_payload(x, w, threads, segment_len, build)
    payload.update(k_list=_parse_k_list(k_list), C=C, truncated=truncated,
                   center=centering)
    data = _post(server, cache_path, "/ekdist", payload)
    _emit(_render("ekdist", data["meta"], data["rows"], fmt), out_path)


@main.command()
@common_options
@click.option("--k", "k_list", type=str, default="2,3", show_default=True)
@click.option("--ell-max", type=int, default=30, show_default=True)
@click.option("--prime-cutoff", type=int, default=10 ** 5, show_default=True)
@click.option("--anchor", type=click.Choice(["empirical", "analytic"]),
              default="empirical", show_default=True,
              help="Anchor predictions on the sieve pi_k or the predicted one.")
def locallaw(x, w, fmt, out_path, cache_path, threads, segment_len, build,
             server, k_list, ell_max, prime_cutoff, anchor):
    """Local-law table: empirical pi_{k,ell} against both predictors."""
    payload = _base_payload(x, w, threads, segment_len, build)
    payload.update(k_list=_parse_k_list(k_list), ell_max=ell_max,
                   prime_cutoff=prime_cutoff, anchor=anchor)
    data = _post(server, cache_path, "/locallaw", payload)
    _emit(_render("locallaw", data["meta"], data["rows"], fmt), out_path)


@main.command()
@common_options
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--t-count", type=int, default=41, show_default=True,
              help="Grid points across [-sqrt(T), sqrt(T)].")
@click.option("--with-xi/--no-xi", default=True,
              help="Include the xi correction in the prediction.")
@click.option("--prime-cutoff", type=int, default=10 ** 5, show_default=True)
def charfn(x, w, fmt, out_path, cache_path, threads, segment_len, build,
           server, k, t_count, with_xi, prime_cutoff):
    """Characteristic-function samples and the Berry-Esseen integral."""
    payload = _base_payload(x, w, threads, segment_len, build)
    payload.update(k=k, t_count=t_count, with_xi=with_xi,
                   prime_cutoff=prime_cutoff)
    data = _post(server, cache_path, "/charfn", payload)
    _emit(_render("charfn", data["meta"], data["rows"], fmt), out_path)


@main.command()
@common_options
@click.option("--k", "k_list", type=str, default="1,2,3,4,5,6,7,8",
              show_default=True)
@click.option("--prime-cutoff", type=int, default=10 ** 5, show_default=True)
def predict(x, w, fmt, out_path, cache_path, threads, segment_len, build,
            server, k_list, prime_cutoff):
    """Two-term predicted pi_k against the sieve count."""
    payload = _base_payload(x, w, threads, segment_len, build)
    payload.update(k_list=_parse_k_list(k_list), prime_cutoff=prime_cutoff)
    data = _post(server, cache_path, "/predict", payload)
    _emit(_render("predict", data["meta"], data["rows"], fmt), out_path)


@main.command()
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--cache-path", type=str, default=None, envvar=ENV_CACHE_DIR)
def serve(host, port, cache_path):
    """Run the query service."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(cache_dir=cache_path), host=host, port=port)


if __name__ == "__main__":
    main()
