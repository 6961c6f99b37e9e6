"""Command-line front end: batch pipeline verbs plus the API server."""

from __future__ import annotations

import json
import sys

import click

from . import __version__, pipeline
from .exposure import House


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Run configuration JSON (defaults built in).")
@click.option("--output", "output_dir", default=None,
              help="Override the configured output directory.")
@click.pass_context
def main(ctx, config_path, output_dir):
    """Flood-risk house-elevation decision engine."""
    overrides = {"output_dir": output_dir} if output_dir else None
    ctx.obj = pipeline.RunConfig.load(config_path, overrides)


@main.command()
@click.pass_obj
def ingest(config):
    """Parse the discharge record and extract annual maximum water levels."""
    maxima = pipeline.cmd_ingest(config)
    click.echo(f"wrote {len(maxima.entries)} annual maxima "
               f"({maxima.entries[0][0]}-{maxima.entries[-1][0]}), "
               f"{len(maxima.excluded)} low-coverage years excluded")


@main.command("fit-hazard")
@click.pass_obj
def fit_hazard(config):
    """Sample the flood-frequency posterior by MCMC."""
    post = pipeline.cmd_fit_hazard(config)
    click.echo(f"sampled {len(post)} posterior draws "
               f"(acceptance {post.acceptance_rate:.2f}), "
               f"BFE {post.meta['bfe']:.2f} ft")


@main.command("fit-discount")
@click.pass_obj
def fit_discount(config):
    """Fit the three discount-rate model structures."""
    payload = pipeline.cmd_fit_discount(config)
    table = payload["selection"]
    for name, row in sorted(table["models"].items()):
        click.echo(f"{name:18s} AIC {row['aic']:9.2f}  BIC {row['bic']:9.2f}")
    click.echo(f"best by AIC: {table['best_aic']}")


@main.command()
@click.option("--value", type=float, default=None, help="House value, USD.")
@click.option("--size", type=float, default=None, help="House size, ft^2.")
@click.option("--floor", type=float, default=None,
              help="Lowest floor relative to BFE, ft.")
@click.pass_obj
def analyze(config, value, size, floor):
    """Full decision report for one house (defaults to the configured one)."""
    house = None
    if any(v is not None for v in (value, size, floor)):
        base = config.sample_house()
        house = House(
            value if value is not None else base.value,
            size if size is not None else base.size_sqft,
            floor if floor is not None else base.floor_rel_bfe,
            "cli-house",
        )
    report = pipeline.cmd_analyze_house(config, house)
    click.echo(f"BFE: {report['bfe']:.2f} ft")
    click.echo(f"optimal lift considering uncertainty: "
               f"{report['h_opt_considering']:.1f} ft")
    click.echo(f"optimal lift ignoring uncertainty:    "
               f"{report['h_opt_ignoring']:.1f} ft")
    for s in report["strategies"]:
        bcr = "-" if s["expected_bcr"] is None else f"{s['expected_bcr']:.2f}"
        click.echo(
            f"{s['strategy']:21s} h={s['h']:5.2f}  upfront {s['upfront_ratio']:.2f}V  "
            f"E[total] {s['expected_total_ratio']:.2f}V  BCR {bcr}  "
            f"rel {s['expected_reliability']:.2f}  robust {s['joint_robustness']:.2f}")


@main.command()
@click.pass_obj
def sweep(config):
    """Analyze the hypothetical house pool and summarize shares."""
    def progress(done, total):
        click.echo(f"  {done}/{total} houses", err=True)
    result = pipeline.cmd_sweep_houses(config, progress=progress)
    click.echo(json.dumps(result["summary"], indent=2, sort_keys=True))


@main.command()
@click.option("--variant", type=click.Choice(pipeline.SENSITIVITY_VARIANTS),
              default="most-likely")
@click.pass_obj
def sensitivity(config, variant):
    """Variance-based sensitivity of lifetime expected damages."""
    results = pipeline.cmd_sensitivity(config, variant)
    for tag, idx in results:
        if idx.degenerate:
            click.echo(f"{tag}: degenerate (zero output variance)")
            continue
        click.echo(f"{tag}: top first-order factor = {idx.top_first_order()}"
                   f" (S = {max(idx.first):.3f})")


@main.command()
@click.pass_obj
def robustness(config):
    """Satisficing robustness curves for the configured house."""
    result = pipeline.cmd_robustness(config)
    rob = result["robustness"]
    for h in (0.0, 5.5, 10.0, 14.0):
        try:
            row = rob.at_h(h)
        except KeyError:
            continue
        click.echo(f"h={row['h']:5.2f}  joint {row['joint']:.2f}  "
                   f"bcr {row['bcr']:.2f}  cost {row['total_cost']:.2f}  "
                   f"reliability {row['reliability']:.2f}")


@main.command("export-plots")
@click.pass_obj
def export_plots(config):
    """Emit plot-ready CSV files from analyze artifacts."""
    written = pipeline.cmd_export_plots(config)
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.pass_obj
def serve(config, host, port):
    """Serve the JSON analysis API over HTTP."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
