# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Command-line front end.

    python cli.py [--config FILE] [--out DIR] [--seed N] [--threads N] SUBCOMMAND [OPTIONS]

Config files hold key=value lines naming subcommand options (dashes or
underscores); flags given on the command line win over file values.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import click
from click.core import ParameterSource
from dotenv import dotenv_values

from config import (
    BLAB_OUTPUT_DIR,
    BLAB_SEED,
    DEFAULT_EPS,
    DEFAULT_QUAD_NODES,
    DEFAULT_RESOLUTION,
    DEFAULT_SIGMA,
    DEFAULT_T_EVAL,
    LOG_LEVEL,
    SUBCOMMANDS,
)
from errors import NumericalFailure, ValidationError
from experiments import ExperimentFactory, RunConfig
from reporting import PLOT_KINDS, emit_plot

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']
_GROUP_KEYS = {'out': str, 'seed': int, 'threads': int, 'log_level': str}


def read_config_file(path: str) -> Dict[str, str]:
    """key=value pairs with keys normalized to option names."""
    values = dotenv_values(path)
    return {key.strip().lower().replace('-', '_'): value
            for key, value in values.items() if value is not None}


def dispersion_options(func):
    func = click.option('--gamma', type=float, default=0.0, help='Transport coefficient gamma')(func)
    func = click.option('--beta', type=float, default=1.0, help='KdV coefficient beta (nonzero)')(func)
    func = click.option('--alpha', type=float, default=0.0, help='Benjamin-Ono coefficient alpha')(func)
    return func


def out_option(func):
    return click.option('--out', '-o', 'sub_out', default=None,
                        help='Output directory (overrides the group option)')(func)


@click.group()
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
              help='key=value file with option defaults')
@click.option('--out', '-o', default=BLAB_OUTPUT_DIR, help=f'Output directory (default: {BLAB_OUTPUT_DIR})')
@click.option('--seed', type=int, default=BLAB_SEED, help='Seed for randomized sweeps')
@click.option('--threads', type=int, default=None, help='Worker cap (never above BLAB_THREADS)')
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False), default=LOG_LEVEL)
@click.pass_context
def cli(ctx, config_file, out, seed, threads, log_level):
    """Numerical experiments for the Benjamin equation."""
    file_values = read_config_file(config_file) if config_file else {}
    chosen = {'out': out, 'seed': seed, 'threads': threads, 'log_level': log_level}
    for name, convert in _GROUP_KEYS.items():
        if name in file_values and ctx.get_parameter_source(name) is ParameterSource.DEFAULT:
            try:
                chosen[name] = convert(file_values[name])
            except ValueError:
                raise ValidationError(f"config file: {name} = {file_values[name]!r} is not valid") from None
    if chosen['threads'] is not None and chosen['threads'] < 1:
        raise ValidationError(f"threads must be >= 1, got {chosen['threads']}")

    level = str(chosen['log_level']).upper()
    if level not in LOG_LEVELS:
        raise ValidationError(f"unknown log level '{level}'")
    logging.basicConfig(level=getattr(logging, level),
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s', force=True)

    if file_values:
        subcommand_values = {k: v for k, v in file_values.items() if k not in _GROUP_KEYS}
        ctx.default_map = {name: subcommand_values for name in SUBCOMMANDS}
    ctx.obj = {'out': Path(chosen['out']), 'seed': chosen['seed'], 'threads': chosen['threads']}


def _dispatch(ctx, subcommand: str, params: Dict[str, Any]) -> int:
    out = params.pop('sub_out', None)
    config = RunConfig(
        subcommand=subcommand,
        params=params,
        out_dir=Path(out) if out else ctx.obj['out'],
        seed=ctx.obj['seed'],
        threads=ctx.obj['threads'],
    )
    experiment = ExperimentFactory.get_experiment(config)
    click.echo(f"🔬 Running {subcommand}...")
    record = experiment.run()
    paths = record.write(config.out_dir)
    click.echo(f"✅ {subcommand} finished ({len(record.rows)} rows)")
    click.echo(f"📁 CSV:  {paths['csv']}")
    click.echo(f"📊 JSON: {paths['json']}")
    return EXIT_OK


@cli.command()
@dispersion_options
@click.option('--samples', type=int, default=100_000, help='Random samples per identity')
@click.option('--scale', type=float, default=100.0, help='Frequencies drawn from [-scale, scale]')
@out_option
@click.pass_context
def resonance(ctx, **params):
    """Check closed-form h, q and theta against direct evaluation."""
    return _dispatch(ctx, 'resonance', params)


@cli.command()
@dispersion_options
@click.option('--n-max-exp', type=int, default=4, help='Largest N exponent')
@click.option('--l-max-exp', type=int, default=6, help='Largest modulation exponent')
@click.option('--limit', type=int, default=100, help='Number of blocks')
@click.option('--resolution', type=int, default=DEFAULT_RESOLUTION, help='Cells per sign per axis')
@out_option
@click.pass_context
def blocks(ctx, **params):
    """Block bounds next to numeric lower bounds."""
    return _dispatch(ctx, 'blocks', params)


@cli.command('bilinear-sweep')
@dispersion_options
@click.option('--s', type=float, default=-1.0)
@click.option('--b', type=float, default=0.5)
@click.option('--eps', type=float, default=DEFAULT_EPS)
@click.option('--n-min-exp', type=int, default=6)
@click.option('--n-max-exp', type=int, default=10)
@out_option
@click.pass_context
def bilinear_sweep(ctx, **params):
    """Case-1 bilinear ratios over N = 2^n_min_exp .. 2^n_max_exp."""
    return _dispatch(ctx, 'bilinear-sweep', params)


@cli.command()
@dispersion_options
@click.option('--m-values', default='25,100,400', help='Comma-separated m values')
@click.option('--lattice-n', type=float, default=None, help='Also build the lattice sets at this N')
@click.option('--lattice-m', type=int, default=1, help='m for the lattice sets')
@out_option
@click.pass_context
def counterexample(ctx, **params):
    """Case-2 coefficient inequality and lattice sets."""
    return _dispatch(ctx, 'counterexample', params)


@cli.command('picard-growth')
@dispersion_options
@click.option('--s', type=float, default=-1.0)
@click.option('--n-min-exp', type=int, default=8)
@click.option('--n-max-exp', type=int, default=12)
@click.option('--t-eval', type=float, default=DEFAULT_T_EVAL)
@click.option('--nodes', type=int, default=DEFAULT_QUAD_NODES, help='Quadrature nodes per r-interval')
@out_option
@click.pass_context
def picard_growth(ctx, **params):
    """Growth in N of the third Picard iterate."""
    return _dispatch(ctx, 'picard-growth', params)


@cli.command()
@dispersion_options
@click.option('--n', type=int, default=512, help='Grid points (power of two)')
@click.option('--box', type=float, default=40.0, help='Box length L')
@click.option('--dt', type=float, default=1e-3)
@click.option('--tfinal', type=float, default=1.0)
@click.option('--ic', type=click.Choice(['soliton', 'gaussian', 'file']), default='soliton')
@click.option('--ic-file', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--kappa', type=float, default=0.5)
@click.option('--amplitude', type=float, default=0.1)
@click.option('--width', type=float, default=2.0)
@click.option('--snapshot-stride', type=int, default=100)
@click.option('--dealias/--no-dealias', default=True)
@out_option
@click.pass_context
def solve(ctx, **params):
    """Integrate the equation, writing snapshots and a conservation CSV."""
    return _dispatch(ctx, 'solve', params)


@cli.command()
@dispersion_options
@click.option('--s', type=float, default=0.0)
@click.option('--b', type=float, default=0.55)
@click.option('--sigma', type=float, default=DEFAULT_SIGMA)
@click.option('--deltas', default='0.5,0.25,0.125')
@click.option('--n', type=int, default=128)
@click.option('--box', type=float, default=40.0)
@click.option('--nt', type=int, default=1024)
@click.option('--t-window', type=float, default=2.0)
@click.option('--ic', type=click.Choice(['soliton', 'gaussian', 'file']), default='gaussian')
@click.option('--ic-file', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--kappa', type=float, default=0.5)
@click.option('--amplitude', type=float, default=0.1)
@click.option('--width', type=float, default=2.0)
@out_option
@click.pass_context
def norms(ctx, **params):
    """H^s and X_{s,b} norms and the linear estimates over delta."""
    return _dispatch(ctx, 'norms', params)


@cli.command()
@click.argument('csv_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--kind', type=click.Choice(list(PLOT_KINDS)), default='loglog')
@click.option('--output', 'out_path', type=click.Path(dir_okay=False), default=None)
def plot(csv_path, kind, out_path):
    """Render a CSV written by another subcommand as SVG."""
    path = emit_plot(Path(csv_path), kind, Path(out_path) if out_path else None)
    click.echo(f"✅ Plot written: {path}")
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Invoke the CLI and map outcomes onto exit codes."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name='blab',
                          standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_INVALID
    except ValueError as e:
        # ValidationError and unknown experiment names
        click.echo(f"❌ {e}", err=True)
        return EXIT_INVALID
    except NumericalFailure as e:
        click.echo(f"❌ Numerical failure: {e}", err=True)
        return EXIT_NUMERICAL
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted.", err=True)
        return 1
    return result if isinstance(result, int) else EXIT_OK


if __name__ == '__main__':
    sys.exit(run())
