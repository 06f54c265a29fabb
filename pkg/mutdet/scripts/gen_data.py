"""scripts/gen_data.py

Render a directory of synthetic scenes with instance masks.
"""

from pathlib import Path
import logging

import click

from mutdet.scripts.click_types import PathlibPath

logger = logging.getLogger(__name__)


@click.command('gen-data', short_help='Generate a synthetic dataset of rotated shapes.')
@click.option('--seed', type=click.INT, default=0, show_default=True,
              help='Seed of the whole dataset')
@click.option('--count', type=click.IntRange(min=1), required=True,
              help='Number of images to generate')
@click.option('--objects', type=click.IntRange(min=0), default=6, show_default=True,
              help='Maximum number of objects per image')
@click.option('--size', type=click.IntRange(min=8), default=64, show_default=True,
              help='Side length of the square images in pixels')
@click.option('-o', '--out', required=True, help='Output directory',
              type=PathlibPath(file_okay=False, writable=True))
@click.option('-q', '--quiet', is_flag=True, default=False, show_default=True,
              help='Suppress all output to stdout')
def gen_data(seed: int, count: int, out: Path, objects: int = 6, size: int = 64,
             quiet: bool = False) -> None:
    """Generate a synthetic dataset of rotated rectangles, ellipses and triangles.

    Every image is written as <image_id>.png next to <image_id>.masks.json.

    Example:

        $ mutdet gen-data --seed 1 --count 32 --objects 5 --out data/

    """
    from mutdet.dataset import generate_dataset

    image_ids = generate_dataset(out, seed=seed, count=count, max_objects=objects, size=size,
                                 quiet=quiet)

    if not quiet:
        click.echo(f'Wrote {len(image_ids)} scenes to {out!s}')
