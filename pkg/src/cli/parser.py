"""
Argument parser for the lulc command line.
"""
import argparse
from pathlib import Path

from config.settings import APP_NAME
from src.models.network import OPTIMIZERS, VARIANTS
from src.models.patches import SPLIT_NAMES


def _ratios(raw: str) -> tuple:
    try:
        return tuple(float(part) for part in raw.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated fractions, got {raw!r}") from None


def _add_stack(subparsers) -> None:
    p = subparsers.add_parser('stack', help='Build the 13-channel stack from bands and a DEM')
    p.add_argument('--bands', help='Stack file holding the six spectral bands')
    p.add_argument('--dem', required=True, help='Single-channel elevation stack file')
    p.add_argument('--output', required=True, help='Output stack path')
    p.add_argument('--cell-size', type=float, help='DEM cell size in meters')
    p.add_argument('--ndwi-flip', action='store_true', default=None, help='Use (swir - nir)/(swir + nir)')
    p.add_argument('--terrain-only', action='store_true', help='Write only the five relief channels')


def _add_synth(subparsers) -> None:
    p = subparsers.add_parser('synth', help='Generate a synthetic stack and label fixture')
    p.add_argument('--classes', type=int, default=4)
    p.add_argument('--width', type=int, default=36)
    p.add_argument('--height', type=int, default=36)
    p.add_argument('--tile', type=int, default=6, help='Side of one class region (multiple of 3)')
    p.add_argument('--channels', type=int, default=13)
    p.add_argument('--separation', type=float, default=10.0, help='Class mean distance in sigmas')
    p.add_argument('--sigma', type=float, default=1.0)
    p.add_argument('--pair', action='append', metavar='A:B', help='Confusable class index pair (repeatable)')
    p.add_argument('--pair-offset', type=float, default=0.0, help='Mean offset inside a pair in sigmas')
    p.add_argument('--stack-out', required=True)
    p.add_argument('--labels-out', required=True)


def _add_patches(subparsers) -> None:
    p = subparsers.add_parser('patches', help='Extract, balance and split homogeneous 3x3 patches')
    p.add_argument('--stack', required=True)
    p.add_argument('--labels', required=True)
    p.add_argument('--output', required=True, help='Output patch set path')
    p.add_argument('--ratios', type=_ratios, help='train,val,test fractions')
    p.add_argument('--no-balance', action='store_true', help='Keep every homogeneous patch')


def _add_train(subparsers) -> None:
    p = subparsers.add_parser('train', help='Train a classifier or embedding model')
    p.add_argument('--patches', required=True)
    p.add_argument('--output', help='Checkpoint path (default: <output dir>/model)')
    p.add_argument('--lr', type=float, dest='learning_rate')
    p.add_argument('--epochs', type=int)
    p.add_argument('--batch', type=int, dest='batch_size')
    p.add_argument('--augment', action=argparse.BooleanOptionalAction, default=None)
    p.add_argument('--optimizer', choices=OPTIMIZERS)
    p.add_argument('--dropout', type=float, dest='dropout_rate')
    p.add_argument('--variant', choices=VARIANTS, default='classifier')
    p.add_argument('--grouping', help='Group mapping document (coarse-grain training)')
    p.add_argument('--fine-grain', metavar='GROUP', help='Train the binary task inside one group')
    p.add_argument('--history', help='Per-epoch history CSV')


def _add_eval(subparsers) -> None:
    p = subparsers.add_parser('eval', help='Evaluate a checkpoint on one split')
    p.add_argument('--model', required=True)
    p.add_argument('--patches', required=True)
    p.add_argument('--split', choices=SPLIT_NAMES, default='test')
    p.add_argument('--grouping')
    p.add_argument('--fine-grain', metavar='GROUP')
    p.add_argument('--report', help='Report CSV path (default: <output dir>/report.csv)')
    p.add_argument('--confusion', help='Confusion matrix CSV path (default: <output dir>/confusion.csv)')


def _add_embed(subparsers) -> None:
    p = subparsers.add_parser('embed', help='Export latent vectors of an embedding model')
    p.add_argument('--model', required=True)
    p.add_argument('--patches', required=True)
    p.add_argument('--split', choices=SPLIT_NAMES + ('all',), default='test')
    p.add_argument('--grouping')
    p.add_argument('--output', help='Latents CSV path (default: <output dir>/latents.csv)')


def _add_tsne(subparsers) -> None:
    p = subparsers.add_parser('tsne', help='Project latent vectors to 2-D')
    p.add_argument('--latents', required=True)
    p.add_argument('--output', help='Coordinates CSV path (default: <output dir>/tsne.csv)')
    p.add_argument('--svg', help='Scatter plot path')
    p.add_argument('--patches', help='Patch set whose catalog names the legend')
    p.add_argument('--perplexity', type=float, dest='tsne_perplexity')
    p.add_argument('--iterations', type=int, dest='tsne_iterations')
    p.add_argument('--learning-rate', type=float, dest='tsne_learning_rate')


def _add_groups(subparsers) -> None:
    p = subparsers.add_parser('groups', help='Suggest or apply class groupings')
    actions = p.add_subparsers(dest='action', required=True)

    suggest = actions.add_parser('suggest', help='Merge classes with close latent centroids')
    suggest.add_argument('--latents', required=True)
    suggest.add_argument('--patches', required=True, help='Patch set whose catalog the latents use')
    suggest.add_argument('--threshold', type=float)
    suggest.add_argument('--output', required=True, help='Grouping document path')

    apply = actions.add_parser('apply', help='Remap a patch set or confusion matrix')
    apply.add_argument('--grouping', required=True)
    apply.add_argument('--patches', required=True)
    apply.add_argument('--output', help='Grouped patch set path')
    apply.add_argument('--confusion', help='Confusion CSV in the patch set catalog')
    apply.add_argument('--confusion-output', help='Grouped confusion CSV path')


def _add_predict(subparsers) -> None:
    p = subparsers.add_parser('predict', help='Dense map prediction over a stack')
    p.add_argument('--model', required=True)
    p.add_argument('--stack', required=True)
    p.add_argument('--output', required=True, help='Class map label raster path')
    p.add_argument('--image', help='PPM rendering of the map')
    p.add_argument('--truth', help='Reference label raster')
    p.add_argument('--truth-image', help='PPM rendering of the reference')


def build_parser() -> argparse.ArgumentParser:
    """Parser with global flags and one subparser per command."""
    parser = argparse.ArgumentParser(prog='lulc', description=f"{APP_NAME}: 3x3 patch land cover classification")
    parser.add_argument('--seed', type=int, help='Random seed for every stochastic step')
    parser.add_argument('--config', help='dotenv file overriding LULC_* settings')
    parser.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('--output-dir', type=Path, help='Directory for outputs whose path is not given')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for add in (_add_stack, _add_synth, _add_patches, _add_train, _add_eval,
                _add_embed, _add_tsne, _add_groups, _add_predict):
        add(subparsers)
    return parser
