"""
Subcommand handlers.

Each handler takes the parsed arguments and the pipeline configuration,
delegates to the feature services, prints one summary line and returns the
process exit code.
"""
import logging
from typing import Optional

from config.workspace import ArtifactManager
from src.core.errors import ConfigError, InputError, ShapeError
from src.features.embedding_analysis import (
    EmbeddingRepository,
    EmbeddingService,
    apply_grouping,
    fine_grain_dataset,
)
from src.features.map_prediction import MapService
from src.features.metrics import MetricsService, format_report_table, read_confusion_csv, worst_classes
from src.features.network import ModelRepository, TrainingService
from src.features.patchset import PatchSetRepository, PatchSetService, count_by_split
from src.features.raster_core import RasterService
from src.features.synthetic import FixtureSpec, SyntheticService, parse_pairs
from src.cli.config import PipelineConfig
from src.models.patches import PatchSet
from src.utils.formatters import format_summary

logger = logging.getLogger(__name__)


def _output(path: Optional[str], config: PipelineConfig, name: str):
    """Explicit output path, or the named artifact under the configured output directory."""
    if path:
        return path
    return ArtifactManager(config.output_dir).default_path(name)


def _load_task(patches_path, grouping_path: Optional[str], fine_grain: Optional[str]) -> PatchSet:
    """Patch set for the baseline, coarse-grain or fine-grain task."""
    patchset = PatchSetRepository().read_patchset(patches_path)
    if fine_grain and not grouping_path:
        raise ConfigError("--fine-grain needs --grouping naming the group")
    if grouping_path is None:
        return patchset
    mapping = EmbeddingRepository().read_grouping(grouping_path)
    if fine_grain:
        return fine_grain_dataset(patchset, mapping.group(fine_grain))
    return apply_grouping(patchset, mapping)


def cmd_stack(args, config: PipelineConfig) -> int:
    service = RasterService()
    cell_size = args.cell_size if args.cell_size is not None else config.cell_size
    if args.terrain_only:
        stack = service.derive_terrain(args.dem, args.output, cell_size=cell_size)
    else:
        if not args.bands:
            raise InputError("--bands is required unless --terrain-only is given")
        flip = args.ndwi_flip if args.ndwi_flip is not None else config.ndwi_flip
        stack = service.build_stack(args.bands, args.dem, args.output, cell_size=cell_size, ndwi_flip=flip)
    print(format_summary('stack', {
        'channels': stack.channel_count,
        'width': stack.width,
        'height': stack.height,
        'valid_pixels': int(stack.valid_mask().sum()),
    }))
    return 0


def cmd_synth(args, config: PipelineConfig) -> int:
    spec = FixtureSpec(
        num_classes=args.classes,
        width=args.width,
        height=args.height,
        tile=args.tile,
        channels=args.channels,
        separation=args.separation,
        sigma=args.sigma,
        confusable_pairs=parse_pairs(args.pair),
        pair_offset=args.pair_offset,
    )
    stack, labels = SyntheticService().create_fixture(spec, args.stack_out, args.labels_out, seed=config.seed)
    print(format_summary('synth', {
        'classes': spec.num_classes,
        'width': stack.width,
        'height': stack.height,
        'channels': stack.channel_count,
        'regions': spec.regions,
    }))
    return 0


def cmd_patches(args, config: PipelineConfig) -> int:
    patchset = PatchSetService().create_patchset(
        args.stack,
        args.labels,
        args.output,
        ratios=args.ratios or config.split_ratios,
        seed=config.seed,
        balanced=not args.no_balance,
    )
    counts = count_by_split(patchset)
    print(format_summary('patches', {'total': len(patchset), 'classes': len(patchset.catalog), **counts}))
    return 0


def cmd_train(args, config: PipelineConfig) -> int:
    patchset = _load_task(args.patches, args.grouping, args.fine_grain)
    model, history = TrainingService().train_model(
        patchset,
        config.train,
        _output(args.output, config, 'model'),
        variant=args.variant,
        history_path=args.history,
        dropout_rate=config.dropout_rate,
    )
    best = history.records[history.best_epoch - 1]
    print(format_summary('train', {
        'variant': args.variant,
        'classes': model.descriptor.num_classes,
        'parameters': model.descriptor.parameter_count(),
        'epochs': len(history),
        'best_epoch': history.best_epoch,
        'val_acc': best.val_acc,
    }))
    return 0


def cmd_eval(args, config: PipelineConfig) -> int:
    patchset = _load_task(args.patches, args.grouping, args.fine_grain)
    model = ModelRepository().load_model(args.model)
    if model.descriptor.num_classes != len(patchset.catalog):
        raise ShapeError(
            f"Model has {model.descriptor.num_classes} classes, task has {len(patchset.catalog)}"
        )
    _, class_report, loss, accuracy = MetricsService().evaluate_model(
        model,
        patchset,
        args.split,
        report_path=_output(args.report, config, 'report.csv'),
        confusion_path=_output(args.confusion, config, 'confusion.csv'),
    )
    print(format_report_table(class_report))
    print(format_summary('eval', {
        'split': args.split,
        'loss': loss,
        'accuracy': accuracy,
        'macro_f1': class_report.macro_f1,
        'worst': ','.join(e.label for e in worst_classes(class_report)),
    }))
    return 0


def cmd_embed(args, config: PipelineConfig) -> int:
    patchset = _load_task(args.patches, args.grouping, None)
    model = ModelRepository().load_model(args.model, variant='embedding')
    split = None if args.split == 'all' else args.split
    output = _output(args.output, config, 'latents.csv')
    latents = EmbeddingService().export_latents(model, patchset, split, output)
    print(format_summary('embed', {'vectors': len(latents), 'dim': latents.vectors.shape[1]}))
    return 0


def cmd_tsne(args, config: PipelineConfig) -> int:
    service = EmbeddingService()
    latents = service.repo.read_latents_csv(args.latents)
    catalog = PatchSetRepository().read_patchset(args.patches).catalog if args.patches else None
    result = service.project(
        latents,
        _output(args.output, config, 'tsne.csv'),
        svg_path=args.svg,
        catalog=catalog,
        perplexity=config.tsne_perplexity,
        iterations=config.tsne_iterations,
        learning_rate=config.tsne_learning_rate,
        seed=config.seed,
    )
    print(format_summary('tsne', {'points': len(latents), 'kl': result.kl_divergence[-1]}))
    return 0


def cmd_groups(args, config: PipelineConfig) -> int:
    patchset = PatchSetRepository().read_patchset(args.patches)
    service = EmbeddingService()
    if args.action == 'suggest':
        latents = service.repo.read_latents_csv(args.latents)
        threshold = args.threshold if args.threshold is not None else config.group_threshold
        suggestion = service.suggest(latents, patchset.catalog, threshold, args.output)
        closest = suggestion.pairs[0]
        print(format_summary('groups suggest', {
            'groups': len(suggestion.mapping.groups),
            'closest': f"{closest['class_a']}-{closest['class_b']}",
            'distance': closest['distance'],
        }))
        return 0

    if not args.output and not args.confusion:
        raise ConfigError("groups apply needs --output or --confusion")
    mapping = service.repo.read_grouping(args.grouping)
    fields = {'groups': len(mapping.groups)}
    grouped = apply_grouping(patchset, mapping)
    fields['classes'] = len(grouped.catalog)
    if args.output:
        PatchSetRepository().write_patchset(grouped, args.output)
    if args.confusion:
        if not args.confusion_output:
            raise ConfigError("--confusion needs --confusion-output")
        metrics = MetricsService()
        cm = apply_grouping(read_confusion_csv(args.confusion, patchset.catalog), mapping)
        metrics.repo.write_confusion_csv(cm, args.confusion_output)
        fields['total'] = cm.total
    print(format_summary('groups apply', fields))
    return 0


def cmd_predict(args, config: PipelineConfig) -> int:
    result = MapService().predict_to_files(
        args.model,
        args.stack,
        args.output,
        image_path=args.image,
        truth_path=args.truth,
        truth_image_path=args.truth_image,
    )
    class_map = result.class_map
    fields = {
        'width': class_map.width,
        'height': class_map.height,
        'predicted': int((class_map.classes != class_map.sentinel).sum()),
    }
    if result.agreement is not None:
        fields['agreement'] = result.agreement
    print(format_summary('predict', fields))
    return 0


COMMANDS = {
    'stack': cmd_stack,
    'synth': cmd_synth,
    'patches': cmd_patches,
    'train': cmd_train,
    'eval': cmd_eval,
    'embed': cmd_embed,
    'tsne': cmd_tsne,
    'groups': cmd_groups,
    'predict': cmd_predict,
}
