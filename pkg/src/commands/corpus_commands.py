#!/usr/bin/env python3
"""
Corpus commands: ingest, synthesize, crack500 and derive
"""

import argparse
import logging

from core.types import Setting
from corpus.crack500 import DEFAULT_REPLICAS, prepare_crack500_pdd
from corpus.ingest import ingest, parse_split_ratios
from corpus.manifest import CorpusManifest
from corpus.synthetic import generate_synthetic_corpus
from patching import PyramidSpec
from training.settings import derive_setting_view
from .base_command import BaseCommand

logger = logging.getLogger("patchlabel_commands")


def _dims(text: str):
    return PyramidSpec.parse_layers(text)[0]


class IngestCommand(BaseCommand):
    def __init__(self):
        super().__init__(name="ingest", description="Build a split manifest from a class-folder tree")

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--root", required=True, help="Directory with one folder per class")
        parser.add_argument("--split", default="train=0.17,test=0.83", help="Split ratios, tag=fraction,...")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--out", required=True, help="Manifest path")
        parser.add_argument("--workers", type=int, default=4)
        parser.add_argument("--no-check", action="store_true", help="Skip decoding every image")

    def execute(self, args: argparse.Namespace) -> str:
        manifest = ingest(args.root, parse_split_ratios(args.split), args.seed, args.out,
                          check_readable=not args.no_check, workers=args.workers)
        counts = {tag: len(manifest.split(tag)) for tag in manifest.split_tags}
        return f"✅ {len(manifest)} entries, {manifest.num_classes} classes, splits {counts} -> {args.out}"


class SynthesizeCommand(BaseCommand):
    def __init__(self):
        super().__init__(name="synthesize", description="Generate a synthetic pavement corpus")

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--out", required=True)
        parser.add_argument("--per-class", type=int, default=40)
        parser.add_argument("--classes", type=int, default=8)
        parser.add_argument("--dims", default="1200x900", help="WIDTHxHEIGHT")
        parser.add_argument("--split", default="train=0.5,test=0.5")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--workers", type=int, default=4)

    def execute(self, args: argparse.Namespace) -> str:
        manifest = generate_synthetic_corpus(
            args.out, args.per_class, args.classes, _dims(args.dims), args.seed,
            parse_split_ratios(args.split), args.workers,
        )
        return f"✅ {len(manifest)} synthetic images in {manifest.num_classes} classes -> {args.out}"


class Crack500Command(BaseCommand):
    def __init__(self):
        super().__init__(name="crack500", description="Build crack/normal split replicas from masked crack images")

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--crack-dir", required=True, help="Crack images with <name>_mask files")
        parser.add_argument("--normals", type=int, required=True, help="Normal images to synthesize")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--replicas", type=int, default=DEFAULT_REPLICAS)
        parser.add_argument("--dims", default="1200x900", help="WIDTHxHEIGHT")
        parser.add_argument("--out", required=True)
        parser.add_argument("--workers", type=int, default=4)

    def execute(self, args: argparse.Namespace) -> str:
        manifests = prepare_crack500_pdd(args.crack_dir, args.normals, args.seed, args.out,
                                         args.replicas, _dims(args.dims), args.workers)
        counts = manifests[0].counts_by_class()
        return f"✅ {len(manifests)} replicas of {len(manifests[0])} entries {counts} -> {args.out}"


class DeriveCommand(BaseCommand):
    def __init__(self):
        super().__init__(name="derive", description="Write the manifest view a setting trains on")

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--manifest", required=True)
        parser.add_argument("--setting", choices=("i-det", "i-rec", "ii-rec-i"), required=True)
        parser.add_argument("--out", required=True)

    def execute(self, args: argparse.Namespace) -> str:
        view = derive_setting_view(CorpusManifest.load(args.manifest), Setting.parse(args.setting))
        view.save(args.out)
        return f"✅ {args.setting} view: {len(view)} entries, classes {view.class_names} -> {args.out}"
