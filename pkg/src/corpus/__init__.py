#!/usr/bin/env python3
"""
Corpus package: manifests, ingestion, normal-image synthesis and synthetic corpora
"""

from .manifest import CorpusManifest, ManifestEntry, class_map_for
from .images import read_image, write_image
from .ingest import ingest, parse_split_ratios
from .inpaint import MaskedCrackImage, synthesize_normal
from .synthetic import generate_synthetic_corpus, generate_synthetic_image
from .crack500 import prepare_crack500_pdd

__all__ = [
    'CorpusManifest',
    'ManifestEntry',
    'class_map_for',
    'read_image',
    'write_image',
    'ingest',
    'parse_split_ratios',
    'MaskedCrackImage',
    'synthesize_normal',
    'generate_synthetic_corpus',
    'generate_synthetic_image',
    'prepare_crack500_pdd',
]
