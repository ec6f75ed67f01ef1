"""
Shared building blocks for the patch label pipeline: errors, domain types and configuration.

Submodules are imported directly (``from core.config import PipelineConfig``) so that
the lower layers can depend on them without import cycles.
"""
