"""
Training package: objectives, schedule, augmentation, settings and protocols
"""

from .objectives import LossBreakdown, classification_loss, sparsity_loss, total_loss
from .schedule import build_scheduler, lr_at
from .augmentation import AugmentationDraw, apply_augmentation, augment, draw_augmentation
from .settings import SettingSpec, derive_setting_view, detection_scores
from .protocols import combine_two_stage, evaluate_model, evaluate_two_stage
from .trainer import Trainer, TrainingResult, seed_everything, train

__all__ = [
    'LossBreakdown',
    'classification_loss',
    'sparsity_loss',
    'total_loss',
    'build_scheduler',
    'lr_at',
    'AugmentationDraw',
    'apply_augmentation',
    'augment',
    'draw_augmentation',
    'SettingSpec',
    'derive_setting_view',
    'detection_scores',
    'combine_two_stage',
    'evaluate_model',
    'evaluate_two_stage',
    'Trainer',
    'TrainingResult',
    'seed_everything',
    'train',
]
