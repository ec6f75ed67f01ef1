#!/usr/bin/env python3
"""
Tests for the label inference network, the decision network, the composite
model and checkpoints
"""

import sys

import numpy as np
import pytest
import torch
from torch import nn

from core.errors import CheckpointError, ShapeError
from core.types import LabeledImage
from network.backbones import TinyBackbone, build_backbone
from network.checkpoint import load_checkpoint, save_checkpoint
from network.decision import ComprehensiveDecisionNetwork, cdn_forward
from network.label_inference import PatchLabelInferenceNetwork, plin_forward
from network.model import PatchLabelModel, build_model, parameter_count
from network.predictor import decide, predict
from patching import DEFAULT_PYRAMID, extract_patches
from training.objectives import total_loss


def _zero_head(backbone):
    nn.init.zeros_(backbone.final_layer.weight)
    nn.init.zeros_(backbone.final_layer.bias)


def test_zero_final_layer_gives_one_half():
    backbone = TinyBackbone(8)
    _zero_head(backbone)
    plin = PatchLabelInferenceNetwork(backbone, 300)
    image = LabeledImage(np.random.default_rng(0).integers(0, 255, (900, 1200), dtype=np.uint8), 0, 8)
    confidences = plin_forward(extract_patches(image, "ip", DEFAULT_PYRAMID), plin)
    assert confidences.numpy().shape == (17, 8)
    np.testing.assert_allclose(confidences.numpy(), 0.5)


def test_saturated_confidences_stay_inside_unit_interval():
    backbone = TinyBackbone(2)
    _zero_head(backbone)
    with torch.no_grad():
        backbone.final_layer.bias.copy_(torch.tensor([100.0, -100.0]))
    plin = PatchLabelInferenceNetwork(backbone, 24).eval()
    confidences = plin(torch.rand(1, 3, 1, 24, 24))
    assert torch.all(confidences > 0.0) and torch.all(confidences < 1.0)
    assert float(confidences[0, 0, 0]) == pytest.approx(1.0, abs=1e-6)
    assert float(confidences[0, 0, 1]) == pytest.approx(0.0, abs=1e-6)


def test_plin_rejects_wrong_window():
    plin = PatchLabelInferenceNetwork(TinyBackbone(2), 300)
    with pytest.raises(ShapeError):
        plin(torch.zeros(1, 17, 1, 200, 200))


def test_cdn_outputs_distribution():
    cdn = ComprehensiveDecisionNetwork(17, 8)
    probabilities = cdn_forward(torch.rand(17, 8), cdn)
    assert probabilities.shape == (8,)
    assert torch.all(probabilities >= 0)
    assert abs(float(probabilities.sum()) - 1.0) < 1e-6


def test_cdn_zero_final_layer_is_uniform():
    cdn = ComprehensiveDecisionNetwork(17, 8)
    final = cdn.affine_layers[-1]
    nn.init.zeros_(final.weight)
    nn.init.zeros_(final.bias)
    np.testing.assert_allclose(cdn_forward(torch.rand(17, 8), cdn).detach().numpy(), 1.0 / 8, atol=1e-7)


def test_cdn_shape_mismatch():
    with pytest.raises(ShapeError):
        cdn_forward(torch.rand(12, 8), ComprehensiveDecisionNetwork(17, 8))


def test_cdn_eval_is_deterministic():
    cdn = ComprehensiveDecisionNetwork(17, 8, dropout=0.5)
    S = torch.rand(17, 8)
    assert torch.equal(cdn_forward(S, cdn, "eval"), cdn_forward(S, cdn, "eval"))


def test_cdn_permutation_equivariance():
    """Permuting S's rows together with the first layer's input columns keeps the output"""
    torch.manual_seed(0)
    m, C = 5, 3
    cdn = ComprehensiveDecisionNetwork(m, C)
    permuted = ComprehensiveDecisionNetwork(m, C)
    permuted.load_state_dict(cdn.state_dict())
    perm = torch.tensor([3, 0, 4, 1, 2])
    columns = (perm[:, None] * C + torch.arange(C)[None, :]).reshape(-1)
    with torch.no_grad():
        permuted.affine_layers[0].weight.copy_(cdn.affine_layers[0].weight[:, columns])

    S = torch.rand(m, C)
    torch.testing.assert_close(cdn_forward(S[perm], permuted), cdn_forward(S, cdn))


def test_gradients_match_finite_differences():
    torch.manual_seed(3)
    m, C, window = 5, 3, 12
    backbone = TinyBackbone(C, widths=(4, 4), downsample=1, batch_norm=False)
    model = PatchLabelModel(PatchLabelInferenceNetwork(backbone, window),
                            ComprehensiveDecisionNetwork(m, C, dropout=0.0)).double().eval()
    patches = torch.rand(1, m, 1, window, window, dtype=torch.float64)
    labels = torch.tensor([[0.0, 1.0, 0.0]], dtype=torch.float64)

    def loss():
        probabilities, confidences = model(patches)
        return total_loss(probabilities, labels, confidences, lam=1e-3, normal_class=0).total

    model.zero_grad()
    loss().backward()
    checked = [
        (backbone.features[0].weight, (0, 0, 1, 1)),
        (backbone.features[2].weight, (1, 2, 0, 1)),
        (backbone.head.weight, (1, 0)),
        (backbone.head.bias, (2,)),
        (model.cdn.affine_layers[0].weight, (4, 7)),
        (model.cdn.affine_layers[-1].bias, (0,)),
    ]
    eps = 1e-6
    for parameter, index in checked:
        analytic = float(parameter.grad[index])
        with torch.no_grad():
            original = float(parameter[index])
            parameter[index] = original + eps
            plus = float(loss())
            parameter[index] = original - eps
            minus = float(loss())
            parameter[index] = original
        numeric = (plus - minus) / (2 * eps)
        assert abs(analytic - numeric) <= 1e-3 * max(abs(analytic), abs(numeric)) + 1e-9, (index, analytic, numeric)


def test_build_model_sizes(small_config):
    config = small_config(num_classes=3)
    model = build_model(config)
    probabilities, confidences = model.eval()(torch.rand(2, 17, 1, 24, 24))
    assert probabilities.shape == (2, 3)
    assert confidences.shape == (2, 17, 3)
    counts = parameter_count(model)
    assert counts['total'] == counts['plin'] + counts['cdn']
    assert counts['cdn'] == 3 * (51 * 51 + 51) + 51 * 3 + 3


def test_unknown_backbone(small_config):
    from core.config import BackboneSpec
    from core.errors import ConfigError
    with pytest.raises(ConfigError):
        build_backbone(BackboneSpec("resnet"), 2)


def test_decide_breaks_ties_low():
    assert decide(np.array([0.4, 0.4, 0.2])) == 0
    assert decide(np.array([0.1, 0.45, 0.45])) == 1


def test_checkpoint_round_trip(tmp_path, small_config):
    config = small_config(num_classes=3)
    model = build_model(config).eval()
    path = save_checkpoint(tmp_path / "model.pt", model, config, {"epoch": 1})
    loaded, loaded_config, metadata = load_checkpoint(path, expected=config)
    assert metadata == {"epoch": 1}
    assert loaded_config.to_dict() == config.to_dict()

    pixels = np.random.default_rng(1).integers(0, 255, (72, 96), dtype=np.uint8)
    first = predict(pixels, model, config)
    second = predict(pixels, loaded, loaded_config)
    np.testing.assert_array_equal(first.probabilities, second.probabilities)
    np.testing.assert_array_equal(first.confidences, second.confidences)


def test_checkpoint_errors(tmp_path, small_config):
    config = small_config(num_classes=3)
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.pt")

    path = save_checkpoint(tmp_path / "model.pt", build_model(config), config)
    with pytest.raises(CheckpointError):
        load_checkpoint(path, expected=small_config(strategy="sw", num_classes=3))

    torch.save({'format_version': 99}, tmp_path / "future.pt")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "future.pt")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
