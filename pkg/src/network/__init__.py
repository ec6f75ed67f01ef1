"""
Network package: per-patch backbones, label inference network, decision network,
checkpoints and prediction.

Import submodules directly (``network.model``, ``network.predictor``); the
package itself stays import-free so corpus datasets can use the tensor helpers.
"""
