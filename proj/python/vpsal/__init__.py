"""Fixation prediction from bottom-up saliency plus a vanishing-point channel."""

import json

from ._core import (
    VpsalError,
    auc,
    builtin_saliency,
    cc,
    center_gaussian,
    density_map,
    detect_vp,
    improvement,
    load_image,
    nss,
    paired_t_test,
    save_map,
    score_map,
    train_linear_svm,
    vp_gaussian,
    write_synthetic_corpus,
)
from . import _core


def default_config():
    return json.loads(_core.default_config())


def run_experiment(config=None, **overrides):
    """Full experiment; keys as in the CLI config file. Returns the report as a dict."""
    cfg = dict(config or {})
    cfg.update(overrides)
    for k, v in cfg.items():
        if hasattr(v, "__fspath__"):
            cfg[k] = str(v)
    return json.loads(_core.run_experiment(json.dumps(cfg)))


def render_table(report):
    return _core.render_table(json.dumps(report))


__all__ = [
    "VpsalError",
    "auc",
    "builtin_saliency",
    "cc",
    "center_gaussian",
    "default_config",
    "density_map",
    "detect_vp",
    "improvement",
    "load_image",
    "nss",
    "paired_t_test",
    "render_table",
    "run_experiment",
    "save_map",
    "score_map",
    "train_linear_svm",
    "vp_gaussian",
    "write_synthetic_corpus",
]
