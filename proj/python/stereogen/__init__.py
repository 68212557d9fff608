"""Depth-based stereo view synthesis."""

import json as _json

from ._core import (
    StereogenError,
    backproject,
    combine,
    dilate_mask,
    fill,
    project,
    psnr,
    render_eyes,
    render_view,
    run_cli,
    ssim,
    view_transform,
)


def render_scene(spec):
    """Source RGB and depth of a synthetic scene spec (dict)."""
    return _core_call("_render_scene", spec)


def ground_truth_view(spec, theta=0.0, tx=0.0):
    """Analytic view of a synthetic scene from a translated camera."""
    return _core_call("_ground_truth_view", spec, theta, tx)


def _core_call(name, spec, *args):
    from . import _core

    return getattr(_core, name)(_json.dumps(spec), *args)


def cli(*args):
    """Runs the command-line tool in-process; returns (exit code, stdout, stderr)."""
    return run_cli([str(a) for a in args])


def main():
    import sys

    code, out, err = run_cli(sys.argv[1:])
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


__all__ = [
    "StereogenError",
    "backproject",
    "cli",
    "combine",
    "dilate_mask",
    "fill",
    "ground_truth_view",
    "project",
    "psnr",
    "render_eyes",
    "render_scene",
    "render_view",
    "run_cli",
    "ssim",
    "view_transform",
]
