"""Coded-aperture depth from defocus."""

from ._cadepth import (
    ApertureCode,
    CameraConfig,
    DegenerateKernel,
    DivisionGuard,
    Error,
    InvalidArgument,
    InvalidConfiguration,
    IoError,
    UsageError,
    blur_radius_pixels,
    convolve_patch,
    depth_to_blur_size,
    discretize_depth,
    estimate_depth_map_cnn,
    estimate_depth_map_wiener,
    estimate_patch_scale,
    kl_report,
    make_synthetic_scene,
    run,
    scale_code,
    simulate_coded_image,
    wiener_deconvolve,
)

__all__ = [
    "ApertureCode",
    "CameraConfig",
    "DegenerateKernel",
    "DivisionGuard",
    "Error",
    "InvalidArgument",
    "InvalidConfiguration",
    "IoError",
    "UsageError",
    "blur_radius_pixels",
    "convolve_patch",
    "depth_to_blur_size",
    "discretize_depth",
    "estimate_depth_map_cnn",
    "estimate_depth_map_wiener",
    "estimate_patch_scale",
    "kl_report",
    "make_synthetic_scene",
    "run",
    "scale_code",
    "simulate_coded_image",
    "wiener_deconvolve",
]
