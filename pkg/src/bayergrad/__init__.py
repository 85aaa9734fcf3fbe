"""Gradient, HOG and SIFT features computed directly on Bayer mosaics."""
from .raster import BayerImage, CfaPattern, mosaic, rgb_to_gray, superpixel_view
from .gradient import GradientField, GradientOperator, gradient_magnitude, gradients, magnitude
from .demosaic import DemosaicMethod, demosaic
from .quality import gmsd, mssim, psnr
from .multiscale import GaussianKernel, blur, blur_bayer, build_scale_space, resize, sigma_for_kernel
from .noise import NoiseParams, add_noise

__version__ = "0.1.0"

__all__ = [
    "BayerImage", "CfaPattern", "mosaic", "rgb_to_gray", "superpixel_view",
    "GradientField", "GradientOperator", "gradient_magnitude", "gradients", "magnitude",
    "DemosaicMethod", "demosaic", "gmsd", "mssim", "psnr",
    "GaussianKernel", "blur", "blur_bayer", "build_scale_space", "resize", "sigma_for_kernel",
    "NoiseParams", "add_noise",
]
