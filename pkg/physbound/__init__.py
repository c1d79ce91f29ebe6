"""physbound - certified lower bounds for affine physical design problems"""
__version__ = "0.1.0"
