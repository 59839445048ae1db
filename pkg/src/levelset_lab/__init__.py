"""Level sets, collision sets and subordination indices of stable-like jump processes."""

__version__ = "0.1.0"

# bumped when a module's numerical output changes
MODULE_VERSIONS = {
    "symbol": "1.0",
    "indices": "1.0",
    "potential": "1.0",
    "simulate": "1.0",
    "fractal": "1.0",
    "cli": "1.0",
}
