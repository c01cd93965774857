"""Static call-order and call-convergence checking for textual LLVM IR."""

__version__ = "0.1.0"
