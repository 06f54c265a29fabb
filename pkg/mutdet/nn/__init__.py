"""nn/__init__.py

Minimal differentiable compute kernel for the desk-scale detector.
"""

from mutdet.nn.tensor import Tensor, concat, maximum, minimum  # noqa: F401
from mutdet.nn.params import ParamStore  # noqa: F401
