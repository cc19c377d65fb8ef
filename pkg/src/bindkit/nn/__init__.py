from . import autograd, gradcheck, layers, optim
from .autograd import (DisconnectedGraph, NotScalar, ShapeMismatch, Tensor,
                       backward, no_grad, set_default_dtype, using_dtype)
from .optim import Adam, adam_step, init_adam_state

__all__ = [
    "autograd", "layers", "optim", "gradcheck",
    "Tensor", "backward", "no_grad", "set_default_dtype", "using_dtype",
    "ShapeMismatch", "NotScalar", "DisconnectedGraph",
    "Adam", "adam_step", "init_adam_state",
]
