from fedshift.exceptions import ConfigurationError
from .params import LayeredParams


def sgd_step(p: LayeredParams, grad: LayeredParams, velocity: LayeredParams, lr: float, momentum: float):
    """
    One SGD-with-momentum step: v' = momentum * v + g, p' = p - lr * v'

    :return: (LayeredParams, LayeredParams)
    """
    if lr <= 0:
        raise ConfigurationError(f'lr must be positive, received {lr}')
    if not 0 <= momentum < 1:
        raise ConfigurationError(f'momentum must lie in [0, 1), received {momentum}')
    p.check_layout(grad)
    p.check_layout(velocity)
    if momentum == 0:
        new_velocity = grad.copy()
    else:
        new_velocity = velocity.zip_map(grad, lambda v, g: momentum * v + g)
    new_p = p.zip_map(new_velocity, lambda w, v: w - lr * v)
    return new_p, new_velocity
