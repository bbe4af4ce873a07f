import numpy as np

from fedshift.model.params import LayeredParams


def grad_fedprox(grad: LayeredParams, w: LayeredParams, w_global: LayeredParams, mu: float) -> LayeredParams:
    """Gradient of F_k(w) + mu/2 * ||w - w_global||^2"""
    w.check_layout(w_global)
    if mu == 0:
        return grad
    return grad.zip_map(w.zip_map(w_global, lambda a, b: a - b), lambda g, d: g + mu * d)


def grad_scaffold(grad: LayeredParams, c_k: LayeredParams, c: LayeredParams) -> LayeredParams:
    """Control-variate corrected gradient g - c_k + c"""
    correction = c.zip_map(c_k, lambda server, client: server - client)
    if not any(values.any() for _, values in correction):
        return grad
    return grad.zip_map(correction, lambda g, d: g + d)


def scaffold_control_update(c_k: LayeredParams, c: LayeredParams, w_global: LayeredParams, w_local: LayeredParams,
                            steps: int, lr: float) -> LayeredParams:
    """
    Option II: c_k' = c_k - c + (w_global - w_local) / (steps * lr)

    :param steps: int, local mini-batch steps taken this round
    """
    for other in (c, w_global, w_local):
        c_k.check_layout(other)
    scale = 1.0 / (steps * lr)
    layers = []
    for (name, own), (_, server), (_, start), (_, end) in zip(c_k, c, w_global, w_local):
        updated = own.astype(np.float64) - server + (start.astype(np.float64) - end) * scale
        layers.append((name, updated.astype(own.dtype)))
    return LayeredParams(layers=layers)
