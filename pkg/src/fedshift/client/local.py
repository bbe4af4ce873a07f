from typing import Optional

import attr
import numpy as np

from fedshift.common.logger import get_logger
from fedshift.common.rng import make_rng
from fedshift.exceptions import ConfigurationError, DivergenceError
from fedshift.model.network import ModelSpec, loss_and_grad
from fedshift.model.optim import sgd_step
from fedshift.model.params import LayeredParams
from fedshift.quantization.codec import quantize_params
from .error_feedback import fold_error_feedback
from .gradients import grad_fedprox, grad_scaffold, scaffold_control_update
from .state import (ALGORITHM_FEDEF, ALGORITHM_FEDPROX, ALGORITHM_SCAFFOLD, ClientState, ClientUpload, LocalConfig,
                    check_upload_type)

logger = get_logger(__name__)


def _codec_options(cfg: LocalConfig):
    return dict(max_iters=cfg.kmeans_max_iters, tol=cfg.kmeans_tol)


def local_round(state: ClientState, global_params: LayeredParams, cfg: LocalConfig, spec: ModelSpec,
                server_control: Optional[LayeredParams] = None, round_index: int = 0):
    """
    Run one client's round

    Starts from the received global model, runs ``cfg.epochs`` epochs of shuffled mini-batch
    SGD with the algorithm's gradient and a fresh momentum buffer, then quantizes the result
    when the client is inferior.

    :param state: ClientState
    :param global_params: LayeredParams, the model distributed this round
    :param cfg: LocalConfig
    :param spec: ModelSpec
    :param server_control: LayeredParams | None, required iff cfg.algorithm is scaffold
    :param round_index: int, feeds the client's shuffle stream
    :return: (ClientUpload, ClientState)
    """
    is_scaffold = cfg.algorithm == ALGORITHM_SCAFFOLD
    if is_scaffold != (server_control is not None):
        raise ConfigurationError('server_control must be given exactly when the algorithm is scaffold',
                                 client=state.id)

    rng = make_rng(state.rng_seed, round_index)
    w = global_params.copy()
    velocity = w.zeros_like()
    c_k = state.control_variate if state.control_variate is not None else w.zeros_like()
    if is_scaffold:
        c_k.check_layout(w)

    steps = 0
    losses = []
    for epoch in range(1, cfg.epochs + 1):
        for batch in state.data.batches(cfg.batch_size, rng):
            loss, grad = loss_and_grad(w, spec, batch)
            if not np.isfinite(loss):
                raise DivergenceError(f'non-finite training loss {loss}', client=state.id, round=round_index,
                                      epoch=epoch)
            if cfg.algorithm == ALGORITHM_FEDPROX:
                grad = grad_fedprox(grad, w, global_params, cfg.prox_mu)
            elif is_scaffold:
                grad = grad_scaffold(grad, c_k, server_control)
            w, velocity = sgd_step(w, grad, velocity, cfg.lr, cfg.momentum)
            steps += 1
            losses.append(loss)
    if not w.is_finite():
        raise DivergenceError('non-finite weights after local training', client=state.id, round=round_index,
                              epoch=cfg.epochs)

    changes = {}
    control_delta = None
    if is_scaffold:
        new_control = scaffold_control_update(c_k, server_control, global_params, w, steps, cfg.lr)
        control_delta = new_control.zip_map(c_k, lambda a, b: a - b)
        changes['control_variate'] = new_control

    if not state.is_inferior:
        payload = w
    elif cfg.algorithm == ALGORITHM_FEDEF:
        residual = state.error_residual if state.error_residual is not None else w.zeros_like()
        payload, changes['error_residual'] = fold_error_feedback(w, residual, cfg.bits, cfg.scheme,
                                                                 **_codec_options(cfg))
    else:
        payload = quantize_params(w, cfg.bits, cfg.scheme, **_codec_options(cfg))

    upload = ClientUpload(client_id=state.id, payload=payload, control_delta=control_delta,
                          num_samples=state.num_samples, train_loss=float(np.mean(losses)))
    check_upload_type(state, upload)
    logger.debug(f'client {state.id} round {round_index}: {steps} steps, mean loss {upload.train_loss:.6f}')
    return upload, attr.evolve(state, **changes)
