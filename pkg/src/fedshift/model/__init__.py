from .dataset import Dataset
from .network import ModelSpec, init_params, loss_and_grad, predict_logits
from .optim import sgd_step
from .params import LayeredParams, layer_mean, layer_means
