from .error_feedback import fold_error_feedback
from .gradients import grad_fedprox, grad_scaffold, scaffold_control_update
from .local import local_round
from .state import (ALGORITHM_FEDAVG, ALGORITHM_FEDEF, ALGORITHM_FEDPROX, ALGORITHM_SCAFFOLD, ALGORITHMS,
                    ClientState, ClientUpload, LocalConfig, check_upload_type)
