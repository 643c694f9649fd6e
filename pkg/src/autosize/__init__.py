"""Auto-sizing feedforward n-gram language models.

Hidden layers are trained with a group-sparsity regularizer (l2,1 or
l-inf,1) through proximal gradient steps; units whose incoming weight group
reaches exactly zero can then be removed without changing the model.
"""
from .corpus import (
    NGramDataset, Vocabulary, build_vocabulary, extract_ngrams, numberize, tokenize_line,
)
from .errors import InvalidConfigurationError, ModelFormatError, TrainingDivergedError
from .network import (
    Gradients, ModelParams, backward, forward, init_params, load_model, log_probs, nll,
    perplexity, save_model,
)
from .prox import (
    RegularizerSpec, RowGroup, apply_prox, group_norm_l21, group_norm_linf1, project_l1_ball,
    prox_l1, prox_l2_row, prox_linf_row,
)
from .pruning import PruneReport, compact, zero_units
from .trainer import TrainConfig, TrainingHistory, proximal_step, sgd_minibatch_step, train

__version__ = "0.1.0"
