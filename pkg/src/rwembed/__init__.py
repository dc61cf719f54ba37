"""Random-walk graph embeddings with PMI and autocovariance similarities."""

from .factorize import Embedding, clamp_pmi, factorize, factorize_rectangular
from .graph import (
    Graph,
    HoldoutSplit,
    LabelSet,
    generate_hierarchical_sbm,
    generate_sbm,
    karate_club,
    load_edge_list,
    load_labels,
    plant_hubs,
    split_holdout,
)
from .kernels import BACKEND
from .process import WalkProcess, pagerank_process, sample_corpus, standard_process
from .sample_embed import TrainerConfig, train
from .similarity import (
    SimilarityMatrix,
    autocovariance,
    log_mean_exp_pmi,
    mean_autocovariance,
    pmi,
    pmi_lemma1,
)

__version__ = "0.1.0"
