"""netpoison: budgeted edge-flip poisoning of node embeddings.

Library layout mirrors the pipeline: ``graph`` (containers and flip
mechanics), ``generators`` (benchmark graphs + Louvain), ``attack``
(candidate sets, homophily scoring, the attacks), ``embeddings``
(skipgram / SVD random-walk embedders), ``downstream`` (node
classification, link prediction, diagnostics) and ``harness``
(config-driven experiments). ``cli`` exposes the same stages as the
``netpoison`` command.
"""

from .attack import (
    AttackBudget,
    AttackResult,
    CandidateMode,
    CandidateSet,
    HomophilyState,
    build_candidates,
    flip_importance,
    homophily_state,
    random_attack,
    score_candidates,
    surrogate_labels,
    viking_attack,
    viking_s_attack,
)
from .downstream import (
    ClassifierModel,
    EvalStats,
    LinkPredictionSplit,
    adversarial_edge_diagnostics,
    average_precision,
    edge_betweenness,
    link_prediction_eval,
    make_lp_split,
    micro_f1,
    node_classification_eval,
    train_logreg,
)
from .embeddings import (
    Embedding,
    SkipgramParams,
    SvdParams,
    WalkCorpus,
    cosine,
    embed_graph,
    generate_walks,
    read_embedding,
    sgns_train,
    svd_deepwalk,
    write_embedding,
)
from .generators import (
    ForestFireParams,
    LfrParams,
    generate_forest_fire,
    generate_lfr,
    louvain,
    modularity,
)
from .graph import (
    FlipCandidate,
    FlipKind,
    Graph,
    LabelAssignment,
    add_flip,
    apply_flip,
    apply_flips,
    build_graph,
    degrees,
    read_edge_list,
    remove_flip,
    sample_complement,
    write_edge_list,
)
from .harness import (
    ExperimentConfig,
    Report,
    budget_sweep,
    load_dataset,
    metrics_to_csv,
    run_experiment,
)
from .seeding import derive_seed

__version__ = "0.1.0"
