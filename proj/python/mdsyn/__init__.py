"""MD-Syn: synergistic drug combination prediction.

Thin wrapper over the compiled extension module.
"""

from ._mdsyn import (  # noqa: F401
    ATOM_FEATURE_DIM,
    CANONICAL_PANEL_SIZE,
    DRUG_EMBEDDING_DIM,
    ConfigError,
    DataError,
    MolecularGraph,
    NumericError,
    __version__,
    compute_metrics,
    explain,
    node2vec_embedding,
    normalize_adjacency,
    parse_smiles,
    predict,
    preprocess,
    split_kfold5,
    split_leave_cell_line,
    split_leave_drug,
    split_leave_drug_combo,
    split_leave_tissue,
    train,
)
