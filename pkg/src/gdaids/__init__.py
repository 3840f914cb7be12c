"""Linear and kernel (generalized) discriminant analysis for multiclass
intrusion-detection data, with reference classifiers and evaluation."""

from .errors import (ConfigError, DataError, GdaidsError, NotPositiveDefiniteError,
                     NumericError, ParseError)
from .ingest import (CATEGORIES, Encoder, LabelMap, NumericDataset, RawDataset, allocate,
                     encode, fit_encoder, histogram, load_label_map, load_schema, map_labels,
                     parse_kdd_csv, read_kdd_file, select_features, stratified_sample)
from .eigencore import (CenteringStats, EigenPairs, KernelSpec, center_kernel,
                        center_test_kernel, generalized_sym_eig, gram_matrix, sym_eig)
from .lda import LdaModel, ScatterPair, fit_lda, project_lda, rank_features_lda, scatter_matrices
from .gda import (BlockDiagD, GdaModel, build_d_matrix, fit_gda, project_gda,
                  rank_features_gda, rayleigh_quotient)
from .classifiers import (MlpModel, TreeModel, entropy, gain_ratio, predict_mlp,
                          predict_tree, train_mlp, train_tree)
from .metrics import (ClassReport, ConfusionMatrix, Timings, class_report, confusion_matrix,
                      detection_rate, far_tabular, far_textual, precision, table_percentages,
                      timed)

__version__ = "0.1.0"
