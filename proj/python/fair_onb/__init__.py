"""Fairness-aware undersampling guided by pure-group ball coverage."""

import json

from ._core import (
    ConfigError,
    Dataset,
    DecisionTree,
    FonbError,
    InfeasibleError,
    ParseError,
    Report,
    SchemaError,
    UndefinedMetricError,
    ValidationError,
    accuracy,
    assess_bias,
    auc,
    compare,
    coverage,
    fairness,
    groups,
    load_csv,
    oversample,
    parse_csv,
    percentile_lower,
    preprocess,
    report_csv,
    run_fawos_grid,
    run_grid,
    select_best,
    stratified_folds,
    summary_csv,
    target_groups,
)

__version__ = "0.1.0"


def from_arrays(X, y, feature_names, protected, binary=(), positive_value=1):
    """Build a Dataset from a row-major feature matrix and a label vector.

    Columns named in `protected` or `binary` must hold 0/1; the rest are
    numeric. `y` values equal to `positive_value` form the positive class.
    """
    names = list(feature_names)
    binary = sorted(set(binary) | set(protected), key=names.index)
    schema = {
        "class": "label",
        "positive_value": str(positive_value),
        "protected": list(protected),
        "binary": binary,
        "numeric": [n for n in names if n not in binary],
    }
    lines = [",".join(names + ["label"])]
    for row, label in zip(X, y):
        lines.append(",".join([repr(float(v)) if n not in binary else str(int(v)) for n, v in zip(names, row)]
                              + [str(label)]))
    return parse_csv("\n".join(lines) + "\n", json.dumps(schema))


__all__ = [name for name in dir() if not name.startswith("_")]
