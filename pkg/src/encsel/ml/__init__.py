"""Native, deterministic runtime regressors and model-selection machinery."""

from .models import (  # noqa: F401
    LOG_FLOOR_S,
    Dataset,
    Hyperparams,
    RuntimeModel,
    Scaler,
    apply_scaler,
    fit_model,
    fit_scaler,
    forest_fit,
    forest_member_predictions,
    forest_predict,
    knn_fit,
    knn_predict,
    load_model,
    predict,
    save_model,
    tree_fit,
    tree_predict,
)
from .tuning import (  # noqa: F401
    cv_rmse,
    cv_selection_gap,
    default_grid,
    evaluate_grid,
    greedy_feature_selection,
    grid_search,
    grid_search_shared,
    kfold_split,
    rmse,
    train_test_split_stratified,
)
