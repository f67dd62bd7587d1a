"""Box annotation noise synthesis and prediction-ensemble correction."""

from ._core import (  # noqa: F401
    BBox,
    BoxfixError,
    CorrectionConfig,
    ExperimentReport,
    Instance,
    Prediction,
    SceneConfig,
    SimConfig,
    correct_box,
    correct_dataset,
    corrupt_box,
    corrupt_dataset,
    estimate_noise_level,
    evaluate_ap,
    from_xywh,
    iou,
    kalman_update,
    load_dataset_instances,
    load_results,
    posterior_batch,
    run_experiment,
    synthesize_instances,
    to_xywh,
    weight,
)

__all__ = [name for name in dir() if not name.startswith("_")]
