"""Python bindings for the nmrm C++ core."""

from ._nmrm import (
    Bag,
    ContractError,
    FormatError,
    Model,
    NumericError,
    apply_label_noise,
    build_model,
    checkpoint_from_json,
    class_histogram,
    evaluate,
    generate_dataset,
    gradient_check,
    load_checkpoint,
    load_dataset,
    lunar_oracle,
    model_kinds,
    oracle_step,
    probe_presets,
    rl_train,
    run_probe,
    save_dataset,
    split_dataset,
    tasks,
    toy_dataset,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
