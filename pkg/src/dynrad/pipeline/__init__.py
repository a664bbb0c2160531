from .config import PipelineConfig, config_schema
from .stages import (STAGES, StageError, dynamics_stage, extract_stage, run_pipeline, select_stage,
                     train_eval_stage)
from .synth import SynthSpec, generate

__all__ = [
    "PipelineConfig", "config_schema", "STAGES", "StageError", "dynamics_stage", "extract_stage",
    "run_pipeline", "select_stage", "train_eval_stage", "SynthSpec", "generate",
]
