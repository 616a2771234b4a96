#![allow(dead_code)]

use std::path::Path;

use rulenet::datagen::FunctionId;
use rulenet::pipeline::PipelineConfig;

/// Small Function 1 run that finishes in seconds.
pub fn quick_config(out_dir: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.out_dir = out_dir.to_path_buf();
    cfg.generator.function = FunctionId::F1;
    cfg.generator.train_count = 400;
    cfg.generator.test_count = 400;
    cfg.network.candidates = 1;
    cfg.train.max_iterations = 300;
    cfg.prune.retrain_iterations = 100;
    cfg
}
