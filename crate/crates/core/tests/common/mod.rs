#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use specimeta_core::ark::DEFAULT_NAAN;
use specimeta_core::crosswalk::{default_rule_files, load_rules, RuleSet};
use specimeta_core::fixtures::Corpus;
use specimeta_core::model::NamespaceRegistry;
use specimeta_core::pipeline::{run_pipeline, PipelineRun, SourceInput, DEFAULT_KEY_COLUMN};

pub fn rulesets(reg: &NamespaceRegistry) -> Vec<RuleSet> {
    default_rule_files()
        .iter()
        .map(|(_, t)| load_rules(t.as_bytes(), reg).expect("built-in rules load"))
        .collect()
}

pub fn run(corpus: &Corpus) -> PipelineRun {
    let reg = Arc::new(NamespaceRegistry::default());
    let rules = rulesets(&reg);
    let sources: Vec<SourceInput> = corpus
        .sources()
        .iter()
        .map(|(n, t)| SourceInput::new(n, t.as_bytes()))
        .collect();
    run_pipeline(&sources, &rules, DEFAULT_KEY_COLUMN, DEFAULT_NAAN, reg).expect("pipeline runs")
}
