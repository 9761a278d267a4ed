#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use tw_core::cases::PairFile;
use tw_core::pair::{assemble_pairs, GraphPair};
use tw_core::search::s2_configs;
use tw_core::template::{load_template, TorusTemplate};
use tw_core::filters::FilterSet;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap()
}

pub fn template() -> Arc<TorusTemplate> {
    static T: OnceLock<Arc<TorusTemplate>> = OnceLock::new();
    T.get_or_init(|| Arc::new(load_template(&read_data("figure2.template")).unwrap()))
        .clone()
}

pub fn figure8() -> GraphPair {
    PairFile::parse(&read_data("figure8.pair"))
        .unwrap()
        .to_pair(&template())
        .unwrap()
}

/// Every assembled pair of the `s = 2` domain.
pub fn pool() -> &'static [GraphPair] {
    static P: OnceLock<Vec<GraphPair>> = OnceLock::new();
    P.get_or_init(|| {
        let t = template();
        let mut out = Vec::new();
        for (ws, wt) in s2_configs(&FilterSet::default()).unwrap() {
            if let Ok(ps) = assemble_pairs(&t, &ws, &wt) {
                out.extend(ps);
            }
        }
        out
    })
}
