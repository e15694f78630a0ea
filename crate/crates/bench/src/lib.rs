//! Benchmarks live in `benches/`; this library only exposes shared inputs.

use geomorph_core::{fixtures, ClassInventory, ParadigmFile, PhiMatrix, TotalParadigmMatrix};

pub fn paradigm(name: &str) -> (PhiMatrix, TotalParadigmMatrix) {
    fixtures::load(name).expect("bundled fixture parses").paradigm().expect("fixture is a paradigm")
}

pub fn classes(name: &str) -> ClassInventory {
    fixtures::load(name).expect("bundled fixture parses").class_inventory().expect("fixture has classes")
}

pub fn file(name: &str) -> ParadigmFile {
    fixtures::load(name).expect("bundled fixture parses")
}
