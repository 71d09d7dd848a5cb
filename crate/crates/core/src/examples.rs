//! Knowledge bases bundled with the binary.

use serde::Serialize;

pub const RUNNING_EXAMPLE: &str = include_str!("../kbs/running_example.kb");
pub const LAYERED_ONE_FAULT: &str = include_str!("../corpus/a20_f1.kb");
pub const LAYERED_TWO_FAULTS: &str = include_str!("../corpus/a20_f2.kb");

#[derive(Debug, Clone, Serialize)]
pub struct BundledKb {
    pub id: &'static str,
    pub name: &'static str,
    pub text: &'static str,
}

pub fn catalog() -> Vec<BundledKb> {
    vec![
        BundledKb { id: "running-example", name: "Researcher chain", text: RUNNING_EXAMPLE },
        BundledKb { id: "layered-a20-f1", name: "Generated, 20 atoms, one fault", text: LAYERED_ONE_FAULT },
        BundledKb { id: "layered-a20-f2", name: "Generated, 20 atoms, two faults", text: LAYERED_TWO_FAULTS },
    ]
}

pub fn find(id: &str) -> Option<BundledKb> {
    catalog().into_iter().find(|kb| kb.id == id)
}
