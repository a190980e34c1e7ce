//! Bundled scenarios, one per kind, usable as schema examples and as
//! regression anchors.

use crate::error::{CliError, Result};
use crate::scenario::{parse_scenario, Scenario};

pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "example-5-11",
        description: "period-2 data of a surface self-map with two 2-periodic points and no \
                      fixed points: N(f)=0, N(f^2)=4, reduced term counts 0 and 2",
        text: include_str!("../fixtures/example-5-11.json"),
    },
    Fixture {
        name: "torus-rotation",
        description: "quarter rotation of the 2-torus at period 2: two fixed points, four \
                      2-periodic ones",
        text: include_str!("../fixtures/torus-rotation.json"),
    },
    Fixture {
        name: "presentation-rank2",
        description: "rank-2 free abelian presentation with two fixed point records in \
                      distinct classes",
        text: include_str!("../fixtures/presentation-rank2.json"),
    },
    Fixture {
        name: "equivariant-swap",
        description: "an order-2 group acting with a swap on four classes; the invariant \
                      concentrates in one subgroup class",
        text: include_str!("../fixtures/equivariant-swap.json"),
    },
    Fixture {
        name: "gap-fuller",
        description: "dimension gap report for the period-4 product construction over a \
                      3-manifold",
        text: include_str!("../fixtures/gap-fuller.json"),
    },
];

pub fn find(name: &str) -> Result<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name).ok_or_else(|| {
        let names: Vec<&str> = FIXTURES.iter().map(|f| f.name).collect();
        CliError::Input(format!("unknown fixture {name:?}; available: {}", names.join(", ")))
    })
}

pub fn load(name: &str) -> Result<Scenario> {
    parse_scenario(find(name)?.text)
}
