//! Named benchmark problems with manufactured solutions.

use crate::error::{Error, Result};
use crate::nonlinear::{Pumping, ReactionSpec};
use crate::problem::{AxisFactor, DtPolicy, ErrorMode, ManufacturedSolution, ProblemSpec, TimeProfile, Trig};
use crate::spaces::Scheme;

/// Names accepted by [`lookup`], in display order.
pub const PROBLEM_NAMES: [&str; 8] = [
    "cfem_damped_2d",
    "cfem_pumped_2d",
    "cfem_pumped_3d",
    "ncfem_damped_2d",
    "ncfem_pumped_2d",
    "dg_damped_2d",
    "dg_pumped_2d",
    "allen_cahn_3way",
];

const STUDY_GRIDS_2D: [usize; 5] = [4, 8, 16, 32, 64];

fn sin_shifted(c: f64) -> AxisFactor {
    AxisFactor::new(Trig::Sin { k: 1.0 }, vec![-c, 1.0])
}

/// `x(1−x)`
fn bubble() -> Vec<f64> {
    vec![0.0, 1.0, -1.0]
}

fn damped(p: f64) -> ReactionSpec {
    ReactionSpec {
        alpha: 1.0,
        p,
        pumping: Vec::new(),
    }
}

fn pumped(p: f64, terms: &[(f64, f64)]) -> ReactionSpec {
    ReactionSpec {
        alpha: 1.0,
        p,
        pumping: terms.iter().map(|&(beta, q)| Pumping { beta, q }).collect(),
    }
}

struct Base {
    name: &'static str,
    description: &'static str,
    scheme: Scheme,
    dim: usize,
    dt: f64,
    solution: ManufacturedSolution,
    reaction: ReactionSpec,
    grids: Vec<usize>,
}

fn exact_mode(b: Base) -> ProblemSpec {
    ProblemSpec {
        name: b.name.into(),
        description: b.description.into(),
        schemes: vec![b.scheme],
        dim: b.dim,
        nu: 1.0,
        forcing_reaction: b.reaction.clone(),
        reaction: b.reaction,
        gamma: 10.0,
        final_time: 1.0,
        dt: DtPolicy::Fixed(b.dt),
        solution: b.solution,
        mode: ErrorMode::Exact,
        grids: b.grids,
    }
}

/// Pumped variant of a damped 2D problem: same forcing and initial data,
/// errors measured against a fine-mesh solution.
fn pumped_variant(damped: ProblemSpec, name: &str, description: &str, reaction: ReactionSpec) -> ProblemSpec {
    ProblemSpec {
        name: name.into(),
        description: description.into(),
        reaction,
        mode: ErrorMode::Reference { n_ref: None },
        ..damped
    }
}

fn cfem_damped_2d() -> ProblemSpec {
    exact_mode(Base {
        name: "cfem_damped_2d",
        description: "conforming P1, p = 5, no pumping, exact solution e^{-t} sin(pi x)(x-1/2) sin(pi y)(y-2/3)",
        scheme: Scheme::Cfem,
        dim: 2,
        dt: 0.01,
        solution: ManufacturedSolution {
            time: TimeProfile::Exponential { rate: 1.0 },
            axes: vec![sin_shifted(0.5), sin_shifted(2.0 / 3.0)],
        },
        reaction: damped(5.0),
        grids: STUDY_GRIDS_2D.to_vec(),
    })
}

fn ncfem_damped_2d() -> ProblemSpec {
    exact_mode(Base {
        name: "ncfem_damped_2d",
        description: "Crouzeix-Raviart, p = 5, no pumping, exact solution (t-t^2+1) cos(pi x) cos(pi y) x(1-x) y(1-y)",
        scheme: Scheme::Ncfem,
        dim: 2,
        dt: 0.01,
        solution: ManufacturedSolution {
            time: TimeProfile::Quadratic {
                c0: 1.0,
                c1: 1.0,
                c2: -1.0,
            },
            axes: vec![
                AxisFactor::new(Trig::Cos { k: 1.0 }, bubble()),
                AxisFactor::new(Trig::Cos { k: 1.0 }, bubble()),
            ],
        },
        reaction: damped(5.0),
        grids: STUDY_GRIDS_2D.to_vec(),
    })
}

fn dg_damped_2d() -> ProblemSpec {
    exact_mode(Base {
        name: "dg_damped_2d",
        description: "SIPG (gamma = 10), p = 5, no pumping, exact solution (cos t + 1) sin(3 pi x) cos(2 pi y) y(1-y)",
        scheme: Scheme::Dg,
        dim: 2,
        dt: 0.01,
        solution: ManufacturedSolution {
            time: TimeProfile::CosineShift { shift: 1.0 },
            axes: vec![
                AxisFactor::new(Trig::Sin { k: 3.0 }, vec![1.0]),
                AxisFactor::new(Trig::Cos { k: 2.0 }, bubble()),
            ],
        },
        reaction: damped(5.0),
        grids: STUDY_GRIDS_2D.to_vec(),
    })
}

fn all() -> Vec<ProblemSpec> {
    let cfem_pumped_3d = exact_mode(Base {
        name: "cfem_pumped_3d",
        description: "conforming P1 on the unit cube, p = 11 with three pumping terms, exact solution \
                      e^{-t} prod sin(pi x_i)(x_i - c_i)",
        scheme: Scheme::Cfem,
        dim: 3,
        dt: 0.1,
        solution: ManufacturedSolution {
            time: TimeProfile::Exponential { rate: 1.0 },
            axes: vec![sin_shifted(0.50), sin_shifted(0.56), sin_shifted(0.48)],
        },
        reaction: pumped(11.0, &[(2.5, 3.0), (2.0, 6.0), (3.0, 9.0)]),
        grids: vec![5, 10],
    });
    let allen_cahn = ProblemSpec {
        schemes: Scheme::ALL.to_vec(),
        ..exact_mode(Base {
            name: "allen_cahn_3way",
            description: "Allen-Cahn (p = 4, one pumping term q = 2) with all three schemes, \
                          exact solution e^{-t} sin(2 pi x) sin(3 pi y)",
            scheme: Scheme::Cfem,
            dim: 2,
            dt: 0.01,
            solution: ManufacturedSolution {
                time: TimeProfile::Exponential { rate: 1.0 },
                axes: vec![
                    AxisFactor::new(Trig::Sin { k: 2.0 }, vec![1.0]),
                    AxisFactor::new(Trig::Sin { k: 3.0 }, vec![1.0]),
                ],
            },
            reaction: pumped(4.0, &[(1.0, 2.0)]),
            grids: STUDY_GRIDS_2D.to_vec(),
        })
    };
    let pumping = [(1.0, 3.0), (3.0, 4.0)];
    vec![
        cfem_damped_2d(),
        pumped_variant(
            cfem_damped_2d(),
            "cfem_pumped_2d",
            "conforming P1, p = 5 with pumping (beta, q) = (2, 3), (4, 4); damped forcing, fine-mesh reference",
            pumped(5.0, &[(2.0, 3.0), (4.0, 4.0)]),
        ),
        cfem_pumped_3d,
        ncfem_damped_2d(),
        pumped_variant(
            ncfem_damped_2d(),
            "ncfem_pumped_2d",
            "Crouzeix-Raviart, p = 5 with pumping (1, 3), (3, 4); damped forcing, fine-mesh reference",
            pumped(5.0, &pumping),
        ),
        dg_damped_2d(),
        pumped_variant(
            dg_damped_2d(),
            "dg_pumped_2d",
            "SIPG (gamma = 10), p = 5 with pumping (1, 3), (3, 4); damped forcing, fine-mesh reference",
            pumped(5.0, &pumping),
        ),
        allen_cahn,
    ]
}

/// All registered problems.
pub fn registry() -> Vec<ProblemSpec> {
    all()
}

pub fn lookup(name: &str) -> Result<ProblemSpec> {
    all()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}
