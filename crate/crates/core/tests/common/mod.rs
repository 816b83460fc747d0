#![allow(dead_code)]

use std::path::PathBuf;

use cocycle_lab::base::RotationSystem;
use cocycle_lab::cocycle::{Cocycle, Generator, TrigSum};
use cocycle_lab::group::{GroupElement, GroupInstance};

/// One cocycle per registry family, all over the golden rotation.
pub fn families() -> Vec<(&'static str, Cocycle)> {
    let s = RotationSystem::golden();
    let hg = GroupInstance::HeisenbergReal;
    let make = |g: GroupInstance, gen: Generator| Cocycle::new(s.clone(), g, gen).unwrap();
    vec![
        (
            "constant",
            make(hg.clone(), Generator::Constant(GroupElement::from_f64(&[0.3, -0.2, 0.1]))),
        ),
        (
            "trig",
            make(
                GroupInstance::RealVector(2),
                Generator::TrigSum(vec![TrigSum::cos(), "0.5*sin:2".parse().unwrap()]),
            ),
        ),
        (
            "coboundary",
            make(GroupInstance::RealVector(1), Generator::Coboundary(vec![TrigSum::cos()])),
        ),
        ("anzai", make(GroupInstance::Torus(1), Generator::AnzaiIdentity)),
        (
            "heisenberg-lift",
            make(
                hg,
                Generator::HeisenbergLift {
                    a: TrigSum::cos(),
                    b: TrigSum::sin(),
                },
            ),
        ),
        (
            "product",
            make(
                GroupInstance::DirectProduct(vec![GroupInstance::Torus(1), GroupInstance::RealVector(1)]),
                Generator::Product(vec![Generator::AnzaiIdentity, Generator::Coboundary(vec![TrigSum::cos()])]),
            ),
        ),
    ]
}

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn scenario(name: &str) -> PathBuf {
    scenario_dir().join(format!("{name}.json"))
}

/// Every scenario file in the suite, sorted by name.
pub fn suite() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

/// `[[1, a, c], [0, 1, b], [0, 0, 1]]`
pub fn heisenberg_matrix(g: &GroupElement) -> [[f64; 3]; 3] {
    [[1.0, g.coord(0), g.coord(2)], [0.0, 1.0, g.coord(1)], [0.0, 0.0, 1.0]]
}

pub fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Inverse of a unipotent upper-triangular matrix.
pub fn unipotent_inverse(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let (a, b, c) = (m[0][1], m[1][2], m[0][2]);
    [[1.0, -a, a * b - c], [0.0, 1.0, -b], [0.0, 0.0, 1.0]]
}

/// Largest entrywise gap between the matrix of `g` and `m`.
pub fn matrix_gap(g: &GroupElement, m: &[[f64; 3]; 3]) -> f64 {
    let gm = heisenberg_matrix(g);
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((gm[i][j] - m[i][j]).abs());
        }
    }
    worst
}
