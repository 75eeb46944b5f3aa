//! A tour of the two lattice backends and their dilation structure: the
//! block lattice ℤ² with coordinate-wise doubling, and the discrete
//! Heisenberg lattice, whose dilation scales the central coordinate by
//! the square of the horizontal factor.
//!
//! Run with: `cargo run --release --example lattice_tour`

use aperiodiq::lattice::{LatticeModel, PointSet, Rat};

fn tour(name: &str, model: &LatticeModel, g: Vec<i64>, h: Vec<i64>) -> aperiodiq::Result<()> {
    println!("== {name} ==");
    println!("dimension {}, stretch factor λ₀ = {}", model.dim(), model.lambda0());

    let gh = model.multiply(&g, &h);
    let hg = model.multiply(&h, &g);
    println!("g = {g:?}, h = {h:?}");
    println!("g·h = {gh:?}, h·g = {hg:?}{}", if gh == hg { "" } else { "  (noncommutative!)" });
    println!("g⁻¹ = {:?}", model.inverse(&g));

    println!("dilation of g: {:?} -> {:?} -> {:?}", g, model.dilate(1, &g), model.dilate(2, &g));

    let e = PointSet::from_points(model.dim(), [model.identity()]);
    for n in 0..=2u32 {
        println!("level-{n} cell count: {}", model.support(n, &e)?.len());
    }

    let (gamma, x) = model.quotient_decompose(1, &g);
    println!("g splits at depth 1 as D(γ)·x with γ = {gamma:?}, x = {x:?}");

    for r in [1i128, 2, 4] {
        let ball = model.ball_points(&model.identity(), Rat::new(r, 1))?;
        println!("lattice ball of radius {r}: {} points", ball.len());
    }
    println!();
    Ok(())
}

fn main() -> aperiodiq::Result<()> {
    let z2 = LatticeModel::zd_blocks(&[2, 2])?;
    tour("block lattice ℤ², factors (2,2)", &z2, vec![3, -1], vec![-2, 5])?;

    let heis = LatticeModel::heisenberg();
    tour("discrete Heisenberg lattice", &heis, vec![2, 0, 0], vec![0, 2, 0])?;
    Ok(())
}
