//! Triangular 6.6.6 (hexagonal) color codes of odd distance.
//!
//! The patch lives on triangular-lattice points `(row, col)` with
//! `0 <= col <= row <= 3(d-1)/2`. Points with `(row + col) % 3 == 1` are
//! plaquette centers; every other point is a qubit. A plaquette acts on the
//! qubits among its six lattice neighbours that fall inside the triangle, so
//! bulk plaquettes have weight 6 and boundary ones weight 4.

use itertools::Itertools;
use serde::Serialize;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::stabilizer::{PauliOperator, SinglePauli, StabilizerCode};

pub const MIN_DISTANCE: usize = 3;
pub const MAX_DISTANCE: usize = 11;

const NEIGHBOURS: [(isize, isize); 6] = [(0, -1), (0, 1), (-1, 0), (1, 0), (1, 1), (-1, -1)];

#[derive(Clone, Debug, Serialize)]
pub struct HexLayout {
    pub d: usize,
    /// Qubit coordinates in row-major order; the index is the qubit index.
    pub vertices: Vec<(usize, usize)>,
    /// Plaquette qubit sets in row-major order of their centers.
    pub plaquettes: Vec<Vec<usize>>,
    pub plaquette_centers: Vec<(usize, usize)>,
}

fn check_distance(d: usize) -> Result<()> {
    if d.is_multiple_of(2) || !(MIN_DISTANCE..=MAX_DISTANCE).contains(&d) {
        return Err(Error::InvalidDistance(d));
    }
    Ok(())
}

pub fn hex_layout(d: usize) -> Result<HexLayout> {
    check_distance(d)?;
    let side = 3 * (d - 1) / 2;
    let is_center = |r: usize, c: usize| (r + c) % 3 == 1;

    let mut index = vec![vec![None; side + 1]; side + 1];
    let mut vertices = Vec::new();
    let mut plaquette_centers = Vec::new();
    for (r, row) in index.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate().take(r + 1) {
            if is_center(r, c) {
                plaquette_centers.push((r, c));
            } else {
                *slot = Some(vertices.len());
                vertices.push((r, c));
            }
        }
    }

    let plaquettes = plaquette_centers
        .iter()
        .map(|&(r, c)| {
            let mut support: Vec<usize> = NEIGHBOURS
                .iter()
                .filter_map(|&(dr, dc)| {
                    let nr = r.checked_add_signed(dr)?;
                    let nc = c.checked_add_signed(dc)?;
                    (nr <= side && nc <= nr).then(|| index[nr][nc]).flatten()
                })
                .collect();
            support.sort_unstable();
            support
        })
        .collect();

    Ok(HexLayout {
        d,
        vertices,
        plaquettes,
        plaquette_centers,
    })
}

/// Builds the `[[(3d^2+1)/4, 1, d]]` hexagonal color code.
pub fn build_hex_color_code(d: usize) -> Result<StabilizerCode> {
    let layout = hex_layout(d)?;
    let n = layout.vertices.len();
    let x_gens = layout.plaquettes.iter().map(|s| PauliOperator::x_on(n, s.iter().copied()));
    let z_gens = layout.plaquettes.iter().map(|s| PauliOperator::z_on(n, s.iter().copied()));
    let generators = x_gens.chain(z_gens).collect();

    // the side col == 0 carries d qubits
    let edge: Vec<usize> = layout
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, &(_, c))| c == 0)
        .map(|(q, _)| q)
        .collect();
    let logical_x = PauliOperator::x_on(n, edge.iter().copied());
    let logical_z = PauliOperator::z_on(n, edge.iter().copied());
    StabilizerCode::new(generators, vec![logical_x], vec![logical_z], d)
}

/// Minimum weight of a nontrivial logical operator, by enumerating Paulis in
/// increasing weight. Refuses codes with more than `max_n` qubits.
pub fn verify_distance(code: &StabilizerCode, max_n: usize) -> Result<usize> {
    let n = code.n();
    if n > max_n {
        return Err(Error::SearchBoundExceeded {
            what: "qubit count",
            value: n,
            limit: max_n,
        });
    }
    let r = code.r();
    let logicals: Vec<&PauliOperator> = code.logical_x().iter().chain(code.logical_z()).collect();
    // per-qubit, per-Pauli signature: syndrome bits followed by logical anticommutation bits
    let width = r + logicals.len();
    let signature = |q: usize, p: SinglePauli| {
        let e = PauliOperator::single(n, q, p);
        let mut s = BitVector::zeros(width);
        s.splice(0, &code.column(q, p));
        for (i, l) in logicals.iter().enumerate() {
            s.set(r + i, l.anticommutes_with(&e));
        }
        s
    };
    let table: Vec<[BitVector; 3]> = (0..n)
        .map(|q| SinglePauli::NONTRIVIAL.map(|p| signature(q, p)))
        .collect();

    for w in 1..=n {
        for support in (0..n).combinations(w) {
            for choice in std::iter::repeat_n(0..3usize, w).multi_cartesian_product() {
                let mut acc = BitVector::zeros(width);
                for (&q, &c) in support.iter().zip(&choice) {
                    acc.xor_assign(&table[q][c]);
                }
                let syndrome_zero = (0..r).all(|i| !acc.get(i));
                let logical = (r..width).any(|i| acc.get(i));
                if syndrome_zero && logical {
                    return Ok(w);
                }
            }
        }
    }
    Err(Error::InvalidCode("no nontrivial logical operator exists".into()))
}
