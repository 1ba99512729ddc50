//! Minimum-weight lookup decoding per CSS sector, ideal error correction and
//! the logical verdict.
//!
//! X errors are decoded from the Z-sector syndrome and Z errors from the
//! X-sector syndrome. Each sector table is filled breadth-first by error
//! weight, so the first error stored for a syndrome has minimum weight.
//! Syndromes beyond the table fall back to an arbitrary GF(2) solution.
//!
//! # Cache layout
//!
//! A sector table is stored as `table_d{d}_{x|z}_w{w}.bin` where the letter
//! names the error type. All integers are little-endian `u64`:
//!
//! ```text
//! entry count
//! repeated, sorted by syndrome key:
//!     ceil(r_s / 64) syndrome words, bit i of the sector syndrome at word i/64, bit i%64
//!     ceil(n / 64) error-support words, same packing
//! ```

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::decoders::Sector;
use crate::error::{Error, Result};
use crate::gf2::LinearSolver;
use crate::stabilizer::{logical_class, LogicalClass, PauliOperator, StabilizerCode, Syndrome};

/// Enumeration budget per sector when none is given.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Lookup table for one error type.
#[derive(Clone, Debug)]
pub struct SectorTable {
    /// Type of the errors stored (X errors are keyed by the Z sector).
    errors: Sector,
    n: usize,
    generators: Vec<usize>,
    columns: Vec<u64>,
    entries: HashMap<u64, BitVector>,
    solver: LinearSolver,
    rank: usize,
    built_to_weight: usize,
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl SectorTable {
    fn empty(code: &StabilizerCode, errors: Sector, max_weight: usize) -> Result<Self> {
        if !code.is_css() {
            return Err(Error::NotCss);
        }
        let generators = match errors {
            Sector::X => code.z_sector().to_vec(),
            Sector::Z => code.x_sector().to_vec(),
        };
        if generators.len() > 64 {
            return Err(Error::SearchBoundExceeded {
                what: "sector size",
                value: generators.len(),
                limit: 64,
            });
        }
        let rows = code.sector_rows(&generators);
        let n = code.n();
        let columns = (0..n)
            .map(|q| rows.iter().enumerate().fold(0u64, |acc, (i, r)| acc | (u64::from(r.get(q)) << i)))
            .collect();
        let solver = LinearSolver::new(&rows, n);
        let rank = crate::gf2::rank(&rows);
        Ok(Self {
            errors,
            n,
            generators,
            columns,
            entries: HashMap::new(),
            solver,
            rank,
            built_to_weight: max_weight,
        })
    }

    fn build(code: &StabilizerCode, errors: Sector, max_weight: usize, budget: u128) -> Result<Self> {
        let mut table = Self::empty(code, errors, max_weight)?;
        let n = table.n;
        let required: u128 = (0..=max_weight.min(n)).map(|w| binomial(n, w)).sum();
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let reachable = 1u128 << table.rank;
        table.entries.insert(0, BitVector::zeros(n));
        'weights: for w in 1..=max_weight.min(n) {
            for support in (0..n).combinations(w) {
                let key = support.iter().fold(0u64, |acc, &q| acc ^ table.columns[q]);
                table
                    .entries
                    .entry(key)
                    .or_insert_with(|| BitVector::from_indices(n, support.iter().copied()));
                if table.entries.len() as u128 == reachable {
                    break 'weights;
                }
            }
        }
        Ok(table)
    }

    pub fn errors(&self) -> Sector {
        self.errors
    }

    /// Qubit count of the stored errors.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn built_to_weight(&self) -> usize {
        self.built_to_weight
    }

    /// Generator indices whose bits form the key.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Sector syndrome key of a full syndrome.
    pub fn key_of(&self, syndrome: &Syndrome) -> u64 {
        self.generators
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &g)| acc | (u64::from(syndrome.get(g)) << i))
    }

    /// Stored minimum-weight support for a sector key.
    pub fn lookup(&self, key: u64) -> Option<&BitVector> {
        self.entries.get(&key)
    }

    /// Error support for a sector key, falling back to a linear solve.
    pub fn decode_key(&self, key: u64) -> Result<BitVector> {
        if let Some(e) = self.entries.get(&key) {
            return Ok(e.clone());
        }
        let s = BitVector::from_u64(self.generators.len(), key);
        self.solver.solve(&s).ok_or(Error::InconsistentSyndrome)
    }

    fn file_name(d: usize, errors: Sector, w: usize) -> String {
        let tag = match errors {
            Sector::X => "x",
            Sector::Z => "z",
        };
        format!("table_d{d}_{tag}_w{w}.bin")
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        out.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for key in self.entries.keys().copied().sorted_unstable() {
            out.write_all(&key.to_le_bytes())?;
            for w in self.entries[&key].words() {
                out.write_all(&w.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    fn read_from(code: &StabilizerCode, errors: Sector, max_weight: usize, path: &Path) -> Result<Self> {
        let mut table = Self::empty(code, errors, max_weight)?;
        let bytes = fs::read(path)?;
        let words: Vec<u64> = bytes
            .chunks(8)
            .map(|c| {
                <[u8; 8]>::try_from(c)
                    .map(u64::from_le_bytes)
                    .map_err(|_| Error::MalformedCache(format!("{} is not a whole number of words", path.display())))
            })
            .collect::<Result<_>>()?;
        let (&count, body) = words
            .split_first()
            .ok_or_else(|| Error::MalformedCache(format!("{} is empty", path.display())))?;
        let error_words = table.n.div_ceil(64);
        let stride = 1 + error_words;
        if body.len() as u64 != count * stride as u64 {
            return Err(Error::MalformedCache(format!(
                "{}: {count} entries need {} words, found {}",
                path.display(),
                count * stride as u64,
                body.len()
            )));
        }
        for chunk in body.chunks(stride) {
            let key = chunk[0];
            let mut e = BitVector::zeros(table.n);
            for q in 0..table.n {
                if (chunk[1 + q / 64] >> (q % 64)) & 1 == 1 {
                    e.set(q, true);
                }
            }
            let actual = e.iter_ones().fold(0u64, |acc, q| acc ^ table.columns[q]);
            if actual != key || e.count_ones() > max_weight {
                return Err(Error::MalformedCache(format!(
                    "{}: entry for key {key:#x} does not match the code",
                    path.display()
                )));
            }
            table.entries.insert(key, e);
        }
        Ok(table)
    }
}

/// Both sector tables of a CSS code.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    x_errors: SectorTable,
    z_errors: SectorTable,
    built_to_weight: usize,
}

impl SyndromeTable {
    pub fn x_errors(&self) -> &SectorTable {
        &self.x_errors
    }

    pub fn z_errors(&self) -> &SectorTable {
        &self.z_errors
    }

    pub fn sector(&self, errors: Sector) -> &SectorTable {
        match errors {
            Sector::X => &self.x_errors,
            Sector::Z => &self.z_errors,
        }
    }

    pub fn built_to_weight(&self) -> usize {
        self.built_to_weight
    }

    /// Loads both sectors from `dir` when cached, otherwise builds and stores them.
    pub fn load_or_build(code: &StabilizerCode, max_weight: usize, dir: &Path) -> Result<Self> {
        let mut sectors = Vec::with_capacity(2);
        for errors in [Sector::X, Sector::Z] {
            let path: PathBuf = dir.join(SectorTable::file_name(code.distance(), errors, max_weight));
            let table = if path.exists() {
                SectorTable::read_from(code, errors, max_weight, &path)?
            } else {
                let t = SectorTable::build(code, errors, max_weight, DEFAULT_BUDGET)?;
                fs::create_dir_all(dir)?;
                t.write_to(&path)?;
                t
            };
            sectors.push(table);
        }
        let z_errors = sectors.pop().expect("two sectors");
        let x_errors = sectors.pop().expect("two sectors");
        Ok(Self {
            x_errors,
            z_errors,
            built_to_weight: max_weight,
        })
    }

    pub fn cache_path(dir: &Path, d: usize, errors: Sector, max_weight: usize) -> PathBuf {
        dir.join(SectorTable::file_name(d, errors, max_weight))
    }
}

pub fn build_table(code: &StabilizerCode, max_weight: usize) -> Result<SyndromeTable> {
    build_table_with_budget(code, max_weight, DEFAULT_BUDGET)
}

/// Builds both tables, refusing when `sum_{w <= max_weight} C(n, w)` exceeds `budget`.
pub fn build_table_with_budget(code: &StabilizerCode, max_weight: usize, budget: u128) -> Result<SyndromeTable> {
    Ok(SyndromeTable {
        x_errors: SectorTable::build(code, Sector::X, max_weight, budget)?,
        z_errors: SectorTable::build(code, Sector::Z, max_weight, budget)?,
        built_to_weight: max_weight,
    })
}

/// Recovery operator for a full syndrome; always reproduces the syndrome.
pub fn decode(table: &SyndromeTable, code: &StabilizerCode, syndrome: &Syndrome) -> Result<PauliOperator> {
    if syndrome.len() != code.r() {
        return Err(Error::SizeMismatch {
            expected: code.r(),
            found: syndrome.len(),
        });
    }
    let x = table.x_errors.decode_key(table.x_errors.key_of(syndrome))?;
    let z = table.z_errors.decode_key(table.z_errors.key_of(syndrome))?;
    PauliOperator::from_parts(x, z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoLogicalError,
    LogicalError,
}

/// Applies ideal error correction to `frame` and classifies what remains.
pub fn final_verdict(code: &StabilizerCode, table: &SyndromeTable, frame: &PauliOperator) -> Result<Verdict> {
    let syndrome = crate::stabilizer::syndrome_of(code, frame)?;
    let mut residual = decode(table, code, &syndrome)?;
    residual.mul_assign(frame);
    Ok(match logical_class(code, &residual)? {
        LogicalClass::Trivial => Verdict::NoLogicalError,
        LogicalClass::Logical => Verdict::LogicalError,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorcode::build_hex_color_code;
    use crate::stabilizer::{syndrome_of, SinglePauli};

    #[test]
    fn d3_weight_one_table() {
        let code = build_hex_color_code(3).unwrap();
        let table = build_table(&code, 1).unwrap();
        // 7 single-qubit syndromes are distinct and fill all 2^3 keys with zero
        assert_eq!(table.x_errors().len(), 8);
        assert_eq!(table.z_errors().len(), 8);
        assert!(table.x_errors().lookup(0).unwrap().is_zero());
        for q in 0..7 {
            let e = PauliOperator::single(7, q, SinglePauli::X);
            let rec = decode(&table, &code, &syndrome_of(&code, &e).unwrap()).unwrap();
            assert_eq!(rec, e);
        }
    }

    #[test]
    fn budget_refusal_reports_count() {
        let code = build_hex_color_code(5).unwrap();
        match build_table_with_budget(&code, 3, 100) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, 1 + 19 + 171 + 969);
                assert_eq!(budget, 100);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verdict_examples() {
        let code = build_hex_color_code(3).unwrap();
        let table = build_table(&code, 2).unwrap();
        let id = PauliOperator::identity(7);
        assert_eq!(final_verdict(&code, &table, &id).unwrap(), Verdict::NoLogicalError);
        assert_eq!(final_verdict(&code, &table, &code.generators()[0]).unwrap(), Verdict::NoLogicalError);
        assert_eq!(final_verdict(&code, &table, &code.logical_x()[0]).unwrap(), Verdict::LogicalError);
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let code = build_hex_color_code(5).unwrap();
        let dir = std::env::temp_dir().join(format!("ftec-cache-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let built = SyndromeTable::load_or_build(&code, 3, &dir).unwrap();
        let loaded = SyndromeTable::load_or_build(&code, 3, &dir).unwrap();
        assert_eq!(built.x_errors().entries, loaded.x_errors().entries);
        assert_eq!(built.z_errors().entries, loaded.z_errors().entries);

        let path = SyndromeTable::cache_path(&dir, 5, Sector::X, 3);
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            SyndromeTable::load_or_build(&code, 3, &dir),
            Err(Error::MalformedCache(_))
        ));
        fs::remove_dir_all(&dir).unwrap();
    }
}
