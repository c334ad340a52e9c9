//! Binary linear algebra over GF(2) and the NFV code constructions.
//!
//! Matrices are stored row-major with each row packed into `u64` words.
//! Products are computed by XOR-accumulating rows, so a vector-matrix
//! product costs one pass over the rows selected by the vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NfvError, Result};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A packed binary vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from the lowest `len` bits of `value` (bit 0 first).
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD);
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len == WORD { u64::MAX } else { (1u64 << len) - 1 };
            v.words[0] = value & mask;
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// In-place XOR with another vector of the same length.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// True when the two vectors share a set position.
    pub fn intersects(&self, other: &BitVec) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVec {
    type Err = NfvError;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(NfvError::Parse {
                    line: 1,
                    message: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

/// Dense binary matrix, row-major, word-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(NfvError::DimensionMismatch {
                left: format!("{rows}x{cols}"),
                right: "matrix with at least one row and one column".into(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, true);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: Vec<BitVec>) -> Result<Self> {
        let cols = rows.first().map(BitVec::len).unwrap_or(0);
        if rows.is_empty() || cols == 0 {
            return Err(NfvError::DimensionMismatch {
                left: format!("{}x{}", rows.len(), cols),
                right: "matrix with at least one row and one column".into(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(NfvError::DimensionMismatch {
                left: format!("row of length {}", bad.len()),
                right: format!("row of length {cols}"),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    /// Parses rows written as `0`/`1` strings, e.g. `["1010", "0110"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.parse()).collect::<Result<_>>()?)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    pub fn column(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![BitVec::zeros(self.rows); self.cols],
        };
        for (r, row) in self.data.iter().enumerate() {
            for c in row.iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.data.iter().map(BitVec::weight).collect()
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<BitMatrix> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(NfvError::DimensionMismatch {
                left: format!("column index {bad}"),
                right: format!("{} columns", self.cols),
            });
        }
        let rows = self
            .data
            .iter()
            .map(|row| BitVec::from_bits(&cols.iter().map(|&c| row.get(c)).collect::<Vec<_>>()))
            .collect();
        BitMatrix::from_rows(rows)
    }

    /// Row-vector times matrix: `u · G`, with `u.len() == rows`.
    pub fn vec_mul(&self, u: &BitVec) -> Result<BitVec> {
        if u.len() != self.rows {
            return Err(NfvError::DimensionMismatch {
                left: format!("vector of length {}", u.len()),
                right: format!("{}x{} matrix", self.rows, self.cols),
            });
        }
        let mut out = BitVec::zeros(self.cols);
        for r in u.iter_ones() {
            out.xor_assign(&self.data[r]);
        }
        Ok(out)
    }

    /// Matrix product `self · rhs` over GF(2).
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.rows {
            return Err(NfvError::DimensionMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        let data = self
            .data
            .iter()
            .map(|row| rhs.vec_mul(row))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        })
    }

    /// Renders in the generator file format: `"K N"` header then one line per row.
    pub fn to_file_string(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for row in &self.data {
            s.push_str(&row.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the generator file format.
    ///
    /// First line is `"K N"` (single space), followed by exactly K lines of
    /// N characters from `{0,1}`. Trailing blank lines are ignored.
    pub fn parse_file(text: &str) -> Result<BitMatrix> {
        let mut lines: Vec<&str> = text.split('\n').collect();
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        let header = lines.first().ok_or(NfvError::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        let dims: Vec<&str> = header.split(' ').collect();
        let parse_dim = |s: &str| -> Result<usize> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return Err(NfvError::Parse {
                    line: 1,
                    message: format!("expected \"K N\" header, found {header:?}"),
                });
            }
            s.parse::<usize>().map_err(|e| NfvError::Parse {
                line: 1,
                message: e.to_string(),
            })
        };
        if dims.len() != 2 {
            return Err(NfvError::Parse {
                line: 1,
                message: format!("expected \"K N\" header, found {header:?}"),
            });
        }
        let (k, n) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        if k == 0 || n == 0 {
            return Err(NfvError::Parse {
                line: 1,
                message: "K and N must be positive".into(),
            });
        }
        if lines.len() - 1 != k {
            return Err(NfvError::Parse {
                line: lines.len().min(k + 1) + 1,
                message: format!("expected {k} matrix rows, found {}", lines.len() - 1),
            });
        }
        let mut rows = Vec::with_capacity(k);
        for (idx, line) in lines[1..].iter().enumerate() {
            let lineno = idx + 2;
            if line.len() != n {
                return Err(NfvError::Parse {
                    line: lineno,
                    message: format!("expected {n} characters, found {}", line.len()),
                });
            }
            let row: BitVec = line.parse().map_err(|e| match e {
                NfvError::Parse { message, .. } => NfvError::Parse {
                    line: lineno,
                    message,
                },
                other => other,
            })?;
            rows.push(row);
        }
        BitMatrix::from_rows(rows)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for row in &self.data {
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}

/// `u · G` over GF(2).
pub fn encode(generator: &BitMatrix, message: &BitVec) -> Result<BitVec> {
    generator.vec_mul(message)
}

/// Hamming weight of each column.
pub fn column_weights(generator: &BitMatrix) -> Vec<usize> {
    let mut w = vec![0usize; generator.cols()];
    for r in 0..generator.rows() {
        for c in generator.row(r).iter_ones() {
            w[c] += 1;
        }
    }
    w
}

/// Largest K for which the exhaustive minimum-distance search is allowed.
pub const MAX_EXHAUSTIVE_ROWS: usize = 24;

/// Minimum Hamming weight over the nonzero codewords of the row space.
///
/// Walks all `2^K - 1` nonzero messages in Gray-code order so every step is
/// a single row XOR. A rank-deficient generator yields a zero codeword from
/// a nonzero message; such codewords are skipped, matching the minimum over
/// nonzero codewords.
pub fn min_distance(generator: &BitMatrix) -> Result<usize> {
    let k = generator.rows();
    if k > MAX_EXHAUSTIVE_ROWS {
        return Err(NfvError::SearchLimitExceeded {
            what: "K",
            value: k,
            limit: MAX_EXHAUSTIVE_ROWS,
        });
    }
    let mut word = BitVec::zeros(generator.cols());
    let mut best = usize::MAX;
    for step in 1u64..(1u64 << k) {
        let flip = step.trailing_zeros() as usize;
        word.xor_assign(generator.row(flip));
        let w = word.weight();
        if w > 0 && w < best {
            best = w;
        }
    }
    if best == usize::MAX {
        return Err(NfvError::InvalidCode("generator spans only the zero word".into()));
    }
    Ok(best)
}

/// The NFV code constructions available by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    /// One server decodes the whole frame (N = K = 1).
    Single,
    /// 1 x N all-ones generator.
    Repetition,
    /// N x N identity.
    Parallel,
    /// Two halves, each replicated on N/2 servers.
    SplitRepetition,
    /// Identity(K) plus an all-ones parity column; N = K + 1.
    Spc,
    /// The (8,4) reference code with a dependency graph of chromatic number 3.
    Nfv84,
}

impl CodeKind {
    pub const ALL: [CodeKind; 6] = [
        CodeKind::Single,
        CodeKind::Repetition,
        CodeKind::Parallel,
        CodeKind::SplitRepetition,
        CodeKind::Spc,
        CodeKind::Nfv84,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Single => "single",
            CodeKind::Repetition => "repetition",
            CodeKind::Parallel => "parallel",
            CodeKind::SplitRepetition => "split_repetition",
            CodeKind::Spc => "spc",
            CodeKind::Nfv84 => "nfv84",
        }
    }

    /// Canonical generator for `N` servers. `Single` ignores `N`, `Nfv84`
    /// requires `N = 8`.
    pub fn generator(self, servers: usize) -> Result<BitMatrix> {
        let bad = |why: &str| NfvError::InvalidCode(format!("{}: {why}", self.name()));
        match self {
            CodeKind::Single => BitMatrix::identity(1),
            CodeKind::Repetition => {
                if servers == 0 {
                    return Err(bad("N must be positive"));
                }
                BitMatrix::ones(1, servers)
            }
            CodeKind::Parallel => {
                if servers == 0 {
                    return Err(bad("N must be positive"));
                }
                BitMatrix::identity(servers)
            }
            CodeKind::SplitRepetition => {
                if servers < 2 || servers % 2 != 0 {
                    return Err(bad("N must be even and at least 2"));
                }
                let mut g = BitMatrix::zeros(2, servers)?;
                for c in 0..servers {
                    g.set(usize::from(c >= servers / 2), c, true);
                }
                Ok(g)
            }
            CodeKind::Spc => {
                if servers < 2 {
                    return Err(bad("N must be at least 2"));
                }
                let k = servers - 1;
                let mut g = BitMatrix::zeros(k, servers)?;
                for r in 0..k {
                    g.set(r, r, true);
                    g.set(r, k, true);
                }
                Ok(g)
            }
            CodeKind::Nfv84 => {
                if servers != 8 {
                    return Err(bad("defined only for N = 8"));
                }
                BitMatrix::from_strs(&NFV84_ROWS)
            }
        }
    }
}

impl FromStr for CodeKind {
    type Err = NfvError;

    fn from_str(s: &str) -> Result<Self> {
        CodeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| NfvError::InvalidCode(format!("unknown code kind {s:?}")))
    }
}

/// Rows of the (8,4) reference generator.
pub const NFV84_ROWS: [&str; 4] = ["10000110", "00011001", "01000011", "10101000"];

/// A validated K x N NFV generator with its derived metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfvCode {
    name: String,
    generator: BitMatrix,
    column_weights: Vec<usize>,
    d_min: usize,
}

impl NfvCode {
    /// Validates the generator and computes column weights and `d_min`.
    pub fn new(name: impl Into<String>, generator: BitMatrix) -> Result<Self> {
        let column_weights = column_weights(&generator);
        if let Some(c) = column_weights.iter().position(|&w| w == 0) {
            return Err(NfvError::InvalidCode(format!(
                "column {} is all-zero; that server would receive pure noise",
                c + 1
            )));
        }
        let d_min = min_distance(&generator)?;
        Ok(Self {
            name: name.into(),
            generator,
            column_weights,
            d_min,
        })
    }

    pub fn from_kind(kind: CodeKind, servers: usize) -> Result<Self> {
        Self::new(kind.name(), kind.generator(servers)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// Number of servers N.
    pub fn servers(&self) -> usize {
        self.generator.cols()
    }

    /// Number of packets K.
    pub fn packets(&self) -> usize {
        self.generator.rows()
    }

    pub fn column_weights(&self) -> &[usize] {
        &self.column_weights
    }

    pub fn d_min(&self) -> usize {
        self.d_min
    }

    pub fn d_max(&self) -> usize {
        self.column_weights.iter().copied().max().unwrap_or(0)
    }

    /// Number of servers that must succeed: `N - d_min + 1`.
    pub fn threshold(&self) -> usize {
        self.servers() - self.d_min + 1
    }
}

/// Builds a code by kind with explicit `(N, K)` checking.
pub fn make_code(kind: CodeKind, servers: usize, packets: usize) -> Result<NfvCode> {
    let expected_k = match kind {
        CodeKind::Single => {
            if servers != 1 {
                return Err(NfvError::InvalidCode("single requires N = K = 1".into()));
            }
            1
        }
        CodeKind::Repetition => 1,
        CodeKind::Parallel => servers,
        CodeKind::SplitRepetition => 2,
        CodeKind::Spc => servers.saturating_sub(1),
        CodeKind::Nfv84 => 4,
    };
    if packets != expected_k {
        return Err(NfvError::InvalidCode(format!(
            "{} with N = {servers} requires K = {expected_k}, got {packets}",
            kind.name()
        )));
    }
    NfvCode::from_kind(kind, servers)
}
