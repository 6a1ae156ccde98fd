//! Stencils of translation-invariant operators on the `N/X/Y/C` subgrids.
//!
//! Offsets are stored in half mesh widths so that the half-integer offsets
//! between different subgrids stay exact integers.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mesh::{BoundaryMode, DofKind, DofMap};

/// Offset from target to source in half mesh widths.
pub type Offset2 = (i64, i64);

/// Per-block maps from offset to coefficient.
///
/// Rows are indexed by target component, columns by source component, in
/// the `N, X, Y, C` block ordering of [`DofMap::component`].
#[derive(Debug, Clone, PartialEq)]
pub struct StencilSet {
    rows: [usize; 4],
    cols: [usize; 4],
    blocks: Vec<BTreeMap<Offset2, f64>>,
}

impl StencilSet {
    pub fn new(rows: [usize; 4], cols: [usize; 4]) -> Self {
        let n = rows.iter().sum::<usize>() * cols.iter().sum::<usize>();
        Self {
            rows,
            cols,
            blocks: vec![BTreeMap::new(); n],
        }
    }

    /// Delta stencils: `1` at offset zero on every diagonal block.
    pub fn identity(counts: [usize; 4]) -> Self {
        let mut s = Self::new(counts, counts);
        for a in 0..s.nrows() {
            s.insert(a, a, (0, 0), 1.0);
        }
        s
    }

    pub fn row_counts(&self) -> [usize; 4] {
        self.rows
    }

    pub fn col_counts(&self) -> [usize; 4] {
        self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.iter().sum()
    }

    pub fn ncols(&self) -> usize {
        self.cols.iter().sum()
    }

    pub fn block(&self, a: usize, b: usize) -> &BTreeMap<Offset2, f64> {
        &self.blocks[a * self.ncols() + b]
    }

    pub fn insert(&mut self, a: usize, b: usize, offset: Offset2, value: f64) {
        let nc = self.ncols();
        self.blocks[a * nc + b].insert(offset, value);
    }

    /// Iterate over `(target, source, offset, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Offset2, f64)> + '_ {
        let nc = self.ncols();
        self.blocks
            .iter()
            .enumerate()
            .flat_map(move |(ab, m)| m.iter().map(move |(&d, &v)| (ab / nc, ab % nc, d, v)))
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(|m| m.len()).sum()
    }

    /// Largest offset component, in half mesh widths.
    pub fn radius2(&self) -> i64 {
        self.iter()
            .map(|(_, _, d, _)| d.0.abs().max(d.1.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Largest difference between two stencil sets, counting missing entries as zero.
    pub fn max_diff(&self, other: &StencilSet) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for (x, y) in self.blocks.iter().zip(&other.blocks) {
            for (d, v) in x {
                m = m.max((v - y.get(d).copied().unwrap_or(0.0)).abs());
            }
            for (d, v) in y {
                if !x.contains_key(d) {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }

    /// Split into the part whose source precedes or equals the target under
    /// `precedes(target, source, offset)` and the rest.
    pub fn split(
        &self,
        mut precedes: impl FnMut(usize, usize, Offset2) -> bool,
    ) -> (StencilSet, StencilSet) {
        let mut lo = StencilSet::new(self.rows, self.cols);
        let mut hi = StencilSet::new(self.rows, self.cols);
        for (a, b, d, v) in self.iter() {
            if precedes(a, b, d) {
                lo.insert(a, b, d, v);
            } else {
                hi.insert(a, b, d, v);
            }
        }
        (lo, hi)
    }

    /// Symbol `sum_k s_k exp(i theta . k)` with `k` in mesh widths.
    pub fn symbol(&self, theta: [f64; 2]) -> CMatrix {
        let nc = self.ncols();
        let mut out = CMatrix::zeros(self.nrows(), nc);
        for (ab, m) in self.blocks.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (&(d1, d2), &v) in m {
                s += Complex64::from_polar(v, 0.5 * (theta[0] * d1 as f64 + theta[1] * d2 as f64));
            }
            out[(ab / nc, ab % nc)] = s;
        }
        out
    }

    /// Apply the stencils on a periodic mesh, inverse of [`extract_stencils`].
    pub fn apply_periodic(&self, dofs: &DofMap, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; dofs.len()];
        for (i, e) in dofs.entries().iter().enumerate() {
            let a = dofs.component(e.kind, e.slot);
            let (p1, p2) = dofs.position2(i);
            let mut s = 0.0;
            for b in 0..self.ncols() {
                let (kind, slot) = dofs.component_kind(b);
                let (o1, o2) = kind.half_offset();
                for (&(d1, d2), &val) in self.block(a, b) {
                    let (q1, q2) = (p1 + d1 - o1, p2 + d2 - o2);
                    debug_assert!(q1 % 2 == 0 && q2 % 2 == 0);
                    if let Some(j) = dofs.dof(kind, slot, q1 / 2, q2 / 2) {
                        s += val * v[j];
                    }
                }
            }
            out[i] = s;
        }
        out
    }

    /// Text dump, one line `<target> <source> <2*k1> <2*k2> <value>` per coefficient.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (a, b, (d1, d2), v) in self.iter() {
            writeln!(
                w,
                "{} {} {} {} {}",
                component_label(self.rows, a),
                component_label(self.cols, b),
                d1,
                d2,
                v
            )?;
        }
        Ok(())
    }

    /// Parse a dump; values may be decimals or rationals `p/q`.
    pub fn read_dump<R: BufRead>(rows: [usize; 4], cols: [usize; 4], r: R) -> Result<Self> {
        let mut s = Self::new(rows, cols);
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad =
                || Error::InvalidArgument(format!("malformed stencil line {}: {line}", lineno + 1));
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let a = parse_label(rows, f[0]).ok_or_else(bad)?;
            let b = parse_label(cols, f[1]).ok_or_else(bad)?;
            let d1: i64 = f[2].parse().map_err(|_| bad())?;
            let d2: i64 = f[3].parse().map_err(|_| bad())?;
            let v = parse_value(f[4]).ok_or_else(bad)?;
            s.insert(a, b, (d1, d2), v);
        }
        Ok(s)
    }
}

/// `X1`, `Y2`, ... with one-based slots.
pub fn component_label(counts: [usize; 4], c: usize) -> String {
    let mut rest = c;
    for kind in DofKind::ALL {
        if rest < counts[kind.rank()] {
            return format!("{}{}", kind.label(), rest + 1);
        }
        rest -= counts[kind.rank()];
    }
    format!("?{c}")
}

fn parse_label(counts: [usize; 4], s: &str) -> Option<usize> {
    let mut chars = s.chars();
    let kind = match chars.next()? {
        'N' => DofKind::N,
        'X' => DofKind::X,
        'Y' => DofKind::Y,
        'C' => DofKind::C,
        _ => return None,
    };
    let slot: usize = chars.as_str().parse().ok()?;
    if slot == 0 || slot > counts[kind.rank()] {
        return None;
    }
    Some(counts[..kind.rank()].iter().sum::<usize>() + slot - 1)
}

fn parse_value(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => Some(p.parse::<f64>().ok()? / q.parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

/// Wrap a doubled-coordinate difference into `(-n, n]` on a periodic mesh of `n` cells.
fn wrap2(d: i64, n: i64) -> i64 {
    let m = 2 * n;
    let r = d.rem_euclid(m);
    if r > n {
        r - m
    } else {
        r
    }
}

fn require_periodic(dofs: &DofMap) -> Result<()> {
    if dofs.level().boundary != BoundaryMode::Periodic {
        return Err(Error::InvalidArgument(
            "stencil extraction needs a periodic mesh".into(),
        ));
    }
    Ok(())
}

/// Column of a translation-invariant operator read back as stencils.
///
/// `apply` maps a vector on `cols` to a vector on `rows`. Sources are
/// probed at cell `(0, 0)` and again at `probe` and the two readings must
/// agree. `scale` converts a source position in `cols` doubled units into
/// `rows` doubled units (1 for square operators, 2 for prolongation).
fn extract_columns(
    rows: &DofMap,
    cols: &DofMap,
    scale: i64,
    probe: (i64, i64),
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut sink: impl FnMut(usize, usize, Offset2, f64, bool),
) -> Result<()> {
    let n = rows.level().n as i64;
    let mut e = vec![0.0; cols.len()];
    for b in 0..cols.r() {
        let (kind, slot) = cols.component_kind(b);
        for (pass, &(c1, c2)) in [(0, 0), probe].iter().enumerate() {
            let src = cols.dof(kind, slot, c1, c2).expect("periodic lookup");
            e[src] = 1.0;
            let y = apply(&e);
            e[src] = 0.0;
            let (s1, s2) = cols.position2(src);
            let tiny = 1e-14 * y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for (i, &v) in y.iter().enumerate() {
                if v.abs() <= tiny {
                    continue;
                }
                let (t1, t2) = rows.position2(i);
                let d = (wrap2(scale * s1 - t1, n), wrap2(scale * s2 - t2, n));
                sink(i, b, d, v, pass == 1);
            }
        }
    }
    Ok(())
}

fn check_invariance(first: &StencilSet, second: &StencilSet, what: &str) -> Result<()> {
    let scale = first
        .iter()
        .fold(0.0_f64, |m, (_, _, _, v)| m.max(v.abs()))
        .max(1e-300);
    let diff = first.max_diff(second);
    if diff > 1e-12 * scale.max(1.0) {
        return Err(Error::NotTranslationInvariant(format!(
            "{what}: two probes differ by {diff:e}"
        )));
    }
    Ok(())
}

/// Stencils of a square operator on a periodic mesh.
///
/// The mesh must be large enough for offsets not to alias, `n >= 8` for
/// every operator in this crate.
pub fn extract_stencils(
    dofs: &DofMap,
    apply: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<StencilSet> {
    require_periodic(dofs)?;
    let counts = dofs.counts();
    let mut sets = [
        StencilSet::new(counts, counts),
        StencilSet::new(counts, counts),
    ];
    let n = dofs.level().n as i64;
    let probe = (n / 2 - 1, n / 2 + 1);
    extract_columns(dofs, dofs, 1, probe, apply, |i, b, d, v, second| {
        sets[second as usize].insert(dofs.component_of(i), b, d, v);
    })?;
    check_invariance(&sets[0], &sets[1], "operator")?;
    let [s, _] = sets;
    Ok(s)
}

/// Prolongation stencils, one set per parity of the fine cell inside its
/// coarse cell (index `p1 + 2 p2`). Offsets are in fine half mesh widths.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongationStencils {
    pub parity: [StencilSet; 4],
}

impl ProlongationStencils {
    pub fn fine_counts(&self) -> [usize; 4] {
        self.parity[0].row_counts()
    }

    pub fn coarse_counts(&self) -> [usize; 4] {
        self.parity[0].col_counts()
    }
}

/// Stencils of a prolongation from `coarse` to `fine`, both periodic, fine
/// being the uniform refinement of coarse.
pub fn extract_prolongation(
    fine: &DofMap,
    coarse: &DofMap,
    apply: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<ProlongationStencils> {
    require_periodic(fine)?;
    require_periodic(coarse)?;
    if fine.level().n != 2 * coarse.level().n {
        return Err(Error::InvalidArgument(
            "fine mesh is not the refinement of the coarse mesh".into(),
        ));
    }
    let (fc, cc) = (fine.counts(), coarse.counts());
    let blank = || StencilSet::new(fc, cc);
    let mut sets = [
        [blank(), blank(), blank(), blank()],
        [blank(), blank(), blank(), blank()],
    ];
    let nc = coarse.level().n as i64;
    let probe = (nc / 2 - 1, nc / 2 + 1);
    extract_columns(fine, coarse, 2, probe, apply, |i, b, d, v, second| {
        let e = fine.entry(i);
        let p = e.cell.0 % 2 + 2 * (e.cell.1 % 2);
        sets[second as usize][p].insert(fine.component_of(i), b, d, v);
    })?;
    for p in 0..4 {
        check_invariance(&sets[0][p], &sets[1][p], "prolongation")?;
    }
    let [first, _] = sets;
    Ok(ProlongationStencils { parity: first })
}
