//! Uniform Cartesian meshes of the unit square and the classification of
//! their degrees of freedom into node (N), horizontal-edge (X),
//! vertical-edge (Y) and cell (C) subgrids.
//!
//! Lattice coordinates are integers. A vertex `(k1, k2)` sits at
//! `(k1, k2) h`; the horizontal edge `(k1, k2)` joins vertices `(k1, k2)` and
//! `(k1 + 1, k2)`; the vertical edge `(k1, k2)` joins `(k1, k2)` and
//! `(k1, k2 + 1)`; cell `(k1, k2)` has lower-left vertex `(k1, k2)`. The
//! half offsets of the X, Y and C subgrids are implied by the kind tag.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// Homogeneous Dirichlet data; boundary unknowns are eliminated.
    Dirichlet,
    /// Fully periodic square, used for stencil extraction.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshLevel {
    pub n: usize,
    pub h: f64,
    pub boundary: BoundaryMode,
}

impl MeshLevel {
    pub fn new(n: usize, boundary: BoundaryMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one cell per side".into(),
            ));
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
            boundary,
        })
    }

    pub fn coarsen(&self) -> Result<Self> {
        if !self.n.is_multiple_of(2) || self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "cannot coarsen a mesh with n = {}",
                self.n
            )));
        }
        Self::new(self.n / 2, self.boundary)
    }

    pub fn refine(&self) -> Self {
        Self {
            n: 2 * self.n,
            h: self.h / 2.0,
            boundary: self.boundary,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }
}

/// Levels ordered fine to coarse; level `m` has `n_finest / 2^m` cells per side.
pub fn build_hierarchy(
    n_finest: usize,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<Vec<MeshLevel>> {
    if levels == 0 {
        return Err(Error::InvalidArgument(
            "hierarchy needs at least one level".into(),
        ));
    }
    let factor = 1usize << (levels - 1);
    if !n_finest.is_multiple_of(factor) {
        return Err(Error::InvalidArgument(format!(
            "n = {n_finest} is not divisible by 2^(levels - 1) = {factor}"
        )));
    }
    let coarsest = n_finest / factor;
    if levels > 1 && coarsest < 2 {
        return Err(Error::InvalidArgument(format!(
            "coarsest level would have {coarsest} cell(s) per side; at least 2 are required"
        )));
    }
    (0..levels)
        .map(|m| MeshLevel::new(n_finest >> m, boundary))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Cg,
    Edg,
    Hdg,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cg, Method::Edg, Method::Hdg];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Cg => "cg",
            Method::Edg => "edg",
            Method::Hdg => "hdg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cg" => Ok(Method::Cg),
            "edg" => Ok(Method::Edg),
            "hdg" => Ok(Method::Hdg),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// Subgrid a degree of freedom lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DofKind {
    N,
    X,
    Y,
    C,
}

impl DofKind {
    pub const ALL: [DofKind; 4] = [DofKind::N, DofKind::X, DofKind::Y, DofKind::C];

    pub fn rank(self) -> usize {
        self as usize
    }

    /// Offset from the owning lattice point in half mesh widths.
    pub fn half_offset(self) -> (i64, i64) {
        match self {
            DofKind::N => (0, 0),
            DofKind::X => (1, 0),
            DofKind::Y => (0, 1),
            DofKind::C => (1, 1),
        }
    }

    pub fn label(self) -> char {
        match self {
            DofKind::N => 'N',
            DofKind::X => 'X',
            DofKind::Y => 'Y',
            DofKind::C => 'C',
        }
    }
}

/// How several unknowns at the same location are interleaved in the
/// global numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SlotOrder {
    /// Row by row in physical node position within each group.
    #[default]
    Geometric,
    /// All slots of one location are consecutive.
    Interleaved,
    /// Slot-major: every slot-1 unknown of a group precedes every slot-2 unknown.
    Blocked,
}

pub type OrderKey = (usize, i64, i64, i64, i64);

/// Node index of a slot along its edge, in units of `h / k`.
fn edge_node(method: Method, slot: usize) -> i64 {
    match method {
        Method::Hdg => slot as i64,
        Method::Edg | Method::Cg => slot as i64 + 1,
    }
}

fn order_key(
    method: Method,
    k: usize,
    order: SlotOrder,
    kind: DofKind,
    slot: usize,
    k1: i64,
    k2: i64,
) -> OrderKey {
    let rank = kind.rank();
    match order {
        SlotOrder::Interleaved => (rank, k2, k1, slot as i64, 0),
        SlotOrder::Blocked => (rank, slot as i64, k2, k1, 0),
        SlotOrder::Geometric => {
            let kk = k as i64;
            let (dx, dy) = match kind {
                DofKind::N => (0, 0),
                DofKind::X => (edge_node(method, slot), 0),
                DofKind::Y => (0, edge_node(method, slot)),
                DofKind::C => {
                    let m = (k - 1).max(1);
                    ((slot % m) as i64 + 1, (slot / m) as i64 + 1)
                }
            };
            (rank, k2 * kk + dy, k1 * kk + dx, k2, k1)
        }
    }
}

/// Orientation of a mesh edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofEntry {
    pub kind: DofKind,
    /// Zero-based slot among the `r_kind` unknowns of this location.
    pub slot: usize,
    /// Lattice coordinates of the owning vertex, edge or cell.
    pub cell: (usize, usize),
}

/// Enumeration and classification of the global unknowns of a method on a level.
#[derive(Debug, Clone)]
pub struct DofMap {
    method: Method,
    degree: usize,
    level: MeshLevel,
    order: SlotOrder,
    counts: [usize; 4],
    entries: Vec<DofEntry>,
    lookup: [Vec<usize>; 4],
}

const ABSENT: usize = usize::MAX;

/// Unknowns per location `[r_N, r_X, r_Y, r_C]`.
pub fn slot_counts(method: Method, k: usize) -> [usize; 4] {
    match method {
        Method::Hdg => [0, k + 1, k + 1, 0],
        Method::Edg => [1, k - 1, k - 1, 0],
        Method::Cg => [1, k - 1, k - 1, (k - 1) * (k - 1)],
    }
}

fn exists(kind: DofKind, k1: usize, k2: usize, level: &MeshLevel) -> bool {
    let n = level.n;
    match level.boundary {
        BoundaryMode::Periodic => k1 < n && k2 < n,
        BoundaryMode::Dirichlet => match kind {
            DofKind::N => (1..n).contains(&k1) && (1..n).contains(&k2),
            DofKind::X => k1 < n && (1..n).contains(&k2),
            DofKind::Y => (1..n).contains(&k1) && k2 < n,
            DofKind::C => k1 < n && k2 < n,
        },
    }
}

pub fn build_dof_map(level: MeshLevel, method: Method, k: usize) -> Result<DofMap> {
    DofMap::new(level, method, k, SlotOrder::default())
}

impl DofMap {
    pub fn new(level: MeshLevel, method: Method, k: usize, order: SlotOrder) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument(format!(
                "polynomial degree must be >= 1, got {k}"
            )));
        }
        let counts = slot_counts(method, k);
        let n = level.n;
        let w = n + 1;
        let mut entries = Vec::new();
        for kind in DofKind::ALL {
            for k2 in 0..w {
                for k1 in 0..w {
                    if exists(kind, k1, k2, &level) {
                        for slot in 0..counts[kind.rank()] {
                            entries.push(DofEntry {
                                kind,
                                slot,
                                cell: (k1, k2),
                            });
                        }
                    }
                }
            }
        }
        let key = |e: &DofEntry| {
            order_key(
                method,
                k,
                order,
                e.kind,
                e.slot,
                e.cell.0 as i64,
                e.cell.1 as i64,
            )
        };
        entries.sort_by_key(key);
        let mut lookup: [Vec<usize>; 4] = Default::default();
        for kind in DofKind::ALL {
            lookup[kind.rank()] = vec![ABSENT; w * w * counts[kind.rank()]];
        }
        for (i, e) in entries.iter().enumerate() {
            let r = counts[e.kind.rank()];
            lookup[e.kind.rank()][(e.cell.1 * w + e.cell.0) * r + e.slot] = i;
        }
        Ok(Self {
            method,
            degree: k,
            level,
            order,
            counts,
            entries,
            lookup,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn level(&self) -> &MeshLevel {
        &self.level
    }

    pub fn slot_order(&self) -> SlotOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[DofEntry] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> DofEntry {
        self.entries[index]
    }

    /// `[r_N, r_X, r_Y, r_C]`.
    pub fn counts(&self) -> [usize; 4] {
        self.counts
    }

    pub fn count(&self, kind: DofKind) -> usize {
        self.counts[kind.rank()]
    }

    /// Unknowns per cell, `r = r_N + r_X + r_Y + r_C`.
    pub fn r(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Index of the unknown `(kind, slot)` at lattice position `(k1, k2)`.
    /// Periodic meshes wrap; Dirichlet meshes return `None` for boundary or
    /// out-of-range positions.
    pub fn dof(&self, kind: DofKind, slot: usize, k1: i64, k2: i64) -> Option<usize> {
        let r = self.counts[kind.rank()];
        if slot >= r {
            return None;
        }
        let n = self.level.n as i64;
        let (a, b) = match self.level.boundary {
            BoundaryMode::Periodic => (k1.rem_euclid(n), k2.rem_euclid(n)),
            BoundaryMode::Dirichlet => {
                if k1 < 0 || k2 < 0 || k1 > n || k2 > n {
                    return None;
                }
                (k1, k2)
            }
        };
        let w = self.level.n + 1;
        let idx = self.lookup[kind.rank()][(b as usize * w + a as usize) * r + slot];
        (idx != ABSENT).then_some(idx)
    }

    /// Component index of `(kind, slot)` in the `N, X, Y, C` block ordering
    /// used for symbols (`0..r`).
    pub fn component(&self, kind: DofKind, slot: usize) -> usize {
        self.counts[..kind.rank()].iter().sum::<usize>() + slot
    }

    /// Inverse of [`DofMap::component`].
    pub fn component_kind(&self, c: usize) -> (DofKind, usize) {
        let mut rest = c;
        for kind in DofKind::ALL {
            let r = self.counts[kind.rank()];
            if rest < r {
                return (kind, rest);
            }
            rest -= r;
        }
        panic!("component {c} out of range");
    }

    pub fn component_of(&self, index: usize) -> usize {
        let e = self.entries[index];
        self.component(e.kind, e.slot)
    }

    /// Position in half mesh widths.
    pub fn position2(&self, index: usize) -> (i64, i64) {
        let e = self.entries[index];
        let (o1, o2) = e.kind.half_offset();
        (2 * e.cell.0 as i64 + o1, 2 * e.cell.1 as i64 + o2)
    }

    /// Sort key reproducing the global numbering for unwrapped lattice
    /// coordinates; used where an ordering must stay translation invariant.
    pub fn order_key(&self, kind: DofKind, slot: usize, k1: i64, k2: i64) -> OrderKey {
        order_key(self.method, self.degree, self.order, kind, slot, k1, k2)
    }

    /// Unknown at node `i` (`0..=k`, increasing coordinate) of the edge
    /// `(e1, e2)` with the given orientation.
    pub fn face_node(&self, orient: Orientation, e1: i64, e2: i64, i: usize) -> Option<usize> {
        let k = self.degree;
        let kind = match orient {
            Orientation::Horizontal => DofKind::X,
            Orientation::Vertical => DofKind::Y,
        };
        match self.method {
            Method::Hdg => self.dof(kind, i, e1, e2),
            Method::Edg | Method::Cg => {
                if i == 0 {
                    self.dof(DofKind::N, 0, e1, e2)
                } else if i == k {
                    match orient {
                        Orientation::Horizontal => self.dof(DofKind::N, 0, e1 + 1, e2),
                        Orientation::Vertical => self.dof(DofKind::N, 0, e1, e2 + 1),
                    }
                } else {
                    self.dof(kind, i - 1, e1, e2)
                }
            }
        }
    }

    /// Edges of cell `(c1, c2)` in local order bottom, top, left, right.
    pub fn cell_faces(c1: i64, c2: i64) -> [(Orientation, i64, i64); 4] {
        [
            (Orientation::Horizontal, c1, c2),
            (Orientation::Horizontal, c1, c2 + 1),
            (Orientation::Vertical, c1, c2),
            (Orientation::Vertical, c1 + 1, c2),
        ]
    }

    /// Local-to-global map of one cell.
    ///
    /// HDG and EDG: `4 (k + 1)` facet nodes, face by face (bottom, top, left,
    /// right), each face in increasing coordinate; EDG repeats shared vertex
    /// unknowns. CG: the `(k + 1)^2` tensor nodes, index `j (k + 1) + i`.
    pub fn element_dofs(&self, c1: usize, c2: usize) -> Vec<Option<usize>> {
        let k = self.degree;
        let (c1, c2) = (c1 as i64, c2 as i64);
        match self.method {
            Method::Hdg | Method::Edg => Self::cell_faces(c1, c2)
                .iter()
                .flat_map(|&(o, e1, e2)| (0..=k).map(move |i| (o, e1, e2, i)))
                .map(|(o, e1, e2, i)| self.face_node(o, e1, e2, i))
                .collect(),
            Method::Cg => {
                let mut out = Vec::with_capacity((k + 1) * (k + 1));
                for j in 0..=k {
                    for i in 0..=k {
                        let d = if j == 0 {
                            self.face_node(Orientation::Horizontal, c1, c2, i)
                        } else if j == k {
                            self.face_node(Orientation::Horizontal, c1, c2 + 1, i)
                        } else if i == 0 {
                            self.face_node(Orientation::Vertical, c1, c2, j)
                        } else if i == k {
                            self.face_node(Orientation::Vertical, c1 + 1, c2, j)
                        } else {
                            self.dof(DofKind::C, (j - 1) * (k - 1) + (i - 1), c1, c2)
                        };
                        out.push(d);
                    }
                }
                out
            }
        }
    }

    /// Closed-form number of unknowns.
    pub fn expected_len(level: &MeshLevel, method: Method, k: usize) -> usize {
        let c = slot_counts(method, k);
        let n = level.n;
        let (nodes, xedges, yedges, cells) = match level.boundary {
            BoundaryMode::Periodic => (n * n, n * n, n * n, n * n),
            BoundaryMode::Dirichlet => ((n - 1) * (n - 1), n * (n - 1), n * (n - 1), n * n),
        };
        c[0] * nodes + c[1] * xedges + c[2] * yedges + c[3] * cells
    }
}
