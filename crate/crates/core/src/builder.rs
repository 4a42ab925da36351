//! Point-by-point construction of a pointwise-finite rectangular
//! representation `f(x, y) = Σ_n g(x, n)·h(y, n)`.
//!
//! Points are well-ordered by insertion. When point `x` arrives after
//! `w_0, …, w_{p-1}`:
//!
//! * its g-row is the θ-run with target `f(x, w_m)`, avoiding the earlier
//!   g-rows and matching the earlier h-rows;
//! * its h-row is the θ-run with target `f(w'_m, x)` over `w' = w ⌢ x`,
//!   avoiding the earlier h-rows and matching the earlier g-rows together with
//!   the fresh one.
//!
//! Every pair is therefore covered by exactly one run, and that run's
//! milestone gives the certified cutoff past which all products vanish.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::adfamily::ad_elements_upto;
use crate::exactnum::Rational;
use crate::funcio::{FuncError, Point};
use crate::theta::{Row, ThetaError, ThetaInputs};

/// One argument of a pair function: the point and its position in the order.
#[derive(Clone, Copy, Debug)]
pub struct Arg<'a> {
    pub position: usize,
    pub point: &'a Point,
}

/// Exact two-variable function on the current point set.
pub trait PairFunction: Send + Sync {
    fn descriptor(&self) -> String;
    fn eval(&self, x: Arg<'_>, y: Arg<'_>) -> Result<Rational, FuncError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuilderError {
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("position {position} out of range ({len} points)")]
    OutOfRange { position: usize, len: usize },
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Function(#[from] FuncError),
    #[error("pair ({i}, {j}): {detail}")]
    PairMismatch {
        i: usize,
        j: usize,
        n: Option<usize>,
        detail: String,
    },
    #[error("almost disjointness violated between {first} and {second} at index {index}: {detail}")]
    SViolation {
        first: String,
        second: String,
        index: usize,
        detail: String,
    },
    #[error("row {row} has {found} milestones up to {horizon}, {required} required")]
    TooFewMilestones {
        row: String,
        found: usize,
        required: usize,
        horizon: usize,
    },
    #[error("inconsistent representation: {0}")]
    Inconsistent(String),
}

/// Insertion-ordered point labels.
///
/// The predecessors of a point are the points before it, its rank is its
/// position, and its successor is the next inserted point.
#[derive(Clone, Debug, Default)]
pub struct PointOrder {
    points: Vec<Point>,
    index: HashMap<String, usize>,
}

impl PointOrder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, point: Point) -> Result<usize, BuilderError> {
        if self.index.contains_key(&point.label) {
            return Err(BuilderError::DuplicateLabel(point.label));
        }
        let pos = self.points.len();
        self.index.insert(point.label.clone(), pos);
        self.points.push(point);
        Ok(pos)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, pos: usize) -> Option<&Point> {
        self.points.get(pos)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn predecessors(&self, pos: usize) -> &[Point] {
        &self.points[..pos.min(self.points.len())]
    }

    pub fn successor(&self, pos: usize) -> Option<&Point> {
        self.points.get(pos + 1)
    }
}

/// Certified identity for one pair of points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairCertificate {
    pub i: usize,
    pub j: usize,
    pub cutoff: usize,
    pub sum: Rational,
    pub stress_horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub points: usize,
    pub stress_horizon: usize,
    pub pairs: Vec<PairCertificate>,
}

/// Overlap found below a constructive bound, for the report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub later: String,
    pub earlier: String,
    pub bound: usize,
    pub shared: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SReport {
    pub rows: usize,
    pub horizon: usize,
    pub min_milestones: usize,
    pub overlaps: Vec<Overlap>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowKind {
    G,
    H,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowKind::G => "g",
            RowKind::H => "h",
        })
    }
}

fn row_name(kind: RowKind, pos: usize) -> String {
    format!("{kind}[{pos}]")
}

/// Points with their g- and h-rows and the function they represent.
#[derive(Clone)]
pub struct Representation {
    order: PointOrder,
    g_rows: Vec<Row>,
    h_rows: Vec<Row>,
    f: Arc<dyn PairFunction>,
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Representation")
            .field("function", &self.f.descriptor())
            .field("points", &self.order.points)
            .field("g_rows", &self.g_rows)
            .field("h_rows", &self.h_rows)
            .finish()
    }
}

impl Representation {
    pub fn new(f: Arc<dyn PairFunction>) -> Self {
        Representation {
            order: PointOrder::new(),
            g_rows: Vec::new(),
            h_rows: Vec::new(),
            f,
        }
    }

    /// Assembles a representation from stored rows; nothing is verified here.
    pub fn from_parts(order: PointOrder, g_rows: Vec<Row>, h_rows: Vec<Row>, f: Arc<dyn PairFunction>) -> Result<Self, BuilderError> {
        if g_rows.len() != order.len() || h_rows.len() != order.len() {
            return Err(BuilderError::Inconsistent(format!(
                "{} points but {} g-rows and {} h-rows",
                order.len(),
                g_rows.len(),
                h_rows.len()
            )));
        }
        Ok(Representation { order, g_rows, h_rows, f })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &PointOrder {
        &self.order
    }

    pub fn function(&self) -> &Arc<dyn PairFunction> {
        &self.f
    }

    pub fn g_row(&self, i: usize) -> Result<&Row, BuilderError> {
        self.check_pos(i)?;
        Ok(&self.g_rows[i])
    }

    pub fn h_row(&self, i: usize) -> Result<&Row, BuilderError> {
        self.check_pos(i)?;
        Ok(&self.h_rows[i])
    }

    /// Rows in construction order: `g[0], h[0], g[1], h[1], …`.
    pub fn rows(&self) -> impl Iterator<Item = (RowKind, usize, &Row)> {
        self.g_rows
            .iter()
            .zip(&self.h_rows)
            .enumerate()
            .flat_map(|(p, (g, h))| [(RowKind::G, p, g), (RowKind::H, p, h)])
    }

    fn check_pos(&self, position: usize) -> Result<(), BuilderError> {
        if position >= self.len() {
            return Err(BuilderError::OutOfRange {
                position,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// `f` at a pair of positions.
    pub fn f(&self, i: usize, j: usize) -> Result<Rational, BuilderError> {
        self.check_pos(i)?;
        self.check_pos(j)?;
        let arg = |position| Arg {
            position,
            point: &self.order.points[position],
        };
        Ok(self.f.eval(arg(i), arg(j))?)
    }

    /// Appends a point, computing its g-row and then its h-row.
    pub fn add_point(&mut self, point: Point) -> Result<usize, BuilderError> {
        if self.order.position(&point.label).is_some() {
            return Err(BuilderError::DuplicateLabel(point.label));
        }
        let pos = self.len();
        let mut order = self.order.clone();
        order.insert(point)?;
        let arg = |position| Arg {
            position,
            point: &order.points()[position],
        };

        let f0 = (0..pos).map(|m| self.f.eval(arg(pos), arg(m))).collect::<Result<Vec<_>, _>>()?;
        let g_row = Row::theta(ThetaInputs::new(f0, self.g_rows.clone(), self.h_rows.clone())?).with_provenance(row_name(RowKind::G, pos));

        let mut g1 = self.g_rows.clone();
        g1.push(g_row.clone());
        self.assert_new_row_separated(&g_row, pos, &g1[..pos], &self.h_rows)?;

        let f1 = (0..=pos).map(|m| self.f.eval(arg(m), arg(pos))).collect::<Result<Vec<_>, _>>()?;
        let h_row = Row::theta(ThetaInputs::new(f1, self.h_rows.clone(), g1)?).with_provenance(row_name(RowKind::H, pos));

        self.order = order;
        self.g_rows.push(g_row);
        self.h_rows.push(h_row);
        Ok(pos)
    }

    /// Finite-scale check that the fresh g-row can join the earlier rows:
    /// overlaps stay below its milestones and its marks are 1.
    fn assert_new_row_separated(&self, row: &Row, pos: usize, g_prev: &[Row], h_prev: &[Row]) -> Result<(), BuilderError> {
        let extent = 2 * row.milestone(pos)? + 1;
        let values = row.prefix(extent + 1)?;
        let milestones = row.milestones();
        for &m in milestones.iter().filter(|&&m| m <= extent) {
            if !values[m].is_one() {
                return Err(BuilderError::Inconsistent(format!("fresh g-row {pos} has {} at milestone {m}", values[m])));
            }
        }
        for earlier in [g_prev, h_prev] {
            for (m, other) in earlier.iter().enumerate() {
                let bound = milestones[m];
                let other_vals = other.prefix(extent + 1)?;
                if let Some(l) = (bound + 1..=extent).find(|&l| !values[l].is_zero() && !other_vals[l].is_zero()) {
                    return Err(BuilderError::SViolation {
                        first: row_name(RowKind::G, pos),
                        second: other.provenance(),
                        index: l,
                        detail: format!("shared support past bound {bound} while adding a point"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn eval_g(&self, i: usize, n: usize) -> Result<Rational, BuilderError> {
        Ok(self.g_row(i)?.value(n)?)
    }

    pub fn eval_h(&self, i: usize, n: usize) -> Result<Rational, BuilderError> {
        Ok(self.h_row(i)?.value(n)?)
    }

    /// Certified cutoff `C(i, j)`: past it every `g(i, n)·h(j, n)` is zero.
    ///
    /// For `j >= i` the pair is handled by the h-row run of `j`, where `i` is
    /// the `i`-th matched row; otherwise by the g-row run of `i`, where `j` is
    /// the `j`-th matched row.
    pub fn cutoff(&self, i: usize, j: usize) -> Result<usize, BuilderError> {
        self.check_pos(i)?;
        self.check_pos(j)?;
        Ok(if j >= i {
            self.h_rows[j].milestone(i)?
        } else {
            self.g_rows[i].milestone(j)?
        })
    }

    /// Runs every row to `len + 1` milestones and returns the largest of the
    /// last ones. This is enough for every cutoff and every row-vs-row bound.
    pub fn settle(&self) -> Result<usize, BuilderError> {
        let stages = self.len() + 1;
        let mut max = 0;
        for (_, _, row) in self.rows() {
            max = max.max(row.milestone(stages - 1)?);
        }
        Ok(max)
    }

    /// Four times the largest settled milestone.
    pub fn default_horizon(&self) -> Result<usize, BuilderError> {
        Ok(4 * self.settle()?)
    }

    pub fn verify_pair(&self, i: usize, j: usize, stress_horizon: usize) -> Result<PairCertificate, BuilderError> {
        let cutoff = self.cutoff(i, j)?;
        let expected = self.f(i, j)?;
        let extent = cutoff.max(stress_horizon);
        let g = self.g_rows[i].prefix(extent + 1)?;
        let h = self.h_rows[j].prefix(extent + 1)?;
        let sum: Rational = (0..=cutoff).map(|n| &g[n] * &h[n]).sum();
        if sum != expected {
            return Err(BuilderError::PairMismatch {
                i,
                j,
                n: Some(cutoff),
                detail: format!("sum up to cutoff {cutoff} is {sum}, f = {expected}"),
            });
        }
        if let Some(n) = (cutoff + 1..=extent).find(|&n| !g[n].is_zero() && !h[n].is_zero()) {
            return Err(BuilderError::PairMismatch {
                i,
                j,
                n: Some(n),
                detail: format!("g = {}, h = {} past cutoff {cutoff}", g[n], h[n]),
            });
        }
        Ok(PairCertificate {
            i,
            j,
            cutoff,
            sum,
            stress_horizon,
        })
    }

    pub fn verify_all(&self, stress_horizon: usize) -> Result<VerifyReport, BuilderError> {
        let n = self.len();
        let pairs = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.verify_pair(i, j, stress_horizon))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VerifyReport {
            points: n,
            stress_horizon,
            pairs,
        })
    }

    /// Checks almost disjointness of all rows and columns on `[0, horizon]`,
    /// and that each row has at least `min_milestones` milestones there.
    ///
    /// For rows `A` before `B`, `A` is the `p`-th argument of `B`'s run, where
    /// `p` is `A`'s point, so `supp A ∩ supp B` must lie in `[0, n_p(B)]`.
    /// Likewise `supp B ∩ x_m ⊆ [0, n_m(B)]`.
    pub fn check_s(&self, min_milestones: usize, horizon: usize) -> Result<SReport, BuilderError> {
        let rows: Vec<(String, usize, Vec<Rational>, Vec<usize>)> = self
            .rows()
            .map(|(kind, pos, row)| {
                let values = row.prefix(horizon + 1)?;
                let milestones: Vec<usize> = row.milestones().into_iter().filter(|&m| m <= horizon).collect();
                Ok((row_name(kind, pos), pos, values, milestones))
            })
            .collect::<Result<_, BuilderError>>()?;

        for (name, _, values, milestones) in &rows {
            if milestones.len() < min_milestones {
                return Err(BuilderError::TooFewMilestones {
                    row: name.clone(),
                    found: milestones.len(),
                    required: min_milestones,
                    horizon,
                });
            }
            if let Some(&m) = milestones.iter().find(|&&m| !values[m].is_one()) {
                return Err(BuilderError::Inconsistent(format!("{name} has {} at milestone {m}", values[m])));
            }
        }

        let mut overlaps = Vec::new();
        for (b, (later, _, later_vals, later_ms)) in rows.iter().enumerate() {
            for (earlier, pos, earlier_vals, _) in &rows[..b] {
                let bound = *later_ms.get(*pos).ok_or_else(|| BuilderError::TooFewMilestones {
                    row: later.clone(),
                    found: later_ms.len(),
                    required: pos + 1,
                    horizon,
                })?;
                let shared: Vec<usize> = (0..=horizon)
                    .filter(|&l| !later_vals[l].is_zero() && !earlier_vals[l].is_zero())
                    .collect();
                if let Some(&l) = shared.iter().find(|&&l| l > bound) {
                    return Err(BuilderError::SViolation {
                        first: later.clone(),
                        second: earlier.clone(),
                        index: l,
                        detail: format!("shared support past bound {bound}"),
                    });
                }
                if !shared.is_empty() {
                    overlaps.push(Overlap {
                        later: later.clone(),
                        earlier: earlier.clone(),
                        bound,
                        shared,
                    });
                }
            }
            for (m, &bound) in later_ms.iter().enumerate() {
                if let Some(l) = ad_elements_upto(m as u64, horizon as u64)
                    .map(|l| l as usize)
                    .find(|&l| l > bound && !later_vals[l].is_zero())
                {
                    return Err(BuilderError::SViolation {
                        first: later.clone(),
                        second: format!("x_{m}"),
                        index: l,
                        detail: format!("support meets the column past bound {bound}"),
                    });
                }
            }
        }

        Ok(SReport {
            rows: rows.len(),
            horizon,
            min_milestones,
            overlaps,
        })
    }

    /// Largest `n` with `g(i, n)·h(j, n) ≠ 0`, if any.
    pub fn last_nonzero_index(&self, i: usize, j: usize) -> Result<Option<usize>, BuilderError> {
        let cutoff = self.cutoff(i, j)?;
        let g = self.g_rows[i].prefix(cutoff + 1)?;
        let h = self.h_rows[j].prefix(cutoff + 1)?;
        Ok((0..=cutoff).rev().find(|&n| !g[n].is_zero() && !h[n].is_zero()))
    }

    /// Indices `n` where some `g(i, n)·h(j, n)` with `i ∈ rows`, `j ∈ cols` is nonzero.
    pub fn active_index_set(&self, rows: &[usize], cols: &[usize]) -> Result<BTreeSet<usize>, BuilderError> {
        let mut active = BTreeSet::new();
        for &i in rows {
            for &j in cols {
                let cutoff = self.cutoff(i, j)?;
                let g = self.g_rows[i].prefix(cutoff + 1)?;
                let h = self.h_rows[j].prefix(cutoff + 1)?;
                active.extend((0..=cutoff).filter(|&n| !g[n].is_zero() && !h[n].is_zero()));
            }
        }
        Ok(active)
    }

    /// Per-pair cutoffs, `cutoffs[i][j] = C(i, j)`.
    pub fn cutoff_table(&self) -> Result<Vec<Vec<usize>>, BuilderError> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.cutoff(i, j)).collect())
            .collect()
    }
}
