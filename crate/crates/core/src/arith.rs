//! Exact rational arithmetic: Gaussian elimination, unique solves, conic
//! feasibility, and linear feasibility with Farkas certificates.
//!
//! Everything is computed over [`Rat`] (an eagerly reduced big rational), so
//! no tolerance appears anywhere. Feasibility is decided by a simplex run on
//! the alternative system of the feasibility criterion: for constraints
//! `A x <= b` (rows `I`) and `A x = b` (rows `E`) we minimise `b^T y` over the
//! cone `{ y : A^T y = 0, y_I >= 0 }`. The right-hand side of that program is
//! identically zero, every pivot is degenerate, and Bland's rule guarantees
//! termination. An unbounded ray is a Farkas certificate; at optimality the
//! simplex multipliers are a feasible point of the original system.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rat = BigRational;

/// Builds a rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Builds the reduced rational `num / den`. Panics when `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("columns are linearly dependent")]
    DependentColumns,
}

/// Dense vector of rationals with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RatVector(Vec<Rat>);

impl RatVector {
    pub fn new(entries: Vec<Rat>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![Rat::zero(); dim])
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&v| rat(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Rat] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Rat> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &RatVector) -> Rat {
        assert_eq!(self.dim(), other.dim(), "dot product of vectors of unequal dimension");
        self.0.iter().zip(&other.0).fold(Rat::zero(), |acc, (a, b)| acc + a * b)
    }
}

impl Index<usize> for RatVector {
    type Output = Rat;

    fn index(&self, index: usize) -> &Rat {
        &self.0[index]
    }
}

impl From<Vec<Rat>> for RatVector {
    fn from(entries: Vec<Rat>) -> Self {
        Self(entries)
    }
}

impl fmt::Display for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Dense row-major matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: &[RatVector]) -> Result<Self, ArithError> {
        let cols = rows.first().map_or(0, RatVector::dim);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.dim() != cols {
                return Err(ArithError::DimensionMismatch { expected: cols, found: row.dim() });
            }
            data.extend(row.as_slice().iter().cloned());
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &Rat {
        assert!(row < self.rows && col < self.cols, "matrix index ({row}, {col}) out of range");
        &self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> RatVector {
        assert!(row < self.rows, "row {row} out of range");
        RatVector(self.data[row * self.cols..(row + 1) * self.cols].to_vec())
    }
}

/// Reduces `rows` in place to reduced row echelon form; returns the pivot
/// column of every pivot row, in row order.
pub(crate) fn row_reduce(rows: &mut [Vec<Rat>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over the rationals.
pub fn rank(matrix: &RatMatrix) -> usize {
    let mut rows: Vec<Vec<Rat>> = (0..matrix.rows).map(|i| matrix.row(i).into_vec()).collect();
    row_reduce(&mut rows, matrix.cols).len()
}

fn check_dims<'a>(vectors: impl IntoIterator<Item = &'a RatVector>, dim: usize) -> Result<(), ArithError> {
    for v in vectors {
        if v.dim() != dim {
            return Err(ArithError::DimensionMismatch { expected: dim, found: v.dim() });
        }
    }
    Ok(())
}

/// Expresses `target` in the span of linearly independent `columns`.
///
/// Returns `Ok(None)` when `target` lies outside the span and
/// [`ArithError::DependentColumns`] when the columns are not independent.
pub fn solve_unique(columns: &[RatVector], target: &RatVector) -> Result<Option<RatVector>, ArithError> {
    let dim = target.dim();
    check_dims(columns, dim)?;
    let k = columns.len();
    // Augmented matrix [columns | target], one row per coordinate.
    let mut rows: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Rat> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = row_reduce(&mut rows, k + 1);
    if pivots.contains(&k) {
        return Ok(None);
    }
    if pivots.len() < k {
        return Err(ArithError::DependentColumns);
    }
    let solution = (0..k).map(|i| rows[i][k].clone()).collect();
    Ok(Some(RatVector(solution)))
}

/// Finds nonnegative coefficients `c` with `sum c_i * generators[i] == target`.
pub fn conic_feasible(generators: &[RatVector], target: &RatVector) -> Result<Option<Vec<Rat>>, ArithError> {
    let dim = target.dim();
    check_dims(generators, dim)?;
    let k = generators.len();
    if target.is_zero() {
        return Ok(Some(vec![Rat::zero(); k]));
    }
    let mut constraints = Vec::with_capacity(dim + k);
    for row in 0..dim {
        let coefficients = generators.iter().map(|g| g[row].clone()).collect();
        constraints.push(Constraint::eq(RatVector(coefficients), target[row].clone()));
    }
    for i in 0..k {
        let mut coefficients = vec![Rat::zero(); k];
        coefficients[i] = -Rat::one();
        constraints.push(Constraint::le(RatVector(coefficients), Rat::zero()));
    }
    match lp_feasible(k, &constraints)? {
        Feasibility::Feasible(point) => {
            let coeffs = point.into_vec();
            debug_assert!(coeffs.iter().all(|c| !c.is_negative()));
            debug_assert!((0..dim).all(|row| {
                let lhs = generators.iter().zip(&coeffs).fold(Rat::zero(), |acc, (g, c)| acc + &g[row] * c);
                lhs == target[row]
            }));
            Ok(Some(coeffs))
        }
        Feasibility::Infeasible(_) => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    Equal,
}

/// One linear constraint `coefficients . x (<= | =) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: RatVector,
    pub relation: Relation,
    pub rhs: Rat,
}

impl Constraint {
    pub fn le(coefficients: RatVector, rhs: Rat) -> Self {
        Self { coefficients, relation: Relation::LessEq, rhs }
    }

    pub fn eq(coefficients: RatVector, rhs: Rat) -> Self {
        Self { coefficients, relation: Relation::Equal, rhs }
    }

    pub fn is_satisfied_by(&self, point: &RatVector) -> bool {
        let lhs = self.coefficients.dot(point);
        match self.relation {
            Relation::LessEq => lhs <= self.rhs,
            Relation::Equal => lhs == self.rhs,
        }
    }
}

/// Multipliers `y` (one per constraint) with `y_I >= 0`, `A^T y = 0` and `b^T y < 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rat>,
}

impl FarkasCertificate {
    /// Checks the certificate exactly against the constraint system.
    pub fn verify(&self, dim: usize, constraints: &[Constraint]) -> bool {
        if self.multipliers.len() != constraints.len() {
            return false;
        }
        let mut combination = vec![Rat::zero(); dim];
        let mut value = Rat::zero();
        for (y, c) in self.multipliers.iter().zip(constraints) {
            if c.relation == Relation::LessEq && y.is_negative() {
                return false;
            }
            if c.coefficients.dim() != dim {
                return false;
            }
            if y.is_zero() {
                continue;
            }
            for (acc, a) in combination.iter_mut().zip(c.coefficients.as_slice()) {
                *acc += y * a;
            }
            value += y * &c.rhs;
        }
        combination.iter().all(Zero::is_zero) && value.is_negative()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(RatVector),
    Infeasible(FarkasCertificate),
}

impl Feasibility {
    pub fn point(&self) -> Option<&RatVector> {
        match self {
            Feasibility::Feasible(p) => Some(p),
            Feasibility::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Decides feasibility of a system of `<=` and `=` constraints in `dim` free variables.
pub fn lp_feasible(dim: usize, constraints: &[Constraint]) -> Result<Feasibility, ArithError> {
    check_dims(constraints.iter().map(|c| &c.coefficients), dim)?;

    // Columns of the alternative program: one per `<=` row, a +/- pair per `=` row.
    let mut owner = Vec::new();
    let mut sign = Vec::new();
    for (r, c) in constraints.iter().enumerate() {
        owner.push(r);
        sign.push(true);
        if c.relation == Relation::Equal {
            owner.push(r);
            sign.push(false);
        }
    }
    let ncols = owner.len();
    let cost: Vec<Rat> = (0..ncols)
        .map(|j| {
            let b = &constraints[owner[j]].rhs;
            if sign[j] {
                b.clone()
            } else {
                -b
            }
        })
        .collect();

    // Tableau rows are variables of the primal system; `ops` records the row
    // operations so the final multipliers can be mapped back to a primal point.
    let mut tab: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            (0..ncols)
                .map(|j| {
                    let a = &constraints[owner[j]].coefficients[i];
                    if sign[j] {
                        a.clone()
                    } else {
                        -a
                    }
                })
                .collect()
        })
        .collect();
    let mut ops: Vec<Vec<Rat>> =
        (0..dim).map(|i| (0..dim).map(|k| if i == k { Rat::one() } else { Rat::zero() }).collect()).collect();

    // Initial basis by Gauss-Jordan over columns in index order; rows left
    // without a pivot are identically zero and get dropped.
    let mut basis: Vec<Option<usize>> = vec![None; dim];
    for j in 0..ncols {
        let Some(i) = (0..dim).find(|&i| basis[i].is_none() && !tab[i][j].is_zero()) else {
            continue;
        };
        pivot(&mut tab, &mut ops, None, i, j);
        basis[i] = Some(j);
        if basis.iter().all(Option::is_some) {
            break;
        }
    }
    let kept: Vec<usize> = (0..dim).filter(|&i| basis[i].is_some()).collect();
    let mut tab: Vec<Vec<Rat>> = kept.iter().map(|&i| std::mem::take(&mut tab[i])).collect();
    let mut ops: Vec<Vec<Rat>> = kept.iter().map(|&i| std::mem::take(&mut ops[i])).collect();
    let mut basis: Vec<usize> = kept.iter().map(|&i| basis[i].unwrap()).collect();

    let mut reduced = cost.clone();
    for (row, &b) in tab.iter().zip(&basis) {
        if cost[b].is_zero() {
            continue;
        }
        for (r, t) in reduced.iter_mut().zip(row) {
            if !t.is_zero() {
                *r -= &cost[b] * t;
            }
        }
    }

    while let Some(entering) = (0..ncols).find(|&j| reduced[j].is_negative()) {
        // All right-hand sides are zero, so every positive entry ties in the
        // ratio test; Bland picks the smallest basic index among them.
        let leaving = (0..tab.len()).filter(|&i| tab[i][entering].is_positive()).min_by_key(|&i| basis[i]);
        let Some(leaving) = leaving else {
            let mut ray = vec![Rat::zero(); ncols];
            ray[entering] = Rat::one();
            for (row, &b) in tab.iter().zip(&basis) {
                ray[b] = -&row[entering];
            }
            let mut multipliers = vec![Rat::zero(); constraints.len()];
            for (j, d) in ray.into_iter().enumerate() {
                if sign[j] {
                    multipliers[owner[j]] += d;
                } else {
                    multipliers[owner[j]] -= d;
                }
            }
            let certificate = FarkasCertificate { multipliers };
            assert!(certificate.verify(dim, constraints), "simplex produced an invalid Farkas certificate");
            return Ok(Feasibility::Infeasible(certificate));
        };
        pivot(&mut tab, &mut ops, Some(&mut reduced), leaving, entering);
        basis[leaving] = entering;
    }

    let mut point = vec![Rat::zero(); dim];
    for (row, &b) in ops.iter().zip(&basis) {
        if cost[b].is_zero() {
            continue;
        }
        for (p, o) in point.iter_mut().zip(row) {
            if !o.is_zero() {
                *p += &cost[b] * o;
            }
        }
    }
    let point = RatVector(point);
    assert!(
        constraints.iter().all(|c| c.is_satisfied_by(&point)),
        "simplex multipliers do not satisfy the constraint system"
    );
    Ok(Feasibility::Feasible(point))
}

fn pivot(tab: &mut [Vec<Rat>], ops: &mut [Vec<Rat>], reduced: Option<&mut Vec<Rat>>, row: usize, col: usize) {
    let inv = tab[row][col].recip();
    for v in tab[row].iter_mut().chain(ops[row].iter_mut()) {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let pivot_tab = tab[row].clone();
    let pivot_ops = ops[row].clone();
    let eliminate = |target: &mut Vec<Rat>, source: &[Rat], factor: &Rat| {
        for (v, s) in target.iter_mut().zip(source) {
            if !s.is_zero() {
                *v -= factor * s;
            }
        }
    };
    for i in 0..tab.len() {
        if i == row || tab[i][col].is_zero() {
            continue;
        }
        let factor = tab[i][col].clone();
        eliminate(&mut tab[i], &pivot_tab, &factor);
        eliminate(&mut ops[i], &pivot_ops, &factor);
    }
    if let Some(reduced) = reduced {
        if !reduced[col].is_zero() {
            let factor = reduced[col].clone();
            eliminate(reduced, &pivot_tab, &factor);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(bits: u32, dim: usize) -> RatVector {
        RatVector((0..dim).map(|i| rat(((bits >> i) & 1) as i64)).collect())
    }

    const A: u32 = 1;
    const B: u32 = 2;
    const C: u32 = 4;
    const D: u32 = 8;
    const E: u32 = 16;

    #[test]
    fn rank_examples() {
        let m = RatMatrix::from_rows(&[chi(A | B, 5), chi(A | C, 5), chi(A | D, 5), chi(B | C | D, 5)]).unwrap();
        assert_eq!(rank(&m), 4);
        assert_eq!(rank(&RatMatrix::zeros(3, 4)), 0);
        assert_eq!(rank(&RatMatrix::identity(3)), 3);
    }

    #[test]
    fn solve_unique_examples() {
        let cols = [chi(A | B, 5), chi(A | C, 5), chi(A | D, 5), chi(B | C | D, 5)];
        let sol = solve_unique(&cols, &chi(A | B | C | D, 5)).unwrap().unwrap();
        assert_eq!(sol.into_vec(), vec![ratio(1, 3), ratio(1, 3), ratio(1, 3), ratio(2, 3)]);

        let cols = [chi(A, 3), chi(B, 3)];
        assert_eq!(solve_unique(&cols, &chi(A | B, 3)).unwrap().unwrap(), RatVector::from_ints(&[1, 1]));
        assert_eq!(solve_unique(&cols, &chi(C, 3)).unwrap(), None);
    }

    #[test]
    fn solve_unique_errors() {
        assert_eq!(
            solve_unique(&[chi(A, 3)], &chi(A, 4)),
            Err(ArithError::DimensionMismatch { expected: 4, found: 3 })
        );
        assert_eq!(solve_unique(&[chi(A, 2), chi(A, 2)], &chi(A, 2)), Err(ArithError::DependentColumns));
    }

    #[test]
    fn conic_examples() {
        let gens = [chi(A | B | C | D, 5), chi(A | B, 5), chi(C | E, 5), chi(D | E, 5)];
        let c = conic_feasible(&gens, &chi(A | B | C | D | E, 5)).unwrap().unwrap();
        assert_eq!(c, vec![ratio(1, 2); 4]);

        let z = conic_feasible(&gens, &RatVector::zeros(5)).unwrap().unwrap();
        assert!(z.iter().all(Zero::is_zero));

        let gens = [chi(A | B, 4), chi(A | C | D, 4)];
        assert_eq!(conic_feasible(&gens, &chi(A | B | C | D, 4)).unwrap(), None);
    }

    #[test]
    fn conic_rejects_mixed_dimensions() {
        let err = conic_feasible(&[chi(A, 2)], &chi(A, 3)).unwrap_err();
        assert!(matches!(err, ArithError::DimensionMismatch { .. }));
    }

    fn core_system(values: &[(u32, i64)], n: usize, grand: u32) -> Vec<Constraint> {
        values
            .iter()
            .map(|&(s, v)| {
                let row = RatVector((0..n).map(|i| rat(-(((s >> i) & 1) as i64))).collect());
                if s == grand {
                    Constraint::eq(row, rat(-v))
                } else {
                    Constraint::le(row, rat(-v))
                }
            })
            .collect()
    }

    #[test]
    fn lp_example_game_is_feasible() {
        let sys =
            core_system(&[(A, 0), (B, 0), (C, 0), (A | B, 2), (A | C, 2), (B | C, 2), (A | B | C, 3)], 3, A | B | C);
        let res = lp_feasible(3, &sys).unwrap();
        let p = res.point().expect("feasible");
        assert!(sys.iter().all(|c| c.is_satisfied_by(p)));
        // (1,1,1) is the only point: pair sums at least 2 and total 3.
        assert_eq!(p, &RatVector::from_ints(&[1, 1, 1]));
    }

    #[test]
    fn lp_subgame_of_anti_dual_is_infeasible() {
        let sys = core_system(&[(A, -1), (B, -1), (A | B, -3)], 2, A | B);
        match lp_feasible(2, &sys).unwrap() {
            Feasibility::Infeasible(cert) => assert!(cert.verify(2, &sys)),
            Feasibility::Feasible(p) => panic!("unexpected point {p}"),
        }
    }

    #[test]
    fn lp_vacuous_system() {
        let res = lp_feasible(1, &[]).unwrap();
        assert_eq!(res.point(), Some(&RatVector::zeros(1)));
    }

    #[test]
    fn lp_contradictory_equalities() {
        let sys = vec![
            Constraint::eq(RatVector::from_ints(&[1, 1]), rat(1)),
            Constraint::eq(RatVector::from_ints(&[2, 2]), rat(3)),
        ];
        match lp_feasible(2, &sys).unwrap() {
            Feasibility::Infeasible(cert) => assert!(cert.verify(2, &sys)),
            Feasibility::Feasible(_) => panic!("should be infeasible"),
        }
    }

    #[test]
    fn lp_dimension_mismatch() {
        let sys = vec![Constraint::le(RatVector::from_ints(&[1]), rat(0))];
        assert!(matches!(lp_feasible(2, &sys), Err(ArithError::DimensionMismatch { .. })));
    }
}
