//! Exact linear feasibility by phase-one simplex over rationals.
//!
//! Systems are small (a handful of cut offsets), so a dense tableau with
//! Bland's rule is enough; exactness matters more than speed here.

use crate::ratio::Ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coefs: Vec<(usize, Ratio)>,
    pub relation: Relation,
    pub rhs: Ratio,
}

/// Variables with optional bounds plus linear constraints.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    lower: Vec<Option<Ratio>>,
    upper: Vec<Option<Ratio>>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Ratio>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn point(&self) -> Option<&[Ratio]> {
        match self {
            Feasibility::Feasible(x) => Some(x),
            Feasibility::Infeasible => None,
        }
    }
}

impl LinearSystem {
    /// `vars` free variables.
    pub fn new(vars: usize) -> Self {
        LinearSystem {
            lower: vec![None; vars],
            upper: vec![None; vars],
            constraints: Vec::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.lower.len()
    }

    pub fn add_var(&mut self, lower: Option<Ratio>, upper: Option<Ratio>) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.lower.len() - 1
    }

    pub fn bound(&mut self, var: usize, lower: Option<Ratio>, upper: Option<Ratio>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add(&mut self, coefs: Vec<(usize, Ratio)>, relation: Relation, rhs: Ratio) {
        self.constraints.push(Constraint {
            coefs,
            relation,
            rhs,
        });
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Decide feasibility; on success returns an exact point.
    pub fn solve(&self) -> Feasibility {
        solve(self)
    }
}

/// How an original variable is expressed through nonnegative columns.
enum Substitution {
    /// `x = lo + col`
    Shift(Ratio, usize),
    /// `x = hi - col`
    Mirror(Ratio, usize),
    /// `x = pos - neg`
    Split(usize, usize),
}

struct Row {
    coefs: Vec<Ratio>,
    relation: Relation,
    rhs: Ratio,
}

fn solve(sys: &LinearSystem) -> Feasibility {
    let n = sys.var_count();
    let mut subs = Vec::with_capacity(n);
    let mut cols = 0usize;
    let mut extra_rows: Vec<(usize, Ratio)> = Vec::new();
    for j in 0..n {
        match (&sys.lower[j], &sys.upper[j]) {
            (Some(lo), hi) => {
                if let Some(hi) = hi {
                    if hi < lo {
                        return Feasibility::Infeasible;
                    }
                    extra_rows.push((cols, hi - lo));
                }
                subs.push(Substitution::Shift(lo.clone(), cols));
                cols += 1;
            }
            (None, Some(hi)) => {
                subs.push(Substitution::Mirror(hi.clone(), cols));
                cols += 1;
            }
            (None, None) => {
                subs.push(Substitution::Split(cols, cols + 1));
                cols += 2;
            }
        }
    }

    let mut rows: Vec<Row> = Vec::with_capacity(sys.constraints.len() + extra_rows.len());
    for c in &sys.constraints {
        let mut coefs = vec![Ratio::zero(); cols];
        let mut rhs = c.rhs.clone();
        for (j, a) in &c.coefs {
            if a.is_zero() {
                continue;
            }
            match &subs[*j] {
                Substitution::Shift(lo, col) => {
                    rhs -= &(a * lo);
                    coefs[*col] += a;
                }
                Substitution::Mirror(hi, col) => {
                    rhs -= &(a * hi);
                    coefs[*col] -= a;
                }
                Substitution::Split(p, q) => {
                    coefs[*p] += a;
                    coefs[*q] -= a;
                }
            }
        }
        if coefs.iter().all(|a| a.is_zero()) {
            let ok = match c.relation {
                Relation::Le => !rhs.is_negative(),
                Relation::Ge => !rhs.is_positive(),
                Relation::Eq => rhs.is_zero(),
            };
            if !ok {
                return Feasibility::Infeasible;
            }
            continue;
        }
        rows.push(Row {
            coefs,
            relation: c.relation,
            rhs,
        });
    }
    for (col, cap) in extra_rows {
        let mut coefs = vec![Ratio::zero(); cols];
        coefs[col] = Ratio::one();
        rows.push(Row {
            coefs,
            relation: Relation::Le,
            rhs: cap,
        });
    }

    let columns = match phase_one(rows, cols) {
        Some(x) => x,
        None => return Feasibility::Infeasible,
    };
    let point = subs
        .iter()
        .map(|s| match s {
            Substitution::Shift(lo, col) => lo + &columns[*col],
            Substitution::Mirror(hi, col) => hi - &columns[*col],
            Substitution::Split(p, q) => &columns[*p] - &columns[*q],
        })
        .collect();
    Feasibility::Feasible(point)
}

/// Find `x >= 0` with every row satisfied, or `None`.
fn phase_one(mut rows: Vec<Row>, cols: usize) -> Option<Vec<Ratio>> {
    // make right-hand sides nonnegative
    for row in &mut rows {
        if row.rhs.is_negative() {
            row.rhs = -&row.rhs;
            for a in &mut row.coefs {
                *a = -&*a;
            }
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let art_count = rows.iter().filter(|r| r.relation != Relation::Le).count();
    let width = cols + slack_count + art_count;
    let art_start = cols + slack_count;

    let mut tab: Vec<Vec<Ratio>> = Vec::with_capacity(m);
    let mut rhs: Vec<Ratio> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (cols, art_start);
    for row in rows {
        let mut t = row.coefs;
        t.resize(width, Ratio::zero());
        match row.relation {
            Relation::Le => {
                t[next_slack] = Ratio::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                t[next_slack] = -Ratio::one();
                next_slack += 1;
                t[next_art] = Ratio::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                t[next_art] = Ratio::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        tab.push(t);
        rhs.push(row.rhs);
    }

    // objective: minimize the sum of artificials, expressed in nonbasic terms
    let mut cost = vec![Ratio::zero(); width];
    let mut value = Ratio::zero();
    for i in 0..m {
        if basis[i] >= art_start {
            for j in 0..art_start {
                if !tab[i][j].is_zero() {
                    cost[j] -= &tab[i][j];
                }
            }
            value -= &rhs[i];
        }
    }

    loop {
        let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Ratio)> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let q = &rhs[i] / &tab[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lq)) => q < *lq || (q == *lq && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, q));
                }
            }
        }
        // Bounded below by zero, so phase one never diverges.
        let (pr, _) = leave.expect("phase one is bounded");
        let piv = tab[pr][enter].clone();
        if !piv.is_one() {
            for a in tab[pr].iter_mut() {
                if !a.is_zero() {
                    *a = &*a / &piv;
                }
            }
            rhs[pr] = &rhs[pr] / &piv;
        }
        let prow = tab[pr].clone();
        let prhs = rhs[pr].clone();
        for i in 0..m {
            if i == pr || tab[i][enter].is_zero() {
                continue;
            }
            let f = tab[i][enter].clone();
            for (a, p) in tab[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *a -= &(&f * p);
                }
            }
            rhs[i] -= &(&f * &prhs);
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for (a, p) in cost.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *a -= &(&f * p);
                }
            }
            value -= &(&f * &prhs);
        }
        basis[pr] = enter;
    }

    if !value.is_zero() {
        return None;
    }
    let mut x = vec![Ratio::zero(); cols];
    for (i, &b) in basis.iter().enumerate() {
        if b < cols {
            x[b] = rhs[i].clone();
        }
    }
    Some(x)
}

/// Check a point against every bound and constraint exactly.
/// Decide `sys`, returning a witness point when one exists.
pub fn linear_feasibility(sys: &LinearSystem) -> Feasibility {
    sys.solve()
}

pub fn satisfies(sys: &LinearSystem, x: &[Ratio]) -> bool {
    if x.len() != sys.var_count() {
        return false;
    }
    for j in 0..x.len() {
        if let Some(lo) = &sys.lower[j] {
            if &x[j] < lo {
                return false;
            }
        }
        if let Some(hi) = &sys.upper[j] {
            if &x[j] > hi {
                return false;
            }
        }
    }
    sys.constraints.iter().all(|c| {
        let lhs: Ratio = c.coefs.iter().map(|(j, a)| a * &x[*j]).sum();
        match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
            Relation::Eq => lhs == c.rhs,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::frac(n, d)
    }

    #[test]
    fn pinned_single_variable() {
        let mut s = LinearSystem::new(1);
        s.bound(0, Some(r(0, 1)), Some(r(1, 1)));
        s.add(vec![(0, r(1, 1))], Relation::Eq, r(1, 2));
        assert_eq!(s.solve(), Feasibility::Feasible(vec![r(1, 2)]));
    }

    #[test]
    fn contradictory_lower_bounds() {
        let mut s = LinearSystem::new(2);
        s.add(vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Eq, r(1, 1));
        s.add(vec![(0, r(1, 1))], Relation::Ge, r(3, 4));
        s.add(vec![(1, r(1, 1))], Relation::Ge, r(3, 4));
        assert_eq!(s.solve(), Feasibility::Infeasible);
    }

    #[test]
    fn free_and_mirrored_variables() {
        let mut s = LinearSystem::new(3);
        s.bound(1, None, Some(r(-2, 1)));
        s.add(vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Eq, r(-5, 1));
        s.add(vec![(2, r(2, 1)), (0, r(-1, 1))], Relation::Ge, r(7, 3));
        let f = s.solve();
        assert!(satisfies(&s, f.point().unwrap()));
    }

    #[test]
    fn zero_rows_are_checked_directly() {
        let mut s = LinearSystem::new(1);
        s.add(vec![(0, r(0, 1))], Relation::Eq, r(1, 1));
        assert_eq!(s.solve(), Feasibility::Infeasible);
        let mut s = LinearSystem::new(1);
        s.add(vec![(0, r(0, 1))], Relation::Le, r(1, 1));
        assert!(s.solve().is_feasible());
    }

    #[test]
    fn crossed_bounds() {
        let mut s = LinearSystem::new(1);
        s.bound(0, Some(r(1, 1)), Some(r(0, 1)));
        assert_eq!(s.solve(), Feasibility::Infeasible);
    }
}
