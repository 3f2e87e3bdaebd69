//! Exactly-1-3SAT formulas, a brute-force oracle, and the gadget that turns a
//! formula into a division instance whose `2(Nk - 1)`-cut solutions encode
//! exactly-1 satisfying assignments.
//!
//! Coordinates are laid out on an integer grid with `M` clauses:
//! wide blocks at `T1(i, j) = (3M+3)((i-1)2k + (j-1))` and narrow blocks at
//! `T2(i) = (3M+4) + (i-1)(6M+6)`, then normalized onto `[0, 1]`.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{verify, Agent, Division, Domain, Instance, TargetSpec, ValueBlock};
use crate::ratio::Ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn holds(&self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] == self.positive
    }

    /// DIMACS-style signed index.
    pub fn to_signed(&self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    pub fn from_signed(v: i64) -> Result<Self> {
        if v == 0 {
            return Err(Error::MalformedFormula("literal 0".into()));
        }
        Ok(Literal {
            var: v.unsigned_abs() as usize,
            positive: v > 0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    pub vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl Formula {
    /// Build from DIMACS-style signed literals, validating every clause.
    pub fn new(vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        let mut out = Vec::with_capacity(clauses.len());
        for (ci, clause) in clauses.iter().enumerate() {
            if clause.len() != 3 {
                return Err(Error::MalformedFormula(format!(
                    "clause {} has {} literals, expected 3",
                    ci + 1,
                    clause.len()
                )));
            }
            let lits = [
                Literal::from_signed(clause[0])?,
                Literal::from_signed(clause[1])?,
                Literal::from_signed(clause[2])?,
            ];
            for l in &lits {
                if l.var == 0 || l.var > vars {
                    return Err(Error::MalformedFormula(format!(
                        "clause {} mentions variable {} outside 1..={vars}",
                        ci + 1,
                        l.var
                    )));
                }
            }
            if lits[0].var == lits[1].var || lits[0].var == lits[2].var || lits[1].var == lits[2].var {
                return Err(Error::MalformedFormula(format!(
                    "clause {} repeats a variable",
                    ci + 1
                )));
            }
            out.push(lits);
        }
        if vars == 0 {
            return Err(Error::MalformedFormula("no variables".into()));
        }
        Ok(Formula { vars, clauses: out })
    }

    /// Every clause has exactly one true literal.
    pub fn exactly_one(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.vars
            && self
                .clauses
                .iter()
                .all(|c| c.iter().filter(|l| l.holds(assignment)).count() == 1)
    }
}

/// Parse DIMACS CNF. Exactly-1 semantics are marked either by a trailing
/// `exactly-1` token on the `p cnf` line or by a `c exactly-1` comment; the
/// returned flag says whether the mark was present.
pub fn read_dimacs(reader: impl BufRead) -> Result<(Formula, bool)> {
    let mut header: Option<(usize, usize)> = None;
    let mut exactly_one = false;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.trim().eq_ignore_ascii_case("exactly-1") {
                exactly_one = true;
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() < 3 || toks[0] != "cnf" {
                return Err(Error::MalformedFormula(format!("bad header {line:?}")));
            }
            let n = toks[1]
                .parse()
                .map_err(|_| Error::MalformedFormula(format!("bad variable count in {line:?}")))?;
            let m = toks[2]
                .parse()
                .map_err(|_| Error::MalformedFormula(format!("bad clause count in {line:?}")))?;
            if toks[3..].iter().any(|t| t.eq_ignore_ascii_case("exactly-1")) {
                exactly_one = true;
            }
            header = Some((n, m));
            continue;
        }
        if header.is_none() {
            return Err(Error::MalformedFormula("clause before the p cnf header".into()));
        }
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::MalformedFormula(format!("bad literal {tok:?}")))?;
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(v);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let (n, m) = header.ok_or_else(|| Error::MalformedFormula("missing p cnf header".into()))?;
    if clauses.len() != m {
        return Err(Error::MalformedFormula(format!(
            "header announces {m} clauses, found {}",
            clauses.len()
        )));
    }
    Ok((Formula::new(n, clauses)?, exactly_one))
}

pub fn write_dimacs(formula: &Formula) -> String {
    let mut s = format!("p cnf {} {} exactly-1\n", formula.vars, formula.clauses.len());
    for c in &formula.clauses {
        for l in c {
            s.push_str(&format!("{} ", l.to_signed()));
        }
        s.push_str("0\n");
    }
    s
}

pub const DEFAULT_MAX_VARS: usize = 20;

fn assignment_from_bits(bits: u64, vars: usize) -> Vec<bool> {
    (0..vars).map(|v| bits >> v & 1 == 1).collect()
}

/// Every exactly-1 satisfying assignment, by brute force over `2^N`.
pub fn exactly1_solutions(formula: &Formula, max_vars: usize) -> Result<Vec<Vec<bool>>> {
    if formula.vars > max_vars || formula.vars > 62 {
        return Err(Error::TooManyVariables {
            vars: formula.vars,
            max: max_vars.min(62),
        });
    }
    Ok((0..1u64 << formula.vars)
        .map(|b| assignment_from_bits(b, formula.vars))
        .filter(|a| formula.exactly_one(a))
        .collect())
}

/// First exactly-1 satisfying assignment in counting order, if any.
pub fn exactly1_3sat_oracle(formula: &Formula, max_vars: usize) -> Result<Option<Vec<bool>>> {
    if formula.vars > max_vars || formula.vars > 62 {
        return Err(Error::TooManyVariables {
            vars: formula.vars,
            max: max_vars.min(62),
        });
    }
    Ok((0..1u64 << formula.vars)
        .map(|b| assignment_from_bits(b, formula.vars))
        .find(|a| formula.exactly_one(a)))
}

#[derive(Clone, Debug)]
pub struct SatGadgetLayout {
    pub formula: Formula,
    pub alpha: Ratio,
    /// `α ∈ [1/(k+1), 1/k)`.
    pub k: usize,
    /// Normalized instance. Agents: wide (N), narrow (Nk - 1), variable (N), clause (M).
    pub instance: Instance,
    /// Length of the integer grid before normalization.
    pub extent: Ratio,
    pub target_cuts: usize,
    /// At `α = 1/3` the last clause block would weigh zero and is omitted.
    pub boundary_case: bool,
}

impl SatGadgetLayout {
    fn m(&self) -> i64 {
        self.formula.clauses.len() as i64
    }

    /// Start of block `j` of wide agent `i` (both 1-based), in grid units.
    pub fn t1(&self, i: usize, j: usize) -> i64 {
        t1(self.m(), self.k, i, j)
    }

    /// Start of the block of narrow agent `i` (1-based), in grid units.
    pub fn t2(&self, i: usize) -> i64 {
        t2(self.m(), i)
    }

    /// Start of block `j` of clause `i` when its literal is on `var` with
    /// window polarity `pol`.
    pub fn tc(&self, i: usize, j: usize, var: usize, pol: usize) -> i64 {
        self.t1(var, 1 + 2 * pol) + 2 + (j as i64 - 1) * self.m() + i as i64 - 1
    }

    /// Variable window `I^v_{i,pol}` in grid units.
    pub fn window(&self, i: usize, pol: usize) -> (i64, i64) {
        let s = self.t1(i, 1 + 2 * pol);
        (s + 1, s + 3 * self.m() + 3)
    }

    /// Map a grid coordinate onto `[0, 1]`.
    pub fn scale(&self, x: &Ratio) -> Ratio {
        x / &self.extent
    }

    pub fn agent_index(&self, family: Family, i: usize) -> usize {
        let n = self.formula.vars;
        let narrow = n * self.k - 1;
        i - 1
            + match family {
                Family::Wide => 0,
                Family::Narrow => n,
                Family::Variable => n + narrow,
                Family::Clause => 2 * n + narrow,
            }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Wide,
    Narrow,
    Variable,
    Clause,
}

fn t1(m: i64, k: usize, i: usize, j: usize) -> i64 {
    (3 * m + 3) * ((i as i64 - 1) * 2 * k as i64 + (j as i64 - 1))
}

fn t2(m: i64, i: usize) -> i64 {
    (3 * m + 4) + (i as i64 - 1) * (6 * m + 6)
}

/// Window polarity holding a literal's clause block: the window that turns
/// `+` exactly when the literal is true.
fn polarity(l: &Literal) -> usize {
    usize::from(l.positive)
}

pub fn gen_sat_gadget(formula: &Formula, alpha: &Ratio) -> Result<SatGadgetLayout> {
    if !alpha.is_positive() || *alpha >= Ratio::frac(1, 2) {
        return Err(Error::InvalidArgument(format!(
            "the gadget needs 0 < α < 1/2, got {alpha}"
        )));
    }
    let formula = Formula::new(
        formula.vars,
        formula
            .clauses
            .iter()
            .map(|c| c.iter().map(|l| l.to_signed()).collect())
            .collect(),
    )?;
    // α ∈ [1/(k+1), 1/k)  ⇔  k = floor(1/α) when 1/α is not an integer, else 1/α - 1
    let inv = alpha.recip();
    let mut k = inv.floor();
    if Ratio::int(k.clone()) == inv {
        k -= 1;
    }
    let k: usize = k
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("α = {alpha} is too small")))?;
    let n = formula.vars;
    let m = formula.clauses.len() as i64;
    let third = Ratio::frac(1, 3);
    let high = *alpha >= third;
    if high && n * k < 3 {
        return Err(Error::InvalidArgument(
            "α ≥ 1/3 places clause blocks next to the second narrow block, which needs N·k - 1 ≥ 2".into(),
        ));
    }
    let boundary_case = *alpha == third;

    let unit = |s: i64| -> (Ratio, Ratio) { (Ratio::int(s), Ratio::int(s + 1)) };
    let blk = |s: i64, w: &Ratio| -> Result<ValueBlock> {
        let (a, b) = unit(s);
        ValueBlock::new(a, b, w.clone())
    };
    let mut agents = Vec::new();

    let wide_w = Ratio::frac(1, 2 * k as i64);
    for i in 1..=n {
        let blocks = (1..=2 * k)
            .map(|j| blk(t1(m, k, i, j), &wide_w))
            .collect::<Result<Vec<_>>>()?;
        agents.push(Agent::new(format!("wide-{i}"), blocks));
    }
    for i in 1..=n * k - 1 {
        agents.push(Agent::new(format!("narrow-{i}"), vec![blk(t2(m, i), &Ratio::one())?]));
    }
    let last_wide = t1(m, k, n, 2 * k);
    let half_alpha = alpha / Ratio::int(2);
    let var_last = Ratio::one() - Ratio::int(2) * alpha;
    for i in 1..=n {
        let a = t1(m, k, i, 1);
        let b = t1(m, k, i, 3);
        let blocks = vec![
            blk(a + 1, &half_alpha)?,
            blk(a + 3 * m + 2, &half_alpha)?,
            blk(b + 1, &half_alpha)?,
            blk(b + 3 * m + 2, &half_alpha)?,
            blk(last_wide + i as i64, &var_last)?,
        ];
        agents.push(Agent::new(format!("var-{i}"), blocks));
    }
    let (lit_w, last_w) = if high {
        (
            alpha.complement() / Ratio::int(2),
            (Ratio::int(3) * alpha - Ratio::one()) / Ratio::int(2),
        )
    } else {
        (alpha.clone(), Ratio::one() - Ratio::int(3) * alpha)
    };
    for (ci, clause) in formula.clauses.iter().enumerate() {
        let i = ci as i64 + 1;
        let mut blocks = Vec::with_capacity(4);
        for (j, lit) in clause.iter().enumerate() {
            let s = t1(m, k, lit.var, 1 + 2 * polarity(lit)) + 2 + j as i64 * m + i - 1;
            blocks.push(blk(s, &lit_w)?);
        }
        if last_w.is_positive() {
            let s = if high {
                t2(m, 2) + i
            } else {
                last_wide + n as i64 + i
            };
            blocks.push(blk(s, &last_w)?);
        }
        agents.push(Agent::new(format!("clause-{i}"), blocks));
    }

    let extent = agents
        .iter()
        .flat_map(|a| a.blocks.iter().map(|b| b.end.clone()))
        .max()
        .expect("at least one block");
    let raw = Instance::new(agents, Domain::Interval, extent.clone())?;
    check_disjoint(&raw)?;
    let instance = raw.normalize()?;
    Ok(SatGadgetLayout {
        formula,
        alpha: alpha.clone(),
        k,
        instance,
        extent,
        target_cuts: 2 * (n * k - 1),
        boundary_case,
    })
}

/// Blocks of different agents may touch but never overlap.
pub(crate) fn check_disjoint(inst: &Instance) -> Result<()> {
    let mut all: Vec<(&Ratio, &Ratio, &str)> = inst
        .agents
        .iter()
        .flat_map(|a| a.blocks.iter().map(move |b| (&b.start, &b.end, a.name.as_str())))
        .collect();
    all.sort();
    for w in all.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::InvalidBlock(format!(
                "blocks of {} and {} overlap at [{}, {}]",
                w[0].2, w[1].2, w[1].0, w[0].1
            )));
        }
    }
    Ok(())
}

/// The explicit `2(Nk - 1)`-cut solution for an exactly-1 satisfying assignment.
pub fn build_sat_solution(layout: &SatGadgetLayout, assignment: &[bool]) -> Result<Division> {
    if !layout.formula.exactly_one(assignment) {
        return Err(Error::NotSatisfying);
    }
    let n = layout.formula.vars;
    let k = layout.k;
    let m = layout.m();
    let alpha = &layout.alpha;
    let int = |v: i64| Ratio::int(v);
    // 2k(1/k - α) = 2 - 2kα
    let shift = int(2) - int(2 * k as i64) * alpha;
    let mut positive: Vec<(Ratio, Ratio)> = Vec::with_capacity(n * k - 1);
    for j in 1..=n * k - 1 {
        if (j - 1) % k == 0 {
            let i = (j - 1) / k + 1;
            let anchor = int(layout.t2(j));
            if assignment[i - 1] {
                positive.push((
                    &anchor + alpha.complement(),
                    int(layout.t1(i, 4) + 1) - &shift,
                ));
            } else {
                positive.push((int(layout.t1(i, 1)) + &shift, &anchor + alpha));
            }
        } else {
            let anchor = int(layout.t2(j));
            positive.push((&anchor + alpha.complement(), anchor + int(m + 1)));
        }
    }
    let mut cuts = Vec::with_capacity(2 * positive.len());
    for (a, b) in &positive {
        cuts.push(layout.scale(a));
        cuts.push(layout.scale(b));
    }
    let labels = (0..=cuts.len()).map(|p| if p % 2 == 1 { 0 } else { 1 }).collect();
    let div = Division::new(cuts, labels, 2, Domain::Interval)?;
    let report = verify(&layout.instance, &div, &TargetSpec::imbalanced(alpha)?)?;
    if !report.pass {
        return Err(Error::NotASolution(format!(
            "constructed division misses the targets: {:?}",
            report.failures
        )));
    }
    Ok(div)
}

/// Read back `y_i = ℓ` from a solution in which window `I^v_{i,ℓ}` is
/// entirely `+` and the other window is not.
pub fn read_assignment(layout: &SatGadgetLayout, div: &Division) -> Result<Vec<bool>> {
    let positive = crate::measures::circle_to_interval(div).label_set(0);
    let covered = |(a, b): (i64, i64)| {
        let (a, b) = (layout.scale(&Ratio::int(a)), layout.scale(&Ratio::int(b)));
        positive.iter().any(|(s, e)| *s <= a && b <= *e)
    };
    (1..=layout.formula.vars)
        .map(|i| match (covered(layout.window(i, 0)), covered(layout.window(i, 1))) {
            (true, false) => Ok(false),
            (false, true) => Ok(true),
            (a, b) => Err(Error::NotASolution(format!(
                "variable {i}: window coverage ({a}, {b}) does not encode a value"
            ))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::frac(n, d)
    }

    fn fixture() -> Formula {
        Formula::new(3, vec![vec![1, 2, -3]]).unwrap()
    }

    #[test]
    fn landmarks() {
        let g = gen_sat_gadget(&fixture(), &r(1, 3)).unwrap();
        assert_eq!(g.k, 2);
        assert_eq!(g.instance.agent_count(), 12);
        assert_eq!(g.target_cuts, 10);
        assert_eq!(g.t1(1, 2), 6);
        assert_eq!(g.t2(1), 7);
        assert!(g.boundary_case);
    }

    #[test]
    fn k_from_alpha() {
        assert_eq!(gen_sat_gadget(&fixture(), &r(2, 5)).unwrap().k, 2);
        assert_eq!(gen_sat_gadget(&fixture(), &r(1, 4)).unwrap().k, 3);
        assert_eq!(gen_sat_gadget(&fixture(), &r(2, 7)).unwrap().k, 3);
        assert!(gen_sat_gadget(&fixture(), &r(1, 2)).is_err());
    }

    #[test]
    fn oracle_and_solutions() {
        let f = fixture();
        let sols = exactly1_solutions(&f, 10).unwrap();
        assert!(sols.contains(&vec![true, false, true]));
        assert!(sols.contains(&vec![false, false, false]));
        assert!(!f.exactly_one(&[true, true, true]));
        assert!(Formula::new(3, vec![vec![1, 1, 2]]).is_err());
        assert!(Formula::new(3, vec![vec![1, 2]]).is_err());
    }

    #[test]
    fn solution_and_readback() {
        for alpha in [r(1, 3), r(2, 5), r(1, 4), r(3, 10)] {
            let g = gen_sat_gadget(&fixture(), &alpha).unwrap();
            for y in exactly1_solutions(&g.formula, 10).unwrap() {
                let d = build_sat_solution(&g, &y).unwrap();
                assert_eq!(d.cut_count(), g.target_cuts);
                assert_eq!(read_assignment(&g, &d).unwrap(), y);
            }
            assert!(matches!(
                build_sat_solution(&g, &[true, true, true]),
                Err(Error::NotSatisfying)
            ));
        }
    }

    #[test]
    fn dimacs_round_trip() {
        let text = "c sample\np cnf 3 1\nc exactly-1\n1 2 -3 0\n";
        let (f, flag) = read_dimacs(text.as_bytes()).unwrap();
        assert!(flag);
        assert_eq!(f, fixture());
        let (g, flag) = read_dimacs(write_dimacs(&f).as_bytes()).unwrap();
        assert!(flag);
        assert_eq!(f, g);
        assert!(read_dimacs("p cnf 3 2\n1 2 3 0\n".as_bytes()).is_err());
    }
}
