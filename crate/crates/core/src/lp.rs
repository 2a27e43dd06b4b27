//! Exact rational linear feasibility for enumerator profiles.
//!
//! Problems carry nonnegative variables, equality rows and `>=` inequality
//! rows. A phase-1 simplex with Bland's rule decides feasibility over the
//! rationals; infeasible problems come with a Farkas certificate that is
//! re-verified by exact substitution before being returned, so a verdict is
//! never a floating-point artifact.

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::bounds::CodeParams;
use crate::error::{CoreError, CoreResult};
use crate::multiset::sub_multisets;
use crate::rational::{big_to_rational, rational_to_string, Rational};
use crate::transforms::{b_kernel, shadow_kernel};

/// One row `coeffs . x = rhs` (equality) or `coeffs . x >= rhs` (inequality).
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub label: String,
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

/// A feasibility problem over implicitly nonnegative variables.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    pub var_names: Vec<String>,
    pub equalities: Vec<LinearConstraint>,
    pub inequalities: Vec<LinearConstraint>,
}

impl LpProblem {
    fn check_shapes(&self) -> CoreResult<()> {
        let n = self.var_names.len();
        for row in self.equalities.iter().chain(&self.inequalities) {
            if row.coeffs.len() != n {
                return Err(CoreError::DimensionMismatch(format!(
                    "row {:?} has {} coefficients for {n} variables",
                    row.label,
                    row.coeffs.len()
                )));
            }
        }
        Ok(())
    }
}

/// Nonzero multipliers of a Farkas infeasibility certificate: `eq` rows may
/// carry any sign, `ineq` rows are nonnegative, the combined row is
/// componentwise nonpositive yet its right-hand side is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct FarkasCertificate {
    pub eq_multipliers: Vec<(usize, Rational)>,
    pub ineq_multipliers: Vec<(usize, Rational)>,
}

impl FarkasCertificate {
    pub fn to_json_value(&self, problem: &LpProblem) -> Value {
        let eqs: Vec<Value> = self
            .eq_multipliers
            .iter()
            .map(|(i, m)| {
                json!({"row": problem.equalities[*i].label, "multiplier": rational_to_string(m)})
            })
            .collect();
        let ineqs: Vec<Value> = self
            .ineq_multipliers
            .iter()
            .map(|(i, m)| {
                json!({"row": problem.inequalities[*i].label, "multiplier": rational_to_string(m)})
            })
            .collect();
        json!({"equalities": eqs, "inequalities": ineqs})
    }
}

#[derive(Clone, Debug)]
pub enum LpVerdict {
    Feasible { point: Vec<Rational> },
    Infeasible { certificate: FarkasCertificate },
}

impl LpVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpVerdict::Feasible { .. })
    }
}

/// Exact substitution check of a candidate point.
pub fn verify_point(problem: &LpProblem, point: &[Rational]) -> bool {
    if point.len() != problem.var_names.len() || point.iter().any(|x| x < &Rational::zero()) {
        return false;
    }
    let dot = |row: &LinearConstraint| -> Rational {
        row.coeffs
            .iter()
            .zip(point)
            .map(|(c, x)| c * x)
            .sum()
    };
    problem.equalities.iter().all(|row| dot(row) == row.rhs)
        && problem.inequalities.iter().all(|row| dot(row) >= row.rhs)
}

/// Exact check that a certificate proves infeasibility.
pub fn verify_certificate(problem: &LpProblem, cert: &FarkasCertificate) -> bool {
    let n = problem.var_names.len();
    if cert
        .eq_multipliers
        .iter()
        .any(|(i, _)| *i >= problem.equalities.len())
        || cert
            .ineq_multipliers
            .iter()
            .any(|(i, m)| *i >= problem.inequalities.len() || m < &Rational::zero())
    {
        return false;
    }
    let mut combined = vec![Rational::zero(); n];
    let mut rhs = Rational::zero();
    for (i, m) in &cert.eq_multipliers {
        let row = &problem.equalities[*i];
        for (slot, c) in combined.iter_mut().zip(&row.coeffs) {
            *slot += m * c;
        }
        rhs += m * &row.rhs;
    }
    for (i, m) in &cert.ineq_multipliers {
        let row = &problem.inequalities[*i];
        for (slot, c) in combined.iter_mut().zip(&row.coeffs) {
            *slot += m * c;
        }
        rhs += m * &row.rhs;
    }
    combined.iter().all(|c| c <= &Rational::zero()) && rhs > Rational::zero()
}

/// Decides feasibility by a phase-1 simplex with Bland's rule. Feasible
/// problems return a rational point, infeasible ones a Farkas certificate;
/// both are re-verified exactly before returning.
pub fn solve_feasibility(problem: &LpProblem) -> CoreResult<LpVerdict> {
    problem.check_shapes()?;
    let nv = problem.var_names.len();
    let ni = problem.inequalities.len();
    let m = problem.equalities.len() + ni;
    if m == 0 {
        return Ok(LpVerdict::Feasible { point: vec![Rational::zero(); nv] });
    }
    let cols = nv + ni + m; // structural, surplus, artificial
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    // sign[i] = -1 when the original row was negated to make the RHS
    // nonnegative; kind[i] maps tableau row -> original constraint.
    let mut sign: Vec<i32> = Vec::with_capacity(m);
    enum RowKind {
        Eq(usize),
        Ineq(usize),
    }
    let mut kind: Vec<RowKind> = Vec::with_capacity(m);

    for (e, row) in problem.equalities.iter().enumerate() {
        let mut r = vec![Rational::zero(); cols];
        r[..nv].clone_from_slice(&row.coeffs);
        rows.push(r);
        rhs.push(row.rhs.clone());
        sign.push(1);
        kind.push(RowKind::Eq(e));
    }
    for (q, row) in problem.inequalities.iter().enumerate() {
        let mut r = vec![Rational::zero(); cols];
        r[..nv].clone_from_slice(&row.coeffs);
        r[nv + q] = -Rational::one();
        rows.push(r);
        rhs.push(row.rhs.clone());
        sign.push(1);
        kind.push(RowKind::Ineq(q));
    }
    for i in 0..m {
        if rhs[i] < Rational::zero() {
            for c in rows[i].iter_mut() {
                *c = -c.clone();
            }
            rhs[i] = -rhs[i].clone();
            sign[i] = -1;
        }
        rows[i][nv + ni + i] = Rational::one();
    }

    // Reduced-cost row for minimizing the artificial sum, basis = artificials.
    let mut obj = vec![Rational::zero(); cols];
    let mut obj_rhs = Rational::zero();
    for j in 0..nv + ni {
        let mut s = Rational::zero();
        for row in rows.iter() {
            s += &row[j];
        }
        obj[j] = -s;
    }
    for b in &rhs {
        obj_rhs -= b;
    }

    let mut basis: Vec<usize> = (0..m).map(|i| nv + ni + i).collect();
    loop {
        let entering = match (0..cols).find(|&j| obj[j] < Rational::zero()) {
            Some(j) => j,
            None => break,
        };
        let mut leaving: Option<usize> = None;
        let mut best_ratio: Option<Rational> = None;
        for i in 0..m {
            if rows[i][entering] <= Rational::zero() {
                continue;
            }
            let ratio = &rhs[i] / &rows[i][entering];
            let take = match (&best_ratio, &leaving) {
                (None, _) => true,
                (Some(r), Some(l)) => {
                    ratio < *r || (ratio == *r && basis[i] < basis[*l])
                }
                _ => unreachable!(),
            };
            if take {
                best_ratio = Some(ratio);
                leaving = Some(i);
            }
        }
        let pivot_row = leaving.ok_or_else(|| {
            CoreError::Inconsistent("phase-1 objective is unbounded".into())
        })?;

        let pivot = rows[pivot_row][entering].clone();
        for c in rows[pivot_row].iter_mut() {
            *c /= &pivot;
        }
        rhs[pivot_row] /= &pivot;
        for i in 0..m {
            if i == pivot_row || rows[i][entering].is_zero() {
                continue;
            }
            let factor = rows[i][entering].clone();
            for j in 0..cols {
                let delta = &factor * &rows[pivot_row][j];
                rows[i][j] -= delta;
            }
            let delta = &factor * &rhs[pivot_row];
            rhs[i] -= delta;
        }
        if !obj[entering].is_zero() {
            let factor = obj[entering].clone();
            for j in 0..cols {
                let delta = &factor * &rows[pivot_row][j];
                obj[j] -= delta;
            }
            let delta = &factor * &rhs[pivot_row];
            obj_rhs -= delta;
        }
        basis[pivot_row] = entering;
    }

    let value = -obj_rhs.clone();
    if value.is_zero() {
        let mut point = vec![Rational::zero(); nv];
        for (i, &b) in basis.iter().enumerate() {
            if b < nv {
                point[b] = rhs[i].clone();
            }
        }
        if !verify_point(problem, &point) {
            return Err(CoreError::Inconsistent(
                "simplex produced a point that fails exact verification".into(),
            ));
        }
        return Ok(LpVerdict::Feasible { point });
    }

    // Infeasible: duals from the artificial columns, y_i = 1 - reduced_cost.
    let mut eq_multipliers = Vec::new();
    let mut ineq_multipliers = Vec::new();
    for i in 0..m {
        let y = Rational::one() - &obj[nv + ni + i];
        if y.is_zero() {
            continue;
        }
        let scaled = if sign[i] < 0 { -y } else { y };
        match kind[i] {
            RowKind::Eq(e) => eq_multipliers.push((e, scaled)),
            RowKind::Ineq(q) => ineq_multipliers.push((q, scaled)),
        }
    }
    let certificate = FarkasCertificate { eq_multipliers, ineq_multipliers };
    if !verify_certificate(problem, &certificate) {
        return Err(CoreError::Inconsistent(
            "simplex produced a certificate that fails exact verification".into(),
        ));
    }
    Ok(LpVerdict::Infeasible { certificate })
}

/// Assembles the feasibility system for code parameters: variables `A_v >= 0`
/// per sub-multiset, `A_empty = K^2`, the Knill-Laflamme equalities
/// `A_v = K B_v` below the distance (with `A_v = 0` additionally for pure
/// codes), detectability `K B_v >= A_v` elsewhere, and shadow positivity
/// `S_v >= 0`, where `B` and `S` are the exact kernel images of `A`. Rows are
/// scaled by `dim N` to keep coefficients integral.
pub fn build_lp(params: &CodeParams) -> CoreResult<LpProblem> {
    let total = params.spec.multiset();
    let subs = sub_multisets(&total);
    let b_k = b_kernel(&total)?;
    let s_k = shadow_kernel(&total)?;
    let dim = big_to_rational(&params.spec.total_dim());
    let k_rat = big_to_rational(&params.k);
    let d_big = BigUint::from(params.distance);

    let var_names: Vec<String> = subs.iter().map(|v| format!("A[{v}]")).collect();
    let mut problem = LpProblem { var_names, ..Default::default() };

    let unit = |idx: usize| -> Vec<Rational> {
        let mut row = vec![Rational::zero(); subs.len()];
        row[idx] = Rational::one();
        row
    };

    problem.equalities.push(LinearConstraint {
        label: "norm".into(),
        coeffs: unit(0),
        rhs: &k_rat * &k_rat,
    });

    for (v_idx, v) in subs.iter().enumerate() {
        let kb_row: Vec<Rational> = b_k.rows[v_idx]
            .iter()
            .map(|c| &k_rat * c * &dim)
            .collect();
        if v.dim() < d_big {
            let mut coeffs = kb_row;
            coeffs[v_idx] -= &dim;
            for c in coeffs.iter_mut() {
                *c = -c.clone();
            }
            problem.equalities.push(LinearConstraint {
                label: format!("kl[{v}]"),
                coeffs,
                rhs: Rational::zero(),
            });
            if params.pure && !v.is_empty_multiset() {
                problem.equalities.push(LinearConstraint {
                    label: format!("pure[{v}]"),
                    coeffs: unit(v_idx),
                    rhs: Rational::zero(),
                });
            }
        } else {
            let mut coeffs = kb_row;
            coeffs[v_idx] -= &dim;
            problem.inequalities.push(LinearConstraint {
                label: format!("detect[{v}]"),
                coeffs,
                rhs: Rational::zero(),
            });
        }
    }

    for (v_idx, v) in subs.iter().enumerate() {
        let coeffs: Vec<Rational> = s_k.rows[v_idx].iter().map(|c| c * &dim).collect();
        problem.inequalities.push(LinearConstraint {
            label: format!("shadow[{v}]"),
            coeffs,
            rhs: Rational::zero(),
        });
    }

    Ok(problem)
}

/// Builds and solves the feasibility system for the given code parameters.
pub fn code_feasible(params: &CodeParams) -> CoreResult<LpVerdict> {
    solve_feasibility(&build_lp(params)?)
}

fn linear_comb_string(coeffs: &[Rational], names: &[String]) -> String {
    let mut out = String::new();
    for (c, name) in coeffs.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mag = c.abs();
        if mag.is_one() {
            out.push_str(name);
        } else {
            out.push_str(&format!("{}*{}", rational_to_string(&mag), name));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Human-readable rendering of the full system, one constraint per line.
pub fn tableau_text(problem: &LpProblem) -> String {
    let mut out = format!(
        "variables ({}), all >= 0: {}\n",
        problem.var_names.len(),
        problem.var_names.join(" ")
    );
    for row in &problem.equalities {
        out.push_str(&format!(
            "eq   {}: {} = {}\n",
            row.label,
            linear_comb_string(&row.coeffs, &problem.var_names),
            rational_to_string(&row.rhs)
        ));
    }
    for row in &problem.inequalities {
        out.push_str(&format!(
            "ineq {}: {} >= {}\n",
            row.label,
            linear_comb_string(&row.coeffs, &problem.var_names),
            rational_to_string(&row.rhs)
        ));
    }
    out
}
