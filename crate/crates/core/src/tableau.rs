//! Double Butcher tableaux for IMEX Runge-Kutta schemes and a checker for
//! their structure and classical/coupling order conditions up to order 3.

use crate::error::{Error, Result};

/// Paired explicit (`A~, b~, c~`) and diagonally implicit (`A, b, c`) tableaux.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleButcherTableau {
    pub name: &'static str,
    pub order: usize,
    pub stages: usize,
    /// Row-major `s x s`, strictly lower triangular.
    pub a_exp: Vec<f64>,
    pub b_exp: Vec<f64>,
    pub c_exp: Vec<f64>,
    /// Row-major `s x s`, lower triangular.
    pub a_imp: Vec<f64>,
    pub b_imp: Vec<f64>,
    pub c_imp: Vec<f64>,
}

pub const TABLEAU_NAMES: [&str; 3] = ["SSP3-IMEX(4,3,3)", "BPR(3,4,3)", "ARS-111"];

fn row_sums(a: &[f64], s: usize) -> Vec<f64> {
    (0..s).map(|i| a[i * s..(i + 1) * s].iter().sum()).collect()
}

impl DoubleButcherTableau {
    fn from_matrices(name: &'static str, order: usize, a_exp: Vec<f64>, b_exp: Vec<f64>, a_imp: Vec<f64>, b_imp: Vec<f64>) -> Self {
        let s = b_exp.len();
        DoubleButcherTableau {
            name,
            order,
            stages: s,
            c_exp: row_sums(&a_exp, s),
            c_imp: row_sums(&a_imp, s),
            a_exp,
            b_exp,
            a_imp,
            b_imp,
        }
    }

    #[inline]
    pub fn ae(&self, i: usize, j: usize) -> f64 {
        self.a_exp[i * self.stages + j]
    }

    #[inline]
    pub fn ai(&self, i: usize, j: usize) -> f64 {
        self.a_imp[i * self.stages + j]
    }

    /// Forward-backward Euler pair, first order.
    pub fn ars111() -> Self {
        Self::from_matrices(
            "ARS-111",
            1,
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0],
        )
    }

    /// SSP3-IMEX(4,3,3) of Pareschi & Russo (J. Sci. Comput. 2005): third-order
    /// SSP explicit part with an L-stable DIRK implicit part.
    pub fn ssp3_433() -> Self {
        let alpha = 0.241_694_260_788_21;
        let beta = 0.060_423_565_197_05;
        let eta = 0.129_152_869_605_90;
        #[rustfmt::skip]
        let a_exp = vec![
            0.0, 0.0,  0.0,  0.0,
            0.0, 0.0,  0.0,  0.0,
            0.0, 1.0,  0.0,  0.0,
            0.0, 0.25, 0.25, 0.0,
        ];
        #[rustfmt::skip]
        let a_imp = vec![
            alpha,  0.0,         0.0,                       0.0,
            -alpha, alpha,       0.0,                       0.0,
            0.0,    1.0 - alpha, alpha,                     0.0,
            beta,   eta,         0.5 - beta - eta - alpha,  alpha,
        ];
        let b = vec![0.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0];
        Self::from_matrices("SSP3-IMEX(4,3,3)", 3, a_exp, b.clone(), a_imp, b)
    }

    /// BPR(3,4,3) of Boscarino, Pareschi & Russo (SIAM J. Sci. Comput. 2013):
    /// globally stiffly accurate, implicit diagonal 1/2, explicit first stage.
    pub fn bpr_343() -> Self {
        #[rustfmt::skip]
        let a_exp = vec![
            0.0,       0.0,       0.0,       0.0, 0.0,
            1.0,       0.0,       0.0,       0.0, 0.0,
            4.0 / 9.0, 2.0 / 9.0, 0.0,       0.0, 0.0,
            0.25,      0.0,       0.75,      0.0, 0.0,
            0.25,      0.0,       0.75,      0.0, 0.0,
        ];
        #[rustfmt::skip]
        let a_imp = vec![
            0.0,         0.0,        0.0,  0.0,  0.0,
            0.5,         0.5,        0.0,  0.0,  0.0,
            5.0 / 18.0,  -1.0 / 9.0, 0.5,  0.0,  0.0,
            0.5,         0.0,        0.0,  0.5,  0.0,
            0.25,        0.0,        0.75, -0.5, 0.5,
        ];
        let b_exp = vec![0.25, 0.0, 0.75, 0.0, 0.0];
        let b_imp = vec![0.25, 0.0, 0.75, -0.5, 0.5];
        Self::from_matrices("BPR(3,4,3)", 3, a_exp, b_exp, a_imp, b_imp)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let tab = match key.as_str() {
            "ssp3imex433" | "ssp3433" => Self::ssp3_433(),
            "bpr343" => Self::bpr_343(),
            "ars111" => Self::ars111(),
            _ => return Err(Error::UnknownTableau(name.to_string())),
        };
        let report = tab.verify_structure();
        if !report.passed() {
            return Err(Error::Config(format!(
                "tableau {} failed structural checks: {:?}",
                tab.name, report.violations
            )));
        }
        Ok(tab)
    }

    pub fn all() -> Vec<Self> {
        TABLEAU_NAMES.iter().map(|n| Self::by_name(n).expect("registry tableau")).collect()
    }

    /// Structural invariants: triangularity, node consistency, weight sums.
    pub fn verify_structure(&self) -> OrderReport {
        let s = self.stages;
        let mut report = OrderReport::new(self.name, 0);
        let tri_exp = (0..s).all(|i| (i..s).all(|j| self.ae(i, j) == 0.0));
        let tri_imp = (0..s).all(|i| (i + 1..s).all(|j| self.ai(i, j) == 0.0));
        report.check_bool("explicit A strictly lower triangular", tri_exp);
        report.check_bool("implicit A lower triangular", tri_imp);
        for i in 0..s {
            let ce: f64 = (0..i).map(|j| self.ae(i, j)).sum();
            let ci: f64 = (0..=i).map(|j| self.ai(i, j)).sum();
            report.check(&format!("c~_{} = row sum", i + 1), self.c_exp[i], ce);
            report.check(&format!("c_{} = row sum", i + 1), self.c_imp[i], ci);
        }
        report.check("sum b~ = 1", self.b_exp.iter().sum(), 1.0);
        report.check("sum b = 1", self.b_imp.iter().sum(), 1.0);
        report.check_bool("implicit diagonal non-negative", (0..s).all(|i| self.ai(i, i) >= 0.0));
        report
    }

    /// Classical conditions for each part and IMEX coupling conditions up to order `p <= 3`.
    pub fn verify_order(&self, p: usize) -> OrderReport {
        let mut report = self.verify_structure();
        report.order = p;
        let s = self.stages;
        let parts: [(&str, &[f64], &[f64], &[f64]); 2] = [
            ("~", &self.a_exp, &self.b_exp, &self.c_exp),
            ("", &self.a_imp, &self.b_imp, &self.c_imp),
        ];
        let dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(a, b)| a * b).sum() };
        let mat_vec = |a: &[f64], v: &[f64]| -> Vec<f64> {
            (0..s).map(|i| (0..s).map(|j| a[i * s + j] * v[j]).sum()).collect()
        };
        if p >= 2 {
            for (nb, _, b, _) in parts {
                for (nc, _, _, c) in parts {
                    report.check(&format!("b{nb}.c{nc} = 1/2"), dot(b, c), 0.5);
                }
            }
        }
        if p >= 3 {
            for (nb, _, b, _) in parts {
                for (nc1, _, _, c1) in parts {
                    for (nc2, _, _, c2) in parts {
                        let bcc: f64 = (0..s).map(|i| b[i] * c1[i] * c2[i]).sum();
                        report.check(&format!("b{nb}.(c{nc1} c{nc2}) = 1/3"), bcc, 1.0 / 3.0);
                    }
                }
                for (na, a, _, _) in parts {
                    for (nc, _, _, c) in parts {
                        let v = dot(b, &mat_vec(a, c));
                        report.check(&format!("b{nb}.A{na}.c{nc} = 1/6"), v, 1.0 / 6.0);
                    }
                }
            }
        }
        if p > 3 {
            report
                .violations
                .push(format!("order {p} conditions are not implemented (max 3)"));
        }
        report
    }

    /// Stiffly accurate implicit part: last row of `A` equals `b`.
    pub fn implicit_stiffly_accurate(&self) -> bool {
        let s = self.stages;
        (0..s).all(|j| (self.ai(s - 1, j) - self.b_imp[j]).abs() < 1e-15)
    }
}

pub const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub name: &'static str,
    pub order: usize,
    pub checks: usize,
    pub max_residual: f64,
    pub violations: Vec<String>,
}

impl OrderReport {
    fn new(name: &'static str, order: usize) -> Self {
        OrderReport {
            name,
            order,
            checks: 0,
            max_residual: 0.0,
            violations: Vec::new(),
        }
    }

    fn check(&mut self, label: &str, value: f64, expected: f64) {
        self.checks += 1;
        let r = (value - expected).abs();
        self.max_residual = self.max_residual.max(r);
        if !(r < ORDER_TOL) {
            self.violations.push(format!("{label}: residual {r:.3e}"));
        }
    }

    fn check_bool(&mut self, label: &str, ok: bool) {
        self.checks += 1;
        if !ok {
            self.violations.push(label.to_string());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_tableaux_pass_their_order() {
        for tab in DoubleButcherTableau::all() {
            let r = tab.verify_order(tab.order);
            assert!(r.passed(), "{}: {:?}", tab.name, r.violations);
            assert!(r.max_residual < 1e-12);
        }
    }

    #[test]
    fn stage_counts() {
        assert_eq!(DoubleButcherTableau::ssp3_433().stages, 4);
        assert_eq!(DoubleButcherTableau::bpr_343().stages, 5);
        assert!(DoubleButcherTableau::bpr_343().implicit_stiffly_accurate());
    }

    #[test]
    fn ars111_fails_second_order() {
        let t = DoubleButcherTableau::ars111();
        assert!(t.verify_order(1).passed());
        let r = t.verify_order(2);
        assert!(!r.passed());
        assert!(r.violations.iter().any(|v| v.contains("1/2")));
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            DoubleButcherTableau::by_name("RK4"),
            Err(Error::UnknownTableau(_))
        ));
        assert_eq!(DoubleButcherTableau::by_name("ssp3-imex(4,3,3)").unwrap().name, "SSP3-IMEX(4,3,3)");
        assert_eq!(DoubleButcherTableau::by_name("bpr343").unwrap().name, "BPR(3,4,3)");
    }

    #[test]
    fn perturbed_tableau_is_caught() {
        let mut t = DoubleButcherTableau::ssp3_433();
        t.a_imp[3 * 4 + 1] += 1e-6;
        t.c_imp = row_sums(&t.a_imp, 4);
        assert!(!t.verify_order(3).passed());
    }

    /// Explicit part applied to u' = lambda u (source-free) converges at its order.
    #[test]
    fn explicit_part_scalar_ode_order() {
        for tab in [DoubleButcherTableau::ssp3_433(), DoubleButcherTableau::bpr_343()] {
            let lambda = -1.3;
            let err = |n: usize| {
                let h = 1.0 / n as f64;
                let mut y = 1.0;
                for _ in 0..n {
                    let mut k = vec![0.0; tab.stages];
                    for i in 0..tab.stages {
                        let yi = y + h * (0..i).map(|j| tab.ae(i, j) * k[j]).sum::<f64>();
                        k[i] = lambda * yi;
                    }
                    y += h * (0..tab.stages).map(|i| tab.b_exp[i] * k[i]).sum::<f64>();
                }
                (y - lambda.exp()).abs()
            };
            let eoc = (err(20) / err(40)).log2();
            assert!(eoc >= tab.order as f64 - 0.2, "{}: eoc {eoc}", tab.name);
        }
    }

    /// Implicit part applied to u' = lambda u converges at its order.
    #[test]
    fn implicit_part_scalar_ode_order() {
        for tab in [DoubleButcherTableau::ssp3_433(), DoubleButcherTableau::bpr_343()] {
            let lambda = -1.3;
            let err = |n: usize| {
                let h = 1.0 / n as f64;
                let mut y = 1.0;
                for _ in 0..n {
                    let mut k = vec![0.0; tab.stages];
                    for i in 0..tab.stages {
                        let rhs = y + h * (0..i).map(|j| tab.ai(i, j) * k[j]).sum::<f64>();
                        let yi = rhs / (1.0 - h * tab.ai(i, i) * lambda);
                        k[i] = lambda * yi;
                    }
                    y += h * (0..tab.stages).map(|i| tab.b_imp[i] * k[i]).sum::<f64>();
                }
                (y - lambda.exp()).abs()
            };
            let eoc = (err(20) / err(40)).log2();
            assert!(eoc >= tab.order as f64 - 0.2, "{}: eoc {eoc}", tab.name);
        }
    }
}
