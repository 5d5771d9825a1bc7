//! Generators of the Galois hull inside the ambient twisted series ring and
//! the closure of the generated ring under the ambient operators.

use crate::algebra::CoeffVar;
use crate::funcfield::{t, y, ExampleId, QSDStructure};
use crate::qscalar::{q_pow, Frac, Var};
use crate::report::Check;
use crate::twisted::{universal_hopf, TwistedSeries};

use super::Trunc;

type Ser = TwistedSeries<Frac>;

#[derive(Clone, Debug)]
pub struct GaloisHull {
    pub example: ExampleId,
    /// Named generators, e.g. `Q`, `X`, `(tQ+X)⁻¹`, `∂²Y₀`.
    pub generators: Vec<(String, Ser)>,
    /// Closure identities, each expressing an operator image through the
    /// generators.
    pub checks: Vec<Check>,
}

impl GaloisHull {
    pub fn generator(&self, name: &str) -> Option<&Ser> {
        self.generators.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

fn dt(x: &Ser) -> Ser {
    x.coeff_derive(CoeffVar::T).expect("∂/∂t on field coefficients")
}

fn dy(x: &Ser) -> Ser {
    x.coeff_derive(CoeffVar::Y).expect("∂/∂y on field coefficients")
}

/// The generators of the hull of `example` with their closure checks at the
/// given truncation. Only `ι(t) = tQ + X` is inverted.
pub fn hull_generators(example: ExampleId, trunc: Trunc) -> GaloisHull {
    let d = trunc.xdeg;
    let h = trunc.horizon;
    let one = Frac::one();
    let tag = format!("hull.{example}");
    let p = format!("D={d} H={h}");
    let st = QSDStructure::new(example);
    let qf = q_pow(1);
    let qs = Ser::constant(d, Frac::var(Var::SeqQ));
    let x = Ser::x(d, &one);
    let zero = Ser::constant(d, Frac::zero());
    let unit = Ser::constant(d, one.clone());
    let mut checks = Vec::new();
    let mut cmp = |name: &str, lhs: &Ser, rhs: &Ser| {
        checks.push(Check::from_witness(format!("{tag}.{name}"), p.clone(), lhs.diff_witness(rhs, h)));
    };

    let iota_t = universal_hopf(&t(), &st, d);
    let tq_x = qs.scale(&t()).add(&x);
    cmp("iota_t_is_tq_plus_x", &iota_t, &tq_x);
    cmp("qx_relation", &qs.mul(&x), &x.mul(&qs).scale(&qf));
    cmp("sigma_q", &qs.hat_sigma(), &qs.scale(&qf));
    cmp("sigma_x", &x.hat_sigma(), &x.scale(&qf));
    cmp("theta1_q", &qs.hat_theta(1), &zero);
    cmp("theta1_x", &x.hat_theta(1), &unit);
    cmp("dt_q", &dt(&qs), &zero);
    cmp("dt_x", &dt(&x), &zero);
    cmp("dt_iota_t", &dt(&iota_t), &qs);

    let mut generators = vec![("Q".to_string(), qs.clone()), ("X".to_string(), x.clone())];
    if example != ExampleId::CT {
        let inv = tq_x.invert();
        cmp("sigma_inv_iota_t", &inv.hat_sigma(), &inv.scale(&q_pow(-1)));
        cmp("theta1_inv_iota_t", &inv.hat_theta(1), &inv.mul(&inv).scale(&q_pow(-1).neg()));
        generators.push(("(tQ+X)⁻¹".to_string(), inv.clone()));
        let iota_y = universal_hopf(&y(), &st, d);
        match example {
            ExampleId::CTTalpha => {
                let s = Frac::var(Var::S);
                let y0 = iota_y.scale(&y().inv().expect("y ≠ 0"));
                // Θ̂⁽¹⁾Y₀ = (s − 1)/(q − 1)·Y₀·(tQ+X)⁻¹
                let k = &(&s - &one) / &(&qf - &one);
                let mut base = y0.mul(&inv).scale(&k);
                let mut cur = y0.clone();
                for n in 0..=3u32 {
                    cmp(&format!("sigma_d{n}_y0"), &cur.hat_sigma(), &cur.scale(&s));
                    cmp(&format!("theta1_d{n}_y0"), &cur.hat_theta(1), &base);
                    cmp(&format!("dy_d{n}_y0"), &dy(&cur), &zero);
                    generators.push((format!("∂{n}Y₀"), cur.clone()));
                    cur = dt(&cur);
                    base = dt(&base);
                }
            }
            ExampleId::CTLogt => {
                let lam = Frac::var(Var::Lam);
                cmp("sigma_iota_y", &iota_y.hat_sigma(), &iota_y.add(&Ser::constant(d, lam.clone())));
                let k = &lam / &(&qf - &one);
                cmp("theta1_iota_y", &iota_y.hat_theta(1), &inv.scale(&k));
                cmp("dy_iota_y", &dy(&iota_y), &unit);
                generators.push(("ι(y)".to_string(), iota_y));
            }
            ExampleId::CT => unreachable!(),
        }
    }
    GaloisHull {
        example,
        generators,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hulls_close() {
        let tr = Trunc {
            xdeg: 5,
            horizon: 8,
            wdeg: 2,
            nildeg: 2,
        };
        for ex in ExampleId::ALL {
            let hull = hull_generators(ex, tr);
            for c in &hull.checks {
                assert!(c.passed(), "{}: {:?}", c.name, c.witness);
            }
        }
    }
}
