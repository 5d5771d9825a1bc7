//! Composition of deformations as ambient morphisms and the parameter
//! read-back, used as an oracle for the group laws.

use crate::funcfield::{t, y, ExampleId};
use crate::nilalg::{NilElement, WSeries};
use crate::qgroups::{matrix_mul, qgii_star, qgiii_star, QGIIElement, QGIIIElement, UpperMatrix2};
use crate::qscalar::{Frac, Var};
use crate::report::Check;

use super::{build_deformation, Amb, DeformError, Deformation};

/// Parameters recovered from the images of a composite.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadBack {
    pub e: NilElement,
    pub f: NilElement,
    pub b: Option<WSeries>,
}

/// Images of `ι(t)` and of the series generator (`Y₀` or `ι(y)`) under the
/// composite of `φ₁` followed by `φ₂`.
#[derive(Clone, Debug)]
pub struct Composite {
    pub example: ExampleId,
    pub t: Amb,
    pub series: Option<Amb>,
}

/// Applies `t + W₁ ↦ e₂(t + W₁) + f₂` to the coefficients of `φ₁`, then
/// multiplies (`C_T_TALPHA`) or shifts (`C_T_LOGT`) by `b₂`.
pub fn compose_deformations(phi1: &Deformation, phi2: &Deformation) -> Result<Composite, DeformError> {
    if phi1.example != phi2.example || phi1.trunc != phi2.trunc {
        return Err(DeformError::Precondition("deformations of different shapes".into()));
    }
    let g = &phi2.e;
    let u = g
        .sub(&NilElement::one(g.algebra()))
        .scale(&t())
        .add(&phi2.f);
    if !u.is_nilpotent() {
        return Err(DeformError::Nil(crate::nilalg::NilError::NonNilpotentShift));
    }
    let chi = |x: &Amb| x.map_values(|w| w.subst_w(1, g, &u).expect("nilpotent shift"));
    let ctx = &phi1.ctx;
    let d = phi1.trunc.xdeg;
    let series = match phi1.example {
        ExampleId::CT => None,
        ExampleId::CTTalpha => {
            let y0 = phi1.phi_y0.as_ref().expect("series image");
            let b2 = phi2.b.clone().unwrap_or_else(|| WSeries::one(ctx));
            Some(chi(y0).right_mul(&b2))
        }
        ExampleId::CTLogt => {
            let yy = phi1.phi_y.as_ref().expect("series image");
            let b2 = phi2.b.clone().unwrap_or_else(|| WSeries::zero(ctx));
            Some(chi(yy).add(&Amb::constant(d, b2)))
        }
    };
    Ok(Composite {
        example: phi1.example,
        t: chi(&phi1.phi_t),
        series,
    })
}

/// Reads `(e, f, b)` off the `X⁰` coefficients of a composite.
pub fn read_back(c: &Composite) -> ReadBack {
    let x0 = c.t.closed_coeff(0).scale(&Frac::var_pow(Var::SeqQ, -1));
    let ctx = x0.ctx().clone();
    let e = x0.coeff(1, 0);
    let f = x0.coeff(0, 0).sub(&e.scale(&t()));
    let b = match (c.example, &c.series) {
        (ExampleId::CTTalpha, Some(s)) => Some(s.closed_coeff(0).scale(&Frac::var_pow(Var::SeqS, -1))),
        (ExampleId::CTLogt, Some(s)) => {
            let lam_n = &Frac::var(Var::Lam) * &Frac::var(Var::SeqN);
            let base = WSeries::taylor(&ctx, &y()).add(&WSeries::constant(&ctx, lam_n));
            Some(s.closed_coeff(0).sub(&base))
        }
        _ => None,
    };
    ReadBack { e, f, b }
}

/// Composes `φ₁` and `φ₂`, reads back the parameters and compares them with
/// the group law of `qgroups`; also checks that the composite images are the
/// images of the deformation built from the read-back parameters.
pub fn check_composition_oracle(phi1: &Deformation, phi2: &Deformation) -> Check {
    let ex = phi1.example;
    let name = format!("deform.{ex}.composition_oracle");
    let p = format!("alg={} {}", phi1.e.algebra().name(), phi1.trunc);
    let h = phi1.trunc.horizon;
    let run = || -> Result<Option<String>, String> {
        let comp = compose_deformations(phi1, phi2).map_err(|e| e.to_string())?;
        let rb = read_back(&comp);
        let m1 = UpperMatrix2::new(phi1.e.clone(), phi1.f.clone());
        let m2 = UpperMatrix2::new(phi2.e.clone(), phi2.f.clone());
        let (mat, b) = match ex {
            ExampleId::CT => (matrix_mul(&m1, &m2).map_err(|e| e.to_string())?, None),
            ExampleId::CTTalpha => {
                let x = QGIIElement::new(m1, phi1.b.clone().unwrap(), 1).map_err(|e| e.to_string())?;
                let y = QGIIElement::new(m2, phi2.b.clone().unwrap(), 1).map_err(|e| e.to_string())?;
                let z = qgii_star(&x, &y).map_err(|e| e.to_string())?;
                (z.mat, Some(z.b))
            }
            ExampleId::CTLogt => {
                let x = QGIIIElement::new(m1, phi1.b.clone().unwrap(), 1).map_err(|e| e.to_string())?;
                let y = QGIIIElement::new(m2, phi2.b.clone().unwrap(), 1).map_err(|e| e.to_string())?;
                let z = qgiii_star(&x, &y).map_err(|e| e.to_string())?;
                (z.mat, Some(z.b))
            }
        };
        if rb.e != mat.e || rb.f != mat.f {
            return Ok(Some(format!(
                "matrix read back as ({}, {}), group law gives ({}, {})",
                rb.e, rb.f, mat.e, mat.f
            )));
        }
        if rb.b != b {
            return Ok(Some(format!("series read back as {:?}, group law gives {:?}", rb.b, b)));
        }
        let rebuilt = build_deformation(ex, &rb.e, &rb.f, rb.b.as_ref(), phi1.trunc)
            .map_err(|e| e.to_string())?;
        if let Some(w) = comp.t.diff_witness(&rebuilt.phi_t, h) {
            return Ok(Some(format!("ι(t) image: {w}")));
        }
        let rebuilt_series = match ex {
            ExampleId::CTTalpha => rebuilt.phi_y0.as_ref(),
            _ => rebuilt.phi_y.as_ref(),
        };
        if let (Some(a), Some(b)) = (&comp.series, rebuilt_series) {
            if let Some(w) = a.diff_witness(b, h) {
                return Ok(Some(format!("series image: {w}")));
            }
        }
        Ok(None)
    };
    match run() {
        Ok(w) => Check::from_witness(name, p, w),
        Err(e) => Check::fail(name, p, e),
    }
}
