//! Numeric Macaulay matrix of an instance over a template.

use nalgebra::DMatrix;

use super::template::{MacaulayTemplate, TemplateRow};
use crate::coplanarity::CoplanaritySystem;
use crate::error::{Error, Result};
use crate::poly::Monomial;

/// Coefficient matrix: row `r` holds `multiplier_r · f_r` over the
/// template's DRL-descending column monomials.
#[derive(Debug, Clone)]
pub struct MacaulayMatrix {
    pub matrix: DMatrix<f64>,
    pub columns: Vec<Monomial>,
    pub rows: Vec<TemplateRow>,
}

impl MacaulayMatrix {
    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }
}

pub fn build_macaulay(sys: &CoplanaritySystem, tpl: &MacaulayTemplate) -> Result<MacaulayMatrix> {
    let (nr, nc) = tpl.shape();
    let mut matrix = DMatrix::zeros(nr, nc);
    for (r, row) in tpl.rows().iter().enumerate() {
        for (mono, &c) in sys.polys[row.poly].terms() {
            let prod = mono.mul(&row.multiplier);
            let col = tpl.column_of(&prod).ok_or(Error::TemplateMismatch(prod))?;
            matrix[(r, col)] = c;
        }
    }
    Ok(MacaulayMatrix {
        matrix,
        columns: tpl.columns().to_vec(),
        rows: tpl.rows().to_vec(),
    })
}
