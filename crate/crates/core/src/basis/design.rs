//! Design-matrix assembly: rows are points, columns are the basis terms
//! of all components in catalog order.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::catalog::{eval_categorical_basis, Catalog, ComponentDescriptor};
use super::kl::KlBasis;
use super::vars::VariableSpec;
use crate::error::{CoreError, Result};

/// One basis term (a tuple of per-variable basis indices) evaluated at a
/// point in unit coordinates. Categorical coordinates carry the 1-based
/// level as a float.
pub fn eval_term(
    component: &ComponentDescriptor,
    tuple: &[usize],
    point: &[f64],
    vars: &[VariableSpec],
    kl: &KlBasis,
) -> Result<f64> {
    let mut acc = 1.0;
    for (&v, &l) in component.variables.iter().zip(tuple) {
        let var = vars.get(v).ok_or_else(|| {
            CoreError::invalid(format!("component references variable {v} beyond spec"))
        })?;
        let coord = *point.get(v).ok_or_else(|| {
            CoreError::invalid(format!(
                "point of dimension {} lacks coordinate {v}",
                point.len()
            ))
        })?;
        acc *= if var.is_categorical() {
            let level = coord.round() as usize;
            eval_categorical_basis(l, level, var.level_count())?
        } else {
            kl.eval_main(l, coord)?
        };
    }
    Ok(acc)
}

/// One design-matrix row over all components in catalog order.
pub fn design_row(
    point: &[f64],
    components: &[ComponentDescriptor],
    vars: &[VariableSpec],
    kl: &KlBasis,
) -> Result<DVector<f64>> {
    let cols: usize = components.iter().map(|c| c.term_count()).sum();
    let mut row = DVector::zeros(cols);
    let mut col = 0;
    for comp in components {
        for tuple in &comp.basis_terms {
            row[col] = eval_term(comp, tuple, point, vars, kl)?;
            col += 1;
        }
    }
    Ok(row)
}

/// Full design matrix. Pure and deterministic; rows are evaluated in
/// parallel for larger inputs.
pub fn design_matrix(
    points: &[Vec<f64>],
    components: &[ComponentDescriptor],
    vars: &[VariableSpec],
    kl: &KlBasis,
) -> Result<DMatrix<f64>> {
    let cols: usize = components.iter().map(|c| c.term_count()).sum();
    let rows: Vec<DVector<f64>> = if points.len() >= 64 {
        points
            .par_iter()
            .map(|p| design_row(p, components, vars, kl))
            .collect::<Result<_>>()?
    } else {
        points
            .iter()
            .map(|p| design_row(p, components, vars, kl))
            .collect::<Result<_>>()?
    };
    let mut out = DMatrix::zeros(points.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        out.row_mut(i).copy_from(&r.transpose());
    }
    Ok(out)
}

impl Catalog {
    pub fn emulator_design(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        design_matrix(points, &self.emulator, &self.vars, &self.kl)
    }

    pub fn discrepancy_design(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        design_matrix(points, &self.discrepancy, &self.vars, &self.kl)
    }

    pub fn emulator_row(&self, point: &[f64]) -> Result<DVector<f64>> {
        design_row(point, &self.emulator, &self.vars, &self.kl)
    }

    pub fn discrepancy_row(&self, point: &[f64]) -> Result<DVector<f64>> {
        design_row(point, &self.discrepancy, &self.vars, &self.kl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::catalog::{CatalogPolicy, ComponentKind};
    use crate::basis::vars::VarRole;
    use approx::assert_abs_diff_eq;

    fn two_var_catalog() -> Catalog {
        let vars = vec![
            VariableSpec::continuous("x1", 0.0, 1.0, VarRole::Input),
            VariableSpec::continuous("t1", 0.0, 1.0, VarRole::Parameter),
        ];
        let policy = CatalogPolicy {
            grid_size: 60,
            l_main: 4,
            l_two_way: 16,
            three_way: false,
            ..CatalogPolicy::default()
        };
        Catalog::build(vars, policy).unwrap()
    }

    #[test]
    fn constant_only_row() {
        let cat = two_var_catalog();
        let comps = vec![ComponentDescriptor {
            kind: ComponentKind::Constant,
            variables: vec![],
            basis_terms: vec![vec![]],
        }];
        let m = design_matrix(&[vec![0.3, 0.8]], &comps, &cat.vars, &cat.kl).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert_abs_diff_eq!(m[(0, 0)], 1.0);
    }

    #[test]
    fn column_count_matches_catalog() {
        let cat = two_var_catalog();
        let pts = vec![vec![0.1, 0.9], vec![0.4, 0.2]];
        let m = cat.emulator_design(&pts).unwrap();
        assert_eq!(m.ncols(), cat.emulator_cols());
        assert_eq!(m.ncols(), 1 + 4 + 4 + 16);
    }

    #[test]
    fn two_way_column_is_product_of_mains() {
        let cat = two_var_catalog();
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![i as f64 / 11.0, (11 - i) as f64 / 11.0])
            .collect();
        let m = cat.emulator_design(&pts).unwrap();
        // Locate the two-way component and one of its tuples.
        let j_two = cat
            .emulator
            .iter()
            .position(|c| c.kind == ComponentKind::TwoWay)
            .unwrap();
        let range = cat.emulator_range(j_two);
        for (ti, tuple) in cat.emulator[j_two].basis_terms.iter().enumerate() {
            for (pi, p) in pts.iter().enumerate() {
                let expect = cat.kl.eval_main(tuple[0], p[0]).unwrap()
                    * cat.kl.eval_main(tuple[1], p[1]).unwrap();
                assert_abs_diff_eq!(m[(pi, range.start + ti)], expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let cat = two_var_catalog();
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|i| vec![(i % 10) as f64 / 9.0, (i / 10) as f64 / 9.0])
            .collect();
        let a = cat.emulator_design(&pts).unwrap();
        let b = cat.emulator_design(&pts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let cat = two_var_catalog();
        assert!(cat.emulator_design(&[vec![0.5]]).is_err());
    }
}
