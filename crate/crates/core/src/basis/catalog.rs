//! Functional-component catalog: which ANOVA terms enter the emulator and
//! discrepancy expansions, and which basis tuples each term keeps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::kl::{EigenScaling, KlBasis};
use super::vars::{input_indices, parameter_indices, validate_variables, VariableSpec};
use crate::error::{CoreError, Result};

/// Categorical main-effect basis function l evaluated at level w, both
/// in 1..=g.
pub fn eval_categorical_basis(l: usize, w: usize, g: usize) -> Result<f64> {
    for (name, v) in [("basis index", l), ("level", w)] {
        if v < 1 || v > g {
            return Err(CoreError::invalid(format!(
                "categorical {name} {v} outside 1..={g}"
            )));
        }
    }
    let gf = g as f64;
    Ok(if w == l { (gf - 1.0) / gf } else { -1.0 / gf })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Constant,
    Main,
    TwoWay,
    ThreeWay,
}

impl ComponentKind {
    pub fn arity(self) -> usize {
        match self {
            ComponentKind::Constant => 0,
            ComponentKind::Main => 1,
            ComponentKind::TwoWay => 2,
            ComponentKind::ThreeWay => 3,
        }
    }
}

/// One functional-ANOVA term with its selected basis tuples.
///
/// `variables` index into the combined (x, t) vector; each entry of
/// `basis_terms` holds one per-variable basis index per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDescriptor {
    pub kind: ComponentKind,
    pub variables: Vec<usize>,
    pub basis_terms: Vec<Vec<usize>>,
}

impl ComponentDescriptor {
    pub fn term_count(&self) -> usize {
        self.basis_terms.len()
    }

    pub fn validate(&self, vars: &[VariableSpec], n_inputs: usize) -> Result<()> {
        if self.variables.len() != self.kind.arity() {
            return Err(CoreError::invalid(format!(
                "{:?} component must reference {} variables, has {}",
                self.kind,
                self.kind.arity(),
                self.variables.len()
            )));
        }
        if !self.variables.windows(2).all(|w| w[0] < w[1]) {
            return Err(CoreError::invalid(
                "component variables must be strictly increasing",
            ));
        }
        if self.variables.iter().any(|&v| v >= vars.len()) {
            return Err(CoreError::invalid("component variable index out of range"));
        }
        if self.kind == ComponentKind::ThreeWay {
            let inputs = self.variables.iter().filter(|&&v| v < n_inputs).count();
            if inputs != 2 {
                return Err(CoreError::invalid(
                    "three-way components must pair two inputs with one parameter",
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.basis_terms {
            if t.len() != self.kind.arity() {
                return Err(CoreError::invalid("basis tuple arity mismatch"));
            }
            if !seen.insert(t.clone()) {
                return Err(CoreError::invalid("duplicate basis tuple in component"));
            }
        }
        Ok(())
    }
}

/// Truncation and interaction policy for catalog construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogPolicy {
    pub grid_size: usize,
    /// Basis functions per continuous main effect.
    pub l_main: usize,
    /// Basis tuples kept per two-way interaction; 0 omits them entirely.
    pub l_two_way: usize,
    /// Basis tuples kept per three-way interaction; 0 omits them entirely.
    pub l_three_way: usize,
    /// Include three-way terms pairing two inputs with one parameter.
    pub three_way: bool,
    pub eigen_scaling: EigenScaling,
}

impl Default for CatalogPolicy {
    fn default() -> Self {
        CatalogPolicy {
            grid_size: KlBasis::DEFAULT_GRID_SIZE,
            l_main: 25,
            l_two_way: 50,
            l_three_way: 100,
            three_way: true,
            eigen_scaling: EigenScaling::default(),
        }
    }
}

/// Candidate basis indices for one variable of an interaction.
fn candidate_indices(var: &VariableSpec, l_main: usize) -> Vec<usize> {
    if var.is_categorical() {
        (1..=var.level_count()).collect()
    } else {
        (1..=l_main).collect()
    }
}

fn index_weight(var: &VariableSpec, kl: &KlBasis, l: usize) -> f64 {
    if var.is_categorical() {
        1.0 / var.level_count() as f64
    } else {
        kl.basis_weight(l)
    }
}

/// Rank the Cartesian product of per-variable basis indices by the
/// product of importance weights and keep the top `budget` tuples; ties
/// break by lexicographic tuple order.
pub fn select_interaction_terms(
    variables: &[usize],
    vars: &[VariableSpec],
    kl: &KlBasis,
    l_main: usize,
    budget: usize,
) -> Result<Vec<Vec<usize>>> {
    if budget < 1 {
        return Err(CoreError::invalid("interaction budget must be at least 1"));
    }
    let mut tuples: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
    for &v in variables {
        let mut next = Vec::with_capacity(tuples.len() * l_main);
        for (tuple, w) in &tuples {
            for idx in candidate_indices(&vars[v], l_main) {
                let mut t = tuple.clone();
                t.push(idx);
                next.push((t, w * index_weight(&vars[v], kl, idx)));
            }
        }
        tuples = next;
    }
    tuples.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    tuples.truncate(budget);
    Ok(tuples.into_iter().map(|(t, _)| t).collect())
}

fn main_effect_terms(var: &VariableSpec, l_main: usize) -> Vec<Vec<usize>> {
    candidate_indices(var, l_main)
        .into_iter()
        .map(|i| vec![i])
        .collect()
}

/// Enumerate emulator components over the combined (x, t) vector:
/// constant, all main effects, all two-way interactions, and (when
/// enabled) three-way terms pairing two inputs with one parameter.
pub fn enumerate_emulator_components(
    vars: &[VariableSpec],
    policy: &CatalogPolicy,
    kl: &KlBasis,
) -> Result<Vec<ComponentDescriptor>> {
    validate_variables(vars)?;
    let mut out = vec![ComponentDescriptor {
        kind: ComponentKind::Constant,
        variables: vec![],
        basis_terms: vec![vec![]],
    }];
    let r = vars.len();
    for v in 0..r {
        out.push(ComponentDescriptor {
            kind: ComponentKind::Main,
            variables: vec![v],
            basis_terms: main_effect_terms(&vars[v], policy.l_main),
        });
    }
    if policy.l_two_way > 0 {
        for a in 0..r {
            for b in (a + 1)..r {
                out.push(ComponentDescriptor {
                    kind: ComponentKind::TwoWay,
                    variables: vec![a, b],
                    basis_terms: select_interaction_terms(
                        &[a, b],
                        vars,
                        kl,
                        policy.l_main,
                        policy.l_two_way,
                    )?,
                });
            }
        }
    }
    if policy.three_way && policy.l_three_way > 0 {
        let inputs = input_indices(vars);
        let params = parameter_indices(vars);
        for i in 0..inputs.len() {
            for j in (i + 1)..inputs.len() {
                for &p in &params {
                    let v = vec![inputs[i], inputs[j], p];
                    out.push(ComponentDescriptor {
                        kind: ComponentKind::ThreeWay,
                        basis_terms: select_interaction_terms(
                            &v,
                            vars,
                            kl,
                            policy.l_main,
                            policy.l_three_way,
                        )?,
                        variables: v,
                    });
                }
            }
        }
    }
    let n_inputs = input_indices(vars).len();
    for c in &out {
        c.validate(vars, n_inputs)?;
    }
    Ok(out)
}

/// Enumerate discrepancy components: constant, main effects, and two-way
/// interactions over the input variables only.
pub fn enumerate_discrepancy_components(
    vars: &[VariableSpec],
    policy: &CatalogPolicy,
    kl: &KlBasis,
) -> Result<Vec<ComponentDescriptor>> {
    validate_variables(vars)?;
    let inputs = input_indices(vars);
    let mut out = vec![ComponentDescriptor {
        kind: ComponentKind::Constant,
        variables: vec![],
        basis_terms: vec![vec![]],
    }];
    for &v in &inputs {
        out.push(ComponentDescriptor {
            kind: ComponentKind::Main,
            variables: vec![v],
            basis_terms: main_effect_terms(&vars[v], policy.l_main),
        });
    }
    if policy.l_two_way > 0 {
        for i in 0..inputs.len() {
            for j in (i + 1)..inputs.len() {
                out.push(ComponentDescriptor {
                    kind: ComponentKind::TwoWay,
                    variables: vec![inputs[i], inputs[j]],
                    basis_terms: select_interaction_terms(
                        &[inputs[i], inputs[j]],
                        vars,
                        kl,
                        policy.l_main,
                        policy.l_two_way,
                    )?,
                });
            }
        }
    }
    Ok(out)
}

/// Immutable bundle of variables, KL basis, and the emulator and
/// discrepancy component catalogs, shared across threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub vars: Vec<VariableSpec>,
    pub policy: CatalogPolicy,
    pub kl: Arc<KlBasis>,
    pub emulator: Vec<ComponentDescriptor>,
    pub discrepancy: Vec<ComponentDescriptor>,
}

impl Catalog {
    pub fn build(vars: Vec<VariableSpec>, policy: CatalogPolicy) -> Result<Self> {
        let kl = Arc::new(KlBasis::build(policy.grid_size, policy.eigen_scaling)?);
        let emulator = enumerate_emulator_components(&vars, &policy, &kl)?;
        let discrepancy = enumerate_discrepancy_components(&vars, &policy, &kl)?;
        Ok(Catalog {
            vars,
            policy,
            kl,
            emulator,
            discrepancy,
        })
    }

    pub fn n_inputs(&self) -> usize {
        input_indices(&self.vars).len()
    }

    pub fn n_parameters(&self) -> usize {
        parameter_indices(&self.vars).len()
    }

    /// Total emulator design columns, constant included.
    pub fn emulator_cols(&self) -> usize {
        self.emulator.iter().map(|c| c.term_count()).sum()
    }

    pub fn discrepancy_cols(&self) -> usize {
        self.discrepancy.iter().map(|c| c.term_count()).sum()
    }

    /// Column range of emulator component j within the full design matrix.
    pub fn emulator_range(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.emulator[..j].iter().map(|c| c.term_count()).sum();
        start..start + self.emulator[j].term_count()
    }

    pub fn discrepancy_range(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.discrepancy[..k].iter().map(|c| c.term_count()).sum();
        start..start + self.discrepancy[k].term_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::vars::VarRole;
    use approx::assert_abs_diff_eq;

    fn small_kl() -> KlBasis {
        KlBasis::build(60, EigenScaling::Sqrt).unwrap()
    }

    #[test]
    fn categorical_basis_values() {
        assert_abs_diff_eq!(eval_categorical_basis(1, 1, 2).unwrap(), 0.5);
        assert_abs_diff_eq!(eval_categorical_basis(1, 2, 2).unwrap(), -0.5);
        for g in 2..6 {
            for l in 1..=g {
                let sum: f64 = (1..=g)
                    .map(|w| eval_categorical_basis(l, w, g).unwrap())
                    .sum();
                assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-15);
            }
        }
        assert!(eval_categorical_basis(3, 1, 2).is_err());
    }

    fn bubbling_bed_shape() -> Vec<VariableSpec> {
        let mut vars = vec![
            VariableSpec::continuous("x1", 5.5, 16.1, VarRole::Input),
            VariableSpec::continuous("x2", -90.0, 90.0, VarRole::Input),
        ];
        for q in 1..=5 {
            vars.push(VariableSpec::continuous(
                &format!("t{q}"),
                0.0,
                1.0,
                VarRole::Parameter,
            ));
        }
        vars.push(VariableSpec::categorical(
            "t6",
            &["a", "b", "c"],
            VarRole::Parameter,
        ));
        vars
    }

    #[test]
    fn component_count_full_model() {
        // P=2, Q=6: constant + 8 mains + 28 two-ways + 6 three-ways = 43.
        let kl = small_kl();
        let policy = CatalogPolicy::default();
        let comps = enumerate_emulator_components(&bubbling_bed_shape(), &policy, &kl).unwrap();
        assert_eq!(comps.len(), 43);
    }

    #[test]
    fn component_enumeration_two_vars() {
        let kl = small_kl();
        let vars = vec![
            VariableSpec::continuous("x1", 0.0, 1.0, VarRole::Input),
            VariableSpec::continuous("t1", 0.0, 1.0, VarRole::Parameter),
        ];
        let policy = CatalogPolicy {
            three_way: false,
            ..CatalogPolicy::default()
        };
        let comps = enumerate_emulator_components(&vars, &policy, &kl).unwrap();
        let kinds: Vec<ComponentKind> = comps.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ComponentKind::Constant,
                ComponentKind::Main,
                ComponentKind::Main,
                ComponentKind::TwoWay
            ]
        );
    }

    #[test]
    fn discrepancy_uses_inputs_only() {
        let kl = small_kl();
        let policy = CatalogPolicy::default();
        let comps = enumerate_discrepancy_components(&bubbling_bed_shape(), &policy, &kl).unwrap();
        // constant, x1, x2, x1*x2
        assert_eq!(comps.len(), 4);
        assert!(comps.iter().all(|c| c.variables.iter().all(|&v| v < 2)));
    }

    #[test]
    fn interaction_selection_leading_pair() {
        let kl = small_kl();
        let vars = vec![
            VariableSpec::continuous("a", 0.0, 1.0, VarRole::Input),
            VariableSpec::continuous("b", 0.0, 1.0, VarRole::Input),
        ];
        let picked = select_interaction_terms(&[0, 1], &vars, &kl, 25, 1).unwrap();
        assert_eq!(picked, vec![vec![1, 1]]);
    }

    #[test]
    fn interaction_selection_categorical_cross() {
        let kl = small_kl();
        let vars = vec![
            VariableSpec::categorical("g", &["a", "b", "c"], VarRole::Input),
            VariableSpec::continuous("u", 0.0, 1.0, VarRole::Input),
        ];
        // Budget 3G: all 3 levels crossed with the top 3 continuous bases.
        let picked = select_interaction_terms(&[0, 1], &vars, &kl, 25, 9).unwrap();
        assert_eq!(picked.len(), 9);
        for level in 1..=3 {
            for b in 1..=3 {
                assert!(picked.contains(&vec![level, b]), "missing ({level},{b})");
            }
        }
    }

    #[test]
    fn interaction_selection_exhaustive() {
        let kl = small_kl();
        let vars = vec![
            VariableSpec::continuous("a", 0.0, 1.0, VarRole::Input),
            VariableSpec::continuous("b", 0.0, 1.0, VarRole::Input),
        ];
        let picked = select_interaction_terms(&[0, 1], &vars, &kl, 4, 100).unwrap();
        assert_eq!(picked.len(), 16);
        let unique: std::collections::HashSet<_> = picked.iter().collect();
        assert_eq!(unique.len(), 16);
    }

    #[test]
    fn catalog_column_ranges_partition() {
        let vars = bubbling_bed_shape();
        let policy = CatalogPolicy {
            grid_size: 60,
            l_main: 5,
            l_two_way: 6,
            l_three_way: 8,
            ..CatalogPolicy::default()
        };
        let cat = Catalog::build(vars, policy).unwrap();
        let mut next = 0;
        for j in 0..cat.emulator.len() {
            let r = cat.emulator_range(j);
            assert_eq!(r.start, next);
            next = r.end;
        }
        assert_eq!(next, cat.emulator_cols());
    }
}
