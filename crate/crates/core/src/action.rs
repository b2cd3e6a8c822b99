//! Representations of a Heisenberg group given by generator images.
//!
//! An action of `H(E)` on `C^D` is fixed by `U(e_i)` and `V(e_i)` for the
//! standard generators of `E` and `Ê`. It is valid when the generators are
//! unitary, have the orders of their cyclic factors, commute within each
//! family, and satisfy `V(χ)U(x) = e^{2πiχ(x)} U(x)V(χ)`. The last relation is
//! the commutation relation with the centre acting by `e^{2πit}`.

use std::sync::OnceLock;

use crate::abelian::{Character, FiniteAbelianGroup, GroupElement};
use crate::error::{Error, Result};
use crate::heisenberg::{CanonicalRep, HeisenbergElement};
use crate::numerics::{diff_max, identity_defect, mat_pow, unitarity_defect, CMatrix, C64};

/// Max-norm tolerance for the defining relations.
pub const RELATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RelationDefect {
    pub relation: String,
    pub defect: f64,
}

#[derive(Debug, Clone)]
struct PowerTable {
    translations: Vec<Vec<CMatrix>>,
    modulations: Vec<Vec<CMatrix>>,
}

#[derive(Debug, Clone)]
pub struct HeisenbergAction {
    group: FiniteAbelianGroup,
    dim: usize,
    translations: Vec<CMatrix>,
    modulations: Vec<CMatrix>,
    powers: OnceLock<PowerTable>,
}

impl HeisenbergAction {
    /// Builds and validates an action; a violated relation is reported as
    /// [`Error::Hypothesis`] naming it.
    pub fn new(
        group: FiniteAbelianGroup,
        translations: Vec<CMatrix>,
        modulations: Vec<CMatrix>,
    ) -> Result<Self> {
        let action = Self::new_unchecked(group, translations, modulations)?;
        action.validate(RELATION_TOL)?;
        Ok(action)
    }

    /// Shape checks only; used for negative controls.
    pub fn new_unchecked(
        group: FiniteAbelianGroup,
        translations: Vec<CMatrix>,
        modulations: Vec<CMatrix>,
    ) -> Result<Self> {
        let rank = group.rank();
        if translations.len() != rank || modulations.len() != rank {
            return Err(Error::Shape(format!(
                "{} translation and {} modulation generators for a group with {rank} factors",
                translations.len(),
                modulations.len()
            )));
        }
        let dim = translations
            .first()
            .map(|m| m.nrows())
            .unwrap_or(group.size());
        for m in translations.iter().chain(&modulations) {
            if m.shape() != (dim, dim) {
                return Err(Error::Shape(format!(
                    "generator of shape {:?}, expected {dim}x{dim}",
                    m.shape()
                )));
            }
        }
        Ok(HeisenbergAction {
            group,
            dim,
            translations,
            modulations,
            powers: OnceLock::new(),
        })
    }

    /// The canonical action on `L²(E)`.
    pub fn canonical(group: &FiniteAbelianGroup) -> Self {
        let rep = CanonicalRep::new(group.clone());
        let translations = (0..group.rank())
            .map(|i| rep.translation_matrix(&group.unit(i)))
            .collect();
        let modulations = (0..group.rank())
            .map(|i| rep.modulation_matrix(&group.unit(i)))
            .collect();
        Self::new_unchecked(group.clone(), translations, modulations).expect("canonical shapes")
    }

    /// A trivial group acting on `C^dim` (only the centre acts).
    pub fn trivial(dim: usize) -> Self {
        HeisenbergAction {
            group: FiniteAbelianGroup::trivial(),
            dim,
            translations: Vec::new(),
            modulations: Vec::new(),
            powers: OnceLock::new(),
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn translation_generators(&self) -> &[CMatrix] {
        &self.translations
    }

    pub fn modulation_generators(&self) -> &[CMatrix] {
        &self.modulations
    }

    /// Generators labelled `U(e_i)` / `V(e_i)`, translations first.
    pub fn generators(&self) -> Vec<(String, &CMatrix)> {
        let t = self
            .translations
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("U(e_{i})"), m));
        let v = self
            .modulations
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("V(e_{i})"), m));
        t.chain(v).collect()
    }

    fn powers(&self) -> &PowerTable {
        self.powers.get_or_init(|| {
            let table = |gens: &[CMatrix]| -> Vec<Vec<CMatrix>> {
                gens.iter()
                    .zip(self.group.cyclic_orders())
                    .map(|(g, &n)| {
                        let mut out = Vec::with_capacity(n as usize);
                        let mut acc = CMatrix::identity(self.dim, self.dim);
                        for _ in 0..n {
                            out.push(acc.clone());
                            acc = &acc * g;
                        }
                        out
                    })
                    .collect()
            };
            PowerTable {
                translations: table(&self.translations),
                modulations: table(&self.modulations),
            }
        })
    }

    fn product_of_powers(&self, table: &[Vec<CMatrix>], residues: &[u64]) -> CMatrix {
        let mut out: Option<CMatrix> = None;
        for (powers, &r) in table.iter().zip(residues) {
            if r == 0 {
                continue;
            }
            let p = &powers[r as usize];
            out = Some(match out {
                None => p.clone(),
                Some(acc) => acc * p,
            });
        }
        out.unwrap_or_else(|| CMatrix::identity(self.dim, self.dim))
    }

    /// `U(x) = ∏ U(e_i)^{x_i}`.
    pub fn translation(&self, x: &GroupElement) -> CMatrix {
        self.product_of_powers(&self.powers().translations, x.residues())
    }

    /// `V(χ) = ∏ V(e_i)^{χ_i}`.
    pub fn modulation(&self, chi: &Character) -> CMatrix {
        self.product_of_powers(&self.powers().modulations, chi.residues())
    }

    /// `e^{2πit} U(x) V(χ)`.
    pub fn element(&self, h: &HeisenbergElement) -> CMatrix {
        (self.translation(&h.x) * self.modulation(&h.chi)) * h.t.to_complex()
    }

    /// Defect of every defining relation, in a fixed order.
    pub fn relation_defects(&self) -> Vec<RelationDefect> {
        let mut out = Vec::new();
        let orders = self.group.cyclic_orders();
        for (name, g) in self.generators() {
            out.push(RelationDefect {
                relation: format!("{name} unitary"),
                defect: unitarity_defect(g),
            });
        }
        for (family, gens) in [("U", &self.translations), ("V", &self.modulations)] {
            for (i, g) in gens.iter().enumerate() {
                out.push(RelationDefect {
                    relation: format!("{family}(e_{i})^{} = I", orders[i]),
                    defect: identity_defect(&mat_pow(g, orders[i])),
                });
                for (j, h) in gens.iter().enumerate().skip(i + 1) {
                    out.push(RelationDefect {
                        relation: format!(
                            "{family}(e_{i}){family}(e_{j}) = {family}(e_{j}){family}(e_{i})"
                        ),
                        defect: diff_max(&(g * h), &(h * g)),
                    });
                }
            }
        }
        for (j, v) in self.modulations.iter().enumerate() {
            for (i, u) in self.translations.iter().enumerate() {
                let phase = if i == j {
                    crate::numerics::cis_turns(1.0 / orders[i] as f64)
                } else {
                    C64::new(1.0, 0.0)
                };
                let turns = if i == j {
                    format!("1/{}", orders[i])
                } else {
                    "0".into()
                };
                out.push(RelationDefect {
                    relation: format!("V(e_{j})U(e_{i}) = e^{{2πi·{turns}}} U(e_{i})V(e_{j})"),
                    defect: diff_max(&(v * u), &((u * v) * phase)),
                });
            }
        }
        out
    }

    /// First relation whose defect exceeds `tol`, as a hypothesis violation.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for m in self.translations.iter().chain(&self.modulations) {
            crate::numerics::check_finite(m, "generator")?;
        }
        match self
            .relation_defects()
            .into_iter()
            .find(|r| r.defect.is_nan() || r.defect > tol)
        {
            Some(r) => Err(Error::Hypothesis(format!(
                "relation `{}` violated (defect {:.3e} > {tol:.1e})",
                r.relation, r.defect
            ))),
            None => Ok(()),
        }
    }

    pub fn max_relation_defect(&self) -> f64 {
        self.relation_defects()
            .iter()
            .fold(0.0, |m, r| m.max(r.defect))
    }

    fn map_generators(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let translations: Vec<CMatrix> = self.translations.iter().map(&f).collect();
        let modulations: Vec<CMatrix> = self.modulations.iter().map(&f).collect();
        let dim = translations.first().map(|m| m.nrows()).unwrap_or(self.dim);
        HeisenbergAction {
            group: self.group.clone(),
            dim,
            translations,
            modulations,
            powers: OnceLock::new(),
        }
    }

    /// Block-diagonal sum `ρ ⊕ σ`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::Shape(
                "direct sum of actions of different groups".into(),
            ));
        }
        let d1 = self.dim;
        let d = d1 + other.dim;
        let block = |a: &CMatrix, b: &CMatrix| {
            let mut m = CMatrix::zeros(d, d);
            m.view_mut((0, 0), (d1, d1)).copy_from(a);
            m.view_mut((d1, d1), (other.dim, other.dim)).copy_from(b);
            m
        };
        let translations = self
            .translations
            .iter()
            .zip(&other.translations)
            .map(|(a, b)| block(a, b))
            .collect();
        let modulations = self
            .modulations
            .iter()
            .zip(&other.modulations)
            .map(|(a, b)| block(a, b))
            .collect();
        Ok(HeisenbergAction {
            group: self.group.clone(),
            dim: d,
            translations,
            modulations,
            powers: OnceLock::new(),
        })
    }

    /// `m`-fold direct sum.
    pub fn copies(&self, m: usize) -> Self {
        assert!(m >= 1, "need at least one copy");
        let mut out = self.clone();
        for _ in 1..m {
            out = out.direct_sum(self).expect("same group");
        }
        out
    }

    /// `g ↦ X g X*` for unitary `X`.
    pub fn conjugate(&self, x: &CMatrix) -> Self {
        let xa = x.adjoint();
        self.map_generators(|g| x * g * &xa)
    }

    /// Compression `g ↦ B* g B` onto an invariant subspace with orthonormal
    /// basis `B`.
    pub fn restrict(&self, basis: &CMatrix) -> Self {
        let ba = basis.adjoint();
        let mut out = self.map_generators(|g| &ba * g * basis);
        out.dim = basis.ncols();
        out
    }

    /// The action of the sub-Heisenberg group on the cyclic factors in `range`
    /// (same Hilbert space).
    pub fn factor_action(&self, range: std::ops::Range<usize>) -> Self {
        let orders = self.group.cyclic_orders()[range.clone()].to_vec();
        HeisenbergAction {
            group: FiniteAbelianGroup::new(orders).expect("sub-product of a valid group"),
            dim: self.dim,
            translations: self.translations[range.clone()].to_vec(),
            modulations: self.modulations[range].to_vec(),
            powers: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::HeisenbergGroup;
    use crate::numerics::{haar_random_unitary, seeded_rng};

    #[test]
    fn canonical_action_is_valid_and_matches_matrices() {
        let g = FiniteAbelianGroup::new(vec![4, 2]).unwrap();
        let action = HeisenbergAction::canonical(&g);
        action.validate(RELATION_TOL).unwrap();
        let rep = CanonicalRep::new(g.clone());
        let h = HeisenbergGroup::new(g);
        let mut rng = seeded_rng(1);
        for _ in 0..20 {
            let e = h.random(&mut rng);
            assert!(diff_max(&action.element(&e), &rep.heisenberg_matrix(&e)) < 1e-12);
        }
    }

    #[test]
    fn conjugated_copies_stay_valid() {
        let g = FiniteAbelianGroup::new(vec![3]).unwrap();
        let x = haar_random_unitary(6, 5);
        let action = HeisenbergAction::canonical(&g).copies(2).conjugate(&x);
        assert_eq!(action.dim(), 6);
        action.validate(RELATION_TOL).unwrap();
    }

    #[test]
    fn identity_modulations_violate_commutation() {
        let g = FiniteAbelianGroup::new(vec![4]).unwrap();
        let c = HeisenbergAction::canonical(&g);
        let err = HeisenbergAction::new(
            g,
            c.translation_generators().to_vec(),
            vec![CMatrix::identity(4, 4)],
        )
        .unwrap_err();
        match err {
            Error::Hypothesis(msg) => assert!(msg.contains("V(e_0)U(e_0)"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        let g = FiniteAbelianGroup::new(vec![2]).unwrap();
        assert!(HeisenbergAction::new_unchecked(g.clone(), vec![], vec![]).is_err());
        assert!(HeisenbergAction::new_unchecked(
            g,
            vec![CMatrix::identity(2, 2)],
            vec![CMatrix::identity(3, 3)]
        )
        .is_err());
    }
}
