//! The Heisenberg group of a finite abelian group `E` and its canonical
//! representation on `L²(E)` (counting measure, basis indexed by elements).

use rand::Rng;
use serde::Serialize;

use crate::abelian::{Character, ElementSubgroup, FiniteAbelianGroup, GroupElement, RationalPhase};
use crate::action::HeisenbergAction;
use crate::error::{Error, Result};
use crate::numerics::{mul_sparse, CMatrix, CVector, C64, ONE, ZERO};

/// `e^{2πit}·T_x·M_χ`, stored as the triple `(t, x, χ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HeisenbergElement {
    pub t: RationalPhase,
    pub x: GroupElement,
    pub chi: Character,
}

/// Group law of `H(E)`:
/// `(t,x,χ)(t′,x′,χ′) = (t + t′ + χ(x′), x + x′, χ + χ′)`.
///
/// The twist follows from `M_χ T_x′ = e^{2πiχ(x′)} T_x′ M_χ`.
#[derive(Debug, Clone)]
pub struct HeisenbergGroup {
    base: FiniteAbelianGroup,
}

impl HeisenbergGroup {
    pub fn new(base: FiniteAbelianGroup) -> Self {
        HeisenbergGroup { base }
    }

    pub fn base(&self) -> &FiniteAbelianGroup {
        &self.base
    }

    pub fn identity(&self) -> HeisenbergElement {
        HeisenbergElement {
            t: RationalPhase::zero(),
            x: self.base.zero(),
            chi: self.base.zero(),
        }
    }

    pub fn central(&self, t: RationalPhase) -> HeisenbergElement {
        HeisenbergElement {
            t,
            ..self.identity()
        }
    }

    pub fn mul(&self, a: &HeisenbergElement, b: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement {
            t: a.t + b.t + self.base.pair(&b.x, &a.chi),
            x: self.base.add(&a.x, &b.x),
            chi: self.base.add(&a.chi, &b.chi),
        }
    }

    pub fn inv(&self, a: &HeisenbergElement) -> HeisenbergElement {
        // (t,x,χ)^{-1} = (−t + χ(x), −x, −χ)
        HeisenbergElement {
            t: -a.t + self.base.pair(&a.x, &a.chi),
            x: self.base.neg(&a.x),
            chi: self.base.neg(&a.chi),
        }
    }

    /// Uniform element with central phase on the `exponent`-th roots.
    pub fn random<R: Rng>(&self, rng: &mut R) -> HeisenbergElement {
        let l = self.base.exponent().max(2);
        let n = self.base.size();
        HeisenbergElement {
            t: RationalPhase::new(rng.random_range(0..l) as i64, l),
            x: self.base.at_index(rng.random_range(0..n)),
            chi: self.base.at_index(rng.random_range(0..n)),
        }
    }
}

/// The canonical representation of `H(E)` on `L²(E)`.
#[derive(Debug, Clone)]
pub struct CanonicalRep {
    group: FiniteAbelianGroup,
}

impl CanonicalRep {
    pub fn new(group: FiniteAbelianGroup) -> Self {
        CanonicalRep { group }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn dimension(&self) -> usize {
        self.group.size()
    }

    /// `T_x f(u) = f(u − x)`: the permutation `e_u ↦ e_{u+x}`.
    pub fn translation_matrix(&self, x: &GroupElement) -> CMatrix {
        let g = &self.group;
        let d = self.dimension();
        let mut m = CMatrix::zeros(d, d);
        for u in g.elements() {
            m[(g.index_of(&g.add(&u, x)), g.index_of(&u))] = ONE;
        }
        m
    }

    /// `M_χ f(u) = e^{2πiχ(u)} f(u)`.
    pub fn modulation_matrix(&self, chi: &Character) -> CMatrix {
        let g = &self.group;
        let diag: Vec<C64> = g.elements().map(|u| g.pair(&u, chi).to_complex()).collect();
        CMatrix::from_diagonal(&CVector::from_vec(diag))
    }

    pub fn heisenberg_matrix(&self, h: &HeisenbergElement) -> CMatrix {
        (self.translation_matrix(&h.x) * self.modulation_matrix(&h.chi)) * h.t.to_complex()
    }

    /// Phase of the group commutator `T_x M_χ T_x^{-1} M_χ^{-1}`, read back
    /// from the matrix as an exact rational with denominator `exp(E)`. The
    /// relation predicts `−χ(x)`.
    pub fn commutator_check(&self, x: &GroupElement, chi: &Character) -> Result<RationalPhase> {
        let g = &self.group;
        let t = self.translation_matrix(x);
        let m = self.modulation_matrix(chi);
        let c = mul_sparse(
            &mul_sparse(&mul_sparse(&t, &m), &self.translation_matrix(&g.neg(x))),
            &self.modulation_matrix(&g.neg(chi)),
        );
        let scalar = c[(0, 0)];
        let d = c.nrows();
        let mut worst = 0.0f64;
        for (k, v) in c.iter().enumerate() {
            // column-major: entry k sits on the diagonal when k = j·(d+1)
            let e = if k % (d + 1) == 0 { v - scalar } else { *v };
            worst = worst.max(e.norm_sqr());
            if e.is_nan() {
                worst = f64::NAN;
                break;
            }
        }
        let defect = worst.sqrt();
        if defect.is_nan() || defect > 1e-10 {
            return Err(Error::Internal(format!(
                "commutator of T_{x} and M_{chi} is not scalar (defect {defect:.3e})"
            )));
        }
        let l = g.exponent();
        let turns = scalar.arg() / (2.0 * std::f64::consts::PI);
        let num = (turns * l as f64).round() as i64;
        let phase = RationalPhase::new(num, l);
        if (phase.to_complex() - scalar).norm() > 1e-10 {
            return Err(Error::Internal(format!(
                "commutator scalar {scalar} is not an exp(E)-th root of unity"
            )));
        }
        Ok(phase)
    }

    /// Unit-normalized indicator of `G`.
    pub fn delta_g(&self, subgroup: &ElementSubgroup) -> CVector {
        let g = &self.group;
        let w = 1.0 / (subgroup.order() as f64).sqrt();
        let mut v = CVector::from_element(self.dimension(), ZERO);
        for x in subgroup.elements() {
            v[g.index_of(x)] = C64::new(w, 0.0);
        }
        v
    }

    pub fn action(&self) -> HeisenbergAction {
        HeisenbergAction::canonical(&self.group)
    }
}
