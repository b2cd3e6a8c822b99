//! Verification suites and their machine-readable reports.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::{
    annihilator, annihilator_of_characters, quotient_group, verify_double_dual, ElementSubgroup,
    FiniteAbelianGroup, Subgroup,
};
use crate::action::{HeisenbergAction, RELATION_TOL};
use crate::error::{Error, Result};
use crate::heisenberg::CanonicalRep;
use crate::intertwiner::{commutant_dimension, synthesize_intertwiners};
use crate::numerics::{
    cis_turns, haar_random_unitary, inner, matrix_to_csv, random_vector, seeded_rng, CMatrix, C64,
};
use crate::peter_weyl::{decompose, verify_subspace_permutation, PERMUTATION_TOL, STRUCTURE_TOL};
use crate::product::{
    block_decompose, combined_intertwiner, cross_commutation_defect, orbit_span, ProductModel,
    PRODUCT_RELATION_TOL,
};
use crate::weyl::{
    eq2_check, faithfulness_probe, fourier_wigner, fourier_wigner_midpoint, gaussian,
    gaussian_projector_symbol, gaussian_symbol, grid_tolerance, real_intertwiner_synth,
    shifted_symbol, twisted_convolution, twisted_convolution_via_operators, weyl_operator,
    weyl_quantize, GridAction, GridSpec, PhasePoint, PhaseSpaceFunction, GRID_RELATION_TOL,
    REAL_TOL,
};

/// Tolerance for identities that hold exactly on the grid.
pub const GRID_EXACT_TOL: f64 = 1e-10;

/// Largest representation dimension for which the doubled fixtures are run.
pub const MAX_FIXTURE_DIM: usize = 512;

/// The same limit for actions of the grid Heisenberg group, whose synthesis
/// fits over all `N^{2n}` window points.
pub const MAX_GRID_FIXTURE_DIM: usize = 256;

/// Orders above this are sampled rather than enumerated in the commutation check.
pub const EXHAUSTIVE_COMMUTATION_ORDER: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub metric_value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// `pass` is `metric ≤ tolerance`, so a NaN metric fails.
    pub fn new(check_id: impl Into<String>, metric_value: f64, tolerance: f64) -> Self {
        CheckRecord {
            check_id: check_id.into(),
            metric_value,
            tolerance,
            pass: metric_value <= tolerance,
        }
    }

    /// An exact count check: metric `|found − expected|`, tolerance 0.
    pub fn count(check_id: impl Into<String>, found: usize, expected: usize) -> Self {
        Self::new(check_id, found.abs_diff(expected) as f64, 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub seed: u64,
    pub grid: Option<GridSpec>,
    pub group: Option<String>,
    pub subgroup: Option<String>,
}

/// A named CSV export (matrix or phase-space grid).
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub environment: Environment,
    pub records: Vec<CheckRecord>,
    pub pass: bool,
    pub details: Value,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl VerificationReport {
    fn new(suite: &str, environment: Environment) -> Self {
        VerificationReport {
            suite: suite.into(),
            environment,
            records: Vec::new(),
            pass: true,
            details: json!({}),
            artifacts: Vec::new(),
        }
    }

    fn push(&mut self, record: CheckRecord) {
        self.pass &= record.pass;
        self.records.push(record);
    }

    fn detail(&mut self, key: &str, value: Value) {
        self.details[key] = value;
    }

    fn artifact(&mut self, name: impl Into<String>, csv: String) {
        self.artifacts.push(Artifact {
            name: name.into(),
            csv,
        });
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteOptions {
    pub seed: u64,
    pub include_bases: bool,
    pub csv: bool,
}

pub fn subgroup_spec(sub: &ElementSubgroup) -> String {
    let gens: Vec<String> = sub.generators().iter().map(|g| g.to_string()).collect();
    format!("[{}]", gens.join(","))
}

fn env(seed: u64, grid: Option<GridSpec>, sub: Option<&ElementSubgroup>) -> Environment {
    Environment {
        seed,
        grid,
        group: sub.map(|s| s.parent().to_string()),
        subgroup: sub.map(subgroup_spec),
    }
}

/// A phase factor `e^{iθ}` that is not a root of unity of small order.
fn test_phase<R: Rng>(rng: &mut R) -> C64 {
    cis_turns(rng.random_range(0.05..0.95))
}

/// Commutation, eigenspaces, transitivity, commutant, synthesis and
/// uniqueness on the canonical representation of `E`.
pub fn verify_finite(subgroup: &ElementSubgroup, opts: SuiteOptions) -> Result<VerificationReport> {
    let group = subgroup.parent().clone();
    let mut report = VerificationReport::new("verify-finite", env(opts.seed, None, Some(subgroup)));
    let mut rng = seeded_rng(opts.seed);
    let rep = CanonicalRep::new(group.clone());
    let rho = rep.action();

    report.push(CheckRecord::new(
        "relations.canonical",
        rho.max_relation_defect(),
        RELATION_TOL,
    ));

    let n = group.size();
    let pairs: Vec<(usize, usize)> = if n <= EXHAUSTIVE_COMMUTATION_ORDER {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    } else {
        (0..1000)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect()
    };
    let mut mismatches = 0;
    for &(i, j) in &pairs {
        let x = group.at_index(i);
        let chi = group.at_index(j);
        if rep.commutator_check(&x, &chi)? != -group.pair(&x, &chi) {
            mismatches += 1;
        }
    }
    report.push(CheckRecord::count("commutation.exact_phase", mismatches, 0));
    report.detail("commutation_pairs", json!(pairs.len()));

    let dec = decompose(&rho, subgroup)?;
    // every H_{η,a} is nonzero only because the index action is transitive
    let perm = verify_subspace_permutation(&rho, &dec);
    report.push(CheckRecord::new(
        "permutation.defect",
        perm.max_defect,
        PERMUTATION_TOL,
    ));
    report.push(CheckRecord::count(
        "permutation.transitive",
        perm.orbit_size,
        perm.index_count,
    ));
    report.detail(
        "nonvanishing_depends_on",
        json!("permutation.transitive (checked before the rank checks)"),
    );
    report.push(CheckRecord::count(
        "eigenspaces.count",
        dec.spaces().len(),
        n,
    ));
    let worst_rank = dec
        .ranks()
        .iter()
        .map(|&r| r.abs_diff(1))
        .max()
        .unwrap_or(0);
    report.push(CheckRecord::count("eigenspaces.rank_one", worst_rank, 0));
    report.push(CheckRecord::new(
        "eigenspaces.completeness",
        dec.completeness_defect(),
        STRUCTURE_TOL,
    ));
    report.push(CheckRecord::new(
        "eigenspaces.projectors",
        dec.projector_defect(),
        STRUCTURE_TOL,
    ));
    let delta = rep.delta_g(subgroup);
    let base = &dec.base_space().projector;
    report.push(CheckRecord::new(
        "eigenspaces.base_is_delta_g",
        (base * &delta - &delta).norm(),
        STRUCTURE_TOL,
    ));
    report.detail("eigenspaces", dec.to_json(opts.include_bases));

    let commutant = commutant_dimension(&rho)?;
    report.push(CheckRecord::count(
        "commutant.canonical",
        commutant.dimension,
        1,
    ));
    let doubled = commutant_dimension(&rho.copies(2))?;
    report.push(CheckRecord::count(
        "commutant.double_copy_control",
        doubled.dimension,
        4,
    ));

    let canon = synthesize_intertwiners(&rho, subgroup)?;
    report.push(CheckRecord::count(
        "synthesis.canonical.multiplicity",
        canon.multiplicity,
        1,
    ));
    report.push(CheckRecord::new(
        "synthesis.canonical.defect",
        canon.max_defect(),
        canon.tolerance,
    ));
    report.detail(
        "synthesis_canonical",
        canon.to_json(Some(commutant.dimension)),
    );

    if 2 * n <= MAX_FIXTURE_DIM {
        let x = haar_random_unitary(2 * n, opts.seed);
        let fixture = rho.copies(2).conjugate(&x);
        let dec2 = synthesize_intertwiners(&fixture, subgroup)?;
        report.push(CheckRecord::count(
            "synthesis.fixture.multiplicity",
            dec2.multiplicity,
            2,
        ));
        report.push(CheckRecord::new(
            "synthesis.fixture.defect",
            dec2.max_defect(),
            dec2.tolerance,
        ));

        let c = test_phase(&mut rng);
        let w = &dec2.intertwiners[1] * c;
        let recovered = dec2.uniqueness_scalar(1, &w)?;
        report.push(CheckRecord::new(
            "uniqueness.phase_recovered",
            (recovered - c).norm(),
            crate::intertwiner::UNIQUENESS_TOL,
        ));
        // a non-scalar twist on the model side must be rejected
        if n > 1 {
            let mut twist = CMatrix::identity(n, n);
            twist[(0, 0)] = C64::new(-1.0, 0.0);
            let bad = &dec2.intertwiners[1] * twist;
            let rejected = matches!(dec2.uniqueness_scalar(1, &bad), Err(Error::Uniqueness(_)));
            report.push(CheckRecord::count(
                "uniqueness.negative_control",
                usize::from(!rejected),
                0,
            ));
        }
        report.detail("synthesis_fixture", dec2.to_json(None));
        if opts.csv {
            for (a, w) in dec2.intertwiners.iter().enumerate() {
                report.artifact(format!("fixture_intertwiner_{a}"), matrix_to_csv(w));
            }
        }
    } else {
        report.detail(
            "synthesis_fixture",
            json!("skipped: dimension exceeds fixture limit"),
        );
    }
    Ok(report)
}

/// Gaussian projector, Weyl law, Fourier–Wigner and twisted-convolution
/// identities on the grid, plus synthesis on a conjugated double copy.
pub fn verify_real(grid: &GridSpec, opts: SuiteOptions) -> Result<VerificationReport> {
    grid.require_window()?;
    let mut report = VerificationReport::new("verify-real", env(opts.seed, Some(*grid), None));
    let mut rng = seeded_rng(opts.seed);
    let half = grid.points as i64 / 2;
    let point = |rng: &mut rand_chacha::ChaCha8Rng| {
        PhasePoint::new(
            (0..grid.n).map(|_| rng.random_range(-half..half)).collect(),
            (0..grid.n).map(|_| rng.random_range(-half..half)).collect(),
        )
    };
    let gauss_tol = grid_tolerance(grid, 1e-6);
    report.detail(
        "tolerances",
        json!({
            "gaussian": gauss_tol,
            "relaxed": gauss_tol > 1e-6,
            "grid_exact": GRID_EXACT_TOL,
            "synthesis": REAL_TOL,
        }),
    );
    report.detail("half_width", json!(grid.half_width()));

    let canon = GridAction::canonical(grid);
    report.push(CheckRecord::new(
        "weyl.relations",
        canon.action().max_relation_defect(),
        GRID_RELATION_TOL,
    ));
    let mut law = 0.0f64;
    for _ in 0..16 {
        let (k, l) = (point(&mut rng), point(&mut rng));
        let lhs = weyl_operator(grid, &k)? * weyl_operator(grid, &l)?;
        let rhs = weyl_operator(grid, &k.add(&l))? * grid.half_phase(k.omega_numerator(&l));
        law = law.max(crate::numerics::diff_max(&lhs, &rhs));
    }
    report.push(CheckRecord::new(
        "weyl.composition_law",
        law,
        GRID_EXACT_TOL,
    ));

    let g = gaussian(grid)?;
    let fw = fourier_wigner(grid, &g, &g)?;
    report.push(CheckRecord::new(
        "fourier_wigner.gaussian_analytic",
        fw.sup_distance(&gaussian_symbol(grid))?,
        gauss_tol,
    ));
    report.push(CheckRecord::new(
        "fourier_wigner.midpoint_oracle",
        fourier_wigner_midpoint(grid, &g, &g)?.sup_distance(&fw)?,
        gauss_tol,
    ));
    if opts.csv {
        report.artifact("gaussian_fourier_wigner", fw.to_csv());
    }

    let len = grid.spatial_len();
    let w = grid.spatial_weight();
    let fs: Vec<Vec<C64>> = (0..4)
        .map(|_| random_vector(len, &mut rng).as_slice().to_vec())
        .collect();
    let lhs =
        fourier_wigner(grid, &fs[0], &fs[1])?.inner(&fourier_wigner(grid, &fs[2], &fs[3])?)?;
    let rhs = inner(&fs[0], &fs[2]) * w * inner(&fs[3], &fs[1]) * w;
    report.push(CheckRecord::new(
        "moyal.grid_exact",
        (lhs - rhs).norm() / (1.0 + rhs.norm()),
        GRID_EXACT_TOL,
    ));

    let (phi, symbol) = gaussian_projector_symbol(grid)?;
    let phi_fw = fourier_wigner(grid, &phi, &phi)?;
    report.push(CheckRecord::new(
        "projector.symbol_selfadjoint",
        symbol.star().sup_distance(&symbol)?,
        1e-12,
    ));
    let square = twisted_convolution(&symbol, &symbol)?;
    report.push(CheckRecord::new(
        "projector.idempotent",
        square.sup_distance(&symbol)?,
        GRID_EXACT_TOL,
    ));
    let projector = weyl_quantize(&symbol, &canon)?;
    let mut lemma = 0.0f64;
    for _ in 0..20 {
        let f = random_vector(len, &mut rng);
        let coeff = inner(f.as_slice(), &phi) * w;
        let expect: Vec<C64> = phi.iter().map(|p| p * coeff).collect();
        let got = &projector * &f;
        let err: f64 = got
            .iter()
            .zip(&expect)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        lemma = lemma.max(err / f.norm());
    }
    report.push(CheckRecord::new("projector.lemma", lemma, GRID_EXACT_TOL));

    // 2-D convolutions cost seconds each
    let transport_samples = if grid.n == 1 { 16 } else { 2 };
    let mut transport = 0.0f64;
    let mut routes = 0.0f64;
    for i in 0..transport_samples {
        let k = point(&mut rng);
        let shifted = shifted_symbol(&symbol, &k);
        let lhs = twisted_convolution(&symbol, &shifted)?;
        let rhs = symbol.scale(phi_fw.get(&k));
        transport = transport.max(lhs.sup_distance(&rhs)?);
        if i == 0 {
            routes = twisted_convolution_via_operators(&symbol, &shifted)?.sup_distance(&lhs)?;
        }
    }
    report.push(CheckRecord::new(
        "twisted_convolution.transport",
        transport,
        GRID_EXACT_TOL,
    ));
    report.push(CheckRecord::new(
        "twisted_convolution.operator_route",
        routes,
        GRID_EXACT_TOL,
    ));
    report.detail("transport_samples", json!(transport_samples));

    let faithful = faithfulness_probe(&symbol, &canon)?;
    report.push(CheckRecord::new(
        "faithfulness.gaussian",
        faithful.empirical_constant,
        faithful.bound_constant,
    ));
    let noise = PhaseSpaceFunction::from_values(
        grid,
        random_vector(grid.phase_len(), &mut rng)
            .as_slice()
            .to_vec(),
    )?;
    let faithful_noise = faithfulness_probe(&noise, &canon)?;
    report.push(CheckRecord::new(
        "faithfulness.random_symbol",
        faithful_noise.empirical_constant,
        faithful_noise.bound_constant,
    ));

    let copies = if 2 * len <= MAX_GRID_FIXTURE_DIM {
        2
    } else {
        1
    };
    let x = haar_random_unitary(copies * len, opts.seed);
    let fixture = GridAction::new(grid, canon.action().copies(copies).conjugate(&x))?;
    let dec = real_intertwiner_synth(&fixture)?;
    report.push(CheckRecord::count(
        "synthesis.multiplicity",
        dec.multiplicity,
        copies,
    ));
    report.push(CheckRecord::new(
        "synthesis.defect",
        dec.max_defect(),
        dec.tolerance,
    ));
    let eq2 = eq2_check(&fixture, &dec.range, 32, opts.seed)?;
    report.push(CheckRecord::new(
        "inner_product_identity.defect",
        eq2.max_defect,
        REAL_TOL,
    ));
    report.push(CheckRecord::new(
        "inner_product_identity.orthogonal",
        eq2.orthogonal_max,
        REAL_TOL,
    ));
    report.detail("synthesis", dec.to_json());
    report.detail("synthesis_copies", json!(copies));
    report.detail(
        "inner_product_identity",
        serde_json::to_value(&eq2).expect("serializes"),
    );
    if opts.csv {
        for (a, w) in dec.intertwiners.iter().enumerate() {
            report.artifact(format!("grid_intertwiner_{a}"), matrix_to_csv(w));
        }
    }
    Ok(report)
}

/// Block decomposition, combined intertwiner, orbit span and commutant for
/// `E × ℤⁿ` with the grid standing in for `ℝⁿ`.
pub fn verify_product(
    subgroup: &ElementSubgroup,
    grid: &GridSpec,
    opts: SuiteOptions,
) -> Result<VerificationReport> {
    grid.require_window()?;
    let mut report = VerificationReport::new(
        "verify-product",
        env(opts.seed, Some(*grid), Some(subgroup)),
    );
    let model = ProductModel::new(subgroup.clone(), *grid);
    let rho = model.canonical_action();
    report.push(CheckRecord::new(
        "product.relations",
        rho.max_relation_defect(),
        PRODUCT_RELATION_TOL,
    ));
    report.push(CheckRecord::new(
        "product.cross_commutation",
        cross_commutation_defect(&model, &rho),
        PRODUCT_RELATION_TOL,
    ));

    let blocks = block_decompose(&model, &rho)?;
    report.push(CheckRecord::count(
        "blocks.count",
        blocks.blocks.len(),
        blocks.expected_blocks,
    ));
    let worst_dim = blocks
        .blocks
        .iter()
        .map(|b| b.dim.abs_diff(blocks.expected_dim))
        .max()
        .unwrap_or(0);
    report.push(CheckRecord::count("blocks.dim", worst_dim, 0));
    report.push(CheckRecord::new(
        "blocks.grid_equivalence",
        blocks.max_witness_defect(),
        REAL_TOL,
    ));
    report.detail("blocks", blocks.to_json());

    let combined = combined_intertwiner(&model, &rho)?;
    report.push(CheckRecord::count(
        "combined.canonical.multiplicity",
        combined.multiplicity,
        1,
    ));
    report.push(CheckRecord::new(
        "combined.canonical.defect",
        combined.max_defect(),
        combined.tolerance,
    ));
    report.detail("combined_canonical", combined.to_json());

    if 2 * model.dim() <= MAX_GRID_FIXTURE_DIM {
        let x = haar_random_unitary(2 * model.dim(), opts.seed);
        let fixture = rho.copies(2).conjugate(&x);
        let doubled = combined_intertwiner(&model, &fixture)?;
        report.push(CheckRecord::count(
            "combined.fixture.multiplicity",
            doubled.multiplicity,
            2,
        ));
        report.push(CheckRecord::new(
            "combined.fixture.defect",
            doubled.max_defect(),
            doubled.tolerance,
        ));
        report.detail("combined_fixture", doubled.to_json());
    } else {
        report.detail(
            "combined_fixture",
            json!("skipped: dimension exceeds fixture limit"),
        );
    }

    let orbit = orbit_span(&model)?;
    report.push(CheckRecord::count("orbit.rank", orbit.rank, orbit.expected));
    let commutant = commutant_dimension(&rho)?;
    report.push(CheckRecord::count(
        "commutant.product",
        commutant.dimension,
        1,
    ));
    report.detail("orbit", serde_json::to_value(&orbit).expect("serializes"));
    Ok(report)
}

/// Double duality, annihilator orders and `G^⊥⊥ = G` for every group of
/// order at most `max_order` and every subgroup.
pub fn duality_suite(max_order: u64, opts: SuiteOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("duality", env(opts.seed, None, None));
    let groups = FiniteAbelianGroup::all_up_to(max_order);
    let (mut double_dual, mut orders, mut involution, mut exact) = (0, 0, 0, 0);
    let mut subgroups = 0;
    for g in &groups {
        double_dual += usize::from(!verify_double_dual(g));
        for sub in g.all_subgroups() {
            subgroups += 1;
            let perp = annihilator(&sub);
            orders += usize::from(perp.order() * sub.order() != g.order());
            let back: Subgroup<_> = annihilator_of_characters(&perp);
            involution += usize::from(back.elements() != sub.elements());
            exact += usize::from(!quotient_group(&sub).verify_exactness());
        }
    }
    report.push(CheckRecord::count("duality.double_dual", double_dual, 0));
    report.push(CheckRecord::count("duality.annihilator_order", orders, 0));
    report.push(CheckRecord::count(
        "duality.annihilator_involution",
        involution,
        0,
    ));
    report.push(CheckRecord::count("duality.quotient_exactness", exact, 0));
    report.detail(
        "coverage",
        json!({ "max_order": max_order, "groups": groups.len(), "subgroups": subgroups }),
    );
    Ok(report)
}

/// Eigenspace decomposition and intertwiner synthesis of a user-supplied
/// action, cross-checked against its commutant dimension `m²`.
pub fn decompose_report(
    rho: &HeisenbergAction,
    subgroup: &ElementSubgroup,
    opts: SuiteOptions,
) -> Result<VerificationReport> {
    if subgroup.parent() != rho.group() {
        return Err(Error::Structural(format!(
            "subgroup of {} given for an action of {}",
            subgroup.parent(),
            rho.group()
        )));
    }
    let mut report = VerificationReport::new("decompose", env(opts.seed, None, Some(subgroup)));
    report.push(CheckRecord::new(
        "relations",
        rho.max_relation_defect(),
        RELATION_TOL,
    ));
    let dec = synthesize_intertwiners(rho, subgroup)?;
    report.push(CheckRecord::new(
        "synthesis.defect",
        dec.max_defect(),
        dec.tolerance,
    ));
    let commutant = commutant_dimension(rho)?;
    report.push(CheckRecord::count(
        "commutant.dimension_is_square",
        commutant.dimension,
        dec.multiplicity * dec.multiplicity,
    ));
    report.detail("multiplicity", json!(dec.multiplicity));
    report.detail("dim", json!(rho.dim()));
    report.detail("synthesis", dec.to_json(Some(commutant.dimension)));
    if opts.include_bases {
        let eig = decompose(rho, subgroup)?;
        report.detail("eigenspaces", eig.to_json(true));
    }
    if opts.csv {
        for (a, w) in dec.intertwiners.iter().enumerate() {
            report.artifact(format!("intertwiner_{a}"), matrix_to_csv(w));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::parse_subgroup;

    fn sub(g: &str, s: &str) -> ElementSubgroup {
        parse_subgroup(&FiniteAbelianGroup::parse(g).unwrap(), s).unwrap()
    }

    #[test]
    fn record_pass_rule() {
        assert!(CheckRecord::new("a", 1e-12, 1e-10).pass);
        assert!(!CheckRecord::new("a", f64::NAN, 1e-10).pass);
        assert!(CheckRecord::count("c", 3, 3).pass);
        assert!(!CheckRecord::count("c", 2, 3).pass);
    }

    #[test]
    fn finite_suite_on_z4() {
        let r = verify_finite(&sub("Z4", "[2]"), SuiteOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.failed().collect::<Vec<_>>());
        assert_eq!(
            r.details["eigenspaces"]["eigenspaces"]
                .as_array()
                .map(|a| a.len()),
            Some(4)
        );
    }

    #[test]
    fn finite_suite_on_trivial_group() {
        let r = verify_finite(&sub("Z1", "[]"), SuiteOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.failed().collect::<Vec<_>>());
    }

    #[test]
    fn reports_are_deterministic() {
        let opts = SuiteOptions {
            seed: 9,
            ..Default::default()
        };
        let a = verify_finite(&sub("Z2xZ2", "[(1,0)]"), opts)
            .unwrap()
            .to_json();
        let b = verify_finite(&sub("Z2xZ2", "[(1,0)]"), opts)
            .unwrap()
            .to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn real_suite_on_small_grid() {
        let grid = GridSpec::new(1, 16, 0.5).unwrap();
        let r = verify_real(&grid, SuiteOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.failed().collect::<Vec<_>>());
    }

    #[test]
    fn real_suite_coarse_grid_relaxes() {
        let grid = GridSpec::new(1, 8, 1.0).unwrap();
        let r = verify_real(&grid, SuiteOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.failed().collect::<Vec<_>>());
        assert_eq!(r.details["tolerances"]["relaxed"], json!(true));
    }

    #[test]
    fn real_suite_rejects_narrow_window() {
        let grid = GridSpec::new(1, 8, 0.5).unwrap();
        assert!(matches!(
            verify_real(&grid, SuiteOptions::default()),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn product_suite_small() {
        let grid = GridSpec::new(1, 8, 1.0).unwrap();
        let r = verify_product(&sub("Z2", "[]"), &grid, SuiteOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.failed().collect::<Vec<_>>());
    }

    #[test]
    fn duality_small() {
        let r = duality_suite(8, SuiteOptions::default()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn decompose_two_copies() {
        let s = sub("Z3", "[]");
        let rho = HeisenbergAction::canonical(s.parent())
            .copies(2)
            .conjugate(&haar_random_unitary(6, 1));
        let r = decompose_report(&rho, &s, SuiteOptions::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.details["multiplicity"], json!(2));
    }

    #[test]
    fn decompose_rejects_bad_dimension() {
        let s = sub("Z2", "[]");
        let rho = HeisenbergAction::canonical(&FiniteAbelianGroup::parse("Z3").unwrap());
        assert!(decompose_report(&rho, &s, SuiteOptions::default()).is_err());
        let z1 = sub("Z1", "[]");
        let t = HeisenbergAction::canonical(z1.parent()).copies(3);
        let r = decompose_report(&t, &z1, SuiteOptions::default()).unwrap();
        assert_eq!(r.details["multiplicity"], json!(3));
    }
}
