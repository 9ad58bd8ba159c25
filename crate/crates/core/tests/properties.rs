use std::sync::Arc;

use adiabat::dynamics::{evolve, ExpMidpoint, Magnus4, Propagator};
use adiabat::filter::{FilterSpec, Orientation, ShapeRegistry};
use adiabat::kubo::{self, ResponseProblem};
use adiabat::linalg::{self, c, pauli_x, pauli_z, Matrix, Vector, C64};
use adiabat::models::{affine_family, driven_ising_chain, IsingParams, LinearRamp, SwitchFunction};
use adiabat::operators::{embed, Chain, LocalOperator};
use adiabat::quasiadiabatic::{frequency_restricted, liouvillian, quasi_local_inverse, LiouvillianContext, Path};
use adiabat::spectral::{self, offdiag, parallel_transport_kato, uniform_grid, ProjectorDerivative};
use proptest::prelude::*;

fn hermitian_from(entries: &[f64], n: usize) -> Matrix {
    let m = Matrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        C64::new(entries[k], entries[k + 1])
    });
    linalg::hermitize(&m)
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 2 * n * n)
}

/// Diagonal spectrum with ground energy 0 and the rest at least `gap` above,
/// rotated by a random unitary.
fn gapped(levels: &[f64], rot: &[f64], gap: f64) -> Matrix {
    let n = levels.len() + 1;
    let mut diag = vec![c(0.0)];
    diag.extend(levels.iter().map(|l| c(gap + l.abs())));
    let d = Matrix::from_diagonal(&Vector::from_vec(diag));
    let u = linalg::exp_i_hermitian(&hermitian_from(rot, n));
    &u * d * u.adjoint()
}

fn ising_problem(sites: usize) -> ResponseProblem {
    let fam = driven_ising_chain(sites, IsingParams::transverse(0.5, 1.0, 0.0), Arc::new(SwitchFunction::default()))
        .unwrap();
    let chain = fam.chain();
    let z = |x| {
        embed(&LocalOperator::site(x, pauli_z()).unwrap(), chain)
            .unwrap()
            .into_matrix()
    };
    // field on the three sites around the centre
    let center = chain.center();
    let v = (center - 1..=center + 1).fold(linalg::zeros(chain.dim()), |acc, x| acc + z(x));
    ResponseProblem::new(fam.hamiltonian_matrix(0.0), v, z(center)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn offdiag_is_idempotent(a in entries(4), levels in prop::collection::vec(-2.0..2.0f64, 3), rot in entries(4)) {
        let sd = spectral::diagonalize_matrix(&gapped(&levels, &rot, 0.5));
        let p = sd.patch_projector();
        let a = hermitian_from(&a, 4);
        let q = offdiag(&a, &p).unwrap();
        let qq = offdiag(&q, &p).unwrap();
        prop_assert!((&qq - &q).norm() < 1e-12);
        prop_assert!((p.matrix() * &q * p.matrix()).norm() < 1e-12);
    }

    #[test]
    fn inverse_preserves_hermiticity_and_inverts_on_range(
        a in entries(4), levels in prop::collection::vec(-2.0..2.0f64, 3), rot in entries(4)
    ) {
        let gamma = 0.5;
        let spec = FilterSpec::with_default_shape(gamma, Orientation::Inverse).unwrap();
        let ctx = LiouvillianContext::from_hamiltonian(&gapped(&levels, &rot, 0.7), spec).unwrap();
        let a = hermitian_from(&a, 4);
        let inv = quasi_local_inverse(&ctx, &a, Path::Spectral).unwrap();
        prop_assert!(linalg::hermiticity_defect(&inv) < 1e-12);
        let p = ctx.projector().matrix();
        prop_assert!((p * &inv * p).norm() < 1e-12);
        let r = frequency_restricted(ctx.spectral(), &a, gamma);
        let back = liouvillian(&ctx, &quasi_local_inverse(&ctx, &r, Path::Spectral).unwrap());
        prop_assert!((back - &r).norm() < 1e-10 * (1.0 + r.norm()));
    }

    #[test]
    fn kubo_paths_agree_on_random_problems(
        levels in prop::collection::vec(-2.0..2.0f64, 3), rot in entries(4), v in entries(4), j in entries(4)
    ) {
        let prob = ResponseProblem::new(gapped(&levels, &rot, 1.0), hermitian_from(&v, 4), hermitian_from(&j, 4)).unwrap();
        let filter = FilterSpec::with_default_shape(1.0, Orientation::Inverse).unwrap();
        let qa = kubo::chi_quasiadiabatic(&prob, &filter).unwrap();
        prop_assert!(qa.imaginary_residue < 1e-12);
        let stat = kubo::chi_static_oracle(&prob, 1e-3).unwrap();
        prop_assert!((qa.value - stat).abs() < 1e-6, "{} vs {}", qa.value, stat);
        let table = kubo::chi_kubo_regularized(&prob, &kubo::DEFAULT_EPSILONS).unwrap();
        prop_assert!((table.extrapolated - qa.value).abs() < 1e-3);
        prop_assert!(kubo::work_check(&prob, &filter).unwrap() < 1e-10);
    }

    /// On a spectrum gapped by at least γ, the P–Q blocks only see
    /// frequencies where every admissible bump has already vanished.
    #[test]
    fn gapped_results_do_not_depend_on_the_bump(
        levels in prop::collection::vec(-2.0..2.0f64, 3), rot in entries(4), v in entries(4), j in entries(4)
    ) {
        let h = gapped(&levels, &rot, 1.0);
        let prob = ResponseProblem::new(h.clone(), hermitian_from(&v, 4), hermitian_from(&j, 4)).unwrap();
        let shapes = ShapeRegistry::default();
        let spec = |name: &str| FilterSpec::new(0.8, shapes.get(name).unwrap(), Orientation::Inverse).unwrap();
        let (bump, step) = (spec("exp-bump"), spec("smooth-step"));
        let a = kubo::chi_quasiadiabatic(&prob, &bump).unwrap().value;
        let b = kubo::chi_quasiadiabatic(&prob, &step).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} vs {b}");

        let x = hermitian_from(&v, 4);
        let inv = |f: FilterSpec| {
            let ctx = LiouvillianContext::from_hamiltonian(&h, f).unwrap();
            let p = ctx.projector().clone();
            offdiag(&quasi_local_inverse(&ctx, &x, Path::Spectral).unwrap(), &p).unwrap()
        };
        prop_assert!((inv(bump) - inv(step)).norm() < 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn propagators_are_unitary(h0 in entries(3), h1 in entries(3), steps in 1usize..40) {
        let a = hermitian_from(&h0, 3);
        let b = hermitian_from(&h1, 3);
        let h = |t: f64| &a + &b * c(t.sin());
        let psi0 = Vector::from_vec(vec![c(1.0), c(0.0), c(0.0)]);
        for p in [&ExpMidpoint as &dyn Propagator, &Magnus4] {
            let psi = evolve(&h, 0.0, 2.0, &psi0, steps, p).unwrap();
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_local_operators_commute(x in 0usize..4, d in 1usize..4, a in entries(2), b in entries(2)) {
        let chain = Chain::spin_half(x + d + 1).unwrap();
        let ea = embed(&LocalOperator::site(x, hermitian_from(&a, 2)).unwrap(), &chain).unwrap().into_matrix();
        let eb = embed(&LocalOperator::site(x + d, hermitian_from(&b, 2)).unwrap(), &chain).unwrap().into_matrix();
        prop_assert!(linalg::commutator(&ea, &eb).norm() < 1e-13);
    }
}

#[test]
fn quasiadiabatic_response_is_volume_stable() {
    let filter = FilterSpec::with_default_shape(0.5, Orientation::Inverse).unwrap();
    let small = kubo::chi_quasiadiabatic(&ising_problem(4), &filter).unwrap().value;
    let large = kubo::chi_quasiadiabatic(&ising_problem(6), &filter).unwrap().value;
    assert!(((large - small) / small).abs() <= 0.10, "{small} vs {large}");
}

#[test]
fn dynamic_response_is_linear_in_alpha() {
    let prob = ResponseProblem::new(-pauli_z(), pauli_x(), pauli_x()).unwrap();
    let a = kubo::chi_dynamic(&prob, 1e-2, 0.2, None, 0.02, &Magnus4).unwrap();
    let b = kubo::chi_dynamic(&prob, 5e-3, 0.2, None, 0.02, &Magnus4).unwrap();
    // the quadratic response vanishes for this problem by symmetry
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    let kubo_value = kubo::chi_kubo_at(&prob, 0.2).unwrap();
    assert!((a - kubo_value).abs() < 1e-3, "{a} vs {kubo_value}");
}

/// A field-free spectator spin doubles the ground patch. Transport inside the
/// rank-2 patch must act on the driven spin alone.
#[test]
fn rank_two_transport_factorizes_over_a_spectator() {
    let driven = |sites| {
        affine_family(
            Chain::spin_half(sites).unwrap(),
            [LocalOperator::site(0, -pauli_z()).unwrap()],
            [LocalOperator::site(0, pauli_x()).unwrap()],
            Arc::new(LinearRamp),
        )
        .unwrap()
    };
    let (pair, single) = (driven(2), driven(1));
    assert_eq!(spectral::family_ground_projector(&pair, 0.0).unwrap().rank(), 2);

    let grid = uniform_grid(0.0, 1.0, 200);
    let up = Vector::from_vec(vec![c(1.0), c(0.0)]);
    let spectator = Vector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
    let joint = up.kronecker(&spectator);
    let method = ProjectorDerivative::default();
    let t2 = parallel_transport_kato(&pair, &grid, &joint, method).unwrap();
    let t1 = parallel_transport_kato(&single, &grid, &up, method).unwrap();
    assert!(t2.leakage < 1e-8 && t2.parallel_residual < 1e-6, "{} {}", t2.leakage, t2.parallel_residual);
    let expected = t1.final_state().kronecker(&spectator);
    assert!((t2.final_state() - expected).norm() < 1e-8);
}
