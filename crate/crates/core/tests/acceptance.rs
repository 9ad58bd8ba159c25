//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing output capture) before asserting.

use std::io::Write;
use std::sync::Arc;

use adiabat::dynamics::{
    catastrophe_experiment, fit_cone, lieb_robinson_profile, ConeWindow, Magnus4, PropagationOptions,
};
use adiabat::filter::{FilterFunction, FilterSpec, Orientation};
use adiabat::kubo::{self, ResponseProblem};
use adiabat::linalg::{self, c, pauli_x, pauli_y, pauli_z, Matrix, C64, I};
use adiabat::models::{
    driven_ising_chain, rotating_field_chain, FieldPath, HamiltonianFamily, IsingParams, SwitchFunction,
};
use adiabat::operators::{embed, Chain, InteractionPotential, LocalOperator};
use adiabat::quasiadiabatic::{
    family_generator, frequency_restricted, liouvillian, quasi_local_inverse, quasiadiabatic_transport,
    transport_fidelity, transport_overlap_real, LiouvillianContext, Path,
};
use adiabat::spectral::{self, parallel_transport_kato, uniform_grid, ProjectorDerivative};
use adiabat::superadiabatic::{build_dressing, diabatic_error_sweep, dressed_projector_and_rest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{verdict} criterion {criterion}: {detail}");
    assert!(ok, "criterion {criterion}: {detail}");
}

fn site_op(chain: &Chain, site: usize, m: Matrix) -> Matrix {
    embed(&LocalOperator::site(site, m).unwrap(), chain).unwrap().into_matrix()
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = Matrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    linalg::hermitize(&m)
}

/// Random nearest-neighbour 3-site Hamiltonian with gap at least 0.5.
fn random_gapped_three_site(rng: &mut ChaCha8Rng) -> Matrix {
    let chain = Chain::spin_half(3).unwrap();
    loop {
        let mut terms = Vec::new();
        for x in 0..2 {
            terms.push(LocalOperator::new(vec![x, x + 1], random_hermitian(rng, 4) * c(0.5), 2).unwrap());
        }
        for x in 0..3 {
            terms.push(LocalOperator::site(x, random_hermitian(rng, 2)).unwrap());
        }
        let h = InteractionPotential::new(chain, terms)
            .unwrap()
            .assemble()
            .unwrap()
            .into_matrix();
        if spectral::diagonalize_matrix(&h).gap() >= 0.5 {
            return h;
        }
    }
}

#[test]
fn criterion_01_inverse_liouvillian_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let gamma = 0.5;
    let spec = FilterSpec::with_default_shape(gamma, Orientation::Inverse).unwrap();
    let f = FilterFunction::synthesize(&spec, None, None).unwrap();
    let (mut spectral_worst, mut time_worst) = (0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let h = random_gapped_three_site(&mut rng);
        let a = random_hermitian(&mut rng, 8);
        let ctx = LiouvillianContext::from_hamiltonian(&h, spec.clone()).unwrap();
        let norm = linalg::spectral_norm(&a);
        // the identity holds on the frequency range |ω| ≥ γ
        let restricted = frequency_restricted(ctx.spectral(), &a, gamma);
        let inv = quasi_local_inverse(&ctx, &restricted, Path::Spectral).unwrap();
        let defect = linalg::spectral_norm(&(liouvillian(&ctx, &inv) - &restricted)) / norm;
        spectral_worst = spectral_worst.max(defect);
        let inv_t = quasi_local_inverse(&ctx, &restricted, Path::TimeDomain(&f)).unwrap();
        let defect_t = linalg::spectral_norm(&(liouvillian(&ctx, &inv_t) - &restricted)) / norm;
        time_worst = time_worst.max(defect_t);
    }
    report(
        1,
        spectral_worst <= 1e-9 && time_worst <= 1e-4,
        format!("spectral {spectral_worst:.2e} (≤ 1e-9), time-domain {time_worst:.2e} (≤ 1e-4)"),
    );
}

#[test]
fn criterion_02_generator_equation() {
    let fam = rotating_field_chain(4, FieldPath::switched_rotation(1.2, SwitchFunction::default())).unwrap();
    let filter = FilterSpec::with_default_shape(1.0, Orientation::Generator).unwrap();
    let mut worst = 0.0_f64;
    for j in 1..=9 {
        let s = j as f64 / 10.0;
        let g = family_generator(&fam, s, &filter).unwrap();
        let p = spectral::family_ground_projector(&fam, s).unwrap();
        let pdot = spectral::projector_derivative(&fam, s, ProjectorDerivative::default()).unwrap();
        let residual = pdot + linalg::commutator(&g, p.matrix()) * I;
        worst = worst.max(linalg::spectral_norm(&residual));
    }
    report(2, worst <= 1e-6, format!("max ‖Ṗ + i[G, P]‖ = {worst:.2e} over 9 points (≤ 1e-6)"));
}

#[test]
fn criterion_03_kato_and_quasiadiabatic_transport_agree() {
    let filter = FilterSpec::with_default_shape(1.0, Orientation::Generator).unwrap();
    let grid = uniform_grid(0.0, 1.0, 400);
    let mut lines = Vec::new();
    let mut ok = true;
    for sites in [1, 3] {
        let fam = rotating_field_chain(sites, FieldPath::switched_rotation(1.2, SwitchFunction::default())).unwrap();
        let omega0 = spectral::family_spectrum(&fam, 0.0).unwrap().vectors().column(0).into_owned();
        let kato = parallel_transport_kato(&fam, &grid, &omega0, ProjectorDerivative::default()).unwrap();
        let qa = quasiadiabatic_transport(&fam, &grid, &omega0, &filter).unwrap();
        let fidelity = transport_fidelity(&kato, &qa);
        let overlap = transport_overlap_real(&kato, &qa);
        let residual = kato.parallel_residual.max(qa.parallel_residual);
        ok &= fidelity >= 1.0 - 1e-6 && overlap >= 1.0 - 1e-6 && residual <= 1e-6;
        lines.push(format!(
            "{sites} site(s): 1 − F = {:.1e}, 1 − Re⟨⟩ = {:.1e}, ‖PΩ̇‖ = {residual:.1e}",
            1.0 - fidelity,
            1.0 - overlap
        ));
    }
    report(3, ok, lines.join("; "));
}

/// The driven Ising chain of the diabatic-error experiments. The
/// longitudinal field breaks the `Π X_x` parity so that `Y` has a nonzero
/// first-order diabatic response.
fn sweep_chain(sites: usize) -> HamiltonianFamily {
    driven_ising_chain(
        sites,
        IsingParams::transverse(0.5, 1.0, 0.5).with_longitudinal(0.5),
        Arc::new(SwitchFunction::default()),
    )
    .unwrap()
}

fn center_y(fam: &HamiltonianFamily) -> Matrix {
    site_op(fam.chain(), fam.chain().center(), pauli_y())
}

#[test]
fn criterion_04_adiabatic_scaling() {
    let fam = sweep_chain(6);
    let table = diabatic_error_sweep(
        &fam,
        &center_y(&fam),
        &[0.32, 0.16, 0.08, 0.04],
        &[0.5, 1.0],
        &PropagationOptions::default(),
    )
    .unwrap();
    let mid = table.slope_at(0.5).unwrap();
    let end = table.slope_at(1.0).unwrap();
    report(
        4,
        (0.8..=1.3).contains(&mid) && end >= 1.8,
        format!("slope at s = 1/2: {mid:.3} (in [0.8, 1.3]); at s = 1: {end:.3} (≥ 1.8)"),
    );
}

#[test]
fn criterion_05_volume_independence() {
    let errors: Vec<f64> = [5, 7]
        .iter()
        .map(|&n| {
            let fam = sweep_chain(n);
            let table =
                diabatic_error_sweep(&fam, &center_y(&fam), &[0.08], &[0.5], &PropagationOptions::default())
                    .unwrap();
            table.error_at(0.08, 0.5).unwrap()
        })
        .collect();
    let change = (errors[1] - errors[0]).abs() / errors[0];
    report(
        5,
        change <= 0.15,
        format!(
            "error at ε = 0.08, s = 1/2: L = 5 {:.4e}, L = 7 {:.4e}, relative change {:.1}% (≤ 15%)",
            errors[0],
            errors[1],
            100.0 * change
        ),
    );
}

#[test]
fn criterion_06_orthogonality_catastrophe() {
    let opts = PropagationOptions {
        max_step: Some(2e-3),
        ..Default::default()
    };
    let table = catastrophe_experiment(
        0.05,
        &[2, 4, 6, 8],
        &FieldPath::linear_rotation(std::f64::consts::FRAC_PI_2),
        &pauli_y(),
        &opts,
    )
    .unwrap();
    let fit = table.log_fidelity_fit;
    report(
        6,
        fit.r_squared >= 0.99 && fit.slope < 0.0 && table.local_error_spread <= 0.10,
        format!(
            "log F slope {:.3e} per site, R² = {:.6}; local error spread {:.1e} (≤ 10%)",
            fit.slope, fit.r_squared, table.local_error_spread
        ),
    );
}

#[test]
fn criterion_07_rest_term_order() {
    let fam = driven_ising_chain(4, IsingParams::transverse(0.3, 1.0, 0.5), Arc::new(SwitchFunction::default()))
        .unwrap();
    let filter = FilterSpec::with_default_shape(0.5, Orientation::Generator).unwrap();
    let (eps, nodes) = (0.02, 33);
    let mut ok = true;
    let mut lines = Vec::new();
    for order in [1, 2] {
        let seq = build_dressing(&fam, &filter, order, nodes).unwrap();
        let sup = |e: f64| {
            (1..nodes - 1)
                .map(|j| linalg::spectral_norm(&dressed_projector_and_rest(&seq, e, j).unwrap().rest))
                .fold(0.0, f64::max)
        };
        let ratio = sup(eps) / sup(eps / 2.0);
        let target = 2f64.powi(order as i32 + 1);
        ok &= (ratio / target - 1.0).abs() <= 0.2;
        lines.push(format!("n = {order}: ratio {ratio:.3} (target {target} ± 20%)"));
    }
    report(7, ok, lines.join("; "));
}

fn ising_kubo_problem(sites: usize) -> ResponseProblem {
    let fam = driven_ising_chain(sites, IsingParams::transverse(0.5, 1.0, 0.0), Arc::new(SwitchFunction::default()))
        .unwrap();
    let chain = fam.chain();
    // longitudinal field on the three sites around the centre
    let center = chain.center();
    let v = (center - 1..=center + 1).fold(linalg::zeros(chain.dim()), |acc, x| acc + site_op(chain, x, pauli_z()));
    let j = site_op(chain, center, pauli_z());
    ResponseProblem::new(fam.hamiltonian_matrix(0.0), v, j).unwrap()
}

fn kubo_filter() -> FilterSpec {
    FilterSpec::with_default_shape(0.5, Orientation::Inverse).unwrap()
}

#[test]
fn criterion_08_kubo_equality() {
    let two_level = ResponseProblem::new(-pauli_z(), pauli_x(), pauli_x()).unwrap();
    let ising = ising_kubo_problem(4);
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, prob, tol) in [("2-level", &two_level, 1e-6), ("Ising L = 4", &ising, 1e-4)] {
        let qa = kubo::chi_quasiadiabatic(prob, &kubo_filter()).unwrap();
        let stat = kubo::chi_static_oracle(prob, kubo::DEFAULT_ALPHA_STEP).unwrap();
        let table = kubo::chi_kubo_regularized(prob, &kubo::DEFAULT_EPSILONS).unwrap();
        let dynamic: Vec<f64> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&e| (kubo::chi_dynamic(prob, 1e-2, e, None, 0.02, &Magnus4).unwrap() - stat).abs())
            .collect();
        let approaches = dynamic.windows(2).all(|w| w[1] < w[0]);
        let qa_gap = (qa.value - stat).abs();
        let kubo_gap = (table.extrapolated - qa.value).abs();
        ok &= qa_gap <= tol && kubo_gap <= 1e-3 && approaches;
        lines.push(format!(
            "{name}: χ_QA = {:.8}, |χ_QA − χ_static| = {qa_gap:.1e} (≤ {tol:.0e}), |χ_Kubo − χ_QA| = {kubo_gap:.1e}, dynamic gaps {:.2e}/{:.2e}/{:.2e}",
            qa.value, dynamic[0], dynamic[1], dynamic[2]
        ));
    }
    if (kubo::chi_static_oracle(&two_level, kubo::DEFAULT_ALPHA_STEP).unwrap() + 1.0).abs() > 1e-8 {
        ok = false;
        lines.push("2-level static value differs from −1".into());
    }
    report(8, ok, lines.join("; "));
}

#[test]
fn criterion_09_zero_work() {
    let problems = [
        ResponseProblem::new(-pauli_z(), pauli_x(), pauli_x()).unwrap(),
        ResponseProblem::new(-pauli_z(), pauli_x(), pauli_y()).unwrap(),
        ising_kubo_problem(4),
        ising_kubo_problem(6),
    ];
    let worst = problems
        .iter()
        .map(|p| kubo::work_check(p, &kubo_filter()).unwrap())
        .fold(0.0, f64::max);
    report(9, worst <= 1e-10, format!("max |Tr(P[I(V), H])|/‖V‖ = {worst:.1e} (≤ 1e-10)"));
}

#[test]
fn criterion_10_lieb_robinson_cone() {
    let fam = driven_ising_chain(8, IsingParams::transverse(0.5, 1.0, 0.0), Arc::new(SwitchFunction::default()))
        .unwrap();
    let h = fam.hamiltonian_matrix(0.0);
    let a = LocalOperator::site(0, pauli_x()).unwrap();
    let times: Vec<f64> = (0..=30).map(|j| 0.05 * j as f64).collect();
    let distances = [1, 2, 3, 4, 5, 6, 7];
    let table = lieb_robinson_profile(&h, fam.chain(), &a, &pauli_x(), &distances, &times).unwrap();
    let at_zero = table.points.iter().filter(|p| p.time == 0.0).map(|p| p.value).fold(0.0, f64::max);
    let fit = fit_cone(&table, &ConeWindow::default()).unwrap();
    report(
        10,
        fit.mu > 0.0 && fit.velocity.is_finite() && fit.relative_residual <= 0.2 && at_zero < 1e-14,
        format!(
            "μ = {:.3}, v = {:.3}, residual {:.1}% over {} points (≤ 20%); max commutator at t = 0: {at_zero:.1e}",
            fit.mu,
            fit.velocity,
            100.0 * fit.relative_residual,
            fit.points_used
        ),
    );
}
