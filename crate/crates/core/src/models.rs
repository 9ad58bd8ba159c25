//! Driven Hamiltonian families `s ↦ H_s` with exact `s`-derivatives.
//!
//! Each family is a finite sum of fixed local operators weighted by scalar
//! [`Profile`]s. Profiles expose Taylor jets, so any derivative order up to
//! the family's `k_max` comes from the chain rule rather than differencing.

use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{self, c, Matrix};
use crate::operators::{embed, Chain, InteractionPotential, LocalOperator, ManyBodyOperator};

pub const DEFAULT_K_MAX: usize = 6;

/// A smooth real coefficient `s ↦ c(s)`.
pub trait Profile: Debug + Send + Sync {
    /// Taylor jet of order `order` at `s`.
    fn jet(&self, s: f64, order: usize) -> Jet;

    fn value(&self, s: f64) -> f64 {
        self.jet(s, 0).value()
    }

    /// Whether every derivative vanishes at `s = 0` and `s = 1`.
    fn flat_endpoints(&self) -> bool;
}

pub type SharedProfile = Arc<dyn Profile>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Profile for Constant {
    fn jet(&self, _s: f64, order: usize) -> Jet {
        Jet::constant(self.0, order)
    }

    fn flat_endpoints(&self) -> bool {
        true
    }
}

/// `c(s) = s`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearRamp;

impl Profile for LinearRamp {
    fn jet(&self, s: f64, order: usize) -> Jet {
        Jet::variable(s, order)
    }

    fn flat_endpoints(&self) -> bool {
        false
    }
}

/// `offset + scale·inner(s)`.
#[derive(Debug, Clone)]
pub struct Affine {
    pub offset: f64,
    pub scale: f64,
    pub inner: SharedProfile,
}

impl Profile for Affine {
    fn jet(&self, s: f64, order: usize) -> Jet {
        self.inner.jet(s, order).scale(self.scale).offset(self.offset)
    }

    fn flat_endpoints(&self) -> bool {
        self.scale == 0.0 || self.inner.flat_endpoints()
    }
}

/// `4·g(s)(1 − g(s))`: rises from 0 to 1 and returns, so the family
/// ends where it started.
#[derive(Debug, Clone)]
pub struct ThereAndBack {
    pub inner: SharedProfile,
}

impl Profile for ThereAndBack {
    fn jet(&self, s: f64, order: usize) -> Jet {
        let g = self.inner.jet(s, order);
        let one_minus = g.scale(-1.0).offset(1.0);
        (&g * &one_minus).scale(4.0)
    }

    fn flat_endpoints(&self) -> bool {
        self.inner.flat_endpoints()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

/// `amplitude·sin(θ(s))` or `amplitude·cos(θ(s))`.
#[derive(Debug, Clone)]
pub struct AngleComponent {
    pub angle: SharedProfile,
    pub amplitude: f64,
    pub trig: Trig,
}

impl Profile for AngleComponent {
    fn jet(&self, s: f64, order: usize) -> Jet {
        let (sin, cos) = self.angle.jet(s, order).sin_cos();
        match self.trig {
            Trig::Sin => sin.scale(self.amplitude),
            Trig::Cos => cos.scale(self.amplitude),
        }
    }

    fn flat_endpoints(&self) -> bool {
        self.angle.flat_endpoints()
    }
}

/// The `C^∞` switch `g(s) = N ∫₀^s exp(−1/(u(1−u))) du`, constant outside
/// `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SwitchFunction {
    k_max: usize,
}

/// Below this value of `u(1−u)` the integrand underflows to zero.
const FLAT_ZONE: f64 = 1.0 / 800.0;
const PANELS: usize = 16;

fn quadrature() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(24).expect("24 nodes is a valid degree"))
}

fn bump_integrand(u: f64) -> f64 {
    let w = u * (1.0 - u);
    if w <= FLAT_ZONE {
        0.0
    } else {
        (-1.0 / w).exp()
    }
}

fn bump_integral(a: f64, b: f64) -> f64 {
    let rule = quadrature();
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|p| {
            let lo = a + p as f64 * h;
            rule.integrate(lo, lo + h, bump_integrand)
        })
        .sum()
}

fn normalization() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| 1.0 / (2.0 * bump_integral(0.0, 0.5)))
}

impl SwitchFunction {
    pub fn new(k_max: usize) -> Self {
        SwitchFunction { k_max }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `g(s)`, using the symmetry `g(s) = 1 − g(1 − s)` above ½ so both
    /// ends are resolved to full precision.
    pub fn g(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else if s <= 0.5 {
            normalization() * bump_integral(0.0, s)
        } else {
            1.0 - normalization() * bump_integral(0.0, 1.0 - s)
        }
    }

    /// `g^(k)(s)` for `k ≤ k_max`.
    pub fn derivative(&self, s: f64, k: usize) -> Result<f64> {
        if k > self.k_max {
            return Err(Error::DerivativeOrder {
                order: k,
                max: self.k_max,
            });
        }
        Ok(self.jet(s, k).derivative(k))
    }
}

impl Default for SwitchFunction {
    fn default() -> Self {
        SwitchFunction::new(DEFAULT_K_MAX)
    }
}

impl Profile for SwitchFunction {
    fn jet(&self, s: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = self.g(s);
        let w = s * (1.0 - s);
        if order == 0 || w <= FLAT_ZONE {
            return Jet::from_coeffs(coeffs);
        }
        // integrand jet exp(−1/(u(1−u))), then integrate term by term
        let u = Jet::variable(s, order - 1);
        let one_minus = u.scale(-1.0).offset(1.0);
        let f = (&u * &one_minus).recip().scale(-1.0).exp();
        let norm = normalization();
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            *c = norm * f.coeffs()[k - 1] / k as f64;
        }
        Jet::from_coeffs(coeffs)
    }

    fn flat_endpoints(&self) -> bool {
        true
    }
}

/// Unit field direction `s ↦ h_s ∈ S²` given by its Cartesian components.
#[derive(Debug, Clone)]
pub struct FieldPath {
    pub components: [SharedProfile; 3],
}

impl FieldPath {
    pub fn fixed(direction: [f64; 3]) -> Self {
        FieldPath {
            components: direction.map(|v| Arc::new(Constant(v)) as SharedProfile),
        }
    }

    /// Rotation in the x–z plane: `h = (sin θ(s), 0, cos θ(s))`.
    pub fn xz_arc(angle: SharedProfile) -> Self {
        FieldPath {
            components: [
                Arc::new(AngleComponent {
                    angle: angle.clone(),
                    amplitude: 1.0,
                    trig: Trig::Sin,
                }),
                Arc::new(Constant(0.0)),
                Arc::new(AngleComponent {
                    angle,
                    amplitude: 1.0,
                    trig: Trig::Cos,
                }),
            ],
        }
    }

    /// `θ(s) = θ_max·g(s)` with the smooth switch.
    pub fn switched_rotation(theta_max: f64, switch: SwitchFunction) -> Self {
        FieldPath::xz_arc(Arc::new(Affine {
            offset: 0.0,
            scale: theta_max,
            inner: Arc::new(switch),
        }))
    }

    /// `θ(s) = θ_max·s`; the drive does not switch off at the endpoints.
    pub fn linear_rotation(theta_max: f64) -> Self {
        FieldPath::xz_arc(Arc::new(Affine {
            offset: 0.0,
            scale: theta_max,
            inner: Arc::new(LinearRamp),
        }))
    }

    /// ẑ → x̂ → ẑ: reaches the equator at `s = ½` and comes back.
    pub fn closed_arc(switch: SwitchFunction) -> Self {
        FieldPath::xz_arc(Arc::new(Affine {
            offset: 0.0,
            scale: std::f64::consts::FRAC_PI_2,
            inner: Arc::new(ThereAndBack {
                inner: Arc::new(switch),
            }),
        }))
    }

    pub fn at(&self, s: f64) -> [f64; 3] {
        [
            self.components[0].value(s),
            self.components[1].value(s),
            self.components[2].value(s),
        ]
    }
}

#[derive(Debug, Clone)]
struct Term {
    op: LocalOperator,
    coefficient: SharedProfile,
    embedded: Matrix,
}

/// `H_s = Σ_j c_j(s) O_j` on a chain.
#[derive(Debug, Clone)]
pub struct HamiltonianFamily {
    chain: Chain,
    terms: Vec<Term>,
    k_max: usize,
    label: String,
}

impl HamiltonianFamily {
    pub fn new(
        chain: Chain,
        terms: impl IntoIterator<Item = (LocalOperator, SharedProfile)>,
        k_max: usize,
        label: impl Into<String>,
    ) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(op, coefficient)| {
                if !op.is_hermitian() {
                    return Err(Error::NotHermitian {
                        deviation: linalg::hermiticity_defect(op.matrix()),
                    });
                }
                let embedded = embed(&op, &chain)?.into_matrix();
                Ok(Term {
                    op,
                    coefficient,
                    embedded,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HamiltonianFamily {
            chain,
            terms,
            k_max,
            label: label.into(),
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn dim(&self) -> usize {
        self.chain.dim()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when every derivative of `H` vanishes at both endpoints.
    pub fn flat_endpoints(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.flat_endpoints())
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.k_max {
            return Err(Error::DerivativeOrder {
                order: k,
                max: self.k_max,
            });
        }
        Ok(())
    }

    /// `[H_s, Ḣ_s, …, H_s^(order)]` from a single jet evaluation per term.
    pub fn derivatives(&self, s: f64, order: usize) -> Result<Vec<Matrix>> {
        self.check_order(order)?;
        let dim = self.dim();
        let mut out = vec![linalg::zeros(dim); order + 1];
        for term in &self.terms {
            let jet = term.coefficient.jet(s, order);
            for (k, slot) in out.iter_mut().enumerate() {
                let weight = jet.derivative(k);
                if weight != 0.0 {
                    *slot += &term.embedded * c(weight);
                }
            }
        }
        Ok(out)
    }

    pub fn hamiltonian_matrix(&self, s: f64) -> Matrix {
        let mut total = linalg::zeros(self.dim());
        for term in &self.terms {
            let weight = term.coefficient.value(s);
            if weight != 0.0 {
                total += &term.embedded * c(weight);
            }
        }
        total
    }

    pub fn hamiltonian(&self, s: f64) -> Result<ManyBodyOperator> {
        ManyBodyOperator::hermitian(self.hamiltonian_matrix(s))
    }

    /// `Σ_X Φ_s^(k)(X)` assembled on the full chain.
    pub fn derivative(&self, s: f64, k: usize) -> Result<ManyBodyOperator> {
        let mut all = self.derivatives(s, k)?;
        ManyBodyOperator::hermitian(all.pop().expect("order + 1 entries"))
    }

    /// The interaction `Φ_s`, merged by support.
    pub fn potential(&self, s: f64) -> Result<InteractionPotential> {
        self.potential_derivative(s, 0)
    }

    pub fn potential_derivative(&self, s: f64, k: usize) -> Result<InteractionPotential> {
        self.check_order(k)?;
        let terms = self.terms.iter().map(|t| {
            let weight = t.coefficient.jet(s, k).derivative(k);
            t.op.scaled(weight)
        });
        InteractionPotential::new(self.chain, terms)
    }

    /// Adds `scale·op` with a constant coefficient; used to build perturbed
    /// Hamiltonians `H + αV`.
    pub fn with_static_term(&self, op: LocalOperator, scale: f64) -> Result<Self> {
        let extra = HamiltonianFamily::new(
            self.chain,
            [(op, Arc::new(Constant(scale)) as SharedProfile)],
            self.k_max,
            "",
        )?;
        let mut out = self.clone();
        out.terms.extend(extra.terms);
        Ok(out)
    }
}

/// `H_s = −Σ_x h_s·σ⃗_x`: independent spins following a unit field.
pub fn rotating_field_chain(sites: usize, path: FieldPath) -> Result<HamiltonianFamily> {
    let chain = Chain::spin_half(sites)?;
    for j in 0..=64 {
        let s = j as f64 / 64.0;
        let h = path.at(s);
        let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "field must have unit length, |h({s})| = {norm}"
            )));
        }
    }
    let paulis = [linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()];
    let mut terms = Vec::new();
    for x in 0..sites {
        for (axis, sigma) in paulis.iter().enumerate() {
            let coefficient: SharedProfile = Arc::new(Affine {
                offset: 0.0,
                scale: -1.0,
                inner: path.components[axis].clone(),
            });
            terms.push((LocalOperator::site(x, sigma.clone())?, coefficient));
        }
    }
    HamiltonianFamily::new(chain, terms, DEFAULT_K_MAX, "rotating-field")
}

/// Parameters of the driven Ising chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    pub coupling: f64,
    pub field: f64,
    pub amplitude: f64,
    /// Static `−h_z Σ Z_x`. Nonzero values break the `Π X_x` parity, which
    /// otherwise forces every parity-odd observable such as `Y_x` to vanish.
    pub longitudinal: f64,
}

impl IsingParams {
    pub fn transverse(coupling: f64, field: f64, amplitude: f64) -> Self {
        IsingParams {
            coupling,
            field,
            amplitude,
            longitudinal: 0.0,
        }
    }

    pub fn with_longitudinal(self, longitudinal: f64) -> Self {
        IsingParams {
            longitudinal,
            ..self
        }
    }
}

/// `H_s = −J Σ Z_x Z_{x+1} − Σ (h₀ + a·g(s)) X_x − h_z Σ Z_x` with open
/// boundaries.
pub fn driven_ising_chain(
    sites: usize,
    params: IsingParams,
    switch: SharedProfile,
) -> Result<HamiltonianFamily> {
    let chain = Chain::spin_half(sites)?;
    let z = linalg::pauli_z();
    let mut terms: Vec<(LocalOperator, SharedProfile)> = Vec::new();
    for x in 0..sites.saturating_sub(1) {
        terms.push((
            LocalOperator::pair(x, &z, x + 1, &z)?,
            Arc::new(Constant(-params.coupling)),
        ));
    }
    let field: SharedProfile = Arc::new(Affine {
        offset: -params.field,
        scale: -params.amplitude,
        inner: switch,
    });
    for x in 0..sites {
        terms.push((LocalOperator::site(x, linalg::pauli_x())?, field.clone()));
        if params.longitudinal != 0.0 {
            terms.push((
                LocalOperator::site(x, z.clone())?,
                Arc::new(Constant(-params.longitudinal)),
            ));
        }
    }
    HamiltonianFamily::new(chain, terms, DEFAULT_K_MAX, "driven-ising")
}

/// `H_s = H_a + c(s)·H_b` for two fixed local potentials.
pub fn affine_family(
    chain: Chain,
    base: impl IntoIterator<Item = LocalOperator>,
    drive: impl IntoIterator<Item = LocalOperator>,
    coefficient: SharedProfile,
) -> Result<HamiltonianFamily> {
    let mut terms: Vec<(LocalOperator, SharedProfile)> = base
        .into_iter()
        .map(|op| (op, Arc::new(Constant(1.0)) as SharedProfile))
        .collect();
    terms.extend(drive.into_iter().map(|op| (op, coefficient.clone())));
    HamiltonianFamily::new(chain, terms, DEFAULT_K_MAX, "affine")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn switch_endpoints_and_midpoint() {
        let g = SwitchFunction::default();
        assert_eq!(g.g(0.0), 0.0);
        assert_relative_eq!(g.g(1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.g(0.5), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn switch_is_flat_near_endpoints() {
        let g = SwitchFunction::default();
        for k in 1..=6 {
            assert!(g.derivative(1e-3, k).unwrap().abs() < 1e-100);
            assert!(g.derivative(1.0 - 1e-3, k).unwrap().abs() < 1e-100);
        }
        assert!(matches!(
            g.derivative(0.3, 7),
            Err(Error::DerivativeOrder { order: 7, max: 6 })
        ));
    }

    #[test]
    fn switch_derivatives_match_differences() {
        let g = SwitchFunction::default();
        let s = 0.37;
        let h = 1e-4;
        for k in 1..=3 {
            let fd = (g.derivative(s + h, k - 1).unwrap() - g.derivative(s - h, k - 1).unwrap())
                / (2.0 * h);
            let exact = g.derivative(s, k).unwrap();
            assert_relative_eq!(fd, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn switch_is_monotone() {
        let g = SwitchFunction::default();
        let values: Vec<f64> = (0..=200).map(|j| g.g(j as f64 / 200.0)).collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rotating_field_fixed_axis_ground_energy() {
        for sites in 1..=4 {
            let fam = rotating_field_chain(sites, FieldPath::fixed([0.0, 0.0, 1.0])).unwrap();
            let eig = linalg::eigh(fam.hamiltonian(0.3).unwrap().matrix());
            assert_relative_eq!(eig.values[0], -(sites as f64), epsilon = 1e-12);
            assert_relative_eq!(eig.values[1] - eig.values[0], 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotating_field_rejects_non_unit_field() {
        let err = rotating_field_chain(2, FieldPath::fixed([0.0, 0.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn closed_arc_returns_to_start() {
        let fam = rotating_field_chain(2, FieldPath::closed_arc(SwitchFunction::default())).unwrap();
        let h0 = fam.hamiltonian_matrix(0.0);
        let h1 = fam.hamiltonian_matrix(1.0);
        assert!((h0 - h1).norm() < 1e-14);
        let mid = FieldPath::closed_arc(SwitchFunction::default()).at(0.5);
        assert_relative_eq!(mid[0], 1.0, epsilon = 1e-12);
        assert!(fam.flat_endpoints());
    }

    #[test]
    fn ising_without_coupling_is_product() {
        let params = IsingParams::transverse(0.0, 1.0, 0.5);
        let g = SwitchFunction::default();
        let fam = driven_ising_chain(3, params, Arc::new(g.clone())).unwrap();
        let s = 0.6;
        let eig = linalg::eigh(fam.hamiltonian(s).unwrap().matrix());
        assert_relative_eq!(eig.values[0], -3.0 * (1.0 + 0.5 * g.g(s)), epsilon = 1e-12);
    }

    #[test]
    fn ising_two_sites_matches_closed_form() {
        // H = −J ZZ − h(X₁ + X₂); in the even sector {|00⟩+|11⟩, |01⟩+|10⟩}
        // the ground energy is −√(J² + 4h²).
        let params = IsingParams::transverse(0.2, 1.0, 0.3);
        let fam = driven_ising_chain(2, params, Arc::new(SwitchFunction::default())).unwrap();
        let eig = linalg::eigh(fam.hamiltonian(0.0).unwrap().matrix());
        let ground = -(0.04_f64 + 4.0).sqrt();
        assert_relative_eq!(eig.values[0], ground, epsilon = 1e-12);
        // odd sector: ±J shifted, lowest −J... spectrum {−√(J²+4h²), −J, J, √(J²+4h²)}
        assert_relative_eq!(eig.values[1], -0.2, epsilon = 1e-12);
    }

    #[test]
    fn ising_drive_derivative() {
        let params = IsingParams::transverse(0.4, 1.0, 0.5);
        let g = SwitchFunction::default();
        let fam = driven_ising_chain(3, params, Arc::new(g.clone())).unwrap();
        let s = 0.42;
        let d = fam.derivative(s, 1).unwrap();
        let x_sum: Matrix = (0..3)
            .map(|x| {
                embed(&LocalOperator::site(x, linalg::pauli_x()).unwrap(), fam.chain())
                    .unwrap()
                    .into_matrix()
            })
            .fold(linalg::zeros(8), |a, b| a + b);
        let expect = x_sum * c(-0.5 * g.derivative(s, 1).unwrap());
        assert!((d.matrix() - expect).norm() < 1e-13);
    }

    #[test]
    fn constant_family_has_no_derivative() {
        let params = IsingParams::transverse(0.4, 1.0, 0.0);
        let fam = driven_ising_chain(3, params, Arc::new(SwitchFunction::default())).unwrap();
        for s in [0.1, 0.5, 0.9] {
            assert_eq!(fam.derivative(s, 1).unwrap().norm(), 0.0);
        }
        assert!(matches!(
            fam.derivative(0.5, 9),
            Err(Error::DerivativeOrder { .. })
        ));
    }

    #[test]
    fn finite_difference_consistency() {
        let fam = rotating_field_chain(2, FieldPath::switched_rotation(1.2, SwitchFunction::default()))
            .unwrap();
        let h = 1e-4;
        for s in [0.23, 0.5, 0.71] {
            let fd = (fam.hamiltonian_matrix(s + h) - fam.hamiltonian_matrix(s - h)) * c(0.5 / h);
            let exact = fam.derivative(s, 1).unwrap().into_matrix();
            let rel = (fd - &exact).norm() / exact.norm();
            assert!(rel < 1e-6, "s = {s}: relative error {rel}");
        }
    }
}
