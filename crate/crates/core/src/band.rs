//! Two-band non-Hermitian Bloch Hamiltonians `H(k) = h(k)·σ` with a complex
//! vector field, their biorthogonal eigensystems, and eigenstate spin textures.

use nalgebra::RowVector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli, spin_texture, Mat2, Vec2, C64, I, ZERO};

/// Default lower bound on |E²| below which a field is treated as an exceptional point.
pub const EP_THRESHOLD: f64 = 1e-12;

/// Parameters of the field family
/// `hx = J0 + J1 cos k + J2 cos 2k`, `hy = J1 sin k + J2 sin 2k − iδ`, `hz = const`.
///
/// `j2 = 0` is the two-parameter experimental family; `hz = 0` restores chiral symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub j0: f64,
    pub j1: f64,
    #[serde(default)]
    pub j2: f64,
    pub delta: f64,
    pub hz: f64,
}

impl ModelParams {
    pub fn new(j0: f64, j1: f64, j2: f64, delta: f64, hz: f64) -> Result<Self> {
        let p = Self { j0, j1, j2, delta, hz };
        p.validate()?;
        Ok(p)
    }

    /// The measured family with `J1 = 1, δ = 0.3, hz = 0.5` and no second-neighbour hopping.
    pub fn experimental(j0: f64) -> Self {
        Self { j0, j1: 1.0, j2: 0.0, delta: 0.3, hz: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.j0, self.j1, self.j2, self.delta, self.hz];
        if all.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("model parameters must be finite: {self:?}")))
        }
    }

    pub fn field(&self, k: f64) -> ComplexField {
        let (s1, c1) = k.sin_cos();
        let (s2, c2) = (2.0 * k).sin_cos();
        ComplexField {
            hx: C64::new(self.j0 + self.j1 * c1 + self.j2 * c2, 0.0),
            hy: C64::new(self.j1 * s1 + self.j2 * s2, -self.delta),
            hz: C64::new(self.hz, 0.0),
        }
    }

    /// Analytic `∂_k h(k)`.
    pub fn field_derivative(&self, k: f64) -> ComplexField {
        let (s1, c1) = k.sin_cos();
        let (s2, c2) = (2.0 * k).sin_cos();
        ComplexField {
            hx: C64::new(-self.j1 * s1 - 2.0 * self.j2 * s2, 0.0),
            hy: C64::new(self.j1 * c1 + 2.0 * self.j2 * c2, 0.0),
            hz: ZERO,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.delta == 0.0
    }
}

/// `eval_field` as a free function.
pub fn eval_field(params: &ModelParams, k: f64) -> ComplexField {
    params.field(k)
}

/// The complex Bloch vector `h(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    pub hx: C64,
    pub hy: C64,
    pub hz: C64,
}

impl ComplexField {
    pub fn new(hx: C64, hy: C64, hz: C64) -> Self {
        Self { hx, hy, hz }
    }

    pub fn real(hx: f64, hy: f64, hz: f64) -> Self {
        Self::new(hx.into(), hy.into(), hz.into())
    }

    /// `E² = hx² + hy² + hz²` (no conjugation).
    pub fn energy_squared(&self) -> C64 {
        self.hx * self.hx + self.hy * self.hy + self.hz * self.hz
    }

    /// `hx² + hy²`.
    pub fn transverse_squared(&self) -> C64 {
        self.hx * self.hx + self.hy * self.hy
    }

    pub fn matrix(&self) -> Mat2 {
        pauli(1) * self.hx + pauli(2) * self.hy + pauli(3) * self.hz
    }

    pub fn is_finite(&self) -> bool {
        [self.hx, self.hy, self.hz].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    Plus,
    Minus,
}

impl Band {
    pub const BOTH: [Band; 2] = [Band::Plus, Band::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Band::Plus => 1.0,
            Band::Minus => -1.0,
        }
    }

    fn index(self) -> usize {
        match self {
            Band::Plus => 0,
            Band::Minus => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Which closed form produced an eigenvector pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorForm {
    /// `|R⟩ ∝ (hx − i hy, E − hz)`, `⟨L| ∝ (hx + i hy, E − hz)`.
    Standard,
    /// `|R⟩ ∝ (E + hz, hx + i hy)`, `⟨L| ∝ (E + hz, hx − i hy)`; used when the standard form degenerates.
    Alternate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchTag {
    /// The raw `sqrt` landed on Re = 0, Im < 0 and was negated.
    pub negated: bool,
    pub forms: [VectorForm; 2],
}

/// Biorthogonal eigensystem of `h·σ` at a single k.
///
/// Right vectors are stored with unit Euclidean norm; left covectors are
/// scaled so that `⟨L_μ|R_μ⟩ = 1`. `E₋ = −E₊`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem {
    pub energy_plus: C64,
    pub right: [Vec2; 2],
    pub left: [RowVector2<C64>; 2],
    pub branch: BranchTag,
}

impl EigenSystem {
    pub fn energy(&self, band: Band) -> C64 {
        self.energy_plus * band.sign()
    }

    pub fn right(&self, band: Band) -> &Vec2 {
        &self.right[band.index()]
    }

    /// The covector `⟨φ^L_μ|` as a row.
    pub fn left(&self, band: Band) -> &RowVector2<C64> {
        &self.left[band.index()]
    }

    /// The ket `|φ^L_μ⟩` (adjoint of the stored covector).
    pub fn left_ket(&self, band: Band) -> Vec2 {
        self.left[band.index()].adjoint()
    }

    /// Expansion coefficients `c_μ = ⟨φ^L_μ|ψ⟩` of a ket in the right eigenbasis.
    pub fn coefficients(&self, psi: &Vec2) -> [C64; 2] {
        [(self.left[0] * psi)[0], (self.left[1] * psi)[0]]
    }

    pub fn texture(&self, band: Band, axis: Axis) -> f64 {
        eigenstate_texture(self, band, axis)
    }

    /// Azimuth `φ^{μμ} = atan2(⟨σ_y⟩_μ, ⟨σ_x⟩_μ)` of a right eigenstate.
    pub fn azimuth(&self, band: Band) -> f64 {
        let t = spin_texture(self.right(band));
        t[1].atan2(t[0])
    }
}

/// Principal square root with the tie-break Re = 0 ⇒ Im > 0.
pub fn principal_sqrt(z: C64) -> (C64, bool) {
    let s = z.sqrt();
    if s.re == 0.0 && s.im < 0.0 {
        (-s, true)
    } else {
        (s, false)
    }
}

pub fn eigensystem(h: &ComplexField) -> Result<EigenSystem> {
    eigensystem_with_threshold(h, EP_THRESHOLD)
}

pub fn eigensystem_with_threshold(h: &ComplexField, threshold: f64) -> Result<EigenSystem> {
    if !h.is_finite() {
        return Err(Error::InvalidInput("non-finite field".into()));
    }
    let e2 = h.energy_squared();
    if e2.norm() < threshold {
        return Err(Error::ExceptionalPoint { magnitude: e2.norm(), threshold });
    }
    let (e_plus, negated) = principal_sqrt(e2);
    let a = h.hx - I * h.hy;
    let b = h.hx + I * h.hy;

    let mut right = [Vec2::zeros(); 2];
    let mut left = [RowVector2::zeros(); 2];
    let mut forms = [VectorForm::Standard; 2];
    for (idx, sign) in [1.0, -1.0].into_iter().enumerate() {
        let e = e_plus * sign;
        let std_r = Vec2::new(a, e - h.hz);
        let alt_r = Vec2::new(e + h.hz, b);
        let (r, l, form) = if std_r.norm() >= alt_r.norm() {
            (std_r, RowVector2::new(b, e - h.hz), VectorForm::Standard)
        } else {
            (alt_r, RowVector2::new(e + h.hz, a), VectorForm::Alternate)
        };
        let r = r / C64::from(r.norm());
        let overlap = (l * r)[0];
        right[idx] = r;
        left[idx] = l / overlap;
        forms[idx] = form;
    }
    Ok(EigenSystem { energy_plus: e_plus, right, left, branch: BranchTag { negated, forms } })
}

/// `⟨φ^R_μ|σ_α|φ^R_μ⟩ / ⟨φ^R_μ|φ^R_μ⟩`.
pub fn eigenstate_texture(es: &EigenSystem, band: Band, axis: Axis) -> f64 {
    spin_texture(es.right(band))[axis.index()]
}

/// Complex polar and azimuthal angles of `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    pub beta: C64,
    pub phi_yx: C64,
}

pub fn bloch_angles(h: &ComplexField) -> Result<BlochAngles> {
    let e2 = h.energy_squared();
    if e2.norm() < EP_THRESHOLD {
        return Err(Error::ExceptionalPoint { magnitude: e2.norm(), threshold: EP_THRESHOLD });
    }
    let phi_yx = azimuth_complex(h)?;
    let (e_plus, _) = principal_sqrt(e2);
    let beta = (h.hz / e_plus).acos();
    Ok(BlochAngles { beta, phi_yx })
}

/// Complex `φ_yx = arctan(hy/hx)` assembled from
/// `Re = ½ arg[(hx + i hy)·conj(hx − i hy)]`, `Im = −½ ln|(hx + i hy)/(hx − i hy)|`.
pub fn azimuth_complex(h: &ComplexField) -> Result<C64> {
    let t2 = h.transverse_squared();
    let p = h.hx + I * h.hy;
    let q = h.hx - I * h.hy;
    if t2.norm() < EP_THRESHOLD || p.norm() == 0.0 || q.norm() == 0.0 {
        return Err(Error::BranchPole { magnitude: t2.norm() });
    }
    let re = 0.5 * (p * q.conj()).arg();
    let im = -0.5 * (p.norm() / q.norm()).ln();
    Ok(C64::new(re, im))
}

/// `Re φ_yx` in (−π/2, π/2].
pub fn re_phi_yx(h: &ComplexField) -> Result<f64> {
    azimuth_complex(h).map(|z| z.re)
}
