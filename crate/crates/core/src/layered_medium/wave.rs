use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::{IndexModel, LayerStack, Material};
use crate::{Error, Result, C64};

pub type Mat2 = Matrix2<C64>;

/// Largest `|Im k| d` accepted before a layer is declared to overflow.
pub const OVERFLOW_EXPONENT: f64 = 700.0;
/// Wronskians below this magnitude are treated as a hit on a pole.
pub const WRONSKIAN_FLOOR: f64 = 1e-290;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Field value and spatial derivative at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldState {
    pub value: C64,
    pub slope: C64,
}

impl FieldState {
    fn apply(self, m: &Mat2) -> Self {
        Self {
            value: m[(0, 0)] * self.value + m[(0, 1)] * self.slope,
            slope: m[(1, 0)] * self.value + m[(1, 1)] * self.slope,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Everything the Green's function at a single point needs.
#[derive(Clone, Copy, Debug)]
pub struct GreenParts {
    /// Solution that is outgoing into the left cladding.
    pub left: FieldState,
    /// Solution that is outgoing into the right cladding.
    pub right: FieldState,
    pub wronskian: C64,
}

impl GreenParts {
    pub fn green(&self) -> C64 {
        self.left.value * self.right.value / self.wronskian
    }
}

/// A stack together with the conserved in-plane wavevector.
///
/// Units: `c = 1`, so `k_z² = n(ω)² ω² − k_par²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveProblem {
    pub stack: LayerStack,
    #[serde(default)]
    pub k_par: f64,
}

/// `sin(z)/z`, accurate near zero.
fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Characteristic matrix that advances `(E, E')` by a distance `d` in a
/// homogeneous medium with wavevector `k`. Depends only on `k²`.
pub fn propagation_matrix(k: C64, d: f64) -> Mat2 {
    let kd = k * d;
    let c = kd.cos();
    let s = sinc(kd) * d;
    Mat2::new(c, s, -k * k * s, c)
}

impl WaveProblem {
    pub fn new(stack: LayerStack, k_par: f64) -> Result<Self> {
        stack.validate()?;
        if !(k_par.is_finite() && k_par >= 0.0) {
            return Err(Error::InvalidInput(format!("in-plane wavevector {k_par} must be finite and non-negative")));
        }
        Ok(Self { stack, k_par })
    }

    pub fn normal_incidence(stack: LayerStack) -> Result<Self> {
        Self::new(stack, 0.0)
    }

    fn check_omega(omega: C64) -> Result<()> {
        if !(omega.re.is_finite() && omega.im.is_finite()) {
            return Err(Error::InvalidInput(format!("frequency {omega} is not finite")));
        }
        if omega == C64::new(0.0, 0.0) {
            return Err(Error::ZeroFrequency);
        }
        Ok(())
    }

    /// `n² ω² − k_par²`, arranged to avoid cancellation near grazing incidence.
    pub fn kz_squared(&self, material: &Material, omega: C64) -> C64 {
        material.susceptibility(omega) * omega * omega + (omega - self.k_par) * (omega + self.k_par)
    }

    /// Outgoing cladding wavevector.
    ///
    /// At normal incidence `k = n(ω) ω` is used directly, which is entire in
    /// `ω` for constant indices. Otherwise the root is chosen with
    /// `Im k ≥ 0` on the real axis and continued vertically into the complex
    /// plane by picking the root closest to the real-axis value.
    pub fn cladding_kz(&self, side: Side, omega: C64) -> Result<C64> {
        let m = match side {
            Side::Left => &self.stack.left,
            Side::Right => &self.stack.right,
        };
        if self.k_par == 0.0 {
            let k = m.index(omega) * omega;
            if k == C64::new(0.0, 0.0) {
                return Err(Error::BranchPoint { omega });
            }
            return Ok(k);
        }
        let k2 = self.kz_squared(m, omega);
        if k2 == C64::new(0.0, 0.0) {
            return Err(Error::BranchPoint { omega });
        }
        let k = k2.sqrt();
        let mut k_ref = self.kz_squared(m, C64::new(omega.re, 0.0)).sqrt();
        if k_ref.im < 0.0 || (k_ref.im == 0.0 && k_ref.re < 0.0) {
            k_ref = -k_ref;
        }
        if k_ref == C64::new(0.0, 0.0) {
            // Continue from the upper side of the branch point.
            k_ref = I;
        }
        Ok(if (k - k_ref).norm() <= (k + k_ref).norm() { k } else { -k })
    }

    /// Zeros of `k_z²` in the claddings at oblique incidence. Each one starts
    /// a cut of [`Self::cladding_kz`] running straight down from it; at normal
    /// incidence there are none.
    pub fn branch_points(&self) -> Vec<C64> {
        if self.k_par == 0.0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for m in [&self.stack.left, &self.stack.right] {
            // Solve n(ω) ω = ±k_par.
            for k in [self.k_par, -self.k_par] {
                let roots = match &m.model {
                    IndexModel::Constant { n_minus_one } => vec![k / (1.0 + n_minus_one)],
                    IndexModel::Lorentzian { background_minus_one, resonance, width, strength } => {
                        // (1 + b) ω (c − ω) + s ω = k (c − ω) with c the complex resonance.
                        let c = C64::new(*resonance, -0.5 * width);
                        let nb = 1.0 + background_minus_one;
                        let (qa, qb, qc) = (-nb, nb * c + strength + k, -k * c);
                        let d = (qb * qb - 4.0 * qa * qc).sqrt();
                        vec![(-qb + d) / (2.0 * qa), (-qb - d) / (2.0 * qa)]
                    }
                };
                out.extend(roots.into_iter().filter(|z| z.re.is_finite() && z.im.is_finite()));
            }
        }
        out.sort_by(|a, b| a.re.total_cmp(&b.re));
        out.dedup();
        out
    }

    fn layer_kz(&self, j: usize, omega: C64) -> Result<C64> {
        let layer = &self.stack.layers[j];
        let k = self.kz_squared(&layer.material, omega).sqrt();
        let exponent = k.im.abs() * layer.thickness;
        if exponent > OVERFLOW_EXPONENT {
            return Err(Error::Overflow { layer: j, exponent });
        }
        Ok(k)
    }

    /// Matrix of layer `j` mapping `(E, E')` at its right face to its left face.
    pub fn layer_matrix(&self, j: usize, omega: C64) -> Result<Mat2> {
        Self::check_omega(omega)?;
        let k = self.layer_kz(j, omega)?;
        Ok(propagation_matrix(k, -self.stack.layers[j].thickness))
    }

    /// Ordered product of all layer matrices: right face of the stack to the left face.
    pub fn interior_matrix(&self, omega: C64) -> Result<Mat2> {
        let mut m = Mat2::identity();
        for j in 0..self.stack.layers.len() {
            m *= self.layer_matrix(j, omega)?;
        }
        Ok(m)
    }

    /// Maps plane-wave amplitudes `(A, B)` of `A e^{ikx} + B e^{-ikx}` in the
    /// right cladding to those in the left cladding, each referenced to its
    /// own interface.
    pub fn transfer_matrix(&self, omega: C64) -> Result<Mat2> {
        Self::check_omega(omega)?;
        let kl = self.cladding_kz(Side::Left, omega)?;
        let kr = self.cladding_kz(Side::Right, omega)?;
        let to_amplitudes = Mat2::new(C64::new(0.5, 0.0), 0.5 / (I * kl), C64::new(0.5, 0.0), -0.5 / (I * kl));
        let from_amplitudes = Mat2::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0), I * kr, -I * kr);
        Ok(to_amplitudes * self.interior_matrix(omega)? * from_amplitudes)
    }

    /// Amplitude reflection coefficient for incidence from the left.
    pub fn reflection(&self, omega: C64) -> Result<C64> {
        let m = self.transfer_matrix(omega)?;
        Ok(m[(1, 0)] / m[(0, 0)])
    }

    /// Amplitude transmission coefficient for incidence from the left.
    pub fn transmission(&self, omega: C64) -> Result<C64> {
        let m = self.transfer_matrix(omega)?;
        Ok(1.0 / m[(0, 0)])
    }

    pub fn reflectance(&self, omega: f64) -> Result<f64> {
        Ok(self.reflection(omega.into())?.norm_sqr())
    }

    fn cladding_field(k: C64, start: FieldState, s: f64) -> FieldState {
        let a = 0.5 * (start.value + start.slope / (I * k));
        let b = 0.5 * (start.value - start.slope / (I * k));
        let ep = (I * k * s).exp();
        let em = (-I * k * s).exp();
        FieldState { value: a * ep + b * em, slope: I * k * (a * ep - b * em) }
    }

    /// Solution that is purely outgoing into the left cladding,
    /// normalised to `e^{-i k_L x}` there.
    pub fn left_solution(&self, x: f64, omega: C64) -> Result<FieldState> {
        Self::check_omega(omega)?;
        let kl = self.cladding_kz(Side::Left, omega)?;
        if x < 0.0 {
            let v = (-I * kl * x).exp();
            return Ok(FieldState { value: v, slope: -I * kl * v });
        }
        let z = self.stack.interfaces();
        let mut state = FieldState { value: C64::new(1.0, 0.0), slope: -I * kl };
        for j in 0..self.stack.layers.len() {
            let k = self.layer_kz(j, omega)?;
            if x <= z[j + 1] {
                return Ok(state.apply(&propagation_matrix(k, x - z[j])));
            }
            state = state.apply(&propagation_matrix(k, z[j + 1] - z[j]));
        }
        let kr = self.cladding_kz(Side::Right, omega)?;
        Ok(Self::cladding_field(kr, state, x - z[z.len() - 1]))
    }

    /// Solution that is purely outgoing into the right cladding,
    /// normalised to `e^{i k_R (x − D)}` there.
    pub fn right_solution(&self, x: f64, omega: C64) -> Result<FieldState> {
        Self::check_omega(omega)?;
        let kr = self.cladding_kz(Side::Right, omega)?;
        let z = self.stack.interfaces();
        let d = z[z.len() - 1];
        if x > d {
            let v = (I * kr * (x - d)).exp();
            return Ok(FieldState { value: v, slope: I * kr * v });
        }
        let mut state = FieldState { value: C64::new(1.0, 0.0), slope: I * kr };
        for j in (0..self.stack.layers.len()).rev() {
            let k = self.layer_kz(j, omega)?;
            if x >= z[j] {
                return Ok(state.apply(&propagation_matrix(k, x - z[j + 1])));
            }
            state = state.apply(&propagation_matrix(k, z[j] - z[j + 1]));
        }
        let kl = self.cladding_kz(Side::Left, omega)?;
        Ok(Self::cladding_field(kl, state, x))
    }

    /// Wronskian `u_L u_R' − u_L' u_R` of the two outgoing solutions.
    pub fn wronskian(&self, omega: C64) -> Result<C64> {
        let kl = self.cladding_kz(Side::Left, omega)?;
        let r0 = self.right_solution(0.0, omega)?;
        Ok(r0.slope + I * kl * r0.value)
    }

    /// Outgoing solutions and Wronskian at a single point.
    pub fn green_parts(&self, x: f64, omega: C64) -> Result<GreenParts> {
        let left = self.left_solution(x, omega)?;
        let right = self.right_solution(x, omega)?;
        let wronskian = left.value * right.slope - left.slope * right.value;
        if !(wronskian.norm() >= WRONSKIAN_FLOOR) {
            return Err(Error::NearPole { omega });
        }
        Ok(GreenParts { left, right, wronskian })
    }

    /// Outgoing Green's function of `∂²G + k_z²(x) G = δ(x − x')`.
    pub fn green(&self, x: f64, xp: f64, omega: C64) -> Result<C64> {
        if x == xp {
            return Ok(self.green_parts(x, omega)?.green());
        }
        let (lo, hi) = if x < xp { (x, xp) } else { (xp, x) };
        let ul = self.left_solution(lo, omega)?;
        let ur = self.right_solution(hi, omega)?;
        let w = self.wronskian(omega)?;
        if !(w.norm() >= WRONSKIAN_FLOOR) {
            return Err(Error::NearPole { omega });
        }
        Ok(ul.value * ur.value / w)
    }
}
