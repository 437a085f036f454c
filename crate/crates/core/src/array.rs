//! Planar antenna arrays and their oversampled DFT codebooks.
//!
//! Elements are isotropic. Flat element index is `p * n_h + q` for vertical
//! row `p` and horizontal column `q`, so a UPA steering vector is the
//! Kronecker product `a_v (x) a_h`. Direction cosines follow
//! `u_h = sin(theta) cos(phi)`, `u_v = sin(theta) sin(phi)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::SphericalPoint;

/// Tolerance for the unit-modulus check on beam weights.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrayError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("dimension mismatch: expected {expected} weights, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

fn domain(msg: impl Into<String>) -> ArrayError {
    ArrayError::Domain(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_h: usize,
    pub n_v: usize,
    pub spacing_wavelengths: f64,
}

impl ArrayGeometry {
    pub fn new(n_h: usize, n_v: usize, spacing_wavelengths: f64) -> Result<Self, ArrayError> {
        let g = Self { n_h, n_v, spacing_wavelengths };
        g.validate()?;
        Ok(g)
    }

    /// Half-wavelength UPA.
    pub fn upa(n_h: usize, n_v: usize) -> Self {
        Self { n_h, n_v, spacing_wavelengths: 0.5 }
    }

    pub fn validate(&self) -> Result<(), ArrayError> {
        if self.n_h == 0 || self.n_v == 0 {
            return Err(domain("array needs at least one element per axis"));
        }
        if !(self.spacing_wavelengths.is_finite() && self.spacing_wavelengths > 0.0) {
            return Err(domain("element spacing must be finite and > 0"));
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.n_h * self.n_v
    }

    pub fn len_along(&self, axis: Axis) -> usize {
        match axis {
            Axis::Horizontal => self.n_h,
            Axis::Vertical => self.n_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[serde(alias = "h")]
    Horizontal,
    #[serde(alias = "v")]
    Vertical,
}

/// Unit-modulus analog beamforming vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    weights: Vec<Complex64>,
    /// `(theta, phi)` the beam was steered toward, when known.
    pub pointing: Option<(f64, f64)>,
}

impl BeamWeights {
    pub fn new(weights: Vec<Complex64>, pointing: Option<(f64, f64)>) -> Result<Self, ArrayError> {
        if weights.is_empty() {
            return Err(domain("beam weights must not be empty"));
        }
        if let Some(k) = weights.iter().position(|w| (w.norm() - 1.0).abs() > UNIT_MODULUS_TOL) {
            return Err(domain(format!("weight {k} is not unit modulus")));
        }
        Ok(Self { weights, pointing })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn direction_cosines(theta: f64, phi: f64) -> (f64, f64) {
    let st = theta.sin();
    (st * phi.cos(), st * phi.sin())
}

/// Polar/azimuth angles of a visible direction-cosine pair.
pub fn angles_from_direction_cosines(u_h: f64, u_v: f64) -> Option<(f64, f64)> {
    let rho = u_h.hypot(u_v);
    if rho > 1.0 {
        return None;
    }
    let phi = if rho == 0.0 { 0.0 } else { u_v.atan2(u_h) };
    Some((rho.asin(), phi))
}

fn check_angles(theta: f64, phi: f64) -> Result<(), ArrayError> {
    if !(theta.is_finite() && (0.0..FRAC_PI_2).contains(&theta)) {
        return Err(domain(format!("theta {theta} outside [0, pi/2)")));
    }
    if !(phi.is_finite() && phi > -PI && phi <= PI) {
        return Err(domain(format!("phi {phi} outside (-pi, pi]")));
    }
    Ok(())
}

/// ULA response `exp(j 2 pi d k u)`, `k = 0..n`.
pub fn steering_vector_ula(n: usize, spacing: f64, u: f64) -> Result<Vec<Complex64>, ArrayError> {
    if !(u.is_finite() && u.abs() <= 1.0) {
        return Err(domain(format!("direction cosine {u} outside [-1, 1]")));
    }
    Ok(ula_unchecked(n, spacing, u))
}

fn ula_unchecked(n: usize, spacing: f64, u: f64) -> Vec<Complex64> {
    let step = 2.0 * PI * spacing * u;
    (0..n).map(|k| Complex64::from_polar(1.0, step * k as f64)).collect()
}

fn kron(a_v: &[Complex64], a_h: &[Complex64]) -> Vec<Complex64> {
    a_v.iter().flat_map(|&v| a_h.iter().map(move |&h| v * h)).collect()
}

/// UPA steering vector from direction cosines. Values outside the visible
/// region are allowed; they are valid (aliased) phase profiles.
pub fn steering_vector_dc(geom: &ArrayGeometry, u_h: f64, u_v: f64) -> Vec<Complex64> {
    let a_h = ula_unchecked(geom.n_h, geom.spacing_wavelengths, u_h);
    let a_v = ula_unchecked(geom.n_v, geom.spacing_wavelengths, u_v);
    kron(&a_v, &a_h)
}

pub fn steering_vector_upa(geom: &ArrayGeometry, theta: f64, phi: f64) -> Result<BeamWeights, ArrayError> {
    check_angles(theta, phi)?;
    let (u_h, u_v) = direction_cosines(theta, phi);
    Ok(BeamWeights { weights: steering_vector_dc(geom, u_h, u_v), pointing: Some((theta, phi)) })
}

/// Oversampled DFT codebook on a uniform direction-cosine lattice.
///
/// Codeword `i_v * (n_h q_h) + i_h` points at
/// `u_h = -1 + 2 i_h / (n_h q_h)`, `u_v = -1 + 2 i_v / (n_v q_v)`. Lattice
/// points outside the open unit disk (including endfire points on its rim)
/// keep their index but are never selected.
#[derive(Debug, Clone)]
pub struct Codebook {
    geometry: ArrayGeometry,
    codewords: Vec<BeamWeights>,
    grid: Vec<(f64, f64)>,
    visible: Vec<bool>,
    oversampling: (usize, usize),
}

impl Codebook {
    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, index: usize) -> &BeamWeights {
        &self.codewords[index]
    }

    pub fn codewords(&self) -> &[BeamWeights] {
        &self.codewords
    }

    /// `(u_h, u_v)` lattice direction of each codeword.
    pub fn grid(&self) -> &[(f64, f64)] {
        &self.grid
    }

    pub fn oversampling(&self) -> (usize, usize) {
        self.oversampling
    }

    /// Lattice points per axis, `(n_h q_h, n_v q_v)`.
    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.geometry.n_h * self.oversampling.0, self.geometry.n_v * self.oversampling.1)
    }

    /// Direction-cosine spacing of the lattice per axis.
    pub fn lattice_step(&self) -> (f64, f64) {
        let (m_h, m_v) = self.lattice_dims();
        (2.0 / m_h as f64, 2.0 / m_v as f64)
    }

    pub fn is_visible(&self, index: usize) -> bool {
        self.visible[index]
    }

    pub fn visible_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.visible.iter().enumerate().filter_map(|(i, &v)| v.then_some(i))
    }

    /// Pointing direction of a visible codeword as a unit-range spherical point.
    pub fn pointing(&self, index: usize) -> Option<SphericalPoint> {
        if !self.visible[index] {
            return None;
        }
        let (u_h, u_v) = self.grid[index];
        let (theta, phi) = angles_from_direction_cosines(u_h, u_v)?;
        Some(SphericalPoint { r: 1.0, theta, phi })
    }
}

pub fn dft_codebook_upa(geom: &ArrayGeometry, q_h: usize, q_v: usize) -> Result<Codebook, ArrayError> {
    geom.validate()?;
    if q_h == 0 || q_v == 0 {
        return Err(domain("oversampling factors must be >= 1"));
    }
    let m_h = geom.n_h * q_h;
    let m_v = geom.n_v * q_v;
    let lattice = |i: usize, m: usize| -1.0 + 2.0 * i as f64 / m as f64;
    let mut codewords = Vec::with_capacity(m_h * m_v);
    let mut grid = Vec::with_capacity(m_h * m_v);
    let mut visible = Vec::with_capacity(m_h * m_v);
    for i_v in 0..m_v {
        let u_v = lattice(i_v, m_v);
        for i_h in 0..m_h {
            let u_h = lattice(i_h, m_h);
            let pointing = angles_from_direction_cosines(u_h, u_v);
            codewords.push(BeamWeights { weights: steering_vector_dc(geom, u_h, u_v), pointing });
            grid.push((u_h, u_v));
            visible.push(u_h * u_h + u_v * u_v < 1.0);
        }
    }
    Ok(Codebook { geometry: *geom, codewords, grid, visible, oversampling: (q_h, q_v) })
}

/// Normalized power gain `|<w / sqrt(N), a(u_h, u_v)>|^2`, in `[0, N]`.
pub fn array_gain_dc(w: &BeamWeights, geom: &ArrayGeometry, u_h: f64, u_v: f64) -> Result<f64, ArrayError> {
    let n = geom.num_elements();
    if w.len() != n {
        return Err(ArrayError::DimensionMismatch { expected: n, got: w.len() });
    }
    let a_h = ula_unchecked(geom.n_h, geom.spacing_wavelengths, u_h);
    let a_v = ula_unchecked(geom.n_v, geom.spacing_wavelengths, u_v);
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, row) in w.weights.chunks_exact(geom.n_h).enumerate() {
        let inner: Complex64 = row.iter().zip(&a_h).map(|(wk, ak)| wk.conj() * ak).sum();
        acc += a_v[p] * inner;
    }
    Ok(acc.norm_sqr() / n as f64)
}

pub fn array_gain(w: &BeamWeights, geom: &ArrayGeometry, theta: f64, phi: f64) -> Result<f64, ArrayError> {
    check_angles(theta, phi)?;
    let (u_h, u_v) = direction_cosines(theta, phi);
    array_gain_dc(w, geom, u_h, u_v)
}

/// Per-axis gain ratio of an `n`-element ULA mispointed by `du` in
/// direction cosine: `|sin(n psi / 2) / (n sin(psi / 2))|^2`, `psi = 2 pi d du`.
pub fn dirichlet_gain_ratio(n: usize, spacing: f64, du: f64) -> f64 {
    let psi = 2.0 * PI * spacing * du;
    let den = n as f64 * (psi / 2.0).sin();
    if den.abs() < 1e-300 {
        return 1.0;
    }
    ((n as f64 * psi / 2.0).sin() / den).powi(2)
}

/// Worst-case crossover gain of the codebook lattice relative to the peak:
/// the target sits half a lattice step from the nearest codeword on both axes.
pub fn worst_case_crossover_gain(cb: &Codebook) -> f64 {
    let g = cb.geometry();
    let (s_h, s_v) = cb.lattice_step();
    dirichlet_gain_ratio(g.n_h, g.spacing_wavelengths, s_h / 2.0)
        * dirichlet_gain_ratio(g.n_v, g.spacing_wavelengths, s_v / 2.0)
}

/// Bisection stopping width on the full beamwidth, degrees.
pub const HPBW_TOL_DEG: f64 = 1e-6;

/// Full angular width around boresight where the gain of the boresight beam
/// stays at or above `N / 2`, measured in the principal plane of `axis`.
pub fn half_power_beamwidth(geom: &ArrayGeometry, axis: Axis) -> Result<f64, ArrayError> {
    geom.validate()?;
    let n = geom.len_along(axis);
    if n < 2 {
        return Err(domain(format!("half-power beamwidth needs >= 2 elements along {axis:?}")));
    }
    let beam = steering_vector_upa(geom, 0.0, 0.0)?;
    let phi = match axis {
        Axis::Horizontal => 0.0,
        Axis::Vertical => FRAC_PI_2,
    };
    let peak = geom.num_elements() as f64;
    let above = |theta: f64| -> bool {
        let (u_h, u_v) = direction_cosines(theta, phi);
        array_gain_dc(&beam, geom, u_h, u_v).map(|g| g >= peak / 2.0).unwrap_or(false)
    };
    // First null of the main lobe bounds the search.
    let null = 1.0 / (n as f64 * geom.spacing_wavelengths);
    let mut hi = if null < 1.0 { null.asin() } else { FRAC_PI_2 };
    if above(hi) {
        return Ok(2.0 * hi.to_degrees());
    }
    let mut lo = 0.0;
    let tol = (HPBW_TOL_DEG / 2.0).to_radians();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi).to_degrees())
}

/// Exhaustive RSRP-argmax over the visible codewords; ties go to the lowest index.
pub fn best_codeword_genie(cb: &Codebook, theta: f64, phi: f64) -> Result<(usize, f64), ArrayError> {
    check_angles(theta, phi)?;
    best_among(cb, cb.visible_indices(), theta, phi)?.ok_or(ArrayError::EmptyCodebook)
}

/// Argmax of gain toward `(theta, phi)` over `candidates`, lowest index on ties.
pub fn best_among(
    cb: &Codebook,
    candidates: impl IntoIterator<Item = usize>,
    theta: f64,
    phi: f64,
) -> Result<Option<(usize, f64)>, ArrayError> {
    let (u_h, u_v) = direction_cosines(theta, phi);
    let geom = cb.geometry();
    let mut best: Option<(usize, f64)> = None;
    for i in candidates {
        let g = array_gain_dc(&cb.codewords[i], geom, u_h, u_v)?;
        match best {
            Some((bi, bg)) if g < bg || (g == bg && i > bi) => {}
            _ => best = Some((i, g)),
        }
    }
    Ok(best)
}

/// Largest angle, in degrees, between a direction and the pointing of its
/// genie-best codeword. Directions are scanned on a `steps x 4 steps` grid
/// over `theta in [0, max_theta]` and the full azimuth circle.
pub fn worst_case_pointing_error(cb: &Codebook, max_theta: f64, steps: usize) -> Result<f64, ArrayError> {
    if !(max_theta > 0.0 && max_theta < FRAC_PI_2) || steps == 0 {
        return Err(domain(format!("scan needs 0 < max_theta < pi/2 and steps > 0, got {max_theta}, {steps}")));
    }
    let unit = |theta: f64, phi: f64| {
        let (u_h, u_v) = direction_cosines(theta, phi);
        [u_h, u_v, theta.cos()]
    };
    let mut worst: f64 = 0.0;
    for i in 0..=steps {
        let theta = max_theta * i as f64 / steps as f64;
        for j in 0..4 * steps {
            let phi = PI - 2.0 * PI * j as f64 / (4 * steps) as f64;
            let (best, _) = best_codeword_genie(cb, theta, phi)?;
            let p = cb.pointing(best).expect("visible codeword has a pointing");
            let (a, b) = (unit(theta, phi), unit(p.theta, p.phi));
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            let sin = cross.iter().map(|c| c * c).sum::<f64>().sqrt();
            worst = worst.max(sin.atan2(dot));
        }
    }
    Ok(worst.to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Property-test azimuths, excluding -pi which is outside the valid range.
    const PHI_MIN: f64 = -PI + 1e-9;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ula_broadside_is_all_ones() {
        for n in [1, 3, 8] {
            let a = steering_vector_ula(n, 0.5, 0.0).unwrap();
            assert!(a.iter().all(|&x| x == c(1.0, 0.0)));
        }
    }

    #[test]
    fn ula_quarter_turns() {
        let a = steering_vector_ula(4, 0.5, 30f64.to_radians().sin()).unwrap();
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (x, e) in a.iter().zip(expect) {
            assert!((x - e).norm() < 1e-12, "{x} vs {e}");
        }
    }

    #[test]
    fn ula_matches_elementwise_exponential() {
        let a = steering_vector_ula(8, 0.5, 0.25).unwrap();
        for (k, x) in a.iter().enumerate() {
            let phase = 2.0 * PI * 0.5 * k as f64 * 0.25;
            assert!((x - c(phase.cos(), phase.sin())).norm() < 1e-12);
        }
    }

    #[test]
    fn ula_rejects_invisible_direction() {
        assert!(matches!(steering_vector_ula(4, 0.5, 1.2), Err(ArrayError::Domain(_))));
    }

    #[test]
    fn upa_boresight_and_hand_expansion() {
        let g = ArrayGeometry::upa(8, 8);
        let a = steering_vector_upa(&g, 0.0, 1.0).unwrap();
        assert_eq!(a.len(), 64);
        assert!(a.weights().iter().all(|&x| x == c(1.0, 0.0)));

        // u_h = 0.5, u_v = 0 on a 2x2 array
        let g = ArrayGeometry::upa(2, 2);
        let a = steering_vector_upa(&g, 30f64.to_radians(), 0.0).unwrap();
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)];
        for (x, e) in a.weights().iter().zip(expect) {
            assert!((x - e).norm() < 1e-12);
        }
    }

    #[test]
    fn upa_rejects_out_of_range_angles() {
        let g = ArrayGeometry::upa(2, 2);
        assert!(steering_vector_upa(&g, FRAC_PI_2, 0.0).is_err());
        assert!(steering_vector_upa(&g, -0.1, 0.0).is_err());
        assert!(steering_vector_upa(&g, 0.1, -PI).is_err());
        assert!(steering_vector_upa(&g, 0.1, PI).is_ok());
    }

    #[test]
    fn codebook_cardinality() {
        let cb = dft_codebook_upa(&ArrayGeometry::upa(8, 8), 2, 2).unwrap();
        assert_eq!(cb.len(), 256);
        assert_eq!(cb.lattice_step(), (0.125, 0.125));
        let cb = dft_codebook_upa(&ArrayGeometry::upa(1, 1), 1, 1).unwrap();
        assert_eq!(cb.len(), 1);
        assert_eq!(cb.codeword(0).weights(), &[c(1.0, 0.0)]);
        assert!(dft_codebook_upa(&ArrayGeometry::upa(2, 2), 0, 1).is_err());
    }

    #[test]
    fn codewords_are_distinct_and_unit_modulus() {
        let cb = dft_codebook_upa(&ArrayGeometry::upa(8, 8), 2, 2).unwrap();
        for (i, a) in cb.codewords().iter().enumerate() {
            assert!(a.weights().iter().all(|w| (w.norm() - 1.0).abs() < UNIT_MODULUS_TOL));
            for b in &cb.codewords()[i + 1..] {
                let diff: f64 = a.weights().iter().zip(b.weights()).map(|(x, y)| (x - y).norm()).sum();
                assert!(diff > 1e-6);
            }
        }
    }

    #[test]
    fn unoversampled_ula_codebook_is_orthogonal() {
        let cb = dft_codebook_upa(&ArrayGeometry::upa(4, 1), 1, 1).unwrap();
        assert_eq!(cb.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let ip: Complex64 =
                    cb.codeword(i).weights().iter().zip(cb.codeword(j).weights()).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 4.0 } else { 0.0 };
                assert!((ip.norm() - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn aligned_gain_is_n() {
        let g = ArrayGeometry::upa(8, 8);
        let w = steering_vector_upa(&g, 0.3, -1.1).unwrap();
        let gain = array_gain(&w, &g, 0.3, -1.1).unwrap();
        assert_relative_eq!(gain, 64.0, epsilon = 1e-9);
        assert_relative_eq!(10.0 * gain.log10(), 18.061_799_739_838_87, epsilon = 1e-9);
    }

    #[test]
    fn orthogonal_codeword_has_null_gain() {
        let g = ArrayGeometry::upa(8, 8);
        let cb = dft_codebook_upa(&g, 1, 1).unwrap();
        // Codeword (u_h, u_v) = (0.25, 0) toward boresight.
        let i = cb.grid().iter().position(|&(h, v)| h == 0.25 && v == 0.0).unwrap();
        assert!(array_gain(cb.codeword(i), &g, 0.0, 0.0).unwrap() < 1e-9);
    }

    #[test]
    fn half_step_mispointing_matches_dirichlet() {
        let g = ArrayGeometry::upa(8, 1);
        let w = BeamWeights::new(steering_vector_ula(8, 0.5, 0.0).unwrap(), None).unwrap();
        let gain = array_gain_dc(&w, &g, 0.0625, 0.0).unwrap() / 8.0;
        assert_relative_eq!(gain, 0.813_178_663_436_073_8, epsilon = 1e-12);
        assert_relative_eq!(dirichlet_gain_ratio(8, 0.5, 0.0625), 0.813_178_663_436_073_8, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let w = steering_vector_upa(&ArrayGeometry::upa(2, 2), 0.0, 0.0).unwrap();
        assert!(matches!(
            array_gain(&w, &ArrayGeometry::upa(8, 8), 0.0, 0.0),
            Err(ArrayError::DimensionMismatch { expected: 64, got: 4 })
        ));
    }

    // Values from an independent bisection on the closed-form Dirichlet pattern.
    #[test]
    fn hpbw_values() {
        let h = half_power_beamwidth(&ArrayGeometry::upa(32, 32), Axis::Horizontal).unwrap();
        assert!((h - 3.174_114_052_269_849).abs() < 1e-5, "{h}");
        let h = half_power_beamwidth(&ArrayGeometry::upa(8, 8), Axis::Vertical).unwrap();
        assert!((h - 12.802_525_796_993_503).abs() < 1e-5, "{h}");
        let h = half_power_beamwidth(&ArrayGeometry::upa(2, 1), Axis::Horizontal).unwrap();
        assert!((h - 60.0).abs() < 1e-5, "{h}");
        assert!(half_power_beamwidth(&ArrayGeometry::upa(8, 1), Axis::Vertical).is_err());
    }

    #[test]
    fn genie_on_lattice_direction() {
        let g = ArrayGeometry::upa(8, 8);
        let cb = dft_codebook_upa(&g, 2, 2).unwrap();
        let i = cb.grid().iter().position(|&(h, v)| h == 0.375 && v == -0.25).unwrap();
        let (theta, phi) = angles_from_direction_cosines(0.375, -0.25).unwrap();
        let (best, gain) = best_codeword_genie(&cb, theta, phi).unwrap();
        assert_eq!(best, i);
        assert_relative_eq!(gain, 64.0, epsilon = 1e-9);
    }

    #[test]
    fn genie_midway_hits_crossover() {
        let g = ArrayGeometry::upa(8, 8);
        let cb = dft_codebook_upa(&g, 2, 2).unwrap();
        let (theta, phi) = angles_from_direction_cosines(0.0625, 0.0).unwrap();
        let (best, gain) = best_codeword_genie(&cb, theta, phi).unwrap();
        let (u_h, u_v) = cb.grid()[best];
        assert_eq!(u_v, 0.0);
        assert!(u_h == 0.0 || u_h == 0.125);
        assert_relative_eq!(gain, 64.0 * dirichlet_gain_ratio(8, 0.5, 0.0625), epsilon = 1e-9);
        let exhaustive =
            cb.visible_indices().map(|i| array_gain(cb.codeword(i), &g, theta, phi).unwrap()).fold(f64::MIN, f64::max);
        assert_eq!(gain, exhaustive);
    }

    #[test]
    fn genie_ties_go_to_lowest_index() {
        // A single element cannot tell lattice points apart. Lattice row
        // u_v = -1 and the rest of row u_v = -0.5 up to u_h = -0.5 lie outside
        // the open disk, so index 5 at (-0.5, -0.5) is the first visible one.
        let cb = dft_codebook_upa(&ArrayGeometry::upa(1, 1), 4, 4).unwrap();
        assert_eq!(cb.visible_indices().next(), Some(5));
        assert_eq!(best_codeword_genie(&cb, 0.7, 0.2).unwrap(), (5, 1.0));
    }

    #[test]
    fn pointing_error_scan() {
        let cb = dft_codebook_upa(&ArrayGeometry::upa(8, 8), 2, 2).unwrap();
        let worst = worst_case_pointing_error(&cb, 1.0, 6).unwrap();
        assert!(worst > 0.0 && worst < 10.0, "{worst}");
        assert!(worst_case_pointing_error(&cb, FRAC_PI_2, 6).is_err());
        assert!(worst_case_pointing_error(&cb, 1.0, 0).is_err());
    }

    #[test]
    fn genie_on_empty_candidates() {
        let cb = dft_codebook_upa(&ArrayGeometry::upa(2, 2), 1, 1).unwrap();
        assert_eq!(best_among(&cb, std::iter::empty(), 0.0, 0.0).unwrap(), None);
    }

    #[test]
    fn invisible_codewords_keep_index() {
        let cb = dft_codebook_upa(&ArrayGeometry::upa(8, 8), 2, 2).unwrap();
        let hidden = (0..cb.len()).filter(|&i| !cb.is_visible(i)).count();
        assert!(hidden > 0);
        assert_eq!(cb.visible_indices().count() + hidden, 256);
        assert!(cb.visible_indices().all(|i| cb.pointing(i).is_some()));
    }

    #[test]
    fn worst_case_crossover_default() {
        let cb = dft_codebook_upa(&ArrayGeometry::upa(8, 8), 2, 2).unwrap();
        let g = worst_case_crossover_gain(&cb);
        assert_relative_eq!(10.0 * g.log10(), -1.796_280_502_144_375_3, epsilon = 1e-9);
    }

    fn brute_gain(w: &BeamWeights, geom: &ArrayGeometry, theta: f64, phi: f64) -> f64 {
        let (u_h, u_v) = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..geom.n_v {
            for q in 0..geom.n_h {
                let phase = 2.0 * PI * geom.spacing_wavelengths * (p as f64 * u_v + q as f64 * u_h);
                acc += w.weights()[p * geom.n_h + q].conj() * Complex64::from_polar(1.0, phase);
            }
        }
        acc.norm_sqr() / geom.num_elements() as f64
    }

    proptest! {
        #[test]
        fn kronecker_consistency(theta in 0.0f64..1.5, phi in PHI_MIN..PI) {
            let g = ArrayGeometry::upa(8, 8);
            let a = steering_vector_upa(&g, theta, phi).unwrap();
            let (u_h, u_v) = direction_cosines(theta, phi);
            let a_h = steering_vector_ula(8, 0.5, u_h).unwrap();
            let a_v = steering_vector_ula(8, 0.5, u_v).unwrap();
            for (p, v) in a_v.iter().enumerate() {
                for (q, h) in a_h.iter().enumerate() {
                    prop_assert!((a.weights()[p * 8 + q] - v * h).norm() < 1e-12);
                }
            }
            prop_assert!(a.weights().iter().all(|w| (w.norm() - 1.0).abs() < UNIT_MODULUS_TOL));
        }

        #[test]
        fn gain_bounded_and_matches_brute_force(
            t0 in 0.0f64..1.5, p0 in PHI_MIN..PI, t1 in 0.0f64..1.5, p1 in PHI_MIN..PI,
        ) {
            let g = ArrayGeometry::upa(8, 8);
            let w = steering_vector_upa(&g, t0, p0).unwrap();
            let gain = array_gain(&w, &g, t1, p1).unwrap();
            prop_assert!((0.0..=64.0 + 1e-9).contains(&gain));
            let oracle = brute_gain(&w, &g, t1, p1);
            prop_assert!((gain - oracle).abs() <= 1e-9 * oracle.max(1.0));
        }

        #[test]
        fn genie_is_argmax(theta in 0.0f64..1.5, phi in PHI_MIN..PI) {
            let cb = dft_codebook_upa(&ArrayGeometry::upa(8, 8), 2, 2).unwrap();
            let (best, gain) = best_codeword_genie(&cb, theta, phi).unwrap();
            prop_assert!(cb.is_visible(best));
            for i in cb.visible_indices() {
                prop_assert!(array_gain(cb.codeword(i), cb.geometry(), theta, phi).unwrap() <= gain);
            }
        }

        // Away from the edge of the visible disk the nearest lattice point is
        // always selectable, so the half-step crossover bound holds.
        #[test]
        fn genie_gain_above_crossover_bound(theta in 0.0f64..std::f64::consts::FRAC_PI_3, phi in PHI_MIN..PI) {
            let cb = dft_codebook_upa(&ArrayGeometry::upa(8, 8), 2, 2).unwrap();
            let (_, gain) = best_codeword_genie(&cb, theta, phi).unwrap();
            prop_assert!(gain >= 64.0 * worst_case_crossover_gain(&cb) - 1e-9);
        }
    }
}
