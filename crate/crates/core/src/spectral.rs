//! Instantaneous biorthogonal eigensystem of `H(t)`.

use serde::{Deserialize, Serialize};

use crate::model::{gamma_of_t, hamiltonian_at, ModelParams};
use crate::{Error, Result, C64};

/// Distance from an exceptional point (in units of `nu`) below which the
/// eigensystem is refused.
pub const EP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtPhase {
    Symmetric,
    Broken,
    ExceptionalPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Up,
    Down,
}

impl Level {
    pub fn other(self) -> Level {
        match self {
            Level::Up => Level::Down,
            Level::Down => Level::Up,
        }
    }
}

/// Eigenpairs ordered so that `up` carries `e_plus = gap / 2`: the upper
/// level in the symmetric phase and the least-dissipative one (largest
/// imaginary part) in the broken phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub e_plus: C64,
    pub e_minus: C64,
    pub right_up: [C64; 2],
    pub right_down: [C64; 2],
    pub left_up: [C64; 2],
    pub left_down: [C64; 2],
    pub gap: C64,
    pub epsilon: f64,
    pub theta: C64,
    pub phase: PtPhase,
}

impl SpectralData {
    pub fn right(&self, level: Level) -> [C64; 2] {
        match level {
            Level::Up => self.right_up,
            Level::Down => self.right_down,
        }
    }

    pub fn left(&self, level: Level) -> [C64; 2] {
        match level {
            Level::Up => self.left_up,
            Level::Down => self.left_down,
        }
    }

    pub fn energy(&self, level: Level) -> C64 {
        match level {
            Level::Up => self.e_plus,
            Level::Down => self.e_minus,
        }
    }

    /// `<i^L | j^R>` as a 2x2 matrix in the order (up, down).
    pub fn overlap_matrix(&self) -> [[C64; 2]; 2] {
        let dot = |l: [C64; 2], r: [C64; 2]| l[0] * r[0] + l[1] * r[1];
        [
            [dot(self.left_up, self.right_up), dot(self.left_up, self.right_down)],
            [dot(self.left_down, self.right_up), dot(self.left_down, self.right_down)],
        ]
    }
}

/// Real squared gap `p^2 g^2 + nu^2 (1 - delta)`.
pub fn gap_squared(params: &ModelParams, t: f64) -> f64 {
    let g = gamma_of_t(params, t);
    params.parity_n.factor_sq() * g * g + params.coupling_sq()
}

pub fn classify_phase(params: &ModelParams, t: f64) -> PtPhase {
    let g2 = gap_squared(params, t);
    if g2 > EP_TOL * EP_TOL {
        PtPhase::Symmetric
    } else if g2 < -EP_TOL * EP_TOL {
        PtPhase::Broken
    } else {
        PtPhase::ExceptionalPoint
    }
}

/// Drive in units of the gap scale.
pub fn epsilon_at(params: &ModelParams, t: f64) -> f64 {
    gamma_of_t(params, t) / params.gap_scale()
}

fn unit(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Right eigenvector of traceless `[[a, b], [c, -a]]` for eigenvalue `e`.
fn right_vector(a: C64, b: C64, c: C64, e: C64) -> [C64; 2] {
    let v1 = [b, e - a];
    let v2 = [e + a, c];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    unit(if n1 >= n2 { v1 } else { v2 })
}

pub fn eigensystem(params: &ModelParams, t: f64) -> Result<SpectralData> {
    let g2 = gap_squared(params, t);
    if g2.abs() <= EP_TOL * EP_TOL {
        return Err(Error::EpProximity { gap: g2.abs().sqrt(), tol: EP_TOL });
    }
    let gap = C64::new(g2, 0.0).sqrt();
    let h = hamiltonian_at(params, t).0;
    let (a, b, c) = (h[0][0], h[0][1], h[1][0]);
    let e_plus = 0.5 * gap;
    let right_up = right_vector(a, b, c, e_plus);
    let right_down = right_vector(a, b, c, -e_plus);
    // rows of the inverse of [right_up right_down]
    let det = right_up[0] * right_down[1] - right_down[0] * right_up[1];
    let left_up = [right_down[1] / det, -right_down[0] / det];
    let left_down = [-right_up[1] / det, right_up[0] / det];
    let epsilon = epsilon_at(params, t);
    let theta = (C64::new(1.0 / epsilon.abs(), 0.0)).atanh();
    let phase = if g2 > 0.0 { PtPhase::Symmetric } else { PtPhase::Broken };
    Ok(SpectralData {
        e_plus,
        e_minus: -e_plus,
        right_up,
        right_down,
        left_up,
        left_down,
        gap,
        epsilon,
        theta,
        phase,
    })
}

/// `tau_0 / |sqrt(eps^2 - 1)|`, i.e. `tau_0 * scale / |gap|`.
pub fn relaxation_time(params: &ModelParams, t: f64) -> Result<f64> {
    let eps = epsilon_at(params, t);
    if params.gamma_ep().is_some() && (eps.abs() - 1.0).abs() <= EP_TOL {
        return Err(Error::DivergesAtEp(eps));
    }
    let gap = gap_squared(params, t).abs().sqrt();
    Ok(params.tau_0 * params.gap_scale() / gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn symmetric_family_at_sqrt2() {
        let p = ModelParams::symmetric_family(1.0);
        let s = eigensystem(&p, 2f64.sqrt()).unwrap();
        assert!(close(s.e_plus, C64::new(0.5, 0.0), 1e-15));
        assert!(close(s.e_minus, C64::new(-0.5, 0.0), 1e-15));
        assert!((s.theta.re.cosh() - 2f64.sqrt()).abs() < 1e-12);
        assert!((s.theta.re.sinh() - 1.0).abs() < 1e-12);
        assert!(s.theta.im.abs() < 1e-15);
        assert_eq!(s.phase, PtPhase::Symmetric);
    }

    #[test]
    fn hyperbolic_parametrization_is_reproduced() {
        // up ~ (-i cosh(th/2), i sinh(th/2)), down ~ (-sinh(th/2), cosh(th/2)) for eps > 1
        let p = ModelParams::symmetric_family(1.0);
        for &eps in &[1.01, 1.5, 3.0, 40.0] {
            let s = eigensystem(&p, eps).unwrap();
            let th = s.theta.re;
            let (ch, sh) = ((th / 2.0).cosh(), (th / 2.0).sinh());
            let i = C64::new(0.0, 1.0);
            let up = [-i * ch, i * sh];
            let down = [C64::new(-sh, 0.0), C64::new(ch, 0.0)];
            let colinear = |u: [C64; 2], v: [C64; 2]| (u[0] * v[1] - u[1] * v[0]).norm();
            assert!(colinear(up, s.right_up) < 1e-12, "eps={eps}");
            assert!(colinear(down, s.right_down) < 1e-12, "eps={eps}");
        }
    }

    #[test]
    fn broken_family_eigenvalues() {
        let p = ModelParams::broken_family(1.0);
        let s = eigensystem(&p, 2.0).unwrap();
        assert!(close(s.e_plus, C64::new(0.0, 3f64.sqrt() / 2.0), 1e-15));
        assert_eq!(s.phase, PtPhase::Broken);
        assert_eq!(classify_phase(&p, 1.0), PtPhase::ExceptionalPoint);
        assert_eq!(classify_phase(&p, 0.5), PtPhase::Symmetric);
    }

    #[test]
    fn coalescence_near_ep() {
        let p = ModelParams::symmetric_family(1.0);
        let s = eigensystem(&p, 1.0 + 1e-8).unwrap();
        let ov = (s.right_up[0].conj() * s.right_down[0] + s.right_up[1].conj() * s.right_down[1]).norm();
        assert!(ov > 0.999);
        assert!(matches!(eigensystem(&p, 1.0), Err(Error::EpProximity { .. })));
    }

    #[test]
    fn phases_of_symmetric_family() {
        let p = ModelParams::symmetric_family(1.0);
        assert_eq!(classify_phase(&p, 2.0), PtPhase::Symmetric);
        assert_eq!(classify_phase(&p, 0.5), PtPhase::Broken);
    }

    #[test]
    fn relaxation_examples() {
        let p = ModelParams::symmetric_family(1.0);
        assert!((relaxation_time(&p, 2f64.sqrt()).unwrap() - 1.0).abs() < 1e-14);
        let r = relaxation_time(&p, 10.0).unwrap();
        assert!((r - 1.0 / 99f64.sqrt()).abs() < 1e-15);
        assert!(matches!(relaxation_time(&p, 1.0), Err(Error::DivergesAtEp(_))));
        let b = ModelParams::broken_family(1.0);
        assert!((relaxation_time(&b, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }
}
