//! Three equatorial qubit states mirrored about the X axis.
//!
//! `MS(t)` denotes the states at azimuths `0`, `+t` and `-t`. Along a
//! sequence the ensemble keeps this shape with Bloch lengths `r_1` for the
//! first state and `r_2` for the mirrored pair.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{minimize_disturbance_numeric, RetargetFamily};
use crate::qcore::{DensityMatrix, Ensemble, PureState};
use crate::seqchan::{Retarget, RetargetContext};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct MirrorParams {
    pub theta: f64,
}

/// `MS(angle)` as pure states.
pub fn ms_states(angle: f64) -> [PureState; 3] {
    [
        PureState::qubit(PI / 2.0, 0.0),
        PureState::qubit(PI / 2.0, angle),
        PureState::qubit(PI / 2.0, -angle),
    ]
}

/// Measurement angle of the pure ensemble `MS(theta)`.
pub fn cos_measurement_angle(theta: f64) -> f64 {
    let c = theta.cos();
    let num = -4.0 + c + 2.0 * (2.0 * theta).cos() + (3.0 * theta).cos();
    let den = 6.0 - 2.0 * c - 4.0 * (2.0 * theta).cos();
    num / den
}

/// Weights completing `MS(phi)` projectors to the identity.
pub fn weights(cos_phi: f64) -> [f64; 3] {
    let a2 = 1.0 / (1.0 - cos_phi);
    [-2.0 * cos_phi * a2, a2, a2]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MirrorOracle {
    pub theta: f64,
    pub cos_phi: f64,
    pub weights: [f64; 3],
    pub confidences: [f64; 3],
    /// Retarget angle minimizing the lower bound on the disturbance.
    pub cos_varphi: f64,
}

pub fn mirror(params: MirrorParams) -> Result<(Ensemble, MirrorOracle)> {
    let theta = params.theta;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("mirror angle {theta} must lie in (0, pi)")));
    }
    let den = 6.0 - 2.0 * theta.cos() - 4.0 * (2.0 * theta).cos();
    if den.abs() < 1e-12 {
        return Err(Error::Domain(format!("measurement angle is singular at theta = {theta}")));
    }
    let e = Ensemble::from_pure(vec![1.0 / 3.0; 3], &ms_states(theta))?;
    let cos_phi = cos_measurement_angle(theta);
    let c1 = 1.0 / (2.0 + theta.cos());
    let c2 = (3.0 + 2.0 * theta.cos()) / (4.0 + 2.0 * theta.cos());
    let oracle = MirrorOracle {
        theta,
        cos_phi,
        weights: weights(cos_phi),
        confidences: [c1, c2, c2],
        cos_varphi: MirrorState::initial(theta).cos_retarget(cos_phi),
    };
    Ok((e, oracle))
}

/// Bloch description `(r_1, r_2, theta)` of a mirror-symmetric ensemble.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct MirrorState {
    /// Signed X component of the first state.
    pub r1: f64,
    pub r2: f64,
    pub theta: f64,
}

/// The trend of the mirror angle along a sequence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum Trichotomy {
    Closing,
    Fixed,
    Opening,
}

impl Trichotomy {
    /// Trend predicted from the initial angle.
    pub fn predicted(theta: f64, tol: f64) -> Self {
        let gap = theta - 2.0 * PI / 3.0;
        if gap.abs() <= tol {
            Trichotomy::Fixed
        } else if gap < 0.0 {
            Trichotomy::Closing
        } else {
            Trichotomy::Opening
        }
    }

    pub fn observed(change: f64, tol: f64) -> Self {
        if change.abs() <= tol {
            Trichotomy::Fixed
        } else if change < 0.0 {
            Trichotomy::Closing
        } else {
            Trichotomy::Opening
        }
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl MirrorState {
    pub fn initial(theta: f64) -> Self {
        MirrorState { r1: 1.0, r2: 1.0, theta }
    }

    /// Reads `(r_1, r_2, theta)` off a qubit ensemble, using the first two
    /// states.
    pub fn from_ensemble(e: &Ensemble) -> Result<Self> {
        if e.len() != 3 || e.dim() != 2 {
            return Err(Error::InvalidEnsemble("three qubit states are required".into()));
        }
        let v1 = e.state(0).bloch()?;
        let v2 = e.state(1).bloch()?;
        Ok(MirrorState {
            r1: v1[0],
            r2: (v2[0] * v2[0] + v2[1] * v2[1]).sqrt(),
            theta: v2[1].atan2(v2[0]),
        })
    }

    fn vectors(&self) -> [[f64; 2]; 3] {
        let (s, c) = self.theta.sin_cos();
        [[self.r1, 0.0], [self.r2 * c, self.r2 * s], [self.r2 * c, -self.r2 * s]]
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        let states = self
            .vectors()
            .iter()
            .map(|v| DensityMatrix::from_bloch([v[0], v[1], 0.0]))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::uniform(states)
    }

    /// X component of the average Bloch vector, times three.
    fn mean_x(&self) -> f64 {
        self.r1 + 2.0 * self.r2 * self.theta.cos()
    }

    /// Confidences of the complete measurement on `MS(phi)`.
    pub fn confidences_at(&self, phi: f64) -> [f64; 3] {
        let d = self.mean_x();
        let c1 = (1.0 + self.r1) / (3.0 + d);
        let c2 = (1.0 + self.r2 * (phi - self.theta).cos()) / (3.0 + d * phi.cos());
        [c1, c2, c2]
    }

    /// Angle `phi` of the projectors `MS(phi)` maximizing the confidence of
    /// the mirrored pair, from the stationarity condition
    /// `(D - 3A) sin phi + 3B cos phi = -BD`.
    pub fn measurement_angle(&self) -> f64 {
        let a = self.r2 * self.theta.cos();
        let b = self.r2 * self.theta.sin();
        let d = self.mean_x();
        let (p, q, k) = (d - 3.0 * a, 3.0 * b, -b * d);
        let norm = p.hypot(q);
        if norm < 1e-300 {
            return PI;
        }
        let base = p.atan2(q);
        let spread = (k / norm).clamp(-1.0, 1.0).acos();
        let score = |phi: f64| self.confidences_at(phi)[1];
        let (x, y) = (base + spread, base - spread);
        let best = if score(x) >= score(y) { x } else { y };
        best.sin().atan2(best.cos())
    }

    pub fn confidences(&self) -> [f64; 3] {
        self.confidences_at(self.measurement_angle())
    }

    /// Retarget angle that leaves the average state unchanged.
    pub fn cos_retarget(&self, cos_phi: f64) -> f64 {
        let d = self.mean_x();
        (3.0 * cos_phi + d) / (3.0 + d * cos_phi)
    }

    /// The ensemble after one party measuring `MS(phi)` at rate `eta0` and
    /// retargeting onto `MS(varphi)`.
    pub fn step(&self, eta0: f64) -> Result<MirrorState> {
        if !(0.0..=1.0).contains(&eta0) {
            return Err(Error::InvalidParameter(format!("inconclusive rate {eta0} outside [0, 1]")));
        }
        let phi = self.measurement_angle();
        let (sp, cp) = phi.sin_cos();
        let a = weights(cp);
        if a[0] < -1e-12 {
            return Err(Error::Domain(format!(
                "measurement angle {phi} needs an inconclusive outcome"
            )));
        }
        let cv = self.cos_retarget(cp).clamp(-1.0, 1.0);
        let sv = (1.0 - cv * cv).sqrt().copysign(sp);
        let from = [[1.0, 0.0], [cp, sp], [cp, -sp]];
        let to = [[1.0, 0.0], [cv, sv], [cv, -sv]];
        let image = |v: [f64; 2]| {
            let mut out = [eta0 * v[0], eta0 * v[1]];
            for x in 0..3 {
                let w = (1.0 - eta0) * a[x] * 0.5 * (1.0 + dot(from[x], v));
                out[0] += w * to[x][0];
                out[1] += w * to[x][1];
            }
            out
        };
        let [v1, v2, _] = self.vectors();
        let n1 = image(v1);
        let n2 = image(v2);
        Ok(MirrorState {
            r1: n1[0],
            r2: n2[0].hypot(n2[1]),
            theta: n2[1].atan2(n2[0]),
        })
    }

    /// States seen by parties `1..=parties`, each using rate `eta0`.
    pub fn trajectory(self, eta0: f64, parties: usize) -> Result<Vec<MirrorState>> {
        let mut out = Vec::with_capacity(parties);
        let mut state = self;
        for j in 0..parties {
            out.push(state);
            if j + 1 < parties {
                state = state.step(eta0)?;
            }
        }
        Ok(out)
    }

    pub fn purities(&self) -> [f64; 3] {
        let p1 = 0.5 * (1.0 + self.r1 * self.r1);
        let p2 = 0.5 * (1.0 + self.r2 * self.r2);
        [p1, p2, p2]
    }
}

/// Retarget onto `MS(varphi)` with `varphi` chosen so the average state is
/// unchanged, which minimizes the lower bound on the disturbance.
#[derive(Clone, Copy, Debug, Default)]
pub struct MirrorBoundRetarget;

fn projector_angle(ctx: &RetargetContext) -> Result<f64> {
    let phi = ctx.mcm.projector_states()[1]
        .clone()
        .ok_or_else(|| Error::InvalidEnsemble("mirrored state has no MCM projector".into()))?;
    let [x, y, _] = DensityMatrix::from_pure(&phi).bloch()?;
    Ok(y.atan2(x))
}

impl Retarget for MirrorBoundRetarget {
    fn retarget(&self, ctx: &RetargetContext) -> Result<Vec<Option<PureState>>> {
        let state = MirrorState::from_ensemble(ctx.ensemble)?;
        let phi = projector_angle(ctx)?;
        let cv = state.cos_retarget(phi.cos()).clamp(-1.0, 1.0);
        let varphi = cv.acos().copysign(phi.sin());
        Ok(ms_states(varphi).into_iter().map(Some).collect())
    }
}

/// `MS(side * varphi)` for `varphi` in `[0, pi]`.
#[derive(Clone, Copy, Debug)]
pub struct MirrorAngleFamily {
    pub side: f64,
}

impl RetargetFamily for MirrorAngleFamily {
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, PI)]
    }

    fn states(&self, params: &[f64]) -> Result<Vec<Option<PureState>>> {
        Ok(ms_states(self.side * params[0]).into_iter().map(Some).collect())
    }
}

/// Retarget onto `MS(varphi)` with `varphi` minimizing the full average
/// trace distance numerically.
#[derive(Clone, Copy, Debug, Default)]
pub struct MirrorNumericRetarget;

impl MirrorNumericRetarget {
    pub fn family(ctx: &RetargetContext) -> Result<MirrorAngleFamily> {
        let side = if projector_angle(ctx)? < 0.0 { -1.0 } else { 1.0 };
        Ok(MirrorAngleFamily { side })
    }
}

impl Retarget for MirrorNumericRetarget {
    fn retarget(&self, ctx: &RetargetContext) -> Result<Vec<Option<PureState>>> {
        let family = Self::family(ctx)?;
        Ok(minimize_disturbance_numeric(ctx, &family)?.states)
    }
}
