//! Security parameter chain for given protocol parameters.

use serde::{Deserialize, Serialize};

use super::{expected_tomography_rate, select_params, standard_functional, ProtocolParams};
use crate::bounds::relative_entropy;
use crate::boxes::{bell_value, ideal_quantum_box, Behavior};
use crate::error::Result;
use crate::ks_bell::build_ks_model;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub mu1: f64,
    pub kappa: f64,
    pub map: String,
    /// `1 - sqrt(2 delta)`.
    pub mu2: f64,
    /// `(mu1 - 2 kappa) / (2 (1 - kappa))`.
    pub mu3: f64,
    /// `mu2 + mu3 - 1`, evaluated as `mu3 - sqrt(2 delta)`.
    pub mu4: f64,
    /// `max{1 - kappa, (3 + 2 sqrt(2 delta) / (1/2 - eps)^8) / 4}`.
    pub gamma: f64,
    /// Which side of the max defines `gamma`: `"one_minus_kappa"` or `"bell"`.
    pub gamma_branch: String,
    /// `2 exp(-n delta^2 / 4)`.
    pub eps_az1: f64,
    /// `2 exp(-n mu1^2 / 16)`.
    pub eps_az2: f64,
    /// `gamma^(mu4 n)`.
    pub gamma_power: f64,
    /// `2 (eps_az1 + eps_az2) + gamma^(mu4 n)`.
    pub delta1: f64,
    /// `mu4 n log2(1/gamma)` bits per accepted transcript.
    pub min_entropy_bits: f64,
    /// `1 - (1/2 - eps)^8`, the SV cap on `Pr(u != u*)` per round.
    pub zeta: f64,
    /// `exp(-n D(1 - mu1 || zeta))`: chance that fewer than `mu1 n` rounds
    /// hit `u*` at all, which would make acceptance impossible. 1 when
    /// `1 - mu1 <= zeta`.
    pub chernoff_target_shortfall: f64,
    pub delta_max: f64,
    /// Expected tomography rate of the ideal device under unbiased bits.
    pub honest_tomography_rate: f64,
    /// `(2 kappa, honest rate)`: where `mu1` can sit for an honest device to pass.
    pub mu1_window: (f64, f64),
    /// Expected Bell value per round of white noise under unbiased bits.
    pub noise_bell_rate: f64,
    /// `delta / noise_bell_rate`: the largest white-noise weight whose
    /// expected `L_n` stays within `delta`.
    pub eta_max: f64,
}

/// Guarantee restated for an acceptance probability `q_acc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub q_acc: f64,
    /// `sqrt(delta1 / q_acc)`.
    pub max_probability: f64,
    /// `1 - sqrt(delta1 / q_acc)`.
    pub confidence: f64,
    /// True when the bound says nothing (`max_probability >= 1`).
    pub vacuous: bool,
    pub text: String,
}

impl SecurityReport {
    pub fn headline(&self, q_acc: f64) -> Headline {
        let b = (self.delta1 / q_acc).sqrt();
        Headline {
            q_acc,
            max_probability: b,
            confidence: 1.0 - b,
            vacuous: !(b < 1.0),
            text: format!(
                "with probability >= 1 - {b:.6e} over accepted transcripts, max_x q(x|z,u,e,ACC) <= {b:.6e} (q(ACC) = {q_acc})"
            ),
        }
    }
}

pub fn security_report(p: &ProtocolParams) -> Result<SecurityReport> {
    let dm = select_params(p.epsilon, p.mu1, p.kappa)?;
    let n = p.n as f64;
    let (delta, mu1, kappa, eps) = (p.delta, p.mu1, p.kappa, p.epsilon);
    let root = (2.0 * delta).sqrt();
    let mu2 = 1.0 - root;
    let mu3 = (mu1 - 2.0 * kappa) / (2.0 * (1.0 - kappa));
    let mu4 = mu3 - root;
    let floor = 0.5 - eps;
    let bell_side = (3.0 + 2.0 * root / floor.powi(8)) / 4.0;
    let kappa_side = 1.0 - kappa;
    // ln(gamma) from ln_1p when gamma = 1 - kappa keeps full precision
    let (gamma, ln_gamma, branch) = if kappa_side >= bell_side {
        (kappa_side, (-kappa).ln_1p(), "one_minus_kappa")
    } else {
        (bell_side, bell_side.ln(), "bell")
    };
    let eps_az1 = 2.0 * (-n * delta * delta / 4.0).exp();
    let eps_az2 = 2.0 * (-n * mu1 * mu1 / 16.0).exp();
    let gamma_power = (mu4 * n * ln_gamma).exp();
    let delta1 = 2.0 * (eps_az1 + eps_az2) + gamma_power;
    let min_entropy_bits = -mu4 * n * ln_gamma / std::f64::consts::LN_2;
    let zeta = 1.0 - floor.powi(8);
    let shortfall = if 1.0 - mu1 > zeta {
        (-n * relative_entropy(1.0 - mu1, zeta)?).exp()
    } else {
        1.0
    };
    let map = p.setting_map()?;
    let measure = map.uniform_measure();
    let honest = expected_tomography_rate(&ideal_quantum_box(&build_ks_model()), &measure);
    let noise = bell_value(&Behavior::uniform(), standard_functional(), &measure);
    Ok(SecurityReport {
        n: p.n,
        epsilon: eps,
        delta,
        mu1,
        kappa,
        map: map.id,
        mu2,
        mu3,
        mu4,
        gamma,
        gamma_branch: branch.into(),
        eps_az1,
        eps_az2,
        gamma_power,
        delta1,
        min_entropy_bits,
        zeta,
        chernoff_target_shortfall: shortfall,
        delta_max: dm.delta_max,
        honest_tomography_rate: honest,
        mu1_window: (2.0 * kappa, honest),
        noise_bell_rate: noise,
        eta_max: delta / noise,
    })
}
