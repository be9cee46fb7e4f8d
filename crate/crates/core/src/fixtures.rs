//! Small reference instances used by tests, the CLI examples and the FFI.

use crate::error::Result;
use crate::model::{GroupSpec, Proportion, ScoreDistribution, ScoreGrid, SuccessCurve};
use crate::objectives::{Instance, OutcomeFn, OutcomeRule, UtilityFn};

/// Three-score instance: group A `[0.5, 0.3, 0.2]`, group B `[0.2, 0.3, 0.5]`,
/// shared `rho = [0.25, 0.5, 0.75]`, affine utility `(+1, -1)` giving
/// `u = [-0.5, 0, 0.5]`, affine score change `(+2, -1)` giving
/// `Delta = [-0.25, 0.5, 1.25]`, equal shares.
pub fn s1() -> Instance {
    s1_with_share(0.5).expect("fixture is valid")
}

pub fn s1_with_share(g_a: f64) -> Result<Instance> {
    let rho = SuccessCurve::new(vec![0.25, 0.5, 0.75])?;
    let a = GroupSpec::new("A", ScoreDistribution::new(vec![0.5, 0.3, 0.2])?, rho.clone(), Proportion::new(g_a)?)?;
    let b = GroupSpec::new("B", ScoreDistribution::new(vec![0.2, 0.3, 0.5])?, rho, Proportion::new(1.0 - g_a)?)?;
    Instance::new(ScoreGrid::new(3)?, a, b, UtilityFn::Affine { gain: 1.0, loss: -1.0 }, OutcomeFn::affine(2.0, -1.0))
}

/// Six-score instance where equal opportunity under-selects group A.
///
/// Group A: mass `1 - 2 eps` at score 5 and `2 eps` at score 1.
/// Group B: mass `1 - eps` at score 5 and `eps` at score 3.
/// `rho(x) = x / 6`, `u(x) = x - 4` (zero at the empty score 4),
/// `Delta(x) = x - 3`.
pub fn two_point(eps: f64, g_a: f64) -> Result<Instance> {
    let rho = SuccessCurve::new((1..=6).map(|x| x as f64 / 6.0).collect())?;
    let a = GroupSpec::new(
        "A",
        ScoreDistribution::new(vec![2.0 * eps, 0.0, 0.0, 0.0, 1.0 - 2.0 * eps, 0.0])?,
        rho.clone(),
        Proportion::new(g_a)?,
    )?;
    let b = GroupSpec::new(
        "B",
        ScoreDistribution::new(vec![0.0, 0.0, eps, 0.0, 1.0 - eps, 0.0])?,
        rho,
        Proportion::new(1.0 - g_a)?,
    )?;
    Instance::new(
        ScoreGrid::new(6)?,
        a,
        b,
        UtilityFn::Table((1..=6).map(|x| x as f64 - 4.0).collect()),
        OutcomeFn::new(OutcomeRule::Table((1..=6).map(|x| x as f64 - 3.0).collect())),
    )
}

/// Number of scores in the synthetic credit-style grid (labels 300..=850 step 10).
pub const CREDIT_GRID_SIZE: usize = 56;
/// The shared bump covers `CREDIT_WINDOW + 1` consecutive scores.
const CREDIT_WINDOW: usize = 24;
const CREDIT_SPREAD: f64 = 0.45 * CREDIT_WINDOW as f64;
/// Exponential tilt toward the upper end of the bump.
const CREDIT_TILT: f64 = 1.0;
const CREDIT_A_START: usize = 6;
/// Group B is group A moved this many grid steps up.
pub const CREDIT_SHIFT: usize = 22;
const CREDIT_RHO_LOW: f64 = 0.4;
const CREDIT_RHO_HIGH: f64 = 1.0;
/// Group A's share in the credit-style fixture.
pub const CREDIT_SHARE_A: f64 = 0.18;

/// Synthetic credit-score-like instance (not real data).
///
/// Both groups share one tilted bell-shaped score distribution, group B's
/// moved 22 grid steps (220 label points) above group A's; one success
/// curve, linear in the score; affine utility `+1` on success and
/// `loss_ratio` on failure; affine score change `+75 / -150` label points;
/// shares 0.18 / 0.82. At the harm threshold the A-share lies inside the
/// range where equal opportunity stays below it and demographic parity
/// overshoots it (for `loss_ratio = -4`).
pub fn credit_like(loss_ratio: f64) -> Result<Instance> {
    let (pa, pb) = credit_like_pmfs();
    let rho = credit_like_rho();
    let a = GroupSpec::new(
        "A",
        ScoreDistribution::new(pa)?,
        SuccessCurve::new(rho.clone())?,
        Proportion::new(CREDIT_SHARE_A)?,
    )?;
    let b = GroupSpec::new(
        "B",
        ScoreDistribution::new(pb)?,
        SuccessCurve::new(rho)?,
        Proportion::new(1.0 - CREDIT_SHARE_A)?,
    )?;
    Instance::new(
        credit_like_grid(),
        a,
        b,
        UtilityFn::Affine { gain: 1.0, loss: loss_ratio },
        OutcomeFn::new(OutcomeRule::Affine { gain: 75.0, penalty: -150.0, clamp: false }),
    )
}

pub fn credit_like_grid() -> ScoreGrid {
    ScoreGrid::with_labels((0..CREDIT_GRID_SIZE).map(|i| 300.0 + 10.0 * i as f64).collect())
        .expect("labels are increasing")
}

pub fn credit_like_rho() -> Vec<f64> {
    let n = CREDIT_GRID_SIZE - 1;
    (0..CREDIT_GRID_SIZE).map(|i| CREDIT_RHO_LOW + (CREDIT_RHO_HIGH - CREDIT_RHO_LOW) * i as f64 / n as f64).collect()
}

/// Group A and group B pmfs of [`credit_like`].
pub fn credit_like_pmfs() -> (Vec<f64>, Vec<f64>) {
    let w = CREDIT_WINDOW as f64;
    let mid = w / 2.0;
    let bump: Vec<f64> = (0..=CREDIT_WINDOW)
        .map(|i| {
            let i = i as f64;
            (CREDIT_TILT * i / w - (i - mid).powi(2) / (2.0 * CREDIT_SPREAD * CREDIT_SPREAD)).exp()
        })
        .collect();
    let total: f64 = bump.iter().sum();
    let mut pa = vec![0.0; CREDIT_GRID_SIZE];
    let mut pb = vec![0.0; CREDIT_GRID_SIZE];
    for (i, v) in bump.iter().enumerate() {
        pa[CREDIT_A_START + i] = v / total;
        pb[CREDIT_A_START + CREDIT_SHIFT + i] = v / total;
    }
    (pa, pb)
}
