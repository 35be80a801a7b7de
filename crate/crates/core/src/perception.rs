//! Simulated perception: boundary-band segmentation noise, a confusable
//! car-type classifier, mIoU scoring and flip-rate calibration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcm::CarTypePrediction;
use crate::problem::Condition;
use crate::rng::{salt, Stream};
use crate::scalar::Scalar;
use crate::scene::{AggregatePart, CarType, Granularity, LabelMap};

/// Parameters of the segmentation and classification noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseProfile {
    pub flip_rate_base: f64,
    /// Chebyshev radius (pixels) around label boundaries where flips happen.
    pub boundary_band: usize,
    pub extra_flip_different_orientation: f64,
    pub extra_flip_invisible: f64,
    pub extra_flip_piece: f64,
    pub cls_accuracy_whole: f64,
    pub cls_accuracy_subregion: f64,
    pub seed: u64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self {
            flip_rate_base: 0.0,
            boundary_band: 2,
            extra_flip_different_orientation: 0.05,
            extra_flip_invisible: 0.05,
            extra_flip_piece: 0.05,
            cls_accuracy_whole: 0.99,
            cls_accuracy_subregion: 0.71,
            seed: 0,
        }
    }
}

impl NoiseProfile {
    /// Noise-free segmentation and classification.
    pub fn perfect() -> Self {
        Self {
            extra_flip_different_orientation: 0.0,
            extra_flip_invisible: 0.0,
            extra_flip_piece: 0.0,
            cls_accuracy_whole: 1.0,
            cls_accuracy_subregion: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("flip_rate_base", self.flip_rate_base),
            ("extra_flip_different_orientation", self.extra_flip_different_orientation),
            ("extra_flip_invisible", self.extra_flip_invisible),
            ("extra_flip_piece", self.extra_flip_piece),
            ("cls_accuracy_whole", self.cls_accuracy_whole),
            ("cls_accuracy_subregion", self.cls_accuracy_subregion),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(())
    }

    /// Base rate plus the extras that apply to `context`, clamped to [0, 1].
    pub fn flip_rate(&self, context: Condition) -> f64 {
        let mut rate = self.flip_rate_base;
        if !context.orientation_same {
            rate += self.extra_flip_different_orientation;
        }
        if !context.visible {
            rate += self.extra_flip_invisible;
        }
        if context.granularity == Granularity::Piece {
            rate += self.extra_flip_piece;
        }
        rate.clamp(0.0, 1.0)
    }
}

/// The condition under which no extra flip rate applies.
pub const NEUTRAL_CONTEXT: Condition = Condition {
    orientation_same: true,
    visible: true,
    granularity: Granularity::Part,
};

/// Bitmask of the labels within Chebyshev distance `band` of each cell.
fn window_masks(map: &LabelMap, band: usize) -> Vec<u32> {
    let (w, h) = (map.width(), map.height());
    let cells = map.cells();
    let mut rows = vec![0u32; w * h];
    for y in 0..h {
        let row = &cells[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(band);
            let hi = (x + band + 1).min(w);
            rows[y * w + x] = row[lo..hi].iter().fold(0, |m, &c| m | 1 << c);
        }
    }
    let mut out = vec![0u32; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(band);
        let hi = (y + band + 1).min(h);
        for x in 0..w {
            out[y * w + x] = (lo..hi).fold(0, |m, yy| m | rows[yy * w + x]);
        }
    }
    out
}

/// `k`-th set bit of `mask` (0-based, from the least significant end).
fn nth_set_bit(mut mask: u32, k: u32) -> u8 {
    for _ in 0..k {
        mask &= mask - 1;
    }
    mask.trailing_zeros() as u8
}

/// Flip boundary-band foreground pixels to a neighbouring label or background.
///
/// Every band pixel consumes exactly one draw whatever the rate, so a higher
/// rate under the same stream flips a superset of pixels to the same targets.
pub fn corrupt_segmentation(
    map: &LabelMap,
    profile: &NoiseProfile,
    context: Condition,
    stream: &mut Stream,
) -> LabelMap {
    let rate = profile.flip_rate(context);
    let masks = window_masks(map, profile.boundary_band);
    let mut cells = map.cells().to_vec();
    for (i, &own) in map.cells().iter().enumerate() {
        if own == 0 {
            continue;
        }
        let others = masks[i] & !(1u32 << own);
        if others == 0 {
            continue;
        }
        let draw = stream.next_u64();
        let u = (draw >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < rate {
            let candidates = others | 1;
            let k = ((draw & 0xffff_ffff) * u64::from(candidates.count_ones())) >> 32;
            cells[i] = nth_set_bit(candidates, k as u32);
        }
    }
    LabelMap::from_raw_unchecked(map.width(), map.height(), cells)
}

/// Whether the classifier sees a whole car or a subregion crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageKind {
    Whole,
    Subregion,
}

/// One-hot prediction: the true type with the kind's accuracy, otherwise a
/// uniformly chosen wrong type.
pub fn simulate_classifier<T: Scalar>(
    true_type: CarType,
    kind: ImageKind,
    profile: &NoiseProfile,
    stream: &mut Stream,
) -> CarTypePrediction<T> {
    let accuracy = match kind {
        ImageKind::Whole => profile.cls_accuracy_whole,
        ImageKind::Subregion => profile.cls_accuracy_subregion,
    };
    if stream.chance(accuracy) {
        return CarTypePrediction::one_hot(true_type);
    }
    let wrong: Vec<CarType> = CarType::ALL
        .into_iter()
        .filter(|&c| c != true_type)
        .collect();
    CarTypePrediction::one_hot(wrong[stream.index(wrong.len())])
}

/// Mean IoU over the aggregate labels present in `truth`.
///
/// A truth map without foreground scores 1 against a prediction without
/// foreground and 0 otherwise.
pub fn miou(predicted: &LabelMap, truth: &LabelMap) -> Result<f64> {
    if !predicted.same_dims(truth) {
        return Err(Error::DimensionMismatch {
            left: format!("{}x{}", predicted.width(), predicted.height()),
            right: format!("{}x{}", truth.width(), truth.height()),
        });
    }
    let n = AggregatePart::COUNT + 1;
    let mut inter = vec![0usize; n];
    let mut pred_n = vec![0usize; n];
    let mut truth_n = vec![0usize; n];
    let (p, t) = (predicted.aggregate(), truth.aggregate());
    for (&a, &b) in p.cells().iter().zip(t.cells()) {
        pred_n[usize::from(a)] += 1;
        truth_n[usize::from(b)] += 1;
        if a == b {
            inter[usize::from(a)] += 1;
        }
    }
    let present: Vec<usize> = (1..n).filter(|&l| truth_n[l] > 0).collect();
    if present.is_empty() {
        let pred_fg: usize = pred_n[1..].iter().sum();
        return Ok(if pred_fg == 0 { 1.0 } else { 0.0 });
    }
    let total: f64 = present
        .iter()
        .map(|&l| inter[l] as f64 / (pred_n[l] + truth_n[l] - inter[l]) as f64)
        .sum();
    Ok(total / present.len() as f64)
}

/// Mean mIoU of `maps` corrupted under `profile` in the neutral context.
/// Map `i` uses the stream derived from `(seed, [CALIBRATION, i])`.
pub fn mean_miou(maps: &[&LabelMap], profile: &NoiseProfile, seed: u64) -> f64 {
    let total: f64 = maps
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut stream = Stream::derived(seed, &[salt::CALIBRATION, i as u64]);
            let noisy = corrupt_segmentation(m, profile, NEUTRAL_CONTEXT, &mut stream);
            miou(&noisy, m).expect("corruption preserves dimensions")
        })
        .sum();
    total / maps.len() as f64
}

pub const CALIBRATION_TOLERANCE: f64 = 0.01;
pub const CALIBRATION_MAX_ITERATIONS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub profile: NoiseProfile,
    pub target_miou: f64,
    pub achieved_miou: f64,
    pub iterations: usize,
    /// False when no flip rate in [0, 1] brings the sample within tolerance.
    pub reached: bool,
}

/// Bisect `flip_rate_base` so the sample's mean mIoU lands within
/// ±0.01 of `target`. Other fields of `template` are kept; extras do not
/// apply during calibration. Draws come from `template.seed`.
pub fn calibrate_noise(
    target_miou: f64,
    maps: &[&LabelMap],
    template: &NoiseProfile,
) -> Result<Calibration> {
    if !(target_miou > 0.0 && target_miou <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target mIoU {target_miou} is outside (0, 1]"
        )));
    }
    if maps.is_empty() {
        return Err(Error::InvalidArgument("calibration needs at least one map".into()));
    }
    template.validate()?;
    let at = |rate: f64| {
        let profile = NoiseProfile {
            flip_rate_base: rate,
            ..*template
        };
        (profile, mean_miou(maps, &profile, template.seed))
    };
    let done = |m: f64| (m - target_miou).abs() <= CALIBRATION_TOLERANCE;

    let (clean, clean_miou) = at(0.0);
    if done(clean_miou) {
        return Ok(Calibration {
            profile: clean,
            target_miou,
            achieved_miou: clean_miou,
            iterations: 0,
            reached: true,
        });
    }
    let (saturated, floor) = at(1.0);
    if floor > target_miou + CALIBRATION_TOLERANCE {
        return Ok(Calibration {
            profile: saturated,
            target_miou,
            achieved_miou: floor,
            iterations: 0,
            reached: false,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (saturated, floor);
    for iteration in 1..=CALIBRATION_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let (profile, m) = at(mid);
        if (m - target_miou).abs() < (best.1 - target_miou).abs() {
            best = (profile, m);
        }
        if done(m) {
            return Ok(Calibration {
                profile,
                target_miou,
                achieved_miou: m,
                iterations: iteration,
                reached: true,
            });
        }
        if m > target_miou {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration {
        profile: best.0,
        target_miou,
        achieved_miou: best.1,
        iterations: CALIBRATION_MAX_ITERATIONS,
        reached: done(best.1),
    })
}
