//! Part-based comparison model.
//!
//! An image is summarized by an 18-dim vector: the share of foreground
//! pixels in each of the 13 aggregate parts followed by a 5-way car-type
//! prediction. A candidate D answers `A:B::C:?` well when `f_D - f_C` points
//! the same way as `f_B - f_A`; the model picks the option with the
//! smallest cosine distance between the two difference vectors.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scene::{AggregatePart, CarType, LabelMap};

pub const PART_DIMS: usize = AggregatePart::COUNT;
pub const TYPE_DIMS: usize = CarType::COUNT;
pub const FEATURE_DIMS: usize = PART_DIMS + TYPE_DIMS;

/// Scores over the five car types, summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarTypePrediction<T> {
    scores: [T; TYPE_DIMS],
}

impl<T: Scalar> CarTypePrediction<T> {
    pub fn one_hot(car: CarType) -> Self {
        let mut scores = [T::zero(); TYPE_DIMS];
        scores[car.index()] = T::one();
        Self { scores }
    }

    pub fn uniform() -> Self {
        Self {
            scores: [T::one() / T::of_count(TYPE_DIMS); TYPE_DIMS],
        }
    }

    /// Accepts nonnegative scores and rescales them to sum to one.
    pub fn from_scores(scores: [T; TYPE_DIMS]) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite() || *s < T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "car-type scores must be finite and nonnegative: {scores:?}"
            )));
        }
        let total: T = scores.iter().copied().sum();
        if total <= T::zero() {
            return Err(Error::InvalidArgument("car-type scores sum to zero".into()));
        }
        Ok(Self {
            scores: scores.map(|s| s / total),
        })
    }

    pub fn scores(&self) -> &[T; TYPE_DIMS] {
        &self.scores
    }

    /// Highest-scoring type (first on ties).
    pub fn top(&self) -> CarType {
        let mut best = 0;
        for (i, s) in self.scores.iter().enumerate() {
            if *s > self.scores[best] {
                best = i;
            }
        }
        CarType::ALL[best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector<T> {
    parts: [T; PART_DIMS],
    types: CarTypePrediction<T>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(parts: [T; PART_DIMS], types: CarTypePrediction<T>) -> Self {
        Self { parts, types }
    }

    pub fn parts(&self) -> &[T; PART_DIMS] {
        &self.parts
    }

    pub fn types(&self) -> &CarTypePrediction<T> {
        &self.types
    }

    pub fn to_array(&self) -> [T; FEATURE_DIMS] {
        let mut out = [T::zero(); FEATURE_DIMS];
        out[..PART_DIMS].copy_from_slice(&self.parts);
        out[PART_DIMS..].copy_from_slice(&self.types.scores);
        out
    }

    /// Feature of an image with no foreground at all.
    pub fn blank() -> Self {
        Self {
            parts: [T::zero(); PART_DIMS],
            types: CarTypePrediction::uniform(),
        }
    }
}

/// Part proportions over foreground pixels concatenated with the car-type
/// prediction. A map without foreground yields the blank feature (zero part
/// block, uniform type block) whatever the prediction.
pub fn extract_features<T: Scalar>(
    map: &LabelMap,
    prediction: &CarTypePrediction<T>,
) -> FeatureVector<T> {
    let counts = map.aggregate().part_counts();
    let foreground: usize = counts.iter().sum();
    if foreground == 0 {
        return FeatureVector::blank();
    }
    let denom = T::of_count(foreground);
    FeatureVector {
        parts: counts.map(|c| T::of_count(c) / denom),
        types: *prediction,
    }
}

/// `1 - cos(u, v)`, clamped to [0, 2]. Returns 1 when either vector has zero norm.
pub fn cosine_distance<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len().to_string(),
            right: v.len().to_string(),
        });
    }
    Ok(cosine_distance_unchecked(u, v))
}

pub(crate) fn cosine_distance_unchecked<T: Scalar>(u: &[T], v: &[T]) -> T {
    let mut dot = T::zero();
    let mut uu = T::zero();
    let mut vv = T::zero();
    for (&a, &b) in u.iter().zip(v) {
        dot = dot + a * b;
        uu = uu + a * a;
        vv = vv + b * b;
    }
    if uu == T::zero() || vv == T::zero() {
        return T::one();
    }
    let two = T::one() + T::one();
    (T::one() - dot / (uu.sqrt() * vv.sqrt())).max(T::zero()).min(two)
}

/// The seven feature vectors of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFeatures<T> {
    pub a: FeatureVector<T>,
    pub b: FeatureVector<T>,
    pub c: FeatureVector<T>,
    pub options: [FeatureVector<T>; 4],
}

impl<T: Scalar> ProblemFeatures<T> {
    /// Apply `f` to every component of all seven vectors (used for invariance checks).
    pub fn map_all(&self, f: impl Fn(usize, T) -> T) -> ProblemFeatures<T> {
        let g = |v: &FeatureVector<T>| {
            let arr = v.to_array();
            let mut parts = [T::zero(); PART_DIMS];
            let mut types = [T::zero(); TYPE_DIMS];
            for (i, x) in arr.iter().enumerate() {
                if i < PART_DIMS {
                    parts[i] = f(i, *x);
                } else {
                    types[i - PART_DIMS] = f(i, *x);
                }
            }
            FeatureVector {
                parts,
                types: CarTypePrediction { scores: types },
            }
        };
        ProblemFeatures {
            a: g(&self.a),
            b: g(&self.b),
            c: g(&self.c),
            options: [
                g(&self.options[0]),
                g(&self.options[1]),
                g(&self.options[2]),
                g(&self.options[3]),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcmDecision<T> {
    pub chosen: usize,
    pub distances: [T; 4],
}

fn difference<T: Scalar>(to: &FeatureVector<T>, from: &FeatureVector<T>) -> [T; FEATURE_DIMS] {
    let (t, f) = (to.to_array(), from.to_array());
    std::array::from_fn(|i| t[i] - f[i])
}

/// Index of the smallest value, lowest index on ties.
pub(crate) fn argmin<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

pub fn solve_pcm<T: Scalar>(features: &ProblemFeatures<T>) -> PcmDecision<T> {
    let source = difference(&features.b, &features.a);
    let distances = features
        .options
        .each_ref()
        .map(|d| cosine_distance_unchecked(&source, &difference(d, &features.c)));
    PcmDecision {
        chosen: argmin(&distances),
        distances,
    }
}

/// Roles in feature-CSV rows, in the order they are written.
pub const FEATURE_ROLES: [&str; 7] = ["A", "B", "C", "D1", "D2", "D3", "D4"];

/// `%.9g`-style rendering: 9 significant digits, trailing zeros trimmed.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Write seven CSV rows `problem_id,role,f1..f18`.
pub fn write_feature_rows<T: Scalar, W: Write>(
    out: &mut W,
    problem_id: &str,
    features: &ProblemFeatures<T>,
) -> std::io::Result<()> {
    let vectors = [
        &features.a,
        &features.b,
        &features.c,
        &features.options[0],
        &features.options[1],
        &features.options[2],
        &features.options[3],
    ];
    for (role, v) in FEATURE_ROLES.iter().zip(vectors) {
        write!(out, "{problem_id},{role}")?;
        for x in v.to_array() {
            write!(out, ",{}", format_sig9(x.to_f64_lossy()))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::FinePart;
    use proptest::prelude::*;

    fn fv3(parts: [f64; 3]) -> FeatureVector<f64> {
        let mut p = [0.0; PART_DIMS];
        p[..3].copy_from_slice(&parts);
        FeatureVector {
            parts: p,
            types: CarTypePrediction { scores: [0.0; 5] },
        }
    }

    #[test]
    fn hand_counted_proportions() {
        // 4x4: 8 door, 4 window, 4 background.
        let door = FinePart::FrontLeftDoor.id();
        let window = FinePart::RearWindow.id();
        let mut cells = vec![door; 8];
        cells.extend([window; 4]);
        cells.extend([0; 4]);
        let m = LabelMap::new(4, 4, cells).unwrap();
        let f = extract_features(&m, &CarTypePrediction::<f64>::one_hot(CarType::Suv));
        assert!((f.parts()[AggregatePart::Door.index()] - 8.0 / 12.0).abs() < 1e-12);
        assert!((f.parts()[AggregatePart::Window.index()] - 4.0 / 12.0).abs() < 1e-12);
        assert_eq!(f.parts().iter().filter(|&&x| x != 0.0).count(), 2);
        assert_eq!(f.types().top(), CarType::Suv);
    }

    #[test]
    fn blank_map_gives_blank_feature() {
        let f = extract_features(
            &LabelMap::blank(3, 3),
            &CarTypePrediction::<f64>::one_hot(CarType::Truck),
        );
        assert!(f.parts().iter().all(|&x| x == 0.0));
        assert!(f.types().scores().iter().all(|&x| (x - 0.2).abs() < 1e-15));
    }

    #[test]
    fn cosine_distance_reference_values() {
        assert!(cosine_distance::<f64>(&[1.0, 2.0], &[1.0, 2.0]).unwrap().abs() < 1e-15);
        assert!((cosine_distance::<f64>(&[1.0, 0.0], &[0.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        let d = cosine_distance(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((d - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!((d - 0.29289).abs() < 1e-5);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(
            cosine_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(cosine_distance(&[1.0f32, 0.0], &[-2.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn exact_relational_match_wins_with_zero_distance() {
        let a = fv3([0.5, 0.5, 0.0]);
        let b = fv3([0.8, 0.2, 0.0]);
        let c = fv3([0.2, 0.2, 0.6]);
        let exact = fv3([0.5, -0.1, 0.6]);
        let features = ProblemFeatures {
            a,
            b,
            c,
            options: [exact, fv3([0.1, 0.1, 0.8]), fv3([0.2, 0.2, 0.6]), fv3([0.0, 0.5, 0.5])],
        };
        let d = solve_pcm(&features);
        assert_eq!(d.chosen, 0);
        assert!(d.distances[0].abs() < 1e-12);
    }

    #[test]
    fn toy_three_dim_problem() {
        // f_B - f_A = (-1, 1, 0); option differences from C = (1, 0, 0):
        // (-1,1,0) -> 0, (-1,0,1) -> 0.5, (0,0,0) -> 1, (-0.5,0.5,0) -> 0.
        let features = ProblemFeatures {
            a: fv3([1.0, 0.0, 0.0]),
            b: fv3([0.0, 1.0, 0.0]),
            c: fv3([1.0, 0.0, 0.0]),
            options: [
                fv3([0.0, 1.0, 0.0]),
                fv3([0.0, 0.0, 1.0]),
                fv3([1.0, 0.0, 0.0]),
                fv3([0.5, 0.5, 0.0]),
            ],
        };
        let d = solve_pcm(&features);
        assert_eq!(d.chosen, 0);
        let expected = [0.0, 0.5, 1.0, 0.0];
        for (got, want) in d.distances.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{:?}", d.distances);
        }
    }

    #[test]
    fn f32_and_f64_agree_on_decisions() {
        let features = ProblemFeatures {
            a: fv3([0.6, 0.3, 0.1]),
            b: fv3([0.1, 0.8, 0.1]),
            c: fv3([0.5, 0.4, 0.1]),
            options: [
                fv3([0.2, 0.2, 0.6]),
                fv3([0.05, 0.9, 0.05]),
                fv3([0.4, 0.4, 0.2]),
                fv3([0.9, 0.05, 0.05]),
            ],
        };
        let narrow = features.map_all(|_, x| x as f32 as f64);
        assert_eq!(solve_pcm(&features).chosen, 1);
        assert_eq!(solve_pcm(&narrow).chosen, 1);
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(format_sig9(0.2), "0.2");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(-0.125), "-0.125");
        assert_eq!(format_sig9(1.5e-7), "1.5e-07");
        assert_eq!(format_sig9(123456789.0), "123456789");
    }

    proptest! {
        #[test]
        fn distance_in_range(u in proptest::collection::vec(-5.0f64..5.0, 18),
                             v in proptest::collection::vec(-5.0f64..5.0, 18)) {
            let d = cosine_distance(&u, &v).unwrap();
            prop_assert!((0.0..=2.0).contains(&d));
        }

        #[test]
        fn scores_normalize(raw in proptest::array::uniform5(0.0f64..10.0)) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-6);
            let p = CarTypePrediction::from_scores(raw).unwrap();
            prop_assert!((p.scores().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
