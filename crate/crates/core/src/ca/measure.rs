use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::Config;
use super::rule::Symbol;
use crate::error::{Error, Result};
use crate::Real;

/// Product Bernoulli measure: one weight vector per factor track.
///
/// The flattened symbol of a tuple `(s_1, ..., s_k)` is built as
/// `((s_1 * n_2 + s_2) * n_3 + ...)`, matching the product rule encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure<T>", into = "RawMeasure<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct MeasureSpec<T: Real> {
    tracks: Vec<Vec<T>>,
    cumulative: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure<T> {
    tracks: Vec<Vec<T>>,
}

impl<T: Real> TryFrom<RawMeasure<T>> for MeasureSpec<T> {
    type Error = Error;
    fn try_from(raw: RawMeasure<T>) -> Result<Self> {
        MeasureSpec::new(raw.tracks)
    }
}

impl<T: Real> From<MeasureSpec<T>> for RawMeasure<T> {
    fn from(m: MeasureSpec<T>) -> Self {
        RawMeasure { tracks: m.tracks }
    }
}

impl<T: Real> MeasureSpec<T> {
    pub fn new(tracks: Vec<Vec<T>>) -> Result<Self> {
        if tracks.is_empty() {
            return Err(Error::Measure("at least one track is required".into()));
        }
        let tol = T::from_f64(1e-12).expect("representable tolerance");
        let mut cumulative = Vec::with_capacity(tracks.len());
        for (k, weights) in tracks.iter().enumerate() {
            if weights.len() < 2 {
                return Err(Error::Measure(format!(
                    "track {k} needs at least two symbols"
                )));
            }
            if let Some(w) = weights.iter().find(|w| !(**w > T::zero())) {
                return Err(Error::Measure(format!(
                    "track {k} has non-positive weight {w:?}; full support is required"
                )));
            }
            let total = weights.iter().fold(T::zero(), |a, &w| a + w);
            if (total - T::one()).abs() > tol.max(T::epsilon() * T::from_usize(4 * weights.len()).unwrap()) {
                return Err(Error::Measure(format!(
                    "track {k} weights sum to {total:?}, not 1"
                )));
            }
            let mut acc = 0.0;
            cumulative.push(
                weights
                    .iter()
                    .map(|w| {
                        acc += w.to_f64().expect("finite weight");
                        acc
                    })
                    .collect(),
            );
        }
        let size: usize = tracks.iter().map(Vec::len).product();
        if size > crate::ca::MAX_ALPHABET {
            return Err(Error::Measure(format!("alphabet size {size} too large")));
        }
        Ok(MeasureSpec { tracks, cumulative })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Self::product_uniform(&[size])
    }

    pub fn product_uniform(sizes: &[usize]) -> Result<Self> {
        let tracks = sizes
            .iter()
            .map(|&n| {
                let w = T::one() / T::from_usize(n).unwrap_or_else(T::one);
                vec![w; n]
            })
            .collect();
        Self::new(tracks)
    }

    pub fn tracks(&self) -> &[Vec<T>] {
        &self.tracks
    }

    pub fn track_sizes(&self) -> Vec<usize> {
        self.tracks.iter().map(Vec::len).collect()
    }

    pub fn alphabet_size(&self) -> usize {
        self.tracks.iter().map(Vec::len).product()
    }

    /// Weights of the flattened alphabet.
    pub fn symbol_weights(&self) -> Vec<T> {
        let mut out = vec![T::one()];
        for track in &self.tracks {
            out = out
                .iter()
                .flat_map(|&a| track.iter().map(move |&w| a * w))
                .collect();
        }
        out
    }

    fn draw_track(&self, track: usize, u: f64) -> usize {
        let cum = &self.cumulative[track];
        cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
    }
}

/// Per-(seed, key, track) ChaCha stream positioned at coordinate `lo`.
///
/// Each cell consumes one `u64`, i.e. two 32-bit stream words, so the value
/// at coordinate `i` sits at word `2 * (i - i64::MIN)` regardless of where a
/// window starts.
fn stream_at(seed: u64, key: u64, track: usize, lo: i64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&key.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(bytes);
    rng.set_stream(track as u64);
    let offset = (lo as i128 - i64::MIN as i128) as u128;
    rng.set_word_pos(offset * 2);
    rng
}

#[inline]
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// i.i.d. window on `[lo, hi]`; the cell at `i` depends only on `(seed, i)`.
pub fn sample_config<T: Real>(measure: &MeasureSpec<T>, lo: i64, hi: i64, seed: u64) -> Result<Config> {
    sample_config_keyed(measure, lo, hi, seed, 0)
}

/// Like [`sample_config`] with an extra stream key, used to give every
/// Monte Carlo sample its own independent configuration.
pub fn sample_config_keyed<T: Real>(
    measure: &MeasureSpec<T>,
    lo: i64,
    hi: i64,
    seed: u64,
    key: u64,
) -> Result<Config> {
    if lo > hi {
        return Err(Error::Invalid(format!("empty sampling range [{lo}, {hi}]")));
    }
    let len = (hi - lo + 1) as usize;
    let mut cells = vec![0 as Symbol; len];
    for (t, track) in measure.tracks.iter().enumerate() {
        let mut rng = stream_at(seed, key, t, lo);
        let n = track.len();
        for cell in cells.iter_mut() {
            let s = measure.draw_track(t, unit(rng.next_u64()));
            *cell = (*cell as usize * n + s) as Symbol;
        }
    }
    Config::new(cells, lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_be_positive_and_normalised() {
        assert!(MeasureSpec::<f64>::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(MeasureSpec::<f64>::new(vec![vec![0.6, 0.6]]).is_err());
        assert!(MeasureSpec::<f64>::new(vec![vec![1.0]]).is_err());
        assert!(MeasureSpec::<f32>::new(vec![vec![0.25, 0.75]]).is_ok());
    }

    #[test]
    fn sampling_is_keyed_by_coordinate() {
        let m = MeasureSpec::<f64>::product_uniform(&[2, 3]).unwrap();
        let a = sample_config(&m, -20, 20, 7).unwrap();
        let b = sample_config(&m, 0, 40, 7).unwrap();
        assert_eq!(a.slice(0, 20), b.slice(0, 20));
        assert_eq!(a, sample_config(&m, -20, 20, 7).unwrap());
        assert_ne!(a, sample_config(&m, -20, 20, 8).unwrap());
        assert!(a.cells().iter().all(|&s| s < 6));
    }

    #[test]
    fn law_of_large_numbers() {
        let m = MeasureSpec::<f64>::uniform(2).unwrap();
        let x = sample_config(&m, 0, 99_999, 1).unwrap();
        let ones = x.cells().iter().filter(|&&s| s == 1).count() as f64;
        assert!((ones / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn product_weights_flatten_in_pair_order() {
        let m = MeasureSpec::<f64>::new(vec![vec![0.25, 0.75], vec![0.5, 0.5]]).unwrap();
        assert_eq!(m.symbol_weights(), vec![0.125, 0.125, 0.375, 0.375]);
        assert_eq!(m.alphabet_size(), 4);
    }

    #[test]
    fn json_round_trip_rejects_bad_weights() {
        let m: MeasureSpec<f64> = serde_json::from_str(r#"{"tracks":[[0.5,0.5]]}"#).unwrap();
        assert_eq!(m.alphabet_size(), 2);
        assert!(serde_json::from_str::<MeasureSpec<f64>>(r#"{"tracks":[[1.0,0.0]]}"#).is_err());
        assert!(serde_json::from_str::<MeasureSpec<f64>>(r#"{"tracks":[[0.5,0.5]],"x":1}"#).is_err());
    }
}
