//! Shared helpers for integration tests: a synthetic digit-image corpus in
//! IDX format.

use std::io::Write;
use std::path::Path;

use varlatent::ingest::load_idx;
use varlatent::rng::SeedStream;
use varlatent::DataTable;

pub const DIGIT_SIDE: usize = 12;
pub const DIGIT_CLASSES: usize = 10;

/// Writes an IDX image/label pair of blob-per-class digit surrogates and
/// loads it back through the IDX reader. Each class renders a Gaussian blob
/// at a class-specific position on a ring, plus pixel noise.
pub fn synthetic_digits(dir: &Path, per_class: usize, seed: u64) -> DataTable {
    let n = per_class * DIGIT_CLASSES;
    let mut rng = SeedStream::new(seed);
    let mut pixels: Vec<u8> = Vec::with_capacity(n * DIGIT_SIDE * DIGIT_SIDE);
    let mut labels: Vec<u8> = Vec::with_capacity(n);
    for image in 0..n {
        let class = image % DIGIT_CLASSES;
        labels.push(class as u8);
        let angle = std::f64::consts::TAU * class as f64 / DIGIT_CLASSES as f64;
        let half = (DIGIT_SIDE - 1) as f64 / 2.0;
        let cx = half + 3.5 * angle.cos() + 0.3 * rng.normal();
        let cy = half + 3.5 * angle.sin() + 0.3 * rng.normal();
        for r in 0..DIGIT_SIDE {
            for c in 0..DIGIT_SIDE {
                let d2 = (r as f64 - cy).powi(2) + (c as f64 - cx).powi(2);
                let signal = 255.0 * (-d2 / 6.0).exp();
                let value = signal + 18.0 * rng.normal();
                pixels.push(value.clamp(0.0, 255.0) as u8);
            }
        }
    }

    let images_path = dir.join("digits-images-idx3-ubyte");
    let labels_path = dir.join("digits-labels-idx1-ubyte");
    let mut f = std::fs::File::create(&images_path).unwrap();
    f.write_all(&0x0803u32.to_be_bytes()).unwrap();
    f.write_all(&(n as u32).to_be_bytes()).unwrap();
    f.write_all(&(DIGIT_SIDE as u32).to_be_bytes()).unwrap();
    f.write_all(&(DIGIT_SIDE as u32).to_be_bytes()).unwrap();
    f.write_all(&pixels).unwrap();
    let mut f = std::fs::File::create(&labels_path).unwrap();
    f.write_all(&0x0801u32.to_be_bytes()).unwrap();
    f.write_all(&(n as u32).to_be_bytes()).unwrap();
    f.write_all(&labels).unwrap();

    load_idx(&images_path, &labels_path, n).unwrap()
}
