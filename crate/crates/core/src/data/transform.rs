//! Pixel-space transforms applied per task.

use rand::seq::SliceRandom;
use rand::Rng;

/// Seeded Fisher–Yates permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// `out[i] = x[perm[i]]`.
pub fn permute(x: &[f32], perm: &[usize]) -> Vec<f32> {
    perm.iter().map(|&i| x[i]).collect()
}

/// Rotates a row-major image counter-clockwise by `degrees` about its centre.
/// Bilinear interpolation; samples falling outside the source read as 0.
pub fn rotate(image: &[f32], rows: usize, cols: usize, degrees: f64) -> Vec<f32> {
    if degrees == 0.0 {
        return image.to_vec();
    }
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cy = (rows as f64 - 1.0) / 2.0;
    let cx = (cols as f64 - 1.0) / 2.0;
    let pixel = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r as usize >= rows || c as usize >= cols {
            0.0
        } else {
            f64::from(image[r as usize * cols + c as usize])
        }
    };
    let mut out = vec![0.0f32; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let (dy, dx) = (r as f64 - cy, c as f64 - cx);
            // Inverse map: rotate the destination offset by -degrees.
            let sx = cos * dx - sin * dy + cx;
            let sy = sin * dx + cos * dy + cy;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as isize, y0 as isize);
            let v = pixel(y0, x0) * (1.0 - fx) * (1.0 - fy)
                + pixel(y0, x0 + 1) * fx * (1.0 - fy)
                + pixel(y0 + 1, x0) * (1.0 - fx) * fy
                + pixel(y0 + 1, x0 + 1) * fx * fy;
            out[r * cols + c] = v.clamp(0.0, 1.0) as f32;
        }
    }
    out
}

/// Average-pools a row-major image by `factor` in both directions. Trailing
/// rows/columns that do not fill a whole block are dropped.
pub fn downsample(image: &[f32], rows: usize, cols: usize, factor: usize) -> Vec<f32> {
    let (out_r, out_c) = (rows / factor, cols / factor);
    let norm = (factor * factor) as f32;
    let mut out = Vec::with_capacity(out_r * out_c);
    for r in 0..out_r {
        for c in 0..out_c {
            let mut s = 0.0;
            for dr in 0..factor {
                for dc in 0..factor {
                    s += image[(r * factor + dr) * cols + c * factor + dc];
                }
            }
            out.push(s / norm);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blob(rows: usize, cols: usize) -> Vec<f32> {
        let (cy, cx) = (rows as f64 / 2.0 - 0.5, cols as f64 / 2.0 - 0.5);
        (0..rows * cols)
            .map(|i| {
                let (r, c) = ((i / cols) as f64, (i % cols) as f64);
                let d2 = (r - cy).powi(2) / 12.0 + (c - cx - 2.0).powi(2) / 5.0;
                (-d2 / 2.0).exp() as f32
            })
            .collect()
    }

    #[test]
    fn permutation_is_a_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_permutation(50, &mut rng);
        let mut sorted = p.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        let x: Vec<f32> = (0..50).map(|i| i as f32 * 0.01).collect();
        let mut y = permute(&x, &p);
        y.sort_by(f32::total_cmp);
        assert_eq!(y, x);
    }

    #[test]
    fn zero_rotation_is_identity() {
        let img = blob(14, 14);
        assert_eq!(rotate(&img, 14, 14, 0.0), img);
    }

    #[test]
    fn rotation_round_trip() {
        let img = blob(28, 28);
        for deg in [17.0, 45.0, 90.0, 133.0, 179.0] {
            let back = rotate(&rotate(&img, 28, 28, deg), 28, 28, -deg);
            let mae: f64 = img
                .iter()
                .zip(&back)
                .map(|(a, b)| f64::from((a - b).abs()))
                .sum::<f64>()
                / img.len() as f64;
            assert!(mae < 0.05, "{deg}: {mae}");
        }
    }

    #[test]
    fn quarter_turn_moves_pixels() {
        // 3x3 with a single lit pixel right of centre; a +90 turn moves it up.
        let mut img = vec![0.0; 9];
        img[5] = 1.0;
        let out = rotate(&img, 3, 3, 90.0);
        assert!((out[1] - 1.0).abs() < 1e-6, "{out:?}");
        assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn downsample_averages_blocks() {
        let img: Vec<f32> = vec![0.0, 1.0, 0.5, 0.5, 1.0, 0.0, 0.5, 0.5];
        assert_eq!(downsample(&img, 2, 4, 2), vec![0.5, 0.5]);
    }
}
