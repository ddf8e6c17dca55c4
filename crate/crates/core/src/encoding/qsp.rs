//! Exact state preparation for non-negative real amplitude vectors using
//! uniformly controlled RY rotations (binary-tree angles, Gray-code CX walk).

use crate::error::{Error, Result};
use crate::simulator::{Circuit, Gate};

/// Norm tolerance accepted by [`amplitude_qsp`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Circuit on ⌈log2 len⌉ qubits (at least one) whose output state has real
/// amplitudes `x`, zero-padded after the last component.
///
/// Level `k` (0-based) rotates qubit `n−1−k` conditioned on the `k` higher
/// qubits. A node covering basis states with left mass `L` (target bit 0) and
/// right mass `R` gets angle `2·atan2(√R, √L)`. The `k`-controlled multiplexor is
/// emitted as `2^k` RY rotations interleaved with `2^k` CX gates following a
/// Gray code, so no multi-controlled gates appear.
pub fn amplitude_qsp(x: &[f64]) -> Result<Circuit> {
    if x.is_empty() {
        return Err(Error::Empty("amplitude vector"));
    }
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeAmplitude { index, value });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }

    let dim = x.len().next_power_of_two().max(2);
    let n = dim.trailing_zeros() as usize;
    let mut mass = vec![0.0; dim];
    for (m, v) in mass.iter_mut().zip(x) {
        *m = v * v;
    }

    let mut circuit = Circuit::new(n);
    for level in 0..n {
        let target = n - 1 - level;
        let patterns = 1usize << level;
        // Control bit b of the pattern index is qubit n − level + b.
        let controls: Vec<usize> = (0..level).map(|b| n - level + b).collect();
        let alphas: Vec<f64> = (0..patterns)
            .map(|j| node_angle(&mass, j, n - level, target))
            .collect();
        let thetas = multiplexor_angles(&alphas);

        if level == 0 {
            circuit.push(Gate::ry(target, thetas[0]))?;
            continue;
        }
        for i in 0..patterns {
            circuit.push(Gate::ry(target, thetas[i]))?;
            let changed = gray(i) ^ gray((i + 1) % patterns);
            let bit = changed.trailing_zeros() as usize;
            circuit.push(Gate::cx(controls[bit], target))?;
        }
    }
    Ok(circuit)
}

/// Angle splitting the subtree whose bits at or above `shift` equal `pattern`.
fn node_angle(mass: &[f64], pattern: usize, shift: usize, target: usize) -> f64 {
    let (mut left, mut right) = (0.0, 0.0);
    let base = pattern << shift;
    for (offset, m) in mass[base..base + (1 << shift)].iter().enumerate() {
        if (offset >> target) & 1 == 0 {
            left += m;
        } else {
            right += m;
        }
    }
    if left + right == 0.0 {
        0.0
    } else {
        2.0 * right.sqrt().atan2(left.sqrt())
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Solves α_j = Σ_i (−1)^{popcount(j ∧ g_i)} θ_i for θ.
fn multiplexor_angles(alphas: &[f64]) -> Vec<f64> {
    let m = alphas.len();
    (0..m)
        .map(|i| {
            let g = gray(i);
            alphas
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    if (j & g).count_ones().is_multiple_of(2) {
                        *a
                    } else {
                        -*a
                    }
                })
                .sum::<f64>()
                / m as f64
        })
        .collect()
}
