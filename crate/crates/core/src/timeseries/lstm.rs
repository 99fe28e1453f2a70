use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Single-layer LSTM over scalar inputs, shared by every series.
///
/// Parameters are one flat vector laid out as `w_ih[4H] | w_hh[4H×H] | b[4H]`
/// with gate blocks ordered input, forget, cell, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmEncoder {
    hidden: usize,
    params: Vec<f64>,
}

/// Per-step state kept for backpropagation through time.
#[derive(Debug, Clone, Default)]
pub struct LstmTrace {
    x: Vec<f64>,
    // gates[t] = [i | f | g | o], each of length H.
    gates: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
}

impl LstmTrace {
    /// Hidden state after the last step.
    pub fn last_hidden(&self) -> &[f64] {
        self.h.last().map_or(&[], Vec::as_slice)
    }
}

impl LstmEncoder {
    /// Weights uniform in ±1/sqrt(H), biases zero.
    pub fn new(hidden: usize, seed: u64) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::Config("LSTM hidden size must be positive".into()));
        }
        let mut e = LstmEncoder::zeros(hidden);
        let k = 1.0 / (hidden as f64).sqrt();
        let dist = Uniform::new_inclusive(-k, k).expect("finite bound");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nw = 4 * hidden + 4 * hidden * hidden;
        for p in &mut e.params[..nw] {
            *p = dist.sample(&mut rng);
        }
        Ok(e)
    }

    pub fn zeros(hidden: usize) -> Self {
        LstmEncoder {
            hidden,
            params: vec![0.0; 8 * hidden + 4 * hidden * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    #[inline]
    fn w_ih(&self) -> &[f64] {
        &self.params[..4 * self.hidden]
    }

    #[inline]
    fn w_hh(&self) -> &[f64] {
        let h = self.hidden;
        &self.params[4 * h..4 * h + 4 * h * h]
    }

    #[inline]
    fn bias(&self) -> &[f64] {
        let h = self.hidden;
        &self.params[4 * h + 4 * h * h..]
    }

    /// Flat index of the bias of gate row `r` (0..4H).
    pub fn bias_index(&self, r: usize) -> usize {
        4 * self.hidden + 4 * self.hidden * self.hidden + r
    }

    /// Flat index of the recurrent weight from hidden unit `j` to gate row `r`.
    pub fn recurrent_index(&self, r: usize, j: usize) -> usize {
        4 * self.hidden + r * self.hidden + j
    }

    /// Runs the recurrence from zero state over `window`, keeping the trace.
    pub fn run(&self, window: &[f64]) -> LstmTrace {
        let h = self.hidden;
        let (w_ih, w_hh, b) = (self.w_ih(), self.w_hh(), self.bias());
        let mut tr = LstmTrace {
            x: window.to_vec(),
            gates: Vec::with_capacity(window.len()),
            c: Vec::with_capacity(window.len()),
            h: Vec::with_capacity(window.len()),
        };
        let zero = vec![0.0; h];
        for &x in window {
            let h_prev = tr.h.last().unwrap_or(&zero);
            let c_prev = tr.c.last().unwrap_or(&zero);
            let mut a = vec![0.0; 4 * h];
            for r in 0..4 * h {
                let row = &w_hh[r * h..(r + 1) * h];
                a[r] = b[r] + w_ih[r] * x + row.iter().zip(h_prev).map(|(w, v)| w * v).sum::<f64>();
            }
            for r in 0..h {
                a[r] = sigmoid(a[r]);
                a[h + r] = sigmoid(a[h + r]);
                a[2 * h + r] = a[2 * h + r].tanh();
                a[3 * h + r] = sigmoid(a[3 * h + r]);
            }
            let c: Vec<f64> = (0..h).map(|r| a[h + r] * c_prev[r] + a[r] * a[2 * h + r]).collect();
            let hn: Vec<f64> = (0..h).map(|r| a[3 * h + r] * c[r].tanh()).collect();
            tr.gates.push(a);
            tr.c.push(c);
            tr.h.push(hn);
        }
        tr
    }

    /// Final hidden state over `window`.
    pub fn forward(&self, window: &[f64]) -> Vec<f64> {
        self.run(window).last_hidden().to_vec()
    }

    /// Backpropagation through time from a gradient on the final hidden
    /// state; accumulates into `grad` (length `n_params`).
    pub fn backward(&self, trace: &LstmTrace, dh_last: &[f64], grad: &mut [f64]) {
        let h = self.hidden;
        let w_hh = self.w_hh();
        let (o_ih, o_hh, o_b) = (0, 4 * h, 4 * h + 4 * h * h);
        let zero = vec![0.0; h];
        let mut dh = dh_last.to_vec();
        let mut dc = vec![0.0; h];
        let mut da = vec![0.0; 4 * h];
        for t in (0..trace.x.len()).rev() {
            let a = &trace.gates[t];
            let c_prev = if t > 0 { &trace.c[t - 1] } else { &zero };
            let h_prev = if t > 0 { &trace.h[t - 1] } else { &zero };
            for r in 0..h {
                let (i, f, g, o) = (a[r], a[h + r], a[2 * h + r], a[3 * h + r]);
                let tc = trace.c[t][r].tanh();
                let dcr = dc[r] + dh[r] * o * (1.0 - tc * tc);
                da[r] = dcr * g * i * (1.0 - i);
                da[h + r] = dcr * c_prev[r] * f * (1.0 - f);
                da[2 * h + r] = dcr * i * (1.0 - g * g);
                da[3 * h + r] = dh[r] * tc * o * (1.0 - o);
                dc[r] = dcr * f;
            }
            let x = trace.x[t];
            dh.iter_mut().for_each(|v| *v = 0.0);
            for r in 0..4 * h {
                let d = da[r];
                if d == 0.0 {
                    continue;
                }
                grad[o_ih + r] += d * x;
                grad[o_b + r] += d;
                let row = &w_hh[r * h..(r + 1) * h];
                let grow = &mut grad[o_hh + r * h..o_hh + (r + 1) * h];
                for j in 0..h {
                    grow[j] += d * h_prev[j];
                    dh[j] += row[j] * d;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_and_inputs_give_zero_state() {
        let e = LstmEncoder::zeros(4);
        assert_eq!(e.forward(&[0.0; 6]), vec![0.0; 4]);
    }

    #[test]
    fn single_step_closed_form() {
        // H = 1: w_ih = [wi, wf, wg, wo], w_hh unused at t=0, b = [bi, bf, bg, bo].
        let mut e = LstmEncoder::zeros(1);
        e.params_mut().copy_from_slice(&[0.5, -0.3, 0.8, 1.1, 9.0, 9.0, 9.0, 9.0, 0.1, 0.2, -0.4, 0.05]);
        let x = 0.7;
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let i = sig(0.5 * x + 0.1);
        let g = (0.8 * x - 0.4f64).tanh();
        let o = sig(1.1 * x + 0.05);
        let c = i * g;
        let want = o * c.tanh();
        let got = e.forward(&[x])[0];
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = LstmEncoder::new(3, 9).unwrap();
        assert_eq!(a, LstmEncoder::new(3, 9).unwrap());
        assert!(a.params()[a.bias_index(0)..].iter().all(|&b| b == 0.0));
        assert!(LstmEncoder::new(0, 1).is_err());
    }

    #[test]
    fn bptt_matches_central_differences() {
        let e = LstmEncoder::new(3, 5).unwrap();
        let window = [0.3, -1.2, 0.8, 0.1, 2.0];
        let coef = [0.7, -1.3, 0.4];
        let loss = |e: &LstmEncoder| e.forward(&window).iter().zip(&coef).map(|(h, c)| h * c).sum::<f64>();
        let mut grad = vec![0.0; e.n_params()];
        e.backward(&e.run(&window), &coef, &mut grad);
        let eps = 1e-5;
        let mut probe = e.clone();
        for i in 0..e.n_params() {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + eps;
            let lp = loss(&probe);
            probe.params_mut()[i] = orig - eps;
            let lm = loss(&probe);
            probe.params_mut()[i] = orig;
            let fd = (lp - lm) / (2.0 * eps);
            assert!((grad[i] - fd).abs() / fd.abs().max(1.0) < 1e-6, "param {i}: {} vs {fd}", grad[i]);
        }
    }
}
