//! From-scratch stacked LSTM numerics.
//!
//! One-hot token input feeds a stack of standard LSTM layers
//! (`i = σ(Wi·[x,h]+bi)`, `f = σ(Wf·[x,h]+bf)`, `o = σ(Wo·[x,h]+bo)`,
//! `g = tanh(Wg·[x,h]+bg)`, `c' = f⊙c + i⊙g`, `h' = o⊙tanh(c')`), topped by
//! a linear projection to vocabulary logits. Training runs truncated
//! backpropagation through time over token windows with inverted dropout
//! on the non-recurrent connections only.
//!
//! Everything is `f64`; results are bit-reproducible given the same seeds,
//! and all transcendentals go through `libm` so they do not depend on the
//! platform's math library.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use thiserror::Error;

use crate::rngutil::{stream, stream_rng};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LstmError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("window too short: need at least 2 tokens, got {0}")]
    WindowTooShort(usize),
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

#[inline]
fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

/// Numerically stable softmax; sums to 1 and is strictly positive for
/// inputs of reasonable range.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&x| libm::exp(x - max)).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// `−log softmax(logits)[target]`, computed without forming the softmax.
pub fn nll_at(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse: f64 = libm::log(logits.iter().map(|&x| libm::exp(x - max)).sum::<f64>());
    max + lse - logits[target]
}

/// Per-gate weights and biases of one layer over `[x ⊕ h] → hidden`.
///
/// `w` is row-major with `4 * hidden` rows of length `input + hidden`; the
/// row blocks are the input gate, forget gate, cell candidate, and output
/// gate, in that order. Doubles as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub input_size: usize,
    pub hidden_size: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl LstmLayerParams {
    fn zeros(input_size: usize, hidden_size: usize) -> LstmLayerParams {
        LstmLayerParams {
            input_size,
            hidden_size,
            w: vec![0.0; 4 * hidden_size * (input_size + hidden_size)],
            b: vec![0.0; 4 * hidden_size],
        }
    }
}

/// Model shape and training-time dropout rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub vocab: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
}

impl ModelConfig {
    /// Initializes all weights uniform in (−0.08, 0.08) from the seed's
    /// weight-init stream, with the forget-gate bias raised to +1.
    pub fn build(&self, seed: u64) -> LstmModel {
        let mut rng = stream_rng(seed, stream::WEIGHT_INIT);
        let mut layers = Vec::with_capacity(self.layers);
        for l in 0..self.layers {
            let input = if l == 0 { self.vocab } else { self.hidden };
            let mut p = LstmLayerParams::zeros(input, self.hidden);
            for v in &mut p.w {
                *v = rng.random::<f64>() * 0.16 - 0.08;
            }
            for k in 0..self.hidden {
                p.b[self.hidden + k] = 1.0;
            }
            layers.push(p);
        }
        let mut proj_w = vec![0.0; self.vocab * self.hidden];
        for v in &mut proj_w {
            *v = rng.random::<f64>() * 0.16 - 0.08;
        }
        LstmModel {
            vocab: self.vocab,
            dropout: self.dropout,
            init_seed: seed,
            layers,
            proj_w,
            proj_b: vec![0.0; self.vocab],
        }
    }
}

/// A stacked LSTM with a softmax output head. Layer 0 consumes the one-hot
/// token directly; the projection maps the top hidden vector to one logit
/// per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub vocab: usize,
    pub dropout: f64,
    pub init_seed: u64,
    pub layers: Vec<LstmLayerParams>,
    pub proj_w: Vec<f64>,
    pub proj_b: Vec<f64>,
}

impl LstmModel {
    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.hidden_size).collect()
    }

    /// Parameter tensors in canonical order: per layer `w` then `b`, then
    /// the projection `w` and `b`. Checkpoints and optimizers share this
    /// order.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &self.layers {
            out.push(l.w.as_slice());
            out.push(l.b.as_slice());
        }
        out.push(self.proj_w.as_slice());
        out.push(self.proj_b.as_slice());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &mut self.layers {
            out.push(l.w.as_mut_slice());
            out.push(l.b.as_mut_slice());
        }
        out.push(self.proj_w.as_mut_slice());
        out.push(self.proj_b.as_mut_slice());
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn get_param(&self, mut index: usize) -> f64 {
        for t in self.tensors() {
            if index < t.len() {
                return t[index];
            }
            index -= t.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut index: usize, value: f64) {
        for t in self.tensors_mut() {
            if index < t.len() {
                t[index] = value;
                return;
            }
            index -= t.len();
        }
        panic!("parameter index out of range");
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    fn check_token(&self, token: u32) -> Result<(), LstmError> {
        if (token as usize) < self.vocab {
            Ok(())
        } else {
            Err(LstmError::ShapeMismatch(alloc::format!(
                "token {token} outside vocabulary of {}",
                self.vocab
            )))
        }
    }

    fn check_state(&self, state: &LstmState) -> Result<(), LstmError> {
        let ok = state.h.len() == self.layers.len()
            && state.c.len() == self.layers.len()
            && state
                .h
                .iter()
                .zip(state.c.iter())
                .zip(&self.layers)
                .all(|((h, c), l)| h.len() == l.hidden_size && c.len() == l.hidden_size);
        if ok {
            Ok(())
        } else {
            Err(LstmError::ShapeMismatch(String::from("state does not match model layer sizes")))
        }
    }
}

/// Per-layer hidden and cell vectors; zeroed at sequence start.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl LstmState {
    pub fn zero(model: &LstmModel) -> LstmState {
        LstmState {
            h: model.layers.iter().map(|l| vec![0.0; l.hidden_size]).collect(),
            c: model.layers.iter().map(|l| vec![0.0; l.hidden_size]).collect(),
        }
    }
}

/// Gradients, same layout as the model parameters.
#[derive(Debug, Clone)]
pub struct LstmGrads {
    pub layers: Vec<LstmLayerParams>,
    pub proj_w: Vec<f64>,
    pub proj_b: Vec<f64>,
}

impl LstmGrads {
    pub fn zeros_like(model: &LstmModel) -> LstmGrads {
        LstmGrads {
            layers: model
                .layers
                .iter()
                .map(|l| LstmLayerParams::zeros(l.input_size, l.hidden_size))
                .collect(),
            proj_w: vec![0.0; model.proj_w.len()],
            proj_b: vec![0.0; model.proj_b.len()],
        }
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &self.layers {
            out.push(l.w.as_slice());
            out.push(l.b.as_slice());
        }
        out.push(self.proj_w.as_slice());
        out.push(self.proj_b.as_slice());
        out
    }

    pub fn get_param(&self, mut index: usize) -> f64 {
        for t in self.tensors() {
            if index < t.len() {
                return t[index];
            }
            index -= t.len();
        }
        panic!("gradient index out of range");
    }

    /// Element-wise clamp to `[-bound, bound]`.
    pub fn clip(&mut self, bound: f64) {
        let clamp = |t: &mut [f64]| {
            for v in t {
                *v = v.clamp(-bound, bound);
            }
        };
        for l in &mut self.layers {
            clamp(&mut l.w);
            clamp(&mut l.b);
        }
        clamp(&mut self.proj_w);
        clamp(&mut self.proj_b);
    }
}

/// Layer input: layer 0 sees the one-hot token, upper layers the dropped
/// hidden vector of the layer below.
#[derive(Clone)]
enum LayerInput {
    OneHot(usize),
    Dense(Vec<f64>),
}

/// Everything one layer step needs to replay its backward pass.
struct LayerCache {
    x: LayerInput,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
    h_out: Vec<f64>,
    c_out: Vec<f64>,
}

fn layer_forward(p: &LstmLayerParams, x: LayerInput, h_prev: &[f64], c_prev: &[f64]) -> LayerCache {
    let hs = p.hidden_size;
    let is = p.input_size;
    let row = is + hs;
    let mut z = p.b.clone();
    match &x {
        LayerInput::OneHot(t) => {
            for (r, zr) in z.iter_mut().enumerate() {
                *zr += p.w[r * row + t];
            }
        }
        LayerInput::Dense(xv) => {
            for (r, zr) in z.iter_mut().enumerate() {
                let wrow = &p.w[r * row..r * row + is];
                let mut acc = 0.0;
                for (wv, xv) in wrow.iter().zip(xv) {
                    acc += wv * xv;
                }
                *zr += acc;
            }
        }
    }
    for (r, zr) in z.iter_mut().enumerate() {
        let wrow = &p.w[r * row + is..(r + 1) * row];
        let mut acc = 0.0;
        for (wv, hv) in wrow.iter().zip(h_prev) {
            acc += wv * hv;
        }
        *zr += acc;
    }
    let mut cache = LayerCache {
        x,
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        i: vec![0.0; hs],
        f: vec![0.0; hs],
        g: vec![0.0; hs],
        o: vec![0.0; hs],
        tanh_c: vec![0.0; hs],
        h_out: vec![0.0; hs],
        c_out: vec![0.0; hs],
    };
    for k in 0..hs {
        cache.i[k] = sigmoid(z[k]);
        cache.f[k] = sigmoid(z[hs + k]);
        cache.g[k] = tanh(z[2 * hs + k]);
        cache.o[k] = sigmoid(z[3 * hs + k]);
        cache.c_out[k] = cache.f[k] * c_prev[k] + cache.i[k] * cache.g[k];
        cache.tanh_c[k] = tanh(cache.c_out[k]);
        cache.h_out[k] = cache.o[k] * cache.tanh_c[k];
    }
    cache
}

/// Backward through one layer step. `dh` is the total gradient on this
/// step's hidden output; `dc_carry` arrives from the following step.
/// Returns the gradient on a dense input (`None` for one-hot) and the
/// recurrent `(dh_prev, dc_prev)` carries for the preceding step.
fn layer_backward(
    p: &LstmLayerParams,
    grads: &mut LstmLayerParams,
    cache: &LayerCache,
    dh: &[f64],
    dc_carry: &[f64],
) -> (Option<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let hs = p.hidden_size;
    let is = p.input_size;
    let row = is + hs;
    let mut dz = vec![0.0; 4 * hs];
    let mut dc_prev = vec![0.0; hs];
    for k in 0..hs {
        let (i, f, g, o) = (cache.i[k], cache.f[k], cache.g[k], cache.o[k]);
        let tc = cache.tanh_c[k];
        let d_o = dh[k] * tc;
        let dc = dh[k] * o * (1.0 - tc * tc) + dc_carry[k];
        dz[3 * hs + k] = d_o * o * (1.0 - o);
        dz[k] = dc * g * i * (1.0 - i);
        dz[hs + k] = dc * cache.c_prev[k] * f * (1.0 - f);
        dz[2 * hs + k] = dc * i * (1.0 - g * g);
        dc_prev[k] = dc * f;
    }
    let mut dx = match &cache.x {
        LayerInput::OneHot(_) => None,
        LayerInput::Dense(_) => Some(vec![0.0; is]),
    };
    let mut dh_prev = vec![0.0; hs];
    for (r, &d) in dz.iter().enumerate() {
        grads.b[r] += d;
        let wrow = &p.w[r * row..(r + 1) * row];
        let grow = &mut grads.w[r * row..(r + 1) * row];
        match &cache.x {
            LayerInput::OneHot(t) => {
                grow[*t] += d;
            }
            LayerInput::Dense(xv) => {
                let dxv = dx.as_mut().expect("dense input has a gradient");
                for k in 0..is {
                    grow[k] += d * xv[k];
                    dxv[k] += wrow[k] * d;
                }
            }
        }
        for k in 0..hs {
            grow[is + k] += d * cache.h_prev[k];
            dh_prev[k] += wrow[is + k] * d;
        }
    }
    (dx, dh_prev, dc_prev)
}

/// Per-layer inverted-dropout masks for one step: each entry is 0 with
/// probability `model.dropout`, else `1/(1−dropout)`.
pub type DropoutMasks = Vec<Vec<f64>>;

pub fn sample_masks<R: Rng>(model: &LstmModel, rng: &mut R) -> DropoutMasks {
    let rate = model.dropout;
    model
        .layers
        .iter()
        .map(|l| {
            (0..l.hidden_size)
                .map(|_| if rng.random::<f64>() < rate { 0.0 } else { 1.0 / (1.0 - rate) })
                .collect()
        })
        .collect()
}

fn apply_mask(h: &[f64], mask: Option<&[f64]>) -> Vec<f64> {
    match mask {
        Some(m) => h.iter().zip(m).map(|(&v, &s)| v * s).collect(),
        None => h.to_vec(),
    }
}

fn mask_back(d: &[f64], mask: Option<&[f64]>) -> Vec<f64> {
    apply_mask(d, mask)
}

/// One forward step: consumes a token, returns vocabulary logits and the
/// next state. Passing masks (one per layer) runs in training mode; `None`
/// is evaluation mode. A layer's mask scales its output on the way up the
/// stack and into the projection, never on the recurrent path.
pub fn forward_step(
    model: &LstmModel,
    state: &LstmState,
    token: u32,
    masks: Option<&DropoutMasks>,
) -> Result<(Vec<f64>, LstmState), LstmError> {
    model.check_token(token)?;
    model.check_state(state)?;
    if let Some(m) = masks {
        if m.len() != model.layers.len()
            || m.iter().zip(&model.layers).any(|(mk, l)| mk.len() != l.hidden_size)
        {
            return Err(LstmError::ShapeMismatch(String::from("masks do not match layer sizes")));
        }
    }
    let mut new_state = state.clone();
    let mut dense: Option<Vec<f64>> = None;
    for (l, p) in model.layers.iter().enumerate() {
        let input = match dense.take() {
            None => LayerInput::OneHot(token as usize),
            Some(v) => LayerInput::Dense(v),
        };
        let cache = layer_forward(p, input, &state.h[l], &state.c[l]);
        let mask = masks.map(|m| m[l].as_slice());
        dense = Some(apply_mask(&cache.h_out, mask));
        new_state.h[l] = cache.h_out;
        new_state.c[l] = cache.c_out;
    }
    let top = dense.expect("at least one layer");
    let logits = project(model, &top);
    Ok((logits, new_state))
}

fn project(model: &LstmModel, top: &[f64]) -> Vec<f64> {
    let hs = top.len();
    let mut logits = model.proj_b.clone();
    for (v, lv) in logits.iter_mut().enumerate() {
        let wrow = &model.proj_w[v * hs..(v + 1) * hs];
        let mut acc = 0.0;
        for (wv, hv) in wrow.iter().zip(top) {
            acc += wv * hv;
        }
        *lv += acc;
    }
    logits
}

/// Mean negative log-likelihood over a training window plus gradients from
/// a full backward pass through it, with element-wise gradient clipping.
///
/// The first window token is input-only; each later token is a prediction
/// target. State is carried in and handed back detached, which is what
/// truncated BPTT needs. Dropout masks are freshly sampled per step from
/// `rng` whenever `model.dropout > 0`; a zero rate consumes no randomness.
pub fn loss_and_grads<R: Rng>(
    model: &LstmModel,
    window: &[u32],
    init_state: &LstmState,
    rng: &mut R,
    clip: f64,
) -> Result<(f64, LstmGrads, LstmState), LstmError> {
    if window.len() < 2 {
        return Err(LstmError::WindowTooShort(window.len()));
    }
    model.check_state(init_state)?;
    for &t in window {
        model.check_token(t)?;
    }
    let steps = window.len() - 1;
    let nlayers = model.layers.len();
    let use_dropout = model.dropout > 0.0;

    // Forward, caching every intermediate.
    let mut caches: Vec<Vec<LayerCache>> = Vec::with_capacity(steps);
    let mut masks_per_step: Vec<Option<DropoutMasks>> = Vec::with_capacity(steps);
    let mut proj_inputs: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut probs_per_step: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut state = init_state.clone();
    let mut total_nll = 0.0;
    for t in 0..steps {
        let token = window[t] as usize;
        let target = window[t + 1] as usize;
        let masks = if use_dropout { Some(sample_masks(model, rng)) } else { None };
        let mut layer_caches = Vec::with_capacity(nlayers);
        let mut dense: Option<Vec<f64>> = None;
        for (l, p) in model.layers.iter().enumerate() {
            let input = match dense.take() {
                None => LayerInput::OneHot(token),
                Some(v) => LayerInput::Dense(v),
            };
            let cache = layer_forward(p, input, &state.h[l], &state.c[l]);
            let mask = masks.as_ref().map(|m| m[l].as_slice());
            dense = Some(apply_mask(&cache.h_out, mask));
            state.h[l] = cache.h_out.clone();
            state.c[l] = cache.c_out.clone();
            layer_caches.push(cache);
        }
        let top = dense.expect("at least one layer");
        let logits = project(model, &top);
        total_nll += nll_at(&logits, target);
        probs_per_step.push(softmax(&logits));
        proj_inputs.push(top);
        caches.push(layer_caches);
        masks_per_step.push(masks);
    }
    let mean_nll = total_nll / steps as f64;

    // Backward through the whole window.
    let mut grads = LstmGrads::zeros_like(model);
    let scale = 1.0 / steps as f64;
    let top_hidden = model.layers[nlayers - 1].hidden_size;
    let mut dh_carry: Vec<Vec<f64>> =
        model.layers.iter().map(|l| vec![0.0; l.hidden_size]).collect();
    let mut dc_carry: Vec<Vec<f64>> =
        model.layers.iter().map(|l| vec![0.0; l.hidden_size]).collect();
    for t in (0..steps).rev() {
        let target = window[t + 1] as usize;
        let mut dlogits = probs_per_step[t].clone();
        dlogits[target] -= 1.0;
        for v in &mut dlogits {
            *v *= scale;
        }
        // Projection gradients and the gradient on the masked top vector.
        let top = &proj_inputs[t];
        let mut d_masked_top = vec![0.0; top_hidden];
        for (v, &dv) in dlogits.iter().enumerate() {
            grads.proj_b[v] += dv;
            let wrow = &model.proj_w[v * top_hidden..(v + 1) * top_hidden];
            let grow = &mut grads.proj_w[v * top_hidden..(v + 1) * top_hidden];
            for k in 0..top_hidden {
                grow[k] += dv * top[k];
                d_masked_top[k] += wrow[k] * dv;
            }
        }
        let masks = &masks_per_step[t];
        let mut d_from_above =
            mask_back(&d_masked_top, masks.as_ref().map(|m| m[nlayers - 1].as_slice()));
        for l in (0..nlayers).rev() {
            let mut dh = d_from_above;
            for (a, b) in dh.iter_mut().zip(&dh_carry[l]) {
                *a += b;
            }
            let (dx, dh_prev, dc_prev) = layer_backward(
                &model.layers[l],
                &mut grads.layers[l],
                &caches[t][l],
                &dh,
                &dc_carry[l],
            );
            dh_carry[l] = dh_prev;
            dc_carry[l] = dc_prev;
            d_from_above = match dx {
                Some(dx) if l > 0 => {
                    mask_back(&dx, masks.as_ref().map(|m| m[l - 1].as_slice()))
                }
                _ => Vec::new(), // layer 0: one-hot input takes no gradient
            };
        }
    }

    grads.clip(clip);
    Ok((mean_nll, grads, state))
}

/// Forward-only NLL of a token stream (first token input-only). Returns
/// the summed NLL, prediction count, and final state.
pub fn sequence_nll(
    model: &LstmModel,
    tokens: &[u32],
    init_state: &LstmState,
) -> Result<(f64, usize, LstmState), LstmError> {
    if tokens.len() < 2 {
        return Err(LstmError::WindowTooShort(tokens.len()));
    }
    let mut state = init_state.clone();
    let mut total = 0.0;
    for t in 0..tokens.len() - 1 {
        let (logits, next) = forward_step(model, &state, tokens[t], None)?;
        total += nll_at(&logits, tokens[t + 1] as usize);
        state = next;
    }
    Ok((total, tokens.len() - 1, state))
}

/// Samples the next token from `softmax(logits / temperature)`.
/// Temperatures below 1e-6 collapse to argmax (lowest index on ties).
pub fn sample_next<R: Rng>(
    model: &LstmModel,
    state: &LstmState,
    last_token: u32,
    temperature: f64,
    rng: &mut R,
) -> Result<(u32, LstmState), LstmError> {
    let (logits, next) = forward_step(model, state, last_token, None)?;
    if temperature < 1e-6 {
        let mut best = 0;
        for (i, &v) in logits.iter().enumerate() {
            if v > logits[best] {
                best = i;
            }
        }
        return Ok((best as u32, next));
    }
    let scaled: Vec<f64> = logits.iter().map(|&x| x / temperature).collect();
    let probs = softmax(&scaled);
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return Ok((i as u32, next));
        }
    }
    Ok(((probs.len() - 1) as u32, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_model(vocab: usize, hidden: usize, layers: usize) -> LstmModel {
        ModelConfig { vocab, hidden, layers, dropout: 0.0 }.build(0).zeroed()
    }

    impl LstmModel {
        fn zeroed(mut self) -> LstmModel {
            for t in self.tensors_mut() {
                for v in t {
                    *v = 0.0;
                }
            }
            self
        }
    }

    #[test]
    fn zero_weights_give_uniform_softmax() {
        let model = zero_model(16, 4, 2);
        let state = LstmState::zero(&model);
        let (logits, _) = forward_step(&model, &state, 3, None).unwrap();
        assert!(logits.iter().all(|&v| v == 0.0));
        let probs = softmax(&logits);
        for p in probs {
            assert!((p - 1.0 / 16.0).abs() < 1e-15);
        }
        assert!((nll_at(&logits, 5) - libm::log(16.0)).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_single_step() {
        // One layer, hidden 1, vocab 2; weights fixed by hand, the expected
        // gate values computed independently from the gate equations.
        let mut model = zero_model(2, 1, 1);
        let p = &mut model.layers[0];
        // Rows: [i, f, g, o]; columns: [x0, x1, h0].
        p.w = vec![0.1, 0.2, 0.3, -0.1, 0.05, 0.2, 0.4, -0.3, 0.1, 0.05, 0.15, -0.25];
        p.b = vec![0.01, -0.02, 0.03, 0.04];
        model.proj_w = vec![1.0, -1.0];
        model.proj_b = vec![0.0, 0.0];
        let state = LstmState {
            h: vec![vec![0.5]],
            c: vec![vec![-0.3]],
        };
        let (logits, next) = forward_step(&model, &state, 1, None).unwrap();
        let expect_c = -0.28727418483959011;
        let expect_h = -0.14435431555541683;
        assert!((next.c[0][0] - expect_c).abs() < 1e-12, "c = {}", next.c[0][0]);
        assert!((next.h[0][0] - expect_h).abs() < 1e-12, "h = {}", next.h[0][0]);
        assert!((logits[0] - expect_h).abs() < 1e-12);
        assert!((logits[1] + expect_h).abs() < 1e-12);
    }

    #[test]
    fn forward_is_deterministic() {
        let model = ModelConfig { vocab: 8, hidden: 6, layers: 2, dropout: 0.5 }.build(42);
        let state = LstmState::zero(&model);
        let mut rng1 = ChaCha8Rng::seed_from_u64(9);
        let mut rng2 = ChaCha8Rng::seed_from_u64(9);
        let m1 = sample_masks(&model, &mut rng1);
        let m2 = sample_masks(&model, &mut rng2);
        assert_eq!(m1, m2);
        let (a, sa) = forward_step(&model, &state, 3, Some(&m1)).unwrap();
        let (b, sb) = forward_step(&model, &state, 3, Some(&m2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn softmax_sums_to_one_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let logits: Vec<f64> = (0..17).map(|_| rng.random::<f64>() * 40.0 - 20.0).collect();
            let p = softmax(&logits);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn memory_is_exact_with_forced_gates() {
        // Forget gate forced to exactly 1 and input gate to exactly 0 via
        // saturating biases: the cell must be bit-identical across steps.
        let mut model = zero_model(4, 3, 1);
        for k in 0..3 {
            model.layers[0].b[k] = -800.0; // input gate → 0
            model.layers[0].b[3 + k] = 800.0; // forget gate → 1
        }
        let mut state = LstmState::zero(&model);
        state.c[0] = vec![0.25, -1.5, 3.0];
        let c0 = state.c[0].clone();
        for tok in [0u32, 1, 2, 3, 2, 1] {
            let (_, next) = forward_step(&model, &state, tok, None).unwrap();
            state = next;
            assert_eq!(state.c[0], c0);
        }
    }

    #[test]
    fn gradient_check_small_model() {
        // Central finite differences against the analytic gradient on a
        // small two-layer model, every parameter.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut model = ModelConfig { vocab: 6, hidden: 8, layers: 2, dropout: 0.0 }.build(5);
        let window: Vec<u32> = (0..12).map(|_| rng.random_range(0..6u32)).collect();
        let state = LstmState::zero(&model);
        let mut loss_rng = ChaCha8Rng::seed_from_u64(0);
        let (_, grads, _) =
            loss_and_grads(&model, &window, &state, &mut loss_rng, f64::INFINITY).unwrap();
        let eps = 1e-4;
        for idx in 0..model.param_count() {
            let orig = model.get_param(idx);
            model.set_param(idx, orig + eps);
            let (lp, _, _) = loss_and_grads(
                &model,
                &window,
                &state,
                &mut ChaCha8Rng::seed_from_u64(0),
                f64::INFINITY,
            )
            .unwrap();
            model.set_param(idx, orig - eps);
            let (lm, _, _) = loss_and_grads(
                &model,
                &window,
                &state,
                &mut ChaCha8Rng::seed_from_u64(0),
                f64::INFINITY,
            )
            .unwrap();
            model.set_param(idx, orig);
            let numeric = (lp - lm) / (2.0 * eps);
            let analytic = grads.get_param(idx);
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            let rel = (analytic - numeric).abs() / denom;
            assert!(rel < 1e-4, "param {idx}: analytic {analytic} numeric {numeric} rel {rel}");
        }
    }

    #[test]
    fn gradient_check_with_fixed_dropout() {
        // With the dropout RNG re-seeded identically per evaluation, the
        // masked loss is a deterministic function and must still pass the
        // finite-difference check.
        let mut model = ModelConfig { vocab: 5, hidden: 6, layers: 2, dropout: 0.5 }.build(11);
        let window: Vec<u32> = vec![0, 3, 1, 4, 2, 0, 1, 2];
        let state = LstmState::zero(&model);
        let (_, grads, _) = loss_and_grads(
            &model,
            &window,
            &state,
            &mut ChaCha8Rng::seed_from_u64(123),
            f64::INFINITY,
        )
        .unwrap();
        let eps = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..60 {
            let idx = rng.random_range(0..model.param_count());
            let orig = model.get_param(idx);
            model.set_param(idx, orig + eps);
            let (lp, _, _) = loss_and_grads(
                &model,
                &window,
                &state,
                &mut ChaCha8Rng::seed_from_u64(123),
                f64::INFINITY,
            )
            .unwrap();
            model.set_param(idx, orig - eps);
            let (lm, _, _) = loss_and_grads(
                &model,
                &window,
                &state,
                &mut ChaCha8Rng::seed_from_u64(123),
                f64::INFINITY,
            )
            .unwrap();
            model.set_param(idx, orig);
            let numeric = (lp - lm) / (2.0 * eps);
            let analytic = grads.get_param(idx);
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            assert!((analytic - numeric).abs() / denom < 1e-4);
        }
    }

    #[test]
    fn clipping_bounds_gradients() {
        let model = ModelConfig { vocab: 6, hidden: 4, layers: 1, dropout: 0.0 }.build(3);
        let window: Vec<u32> = vec![0, 1, 2, 3, 4, 5];
        let state = LstmState::zero(&model);
        let (_, grads, _) = loss_and_grads(
            &model,
            &window,
            &state,
            &mut ChaCha8Rng::seed_from_u64(0),
            1e-6,
        )
        .unwrap();
        for t in grads.tensors() {
            assert!(t.iter().all(|v| v.abs() <= 1e-6));
        }
    }

    #[test]
    fn argmax_sampling_at_tiny_temperature() {
        let mut model = zero_model(4, 2, 1);
        model.proj_b = vec![10.0, 0.0, 0.0, 0.0];
        let state = LstmState::zero(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (tok, _) = sample_next(&model, &state, 1, 1e-9, &mut rng).unwrap();
            assert_eq!(tok, 0);
        }
    }

    #[test]
    fn uniform_sampling_is_roughly_uniform() {
        let model = zero_model(8, 2, 1);
        let state = LstmState::zero(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 100_000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            let (tok, _) = sample_next(&model, &state, 0, 1.0, &mut rng).unwrap();
            counts[tok as usize] += 1;
        }
        // 3σ of a multinomial cell count with p = 1/8.
        let expect = n as f64 / 8.0;
        let sigma = libm::sqrt(n as f64 * (1.0 / 8.0) * (7.0 / 8.0));
        for &c in &counts {
            assert!((c as f64 - expect).abs() < 3.0 * sigma, "count {c} vs {expect}");
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let model = ModelConfig { vocab: 9, hidden: 5, layers: 2, dropout: 0.0 }.build(21);
        let state = LstmState::zero(&model);
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut st = state.clone();
            let mut last = 0u32;
            let mut out = Vec::new();
            for _ in 0..50 {
                let (tok, next) = sample_next(&model, &st, last, 1.0, &mut rng).unwrap();
                out.push(tok);
                st = next;
                last = tok;
            }
            out
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_errors() {
        let model = zero_model(4, 2, 1);
        let state = LstmState::zero(&model);
        assert!(matches!(
            forward_step(&model, &state, 9, None),
            Err(LstmError::ShapeMismatch(_))
        ));
        let other = zero_model(4, 3, 1);
        assert!(matches!(
            forward_step(&other, &state, 1, None),
            Err(LstmError::ShapeMismatch(_))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            loss_and_grads(&model, &[1], &state, &mut rng, 5.0).unwrap_err(),
            LstmError::WindowTooShort(1)
        );
    }
}
