use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const INPUTS: usize = 44;
pub const OUTPUTS: usize = 32;
pub const HIDDEN_LAYERS: usize = 4;
pub const HIDDEN_WIDTH: usize = 256;

const MAGIC: &[u8; 4] = b"SHLN";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear = 0,
    /// Negative slope 0.01; the slope at exactly zero is taken as 0.01.
    LeakyRelu = 1,
}

impl Activation {
    fn from_id(id: u32) -> Result<Activation> {
        match id {
            0 => Ok(Activation::Linear),
            1 => Ok(Activation::LeakyRelu),
            _ => Err(Error::InvalidInput(format!("unknown activation id {id}"))),
        }
    }

    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    0.01 * z
                }
            }
        }
    }

    #[inline]
    pub(crate) fn slope(self, z: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.01
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// out x in
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Feedforward network whose first hidden activations are added to the last
/// hidden activations before the output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub dims: Vec<usize>,
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub input_mean: Array1<f64>,
    pub input_std: Array1<f64>,
}

/// Intermediate values of a batch forward pass.
pub(crate) struct Trace {
    pub xn: Array2<f64>,
    /// Pre-activations of each hidden layer.
    pub z: Vec<Array2<f64>>,
    /// Hidden outputs, the last one including the skip term.
    pub h: Vec<Array2<f64>>,
    pub y: Array2<f64>,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 4 || dims.contains(&0) {
        return Err(Error::InvalidInput(
            "network needs at least two hidden layers".into(),
        ));
    }
    let hidden = &dims[1..dims.len() - 1];
    if hidden.iter().any(|&d| d != hidden[0]) {
        return Err(Error::InvalidInput(
            "hidden layers must share one width".into(),
        ));
    }
    Ok(())
}

impl SurrogateModel {
    /// The standard 44 -> 256 x 4 -> 32 layout.
    pub fn standard_dims() -> Vec<usize> {
        let mut d = vec![INPUTS];
        d.extend([HIDDEN_WIDTH; HIDDEN_LAYERS]);
        d.push(OUTPUTS);
        d
    }

    /// All weights and biases zero, identity normalization.
    pub fn zeros(dims: &[usize], activation: Activation) -> Result<SurrogateModel> {
        check_dims(dims)?;
        let layers = dims
            .windows(2)
            .map(|w| Layer {
                w: Array2::zeros((w[1], w[0])),
                b: Array1::zeros(w[1]),
            })
            .collect();
        Ok(SurrogateModel {
            dims: dims.to_vec(),
            layers,
            activation,
            input_mean: Array1::zeros(dims[0]),
            input_std: Array1::ones(dims[0]),
        })
    }

    /// Uniform fan-in initialization in +-sqrt(6 / fan_in), zero biases.
    pub fn init(dims: &[usize], activation: Activation, seed: u64) -> Result<SurrogateModel> {
        let mut m = SurrogateModel::zeros(dims, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in &mut m.layers {
            let bound = (6.0 / l.w.ncols() as f64).sqrt();
            l.w.mapv_inplace(|_| rng.random_range(-bound..bound));
        }
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        self.dims[self.dims.len() - 1]
    }

    pub(crate) fn normalize(&self, x: ArrayView2<f64>) -> Array2<f64> {
        (&x - &self.input_mean.view().insert_axis(Axis(0)))
            / self.input_std.view().insert_axis(Axis(0))
    }

    pub(crate) fn forward_normalized(&self, xn: Array2<f64>) -> Trace {
        let act = self.activation;
        let nh = self.layers.len() - 1;
        let mut z = Vec::with_capacity(nh);
        let mut h: Vec<Array2<f64>> = Vec::with_capacity(nh);
        for (k, l) in self.layers[..nh].iter().enumerate() {
            let input = if k == 0 { &xn } else { &h[k - 1] };
            let zk = input.dot(&l.w.t()) + &l.b;
            let mut hk = zk.mapv(|v| act.apply(v));
            if k + 1 == nh {
                hk += &h[0];
            }
            z.push(zk);
            h.push(hk);
        }
        let out = &self.layers[nh];
        let y = h[nh - 1].dot(&out.w.t()) + &out.b;
        Trace { xn, z, h, y }
    }

    /// Rows of `x` are raw inputs; rows of the result are predictions.
    pub fn predict_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} inputs, got {}",
                self.input_dim(),
                x.ncols()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite model input".into()));
        }
        Ok(self.forward_normalized(self.normalize(x)).y)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let row = ArrayView2::from_shape((1, x.len()), x)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(self.predict_batch(row)?.into_raw_vec_and_offset().0)
    }

    /// Jacobian of the outputs with respect to the raw inputs, outputs x inputs.
    pub fn gradient(&self, x: &[f64]) -> Result<Array2<f64>> {
        let row = ArrayView2::from_shape((1, x.len()), x)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        if x.len() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let t = self.forward_normalized(self.normalize(row));
        let nh = self.layers.len() - 1;
        let act = self.activation;
        let scale = |zk: &Array2<f64>, m: Array2<f64>| -> Array2<f64> {
            let d = zk.row(0).mapv(|v| act.slope(v));
            m * &d.insert_axis(Axis(1))
        };
        let mut j1 = scale(&t.z[0], self.layers[0].w.clone());
        j1 /= &self.input_std.view().insert_axis(Axis(0));
        let mut j = j1.clone();
        for k in 1..nh {
            j = scale(&t.z[k], self.layers[k].w.dot(&j));
            if k + 1 == nh {
                j += &j1;
            }
        }
        Ok(self.layers[nh].w.dot(&j))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.activation as u32).to_le_bytes());
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        let floats = self.input_mean.iter().chain(self.input_std.iter()).chain(
            self.layers
                .iter()
                .flat_map(|l| l.w.iter().chain(l.b.iter())),
        );
        for v in floats {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SurrogateModel> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        if bytes.len() < 12 {
            return Err(Error::Checksum);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().unwrap()) {
            return Err(Error::Checksum);
        }
        let mut pos = 8;
        let u32_at = |pos: &mut usize| -> Result<u32> {
            let s = body.get(*pos..*pos + 4).ok_or(Error::Checksum)?;
            *pos += 4;
            Ok(u32::from_le_bytes(s.try_into().unwrap()))
        };
        let activation = Activation::from_id(u32_at(&mut pos)?)?;
        let n = u32_at(&mut pos)? as usize;
        if n > 64 {
            return Err(Error::InvalidInput(format!("implausible layer count {n}")));
        }
        let dims = (0..n)
            .map(|_| u32_at(&mut pos).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let mut m = SurrogateModel::zeros(&dims, activation)?;
        let expected: usize = 2 * dims[0]
            + m.layers
                .iter()
                .map(|l| l.w.len() + l.b.len())
                .sum::<usize>();
        if body.len() - pos != 8 * expected {
            return Err(Error::InvalidInput(
                "model file size does not match its layer dims".into(),
            ));
        }
        let mut vals = body[pos..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let slots = m.input_mean.iter_mut().chain(m.input_std.iter_mut()).chain(
            m.layers
                .iter_mut()
                .flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut())),
        );
        for (slot, v) in slots.zip(&mut vals) {
            *slot = v;
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<SurrogateModel> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        SurrogateModel::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(act: Activation, seed: u64) -> SurrogateModel {
        let mut m = SurrogateModel::init(&[5, 7, 7, 7, 3], act, seed).unwrap();
        m.input_mean = Array1::from(vec![0.1, -0.2, 0.3, 0.0, 1.0]);
        m.input_std = Array1::from(vec![1.0, 2.0, 0.5, 1.5, 3.0]);
        for (k, l) in m.layers.iter_mut().enumerate() {
            l.b.mapv_inplace(|_| 0.05 * k as f64);
        }
        m
    }

    /// Straight-line evaluation with explicit loops.
    fn reference_forward(m: &SurrogateModel, x: &[f64]) -> Vec<f64> {
        let act = |v: f64| {
            if m.activation == Activation::Linear || v > 0.0 {
                v
            } else {
                0.01 * v
            }
        };
        let dense = |l: &Layer, v: &[f64]| -> Vec<f64> {
            (0..l.w.nrows())
                .map(|i| l.b[i] + (0..l.w.ncols()).map(|j| l.w[[i, j]] * v[j]).sum::<f64>())
                .collect()
        };
        let xn: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| (v - m.input_mean[i]) / m.input_std[i])
            .collect();
        let nh = m.layers.len() - 1;
        let h1: Vec<f64> = dense(&m.layers[0], &xn).into_iter().map(act).collect();
        let mut h = h1.clone();
        for k in 1..nh {
            h = dense(&m.layers[k], &h).into_iter().map(act).collect();
        }
        for (a, b) in h.iter_mut().zip(&h1) {
            *a += b;
        }
        dense(&m.layers[nh], &h)
    }

    #[test]
    fn zero_model_outputs_bias() {
        let m =
            SurrogateModel::zeros(&SurrogateModel::standard_dims(), Activation::LeakyRelu).unwrap();
        let y = m.predict(&[0.3; 44]).unwrap();
        assert_eq!(y, vec![0.0; 32]);
        assert!(m.predict(&[0.0; 43]).is_err());
        assert!(m.predict(&[f64::NAN; 44]).is_err());
    }

    #[test]
    fn forward_matches_reference() {
        let m = SurrogateModel::init(&SurrogateModel::standard_dims(), Activation::LeakyRelu, 3)
            .unwrap();
        let x: Vec<f64> = (0..44).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = m.predict(&x).unwrap();
        let b = reference_forward(&m, &x);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
        assert_eq!(a, m.predict(&x).unwrap());
        let s = small(Activation::LeakyRelu, 9);
        let x = [0.4, -1.0, 2.0, 0.0, 3.0];
        for (u, v) in s.predict(&x).unwrap().iter().zip(reference_forward(&s, &x)) {
            assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn linear_gradient_closed_form() {
        let m = small(Activation::Linear, 1);
        let w = |k: usize| m.layers[k].w.clone();
        let inner = w(2).dot(&w(1)) + Array2::<f64>::eye(7);
        let mut expect = w(3).dot(&inner).dot(&w(0));
        expect /= &m.input_std.view().insert_axis(Axis(0));
        let g = m.gradient(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        for (a, b) in g.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let m = small(Activation::LeakyRelu, seed);
            let x = [0.3, -0.7, 1.1, 0.25, 2.0];
            let g = m.gradient(&x).unwrap();
            for j in 0..5 {
                let h = 1e-5 * m.input_std[j];
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (yp, ym) = (m.predict(&xp).unwrap(), m.predict(&xm).unwrap());
                for i in 0..3 {
                    let fd = (yp[i] - ym[i]) / (2.0 * h);
                    assert!(
                        (g[[i, j]] - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                        "{} vs {fd}",
                        g[[i, j]]
                    );
                }
            }
        }
    }

    #[test]
    fn constant_model_has_zero_gradient() {
        let mut m = small(Activation::LeakyRelu, 2);
        for l in &mut m.layers[1..] {
            l.w.fill(0.0);
        }
        m.layers[0].w.fill(0.0);
        let g = m.gradient(&[1.0; 5]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn file_round_trip_and_errors() {
        let m = small(Activation::LeakyRelu, 4);
        let bytes = m.to_bytes();
        let back = SurrogateModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        let x = [0.1, 0.2, 0.3, 0.4, 0.5];
        assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());

        assert!(matches!(
            SurrogateModel::from_bytes(&bytes[..bytes.len() - 9]),
            Err(Error::Checksum)
        ));
        let mut bumped = bytes.clone();
        bumped[4] = 2;
        assert!(matches!(
            SurrogateModel::from_bytes(&bumped),
            Err(Error::UnsupportedVersion(2))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            SurrogateModel::from_bytes(&bad),
            Err(Error::BadMagic)
        ));
        let mut flipped = bytes;
        flipped[40] ^= 1;
        assert!(matches!(
            SurrogateModel::from_bytes(&flipped),
            Err(Error::Checksum)
        ));

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        m.save(&p).unwrap();
        assert_eq!(SurrogateModel::load(&p).unwrap(), m);
    }
}
