//! Complex tensor trains (matrix product states).
//!
//! A [`TensorTrain`] over `d` axes stores one three-index core per axis,
//! core `k` shaped `(D_{k-1}, n_k, D_k)` with `D_0 = D_d = 1`. Cores are kept
//! row-major, so entry `(a, i, b)` of core `k` lives at `(a * n_k + i) * D_k + b`.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of entries [`TensorTrain::to_dense`] may produce.
pub const DEFAULT_DENSE_CAP: u128 = 10_000_000;

/// Failure reported by a black-box [`Oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleError(pub String);

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A black-box function from a multi-index to a complex value.
///
/// Plain closures `Fn(&[usize]) -> Complex64` are infallible oracles; wrap a
/// closure returning `Result` in [`Fallible`] when evaluation can fail.
pub trait Oracle: Sync {
    fn eval(&self, idx: &[usize]) -> std::result::Result<Complex64, OracleError>;
}

impl<F> Oracle for F
where
    F: Fn(&[usize]) -> Complex64 + Sync,
{
    fn eval(&self, idx: &[usize]) -> std::result::Result<Complex64, OracleError> {
        Ok(self(idx))
    }
}

/// Adapter for oracles that may fail.
pub struct Fallible<F>(pub F);

impl<F> Oracle for Fallible<F>
where
    F: Fn(&[usize]) -> std::result::Result<Complex64, OracleError> + Sync,
{
    fn eval(&self, idx: &[usize]) -> std::result::Result<Complex64, OracleError> {
        (self.0)(idx)
    }
}

/// One three-index core of a tensor train.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    left: usize,
    size: usize,
    right: usize,
    data: Vec<Complex64>,
}

impl Core {
    pub fn new(left: usize, size: usize, right: usize, data: Vec<Complex64>) -> Result<Self> {
        if left == 0 || size == 0 || right == 0 {
            return Err(Error::InvalidTensorTrain(format!(
                "core dimensions must be positive, got ({left}, {size}, {right})"
            )));
        }
        if data.len() != left * size * right {
            return Err(Error::InvalidTensorTrain(format!(
                "core ({left}, {size}, {right}) needs {} entries, got {}",
                left * size * right,
                data.len()
            )));
        }
        Ok(Self {
            left,
            size,
            right,
            data,
        })
    }

    /// Builds a core by evaluating `f(a, i, b)` over its full index range.
    pub fn from_fn(
        left: usize,
        size: usize,
        right: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(left * size * right);
        for a in 0..left {
            for i in 0..size {
                for b in 0..right {
                    data.push(f(a, i, b));
                }
            }
        }
        Self::new(left, size, right, data)
    }

    pub fn left_bond(&self) -> usize {
        self.left
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn right_bond(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> Complex64 {
        self.data[(a * self.size + i) * self.right + b]
    }

    /// The `left x right` matrix selected by physical index `i`, row-major.
    #[inline]
    fn slice(&self, i: usize) -> impl Iterator<Item = &[Complex64]> + '_ {
        (0..self.left).map(move |a| {
            let start = (a * self.size + i) * self.right;
            &self.data[start..start + self.right]
        })
    }

    pub fn scale(&mut self, c: Complex64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }
}

/// A complex-valued tensor train with open boundary bonds of dimension one.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTrain {
    cores: Vec<Core>,
}

impl TensorTrain {
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::InvalidTensorTrain("at least one core required".into()));
        }
        if cores[0].left != 1 {
            return Err(Error::InvalidTensorTrain(format!(
                "left boundary bond must be 1, got {}",
                cores[0].left
            )));
        }
        if cores[cores.len() - 1].right != 1 {
            return Err(Error::InvalidTensorTrain(format!(
                "right boundary bond must be 1, got {}",
                cores[cores.len() - 1].right
            )));
        }
        for (k, pair) in cores.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::InvalidTensorTrain(format!(
                    "bond {} mismatch: core {k} has right bond {}, core {} has left bond {}",
                    k + 1,
                    pair[0].right,
                    k + 1,
                    pair[1].left
                )));
            }
        }
        Ok(Self { cores })
    }

    /// Rank-one train from per-axis vectors: `tt(idx) = prod_k vectors[k][idx_k]`.
    pub fn rank_one(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let cores = vectors
            .iter()
            .map(|v| Core::new(1, v.len(), 1, v.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Random train with standard-normal complex entries and the given internal bonds.
    pub fn random(shape: &[usize], bonds: &[usize], seed: u64) -> Result<Self> {
        use rand_distr::StandardNormal;
        if bonds.len() + 1 != shape.len() {
            return Err(Error::InvalidTensorTrain(format!(
                "{} axes need {} internal bonds, got {}",
                shape.len(),
                shape.len().saturating_sub(1),
                bonds.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cores = Vec::with_capacity(shape.len());
        for (k, &n) in shape.iter().enumerate() {
            let left = if k == 0 { 1 } else { bonds[k - 1] };
            let right = if k + 1 == shape.len() { 1 } else { bonds[k] };
            cores.push(Core::from_fn(left, n, right, |_, _, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })?);
        }
        Self::new(cores)
    }

    pub fn ndim(&self) -> usize {
        self.cores.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.size).collect()
    }

    /// Internal bond dimensions `D_1, ..., D_{d-1}`.
    pub fn bonds(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| c.right)
            .collect()
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn core_mut(&mut self, k: usize) -> &mut Core {
        &mut self.cores[k]
    }

    /// Number of stored complex coefficients.
    pub fn num_params(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.cores.len() {
            return Err(Error::IndexArity {
                expected: self.cores.len(),
                got: idx.len(),
            });
        }
        for (axis, (&i, core)) in idx.iter().zip(&self.cores).enumerate() {
            if i >= core.size {
                return Err(Error::IndexOutOfRange {
                    axis,
                    index: i,
                    size: core.size,
                });
            }
        }
        Ok(())
    }

    /// Coefficient at a multi-index: the matrix product of the selected core slices.
    pub fn evaluate(&self, idx: &[usize]) -> Result<Complex64> {
        self.check_index(idx)?;
        Ok(self.evaluate_unchecked(idx))
    }

    pub(crate) fn evaluate_unchecked(&self, idx: &[usize]) -> Complex64 {
        let mut row = vec![Complex64::new(1.0, 0.0)];
        let mut next = Vec::new();
        for (core, &i) in self.cores.iter().zip(idx) {
            next.clear();
            next.resize(core.right, Complex64::new(0.0, 0.0));
            for (&w, slice) in row.iter().zip(core.slice(i)) {
                for (acc, &x) in next.iter_mut().zip(slice) {
                    *acc += w * x;
                }
            }
            std::mem::swap(&mut row, &mut next);
        }
        row[0]
    }

    /// `sum_idx conj(self[idx]) * other[idx]`, by transfer-matrix contraction.
    pub fn inner(&self, other: &TensorTrain) -> Result<Complex64> {
        let (ls, rs) = (self.shape(), other.shape());
        if ls != rs {
            return Err(Error::ShapeMismatch {
                left: ls,
                right: rs,
            });
        }
        let zero = Complex64::new(0.0, 0.0);
        // env[a * kb + b]: bra bond a, ket bond b
        let mut env = vec![Complex64::new(1.0, 0.0)];
        let mut half = Vec::new();
        for (bra, ket) in self.cores.iter().zip(&other.cores) {
            let (ka, kb, n) = (bra.left, ket.left, bra.size);
            let (ra, rb) = (bra.right, ket.right);
            // half[(a, i, b')] = sum_b env[a, b] * ket[b, i, b']
            half.clear();
            half.resize(ka * n * rb, zero);
            for a in 0..ka {
                for b in 0..kb {
                    let e = env[a * kb + b];
                    if e == zero {
                        continue;
                    }
                    for i in 0..n {
                        let src = &ket.data[(b * n + i) * rb..(b * n + i + 1) * rb];
                        let dst = &mut half[(a * n + i) * rb..(a * n + i + 1) * rb];
                        for (d, &s) in dst.iter_mut().zip(src) {
                            *d += e * s;
                        }
                    }
                }
            }
            // env'[a', b'] = sum_{a, i} conj(bra[a, i, a']) * half[a, i, b']
            let mut next = vec![zero; ra * rb];
            for a in 0..ka {
                for i in 0..n {
                    let h = &half[(a * n + i) * rb..(a * n + i + 1) * rb];
                    let br = &bra.data[(a * n + i) * ra..(a * n + i + 1) * ra];
                    for (ap, &x) in br.iter().enumerate() {
                        let xc = x.conj();
                        let dst = &mut next[ap * rb..(ap + 1) * rb];
                        for (d, &hv) in dst.iter_mut().zip(h) {
                            *d += xc * hv;
                        }
                    }
                }
            }
            env = next;
        }
        Ok(env[0])
    }

    /// Squared Frobenius norm, `<tt|tt>`.
    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).map(|z| z.re).unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        self.to_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    /// Materializes every entry; refuses when the entry count exceeds `cap`.
    pub fn to_dense_with_cap(&self, cap: u128) -> Result<DenseTensor> {
        let shape = self.shape();
        let required = shape
            .iter()
            .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
            .unwrap_or(u128::MAX);
        if required > cap {
            return Err(Error::Capacity {
                required,
                allowed: cap,
            });
        }
        // Left-to-right accumulation: rows are prefix multi-indices (row-major), columns bond.
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        let mut rows = 1usize;
        for core in &self.cores {
            let (k, n, r) = (core.left, core.size, core.right);
            let mut next = vec![Complex64::new(0.0, 0.0); rows * n * r];
            for p in 0..rows {
                for a in 0..k {
                    let w = acc[p * k + a];
                    for i in 0..n {
                        let src = &core.data[(a * n + i) * r..(a * n + i + 1) * r];
                        let dst = &mut next[(p * n + i) * r..(p * n + i + 1) * r];
                        for (d, &s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
            acc = next;
            rows *= n;
        }
        Ok(DenseTensor { shape, data: acc })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TensorTrainFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<TensorTrainFile>(s)?.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Dense row-major complex tensor, used for small-instance checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.shape.len() {
            return Err(Error::IndexArity {
                expected: self.shape.len(),
                got: idx.len(),
            });
        }
        let mut lin = 0;
        for (axis, (&i, &n)) in idx.iter().zip(&self.shape).enumerate() {
            if i >= n {
                return Err(Error::IndexOutOfRange {
                    axis,
                    index: i,
                    size: n,
                });
            }
            lin = lin * n + i;
        }
        Ok(lin)
    }

    pub fn get(&self, idx: &[usize]) -> Result<Complex64> {
        Ok(self.data[self.linear_index(idx)?])
    }
}

/// Draws `m` index tuples uniformly (with replacement) from `shape`.
pub(crate) fn sample_indices(shape: &[usize], m: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| shape.iter().map(|&n| rng.random_range(0..n)).collect())
        .collect()
}

/// Normalized one-norm difference between `tt` and `oracle` on `m` random indices:
/// `sum |oracle - tt| / sum |oracle|`.
///
/// Returns `0` when both sums vanish and `+inf` when only the oracle sum does.
/// The sample points depend only on `seed`; evaluation may run in parallel but the
/// reduction order is fixed.
pub fn rand_sample_diff<O: Oracle + ?Sized>(
    tt: &TensorTrain,
    oracle: &O,
    m: usize,
    seed: u64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let samples = sample_indices(&tt.shape(), m, seed);
    let terms = samples
        .par_iter()
        .map(|idx| {
            let exact = oracle.eval(idx).map_err(|e| Error::Oracle {
                index: idx.clone(),
                message: e.0,
            })?;
            let approx = tt.evaluate_unchecked(idx);
            Ok(((exact - approx).norm(), exact.norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (num, den) = terms
        .iter()
        .fold((0.0, 0.0), |(n, d), &(a, b)| (n + a, d + b));
    Ok(if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    })
}

// On-disk container: shape header plus row-major core data as [re, im] pairs.
#[derive(Serialize, Deserialize)]
struct TensorTrainFile {
    format: String,
    version: u32,
    shape: Vec<usize>,
    bonds: Vec<usize>,
    cores: Vec<Vec<[f64; 2]>>,
}

const FILE_FORMAT: &str = "tensor-train";

impl From<&TensorTrain> for TensorTrainFile {
    fn from(tt: &TensorTrain) -> Self {
        Self {
            format: FILE_FORMAT.into(),
            version: 1,
            shape: tt.shape(),
            bonds: tt.bonds(),
            cores: tt
                .cores
                .iter()
                .map(|c| c.data.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<TensorTrainFile> for TensorTrain {
    type Error = Error;

    fn try_from(file: TensorTrainFile) -> Result<Self> {
        if file.format != FILE_FORMAT || file.version != 1 {
            return Err(Error::InvalidTensorTrain(format!(
                "unsupported container {} v{}",
                file.format, file.version
            )));
        }
        let d = file.shape.len();
        if d == 0 || file.bonds.len() + 1 != d || file.cores.len() != d {
            return Err(Error::InvalidTensorTrain(
                "inconsistent shape, bonds and core count".into(),
            ));
        }
        let cores = file
            .cores
            .into_iter()
            .enumerate()
            .map(|(k, data)| {
                let left = if k == 0 { 1 } else { file.bonds[k - 1] };
                let right = if k + 1 == d { 1 } else { file.bonds[k] };
                let data = data
                    .into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect();
                Core::new(left, file.shape[k], right, data)
            })
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_core_lookup() {
        let tt = TensorTrain::rank_one(&[vec![c(1.0, 0.0), c(2.0, 0.0)]]).unwrap();
        assert_eq!(tt.evaluate(&[1]).unwrap(), c(2.0, 0.0));
        let dense = tt.to_dense().unwrap();
        assert_eq!(dense.data(), &[c(1.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn rank_one_is_separable() {
        let a = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.5, -1.0)];
        let b = vec![c(3.0, 0.0), c(0.0, 1.0)];
        let tt = TensorTrain::rank_one(&[a.clone(), b.clone()]).unwrap();
        let dense = tt.to_dense().unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(tt.evaluate(&[i, j]).unwrap(), a[i] * b[j]);
                assert_eq!(dense.get(&[i, j]).unwrap(), a[i] * b[j]);
            }
        }
    }

    #[test]
    fn out_of_range_names_axis() {
        let tt = TensorTrain::random(&[3, 4, 2], &[2, 2], 1).unwrap();
        match tt.evaluate(&[0, 4, 0]) {
            Err(Error::IndexOutOfRange { axis, index, size }) => {
                assert_eq!((axis, index, size), (1, 4, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            tt.evaluate(&[0, 0]),
            Err(Error::IndexArity { .. })
        ));
    }

    #[test]
    fn rejects_mismatched_bonds() {
        let a = Core::new(1, 2, 3, vec![c(1.0, 0.0); 6]).unwrap();
        let b = Core::new(2, 2, 1, vec![c(1.0, 0.0); 4]).unwrap();
        assert!(TensorTrain::new(vec![a, b]).is_err());
        let open = Core::new(2, 2, 1, vec![c(1.0, 0.0); 4]).unwrap();
        assert!(TensorTrain::new(vec![open]).is_err());
    }

    #[test]
    fn all_ones_inner() {
        let ones = vec![c(1.0, 0.0); 3];
        let tt = TensorTrain::rank_one(&[ones.clone(), ones]).unwrap();
        let v = tt.inner(&tt).unwrap();
        assert!((v - c(9.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn inner_conjugates_bra() {
        let mut bra = vec![c(0.0, 0.0); 3];
        bra[1] = c(0.0, 1.0);
        let mut ket = vec![c(0.0, 0.0); 3];
        ket[1] = c(1.0, 0.0);
        let bra = TensorTrain::rank_one(&[bra]).unwrap();
        let ket = TensorTrain::rank_one(&[ket]).unwrap();
        assert_eq!(bra.inner(&ket).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn inner_shape_mismatch() {
        let a = TensorTrain::random(&[3, 4], &[2], 1).unwrap();
        let b = TensorTrain::random(&[3, 5], &[2], 1).unwrap();
        match a.inner(&b) {
            Err(Error::ShapeMismatch { left, right }) => {
                assert_eq!(left, vec![3, 4]);
                assert_eq!(right, vec![3, 5]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let tt = TensorTrain::random(&[10, 10, 10], &[2, 2], 3).unwrap();
        match tt.to_dense_with_cap(999) {
            Err(Error::Capacity { required, allowed }) => {
                assert_eq!((required, allowed), (1000, 999));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(tt.to_dense_with_cap(1000).is_ok());
    }

    #[test]
    fn sample_diff_trivial_cases() {
        let tt = TensorTrain::random(&[4, 5, 3], &[3, 2], 9).unwrap();
        let same = |ix: &[usize]| tt.evaluate(ix).unwrap();
        assert_eq!(rand_sample_diff(&tt, &same, 500, 1).unwrap(), 0.0);

        let zero = TensorTrain::rank_one(&[vec![c(0.0, 0.0); 4], vec![c(0.0, 0.0); 5]]).unwrap();
        let one = |_: &[usize]| c(1.0, 0.0);
        assert_eq!(rand_sample_diff(&zero, &one, 100, 1).unwrap(), 1.0);
        assert!(rand_sample_diff(&zero, &one, 0, 1).is_err());
    }

    #[test]
    fn sample_diff_reports_failing_index() {
        let tt = TensorTrain::random(&[4, 4], &[2], 2).unwrap();
        let bad = Fallible(|ix: &[usize]| {
            if ix[0] == 2 {
                Err(OracleError("boom".into()))
            } else {
                Ok(c(1.0, 0.0))
            }
        });
        match rand_sample_diff(&tt, &bad, 200, 5) {
            Err(Error::Oracle { index, message }) => {
                assert_eq!(index[0], 2);
                assert_eq!(message, "boom");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_container_roundtrip() {
        let tt = TensorTrain::random(&[3, 4, 2], &[2, 3], 11).unwrap();
        let back = TensorTrain::from_json(&tt.to_json().unwrap()).unwrap();
        assert_eq!(back, tt);
        let value: serde_json::Value = serde_json::from_str(&tt.to_json().unwrap()).unwrap();
        assert_eq!(value["shape"], serde_json::json!([3, 4, 2]));
        assert_eq!(value["bonds"], serde_json::json!([2, 3]));
    }

    #[test]
    fn json_container_rejects_bad_lengths() {
        let s = r#"{"format":"tensor-train","version":1,"shape":[2,2],"bonds":[2],
                    "cores":[[[1,0],[1,0],[1,0]],[[1,0],[1,0],[1,0],[1,0]]]}"#;
        assert!(TensorTrain::from_json(s).is_err());
    }
}
