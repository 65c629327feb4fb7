//! Symmetric banded matrices with an `LDLᵀ` factorization.

/// Symmetric matrix stored by its lower bands: `bands[k][i] = M[i+k][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBanded {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bands = (0..=bandwidth)
            .map(|k| vec![0.0; n.saturating_sub(k)])
            .collect();
        SymBanded { n, bands }
    }

    pub fn from_diagonal(diag: Vec<f64>) -> Self {
        SymBanded {
            n: diag.len(),
            bands: vec![diag],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, k: usize) -> &[f64] {
        &self.bands[k]
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.bands[0]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k < self.bands.len() {
            self.bands[k][lo]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)` (and its mirror).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.bands[hi - lo][lo] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (k, band) in self.bands.iter().enumerate().skip(1) {
            for (i, &a) in band.iter().enumerate() {
                y[i + k] += a * x[i];
                y[i] += a * x[i + k];
            }
        }
        y
    }

    /// `xᵀ M x`
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `xᵀ M y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// `S M S` for the diagonal matrix `S = diag(s)`.
    pub fn congruence(&self, s: &[f64]) -> Self {
        let bands = self
            .bands
            .iter()
            .enumerate()
            .map(|(k, band)| band.iter().enumerate().map(|(i, a)| a * s[i] * s[i + k]).collect())
            .collect();
        SymBanded { n: self.n, bands }
    }

    /// `self − shift·other`, widened to the larger bandwidth.
    pub fn shifted(&self, shift: f64, other: &SymBanded) -> Self {
        assert_eq!(self.n, other.n);
        let bw = self.bandwidth().max(other.bandwidth());
        let mut out = SymBanded::zeros(self.n, bw);
        for (k, band) in self.bands.iter().enumerate() {
            out.bands[k].copy_from_slice(band);
        }
        for (k, band) in other.bands.iter().enumerate() {
            for (o, a) in out.bands[k].iter_mut().zip(band) {
                *o -= shift * a;
            }
        }
        out
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for (k, band) in self.bands.iter().enumerate() {
            for (i, a) in band.iter().enumerate() {
                rows[i] += a.abs();
                if k > 0 {
                    rows[i + k] += a.abs();
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.bands.iter().flatten().all(|a| a.is_finite())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `LDLᵀ` without pivoting; fails on a zero or non-finite pivot.
    pub fn ldl(&self) -> Result<Ldl, usize> {
        let n = self.n;
        let bw = self.bandwidth();
        let mut d = vec![0.0; n];
        let mut l: Vec<Vec<f64>> = (0..=bw).map(|k| vec![0.0; n.saturating_sub(k)]).collect();
        // l[k][j] = L[j+k][j]
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut dj = self.bands[0][j];
            for k in lo..j {
                let ljk = l[j - k][k];
                dj -= ljk * ljk * d[k];
            }
            if dj == 0.0 || !dj.is_finite() {
                return Err(j);
            }
            d[j] = dj;
            for i in j + 1..=(j + bw).min(n - 1) {
                let mut v = self.bands[i - j][j];
                for k in i.saturating_sub(bw)..j {
                    v -= l[i - k][k] * l[j - k][k] * d[k];
                }
                l[i - j][j] = v / dj;
            }
        }
        Ok(Ldl { l, d })
    }
}

/// Factor `L D Lᵀ` with unit lower-banded `L`.
#[derive(Clone, Debug)]
pub struct Ldl {
    l: Vec<Vec<f64>>,
    d: Vec<f64>,
}

impl Ldl {
    /// Number of negative pivots, i.e. of negative eigenvalues (Sylvester).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let bw = self.l.len() - 1;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(bw)..i {
                x[i] -= self.l[i - k][k] * x[k];
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            for k in i + 1..=(i + bw).min(n.saturating_sub(1)) {
                x[i] -= self.l[k - i][i] * x[k];
            }
        }
        x
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_spd(n: usize, bw: usize, seed: &[f64]) -> SymBanded {
        let mut m = SymBanded::zeros(n, bw);
        let mut it = seed.iter().cycle();
        for k in 1..=bw {
            for i in 0..n - k {
                m.add(i + k, i, *it.next().unwrap());
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum();
            m.add(i, i, row + 1.0 + it.next().unwrap().abs());
        }
        m
    }

    #[test]
    fn tridiagonal_solve() {
        let mut m = SymBanded::zeros(3, 1);
        for i in 0..3 {
            m.add(i, i, 2.0);
        }
        m.add(1, 0, -1.0);
        m.add(2, 1, -1.0);
        let f = m.ldl().unwrap();
        assert_eq!(f.negative_pivots(), 0);
        let x = f.solve(&[1.0, 0.0, 1.0]);
        for (a, b) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn inertia_counts_negative_eigenvalues() {
        // diag(1, 2, 3) - 2.5 I has two negative eigenvalues
        let m = SymBanded::from_diagonal(vec![1.0, 2.0, 3.0]);
        let shifted = m.shifted(2.5, &SymBanded::from_diagonal(vec![1.0; 3]));
        assert_eq!(shifted.ldl().unwrap().negative_pivots(), 2);
        assert!(SymBanded::from_diagonal(vec![0.0, 1.0]).ldl().is_err());
    }

    proptest! {
        #[test]
        fn ldl_solves_banded_systems(
            n in 3usize..30,
            bw in 1usize..3,
            seed in proptest::collection::vec(-1.0f64..1.0, 40),
            rhs in proptest::collection::vec(-5.0f64..5.0, 30),
        ) {
            let m = random_spd(n, bw, &seed);
            let b = &rhs[..n];
            let x = m.ldl().unwrap().solve(b);
            let r = m.matvec(&x);
            for (ri, bi) in r.iter().zip(b) {
                prop_assert!((ri - bi).abs() < 1e-10);
            }
            let dense = m.to_dense();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(dense[i][j], dense[j][i]);
                }
            }
        }
    }
}
