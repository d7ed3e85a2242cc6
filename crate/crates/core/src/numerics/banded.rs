use crate::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // Row i holds columns i - kl ..= i + ku + kl; the extra kl columns
    // receive fill-in from row interchanges during factorization.
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * Self::width(kl, ku)],
        }
    }

    fn width(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        if off < 0 || off >= Self::width(self.kl, self.ku) as isize || j >= self.n {
            None
        } else {
            Some(i * Self::width(self.kl, self.ku) + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let s = self.slot(i, j).expect("inside band");
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        y
    }

    /// LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-300 || best == 0.0 {
                return Err(Error::Singular("banded LU"));
            }
            pivots[k] = p;
            let cmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=cmax {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.put(k, j, b);
                    self.put(p, j, a);
                }
            }
            let d = self.get(k, k);
            for i in k + 1..=last {
                let l = self.get(i, k) / d;
                if l == 0.0 {
                    continue;
                }
                self.put(i, k, l);
                for j in k + 1..=cmax {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        let v = self.get(i, j) - l * u;
                        self.put(i, j, v);
                    }
                }
            }
        }
        Ok(BandedLu {
            lu: self,
            pivots,
        })
    }

    fn put(&mut self, i: usize, j: usize, v: f64) {
        match self.slot(i, j) {
            Some(s) => self.data[s] = v,
            None => debug_assert!(v == 0.0, "fill-in outside storage at ({i}, {j})"),
        }
    }
}

/// Factorization produced by [`BandedMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.lu;
        let n = a.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + a.kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= a.get(i, k) * x[k];
            }
        }
        for k in (0..n).rev() {
            let cmax = (k + a.ku + a.kl).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=cmax {
                s -= a.get(k, j) * x[j];
            }
            x[k] = s / a.get(k, k);
        }
        x
    }
}
