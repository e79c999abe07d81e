//! Banded LU with partial pivoting, sized for the block-tridiagonal
//! collocation Jacobians (6x6 blocks, half-bandwidth 12).

/// Band matrix in LAPACK-style storage with room for pivoting fill-in.
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major: entry (i, j) lives at data[j * ld + (kl + ku + i - j)].
    data: Vec<f64>,
    ld: usize,
}

impl Banded {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self { n, kl, ku, data: vec![0.0; n * ld], ld }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = (i as isize, j as isize);
        let band = self.kl as isize + self.ku as isize + i - j;
        if band < 0 || band >= self.ld as isize || j < 0 || j >= self.n as isize {
            return None;
        }
        Some(j as usize * self.ld + band as usize)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .offset(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside band kl={} ku={}", self.kl, self.ku));
        self.data[k] += v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.offset(i, j).map_or(0.0, |k| self.data[k])
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        if let Some(k) = self.offset(i, j) {
            self.data[k] = v;
        }
    }

    /// Factors in place and solves A x = b, overwriting b with x.
    /// Returns the offending row on a (numerically) singular pivot.
    pub fn solve(mut self, b: &mut [f64]) -> Result<(), usize> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        for k in 0..n {
            // Partial pivot among the kl rows below.
            let i_max = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=i_max {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best < 1e-300 {
                return Err(k);
            }
            let j_max = (k + ku + kl).min(n - 1);
            if piv != k {
                for j in k..=j_max {
                    let a = self.get(k, j);
                    let b_ = self.get(piv, j);
                    self.set(k, j, b_);
                    self.set(piv, j, a);
                }
                b.swap(k, piv);
            }
            let pivot = self.get(k, k);
            for i in k + 1..=i_max {
                let m = self.get(i, k) / pivot;
                if m == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in k + 1..=j_max {
                    let v = self.get(i, j) - m * self.get(k, j);
                    self.set(i, j, v);
                }
                b[i] -= m * b[k];
            }
        }
        // Back substitution.
        for k in (0..n).rev() {
            let j_max = (k + ku + kl).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=j_max {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
        Ok(())
    }
}
