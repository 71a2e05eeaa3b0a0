use std::collections::BTreeMap;

/// Normal-form *-monomial z_1^{a_1} z_1*^{b_1} ⋯ z_n^{a_n} z_n*^{b_n} x^c.
///
/// Generator indices ascend and plain powers precede starred powers within an
/// index. `x` is central and contributes no phases.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub(crate) a: Vec<u32>,
    pub(crate) b: Vec<u32>,
    pub(crate) c: u32,
}

impl Monomial {
    pub fn new(a: Vec<u32>, b: Vec<u32>, c: u32) -> Self {
        assert_eq!(a.len(), b.len(), "exponent vectors differ in length");
        Monomial { a, b, c }
    }

    pub fn one(n: usize) -> Self {
        Monomial {
            a: vec![0; n],
            b: vec![0; n],
            c: 0,
        }
    }

    /// z_j (zero-based j).
    pub fn gen(n: usize, j: usize) -> Self {
        let mut m = Self::one(n);
        m.a[j] = 1;
        m
    }

    /// z_j^* (zero-based j).
    pub fn gen_star(n: usize, j: usize) -> Self {
        let mut m = Self::one(n);
        m.b[j] = 1;
        m
    }

    pub fn x(n: usize) -> Self {
        let mut m = Self::one(n);
        m.c = 1;
        m
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn plain(&self) -> &[u32] {
        &self.a
    }

    pub fn starred(&self) -> &[u32] {
        &self.b
    }

    pub fn x_power(&self) -> u32 {
        self.c
    }

    pub fn degree(&self) -> u32 {
        self.a.iter().chain(&self.b).sum::<u32>() + self.c
    }

    pub fn is_one(&self) -> bool {
        self.degree() == 0
    }

    /// a_j − b_j: the charge of generator j under rotations.
    pub fn charge(&self, j: usize) -> i64 {
        self.a[j] as i64 - self.b[j] as i64
    }

    /// Componentwise sum of exponents (the normal-ordered support of a product).
    pub fn merged(&self, other: &Monomial) -> Monomial {
        Monomial {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
            c: self.c + other.c,
        }
    }

    /// Exponents swapped; the support of the adjoint.
    pub fn swapped(&self) -> Monomial {
        Monomial {
            a: self.b.clone(),
            b: self.a.clone(),
            c: self.c,
        }
    }

    /// Symbolic phase of `self · other`: for every pair j < k the exponent
    /// e_{jk} with total phase Π ρ_{jk}^{e_{jk}}.
    ///
    /// e_{jk} = (a_k − b_k)(c_j − d_j), where (a, b) are the exponents of
    /// `self` and (c, d) those of `other`.
    pub fn product_phase_exponents(&self, other: &Monomial) -> BTreeMap<(usize, usize), i64> {
        let n = self.n();
        let mut out = BTreeMap::new();
        for k in 0..n {
            let left = self.charge(k);
            if left == 0 {
                continue;
            }
            for j in 0..k {
                let right = other.charge(j);
                if right != 0 {
                    out.insert((j, k), left * right);
                }
            }
        }
        out
    }

    /// Symbolic phase picked up when normal-ordering the adjoint.
    ///
    /// The reversed product Π_{j desc} z_j^{b_j} z_j*^{a_j} needs, for every
    /// pair j < k, exponent (a_k − b_k)(a_j − b_j).
    pub fn adjoint_phase_exponents(&self) -> BTreeMap<(usize, usize), i64> {
        let n = self.n();
        let mut out = BTreeMap::new();
        for k in 0..n {
            let ck = self.charge(k);
            if ck == 0 {
                continue;
            }
            for j in 0..k {
                let cj = self.charge(j);
                if cj != 0 {
                    out.insert((j, k), ck * cj);
                }
            }
        }
        out
    }
}
