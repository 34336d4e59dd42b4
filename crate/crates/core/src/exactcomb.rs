//! Exact combinatorics over arbitrary-precision integers and rationals.
//!
//! Closed-form generalized Catalan counts, dynamic-programming path counters
//! used as independent oracles, the first-passage convolution inverse, and
//! exact checkers for the series identities behind the generating functions.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Result};
use crate::{BigCount, Rat};

/// Which boundary rule a [`CountTable`] was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountKind {
    /// Every lattice point satisfies `b <= p*a + d`.
    WeaklyBelow,
    /// Every lattice point except the two endpoints satisfies `b < p*a + d`.
    StrictlyBelow,
}

impl CountKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CountKind::WeaklyBelow => "weakly_below",
            CountKind::StrictlyBelow => "strictly_below",
        }
    }
}

/// Path counts from `(0,0)` to `(n, p*n + d)` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub p: u64,
    pub d: u64,
    pub kind: CountKind,
    pub entries: Vec<BigCount>,
}

impl CountTable {
    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }
}

/// Binomial coefficient `C(a, b)`; zero when `b > a`.
pub fn binom(a: u64, b: u64) -> BigCount {
    if b > a {
        return BigCount::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigCount::one();
    // acc holds C(a-b+i, i) after step i, so each division is exact.
    for i in 1..=b {
        acc *= a - b + i;
        let (q, r) = acc.div_rem(&BigCount::from(i));
        debug_assert!(r.is_zero());
        acc = q;
    }
    acc
}

/// Generalized binomial `C(r, l) = r (r-1) ... (r-l+1) / l!` for rational `r`.
pub fn generalized_binom(r: &Rat, l: u64) -> Rat {
    let mut num = Rat::one();
    let mut fact = BigInt::one();
    for i in 0..l {
        num *= r - Rat::from_integer(BigInt::from(i));
        fact *= i + 1;
    }
    num / Rat::from_integer(fact)
}

/// Generalized Catalan number `M(p, n) = C(pn+n+1, n) / (pn+n+1)`: the number
/// of monotone paths from `(0,0)` to `(n, pn)` never strictly above `y = px`.
pub fn catalan_m(p: u64, n: u64) -> BigCount {
    let top = p * n + n + 1;
    let (q, r) = binom(top, n).div_rem(&BigCount::from(top));
    assert!(r.is_zero(), "C({top},{n}) not divisible by {top}");
    q
}

/// Counts lattice paths by dynamic programming over the region under the
/// line `y = p x + d`. Never uses the closed form.
pub fn dp_count(p: u64, d: u64, n_max: usize, kind: CountKind) -> Result<CountTable> {
    if p == 0 {
        return Err(domain("dp_count requires slope p >= 1"));
    }
    let allowed = |a: u64, b: u64| match kind {
        CountKind::WeaklyBelow => b <= p * a + d,
        CountKind::StrictlyBelow => b < p * a + d,
    };
    let entries = dp_kernel(p, d, n_max, kind, allowed);
    Ok(CountTable { p, d, kind, entries })
}

/// Shared DP kernel. `grid[a][b]` counts paths from the origin to `(a, b)`
/// whose points after the origin all pass `allowed`; the origin is always
/// admitted. Column `a` stores heights `0..=p*a + d`.
fn dp_kernel(
    p: u64,
    d: u64,
    n_max: usize,
    kind: CountKind,
    allowed: impl Fn(u64, u64) -> bool,
) -> Vec<BigCount> {
    let height = |a: usize| (p * a as u64 + d) as usize;
    let mut grid: Vec<Vec<BigCount>> = Vec::with_capacity(n_max + 1);
    let mut entries = Vec::with_capacity(n_max + 1);

    for a in 0..=n_max {
        let top = height(a);
        let mut col = vec![BigCount::zero(); top + 1];
        for b in 0..=top {
            if a == 0 && b == 0 {
                col[0] = BigCount::one();
                continue;
            }
            if !allowed(a as u64, b as u64) {
                continue;
            }
            let mut v = BigCount::zero();
            if a > 0 {
                if let Some(left) = grid[a - 1].get(b) {
                    v += left;
                }
            }
            if b > 0 {
                v += &col[b - 1];
            }
            col[b] = v;
        }

        // The target (a, p*a + d) is an endpoint: count the paths entering it.
        let entry = if a == 0 && top == 0 {
            match kind {
                CountKind::WeaklyBelow => BigCount::one(),
                CountKind::StrictlyBelow => BigCount::zero(),
            }
        } else {
            let mut inflow = BigCount::zero();
            if a > 0 {
                if let Some(left) = grid[a - 1].get(top) {
                    inflow += left;
                }
            }
            if top > 0 {
                inflow += &col[top - 1];
            }
            inflow
        };
        entries.push(entry);
        grid.push(col);
    }
    entries
}

/// First-passage counts `N(p, n)` for `n = 0..=n_max`, obtained by inverting
/// `M(p,n) = sum_{m=0}^{n} N(p,m) M(p,n-m)` with `N(p,0) = 0`.
pub fn first_passage_n(p: u64, n_max: usize) -> Vec<BigCount> {
    let m: Vec<BigCount> = (0..=n_max as u64).map(|n| catalan_m(p, n)).collect();
    let mut out: Vec<BigCount> = Vec::with_capacity(n_max + 1);
    out.push(BigCount::zero());
    for n in 1..=n_max {
        let mut acc = BigInt::from(m[n].clone());
        for j in 1..n {
            acc -= BigInt::from(&out[j] * &m[n - j]);
        }
        let v = acc
            .to_biguint()
            .expect("first-passage count went negative");
        out.push(v);
    }
    out
}

/// Exact value of `sum_{n=0}^{k} (-1)^n C(k,n) C(n*alpha + n, k-1)`, which
/// vanishes for every `alpha` and every `k >= 1`.
pub fn check_identity_zero(alpha: &Rat, k: u64) -> Result<Rat> {
    if k == 0 {
        return Err(domain("identity requires k >= 1"));
    }
    let one = Rat::one();
    let mut total = Rat::zero();
    for n in 0..=k {
        let nn = Rat::from_integer(BigInt::from(n));
        let r = &nn * (alpha + &one);
        let term = Rat::from_integer(BigInt::from(binom(k, n))) * generalized_binom(&r, k - 1);
        if n % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Exact partial sum `sum_{n < n_terms} M(p,n) z^n (1-z)^{pn+1}`, which
/// converges to 1 for `0 <= z < 1/(p+1)`.
pub fn fuss_catalan_partial_sum(p: u64, z: &Rat, n_terms: usize) -> Result<Rat> {
    if p == 0 {
        return Err(domain("partial sum requires p >= 1"));
    }
    let limit = Rat::new(BigInt::one(), BigInt::from(p + 1));
    if z.is_negative() || *z >= limit {
        return Err(domain(format!("z = {z} outside [0, 1/{})", p + 1)));
    }
    let one = Rat::one();
    let w = &one - z;
    // step factor z (1-z)^p between consecutive weights
    let step = z * num_traits::pow(w.clone(), p as usize);
    let mut weight = w;
    let mut total = Rat::zero();
    for n in 0..n_terms as u64 {
        total += Rat::from_integer(BigInt::from(catalan_m(p, n))) * &weight;
        weight *= &step;
    }
    Ok(total)
}

/// Checks `S(n, d+1) = sum_{i=0}^{n} S(i, d) S(n-i, 0)` for all `n <= n_max`,
/// with every `S` taken from the DP counter.
pub fn s_convolution_check(p: u64, d: u64, n_max: usize) -> Result<bool> {
    let s0 = dp_count(p, 0, n_max, CountKind::WeaklyBelow)?.entries;
    let sd = dp_count(p, d, n_max, CountKind::WeaklyBelow)?.entries;
    let sd1 = dp_count(p, d + 1, n_max, CountKind::WeaklyBelow)?.entries;
    Ok((0..=n_max).all(|n| {
        let conv: BigUint = (0..=n).map(|i| &sd[i] * &s0[n - i]).sum();
        conv == sd1[n]
    }))
}
