//! Realizability tests for joint-degree matrices, degree sequences,
//! bi-degree sequences and partial bipartite triplets.
//!
//! The undirected and directed tests run the prefix inequalities
//! `L_k <= R_k` with `R_k` updated incrementally, so each test is a single
//! pass after sorting. The same passes expose their slack profiles
//! (`R_k - L_k` per `k`), which the sequence samplers use to locate the
//! fail degree.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::{degree_classes, sort_lexicographic, BiDegreeSequence, DegreeSequence, Jdm};

/// Which condition a non-graphical JDM violates first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JdmViolation {
    NonIntegerClassSize { alpha: usize },
    WithinClassOverflow { alpha: usize, edges: usize, capacity: usize },
    BetweenClassOverflow { alpha: usize, beta: usize, edges: usize, capacity: usize },
}

impl std::fmt::Display for JdmViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JdmViolation::NonIntegerClassSize { alpha } => write!(f, "class size for degree {alpha} is not an integer"),
            JdmViolation::WithinClassOverflow { alpha, edges, capacity } => {
                write!(f, "class {alpha} needs {edges} internal edges but holds at most {capacity}")
            }
            JdmViolation::BetweenClassOverflow { alpha, beta, edges, capacity } => {
                write!(f, "classes {alpha} and {beta} need {edges} edges but allow at most {capacity}")
            }
        }
    }
}

pub fn jdm_is_graphical(j: &Jdm) -> bool {
    check_jdm(j).is_ok()
}

/// Class sizes must be integral, each class can host at most C(|V_α|, 2)
/// internal edges and each pair at most |V_α||V_β| edges.
pub fn check_jdm(j: &Jdm) -> std::result::Result<(), JdmViolation> {
    let part = match degree_classes(j) {
        Ok(p) => p,
        Err(Error::NonIntegerClassSize(alpha)) => {
            return Err(JdmViolation::NonIntegerClassSize { alpha })
        }
        Err(_) => unreachable!("degree_classes only fails on class sizes"),
    };
    for alpha in 1..=j.dim() {
        let size = part.class_size(alpha);
        let capacity = size * size.saturating_sub(1) / 2;
        if j.get(alpha, alpha) > capacity {
            return Err(JdmViolation::WithinClassOverflow {
                alpha,
                edges: j.get(alpha, alpha),
                capacity,
            });
        }
        for beta in (alpha + 1)..=j.dim() {
            let capacity = size * part.class_size(beta);
            if j.get(alpha, beta) > capacity {
                return Err(JdmViolation::BetweenClassOverflow {
                    alpha,
                    beta,
                    edges: j.get(alpha, beta),
                    capacity,
                });
            }
        }
    }
    Ok(())
}

pub fn eg_is_graphical(d: &DegreeSequence) -> bool {
    eg_sorted(d.as_slice())
}

/// Undirected test on a non-increasing slice; zeros are allowed.
pub(crate) fn eg_sorted(d: &[usize]) -> bool {
    debug_assert!(d.windows(2).all(|w| w[0] >= w[1]));
    let n = d.iter().take_while(|&&x| x > 0).count();
    let d = &d[..n];
    if d.iter().sum::<usize>() % 2 == 1 {
        return false;
    }
    eg_slacks(d).all(|s| s >= 0)
}

/// Slack `R_k - L_k` for `k = 1 ..= max(1, n - 1)` of a non-increasing
/// sequence of positive degrees.
///
/// `x_k = min{i : d_i < k}` only moves left as `k` grows and the first `k`
/// with `d_k < k` switches the recurrence for `R_k`, so the whole profile
/// costs `O(n)`.
pub(crate) fn eg_slacks(d: &[usize]) -> impl Iterator<Item = i64> + '_ {
    let n = d.len();
    let last = n.saturating_sub(1).max(1).min(n);
    // 1-indexed: cross is x_k, pointing one past the last entry >= k
    let mut cross = n + 1;
    let mut r: i64 = 0;
    let mut l: i64 = 0;
    (1..=last).map(move |k| {
        while cross > 1 && d[cross - 2] < k {
            cross -= 1;
        }
        let dk = d[k - 1];
        if k == 1 {
            r = n as i64 - 1;
        } else if dk >= k {
            r += cross as i64 - 2;
        } else {
            r += 2 * (k as i64 - 1) - dk as i64;
        }
        l += dk as i64;
        r - l
    })
}

pub fn directed_is_graphical(d: &BiDegreeSequence) -> bool {
    directed_sorted(d.as_slice())
}

/// Directed test on `(in, out)` pairs already in lexicographic
/// non-increasing order.
pub(crate) fn directed_sorted(d: &[(usize, usize)]) -> bool {
    let n = d.len();
    let (sum_in, sum_out) = d
        .iter()
        .fold((0, 0), |(a, b), &(i, o)| (a + i, b + o));
    if sum_in != sum_out {
        return false;
    }
    if d.iter().any(|&(i, o)| i + 1 > n || o + 1 > n) {
        return false;
    }
    DirectedSlacks::new(d).all(|s| s >= 0)
}

/// Slack `R_k - L_k` for `k = 1 ..= max(1, N - 1)` of a lexicographically
/// sorted bi-degree sequence, with
/// `L_k = Σ_{i<=k} in_i` and
/// `R_k = Σ_{i<=k} min(out_i, k-1) + Σ_{i>k} min(out_i, k)`.
///
/// `R_k` advances by `N - Ḡ_{k-1}(k-1) - [out_k >= k]`, where `Ḡ_k(k)`
/// counts nodes `i <= k` with `out_i < k` plus nodes `i > k` with
/// `out_i <= k`. `Ḡ` itself advances by the global count of out-degree `k`
/// plus the correction `S(k)`.
pub(crate) struct DirectedSlacks<'a> {
    d: &'a [(usize, usize)],
    /// `count[p]` = number of nodes with out-degree `p`
    count: Vec<i64>,
    correction: Vec<i64>,
    k: usize,
    last: usize,
    r: i64,
    l: i64,
    g_bar: i64,
}

impl<'a> DirectedSlacks<'a> {
    pub(crate) fn new(d: &'a [(usize, usize)]) -> Self {
        let n = d.len();
        let width = n + 2;
        let mut count = vec![0i64; width];
        let mut correction = vec![0i64; width];
        for (idx, &(_, out)) in d.iter().enumerate() {
            let i = idx + 1;
            let out = out.min(n);
            count[out] += 1;
            if out >= i {
                correction[out] -= 1;
                correction[out + 1] += 1;
            }
        }
        let g_bar = count[0];
        DirectedSlacks {
            d,
            count,
            correction,
            k: 0,
            last: n.saturating_sub(1).max(1).min(n),
            r: 0,
            l: 0,
            g_bar,
        }
    }
}

impl Iterator for DirectedSlacks<'_> {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        if self.k >= self.last {
            return None;
        }
        let n = self.d.len() as i64;
        self.k += 1;
        let k = self.k;
        let (in_k, out_k) = self.d[k - 1];
        self.r += n - self.g_bar - i64::from(out_k >= k);
        self.l += in_k as i64;
        if k < self.count.len() {
            self.g_bar += self.count[k] + self.correction[k];
        }
        Some(self.r - self.l)
    }
}

/// Partial bipartite degree-sequence problem: fixed degrees `p` on part of
/// side U, fixed degrees `q` on part of side V, `eps` edges in total,
/// `size_b` and `size_k` free nodes on U and V.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Triplet {
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub eps: usize,
    pub size_b: usize,
    pub size_k: usize,
}

/// Full two-sided degree lists whose free entries differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedCompletion {
    pub u_degrees: Vec<usize>,
    pub v_degrees: Vec<usize>,
    pub mu: Ratio<usize>,
    pub nu: Ratio<usize>,
}

/// Spreads `total - fixed_sum` over `free` slots as evenly as possible,
/// larger values first.
fn balanced_share(
    fixed_sum: usize,
    total: usize,
    free: usize,
    side: &str,
) -> Result<(Ratio<usize>, impl Iterator<Item = usize>)> {
    if total < fixed_sum {
        return Err(Error::InfeasibleBalance(format!(
            "{side} side fixes {fixed_sum} stubs but only {total} are available"
        )));
    }
    let rest = total - fixed_sum;
    if free == 0 && rest != 0 {
        return Err(Error::InfeasibleBalance(format!(
            "{side} side has no free nodes for {rest} remaining stubs"
        )));
    }
    let (mean, base, extra) = if free == 0 {
        (Ratio::from_integer(0), 0, 0)
    } else {
        (Ratio::new(rest, free), rest / free, rest % free)
    };
    Ok((mean, (0..free).map(move |i| base + usize::from(i < extra))))
}

pub fn balanced_completion(t: &Triplet) -> Result<BalancedCompletion> {
    let (mu, free_u) = balanced_share(t.p.iter().sum(), t.eps, t.size_b, "U")?;
    let (nu, free_v) = balanced_share(t.q.iter().sum(), t.eps, t.size_k, "V")?;
    let mut u_degrees = t.p.clone();
    u_degrees.extend(free_u);
    let mut v_degrees = t.q.clone();
    v_degrees.extend(free_v);
    Ok(BalancedCompletion {
        u_degrees,
        v_degrees,
        mu,
        nu,
    })
}

/// A triplet is realizable iff its balanced completion is. The completion is
/// tested as a directed sequence where U nodes only send and V nodes only
/// receive.
pub fn triplet_is_graphical(t: &Triplet) -> bool {
    match balanced_completion(t) {
        Ok(c) => bipartite_is_graphical(&c.u_degrees, &c.v_degrees),
        Err(_) => false,
    }
}

/// Bipartite degree lists as a directed sequence: U degrees become
/// out-degrees and V degrees in-degrees.
pub fn bipartite_is_graphical(u: &[usize], v: &[usize]) -> bool {
    let mut pairs = Vec::with_capacity(u.len() + v.len());
    pairs.extend(u.iter().map(|&d| (0, d)));
    pairs.extend(v.iter().map(|&d| (d, 0)));
    sort_lexicographic(&mut pairs);
    directed_sorted(&pairs)
}

/// Within-class variant: `fixed` stubs are set, the remaining
/// `stub_total - Σ fixed` are balanced over `free` nodes, and the resulting
/// undirected sequence is tested.
pub fn unipartite_triplet_is_graphical(fixed: &[usize], free: usize, stub_total: usize) -> bool {
    let Ok((_, share)) = balanced_share(fixed.iter().sum(), stub_total, free, "class") else {
        return false;
    };
    let mut d: Vec<usize> = fixed.iter().copied().chain(share).collect();
    d.sort_unstable_by(|a, b| b.cmp(a));
    eg_sorted(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn eg(d: &[usize]) -> bool {
        eg_is_graphical(&DegreeSequence::new(d.to_vec()))
    }

    fn directed(d: &[(usize, usize)]) -> bool {
        directed_is_graphical(&BiDegreeSequence::new(d.to_vec()))
    }

    #[test]
    fn jdm_examples() {
        assert!(jdm_is_graphical(&fixtures::six_node_jdm()));
        assert!(jdm_is_graphical(&fixtures::ten_node_jdm()));
        let mut j = Jdm::zeros(2);
        j.set(2, 2, 1);
        assert_eq!(
            check_jdm(&j),
            Err(JdmViolation::WithinClassOverflow {
                alpha: 2,
                edges: 1,
                capacity: 0
            })
        );
        let mut j = Jdm::zeros(2);
        // nine stubs on the degree-2 side
        j.set(1, 2, 9);
        assert_eq!(check_jdm(&j), Err(JdmViolation::NonIntegerClassSize { alpha: 2 }));
    }

    #[test]
    fn between_class_overflow() {
        // one degree-2 node and two degree-1 nodes joined twice each
        let mut j = Jdm::zeros(2);
        j.set(1, 2, 2);
        assert!(jdm_is_graphical(&j));
        let mut j = Jdm::zeros(3);
        j.set(2, 3, 2);
        j.set(1, 3, 1);
        // |V_3| = 1, |V_2| = 1, J_23 = 2 > 1
        assert!(matches!(
            check_jdm(&j),
            Err(JdmViolation::BetweenClassOverflow { alpha: 2, beta: 3, .. })
        ));
    }

    #[test]
    fn undirected_examples() {
        assert!(eg(&[2, 2, 2]));
        assert!(!eg(&[1]));
        assert!(!eg(&[3, 3, 1, 1]));
        assert!(eg(&[3, 2, 2, 2, 1]));
        assert!(!eg(&[2]));
        assert!(eg(&[]));
        assert!(eg(&[0, 0]));
        assert!(eg(&[1, 1, 0]));
        assert!(!eg(&[4, 1, 1, 1]));
    }

    #[test]
    fn undirected_slacks_match_direct_formula() {
        let d = [5, 4, 4, 3, 2, 2, 1, 1];
        let fast: Vec<i64> = eg_slacks(&d).collect();
        let direct: Vec<i64> = (1..d.len())
            .map(|k| {
                let l: usize = d[..k].iter().sum();
                let r = k * (k - 1) + d[k..].iter().map(|&x| x.min(k)).sum::<usize>();
                r as i64 - l as i64
            })
            .collect();
        assert_eq!(fast, direct);
    }

    #[test]
    fn directed_examples() {
        assert!(directed(&[(1, 1), (1, 1)]));
        assert!(!directed(&[(2, 0), (0, 1)]));
        assert!(directed(&[(2, 2), (2, 2), (2, 2)]));
        assert!(!directed(&[(1, 1)]));
        assert!(directed(&[]));
        assert!(directed(&[(1, 0), (1, 0), (0, 2)]));
        assert!(!directed(&[(2, 0), (0, 2)]));
    }

    #[test]
    fn directed_slacks_match_direct_formula() {
        let mut d = vec![(3, 1), (2, 3), (2, 2), (2, 0), (1, 2), (1, 1), (0, 2), (0, 0)];
        sort_lexicographic(&mut d);
        let n = d.len();
        let fast: Vec<i64> = DirectedSlacks::new(&d).collect();
        let direct: Vec<i64> = (1..n)
            .map(|k| {
                let l: usize = d[..k].iter().map(|p| p.0).sum();
                let r: usize = d[..k].iter().map(|p| p.1.min(k - 1)).sum::<usize>()
                    + d[k..].iter().map(|p| p.1.min(k)).sum::<usize>();
                r as i64 - l as i64
            })
            .collect();
        assert_eq!(fast, direct);
    }

    #[test]
    fn completion_examples() {
        let t = Triplet { p: vec![2], q: vec![1, 1], eps: 3, size_b: 1, size_k: 1 };
        let c = balanced_completion(&t).unwrap();
        assert_eq!((c.u_degrees, c.v_degrees), (vec![2, 1], vec![1, 1, 1]));
        assert_eq!((c.mu, c.nu), (Ratio::from_integer(1), Ratio::from_integer(1)));

        let t = Triplet { p: vec![], q: vec![], eps: 0, size_b: 2, size_k: 2 };
        let c = balanced_completion(&t).unwrap();
        assert_eq!((c.u_degrees, c.v_degrees), (vec![0, 0], vec![0, 0]));

        let t = Triplet { p: vec![4], q: vec![2, 2], eps: 6, size_b: 2, size_k: 2 };
        let c = balanced_completion(&t).unwrap();
        assert_eq!((c.u_degrees, c.v_degrees), (vec![4, 1, 1], vec![2, 2, 1, 1]));

        let t = Triplet { p: vec![], q: vec![], eps: 5, size_b: 2, size_k: 3 };
        let c = balanced_completion(&t).unwrap();
        assert_eq!((c.u_degrees, c.v_degrees), (vec![3, 2], vec![2, 2, 1]));
        assert_eq!(c.mu, Ratio::new(5, 2));
    }

    #[test]
    fn completion_errors() {
        let over = Triplet { p: vec![3], q: vec![], eps: 2, size_b: 1, size_k: 1 };
        assert!(matches!(balanced_completion(&over), Err(Error::InfeasibleBalance(_))));
        let stranded = Triplet { p: vec![1], q: vec![], eps: 2, size_b: 0, size_k: 1 };
        assert!(matches!(balanced_completion(&stranded), Err(Error::InfeasibleBalance(_))));
        let fixed = Triplet { p: vec![2], q: vec![1, 1], eps: 2, size_b: 0, size_k: 0 };
        assert_eq!(balanced_completion(&fixed).unwrap().mu, Ratio::from_integer(0));
    }

    #[test]
    fn triplet_examples() {
        assert!(triplet_is_graphical(&Triplet { p: vec![2], q: vec![1, 1], eps: 3, size_b: 1, size_k: 1 }));
        assert!(!triplet_is_graphical(&Triplet { p: vec![3], q: vec![], eps: 3, size_b: 0, size_k: 2 }));
        assert!(triplet_is_graphical(&Triplet::default()));
        assert!(triplet_is_graphical(&Triplet { p: vec![3], q: vec![], eps: 3, size_b: 0, size_k: 3 }));
    }

    #[test]
    fn unipartite_examples() {
        // four degree-1 slots in one class: any split of 4 stubs works
        assert!(unipartite_triplet_is_graphical(&[1], 3, 4));
        assert!(unipartite_triplet_is_graphical(&[0], 3, 4));
        // a node cannot take 2 stubs when only one other node can pair up
        assert!(!unipartite_triplet_is_graphical(&[2], 1, 4));
        // odd stub totals never close
        assert!(!unipartite_triplet_is_graphical(&[], 3, 3));
        assert!(unipartite_triplet_is_graphical(&[], 0, 0));
    }
}
