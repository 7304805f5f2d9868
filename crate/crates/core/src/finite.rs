//! Exact finite-group models of the fibered-product resolution.
//!
//! For a finite group `G` with subgroups `Q <= H <= G`, Haar measure is
//! counting measure and every continuity condition is vacuous, so the
//! differentials, the homotopy operators `h_n`, the kernel `psi` and the
//! transfer map can all be checked as exact rational identities. This is a
//! desk-scale model of the locally compact theory, not a substitute for it.
//!
//! Two pictures of the same functions are used:
//!
//! * on the fibered product `(G/Q)^n_f`, tuples of `Q`-cosets sharing one
//!   `H`-coset (for `n = 0` the `H`-coset alone);
//! * on `G x (H/Q)^n`, through `q_n(g, x_1..x_n) = (g x_1, ..., g x_n)`.
//!   Functions of the first kind are exactly the functions of the second
//!   kind invariant under `(g, x) -> (g h, h^-1 x)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;

pub type Rational = BigRational;

/// Largest group accepted.
pub const MAX_ORDER: usize = 10_000;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A finite group given by its multiplication table, with subgroups
/// `Q <= H <= G` and an optional `L <= G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupModel {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    h: Vec<usize>,
    q: Vec<usize>,
    l: Option<Vec<usize>>,
    // g -> index of gQ, gH
    q_coset: Vec<usize>,
    h_coset: Vec<usize>,
    q_reps: Vec<usize>,
    h_reps: Vec<usize>,
    // H/Q as indices 0..m, with representatives in H
    hq_reps: Vec<usize>,
    hq_of_q_coset: HashMap<usize, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupModelRepr {
    pub table: Vec<Vec<usize>>,
    pub h: Vec<usize>,
    pub q: Vec<usize>,
    #[serde(default)]
    pub l: Option<Vec<usize>>,
}

fn left_cosets(mul: &[Vec<usize>], sub: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = mul.len();
    let mut id = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for g in 0..n {
        if id[g] != usize::MAX {
            continue;
        }
        let k = reps.len();
        reps.push(g);
        for &s in sub {
            id[mul[g][s]] = k;
        }
    }
    (id, reps)
}

impl FiniteGroupModel {
    /// Validates the table (closure, associativity, identity, inverses) and
    /// the subgroup chain.
    pub fn from_table(table: Vec<Vec<usize>>, h: Vec<usize>, q: Vec<usize>, l: Option<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || n > MAX_ORDER {
            return Err(Error::GroupAxiom(format!("order {n} outside 1..={MAX_ORDER}")));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::GroupAxiom("table is not closed".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::GroupAxiom("no identity".into()))?;
        let mut inv = vec![0; n];
        for g in 0..n {
            inv[g] = (0..n)
                .find(|&k| table[g][k] == identity && table[k][g] == identity)
                .ok_or_else(|| Error::GroupAxiom(format!("element {g} has no inverse")))?;
        }
        check_associative(&table)?;
        Self::assemble(table, inv, identity, h, q, l)
    }

    /// Expands permutation generators of `G`, `H`, `Q` (and `L`) into a
    /// table. Permutations act on `0..k`; products compose right to left.
    pub fn from_permutations(
        g: &[Vec<usize>],
        h: &[Vec<usize>],
        q: &[Vec<usize>],
        l: Option<&[Vec<usize>]>,
    ) -> Result<Self> {
        let k = g.first().map_or(0, Vec::len);
        let valid = |p: &Vec<usize>| {
            let mut seen = vec![false; k];
            p.len() == k && p.iter().all(|&i| i < k && !std::mem::replace(&mut seen[i], true))
        };
        if k == 0 || g.iter().chain(h).chain(q).chain(l.unwrap_or(&[])).any(|p| !valid(p)) {
            return Err(Error::GroupAxiom("generators must be permutations of one set".into()));
        }
        let compose = |a: &[usize], b: &[usize]| -> Vec<usize> { b.iter().map(|&i| a[i]).collect() };
        let id: Vec<usize> = (0..k).collect();
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut frontier = 0;
        while frontier < elems.len() {
            let x = elems[frontier].clone();
            frontier += 1;
            for s in g {
                let y = compose(s, &x);
                if !index.contains_key(&y) {
                    if elems.len() >= MAX_ORDER {
                        return Err(Error::GroupAxiom(format!("group exceeds order {MAX_ORDER}")));
                    }
                    index.insert(y.clone(), elems.len());
                    elems.push(y);
                }
            }
        }
        let n = elems.len();
        let mut table = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                table[a][b] = index[&compose(&elems[a], &elems[b])];
            }
        }
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| table[a][b] == 0)
                .expect("finite permutation groups have inverses");
        }
        let generate = |gens: &[Vec<usize>]| -> Result<Vec<usize>> {
            let ids = gens
                .iter()
                .map(|p| {
                    index
                        .get(p)
                        .copied()
                        .ok_or_else(|| Error::GroupAxiom("subgroup generator not in G".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(closure(&table, &ids, 0))
        };
        let (hs, qs) = (generate(h)?, generate(q)?);
        let ls = l.map(generate).transpose()?;
        Self::assemble(table, inv, 0, hs, qs, ls)
    }

    fn assemble(
        mul: Vec<Vec<usize>>,
        inv: Vec<usize>,
        identity: usize,
        mut h: Vec<usize>,
        mut q: Vec<usize>,
        l: Option<Vec<usize>>,
    ) -> Result<Self> {
        for (name, s) in [("H", &mut h), ("Q", &mut q)] {
            s.sort_unstable();
            s.dedup();
            check_subgroup(&mul, identity, s).map_err(|e| Error::GroupAxiom(format!("{name}: {e}")))?;
        }
        let l = match l {
            Some(mut s) => {
                s.sort_unstable();
                s.dedup();
                check_subgroup(&mul, identity, &s).map_err(|e| Error::GroupAxiom(format!("L: {e}")))?;
                Some(s)
            }
            None => None,
        };
        if q.iter().any(|x| h.binary_search(x).is_err()) {
            return Err(Error::GroupAxiom("Q is not contained in H".into()));
        }
        let (q_coset, q_reps) = left_cosets(&mul, &q);
        let (h_coset, h_reps) = left_cosets(&mul, &h);
        let mut hq_reps = Vec::new();
        let mut hq_of_q_coset = HashMap::new();
        for &x in &h {
            if let std::collections::hash_map::Entry::Vacant(e) = hq_of_q_coset.entry(q_coset[x]) {
                e.insert(hq_reps.len());
                hq_reps.push(x);
            }
        }
        Ok(Self {
            mul,
            inv,
            identity,
            h,
            q,
            l,
            q_coset,
            h_coset,
            q_reps,
            h_reps,
            hq_reps,
            hq_of_q_coset,
        })
    }

    /// Named presets: `"S3"` (`H = <(0 1)>`, `Q = 1`, `L = A3`), `"S4"`
    /// (`H = S3`, `Q = <(0 1)>`, `L = D4`), `"D4"` (`H` the Klein group
    /// `<r^2, s>`, `Q = <s>`, `L = <r>`).
    pub fn preset(name: &str) -> Result<Self> {
        let v = |p: &[usize]| p.to_vec();
        match name {
            "S3" => Self::from_permutations(
                &[v(&[1, 0, 2]), v(&[1, 2, 0])],
                &[v(&[1, 0, 2])],
                &[v(&[0, 1, 2])],
                Some(&[v(&[1, 2, 0])]),
            ),
            "S4" => Self::from_permutations(
                &[v(&[1, 0, 2, 3]), v(&[1, 2, 3, 0])],
                &[v(&[1, 0, 2, 3]), v(&[1, 2, 0, 3])],
                &[v(&[1, 0, 2, 3])],
                Some(&[v(&[1, 2, 3, 0]), v(&[2, 1, 0, 3])]),
            ),
            "D4" => Self::from_permutations(
                &[v(&[1, 2, 3, 0]), v(&[0, 3, 2, 1])],
                &[v(&[2, 3, 0, 1]), v(&[0, 3, 2, 1])],
                &[v(&[0, 3, 2, 1])],
                Some(&[v(&[1, 2, 3, 0])]),
            ),
            other => Err(Error::InvalidInput(format!(
                "unknown preset {other:?}; expected S3, S4 or D4"
            ))),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: GroupModelRepr = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::from_table(r.table, r.h, r.q, r.l)
    }

    pub fn to_repr(&self) -> GroupModelRepr {
        GroupModelRepr {
            table: self.mul.clone(),
            h: self.h.clone(),
            q: self.q.clone(),
            l: self.l.clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn h(&self) -> &[usize] {
        &self.h
    }

    pub fn q(&self) -> &[usize] {
        &self.q
    }

    pub fn l(&self) -> Option<&[usize]> {
        self.l.as_deref()
    }

    /// `|G/H|`.
    pub fn index_gh(&self) -> usize {
        self.h_reps.len()
    }

    /// `|H/Q|`.
    pub fn index_hq(&self) -> usize {
        self.hq_reps.len()
    }

    /// `h . x` for `h in H` and `x in H/Q`.
    pub fn act_hq(&self, h: usize, x: usize) -> usize {
        self.hq_of_q_coset[&self.q_coset[self.mul[h][self.hq_reps[x]]]]
    }
}

fn closure(mul: &[Vec<usize>], gens: &[usize], identity: usize) -> Vec<usize> {
    let mut set = vec![identity];
    let mut seen = vec![false; mul.len()];
    seen[identity] = true;
    let mut i = 0;
    while i < set.len() {
        let x = set[i];
        i += 1;
        for &s in gens {
            let y = mul[s][x];
            if !seen[y] {
                seen[y] = true;
                set.push(y);
            }
        }
    }
    set.sort_unstable();
    set
}

fn check_subgroup(mul: &[Vec<usize>], identity: usize, s: &[usize]) -> std::result::Result<(), String> {
    if s.iter().any(|&x| x >= mul.len()) {
        return Err("index out of range".into());
    }
    if s.binary_search(&identity).is_err() {
        return Err("missing identity".into());
    }
    for &a in s {
        for &b in s {
            if s.binary_search(&mul[a][b]).is_err() {
                return Err(format!("not closed: {a} * {b}"));
            }
        }
    }
    Ok(())
}

/// Exhaustive for small tables, a deterministic sample of triples beyond.
fn check_associative(t: &[Vec<usize>]) -> Result<()> {
    let n = t.len();
    let check = |a: usize, b: usize, c: usize| {
        if t[t[a][b]][c] != t[a][t[b][c]] {
            Err(Error::GroupAxiom(format!("not associative at ({a}, {b}, {c})")))
        } else {
            Ok(())
        }
    };
    if n <= 200 {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    check(a, b, c)?;
                }
            }
        }
    } else {
        let mut r = sampling::rng(0);
        for _ in 0..1_000_000 {
            check(r.random_range(0..n), r.random_range(0..n), r.random_range(0..n))?;
        }
    }
    Ok(())
}

/// Positive weights `w` on `H/Q` summing to one: the measure `nu`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedQuotient {
    weights: Vec<Rational>,
}

impl WeightedQuotient {
    pub fn new(model: &FiniteGroupModel, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != model.index_hq() {
            return Err(Error::DimensionMismatch {
                expected: model.index_hq(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        if weights.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidInput("weights must sum to 1".into()));
        }
        Ok(Self { weights })
    }

    pub fn uniform(model: &FiniteGroupModel) -> Self {
        let m = model.index_hq() as i64;
        Self {
            weights: vec![rat(1, m); m as usize],
        }
    }

    /// `w_k` proportional to `k + 1`.
    pub fn ramp(model: &FiniteGroupModel) -> Self {
        let m = model.index_hq() as i64;
        let total = m * (m + 1) / 2;
        Self {
            weights: (1..=m).map(|k| rat(k, total)).collect(),
        }
    }

    /// Parses weights written as `"a/b"` or `"a"`.
    pub fn parse(model: &FiniteGroupModel, weights: &[String]) -> Result<Self> {
        let w = weights
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<Rational>()
                    .map_err(|e| Error::InvalidInput(format!("weight {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, w)
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// `lambda_y(x) = w(y x) / w(x)`.
    pub fn lambda(&self, model: &FiniteGroupModel, y: usize, x: usize) -> Rational {
        &self.weights[model.act_hq(y, x)] / &self.weights[x]
    }
}

/// The `n`-fold fibered product with its measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberedSpace {
    pub n: usize,
    /// `(H-coset, Q-cosets)`.
    pub tuples: Vec<(usize, Vec<usize>)>,
    /// Pushforward of `mu x nu^n` under `q_n`.
    pub measure: Vec<Rational>,
    index: HashMap<(usize, Vec<usize>), usize>,
    /// `q_n` on the flattened `G x (H/Q)^n`.
    q_map: Vec<usize>,
}

/// `m^n` tuples of `0..m`, most significant first.
fn digits(mut code: usize, m: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = code % m;
        code /= m;
    }
    out
}

fn encode(d: &[usize], m: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * m + x)
}

/// Enumerates `(G/Q)^n_f` as the image of `q_n`, with the pushforward of
/// counting-probability on `G` times `nu^n`.
pub fn fibered_product(model: &FiniteGroupModel, weights: &WeightedQuotient, n: usize) -> FiberedSpace {
    let m = model.index_hq();
    let width = m.pow(n as u32);
    let g_weight = rat(1, model.order() as i64);
    let mut tuples = Vec::new();
    let mut measure: Vec<Rational> = Vec::new();
    let mut index = HashMap::new();
    let mut q_map = Vec::with_capacity(model.order() * width);
    for g in 0..model.order() {
        for code in 0..width {
            let xs = digits(code, m, n);
            let key = (
                model.h_coset[g],
                xs.iter()
                    .map(|&x| model.q_coset[model.mul[g][model.hq_reps[x]]])
                    .collect::<Vec<_>>(),
            );
            let weight = xs.iter().fold(g_weight.clone(), |acc, &x| acc * &weights.weights[x]);
            let t = *index.entry(key.clone()).or_insert_with(|| {
                tuples.push(key);
                measure.push(Rational::zero());
                tuples.len() - 1
            });
            measure[t] += weight;
            q_map.push(t);
        }
    }
    FiberedSpace {
        n,
        tuples,
        measure,
        index,
        q_map,
    }
}

impl FiberedSpace {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn lookup(&self, base: usize, coords: &[usize]) -> Option<usize> {
        self.index.get(&(base, coords.to_vec())).copied()
    }

    /// `q_n(g, x_1..x_n)` with `x_i` indices in `H/Q`.
    pub fn q_n(&self, model: &FiniteGroupModel, g: usize, xs: &[usize]) -> usize {
        self.q_map[g * model.index_hq().pow(self.n as u32) + encode(xs, model.index_hq())]
    }

    /// Diagonal action of `g`.
    pub fn act(&self, model: &FiniteGroupModel, g: usize, t: usize) -> usize {
        let (base, coords) = &self.tuples[t];
        let b = model.h_coset[model.mul[g][model.h_reps[*base]]];
        let c: Vec<usize> = coords
            .iter()
            .map(|&x| model.q_coset[model.mul[g][model.q_reps[x]]])
            .collect();
        self.index[&(b, c)]
    }

    /// `p_{n,i}`: forget coordinate `i` (0-based).
    pub fn face(&self, lower: &FiberedSpace, t: usize, i: usize) -> usize {
        let (base, coords) = &self.tuples[t];
        let mut c = coords.clone();
        c.remove(i);
        lower.index[&(*base, c)]
    }

    /// `f o q_n`.
    pub fn lift(&self, f: &[Rational]) -> Result<QFunction> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(QFunction {
            n: self.n,
            values: self.q_map.iter().map(|&t| f[t].clone()).collect(),
        })
    }

    /// The function on tuples that `big` factors through, if it is
    /// `H`-invariant.
    pub fn descend(&self, big: &QFunction) -> Result<Vec<Rational>> {
        if big.n != self.n || big.values.len() != self.q_map.len() {
            return Err(Error::DimensionMismatch {
                expected: self.q_map.len(),
                got: big.values.len(),
            });
        }
        let mut out: Vec<Option<Rational>> = vec![None; self.len()];
        for (k, &t) in self.q_map.iter().enumerate() {
            match &out[t] {
                None => out[t] = Some(big.values[k].clone()),
                Some(v) if *v != big.values[k] => return Err(Error::NotInvariant),
                _ => {}
            }
        }
        Ok(out.into_iter().map(|v| v.expect("q_n is surjective")).collect())
    }
}

/// `d_n f = sum_i (-1)^(i-1) f o p_{n,i}`; for `n = 0`, `f o p`.
pub fn differential_d(source: &FiberedSpace, target: &FiberedSpace, f: &[Rational]) -> Result<Vec<Rational>> {
    if target.n != source.n + 1 {
        return Err(Error::DimensionMismatch {
            expected: source.n + 1,
            got: target.n,
        });
    }
    if f.len() != source.len() {
        return Err(Error::DimensionMismatch {
            expected: source.len(),
            got: f.len(),
        });
    }
    Ok((0..target.len())
        .map(|t| {
            let mut acc = Rational::zero();
            for i in 0..target.n {
                let v = &f[target.face(source, t, i)];
                if i % 2 == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
            acc
        })
        .collect())
}

/// A function on `G x (H/Q)^n`, flattened as `g * m^n + code(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QFunction {
    pub n: usize,
    pub values: Vec<Rational>,
}

impl QFunction {
    pub fn sup_norm(&self) -> Rational {
        self.values.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
    }
}

/// The differential in the `G x (H/Q)^n` picture.
pub fn differential_q(model: &FiniteGroupModel, f: &QFunction) -> QFunction {
    let m = model.index_hq();
    let n = f.n;
    let (w_in, w_out) = (m.pow(n as u32), m.pow(n as u32 + 1));
    let mut values = Vec::with_capacity(model.order() * w_out);
    for g in 0..model.order() {
        for code in 0..w_out {
            let xs = digits(code, m, n + 1);
            let mut acc = Rational::zero();
            for i in 0..=n {
                let mut y = xs.clone();
                y.remove(i);
                let v = &f.values[g * w_in + encode(&y, m)];
                if i % 2 == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
            values.push(acc);
        }
    }
    QFunction { n: n + 1, values }
}

/// A Bruhat function: `beta >= 0` with `sum_{h in H} beta(g h) = 1`.
///
/// The third property of the continuous setting (uniform continuity of
/// left translates) is vacuous for the discrete topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bruhat {
    values: Vec<Rational>,
}

impl Bruhat {
    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

/// `beta = 1/|H|`.
pub fn bruhat_beta(model: &FiniteGroupModel) -> Bruhat {
    Bruhat {
        values: vec![rat(1, model.h.len() as i64); model.order()],
    }
}

/// Validates a custom `beta`.
pub fn bruhat_custom(model: &FiniteGroupModel, values: Vec<Rational>) -> Result<Bruhat> {
    if values.len() != model.order() {
        return Err(Error::DimensionMismatch {
            expected: model.order(),
            got: values.len(),
        });
    }
    if values.iter().any(Signed::is_negative) {
        return Err(Error::InvalidInput("beta must be non-negative".into()));
    }
    for g in 0..model.order() {
        let s: Rational = model.h.iter().map(|&h| &values[model.mul[g][h]]).sum();
        if s != Rational::one() {
            return Err(Error::InvalidInput(format!(
                "beta normalization fails at g = {g}: sum {s}"
            )));
        }
    }
    Ok(Bruhat { values })
}

/// `psi(g, x) = sum_{h in H} beta(g h) lambda_{h^-1}(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Psi {
    /// `values[g][x]`.
    values: Vec<Vec<Rational>>,
}

impl Psi {
    pub fn get(&self, g: usize, x: usize) -> &Rational {
        &self.values[g][x]
    }
}

/// Builds `psi` and verifies, exactly and exhaustively:
/// (1) `psi(g h^-1, h x) lambda_h(x) = psi(g, x)`,
/// (2) `sum_x psi(g, x) w(x) = 1`,
/// (3) `psi > 0`.
pub fn psi_kernel(model: &FiniteGroupModel, beta: &Bruhat, weights: &WeightedQuotient) -> Result<Psi> {
    let m = model.index_hq();
    let values: Vec<Vec<Rational>> = (0..model.order())
        .map(|g| {
            (0..m)
                .map(|x| {
                    model
                        .h
                        .iter()
                        .map(|&h| &beta.values[model.mul[g][h]] * weights.lambda(model, model.inv[h], x))
                        .sum()
                })
                .collect()
        })
        .collect();
    let psi = Psi { values };
    for g in 0..model.order() {
        for &h in &model.h {
            let gh = model.mul[g][model.inv[h]];
            for x in 0..m {
                if psi.values[gh][model.act_hq(h, x)].clone() * weights.lambda(model, h, x) != psi.values[g][x] {
                    return Err(Error::KernelProperty { property: 1 });
                }
            }
        }
        let s: Rational = (0..m).map(|x| &psi.values[g][x] * &weights.weights[x]).sum();
        if s != Rational::one() {
            return Err(Error::KernelProperty { property: 2 });
        }
        if psi.values[g].iter().any(|v| !v.is_positive()) {
            return Err(Error::KernelProperty { property: 3 });
        }
    }
    Ok(psi)
}

/// `(h_n f)(g, x_1..x_n) = sum_x psi(g, x) f(g, x, x_1..x_n) w(x)` for `f`
/// on `G x (H/Q)^(n+1)`. The new variable is placed first, which makes
/// `h d + d h = Id`.
pub fn homotopy_h(model: &FiniteGroupModel, psi: &Psi, weights: &WeightedQuotient, f: &QFunction) -> Result<QFunction> {
    let m = model.index_hq();
    if f.n == 0 {
        return Err(Error::InvalidInput("homotopy needs at least one variable".into()));
    }
    let n = f.n - 1;
    let (w_in, w_out) = (m.pow(f.n as u32), m.pow(n as u32));
    if f.values.len() != model.order() * w_in {
        return Err(Error::DimensionMismatch {
            expected: model.order() * w_in,
            got: f.values.len(),
        });
    }
    let mut values = Vec::with_capacity(model.order() * w_out);
    for g in 0..model.order() {
        for code in 0..w_out {
            let v: Rational = (0..m)
                .map(|x| &psi.values[g][x] * &weights.weights[x] * &f.values[g * w_in + x * w_out + code])
                .sum();
            values.push(v);
        }
    }
    Ok(QFunction { n, values })
}

/// `(tau f)(t) = |L\G|^-1 sum_{L g} f(g t)` for an `L`-invariant `f`.
pub fn transfer_tau(
    model: &FiniteGroupModel,
    space: &FiberedSpace,
    l: &[usize],
    f: &[Rational],
) -> Result<Vec<Rational>> {
    if f.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: f.len(),
        });
    }
    let mut l = l.to_vec();
    l.sort_unstable();
    l.dedup();
    check_subgroup(&model.mul, model.identity, &l).map_err(Error::GroupAxiom)?;
    for &a in &l {
        for t in 0..space.len() {
            if f[space.act(model, a, t)] != f[t] {
                return Err(Error::NotInvariant);
            }
        }
    }
    // right cosets L g
    let mut seen = vec![false; model.order()];
    let mut reps = Vec::new();
    for g in 0..model.order() {
        if !seen[g] {
            reps.push(g);
            for &a in &l {
                seen[model.mul[a][g]] = true;
            }
        }
    }
    let k = rat(1, reps.len() as i64);
    Ok((0..space.len())
        .map(|t| reps.iter().map(|&g| &f[space.act(model, g, t)]).sum::<Rational>() * &k)
        .collect())
}

/// Random rational values `a/b` with `|a| <= 20`, `1 <= b <= 9`.
pub fn random_function(len: usize, seed: u64) -> Vec<Rational> {
    let mut r = sampling::rng(seed);
    (0..len)
        .map(|_| rat(r.random_range(-20..=20), r.random_range(1..=9)))
        .collect()
}

/// Averages a function over the action of a subgroup, making it invariant.
pub fn average_over(model: &FiniteGroupModel, space: &FiberedSpace, sub: &[usize], f: &[Rational]) -> Vec<Rational> {
    let k = rat(1, sub.len() as i64);
    (0..space.len())
        .map(|t| sub.iter().map(|&a| &f[space.act(model, a, t)]).sum::<Rational>() * &k)
        .collect()
}

/// One named check of the exact suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn verdict(name: &str, passed: bool, detail: String) -> Verdict {
    Verdict {
        name: name.into(),
        passed,
        detail,
    }
}

/// Runs every exact identity on `model` up to degree `n_max`, with
/// `functions` random rational functions per degree.
pub fn exact_suite(
    model: &FiniteGroupModel,
    weights: &WeightedQuotient,
    n_max: usize,
    functions: usize,
    seed: u64,
) -> Result<Vec<Verdict>> {
    let spaces: Vec<FiberedSpace> = (0..=n_max + 2).map(|n| fibered_product(model, weights, n)).collect();
    let mut out = Vec::new();

    for s in &spaces[..=n_max] {
        let want = model.index_gh() * model.index_hq().pow(s.n as u32);
        out.push(verdict(
            &format!("fibered_count_n{}", s.n),
            s.len() == want,
            format!("{} tuples, expected {want}", s.len()),
        ));
    }
    let mut marg_ok = true;
    for w in spaces[..=n_max + 1].windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        marg_ok &= hi.measure.iter().sum::<Rational>() == Rational::one();
        for i in 0..hi.n {
            let mut push = vec![Rational::zero(); lo.len()];
            for t in 0..hi.len() {
                push[hi.face(lo, t, i)] += &hi.measure[t];
            }
            marg_ok &= push == lo.measure;
        }
    }
    out.push(verdict("pushforward_marginals", marg_ok, format!("n <= {}", n_max + 1)));

    let beta = bruhat_beta(model);
    let psi = match psi_kernel(model, &beta, weights) {
        Ok(psi) => {
            out.push(verdict("psi_properties", true, "(1) (2) (3) exact".into()));
            psi
        }
        Err(e) => {
            out.push(verdict("psi_properties", false, e.to_string()));
            return Ok(out);
        }
    };

    for n in 1..=n_max {
        let (lo, mid, hi) = (&spaces[n - 1], &spaces[n], &spaces[n + 1]);
        let mut dd = true;
        let mut homotopy = true;
        let mut norm = true;
        let mut equivariant = true;
        let mut primitive = true;
        for k in 0..functions {
            let fseed = sampling::derive_seed(seed, (n * 1_000_000 + k) as u64);
            let f = random_function(mid.len(), fseed);
            let df = differential_d(mid, hi, &f)?;
            dd &= differential_d(hi, &spaces[n + 2], &df)?.iter().all(Zero::is_zero);
            let big = mid.lift(&f)?;
            let hdf = homotopy_h(model, &psi, weights, &hi.lift(&df)?)?;
            let hf = homotopy_h(model, &psi, weights, &big)?;
            let dhf = differential_q(model, &hf);
            let sum: Vec<Rational> = hdf.values.iter().zip(&dhf.values).map(|(a, b)| a + b).collect();
            homotopy &= sum == big.values;
            let hbig = homotopy_h(model, &psi, weights, &hi.lift(&random_function(hi.len(), fseed ^ 1))?)?;
            norm &= hf.sup_norm() <= big.sup_norm();
            equivariant &= lo.descend(&hf).is_ok() && mid.descend(&hbig).is_ok();
            // df is a cocycle; h gives a primitive
            let h_cocycle = homotopy_h(model, &psi, weights, &hi.lift(&df)?)?;
            primitive &= differential_q(model, &h_cocycle).values == hi.lift(&df)?.values;
        }
        out.push(verdict(
            &format!("d_squared_zero_n{n}"),
            dd,
            format!("{functions} functions"),
        ));
        out.push(verdict(
            &format!("homotopy_identity_n{n}"),
            homotopy,
            format!("{functions} functions"),
        ));
        out.push(verdict(
            &format!("homotopy_norm_n{n}"),
            norm,
            "sup norm non-increasing".into(),
        ));
        out.push(verdict(
            &format!("homotopy_equivariant_n{n}"),
            equivariant,
            "images descend".into(),
        ));
        out.push(verdict(
            &format!("cocycle_primitive_n{}", n + 1),
            primitive,
            "f = d h f".into(),
        ));
    }

    if let Some(l) = model.l() {
        let mut left_inverse = true;
        let mut commutes = true;
        let mut invariant = true;
        for n in 0..n_max {
            let (s, t) = (&spaces[n], &spaces[n + 1]);
            for k in 0..functions.min(20) {
                let raw = random_function(s.len(), sampling::derive_seed(seed ^ 0x7a, (n * 1000 + k) as u64));
                let f = average_over(model, s, l, &raw);
                let tf = transfer_tau(model, s, l, &f)?;
                let all: Vec<usize> = (0..model.order()).collect();
                invariant &= average_over(model, s, &all, &tf) == tf;
                left_inverse &= transfer_tau(model, s, l, &tf)? == tf;
                let lhs = transfer_tau(model, t, l, &differential_d(s, t, &f)?)?;
                commutes &= lhs == differential_d(s, t, &tf)?;
            }
        }
        out.push(verdict("transfer_invariant", invariant, "tau f is G-invariant".into()));
        out.push(verdict(
            "transfer_left_inverse",
            left_inverse,
            "tau tau f = tau f".into(),
        ));
        out.push(verdict("transfer_commutes_with_d", commutes, format!("n < {n_max}")));
    }
    Ok(out)
}
