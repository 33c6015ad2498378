//! The 18-vector Kochen-Specker set in dimension four and the (2,9,4) Bell
//! functional built from its orthogonality graph.
//!
//! A pair of outcomes `(x1, x2)` for settings `(u1, u2)` is *forbidden*
//! (belongs to `S_B`) when the vector Alice's outcome points to and the one
//! Bob's outcome points to are distinct and orthogonal. The alternative
//! reading, "distinct vectors sharing a printed basis", gives only 432
//! forbidden entries; orthogonality gives the 504 that the functional is
//! known to have (63 orthogonal pairs, counted in both orders, each vector
//! reachable from two bases on each side: 63 * 2 * 2 * 2 = 504).
//!
//! Settings are 1-indexed `1..=9` in basis order and outcomes `1..=4` in
//! slot order everywhere outside this crate's internals.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const NUM_SETTINGS: usize = 9;
pub const NUM_OUTCOMES: usize = 4;
pub const NUM_SETTING_PAIRS: usize = NUM_SETTINGS * NUM_SETTINGS;
pub const NUM_OUTCOME_PAIRS: usize = NUM_OUTCOMES * NUM_OUTCOMES;
/// Number of entries `P(x|u)` in a two-party behavior.
pub const NUM_ENTRIES: usize = NUM_SETTING_PAIRS * NUM_OUTCOME_PAIRS;

/// Settings `(u1, u2)`, each in `1..=9`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 2]", into = "[u8; 2]")]
pub struct SettingPair {
    pub alice: u8,
    pub bob: u8,
}

/// Outcomes `(x1, x2)`, each in `1..=4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 2]", into = "[u8; 2]")]
pub struct OutcomePair {
    pub alice: u8,
    pub bob: u8,
}

impl SettingPair {
    pub fn new(alice: u8, bob: u8) -> Self {
        assert!(
            (1..=NUM_SETTINGS as u8).contains(&alice) && (1..=NUM_SETTINGS as u8).contains(&bob),
            "setting pair ({alice},{bob}) out of range"
        );
        Self { alice, bob }
    }

    /// Flat index in `0..81`, Alice's setting outermost.
    pub fn index(self) -> usize {
        (self.alice as usize - 1) * NUM_SETTINGS + (self.bob as usize - 1)
    }

    pub fn from_index(i: usize) -> Self {
        Self::new((i / NUM_SETTINGS + 1) as u8, (i % NUM_SETTINGS + 1) as u8)
    }

    pub fn all() -> impl Iterator<Item = SettingPair> {
        (0..NUM_SETTING_PAIRS).map(Self::from_index)
    }
}

impl OutcomePair {
    pub fn new(alice: u8, bob: u8) -> Self {
        assert!(
            (1..=NUM_OUTCOMES as u8).contains(&alice) && (1..=NUM_OUTCOMES as u8).contains(&bob),
            "outcome pair ({alice},{bob}) out of range"
        );
        Self { alice, bob }
    }

    /// Flat index in `0..16`, row-major with Alice's outcome outermost.
    pub fn index(self) -> usize {
        (self.alice as usize - 1) * NUM_OUTCOMES + (self.bob as usize - 1)
    }

    pub fn from_index(i: usize) -> Self {
        Self::new((i / NUM_OUTCOMES + 1) as u8, (i % NUM_OUTCOMES + 1) as u8)
    }

    pub fn all() -> impl Iterator<Item = OutcomePair> {
        (0..NUM_OUTCOME_PAIRS).map(Self::from_index)
    }
}

macro_rules! pair_conversions {
    ($t:ty, $max:expr) => {
        impl TryFrom<[u8; 2]> for $t {
            type Error = String;
            fn try_from(v: [u8; 2]) -> Result<Self, String> {
                if (1..=$max as u8).contains(&v[0]) && (1..=$max as u8).contains(&v[1]) {
                    Ok(Self { alice: v[0], bob: v[1] })
                } else {
                    Err(format!("pair {:?} outside 1..={}", v, $max))
                }
            }
        }
        impl From<$t> for [u8; 2] {
            fn from(p: $t) -> [u8; 2] {
                [p.alice, p.bob]
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "({},{})", self.alice, self.bob)
            }
        }
    };
}
pair_conversions!(SettingPair, NUM_SETTINGS);
pair_conversions!(OutcomePair, NUM_OUTCOMES);

/// Flat variable index of `P(x|u)`: setting-major, then row-major outcomes.
pub fn entry_index(x: OutcomePair, u: SettingPair) -> usize {
    u.index() * NUM_OUTCOME_PAIRS + x.index()
}

pub fn entry_from_index(i: usize) -> (OutcomePair, SettingPair) {
    (
        OutcomePair::from_index(i % NUM_OUTCOME_PAIRS),
        SettingPair::from_index(i / NUM_OUTCOME_PAIRS),
    )
}

/// The distinguished setting `u* = (1, 2)`.
pub const TARGET_SETTING: SettingPair = SettingPair { alice: 1, bob: 2 };
/// The distinguished outcome `x* = (1, 3)`.
pub const TARGET_OUTCOME: OutcomePair = OutcomePair { alice: 1, bob: 3 };

const KS_VECTORS: [[i64; 4]; 18] = [
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 1],
    [0, 0, 1, -1],
    [1, -1, 0, 0],
    [1, 1, -1, -1],
    [1, 1, 1, 1],
    [1, -1, 1, -1],
    [1, 0, -1, 0],
    [0, 1, 0, -1],
    [1, 0, 1, 0],
    [1, 1, -1, 1],
    [-1, 1, 1, 1],
    [1, 1, 1, -1],
    [1, 0, 0, 1],
    [0, 1, -1, 0],
    [0, 1, 1, 0],
    [0, 0, 0, 1],
];

// 1-based vector labels, as printed.
const KS_BASES: [[usize; 4]; 9] = [
    [1, 2, 3, 4],
    [4, 5, 6, 7],
    [7, 8, 9, 10],
    [10, 11, 12, 13],
    [13, 14, 15, 16],
    [16, 17, 18, 1],
    [2, 9, 11, 18],
    [3, 5, 12, 14],
    [6, 8, 15, 17],
];

/// A finite set of integer vectors in dimension four grouped into
/// orthonormal-up-to-scale bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KsModel {
    vectors: Vec<[i64; 4]>,
    /// 0-based vector indices per basis, in slot order.
    bases: Vec<[usize; 4]>,
    /// For each vector, its `(basis, slot)` memberships (0-based).
    incidence: Vec<Vec<(usize, usize)>>,
    orthogonal: Vec<Vec<bool>>,
}

pub fn inner(a: &[i64; 4], b: &[i64; 4]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[i64; 4]) -> i64 {
    inner(a, a)
}

impl KsModel {
    /// Builds a model from vectors and 0-based bases, checking that every
    /// basis consists of four distinct mutually orthogonal vectors.
    pub fn from_parts(vectors: Vec<[i64; 4]>, bases: Vec<[usize; 4]>) -> crate::Result<Self> {
        let n = vectors.len();
        if let Some(v) = vectors.iter().position(|v| norm_sq(v) == 0) {
            return Err(crate::error::invalid(format!("vector {} is zero", v + 1)));
        }
        let mut incidence = vec![Vec::new(); n];
        for (b, basis) in bases.iter().enumerate() {
            for (slot, &v) in basis.iter().enumerate() {
                if v >= n {
                    return Err(crate::error::invalid(format!(
                        "basis {} references vector {} of {n}",
                        b + 1,
                        v + 1
                    )));
                }
                incidence[v].push((b, slot));
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    if basis[i] == basis[j] || inner(&vectors[basis[i]], &vectors[basis[j]]) != 0 {
                        return Err(crate::error::invalid(format!(
                            "basis {} slots {} and {} are not distinct orthogonal vectors",
                            b + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        let orthogonal = (0..n)
            .map(|i| (0..n).map(|j| inner(&vectors[i], &vectors[j]) == 0).collect())
            .collect();
        Ok(Self {
            vectors,
            bases,
            incidence,
            orthogonal,
        })
    }

    pub fn vectors(&self) -> &[[i64; 4]] {
        &self.vectors
    }

    /// Bases as 0-based vector indices.
    pub fn bases(&self) -> &[[usize; 4]] {
        &self.bases
    }

    pub fn incidence(&self) -> &[Vec<(usize, usize)>] {
        &self.incidence
    }

    pub fn is_orthogonal(&self, a: usize, b: usize) -> bool {
        self.orthogonal[a][b]
    }

    /// Index of the vector measured by `setting` (1-based) yielding `outcome` (1-based).
    pub fn vector_at(&self, setting: u8, outcome: u8) -> usize {
        self.bases[setting as usize - 1][outcome as usize - 1]
    }

    /// Unordered orthogonal pairs of distinct vectors.
    pub fn orthogonal_edges(&self) -> Vec<(usize, usize)> {
        let n = self.vectors.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.orthogonal[i][j])
            .collect()
    }

    /// Checks the structural facts the 18-vector set must satisfy.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.vectors.len() != 18 {
            return Err(format!("expected 18 vectors, found {}", self.vectors.len()));
        }
        if self.bases.len() != NUM_SETTINGS {
            return Err(format!("expected 9 bases, found {}", self.bases.len()));
        }
        if let Some((v, inc)) = self.incidence.iter().enumerate().find(|(_, inc)| inc.len() != 2) {
            return Err(format!("vector {} lies in {} bases", v + 1, inc.len()));
        }
        let edges = self.orthogonal_edges().len();
        if edges != 63 {
            return Err(format!("orthogonality graph has {edges} edges, expected 63"));
        }
        for v in 0..18 {
            let degree = (0..18).filter(|&w| w != v && self.orthogonal[v][w]).count();
            if degree != 7 {
                return Err(format!("vector {} has {degree} orthogonal partners", v + 1));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> KsModelJson {
        KsModelJson {
            vectors: self.vectors.clone(),
            bases: self
                .bases
                .iter()
                .map(|b| b.map(|v| v + 1))
                .collect(),
        }
    }
}

/// Canonical serialized form of a [`KsModel`] (bases 1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsModelJson {
    pub vectors: Vec<[i64; 4]>,
    pub bases: Vec<[usize; 4]>,
}

impl TryFrom<KsModelJson> for KsModel {
    type Error = crate::Error;
    fn try_from(j: KsModelJson) -> crate::Result<Self> {
        let bases = j
            .bases
            .iter()
            .map(|b| {
                if b.iter().any(|&v| v == 0) {
                    Err(crate::error::invalid("basis labels are 1-based"))
                } else {
                    Ok(b.map(|v| v - 1))
                }
            })
            .collect::<crate::Result<Vec<_>>>()?;
        KsModel::from_parts(j.vectors, bases)
    }
}

/// The 18-vector, 9-basis Kochen-Specker set.
pub fn build_ks_model() -> KsModel {
    let bases = KS_BASES.iter().map(|b| b.map(|v| v - 1)).collect();
    let model = KsModel::from_parts(KS_VECTORS.to_vec(), bases)
        .expect("built-in Kochen-Specker constants are corrupted");
    if let Err(e) = model.check_invariants() {
        panic!("built-in Kochen-Specker constants are corrupted: {e}");
    }
    model
}

/// Indicator functional over the 1296 entries of a two-party behavior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellFunctional {
    sb: BTreeSet<(OutcomePair, SettingPair)>,
    mask: Vec<bool>,
    d_target: (OutcomePair, SettingPair),
}

impl BellFunctional {
    pub fn from_entries(
        entries: impl IntoIterator<Item = (OutcomePair, SettingPair)>,
        d_target: (OutcomePair, SettingPair),
    ) -> Self {
        let sb: BTreeSet<_> = entries.into_iter().collect();
        let mut mask = vec![false; NUM_ENTRIES];
        for &(x, u) in &sb {
            mask[entry_index(x, u)] = true;
        }
        Self { sb, mask, d_target }
    }

    pub fn empty() -> Self {
        Self::from_entries([], (TARGET_OUTCOME, TARGET_SETTING))
    }

    /// The functional with every entry forbidden.
    pub fn full() -> Self {
        Self::from_entries(
            (0..NUM_ENTRIES).map(entry_from_index),
            (TARGET_OUTCOME, TARGET_SETTING),
        )
    }

    pub fn sb(&self) -> &BTreeSet<(OutcomePair, SettingPair)> {
        &self.sb
    }

    pub fn len(&self) -> usize {
        self.sb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sb.is_empty()
    }

    pub fn contains(&self, x: OutcomePair, u: SettingPair) -> bool {
        self.mask[entry_index(x, u)]
    }

    /// Dense 0/1 mask indexed by [`entry_index`].
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn d_target(&self) -> (OutcomePair, SettingPair) {
        self.d_target
    }

    /// Forbidden entries for one setting pair.
    pub fn forbidden_at(&self, u: SettingPair) -> impl Iterator<Item = OutcomePair> + '_ {
        OutcomePair::all().filter(move |&x| self.contains(x, u))
    }

    pub fn to_json(&self) -> BellFunctionalJson {
        BellFunctionalJson {
            num_settings: NUM_SETTING_PAIRS,
            num_outcomes_per_setting: NUM_OUTCOME_PAIRS,
            d_target: self.d_target,
            sb: self.sb.iter().copied().collect(),
        }
    }
}

/// Canonical serialized form of a [`BellFunctional`]: sorted `[[x1,x2],[u1,u2]]` tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellFunctionalJson {
    pub num_settings: usize,
    pub num_outcomes_per_setting: usize,
    pub d_target: (OutcomePair, SettingPair),
    pub sb: Vec<(OutcomePair, SettingPair)>,
}

impl From<BellFunctionalJson> for BellFunctional {
    fn from(j: BellFunctionalJson) -> Self {
        BellFunctional::from_entries(j.sb, j.d_target)
    }
}

/// Forbidden set: outcome vectors distinct and orthogonal.
pub fn build_bell_functional(model: &KsModel) -> BellFunctional {
    assert_eq!(
        model.bases().len(),
        NUM_SETTINGS,
        "Bell functional needs a nine-basis model"
    );
    let entries = SettingPair::all().flat_map(|u| {
        OutcomePair::all().filter_map(move |x| {
            let a = model.vector_at(u.alice, x.alice);
            let b = model.vector_at(u.bob, x.bob);
            (a != b && model.is_orthogonal(a, b)).then_some((x, u))
        })
    });
    BellFunctional::from_entries(entries, (TARGET_OUTCOME, TARGET_SETTING))
}

/// Local deterministic strategy: one outcome per setting for each party.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub alice: [u8; NUM_SETTINGS],
    pub bob: [u8; NUM_SETTINGS],
}

impl DeterministicStrategy {
    pub fn outcome(&self, u: SettingPair) -> OutcomePair {
        OutcomePair::new(self.alice[u.alice as usize - 1], self.bob[u.bob as usize - 1])
    }

    /// Number of forbidden events the strategy produces over all 81 settings.
    pub fn evaluate(&self, f: &BellFunctional) -> u32 {
        SettingPair::all()
            .filter(|&u| f.contains(self.outcome(u), u))
            .count() as u32
    }
}

/// Exact minimum of the functional over local deterministic strategies.
///
/// Every Alice assignment (4^9 of them) is paired with Bob's best response,
/// chosen setting by setting. Ties resolve to the lexicographically smallest
/// `(alice, bob)` witness regardless of how the work is split across threads.
pub fn classical_minimum(f: &BellFunctional) -> (u32, DeterministicStrategy) {
    // cost[u2][x2][u1][x1]
    let mut cost = [[[[0u8; NUM_OUTCOMES]; NUM_SETTINGS]; NUM_OUTCOMES]; NUM_SETTINGS];
    for &(x, u) in f.sb() {
        cost[u.bob as usize - 1][x.bob as usize - 1][u.alice as usize - 1][x.alice as usize - 1] = 1;
    }
    let total = NUM_OUTCOMES.pow(NUM_SETTINGS as u32);
    let decode = |code: usize| {
        let mut a = [0usize; NUM_SETTINGS];
        let mut c = code;
        for slot in a.iter_mut().rev() {
            *slot = c % NUM_OUTCOMES;
            c /= NUM_OUTCOMES;
        }
        a
    };
    let best_response = |a: &[usize; NUM_SETTINGS]| {
        let mut value = 0u32;
        let mut bob = [0u8; NUM_SETTINGS];
        for u2 in 0..NUM_SETTINGS {
            let mut best = (u32::MAX, 0usize);
            for x2 in 0..NUM_OUTCOMES {
                let row = &cost[u2][x2];
                let c: u32 = (0..NUM_SETTINGS).map(|u1| row[u1][a[u1]] as u32).sum();
                if c < best.0 {
                    best = (c, x2);
                }
            }
            value += best.0;
            bob[u2] = best.1 as u8 + 1;
        }
        (value, bob)
    };
    let (value, code) = (0..total)
        .into_par_iter()
        .map(|code| (best_response(&decode(code)).0, code))
        .min()
        .expect("non-empty strategy space");
    let alice_idx = decode(code);
    let (_, bob) = best_response(&alice_idx);
    let alice = alice_idx.map(|x| x as u8 + 1);
    (value, DeterministicStrategy { alice, bob })
}

/// Number of noncontextual {0,1} colorings: exactly one 1 per basis and no
/// two orthogonal vectors both colored 1.
pub fn ks_coloring_count(model: &KsModel) -> u64 {
    let n = model.vectors().len();
    assert!(n <= 30, "coloring enumeration limited to 30 vectors");
    let basis_masks: Vec<u32> = model
        .bases()
        .iter()
        .map(|b| b.iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    let ortho_masks: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && model.is_orthogonal(i, j))
                .fold(0u32, |m, j| m | (1 << j))
        })
        .collect();
    (0u32..(1u32 << n))
        .into_par_iter()
        .filter(|&c| {
            basis_masks.iter().all(|&m| (c & m).count_ones() == 1)
                && (0..n).all(|i| c & (1 << i) == 0 || c & ortho_masks[i] == 0)
        })
        .count() as u64
}

/// A single basis of four mutually orthogonal vectors.
pub fn toy_single_basis() -> KsModel {
    KsModel::from_parts(
        vec![[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
        vec![[0, 1, 2, 3]],
    )
    .expect("valid toy model")
}

/// Two bases with no orthogonality between them (standard and Hadamard).
pub fn toy_two_disjoint_bases() -> KsModel {
    KsModel::from_parts(
        vec![
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [1, 1, 1, 1],
            [1, -1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, 1],
        ],
        vec![[0, 1, 2, 3], [4, 5, 6, 7]],
    )
    .expect("valid toy model")
}
