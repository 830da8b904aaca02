//! Problem semantics: instances, coins, candidates, weighings and outcomes.
//!
//! An instance is a list of coin sets `S_1, ..., S_m`, each holding exactly
//! one counterfeit. Counterfeits are lighter than genuine coins and all
//! counterfeits weigh the same, so a weighing with equal pans is decided by
//! how many counterfeits sit on each pan.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

/// Default cap on the number of candidates an explicit [`CandidateSet`] may hold.
pub const DEFAULT_SPACE_CAP: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance must have at least one set")]
    EmptyInstance,
    #[error("set {0} has size zero")]
    ZeroSizedSet(usize),
    #[error("instance too large for explicit model: {size} candidates exceeds cap {cap}")]
    TooLarge { size: BigUint, cap: u64 },
    #[error("coin {0} is not part of the instance")]
    CoinOutOfRange(CoinId),
    #[error("candidate {0} does not fit the instance")]
    BadCandidate(Candidate),
    #[error("invalid weighing: {0}")]
    InvalidWeighing(String),
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

/// The multiset of set sizes `(n_1, ..., n_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    sizes: Vec<u32>,
    offsets: Vec<u32>,
}

impl Instance {
    pub fn new(sizes: Vec<u32>) -> Result<Self, ModelError> {
        if sizes.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        if let Some(i) = sizes.iter().position(|&n| n == 0) {
            return Err(ModelError::ZeroSizedSet(i + 1));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0u32;
        for &n in &sizes {
            offsets.push(acc);
            acc += n;
        }
        Ok(Instance { sizes, offsets })
    }

    /// `k` sets of `n` coins each, written `n|k` in the literature.
    pub fn uniform(n: u32, k: usize) -> Result<Self, ModelError> {
        Instance::new(vec![n; k])
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn num_sets(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_coins(&self) -> u32 {
        self.sizes.iter().sum()
    }

    /// `|S| = prod n_i`, exact.
    pub fn space_size(&self) -> BigUint {
        self.sizes.iter().map(|&n| BigUint::from(n)).product()
    }

    /// Position of a coin in the flat order `s1.1, s1.2, ..., s2.1, ...` (0-based).
    pub fn global_index(&self, coin: CoinId) -> Result<u32, ModelError> {
        self.check_coin(coin)?;
        Ok(self.offsets[coin.set as usize - 1] + coin.index - 1)
    }

    pub fn coin_at(&self, global: u32) -> CoinId {
        let set = match self.offsets.binary_search(&global) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        CoinId {
            set: set as u32 + 1,
            index: global - self.offsets[set] + 1,
        }
    }

    pub fn coins(&self) -> impl Iterator<Item = CoinId> + '_ {
        self.sizes.iter().enumerate().flat_map(|(s, &n)| {
            (1..=n).map(move |index| CoinId {
                set: s as u32 + 1,
                index,
            })
        })
    }

    pub fn check_coin(&self, coin: CoinId) -> Result<(), ModelError> {
        let ok = coin.set >= 1
            && (coin.set as usize) <= self.sizes.len()
            && coin.index >= 1
            && coin.index <= self.sizes[coin.set as usize - 1];
        if ok {
            Ok(())
        } else {
            Err(ModelError::CoinOutOfRange(coin))
        }
    }

    pub fn check_candidate(&self, x: &Candidate) -> Result<(), ModelError> {
        let ok = x.0.len() == self.sizes.len()
            && x.0.iter().zip(&self.sizes).all(|(&v, &n)| v >= 1 && v <= n);
        if ok {
            Ok(())
        } else {
            Err(ModelError::BadCandidate(x.clone()))
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Parses `n1,n2,...` or `n^k`; surrounding parentheses are tolerated.
impl FromStr for Instance {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ModelError::Parse {
            what: "instance",
            input: s.to_string(),
        };
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        if let Some((n, k)) = t.split_once('^') {
            let n: u32 = n.trim().parse().map_err(|_| err())?;
            let k: usize = k.trim().parse().map_err(|_| err())?;
            return Instance::uniform(n, k);
        }
        let sizes = t
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| err()))
            .collect::<Result<Vec<_>, _>>()?;
        Instance::new(sizes)
    }
}

/// A single coin, `s<set>.<index>`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoinId {
    pub set: u32,
    pub index: u32,
}

impl CoinId {
    pub fn new(set: u32, index: u32) -> Self {
        CoinId { set, index }
    }
}

impl fmt::Display for CoinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}.{}", self.set, self.index)
    }
}

impl FromStr for CoinId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ModelError::Parse {
            what: "coin",
            input: s.to_string(),
        };
        let rest = s.strip_prefix('s').ok_or_else(err)?;
        let (set, index) = rest.split_once('.').ok_or_else(err)?;
        Ok(CoinId {
            set: set.parse().map_err(|_| err())?,
            index: index.parse().map_err(|_| err())?,
        })
    }
}

/// One counterfeit per set: entry `i` is the 1-based index of the light coin in set `i+1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate(pub Vec<u32>);

impl Candidate {
    pub fn contains(&self, coin: CoinId) -> bool {
        self.0.get(coin.set as usize - 1) == Some(&coin.index)
    }

    /// The coin set `X~ = {x_1, ..., x_m}`.
    pub fn coins(&self) -> impl Iterator<Item = CoinId> + '_ {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &index)| CoinId::new(i as u32 + 1, index))
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    LeftHeavy,
    Balanced,
    RightHeavy,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::LeftHeavy, Outcome::Balanced, Outcome::RightHeavy];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn mirror(self) -> Outcome {
        match self {
            Outcome::LeftHeavy => Outcome::RightHeavy,
            Outcome::Balanced => Outcome::Balanced,
            Outcome::RightHeavy => Outcome::LeftHeavy,
        }
    }

    /// Outcome from the counterfeit counts on each pan; the pan with fewer
    /// light coins goes down.
    pub fn from_counts(left: usize, right: usize) -> Outcome {
        match left.cmp(&right) {
            std::cmp::Ordering::Less => Outcome::LeftHeavy,
            std::cmp::Ordering::Equal => Outcome::Balanced,
            std::cmp::Ordering::Greater => Outcome::RightHeavy,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Outcome::LeftHeavy => "left_heavy",
            Outcome::Balanced => "balanced",
            Outcome::RightHeavy => "right_heavy",
        }
    }
}

/// Two disjoint pans of equal size. Pans are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Weighing {
    left: Vec<CoinId>,
    right: Vec<CoinId>,
}

impl Weighing {
    pub fn new(
        inst: &Instance,
        mut left: Vec<CoinId>,
        mut right: Vec<CoinId>,
    ) -> Result<Self, ModelError> {
        for &c in left.iter().chain(&right) {
            inst.check_coin(c)?;
        }
        Weighing::unchecked(&mut left, &mut right)?;
        Ok(Weighing { left, right })
    }

    fn unchecked(left: &mut [CoinId], right: &mut [CoinId]) -> Result<(), ModelError> {
        left.sort();
        right.sort();
        if left.is_empty() || left.len() != right.len() {
            return Err(ModelError::InvalidWeighing(format!(
                "pans must be nonempty and equal, got {} v {}",
                left.len(),
                right.len()
            )));
        }
        if left.windows(2).any(|w| w[0] == w[1]) || right.windows(2).any(|w| w[0] == w[1]) {
            return Err(ModelError::InvalidWeighing("coin repeated on a pan".into()));
        }
        if let Some(c) = left.iter().find(|c| right.binary_search(c).is_ok()) {
            return Err(ModelError::InvalidWeighing(format!(
                "coin {c} on both pans"
            )));
        }
        Ok(())
    }

    pub fn left(&self) -> &[CoinId] {
        &self.left
    }

    pub fn right(&self) -> &[CoinId] {
        &self.right
    }

    pub fn swap(&self) -> Weighing {
        Weighing {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

impl fmt::Display for Weighing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |v: &[CoinId]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "{{{}}} v {{{}}}", side(&self.left), side(&self.right))
    }
}

/// Balance result for candidate `x` under weighing `w`.
pub fn outcome(inst: &Instance, w: &Weighing, x: &Candidate) -> Result<Outcome, ModelError> {
    inst.check_candidate(x)?;
    for &c in w.left.iter().chain(&w.right) {
        inst.check_coin(c)?;
    }
    let cl = w.left.iter().filter(|&&c| x.contains(c)).count();
    let cr = w.right.iter().filter(|&&c| x.contains(c)).count();
    Ok(Outcome::from_counts(cl, cr))
}

/// A subset of the candidate space, stored as a membership mask over the
/// row-major enumeration of `prod S_i` (last set varies fastest).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateSet {
    instance: Instance,
    words: Vec<u64>,
    space: usize,
}

impl CandidateSet {
    pub fn empty(inst: &Instance) -> Result<Self, ModelError> {
        Self::empty_with_cap(inst, DEFAULT_SPACE_CAP)
    }

    pub fn empty_with_cap(inst: &Instance, cap: u64) -> Result<Self, ModelError> {
        let size = inst.space_size();
        if size > BigUint::from(cap) {
            return Err(ModelError::TooLarge { size, cap });
        }
        let space = size.to_u64_digits().first().copied().unwrap_or(0) as usize;
        Ok(CandidateSet {
            instance: inst.clone(),
            words: vec![0; space.div_ceil(64)],
            space,
        })
    }

    pub fn full_space(inst: &Instance) -> Result<Self, ModelError> {
        Self::full_space_with_cap(inst, DEFAULT_SPACE_CAP)
    }

    pub fn full_space_with_cap(inst: &Instance, cap: u64) -> Result<Self, ModelError> {
        let mut d = Self::empty_with_cap(inst, cap)?;
        for (i, w) in d.words.iter_mut().enumerate() {
            let lo = i * 64;
            let n = (d.space - lo).min(64);
            *w = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        }
        Ok(d)
    }

    pub fn from_candidates<I>(inst: &Instance, members: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = Candidate>,
    {
        let mut d = Self::empty(inst)?;
        for x in members {
            d.insert(&x)?;
        }
        Ok(d)
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn space_len(&self) -> usize {
        self.space
    }

    pub fn rank(&self, x: &Candidate) -> Result<usize, ModelError> {
        self.instance.check_candidate(x)?;
        let mut r = 0usize;
        for (&v, &n) in x.0.iter().zip(self.instance.sizes()) {
            r = r * n as usize + (v as usize - 1);
        }
        Ok(r)
    }

    pub fn unrank(&self, mut r: usize) -> Candidate {
        let sizes = self.instance.sizes();
        let mut v = vec![0u32; sizes.len()];
        for i in (0..sizes.len()).rev() {
            let n = sizes[i] as usize;
            v[i] = (r % n) as u32 + 1;
            r /= n;
        }
        Candidate(v)
    }

    pub fn insert(&mut self, x: &Candidate) -> Result<bool, ModelError> {
        let r = self.rank(x)?;
        let (w, b) = (r / 64, r % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        Ok(fresh)
    }

    pub fn insert_rank(&mut self, r: usize) {
        self.words[r / 64] |= 1 << (r % 64);
    }

    pub fn contains(&self, x: &Candidate) -> bool {
        match self.rank(x) {
            Ok(r) => self.contains_rank(r),
            Err(_) => false,
        }
    }

    pub fn contains_rank(&self, r: usize) -> bool {
        r < self.space && self.words[r / 64] & (1 << (r % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i * 64 + b)
            })
        })
    }

    /// Members in enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = Candidate> + '_ {
        self.ranks().map(|r| self.unrank(r))
    }

    pub fn is_subset(&self, other: &CandidateSet) -> bool {
        self.instance == other.instance
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// Splits the set by outcome, indexed by [`Outcome::index`].
    pub fn partition(&self, w: &Weighing) -> Result<[CandidateSet; 3], ModelError> {
        let mut parts = [
            Self::empty_like(self),
            Self::empty_like(self),
            Self::empty_like(self),
        ];
        for r in self.ranks() {
            let x = self.unrank(r);
            let o = outcome(&self.instance, w, &x)?;
            parts[o.index()].insert_rank(r);
        }
        Ok(parts)
    }

    fn empty_like(other: &CandidateSet) -> CandidateSet {
        CandidateSet {
            instance: other.instance.clone(),
            words: vec![0; other.words.len()],
            space: other.space,
        }
    }

    /// Coins grouped by interchangeability over this set.
    ///
    /// Two coins are equivalent when exchanging them maps the family of coin
    /// sets `{X~ : X in D}` onto itself. For coins of different sets this
    /// means identical incidence; for coins of one set it means their
    /// residual candidates (the other coordinates) coincide. Coins appearing
    /// in no candidate form a single known-genuine class. Classes are ordered
    /// by size, then by incidence signature.
    pub fn coin_classes(&self) -> Vec<Vec<CoinId>> {
        let members: Vec<Candidate> = self.iter().collect();
        let coins: Vec<CoinId> = self.instance.coins().collect();
        let incidence: Vec<Vec<bool>> = coins
            .iter()
            .map(|&c| members.iter().map(|x| x.contains(c)).collect())
            .collect();

        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (ci, &c) in coins.iter().enumerate() {
            let home = classes.iter_mut().find(|class| {
                let ri = class[0];
                self.interchangeable(&members, &incidence, coins[ri], ri, c, ci)
            });
            match home {
                Some(class) => class.push(ci),
                None => classes.push(vec![ci]),
            }
        }
        classes.sort_by(|a, b| {
            a.len()
                .cmp(&b.len())
                .then_with(|| incidence[a[0]].cmp(&incidence[b[0]]))
                .then_with(|| a.cmp(b))
        });
        classes
            .into_iter()
            .map(|class| class.into_iter().map(|i| coins[i]).collect())
            .collect()
    }

    fn interchangeable(
        &self,
        members: &[Candidate],
        incidence: &[Vec<bool>],
        a: CoinId,
        ai: usize,
        b: CoinId,
        bi: usize,
    ) -> bool {
        if incidence[ai] == incidence[bi] {
            return true;
        }
        if a.set != b.set {
            return false;
        }
        let deg = |i: usize| incidence[i].iter().filter(|&&v| v).count();
        if deg(ai) != deg(bi) {
            return false;
        }
        let slot = a.set as usize - 1;
        members.iter().filter(|x| x.0[slot] == a.index).all(|x| {
            let mut y = x.clone();
            y.0[slot] = b.index;
            self.contains(&y)
        })
    }
}
