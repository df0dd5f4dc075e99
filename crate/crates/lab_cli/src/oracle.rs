//! Independent brute-force computations used to stamp reference values.
//!
//! Each oracle avoids the library routine it checks: digit expansions use plain
//! division, diameters a fresh BFS over the Cayley table, set sizes a
//! membership scan of a window, word lengths a window BFS.

use std::collections::VecDeque;

use delta_core::WindowSpace;
use folner_atlas::{FolnerAtlas, FolnerIndex};
use group_kernel::{Elem, FiniteGroup, MarkedGamma};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{GroupSpec, LabConfig};
use crate::output::OutDir;
use crate::{LabError, Result};

pub const PROVENANCE_FILE: &str = "provenance.json";

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum OracleRequest {
    /// Digits of `x` by iterated Euclidean division.
    VarbaseDecompose {
        x: String,
        base: Vec<u64>,
        #[serde(default)]
        unbounded: bool,
    },
    /// Digit-scan count of `x < ∏ b` whose first non-maximal digit above `k` is at `m`.
    CarryCount { base: Vec<u64>, k: usize, m: usize },
    /// Largest BFS distance in the Cayley graph of `A ∪ B` and inverses.
    /// `group` is `z2xz3`, `s3`, `a5` or a table path.
    Diameter { group: String },
    /// Elements of the window `[0, n - 1]` passing the membership test of `F_{n,i,j}`
    /// for the configured source group.
    FolnerCount {
        n: u64,
        #[serde(default)]
        i: usize,
        #[serde(default = "one")]
        j: usize,
    },
    /// Exact word length of an element (text form) in the configured source group,
    /// by BFS over its range padded by `margin`.
    WordLength {
        element: String,
        #[serde(default = "one_i64")]
        margin: i64,
    },
}

fn one() -> usize {
    1
}

fn one_i64() -> i64 {
    1
}

impl OracleRequest {
    pub fn name(&self) -> &'static str {
        match self {
            OracleRequest::VarbaseDecompose { .. } => "varbase-decompose",
            OracleRequest::CarryCount { .. } => "carry-count",
            OracleRequest::Diameter { .. } => "diameter",
            OracleRequest::FolnerCount { .. } => "folner-count",
            OracleRequest::WordLength { .. } => "word-length",
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OracleRecord {
    pub name: String,
    pub inputs: Value,
    pub value: Value,
    pub method: String,
}

pub fn run_oracle(req: &OracleRequest, cfg: &LabConfig) -> Result<OracleRecord> {
    let inputs = serde_json::to_value(req).expect("request serializes");
    let (value, method) = match req {
        OracleRequest::VarbaseDecompose { x, base, unbounded } => {
            let x: BigUint = x
                .parse()
                .map_err(|_| LabError::Config(format!("x = {x:?} is not a nonnegative integer")))?;
            let digits = euclid_digits(&x, base, *unbounded)?;
            (
                json!(digits.iter().map(|d| d.to_string()).collect::<Vec<_>>()),
                "iterated Euclidean division",
            )
        }
        OracleRequest::CarryCount { base, k, m } => {
            check_base(base)?;
            (
                json!(scan_carry_count(base, *k, *m)),
                "digit scan over the full range",
            )
        }
        OracleRequest::Diameter { group } => {
            let g = named_group(group, cfg)?;
            let mut gens = g.a_images().to_vec();
            gens.extend_from_slice(g.b_images());
            (
                json!(bfs_diameter(g.gamma(), &gens)),
                "BFS over the Cayley table",
            )
        }
        OracleRequest::FolnerCount { n, i, j } => {
            let atlas = FolnerAtlas::new(cfg.source_params()?)?;
            atlas.validate(FolnerIndex::new(*n, *i, *j))?;
            (
                json!(window_count(&atlas, FolnerIndex::new(*n, *i, *j))?),
                "membership scan over the window [0, n - 1]",
            )
        }
        OracleRequest::WordLength { element, margin } => {
            let p = cfg.source_params()?;
            let x = delta_core::from_text(element).map_err(|e| LabError::Config(e.to_string()))?;
            let (lo, hi) = delta_core::range_interval(&p, &x);
            let space = WindowSpace::new(&p, lo - margin, hi + margin)?;
            let d = space.word_length(&x)?;
            (json!(d), "BFS over the padded range window")
        }
    };
    Ok(OracleRecord {
        name: req.name().into(),
        inputs,
        value,
        method: method.into(),
    })
}

/// Appends `rec` to the provenance file, rewriting it atomically.
pub fn record_provenance(out: &mut OutDir, rec: &OracleRecord) -> Result<()> {
    let path = out.root().join(PROVENANCE_FILE);
    let mut all: Vec<Value> = match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text).map_err(|e| {
            LabError::invariant("oracle", "provenance", format!("{}: {e}", path.display()))
        })?,
        Err(_) => Vec::new(),
    };
    all.push(serde_json::to_value(rec).expect("record serializes"));
    out.write_json(PROVENANCE_FILE, &all)?;
    Ok(())
}

fn check_base(base: &[u64]) -> Result<()> {
    if base.is_empty() || base.iter().any(|&b| b < 2) {
        return Err(LabError::Config(format!(
            "base {base:?} needs radices >= 2"
        )));
    }
    Ok(())
}

pub fn euclid_digits(x: &BigUint, base: &[u64], unbounded: bool) -> Result<Vec<BigUint>> {
    check_base(base)?;
    let mut rest = x.clone();
    let mut out = Vec::with_capacity(base.len());
    for (i, &b) in base.iter().enumerate() {
        if i + 1 == base.len() && unbounded {
            out.push(std::mem::take(&mut rest));
        } else {
            let (q, r) = rest.div_rem(&BigUint::from(b));
            out.push(r);
            rest = q;
        }
    }
    if !rest.is_zero() {
        return Err(LabError::Config(format!(
            "{x} does not fit the bounded base {base:?}"
        )));
    }
    Ok(out)
}

pub fn scan_carry_count(base: &[u64], k: usize, m: usize) -> u64 {
    let total: u64 = base.iter().product();
    let mut count = 0;
    for x in 0..total {
        let mut rest = x;
        let mut digits = Vec::with_capacity(base.len());
        for &b in base {
            digits.push(rest % b);
            rest /= b;
        }
        let j = (k + 1..base.len()).find(|&j| digits[j] + 1 < base[j]);
        if j == Some(m) {
            count += 1;
        }
    }
    count
}

fn named_group(name: &str, cfg: &LabConfig) -> Result<MarkedGamma> {
    match name {
        "z2xz3" => MarkedGamma::abelian_base(2, 3).map_err(|e| LabError::Config(e.to_string())),
        "s3" | "a5" => cfg.group(&GroupSpec::Named(name.into())),
        path => cfg.group(&GroupSpec::Table { table: path.into() }),
    }
}

/// Eccentricity of the identity, generators closed under inverses by search.
pub fn bfs_diameter(g: &FiniteGroup, gens: &[Elem]) -> u32 {
    let n = g.order() as Elem;
    let e = (0..n)
        .find(|&x| (0..n).all(|y| g.mul(x, y) == y))
        .expect("identity exists");
    let mut sym = gens.to_vec();
    for &s in gens {
        sym.extend((0..n).filter(|&h| g.mul(s, h) == e));
    }
    let mut dist = vec![u32::MAX; n as usize];
    dist[e as usize] = 0;
    let mut queue = VecDeque::from([e]);
    while let Some(x) = queue.pop_front() {
        for &s in &sym {
            let y = g.mul(x, s) as usize;
            if dist[y] == u32::MAX {
                dist[y] = dist[x as usize] + 1;
                queue.push_back(y as Elem);
            }
        }
    }
    dist.into_iter().max().unwrap_or(0)
}

pub fn window_count(atlas: &FolnerAtlas, idx: FolnerIndex) -> Result<u64> {
    let space = WindowSpace::new(atlas.params(), 0, idx.n as i64 - 1)?;
    Ok((0..space.states())
        .filter(|&s| atlas.contains(idx, &space.decode(s)))
        .count() as u64)
}
