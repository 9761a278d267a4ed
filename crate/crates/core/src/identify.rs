//! From the surviving pair to the knot family and its toroidal slopes.
//!
//! Both framings are run: case A has `alpha` half-integral and `beta`
//! integral, case B the reverse. Each case solves for the meridian, runs its
//! twist script to the sister-link form, reads the framing constraint and
//! the family parameter `n` off the last parametric coefficient, and
//! extends the slopes to all `n` by the final twist of linking number `ell`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::CanonicalForm;
use crate::slope::{distance, linked_twist, Slope};
use crate::surgery::{
    run_script_file, same_active_description, CheckpointResult, Coefficient, ScriptFile, SurgeryDescription,
    SurgeryError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    A,
    B,
}

impl CaseTag {
    pub const BOTH: [CaseTag; 2] = [CaseTag::A, CaseTag::B];

    /// Distances `(Delta(mu, alpha), Delta(mu, beta))` in the frame where
    /// `alpha = 1/2`, `beta = 3`.
    pub fn meridian_distances(self) -> (u32, u32) {
        match self {
            CaseTag::A => (2, 1),
            CaseTag::B => (1, 2),
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            CaseTag::A => "alpha not integral, beta integral",
            CaseTag::B => "alpha integral, beta not integral",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::A => "A",
            CaseTag::B => "B",
        })
    }
}

#[derive(Debug, Error)]
pub enum IdentifyError {
    #[error("input is not the surviving pair (got {found}, expected {expected})")]
    NotSurvivor { found: String, expected: String },
    #[error("identification failed at checkpoint {name}: expected {expected}, found {found}")]
    Checkpoint {
        name: String,
        expected: String,
        found: String,
    },
    #[error("meridian: {0}")]
    Meridian(String),
    #[error("n = 1 gives k(2,-1,1,0), the trefoil, which is excluded")]
    ExcludedFamily,
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Every checked-in surgery input.
#[derive(Clone, Debug)]
pub struct KnotData {
    pub figure10: SurgeryDescription,
    pub figure12: SurgeryDescription,
    pub to_figure12: ScriptFile,
    pub final_a: ScriptFile,
    pub final_b: ScriptFile,
}

impl KnotData {
    pub fn from_texts(
        figure10: &str,
        figure12: &str,
        to_figure12: &str,
        final_a: &str,
        final_b: &str,
    ) -> Result<KnotData, SurgeryError> {
        Ok(KnotData {
            figure10: SurgeryDescription::parse(figure10)?,
            figure12: SurgeryDescription::parse(figure12)?,
            to_figure12: ScriptFile::parse(to_figure12)?,
            final_a: ScriptFile::parse(final_a)?,
            final_b: ScriptFile::parse(final_b)?,
        })
    }

    pub fn load_dir(dir: &Path) -> Result<KnotData, IdentifyError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| IdentifyError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        Ok(KnotData::from_texts(
            &read("figure10.surgery")?,
            &read("figure12.surgery")?,
            &read("twistscript.figure12")?,
            &read("twistscript.final.A")?,
            &read("twistscript.final.B")?,
        )?)
    }

    pub fn final_script(&self, case: CaseTag) -> &ScriptFile {
        match case {
            CaseTag::A => &self.final_a,
            CaseTag::B => &self.final_b,
        }
    }
}

/// The checked-in starting description; `p/q = 0/1` is rejected on
/// instantiation.
pub fn initial_description(data: &KnotData) -> &SurgeryDescription {
    &data.figure10
}

/// All slopes `m/n` with `|m|, |n| <= bound` at distance `da` from `alpha`
/// and `db` from `beta`.
pub fn meridian_candidates(alpha: &Slope, beta: &Slope, da: u32, db: u32, bound: i64) -> BTreeSet<Slope> {
    let mut out = BTreeSet::new();
    for m in -bound..=bound {
        for n in 0..=bound {
            let Ok(mu) = Slope::new(m, n) else { continue };
            if distance(&mu, alpha) == BigUint::from(da) && distance(&mu, beta) == BigUint::from(db) {
                out.insert(mu);
            }
        }
    }
    out
}

pub fn meridian_solve(alpha: &Slope, beta: &Slope, case: CaseTag) -> Result<Slope, IdentifyError> {
    let (da, db) = case.meridian_distances();
    let sols = meridian_candidates(alpha, beta, da, db, 100);
    match sols.len() {
        1 => Ok(sols.into_iter().next().expect("one")),
        0 => Err(IdentifyError::Meridian(format!("no slope within bound 100 for case {case}"))),
        _ => Err(IdentifyError::Meridian(format!(
            "{} solutions for case {case}: {:?}",
            sols.len(),
            sols.iter().map(Slope::to_string).collect::<Vec<_>>()
        ))),
    }
}

/// Case A: `4p + 3q = +-1`, `n = (4p+3q)(3p+2q)`.
/// Case B: `4q - 3p = +-1`, `n = -(4q-3p)(q-p) + 1`.
pub fn framing_constraint(case: CaseTag, p: i64, q: i64) -> (bool, BigInt) {
    let (p, q) = (BigInt::from(p), BigInt::from(q));
    match case {
        CaseTag::A => {
            let e = BigInt::from(4) * &p + BigInt::from(3) * &q;
            let n = &e * (BigInt::from(3) * &p + BigInt::from(2) * &q);
            (e.abs().is_one(), n)
        }
        CaseTag::B => {
            let e = BigInt::from(4) * &q - BigInt::from(3) * &p;
            let n = -(&e * (&q - &p)) + BigInt::one();
            (e.abs().is_one(), n)
        }
    }
}

/// `per_n * n + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSlope {
    pub per_n: BigInt,
    pub constant: Slope,
}

impl AffineSlope {
    pub fn at(&self, n: &BigInt) -> Slope {
        Slope::integer(&self.per_n * n).add(&self.constant)
    }
}

impl fmt::Display for AffineSlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}n", self.per_n)?;
        let c = &self.constant;
        if c.num().is_negative() {
            write!(f, "{c}")
        } else if c.num().is_zero() {
            Ok(())
        } else {
            write!(f, "+{c}")
        }
    }
}

fn affine(per_n: i64, num: i64, den: i64) -> AffineSlope {
    AffineSlope {
        per_n: per_n.into(),
        constant: Slope::new(num, den).expect("nonzero denominator"),
    }
}

/// Closed forms of the final slope pair.
pub fn final_slope_formulas(case: CaseTag) -> (AffineSlope, AffineSlope) {
    match case {
        CaseTag::A => (affine(25, -37, 2), affine(25, -16, 1)),
        CaseTag::B => (affine(25, -16, 1), affine(25, -37, 2)),
    }
}

pub fn final_slopes(n: &BigInt, case: CaseTag) -> Result<(Slope, Slope), IdentifyError> {
    if n.is_one() {
        return Err(IdentifyError::ExcludedFamily);
    }
    let (a, b) = final_slope_formulas(case);
    Ok((a.at(n), b.at(n)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToroidalSet {
    pub slopes: [Slope; 3],
    pub distances: [[u64; 3]; 3],
}

/// `{25n - 20, 25n - 37/2, 25n - 16}` with pairwise distances. The set is
/// defined for every `n`; only `n != 1` belongs to a hyperbolic knot.
pub fn toroidal_slope_set(n: &BigInt) -> ToroidalSet {
    let slopes = [
        affine(25, -20, 1).at(n),
        affine(25, -37, 2).at(n),
        affine(25, -16, 1).at(n),
    ];
    let mut distances = [[0u64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            distances[i][j] = distance(&slopes[i], &slopes[j]).to_u64().expect("small distance");
        }
    }
    ToroidalSet { slopes, distances }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseReport {
    pub case: CaseTag,
    pub description: String,
    pub meridian: Slope,
    /// The `S^3` condition on the remaining parametric framing.
    pub equation: String,
    pub n_formula: String,
    pub sister_framing: String,
    /// `|lk(K0, K2')|` in the sister-link form.
    pub ell: i64,
    pub alpha: AffineSlope,
    pub beta: AffineSlope,
    /// `(p, q, n)` for small solutions of the equation.
    pub sample: Vec<(i64, i64, BigInt)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub n: i64,
    pub reason: String,
    /// Parameters that reach the excluded value.
    pub reached_by: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkingEntry {
    pub pair: String,
    pub transcribed: i64,
    /// Values in the searched range consistent with every checkpoint.
    pub admissible: Vec<i64>,
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentificationReport {
    pub survivor: String,
    pub family: String,
    pub cases: Vec<CaseReport>,
    pub exclusions: Vec<Exclusion>,
    pub toroidal_set: Vec<String>,
    pub toroidal_distances: [[u64; 3]; 3],
    pub checkpoints: Vec<CheckpointResult>,
    pub linking: Vec<LinkingEntry>,
}

fn check(out: &mut Vec<CheckpointResult>, name: impl Into<String>, expected: impl fmt::Display, found: impl fmt::Display) {
    let (e, f) = (expected.to_string(), found.to_string());
    out.push(CheckpointResult {
        name: name.into(),
        ok: e == f,
        expected: e,
        found: f,
    });
}

const GRID: i64 = 40;

fn run_case(
    data: &KnotData,
    d12: &SurgeryDescription,
    case: CaseTag,
    checks: &mut Vec<CheckpointResult>,
) -> Result<CaseReport, IdentifyError> {
    let alpha = &d12.tracked["alpha"];
    let beta = &d12.tracked["beta"];
    let mu = meridian_solve(alpha, beta, case)?;
    let mut start = d12.clone();
    start.tracked.insert("mu".into(), mu.clone());
    let (fin, cps) = run_script_file(&start, data.final_script(case))?;
    checks.extend(cps.into_iter().map(|mut c| {
        c.name = format!("{case}: {}", c.name);
        c
    }));

    let knot = fin.knot();
    let active = fin.active();
    let params: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| matches!(fin.components[i].coefficient, Some(Coefficient::Param(_))))
        .collect();
    check(checks, format!("{case}: components left beside K0"), 1, active.len() - 1);
    check(checks, format!("{case}: parametric component left"), 1, params.len());
    let pi = *params.first().ok_or(IdentifyError::Checkpoint {
        name: format!("{case}: parametric component"),
        expected: "one".into(),
        found: "none".into(),
    })?;
    let coeff = fin.components[pi].coefficient.clone().expect("filled");
    let (a, b) = coeff.numerator().expect("parametric");
    let ell = fin.linking[knot][pi].abs();

    // Constraint and n read off the final framing, against the closed forms.
    let mut agree = true;
    let mut sample = Vec::new();
    for p in -GRID..=GRID {
        for q in -GRID..=GRID {
            if p == 0 || num_integer::Integer::gcd(&p, &q) != 1 {
                continue;
            }
            let (sat, n) = framing_constraint(case, p, q);
            let val = coeff.evaluate(&p.into(), &q.into()).map_err(SurgeryError::from)?;
            let ours = val.num().abs().is_one();
            if ours != sat {
                agree = false;
                continue;
            }
            if sat {
                let n_pipe = BigInt::one() - val.num() * val.den();
                if n_pipe != n {
                    agree = false;
                }
                if q > 0 && p.abs() <= 6 && q <= 6 && sample.len() < 6 {
                    sample.push((p, q, n));
                }
            }
        }
    }
    check(checks, format!("{case}: framing constraint matches closed form"), true, agree);

    let sister = (&fin.tracked["alpha"], &fin.tracked["beta"]);
    let l2 = BigInt::from(ell * ell);
    let shift = |s: &Slope| AffineSlope {
        per_n: l2.clone(),
        constant: linked_twist(s, -1, ell),
    };
    let (fa, fb) = (shift(sister.0), shift(sister.1));
    let (ea, eb) = final_slope_formulas(case);
    check(checks, format!("{case}: final alpha"), &ea, &fa);
    check(checks, format!("{case}: final beta"), &eb, &fb);
    let mut dist_ok = true;
    for n in -50i64..=50 {
        if n == 1 {
            continue;
        }
        let n = BigInt::from(n);
        let (x, y) = final_slopes(&n, case)?;
        let twisted = (linked_twist(sister.0, &n - 1, ell), linked_twist(sister.1, &n - 1, ell));
        dist_ok &= twisted == (x.clone(), y.clone()) && distance(&x, &y) == BigUint::from(5u32);
    }
    check(checks, format!("{case}: slopes at distance 5 for |n| <= 50"), true, dist_ok);

    let (equation, n_formula, row) = match case {
        CaseTag::A => ("4p+3q = +-1", "n = (4p+3q)(3p+2q)", (4, 3)),
        CaseTag::B => ("4q-3p = +-1", "n = -(4q-3p)(q-p)+1", (-3, 4)),
    };
    let row = (BigInt::from(row.0), BigInt::from(row.1));
    let same_row = (a.clone(), b.clone()) == row || (-&a, -&b) == row;
    check(checks, format!("{case}: equation {equation}"), true, same_row);

    Ok(CaseReport {
        case,
        description: case.describe().into(),
        meridian: mu,
        equation: equation.into(),
        n_formula: n_formula.into(),
        sister_framing: "-1/(n-1)".into(),
        ell,
        alpha: fa,
        beta: fb,
        sample,
    })
}

/// Off-diagonal entries of the starting linking matrix, searched jointly
/// over `-range..=range`: an assignment is admissible when the first script
/// takes it to the second description (up to orientation). An entry is
/// forced when its absolute value is the same in every admissible
/// assignment.
pub fn linking_freedom(data: &KnotData, range: i64) -> Result<Vec<LinkingEntry>, IdentifyError> {
    let d = &data.figure10;
    let script = data.to_figure12.script();
    let n = d.components.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let width = (2 * range + 1) as u64;
    let total = width.pow(pairs.len() as u32);
    let mut seen: Vec<BTreeSet<i64>> = vec![BTreeSet::new(); pairs.len()];
    let mut e = d.clone();
    for code in 0..total {
        let mut c = code;
        for &(i, j) in &pairs {
            let v = (c % width) as i64 - range;
            c /= width;
            e.linking[i][j] = v;
            e.linking[j][i] = v;
        }
        let after = crate::surgery::run_twist_script(&e, &script)?;
        if same_active_description(&after, &data.figure12) {
            for (k, &(i, j)) in pairs.iter().enumerate() {
                seen[k].insert(e.linking[i][j]);
            }
        }
    }
    Ok(pairs
        .iter()
        .zip(seen)
        .map(|(&(i, j), vals)| {
            let abs: BTreeSet<i64> = vals.iter().map(|v| v.abs()).collect();
            LinkingEntry {
                pair: format!("{},{}", d.components[i].id, d.components[j].id),
                transcribed: d.linking[i][j],
                forced: abs.len() == 1,
                admissible: vals.into_iter().collect(),
            }
        })
        .collect())
}

/// Run both framings from the checked-in data and collect every
/// checkpoint. Fails on the first checkpoint that does not hold.
pub fn identify(
    survivor: &CanonicalForm,
    expected: &CanonicalForm,
    data: &KnotData,
) -> Result<IdentificationReport, IdentifyError> {
    if survivor != expected {
        return Err(IdentifyError::NotSurvivor {
            found: survivor.id(),
            expected: expected.id(),
        });
    }
    let mut checks = Vec::new();
    let d10 = initial_description(data);
    let rejected = matches!(d10.instantiate(0, 1), Err(SurgeryError::ExcludedParameter));
    check(&mut checks, "p/q = 0/1 rejected", true, rejected);

    let (d12, cps) = run_script_file(d10, &data.to_figure12)?;
    checks.extend(cps);
    check(
        &mut checks,
        "second description matches its transcription",
        true,
        same_active_description(&d12, &data.figure12),
    );

    let mut cases = Vec::new();
    for case in CaseTag::BOTH {
        cases.push(run_case(data, &d12, case, &mut checks)?);
    }

    // Where n = 1 comes from: both equations reach it with p/q != 0/1.
    let mut reached_by = Vec::new();
    for case in CaseTag::BOTH {
        for p in -GRID..=GRID {
            for q in 1..=GRID {
                if num_integer::Integer::gcd(&p, &q) != 1 || p == 0 {
                    continue;
                }
                let (sat, n) = framing_constraint(case, p, q);
                if sat && n.is_one() {
                    reached_by.push(format!("{case}: p/q = {p}/{q}"));
                }
            }
        }
    }
    let exclusions = vec![Exclusion {
        n: 1,
        reason: "k(2,-1,1,0) is the trefoil, which is not hyperbolic; p/q != 0/1 alone does not exclude it".into(),
        reached_by,
    }];

    let set = toroidal_slope_set(&BigInt::zero());
    let constant = (-50i64..=50).all(|n| toroidal_slope_set(&BigInt::from(n)).distances == set.distances);
    check(&mut checks, "toroidal distance matrix constant in n", true, constant);
    check(&mut checks, "toroidal distances", "3,4,5", {
        let d = set.distances;
        format!("{},{},{}", d[0][1], d[0][2], d[1][2])
    });

    if let Some(bad) = checks.iter().find(|c| !c.ok) {
        return Err(IdentifyError::Checkpoint {
            name: bad.name.clone(),
            expected: bad.expected.clone(),
            found: bad.found.clone(),
        });
    }

    Ok(IdentificationReport {
        survivor: survivor.id(),
        family: "k(2,-1,n,0)".into(),
        cases,
        exclusions,
        toroidal_set: vec!["25n-20".into(), "25n-37/2".into(), "25n-16".into()],
        toroidal_distances: set.distances,
        checkpoints: checks,
        linking: linking_freedom(data, 1)?,
    })
}

pub fn report_json(r: &IdentificationReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

pub fn report_markdown(r: &IdentificationReport) -> String {
    let mut out = format!("# Identification\n\nSurviving pair `{}` gives the family {}.\n\n", r.survivor, r.family);
    for c in &r.cases {
        out.push_str(&format!(
            "## Case {} ({})\n\n- meridian: {}\n- equation: {}\n- {}\n- sister framing {}, linking {}\n- alpha = {}, beta = {}\n",
            c.case, c.description, c.meridian, c.equation, c.n_formula, c.sister_framing, c.ell, c.alpha, c.beta
        ));
        let s: Vec<String> = c.sample.iter().map(|(p, q, n)| format!("{p}/{q} -> n={n}")).collect();
        out.push_str(&format!("- sample: {}\n\n", s.join(", ")));
    }
    out.push_str("## Exclusions\n\n");
    for e in &r.exclusions {
        out.push_str(&format!("- n = {}: {} (reached by {})\n", e.n, e.reason, e.reached_by.join("; ")));
    }
    out.push_str(&format!(
        "\n## Toroidal slopes\n\n{{{}}}, distances {} / {} / {}\n\n",
        r.toroidal_set.join(", "),
        r.toroidal_distances[0][1],
        r.toroidal_distances[0][2],
        r.toroidal_distances[1][2]
    ));
    out.push_str("## Checkpoints\n\n| checkpoint | expected | found | ok |\n|---|---|---|---|\n");
    for c in &r.checkpoints {
        out.push_str(&format!("| {} | {} | {} | {} |\n", c.name, c.expected, c.found, if c.ok { "yes" } else { "NO" }));
    }
    out.push_str("\n## Linking data\n\n| pair | transcribed | admissible | forced |\n|---|---|---|---|\n");
    for l in &r.linking {
        let adm: Vec<String> = l.admissible.iter().map(i64::to_string).collect();
        out.push_str(&format!("| {} | {} | {} | {} |\n", l.pair, l.transcribed, adm.join(" "), if l.forced { "yes" } else { "no" }));
    }
    out
}
