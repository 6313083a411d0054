//! Paired significance testing between two evaluation runs, point-biserial
//! correlation and the multi-shot benefit indicator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Discordance table of two runs over the same examples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedOutcome {
    /// Run A correct, run B wrong.
    pub b: u64,
    /// Run A wrong, run B correct.
    pub c: u64,
    pub both_correct: u64,
    pub both_wrong: u64,
}

impl PairedOutcome {
    pub fn total(&self) -> u64 {
        self.b + self.c + self.both_correct + self.both_wrong
    }

    /// Build the table from `(id, correct)` outcomes of two runs. Both runs
    /// must cover exactly the same ids, each once.
    pub fn from_runs<'a, A, B>(a: A, b: B) -> Result<Self>
    where
        A: IntoIterator<Item = (&'a str, bool)>,
        B: IntoIterator<Item = (&'a str, bool)>,
    {
        let collect = |it: &mut dyn Iterator<Item = (&'a str, bool)>, name: &str| -> Result<BTreeMap<&'a str, bool>> {
            let mut m = BTreeMap::new();
            for (id, ok) in it {
                if m.insert(id, ok).is_some() {
                    return Err(Error::Pairing(format!("run {name} lists example {id:?} twice")));
                }
            }
            Ok(m)
        };
        let ma = collect(&mut a.into_iter(), "A")?;
        let mb = collect(&mut b.into_iter(), "B")?;
        let only_a: Vec<&str> = ma.keys().filter(|k| !mb.contains_key(*k)).copied().collect();
        let only_b: Vec<&str> = mb.keys().filter(|k| !ma.contains_key(*k)).copied().collect();
        if !only_a.is_empty() || !only_b.is_empty() {
            return Err(Error::Pairing(format!(
                "example ids differ: {} only in A (e.g. {:?}), {} only in B (e.g. {:?})",
                only_a.len(),
                only_a.first(),
                only_b.len(),
                only_b.first()
            )));
        }
        let mut out = PairedOutcome::default();
        for (id, ok_a) in &ma {
            match (ok_a, mb[id]) {
                (true, true) => out.both_correct += 1,
                (true, false) => out.b += 1,
                (false, true) => out.c += 1,
                (false, false) => out.both_wrong += 1,
            }
        }
        Ok(out)
    }

    pub fn swapped(&self) -> Self {
        PairedOutcome { b: self.c, c: self.b, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub p_value: f64,
    pub continuity_correction: bool,
    pub table: PairedOutcome,
}

/// Survival function of the chi-squared distribution with one degree of
/// freedom: `P(X > x) = erfc(sqrt(x / 2))`.
pub fn chi2_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        erfc((x / 2.0).sqrt())
    }
}

/// McNemar's test on a discordance table.
pub fn mcnemar(table: PairedOutcome, continuity_correction: bool) -> ChiSquaredResult {
    let (b, c) = (table.b as f64, table.c as f64);
    let statistic = if table.b + table.c == 0 {
        0.0
    } else if continuity_correction {
        ((b - c).abs() - 1.0).powi(2) / (b + c)
    } else {
        (b - c).powi(2) / (b + c)
    };
    ChiSquaredResult {
        statistic,
        p_value: chi2_1_sf(statistic),
        continuity_correction,
        table,
    }
}

/// Paired chi-squared test between two runs given as `(id, correct)`.
pub fn paired_chi_squared<'a, A, B>(a: A, b: B, continuity_correction: bool) -> Result<ChiSquaredResult>
where
    A: IntoIterator<Item = (&'a str, bool)>,
    B: IntoIterator<Item = (&'a str, bool)>,
{
    Ok(mcnemar(PairedOutcome::from_runs(a, b)?, continuity_correction))
}

/// `(M1 - M0) / s_n · sqrt(p q)` with the population standard deviation.
pub fn point_biserial(binary: &[u8], continuous: &[f64]) -> Result<f64> {
    if binary.len() != continuous.len() {
        return Err(Error::Stats(format!(
            "length mismatch: {} binary vs {} continuous values",
            binary.len(),
            continuous.len()
        )));
    }
    let n = binary.len();
    if n < 3 {
        return Err(Error::Stats(format!("need at least 3 observations, got {n}")));
    }
    if let Some(bad) = binary.iter().find(|&&x| x > 1) {
        return Err(Error::Stats(format!("binary variable contains {bad}")));
    }
    if continuous.iter().any(|x| !x.is_finite()) {
        return Err(Error::Stats("continuous variable contains a non-finite value".into()));
    }
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
    for (&g, &x) in binary.iter().zip(continuous) {
        if g == 1 {
            s1 += x;
            n1 += 1;
        } else {
            s0 += x;
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return Err(Error::Stats("one group of the binary variable is empty".into()));
    }
    let mean = continuous.iter().sum::<f64>() / n as f64;
    let var = continuous.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(Error::Stats("continuous variable has zero variance".into()));
    }
    let (m1, m0) = (s1 / n1 as f64, s0 / n0 as f64);
    let (p, q) = (n1 as f64 / n as f64, n0 as f64 / n as f64);
    Ok((m1 - m0) / var.sqrt() * (p * q).sqrt())
}

/// True when at least three of the four multi-shot accuracies strictly beat
/// the one-shot accuracy.
pub fn multishot_benefit(one_shot: f64, multi: &[f64]) -> Result<bool> {
    if multi.len() != 4 {
        return Err(Error::Stats(format!("expected 4 multi-shot accuracies, got {}", multi.len())));
    }
    if std::iter::once(&one_shot).chain(multi).any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::Stats("accuracies must lie in [0, 1]".into()));
    }
    Ok(multi.iter().filter(|&&a| a > one_shot).count() >= 3)
}
