//! Maps a language profile to an adaptation-strategy ranking.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokmetrics::LanguageProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    ExtremelyUnderRepresented,
    LimitedCapability,
    ModerateCapability,
}

impl Category {
    pub const ALL: [Category; 3] = [
        Category::ExtremelyUnderRepresented,
        Category::LimitedCapability,
        Category::ModerateCapability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::ExtremelyUnderRepresented => "extremely_under_represented",
            Category::LimitedCapability => "limited_capability",
            Category::ModerateCapability => "moderate_capability",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ZeroShotAlign,
    FewShot,
    Peft,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::ZeroShotAlign => "zero_shot_align",
            Strategy::FewShot => "few_shot",
            Strategy::Peft => "peft",
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Strategy::ZeroShotAlign => "zero-shot prompting with word or sentence alignment",
            Strategy::FewShot => "few-shot in-context learning",
            Strategy::Peft => "parameter-efficient fine-tuning (PEFT)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataInvestment {
    ParallelTranslation,
    TranslationOrAnnotationCostComparison,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Baseline accuracy below which a language may be extremely
    /// under-represented.
    pub extreme_baseline: f64,
    /// Baseline accuracy separating limited from moderate capability.
    pub moderate_baseline: f64,
    pub tbr_high: f64,
    pub ip_low: f64,
    /// A baseline exactly equal to `moderate_baseline` stays in the lower
    /// category when set.
    pub boundary_to_lower: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            extreme_baseline: 0.2,
            moderate_baseline: 0.45,
            tbr_high: 0.95,
            ip_low: 0.20,
            boundary_to_lower: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRanking {
    pub category: Category,
    pub ranking: [Strategy; 3],
    pub rationale: String,
    pub data_investment: DataInvestment,
}

pub fn categorize(profile: &LanguageProfile, thresholds: &Thresholds) -> Result<Category> {
    let baseline = profile.baseline_accuracy.ok_or(Error::MissingBaseline)?;
    if baseline < thresholds.extreme_baseline && profile.tbr > thresholds.tbr_high && profile.ip < thresholds.ip_low {
        return Ok(Category::ExtremelyUnderRepresented);
    }
    let limited = if thresholds.boundary_to_lower {
        baseline <= thresholds.moderate_baseline
    } else {
        baseline < thresholds.moderate_baseline
    };
    Ok(if limited {
        Category::LimitedCapability
    } else {
        Category::ModerateCapability
    })
}

pub fn rank_strategies(category: Category) -> StrategyRanking {
    use Strategy::*;
    let (ranking, data_investment, rationale) = match category {
        Category::ExtremelyUnderRepresented => (
            [ZeroShotAlign, FewShot, Peft],
            DataInvestment::ParallelTranslation,
            "zero-shot prompting with alignment > few-shot > PEFT: the model barely represents the language, \
             so labelled demonstrations and fine-tuning add little; invest in human translation of parallel data",
        ),
        Category::LimitedCapability => (
            [Peft, ZeroShotAlign, FewShot],
            DataInvestment::TranslationOrAnnotationCostComparison,
            "PEFT > zero-shot with alignment >= few-shot: fine-tuning pays off, but alignment prompts are a \
             close alternative; compare the cost of translating parallel data with the cost of annotating",
        ),
        Category::ModerateCapability => (
            [Peft, FewShot, ZeroShotAlign],
            DataInvestment::Annotation,
            "PEFT > few-shot > zero-shot with alignment: the model already handles the language, so labelled \
             data is the best investment; weigh the amount of data to annotate against the expected gain",
        ),
    };
    StrategyRanking {
        category,
        ranking,
        rationale: rationale.to_string(),
        data_investment,
    }
}

/// Human-readable report citing the measured values and thresholds.
pub fn explain(profile: &LanguageProfile, ranking: &StrategyRanking, thresholds: &Thresholds) -> String {
    let mut out = String::new();
    let baseline = profile
        .baseline_accuracy
        .map(|b| format!("{b:.3}"))
        .unwrap_or_else(|| "unknown".into());
    out.push_str(&format!(
        "Language {}: baseline accuracy {baseline}, TBR {:.3}, IP {:.3}, TP {:.3} (n = {}).\n",
        profile.language, profile.tbr, profile.ip, profile.tp, profile.n
    ));
    let cmp = |x: f64, t: f64, gt: bool| -> &'static str {
        match (gt, x > t, x < t) {
            (true, true, _) | (false, _, true) => "crosses",
            _ => "does not cross",
        }
    };
    if let Some(b) = profile.baseline_accuracy {
        out.push_str(&format!(
            "Baseline {b:.3} vs {:.2} (extreme) and {:.2} (moderate); TBR {:.3} {} the high-TBR threshold {:.2}; \
             IP {:.3} {} the low-IP threshold {:.2}.\n",
            thresholds.extreme_baseline,
            thresholds.moderate_baseline,
            profile.tbr,
            cmp(profile.tbr, thresholds.tbr_high, true),
            thresholds.tbr_high,
            profile.ip,
            cmp(profile.ip, thresholds.ip_low, false),
            thresholds.ip_low,
        ));
    }
    out.push_str(&format!("Category: {}.\n", ranking.category));
    out.push_str("Recommended order:\n");
    for (rank, s) in ranking.ranking.iter().enumerate() {
        out.push_str(&format!("  {}. {} ({})\n", rank + 1, s.as_str(), s.describe()));
    }
    out.push_str(&format!("Rationale: {}.\n", ranking.rationale));
    match ranking.category {
        Category::ExtremelyUnderRepresented => out.push_str(
            "Advice: avoid fine-tuning a multilingual model on languages of unseen scripts; prefer alignment \
             prompts. Providing labels in in-context examples might be useless for such languages.\n",
        ),
        Category::LimitedCapability => out.push_str(
            "Advice: PEFT is expected to lead, but zero-shot alignment prompts may be cheaper when parallel \
             data is easier to obtain than labels.\n",
        ),
        Category::ModerateCapability => out.push_str("Advice: start with PEFT on annotated data.\n"),
    }
    out.push_str(
        "Note: the TBR and IP cutoffs are interpolated defaults, not published values; override them when \
         calibrating on your own languages.\n",
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub language: String,
    pub category: Category,
    pub ranking: [Strategy; 3],
    pub investment: DataInvestment,
    pub rationale: String,
    pub explanation: String,
    pub thresholds: Thresholds,
    pub thresholds_note: String,
}

pub fn recommend(profile: &LanguageProfile, thresholds: &Thresholds) -> Result<Recommendation> {
    let category = categorize(profile, thresholds)?;
    let ranking = rank_strategies(category);
    Ok(Recommendation {
        language: profile.language.clone(),
        category,
        ranking: ranking.ranking,
        investment: ranking.data_investment,
        explanation: explain(profile, &ranking, thresholds),
        rationale: ranking.rationale,
        thresholds: thresholds.clone(),
        thresholds_note: "tbr_high and ip_low interpolate a figure annotation and are user-overridable".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn profile(baseline: f64, tbr: f64, ip: f64) -> LanguageProfile {
        LanguageProfile {
            language: "xxx_Xxxx".into(),
            ip,
            tbr,
            tp: 0.5,
            baseline_accuracy: Some(baseline),
            n: 10,
            skipped: 0,
            ip_orientation: crate::tokmetrics::IP_ORIENTATION.into(),
        }
    }

    #[test]
    fn reference_profiles_classify() {
        let t = Thresholds::default();
        assert_eq!(categorize(&profile(0.137, 0.995, 0.16), &t).unwrap(), Category::ExtremelyUnderRepresented);
        assert_eq!(categorize(&profile(0.387, 0.6, 0.39), &t).unwrap(), Category::LimitedCapability);
        assert_eq!(categorize(&profile(0.598, 0.5, 0.36), &t).unwrap(), Category::ModerateCapability);
    }

    #[test]
    fn boundary_and_missing_baseline() {
        let t = Thresholds::default();
        assert_eq!(categorize(&profile(0.45, 0.5, 0.5), &t).unwrap(), Category::LimitedCapability);
        let upper = Thresholds { boundary_to_lower: false, ..t.clone() };
        assert_eq!(categorize(&profile(0.45, 0.5, 0.5), &upper).unwrap(), Category::ModerateCapability);
        let mut p = profile(0.1, 1.0, 0.1);
        p.baseline_accuracy = None;
        assert!(matches!(categorize(&p, &t), Err(Error::MissingBaseline)));
    }

    #[test]
    fn explanation_mentions_key_advice() {
        let t = Thresholds::default();
        let p = profile(0.137, 0.995, 0.16);
        let r = recommend(&p, &t).unwrap();
        assert!(r.explanation.contains("avoid fine-tuning"));
        assert_eq!(r.explanation, recommend(&p, &t).unwrap().explanation);
        let m = recommend(&profile(0.6, 0.5, 0.4), &t).unwrap();
        assert!(m.explanation.contains("1. peft"));
    }
}
