//! Full run: diagnose, align, baseline and adaptation evaluations, paired
//! comparisons and the recommendation, bundled with a manifest.

use std::path::Path;

use lrlkit::aligner::extract_dictionary;
use lrlkit::harness::EvalReport;
use lrlkit::promptkit::Variant;
use lrlkit::tokmetrics::LanguageProfile;

use crate::commands::{
    alignments_text, compare_records, diagnose, eval_markdown, eval_variant, load_data, parallel_corpus,
    recommend_profile, train_model, write_eval, write_profile, Ctx, EvalOutcome,
};
use crate::error::{CliError, CliResult};
use crate::output::{write_json, write_plain, write_text, Manifest, ManifestWriter};

pub struct PipelineResult {
    pub manifest: Manifest,
    pub flagged: bool,
}

fn stage<T>(m: &mut ManifestWriter, name: &str, f: impl FnOnce(&mut ManifestWriter) -> CliResult<T>) -> CliResult<T> {
    tracing::info!(stage = name, "stage started");
    match f(m) {
        Ok(v) => {
            m.complete(name)?;
            Ok(v)
        }
        Err(e) => {
            m.fail(name, &e)?;
            Err(CliError::Stage { stage: name.to_string(), source: Box::new(e) })
        }
    }
}

pub fn run(ctx: &Ctx, out_dir: &Path, markdown: bool) -> CliResult<PipelineResult> {
    let (code, _) = ctx.lc.require_language()?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut m = ManifestWriter::new(out_dir, ctx.meta.clone(), code);
    m.save()?;

    let data = stage(&mut m, "load", |_| load_data(ctx))?;

    let mut profile: LanguageProfile = stage(&mut m, "diagnose", |m| {
        let p = diagnose(ctx, None)?;
        write_profile(ctx, &m.path("profile.json"), &p)?;
        m.add("profile.json")?;
        Ok(p)
    })?;

    let dict = stage(&mut m, "align", |m| {
        if let Some(p) = &ctx.lc.config.aligner.dictionary {
            let path = ctx.lc.resolve(p);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let dict = lrlkit::aligner::Dictionary::from_tsv(&text)?;
            write_text(&m.path("dictionary.tsv"), &ctx.meta, &dict.to_tsv())?;
            m.add("dictionary.tsv")?;
            return Ok(dict);
        }
        let corpus = parallel_corpus(ctx, Some(&data))?;
        let model = train_model(ctx, &corpus)?;
        write_text(&m.path("alignments.pharaoh"), &ctx.meta, &alignments_text(&model, &corpus)?)?;
        m.add("alignments.pharaoh")?;
        let dict = extract_dictionary(&model, &corpus)?;
        write_text(&m.path("dictionary.tsv"), &ctx.meta, &dict.to_tsv())?;
        m.add("dictionary.tsv")?;
        Ok(dict)
    })?;

    let mut runs: Vec<(Variant, EvalOutcome)> = Vec::new();
    let baseline = stage(&mut m, "baseline_eval", |m| {
        let o = eval_variant(ctx, &data, Variant::BaselineZero, None)?;
        save_eval(ctx, m, Variant::BaselineZero, &o)?;
        profile.baseline_accuracy = Some(o.report.accuracy);
        write_profile(ctx, &m.path("profile.json"), &profile)?;
        m.add("profile.json")?;
        Ok(o)
    })?;

    let variants: Vec<Variant> = ctx
        .lc
        .config
        .pipeline
        .variants
        .iter()
        .copied()
        .filter(|v| *v != Variant::BaselineZero)
        .collect();
    stage(&mut m, "adaptation_eval", |m| {
        for v in &variants {
            let o = eval_variant(ctx, &data, *v, Some(&dict))?;
            save_eval(ctx, m, *v, &o)?;
            runs.push((*v, o));
        }
        Ok(())
    })?;

    stage(&mut m, "compare", |m| {
        for (v, o) in &runs {
            let c = compare_records(
                Variant::BaselineZero.as_str(),
                &baseline.records,
                v.as_str(),
                &o.records,
                ctx.lc.config.eval.continuity_correction,
            )?;
            let name = format!("compare_{}.json", v.as_str());
            write_json(&m.path(&name), &ctx.meta, &c)?;
            m.add(&name)?;
        }
        Ok(())
    })?;

    let rec = stage(&mut m, "recommend", |m| {
        let rec = recommend_profile(&profile, &ctx.lc.config.recommend)?;
        write_json(&m.path("recommendation.json"), &ctx.meta, &rec)?;
        m.add("recommendation.json")?;
        Ok(rec)
    })?;

    if markdown || ctx.lc.config.pipeline.markdown {
        stage(&mut m, "summary", |m| {
            let mut reports: Vec<(Variant, &EvalReport)> = vec![(Variant::BaselineZero, &baseline.report)];
            reports.extend(runs.iter().map(|(v, o)| (*v, &o.report)));
            write_plain(&m.path("summary.md"), &eval_markdown(&reports, Some(&profile), Some(&rec)))?;
            m.add("summary.md")?;
            Ok(())
        })?;
    }

    let flagged = baseline.report.flagged || runs.iter().any(|(_, o)| o.report.flagged);
    m.manifest.flagged = flagged;
    m.save()?;
    Ok(PipelineResult { manifest: m.manifest.clone(), flagged })
}

fn save_eval(ctx: &Ctx, m: &mut ManifestWriter, v: Variant, o: &EvalOutcome) -> CliResult<()> {
    let report = format!("eval_{}.json", v.as_str());
    let records = format!("records_{}.jsonl", v.as_str());
    write_eval(ctx, &m.path(&report), &m.path(&records), o)?;
    m.add(&report)?;
    m.add(&records)
}
