use std::fs;
use std::path::Path;
use std::time::Duration;

use acueval::pipeline::backends::{
    CachedChecker, FixtureExtractor, GoldExtractor, LexicalChecker, SentenceExtractor,
};
use acueval::pipeline::remote::{RemoteChecker, RemoteClient, RemoteExtractor};
use acueval::pipeline::{CheckMode, Checker, Extractor};
use acueval::EvalExample;
use serde::Deserialize;

use crate::args::{BackendArgs, CheckerKind, ExtractorKind};
use crate::{CliResult, Failure};

pub const ENDPOINT_ENV: &str = "ACUEVAL_ENDPOINT";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    endpoint: Option<String>,
}

fn config_endpoint(path: &Path) -> CliResult<Option<String>> {
    let text = fs::read_to_string(path)?;
    let cfg: ConfigFile = toml::from_str(&text)
        .map_err(|e| acueval::Error::Validation(format!("config {}: {e}", path.display())))?;
    Ok(cfg.endpoint)
}

/// Endpoint from the flag, then the config file, then the environment.
pub fn resolve_endpoint(args: &BackendArgs) -> CliResult<Option<String>> {
    if let Some(e) = &args.endpoint {
        return Ok(Some(e.clone()));
    }
    if let Some(path) = &args.config {
        if let Some(e) = config_endpoint(path)? {
            return Ok(Some(e));
        }
    }
    Ok(std::env::var(ENDPOINT_ENV).ok().filter(|e| !e.is_empty()))
}

pub fn client(args: &BackendArgs) -> CliResult<RemoteClient> {
    let endpoint = resolve_endpoint(args)?.ok_or_else(|| {
        Failure::Usage(format!(
            "remote backends need --endpoint, an `endpoint` in --config, or {ENDPOINT_ENV}"
        ))
    })?;
    Ok(RemoteClient::with_timeout(
        endpoint,
        Duration::from_secs(args.timeout),
    ))
}

pub fn extractor(
    args: &BackendArgs,
    dataset: Option<&[EvalExample]>,
) -> CliResult<Box<dyn Extractor>> {
    Ok(match args.extractor {
        ExtractorKind::Sentence => Box::new(SentenceExtractor),
        ExtractorKind::Gold => {
            let ds =
                dataset.ok_or_else(|| Failure::Usage("--extractor gold needs a dataset".into()))?;
            Box::new(GoldExtractor::from_dataset(ds)?)
        }
        ExtractorKind::Fixture => {
            let path = args
                .fixture
                .as_ref()
                .ok_or_else(|| Failure::Usage("--extractor fixture needs --fixture".into()))?;
            Box::new(FixtureExtractor::from_json_file(path)?)
        }
        ExtractorKind::Remote => Box::new(RemoteExtractor::new(client(args)?)),
    })
}

pub fn checker(args: &BackendArgs, dataset: Option<&[EvalExample]>) -> CliResult<Box<dyn Checker>> {
    if args.contextual && args.checker != CheckerKind::Remote {
        return Err(Failure::Usage("--contextual needs --checker remote".into()));
    }
    if let Some(t) = args.threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(Failure::Usage(format!("threshold {t} outside [0, 1]")));
        }
    }
    Ok(match args.checker {
        CheckerKind::Lexical => {
            let mut c = LexicalChecker::default();
            if let Some(t) = args.threshold {
                c.threshold = t;
            }
            Box::new(c)
        }
        CheckerKind::Cached => {
            if args.threshold.is_some() {
                return Err(Failure::Usage(
                    "--threshold does not apply to --checker cached".into(),
                ));
            }
            let ds =
                dataset.ok_or_else(|| Failure::Usage("--checker cached needs a dataset".into()))?;
            Box::new(CachedChecker::from_dataset(ds))
        }
        CheckerKind::Remote => {
            let mode = if args.contextual {
                CheckMode::Contextual
            } else {
                CheckMode::Standard
            };
            Box::new(RemoteChecker::new(
                client(args)?,
                mode,
                args.threshold.unwrap_or(0.5),
            ))
        }
    })
}
