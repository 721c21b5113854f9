use super::{CorpusError, Document};
use crate::embed::tokenize;

pub const MAX_SUMMARY_PASSES: usize = 3;
pub const DEFAULT_SUMMARY_THRESHOLD: usize = 500;

/// Text-to-text summarizer. Implementations must tolerate concurrent calls.
pub trait Summarizer: Send + Sync {
    fn summarize(&self, text: &str) -> Result<String, String>;
}

impl<F> Summarizer for F
where
    F: Fn(&str) -> Result<String, String> + Send + Sync,
{
    fn summarize(&self, text: &str) -> Result<String, String> {
        self(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub text: String,
    pub passes: usize,
    /// Still over the threshold after the pass cap.
    pub truncated: bool,
}

fn joined(sections: &[(String, String)]) -> String {
    sections.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join("\n\n")
}

fn token_count(sections: &[(String, String)]) -> usize {
    sections.iter().map(|(_, t)| tokenize(t).len()).sum()
}

/// Summarizes the body sections of `doc` until their combined length is at
/// most `threshold_tokens`.
pub fn hierarchical_summarize(
    doc: &Document,
    summarizer: &dyn Summarizer,
    threshold_tokens: usize,
) -> Result<Summary, CorpusError> {
    let sections: Vec<(String, String)> = doc.sections.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    summarize_sections(sections, summarizer, threshold_tokens)
}

/// Section-wise summarization of arbitrary named texts.
pub fn summarize_sections(
    mut sections: Vec<(String, String)>,
    summarizer: &dyn Summarizer,
    threshold_tokens: usize,
) -> Result<Summary, CorpusError> {
    if threshold_tokens == 0 {
        return Err(CorpusError::ZeroThreshold);
    }
    let mut passes = 0;
    while token_count(&sections) > threshold_tokens {
        if passes == MAX_SUMMARY_PASSES {
            return Ok(Summary { text: joined(&sections), passes, truncated: true });
        }
        for (name, text) in sections.iter_mut() {
            *text = summarizer
                .summarize(text)
                .map_err(|message| CorpusError::Summarizer { section: name.clone(), message })?;
        }
        passes += 1;
    }
    Ok(Summary { text: joined(&sections), passes, truncated: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use indexmap::IndexMap;
    use proptest::prelude::*;

    fn doc(sections: &[(&str, String)]) -> Document {
        Document {
            pmid: "1".into(),
            title: "t".into(),
            article_type: super::super::ArticleType::Other,
            sections: sections.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<IndexMap<_, _>>(),
            metadata: Default::default(),
        }
    }

    fn words(n: usize, tag: &str) -> String {
        (0..n).map(|i| format!("{tag}{i}")).collect::<Vec<_>>().join(" ")
    }

    fn first_50(text: &str) -> Result<String, String> {
        Ok(tokenize(text).into_iter().take(50).collect::<Vec<_>>().join(" "))
    }

    #[test]
    fn short_doc_is_identity() {
        let d = doc(&[("Abstract", words(10, "w"))]);
        let never = |_: &str| -> Result<String, String> { panic!("not called") };
        let s = hierarchical_summarize(&d, &never, DEFAULT_SUMMARY_THRESHOLD).unwrap();
        assert_eq!(s, Summary { text: words(10, "w"), passes: 0, truncated: false });
    }

    #[test]
    fn one_pass_of_first_50() {
        let d = doc(&[("Abstract", words(400, "a")), ("Methods", words(400, "m"))]);
        let s = hierarchical_summarize(&d, &first_50, 500).unwrap();
        assert_eq!(tokenize(&s.text).len(), 100);
        assert_eq!((s.passes, s.truncated), (1, false));
        assert_eq!(s.text, format!("{}\n\n{}", words(50, "a"), words(50, "m")));
    }

    #[test]
    fn non_shrinking_summarizer_hits_cap() {
        let d = doc(&[("Abstract", words(600, "a"))]);
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let same = |t: &str| -> Result<String, String> {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok(t.to_string())
        };
        let s = hierarchical_summarize(&d, &same, 500).unwrap();
        assert!(s.truncated);
        assert_eq!(s.passes, MAX_SUMMARY_PASSES);
        assert_eq!(calls.into_inner(), 3);
    }

    #[test]
    fn failure_names_section() {
        let d = doc(&[("Abstract", words(10, "a")), ("Results", words(600, "r"))]);
        let fail_on_r = |t: &str| -> Result<String, String> {
            if t.starts_with('r') { Err("boom".into()) } else { Ok(t.into()) }
        };
        match hierarchical_summarize(&d, &fail_on_r, 500) {
            Err(CorpusError::Summarizer { section, message }) => assert_eq!((section.as_str(), message.as_str()), ("Results", "boom")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(hierarchical_summarize(&d, &first_50, 0), Err(CorpusError::ZeroThreshold)));
    }

    proptest! {
        #[test]
        fn non_expanding_summarizer_never_grows(sizes in prop::collection::vec(0usize..300, 1..5), keep in 0usize..120, threshold in 1usize..400) {
            let secs: Vec<(String, String)> = sizes.iter().enumerate().map(|(i, n)| (format!("s{i}"), words(*n, "x"))).collect();
            let before: usize = sizes.iter().sum();
            let trunc = move |t: &str| -> Result<String, String> { Ok(tokenize(t).into_iter().take(keep).collect::<Vec<_>>().join(" ")) };
            let s = summarize_sections(secs, &trunc, threshold).unwrap();
            prop_assert!(tokenize(&s.text).len() <= before);
            prop_assert!(s.truncated || tokenize(&s.text).len() <= threshold);
        }
    }
}
