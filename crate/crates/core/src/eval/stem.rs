use super::EvalError;

pub trait Stemmer: Send + Sync {
    fn name(&self) -> &'static str;

    fn stem(&self, word: &str) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityStemmer;

impl Stemmer for IdentityStemmer {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn stem(&self, word: &str) -> String {
        word.to_string()
    }
}

/// Strips one inflectional ending from lowercase Lithuanian words.
///
/// The longest matching ending is removed as long as at least
/// [`LithuanianLightStemmer::MIN_STEM_CHARS`] characters remain. Covers the
/// common noun and adjective declension endings only; verbs and derivational
/// suffixes are left alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct LithuanianLightStemmer;

impl LithuanianLightStemmer {
    pub const MIN_STEM_CHARS: usize = 3;

    /// Sorted longest first.
    pub const ENDINGS: &'static [&'static str] = &[
        "iuose", //
        "uose", "iams", "iais", "omis", "imis", "ėmis", "iuje", "ioje", "iose", "iems", "ams",
        "ais", "ose", "oje", "ėse", "ėje", "yse", "yje", "iai", "ius", "iui", "ims", "ies", "uje",
        "umi", "ems", "ios", "iam", "ėms", "oms", "imi", "ion", "iuo", "ių", "as", "is", "ys",
        "us", "os", "ės", "ai", "ui", "iu", "io", "ia", "ią", "mi", "ei", "ūs", "a", "e", "ė", "i",
        "o", "u", "ą", "ę", "į", "ų", "y", "ū",
    ];
}

impl Stemmer for LithuanianLightStemmer {
    fn name(&self) -> &'static str {
        "lithuanian-light"
    }

    fn stem(&self, word: &str) -> String {
        let total = word.chars().count();
        for ending in Self::ENDINGS {
            if let Some(stem) = word.strip_suffix(ending) {
                if total - ending.chars().count() >= Self::MIN_STEM_CHARS {
                    return stem.to_string();
                }
            }
        }
        word.to_string()
    }
}

pub const STEMMER_NAMES: &[&str] = &["identity", "lithuanian-light"];

pub fn stemmer_by_name(name: &str) -> Result<Box<dyn Stemmer>, EvalError> {
    match name {
        "identity" => Ok(Box::new(IdentityStemmer)),
        "lithuanian-light" => Ok(Box::new(LithuanianLightStemmer)),
        other => Err(EvalError::UnknownStemmer(other.to_string())),
    }
}

/// Applies the stemmer to every token.
pub fn stem_normalize(tokens: &[String], stemmer: &dyn Stemmer) -> Vec<String> {
    tokens.iter().map(|t| stemmer.stem(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endings_sorted_longest_first() {
        let lens: Vec<usize> = LithuanianLightStemmer::ENDINGS
            .iter()
            .map(|e| e.chars().count())
            .collect();
        assert!(lens.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn declensions_share_a_stem() {
        let s = LithuanianLightStemmer;
        let groups: &[&[&str]] = &[
            &[
                "namas", "namo", "namui", "namą", "name", "namai", "namų", "namams", "namuose",
            ],
            &["knyga", "knygos", "knygai", "knygą", "knygoje", "knygomis"],
            &["krepšininkas", "krepšininko", "krepšininkai", "krepšininkų"],
            &["žaidėjas", "žaidėjo", "žaidėjai", "žaidėjų"],
            &["rinktinė", "rinktinės", "rinktinėje", "rinktinę"],
        ];
        for group in groups {
            let stem = s.stem(group[0]);
            for word in group.iter() {
                assert_eq!(s.stem(word), stem, "{word}");
            }
        }
    }

    #[test]
    fn short_words_are_untouched() {
        let s = LithuanianLightStemmer;
        for w in ["ir", "tai", "jau", "lt"] {
            assert_eq!(s.stem(w), w);
        }
    }

    #[test]
    fn registry() {
        let words = vec!["namas".to_string(), "namo".to_string()];
        let id = stemmer_by_name("identity").unwrap();
        assert_eq!(stem_normalize(&words, id.as_ref()), words);
        let lt = stemmer_by_name("lithuanian-light").unwrap();
        let out = stem_normalize(&words, lt.as_ref());
        assert_eq!(out[0], out[1]);
        assert!(stem_normalize(&[], lt.as_ref()).is_empty());
        assert!(matches!(
            stemmer_by_name("porter"),
            Err(EvalError::UnknownStemmer(_))
        ));
    }
}
